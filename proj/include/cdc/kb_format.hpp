#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "cdc/domain_path.hpp"

namespace cdc::kb {

// Paths are kept as written (alias expansion happens at load time) so a
// document round-trips exactly. Concept names may be arbitrary quoted text.

struct DomainStmt {
  std::string path;
};
struct AliasStmt {
  std::string name;
  std::string path;
};
struct DeltaStmt {
  std::string lhs, rhs, upper;
};
struct TierStmt {
  std::string meta;
  std::string scope;  // "*" for ⊤
};
struct MetaStmt {
  std::string relation, property, domain;
};
struct TripleStmt {
  std::string relation, source, target, domain;
  std::optional<double> conf;
};
struct FactStmt {
  std::string subject, token, domain, concept_name;
  std::optional<int> freq;
  std::optional<double> conf;
};
struct BridgeStmt {
  std::string c1, d1, c2, d2;
};

using Statement = std::variant<DomainStmt, AliasStmt, DeltaStmt, TierStmt, MetaStmt, TripleStmt, FactStmt, BridgeStmt>;

struct Located {
  std::size_t line = 0;
  Statement stmt;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based; 0 for document-level
  std::string severity;  // "error" | "warning"
  std::string message;
};

struct Document {
  std::vector<Located> statements;
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    return std::none_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.severity == "error"; });
  }
};

// ---------------------------------------------------------------------------
// formatting

inline std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, end);
}

/// Bare when the name is a token, otherwise a quoted string with escapes.
inline std::string format_name(const std::string& s) {
  if (is_token(s)) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  return out + "\"";
}

inline std::string format(const Statement& st) {
  struct V {
    std::string operator()(const DomainStmt& s) const { return "domain " + s.path; }
    std::string operator()(const AliasStmt& s) const { return "alias " + s.name + " = " + s.path; }
    std::string operator()(const DeltaStmt& s) const { return "delta " + s.lhs + " , " + s.rhs + " -> " + s.upper; }
    std::string operator()(const TierStmt& s) const { return "tier meta " + s.meta + " scope " + s.scope; }
    std::string operator()(const MetaStmt& s) const { return "meta " + s.relation + " " + s.property + " @ " + s.domain; }
    std::string operator()(const TripleStmt& s) const {
      std::string out = "triple " + s.relation + "(" + format_name(s.source) + ", " + format_name(s.target) + ") @ " + s.domain;
      if (s.conf) out += " conf=" + format_real(*s.conf);
      return out;
    }
    std::string operator()(const FactStmt& s) const {
      std::string out = "fact " + format_name(s.subject) + " " + format_name(s.token) + " @ " + s.domain + " -> " +
                        format_name(s.concept_name);
      if (s.freq) out += " freq=" + std::to_string(*s.freq);
      if (s.conf) out += " conf=" + format_real(*s.conf);
      return out;
    }
    std::string operator()(const BridgeStmt& s) const {
      return "bridge " + format_name(s.c1) + " @ " + s.d1 + " ~ " + format_name(s.c2) + " @ " + s.d2;
    }
  };
  return std::visit(V{}, st);
}

/// Canonical text: statements sorted by (kind, text), one per line.
inline std::string serialize(const Document& doc) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  lines.reserve(doc.statements.size());
  for (const auto& s : doc.statements) lines.emplace_back(s.stmt.index(), format(s.stmt));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& [k, text] : lines) out += text + "\n";
  return out;
}

/// Same statements as a multiset, ignoring order, comments and spacing.
inline bool equivalent(const Document& a, const Document& b) { return serialize(a) == serialize(b); }

// ---------------------------------------------------------------------------
// parsing

namespace detail {

struct Tok {
  enum Kind { word, string, punct, end } kind = end;
  std::string text;
  std::size_t col = 0;
};

inline bool word_char(char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' || ch == '.';
}

class LineLexer {
 public:
  explicit LineLexer(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char ch = line[i];
      if (ch == '#') break;
      if (ch == ' ' || ch == '\t' || ch == '\r') {
        ++i;
        continue;
      }
      if (word_char(ch)) {
        const auto start = i;
        while (i < line.size() && word_char(line[i])) ++i;
        toks_.push_back({Tok::word, std::string(line.substr(start, i - start)), start + 1});
      } else if (ch == '"') {
        const auto start = i++;
        std::string value;
        bool closed = false;
        while (i < line.size()) {
          if (line[i] == '\\' && i + 1 < line.size()) {
            const char e = line[i + 1];
            value += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            i += 2;
          } else if (line[i] == '"') {
            closed = true;
            ++i;
            break;
          } else {
            value += line[i++];
          }
        }
        if (!closed) throw std::runtime_error("unterminated string at column " + std::to_string(start + 1));
        toks_.push_back({Tok::string, value, start + 1});
      } else if (line.substr(i, 2) == "->") {
        toks_.push_back({Tok::punct, "->", i + 1});
        i += 2;
      } else if (line.substr(i, 3) == "⊤") {
        toks_.push_back({Tok::punct, "*", i + 1});
        i += 3;
      } else if (std::string_view("@,()=~*[]").find(ch) != std::string_view::npos) {
        toks_.push_back({Tok::punct, std::string(1, ch), i + 1});
        ++i;
      } else {
        throw std::runtime_error("unexpected character '" + std::string(1, ch) + "' at column " + std::to_string(i + 1));
      }
    }
    toks_.push_back({Tok::end, "", line.size() + 1});
  }

  const Tok& peek() const { return toks_[pos_]; }
  Tok next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == Tok::end; }
  bool accept(std::string_view punct) {
    if (peek().kind == Tok::punct && peek().text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view punct) {
    if (!accept(punct)) fail("expected '" + std::string(punct) + "'");
  }
  [[noreturn]] void fail(const std::string& what) const {
    const auto& t = peek();
    const std::string got = t.kind == Tok::end ? "end of line" : "'" + t.text + "'";
    throw std::runtime_error(what + " at column " + std::to_string(t.col) + ", got " + got);
  }

  std::string token(const char* what) {
    if (peek().kind != Tok::word || !is_token(peek().text)) fail(std::string("expected ") + what);
    return next().text;
  }
  std::string name(const char* what) {
    if (peek().kind == Tok::string) return next().text;
    return token(what);
  }
  std::string path() {
    std::string out;
    if (accept("@")) {}  // leading '@' is stripped
    out = token("domain segment");
    while (peek().kind == Tok::punct && peek().text == "@" && toks_[pos_ + 1].kind == Tok::word) {
      ++pos_;
      out += "@" + token("domain segment");
    }
    return out;
  }

 private:
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

inline double parse_real(const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    throw std::runtime_error("malformed number '" + text + "'");
  return v;
}

inline int parse_int(const std::string& text) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw std::runtime_error("malformed integer '" + text + "'");
  return v;
}

/// Trailing key=value annotations, optionally wrapped in [ ].
inline void annotations(LineLexer& lx, std::optional<int>* freq, std::optional<double>* conf) {
  while (!lx.at_end()) {
    const bool bracket = lx.accept("[");
    const auto key = lx.token("annotation");
    lx.expect("=");
    if (lx.peek().kind != Tok::word) lx.fail("expected a value");
    const auto value = lx.next().text;
    if (key == "conf" && conf) {
      if (*conf) throw std::runtime_error("conf given twice");
      *conf = parse_real(value);
      if (**conf < 0.0 || **conf > 1.0) throw std::runtime_error("conf must be in [0,1], got " + value);
    } else if (key == "freq" && freq) {
      if (*freq) throw std::runtime_error("freq given twice");
      *freq = parse_int(value);
      if (**freq < 0 || **freq > 3) throw std::runtime_error("freq must be in 0..3, got " + value);
    } else {
      throw std::runtime_error("unknown annotation '" + key + "'");
    }
    if (bracket) lx.expect("]");
  }
}

inline Statement parse_statement(LineLexer& lx, const std::string& head) {
  if (head == "domain") return DomainStmt{lx.path()};
  if (head == "alias") {
    AliasStmt s;
    s.name = lx.token("alias name");
    lx.expect("=");
    s.path = lx.path();
    return s;
  }
  if (head == "delta") {
    DeltaStmt s;
    s.lhs = lx.path();
    lx.expect(",");
    s.rhs = lx.path();
    lx.expect("->");
    s.upper = lx.path();
    return s;
  }
  if (head == "tier") {
    if (lx.token("'meta'") != "meta") throw std::runtime_error("only 'tier meta' is supported");
    TierStmt s;
    s.meta = lx.path();
    if (lx.token("'scope'") != "scope") throw std::runtime_error("expected 'scope'");
    s.scope = lx.accept("*") ? "*" : lx.path();
    return s;
  }
  if (head == "meta") {
    MetaStmt s;
    s.relation = lx.token("relation");
    s.property = lx.token("property");
    lx.expect("@");
    s.domain = lx.path();
    return s;
  }
  if (head == "triple") {
    TripleStmt s;
    s.relation = lx.token("relation");
    lx.expect("(");
    s.source = lx.name("source concept");
    lx.expect(",");
    s.target = lx.name("target concept");
    lx.expect(")");
    lx.expect("@");
    s.domain = lx.path();
    annotations(lx, nullptr, &s.conf);
    return s;
  }
  if (head == "fact") {
    FactStmt s;
    s.subject = lx.name("subject");
    s.token = lx.name("utterance token");
    lx.expect("@");
    s.domain = lx.path();
    lx.expect("->");
    s.concept_name = lx.name("concept");
    annotations(lx, &s.freq, &s.conf);
    return s;
  }
  if (head == "bridge") {
    BridgeStmt s;
    s.c1 = lx.name("concept");
    lx.expect("@");
    s.d1 = lx.path();
    lx.expect("~");
    s.c2 = lx.name("concept");
    lx.expect("@");
    s.d2 = lx.path();
    return s;
  }
  throw std::runtime_error("unknown statement '" + head + "'");
}

}  // namespace detail

/// Line-oriented parse. Bad lines become diagnostics; everything else is kept.
inline Document parse(std::string_view text) {
  Document doc;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    try {
      detail::LineLexer lx(line);
      if (!lx.at_end()) {
        if (lx.peek().kind != detail::Tok::word) lx.fail("expected a statement keyword");
        const auto head = lx.next().text;
        auto st = detail::parse_statement(lx, head);
        if (!lx.at_end()) lx.fail("unexpected trailing input");
        doc.statements.push_back({line_no, std::move(st)});
      }
    } catch (const std::exception& e) {
      doc.diagnostics.push_back({line_no, "error", e.what()});
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return doc;
}

}  // namespace cdc::kb
