#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cdc/bridges.hpp"
#include "cdc/kb_format.hpp"
#include "cdc/traversal.hpp"

namespace cdc {

/// One utterance-level observation (a `fact` line).
struct Observation {
  std::string subject;
  std::string token;
  DomainPath domain;
  std::string concept_name;
  std::optional<int> freq;
  double confidence = 1.0;
  std::size_t line = 0;
};

struct LoadOptions {
  std::size_t h_max = DomainUniverse::default_h_max;
  FiberStore::CyclePolicy cycles = FiberStore::CyclePolicy::strict;
  bool seal = true;
};

class KnowledgeBase {
 public:
  DomainUniverse universe;
  TypingTable typing;
  FiberStore store;
  BridgeRegistry bridges;
  std::vector<Observation> observations;
  std::map<std::string, DomainPath> aliases;
  std::vector<kb::Diagnostic> diagnostics;

  KbView view() const { return {universe, typing, store, bridges}; }

  bool ok() const {
    return std::none_of(diagnostics.begin(), diagnostics.end(), [](const auto& d) { return d.severity == "error"; });
  }

  /// Parses a path and expands an alias in its first segment.
  DomainPath resolve(const std::string& text) const {
    auto p = DomainPath::parse(text);
    if (!p.is_path()) return p;
    auto it = aliases.find(p.segments().front());
    if (it == aliases.end()) return p;
    auto segs = it->second.segments();
    segs.insert(segs.end(), p.segments().begin() + 1, p.segments().end());
    return DomainPath(std::move(segs));
  }

  /// Concept names from quoted strings become tokens through a symbol table:
  /// runs of other characters collapse to '_', collisions get a numeric suffix.
  std::string symbol(const std::string& name) {
    if (is_token(name)) return name;
    if (auto it = symbols_.find(name); it != symbols_.end()) return it->second;
    std::string tok;
    for (unsigned char ch : name) {
      if (std::isalnum(ch) || ch == '_') {
        tok += static_cast<char>(ch);
      } else if (!tok.empty() && tok.back() != '_') {
        tok += '_';
      }
    }
    while (!tok.empty() && tok.back() == '_') tok.pop_back();
    if (tok.empty()) tok = "sym";
    std::string candidate = tok;
    for (int k = 2; taken_.count(candidate); ++k) candidate = tok + "_" + std::to_string(k);
    taken_.insert(candidate);
    symbols_.emplace(name, candidate);
    return candidate;
  }
  const std::map<std::string, std::string>& symbols() const noexcept { return symbols_; }

  /// Loads statements in dependency order: aliases, domains, tiers, deltas,
  /// meta entries, triples, facts, bridges. Semantic failures become
  /// diagnostics on the offending line; loading carries on.
  void load(const kb::Document& doc, const LoadOptions& opt = {}) {
    diagnostics.insert(diagnostics.end(), doc.diagnostics.begin(), doc.diagnostics.end());
    universe.set_h_max(opt.h_max);
    typing.unseal();
    auto each = [&](auto tag, auto&& fn) {
      using T = decltype(tag);
      for (const auto& s : doc.statements) {
        if (const auto* st = std::get_if<T>(&s.stmt)) {
          try {
            fn(*st, s.line);
          } catch (const Error& e) {
            diagnostics.push_back({s.line, "error", e.what()});
          }
        }
      }
    };
    each(kb::AliasStmt{}, [&](const kb::AliasStmt& s, std::size_t) {
      const auto target = DomainPath::parse(s.path);
      if (auto it = aliases.find(s.name); it != aliases.end() && it->second != target)
        throw Error(ErrorCode::invalid_argument, "alias " + s.name + " redefined");
      aliases[s.name] = target;
    });
    each(kb::DomainStmt{}, [&](const kb::DomainStmt& s, std::size_t) {
      const auto d = resolve(s.path);
      if (typing.is_meta(d)) throw Error(ErrorCode::tier_violation, d.to_string() + " is a meta-tier domain");
      universe.add(d);
    });
    each(kb::TierStmt{}, [&](const kb::TierStmt& s, std::size_t) {
      typing.declare_tier(DomainPath::parse(s.meta), s.scope == "*" ? DomainPath::top() : resolve(s.scope), universe);
    });
    each(kb::DeltaStmt{}, [&](const kb::DeltaStmt& s, std::size_t) {
      universe.declare_delta(resolve(s.lhs), resolve(s.rhs), resolve(s.upper));
    });
    each(kb::MetaStmt{}, [&](const kb::MetaStmt& s, std::size_t) {
      typing.declare_meta(s.relation, s.property, DomainPath::parse(s.domain));
    });
    each(kb::TripleStmt{}, [&](const kb::TripleStmt& s, std::size_t) {
      extend(store, universe, typing,
             {symbol(s.source), s.relation, symbol(s.target), resolve(s.domain), s.conf.value_or(1.0), Provenance::asserted()},
             opt.cycles);
    });
    each(kb::FactStmt{}, [&](const kb::FactStmt& s, std::size_t line) {
      Observation o{symbol(s.subject), symbol(s.token), resolve(s.domain), symbol(s.concept_name), s.freq, s.conf.value_or(1.0), line};
      extend(store, universe, typing, {o.subject, o.token, o.concept_name, o.domain, o.confidence, Provenance::asserted()},
             opt.cycles);
      observations.push_back(std::move(o));
    });
    each(kb::BridgeStmt{}, [&](const kb::BridgeStmt& s, std::size_t) {
      add_bridge(bridges, store, universe, symbol(s.c1), symbol(s.c2), resolve(s.d1), resolve(s.d2));
    });
    if (opt.seal) typing.seal();
  }

 private:
  std::map<std::string, std::string> symbols_;
  std::set<std::string> taken_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline KnowledgeBase load_kb_text(std::string_view text, const LoadOptions& opt = {}) {
  KnowledgeBase kbase;
  kbase.load(kb::parse(text), opt);
  return kbase;
}

/// Loads several files into one knowledge base, in order.
inline KnowledgeBase load_kb_files(const std::vector<std::string>& paths, const LoadOptions& opt = {}) {
  kb::Document merged;
  for (const auto& p : paths) {
    auto doc = kb::parse(read_file(p));
    for (auto& d : doc.diagnostics) d.message = p + ": " + d.message;
    merged.statements.insert(merged.statements.end(), doc.statements.begin(), doc.statements.end());
    merged.diagnostics.insert(merged.diagnostics.end(), doc.diagnostics.begin(), doc.diagnostics.end());
  }
  KnowledgeBase kbase;
  kbase.load(merged, opt);
  return kbase;
}

}  // namespace cdc
