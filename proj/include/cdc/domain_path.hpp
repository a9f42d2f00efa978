#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cdc/error.hpp"

namespace cdc {

/// Segment tokens: non-empty runs of [A-Za-z0-9_].
inline bool is_token(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
           ch == '_';
  });
}

/// A point of the domain lattice. Paths are written outermost dimension first
/// ("Science@Physics@Quantum"); more segments means more specific, i.e. lower.
/// Top and bottom are distinguished kinds with no segments.
class DomainPath {
 public:
  enum class Kind : unsigned char { bottom, path, top };

  DomainPath() = default;  // top

  explicit DomainPath(std::vector<std::string> segments) : kind_(Kind::path), segments_(std::move(segments)) {
    if (segments_.empty()) throw Error(ErrorCode::parse_error, "domain path needs at least one segment");
    for (const auto& s : segments_) {
      if (!is_token(s)) throw Error(ErrorCode::parse_error, "invalid domain segment '" + s + "'");
    }
  }

  static DomainPath top() { return DomainPath{}; }
  static DomainPath bottom() {
    DomainPath d;
    d.kind_ = Kind::bottom;
    return d;
  }

  /// Accepts "A@B@C", an optional leading '@', and the bounds "⊤", "*", "⊥".
  static DomainPath parse(std::string_view text) {
    if (text == "⊤" || text == "*") return top();
    if (text == "⊥") return bottom();
    if (!text.empty() && text.front() == '@') text.remove_prefix(1);
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (true) {
      const auto at = text.find('@', start);
      segments.emplace_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
      if (at == std::string_view::npos) break;
      start = at + 1;
    }
    return DomainPath(std::move(segments));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_top() const noexcept { return kind_ == Kind::top; }
  bool is_bottom() const noexcept { return kind_ == Kind::bottom; }
  bool is_path() const noexcept { return kind_ == Kind::path; }
  const std::vector<std::string>& segments() const noexcept { return segments_; }
  std::size_t depth() const noexcept { return segments_.size(); }

  /// Syntactic prefix test on segment lists (paths only).
  bool has_prefix(const DomainPath& prefix) const {
    if (!is_path() || !prefix.is_path() || prefix.depth() > depth()) return false;
    return std::equal(prefix.segments_.begin(), prefix.segments_.end(), segments_.begin());
  }

  /// The first n segments; n must be in [1, depth()].
  DomainPath prefix(std::size_t n) const {
    return DomainPath(std::vector<std::string>(segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(n)));
  }

  std::vector<DomainPath> proper_prefixes() const {
    std::vector<DomainPath> out;
    for (std::size_t n = 1; n < depth(); ++n) out.push_back(prefix(n));
    return out;
  }

  DomainPath child(std::string segment) const {
    auto segs = segments_;
    segs.push_back(std::move(segment));
    return DomainPath(std::move(segs));
  }

  std::string to_string() const {
    if (is_top()) return "⊤";
    if (is_bottom()) return "⊥";
    std::string out;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (i) out += '@';
      out += segments_[i];
    }
    return out;
  }

  friend bool operator==(const DomainPath&, const DomainPath&) = default;
  friend std::strong_ordering operator<=>(const DomainPath& a, const DomainPath& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.segments_ <=> b.segments_;
  }

 private:
  Kind kind_ = Kind::top;
  std::vector<std::string> segments_;
};

/// Longest common segment prefix; empty when the paths share no first segment.
inline std::vector<std::string> common_prefix(const DomainPath& a, const DomainPath& b) {
  std::vector<std::string> out;
  const auto& sa = a.segments();
  const auto& sb = b.segments();
  for (std::size_t i = 0; i < sa.size() && i < sb.size() && sa[i] == sb[i]; ++i) out.push_back(sa[i]);
  return out;
}

}  // namespace cdc
