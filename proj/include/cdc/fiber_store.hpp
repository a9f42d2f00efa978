#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cdc/domain_algebra.hpp"
#include "cdc/meta_tier.hpp"

namespace cdc {

struct Provenance {
  enum class Kind : unsigned char { asserted, inherited, hypothesis };
  Kind kind = Kind::asserted;
  std::size_t depth = 0;  // derivation depth, hypotheses only

  static Provenance asserted() { return {}; }
  static Provenance inherited() { return {Kind::inherited, 0}; }
  static Provenance hypothesis(std::size_t depth) {
    if (depth < 1) throw Error(ErrorCode::invalid_argument, "hypothesis depth must be >= 1");
    return {Kind::hypothesis, depth};
  }

  bool is_hypothesis() const noexcept { return kind == Kind::hypothesis; }
  std::string to_string() const {
    switch (kind) {
      case Kind::asserted: return "asserted";
      case Kind::inherited: return "inherited";
      case Kind::hypothesis: return "bridged-hypothesis(" + std::to_string(depth) + ")";
    }
    return "?";
  }
  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

struct Triple {
  std::string source;
  std::string relation;
  std::string target;
  DomainPath domain;
  double confidence = 1.0;
  Provenance provenance;

  /// Identity ignores confidence and provenance.
  auto key() const { return std::tie(domain, source, relation, target); }
  bool same_fact(const Triple& o) const { return key() == o.key(); }
  std::string to_string() const {
    return relation + "(" + source + ", " + target + ")@" + domain.to_string();
  }
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct QueryHit {
  std::string target;
  DomainPath domain;
  double confidence = 1.0;
  Provenance provenance;

  auto key() const { return std::tie(target, domain); }
  friend bool operator==(const QueryHit&, const QueryHit&) = default;
};

struct QueryStats {
  std::size_t candidates_examined = 0;  // triples actually inspected
  std::size_t fiber_size_bound = 0;     // total size of the fibers visited
  std::size_t domains_matched = 0;
};

struct QueryResult {
  std::vector<QueryHit> hits;  // sorted by (target, domain)
  QueryStats stats;

  std::vector<std::string> targets() const {
    std::set<std::string> out;
    for (const auto& h : hits) out.insert(h.target);
    return {out.begin(), out.end()};
  }
};

/// One fiber F(d): its triples plus a (source, relation) index.
class Fiber {
 public:
  const std::vector<Triple>& triples() const noexcept { return triples_; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  const Triple* find(const std::string& s, const std::string& r, const std::string& t) const {
    auto i = position(s, r, t);
    return i ? &triples_[*i] : nullptr;
  }

  /// Indices of triples with the given source and relation.
  const std::vector<std::size_t>& outgoing(const std::string& s, const std::string& r) const {
    static const std::vector<std::size_t> none;
    auto it = index_.find({s, r});
    return it == index_.end() ? none : it->second;
  }

  /// All concepts mentioned as source or target.
  const std::set<std::string>& concepts() const noexcept { return concepts_; }
  bool mentions(const std::string& c) const { return concepts_.count(c) != 0; }

  // Returns false when the fact was already present (confidence keeps the max).
  bool insert(Triple t) {
    if (auto i = position(t.source, t.relation, t.target)) {
      triples_[*i].confidence = std::max(triples_[*i].confidence, t.confidence);
      return false;
    }
    index_[{t.source, t.relation}].push_back(triples_.size());
    concepts_.insert(t.source);
    concepts_.insert(t.target);
    triples_.push_back(std::move(t));
    return true;
  }

 private:
  std::optional<std::size_t> position(const std::string& s, const std::string& r, const std::string& t) const {
    auto it = index_.find({s, r});
    if (it == index_.end()) return std::nullopt;
    for (auto i : it->second)
      if (triples_[i].target == t) return i;
    return std::nullopt;
  }

  std::vector<Triple> triples_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> index_;
  std::set<std::string> concepts_;
};

/// Triples partitioned by exact domain. Fibers are kept in an ordered map so a
/// prefix query walks one contiguous key range and never touches other fibers.
class FiberStore {
 public:
  enum class CyclePolicy : unsigned char { strict, lax };

  std::size_t size() const noexcept { return total_; }
  std::size_t version() const noexcept { return version_; }
  const std::map<DomainPath, Fiber>& fibers() const noexcept { return fibers_; }

  const Fiber& fiber(const DomainPath& d) const {
    static const Fiber empty;
    auto it = fibers_.find(d);
    return it == fibers_.end() ? empty : it->second;
  }

  bool insert_unchecked(Triple t) {
    auto& f = fibers_[t.domain];
    if (!f.insert(std::move(t))) return false;
    ++total_;
    ++version_;
    return true;
  }

  /// Mode 1 lookup over every fiber whose domain has d_prefix as a segment
  /// prefix. ⊤ matches everything, ⊥ nothing.
  QueryResult query_unchecked(const std::string& c, const std::string& r, const DomainPath& d_prefix) const {
    QueryResult out;
    if (d_prefix.is_bottom()) return out;
    auto it = d_prefix.is_top() ? fibers_.begin() : fibers_.lower_bound(d_prefix);
    for (; it != fibers_.end(); ++it) {
      if (!d_prefix.is_top() && !it->first.has_prefix(d_prefix)) break;
      ++out.stats.domains_matched;
      out.stats.fiber_size_bound += it->second.size();
      for (auto i : it->second.outgoing(c, r)) {
        ++out.stats.candidates_examined;
        const auto& t = it->second.triples()[i];
        out.hits.push_back({t.target, t.domain, t.confidence, t.provenance});
      }
    }
    std::sort(out.hits.begin(), out.hits.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    return out;
  }

  /// Linear scan over every stored triple; the pruning baseline.
  QueryResult full_scan(const std::string& c, const std::string& r, const DomainPath& d_prefix) const {
    QueryResult out;
    for (const auto& [d, f] : fibers_) {
      for (const auto& t : f.triples()) {
        ++out.stats.candidates_examined;
        const bool in_scope = d_prefix.is_top() || (d.is_path() && d.has_prefix(d_prefix));
        if (in_scope && t.source == c && t.relation == r) out.hits.push_back({t.target, t.domain, t.confidence, t.provenance});
      }
    }
    out.stats.fiber_size_bound = total_;
    std::sort(out.hits.begin(), out.hits.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    return out;
  }

 private:
  std::map<DomainPath, Fiber> fibers_;
  std::size_t total_ = 0;
  std::size_t version_ = 0;
};

/// A path following r-edges inside one fiber, from `to` back to `from`, if any.
inline std::optional<std::vector<std::string>> find_path(const Fiber& f, const std::string& r, const std::string& from,
                                                         const std::string& to) {
  std::map<std::string, std::string> parent;
  std::vector<std::string> queue{from};
  parent[from] = from;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto cur = queue[head];
    if (cur == to) {
      std::vector<std::string> path{to};
      for (auto x = to; x != from;) {
        x = parent[x];
        path.push_back(x);
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (auto i : f.outgoing(cur, r)) {
      const auto& next = f.triples()[i].target;
      if (parent.emplace(next, cur).second) queue.push_back(next);
    }
  }
  return std::nullopt;
}

/// Checked assertion. Returns true if the store changed.
inline bool extend(FiberStore& store, const DomainUniverse& u, const TypingTable& typing, Triple t,
                   FiberStore::CyclePolicy policy = FiberStore::CyclePolicy::strict) {
  if (!t.domain.is_path()) throw Error(ErrorCode::unregistered_domain, "facts need a registered path, got " + t.domain.to_string());
  if (typing.is_meta(t.domain)) throw Error(ErrorCode::tier_violation, t.domain.to_string() + " is a meta-tier domain");
  u.require(t.domain);
  if (!is_token(t.source) || !is_token(t.relation) || !is_token(t.target))
    throw Error(ErrorCode::invalid_argument, "triple fields must be tokens: " + t.to_string());
  if (!(t.confidence >= 0.0 && t.confidence <= 1.0))
    throw Error(ErrorCode::invalid_argument, "confidence outside [0,1] in " + t.to_string());
  if (policy == FiberStore::CyclePolicy::strict && typing.has_property(t.relation, kTransitive)) {
    const auto& f = store.fiber(t.domain);
    if (!f.find(t.source, t.relation, t.target)) {
      if (auto back = find_path(f, t.relation, t.target, t.source)) {
        std::string witness = t.source;
        for (const auto& c : *back) witness += " -> " + c;
        throw Error(ErrorCode::cyclic_requires, t.relation + "@" + t.domain.to_string() + " would close the cycle " + witness);
      }
    }
  }
  return store.insert_unchecked(std::move(t));
}

inline QueryResult query(const FiberStore& store, const DomainUniverse& u, const std::string& c, const std::string& r,
                         const DomainPath& d_prefix) {
  u.require(d_prefix);
  return store.query_unchecked(c, r, d_prefix);
}

inline const Fiber& fiber(const FiberStore& store, const DomainUniverse& u, const DomainPath& d) {
  u.require(d);
  return store.fiber(d);
}

}  // namespace cdc
