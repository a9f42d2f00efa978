#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdc/fiber_store.hpp"

namespace cdc {

/// Abstraction: the same fact as asserted in the parent fiber, if it is there.
/// Never fabricates.
inline std::optional<Triple> alpha(const FiberStore& store, const DomainUniverse& u, const Triple& t,
                                   const DomainPath& d_parent) {
  if (!u.leq(t.domain, d_parent))
    throw Error(ErrorCode::incomparable_domains, t.domain.to_string() + " is not below " + d_parent.to_string());
  if (const auto* found = store.fiber(d_parent).find(t.source, t.relation, t.target)) return *found;
  return std::nullopt;
}

/// Typed concretization into d_child: a child-scoped copy when the relation is
/// monotone where the child lives, undefined otherwise.
inline std::optional<Triple> gamma_tau(const DomainUniverse& u, const TypingTable& typing, const Triple& t,
                                       const DomainPath& d_child) {
  if (!u.leq(d_child, t.domain))
    throw Error(ErrorCode::incomparable_domains, d_child.to_string() + " is not below " + t.domain.to_string());
  if (d_child == t.domain) return t;
  if (typing.tau(t.relation, d_child, u) != Tau::monotone) return std::nullopt;
  Triple copy = t;
  copy.domain = d_child;
  copy.provenance = Provenance::inherited();
  return copy;
}

/// Strict ancestors of d grouped by covering level: level 1 holds the
/// immediate parents, level k the parents of level k-1 not seen before.
inline std::vector<std::vector<DomainPath>> ancestor_levels(const DomainUniverse& u, const DomainPath& d) {
  std::vector<std::vector<DomainPath>> levels;
  if (!d.is_path()) return levels;
  auto covers = [&](const DomainPath& x) {
    const auto ups = u.strict_ancestors(x);
    std::vector<DomainPath> out;
    for (const auto& a : ups) {
      const bool minimal = std::none_of(ups.begin(), ups.end(), [&](const DomainPath& b) { return b != a && u.leq(b, a); });
      if (minimal) out.push_back(a);
    }
    return out;
  };
  std::set<DomainPath> seen{d};
  std::vector<DomainPath> frontier{d};
  while (!frontier.empty()) {
    std::set<DomainPath> next;
    for (const auto& x : frontier)
      for (const auto& p : covers(x))
        if (!seen.count(p)) next.insert(p);
    if (next.empty()) break;
    seen.insert(next.begin(), next.end());
    levels.emplace_back(next.begin(), next.end());
    frontier.assign(next.begin(), next.end());
  }
  return levels;
}

struct InheritedResult {
  std::vector<QueryHit> hits;  // sorted by (target, domain); domain = origin
  QueryStats stats;
  std::size_t steps = 0;  // ancestor levels walked

  std::vector<std::string> targets() const {
    std::set<std::string> out;
    for (const auto& h : hits) out.insert(h.target);
    return {out.begin(), out.end()};
  }
};

/// Typed gates inheritance on τ; standard inherits every relation, the
/// untyped baseline used to show what τ blocks.
enum class Propagation : unsigned char { typed, standard };

/// Matches of (c, r) in the ancestor fibers of d, gated by γ_τ unless the
/// mode is standard. Walks covering levels nearest first, at most height(u)
/// of them; each hit is tagged with the ancestor it came from.
inline std::size_t ancestor_hits(const FiberStore& store, const DomainUniverse& u, const TypingTable& typing,
                                 const std::string& c, const std::string& r, const DomainPath& d, Propagation mode,
                                 std::vector<QueryHit>& hits, QueryStats& stats) {
  const bool typed = mode == Propagation::typed;
  if (!d.is_path() || (typed && typing.tau(r, d, u) != Tau::monotone)) return 0;
  const auto limit = u.height();
  std::size_t steps = 0;
  for (const auto& level : ancestor_levels(u, d)) {
    if (steps == limit) break;
    ++steps;
    for (const auto& a : level) {
      const auto& f = store.fiber(a);
      ++stats.domains_matched;
      stats.fiber_size_bound += f.size();
      for (auto i : f.outgoing(c, r)) {
        ++stats.candidates_examined;
        const auto& t = f.triples()[i];
        if (!typed || gamma_tau(u, typing, t, d)) hits.push_back({t.target, a, t.confidence, Provenance::inherited()});
      }
    }
  }
  return steps;
}

inline void canonicalize(std::vector<QueryHit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const auto& x, const auto& y) { return x.key() < y.key(); });
  hits.erase(std::unique(hits.begin(), hits.end(), [](const auto& x, const auto& y) { return x.key() == y.key(); }), hits.end());
}

/// Prefix query at d, plus γ_τ-images of matches found in ancestor fibers.
inline InheritedResult inherited_query(const FiberStore& store, const DomainUniverse& u, const TypingTable& typing,
                                       const std::string& c, const std::string& r, const DomainPath& d,
                                       Propagation mode = Propagation::typed) {
  InheritedResult out;
  auto direct = query(store, u, c, r, d);
  out.hits = std::move(direct.hits);
  out.stats = direct.stats;
  out.steps = ancestor_hits(store, u, typing, c, r, d, mode, out.hits, out.stats);
  canonicalize(out.hits);
  return out;
}

/// Exact fiber F(d) plus typed ancestor matches; no descendants.
inline InheritedResult scoped_lookup(const FiberStore& store, const DomainUniverse& u, const TypingTable& typing,
                                     const std::string& c, const std::string& r, const DomainPath& d) {
  InheritedResult out;
  u.require(d);
  const auto& f = store.fiber(d);
  out.stats.domains_matched = 1;
  out.stats.fiber_size_bound = f.size();
  for (auto i : f.outgoing(c, r)) {
    ++out.stats.candidates_examined;
    const auto& t = f.triples()[i];
    out.hits.push_back({t.target, d, t.confidence, t.provenance});
  }
  out.steps = ancestor_hits(store, u, typing, c, r, d, Propagation::typed, out.hits, out.stats);
  canonicalize(out.hits);
  return out;
}

/// Entailment on triples: identical fact up to domain specialization.
inline bool triple_leq(const DomainUniverse& u, const Triple& a, const Triple& b) {
  return a.source == b.source && a.relation == b.relation && a.target == b.target && u.leq(a.domain, b.domain);
}

struct GaloisReport {
  std::size_t adjunction_cases = 0;
  std::size_t closure_cases = 0;
  std::size_t excluded = 0;  // non-monotone edges outside the connection
  std::vector<std::string> violations;
  std::vector<std::string> excluded_witnesses;

  bool passed() const { return violations.empty(); }
};

/// Exhaustive check over every comparable pair d_c ⊑ d_p and every edge of
/// F(d_p) and F(d_c): the adjunction τ_c ⊑ γ(τ_p) ⇔ α(τ_c) ⊑ τ_p where both
/// sides are defined, and the closure laws of γ∘α on the child fiber.
inline GaloisReport galois_check(const DomainUniverse& u, const TypingTable& typing, const FiberStore& store) {
  GaloisReport rep;
  auto violate = [&](std::string w) {
    if (rep.violations.size() < 16) rep.violations.push_back(std::move(w));
  };
  auto closure = [&](const Triple& t, const DomainPath& d_p) -> std::optional<Triple> {
    auto a = alpha(store, u, t, d_p);
    if (!a) return std::nullopt;
    return gamma_tau(u, typing, *a, t.domain);
  };

  for (const auto& [d, f] : store.fibers())
    for (const auto& t : f.triples())
      if (t.provenance.kind == Provenance::Kind::inherited && typing.tau(t.relation, d, u) != Tau::monotone)
        violate("non-monotone " + t.to_string() + " stored as inherited");

  for (const auto& d_p : u.paths()) {
    const auto& fp = store.fiber(d_p);
    for (const auto& d_c : u.strict_descendants(d_p)) {
      const auto& fc = store.fiber(d_c);
      for (const auto& tp : fp.triples()) {
        const auto img = gamma_tau(u, typing, tp, d_c);
        if (!img) {
          ++rep.excluded;
          if (rep.excluded_witnesses.size() < 16) rep.excluded_witnesses.push_back(tp.to_string() + " into " + d_c.to_string());
          continue;
        }
        // Candidates for τ_c: the image itself and every native child edge with the same relation.
        std::vector<Triple> candidates{*img};
        for (const auto& tc : fc.triples())
          if (tc.relation == tp.relation) candidates.push_back(tc);
        for (const auto& tc : candidates) {
          const auto a = alpha(store, u, tc, d_p);
          if (!a) continue;
          ++rep.adjunction_cases;
          const bool lhs = triple_leq(u, tc, *img);
          const bool rhs = triple_leq(u, *a, tp);
          if (lhs != rhs) violate("adjunction at " + tc.to_string() + " vs " + tp.to_string());
        }
      }
      for (const auto& tc : fc.triples()) {
        if (typing.tau(tc.relation, d_c, u) != Tau::monotone) continue;
        const auto once = closure(tc, d_p);
        if (!once) continue;
        ++rep.closure_cases;
        if (!triple_leq(u, tc, *once)) violate("not extensive at " + tc.to_string());
        const auto twice = closure(*once, d_p);
        if (!twice || !twice->same_fact(*once)) violate("not idempotent at " + tc.to_string());
        // Monotone: any tc' ⊑ tc in the same fiber closes below closure(tc).
        for (const auto& other : fc.triples()) {
          if (!triple_leq(u, other, tc)) continue;
          const auto c2 = closure(other, d_p);
          if (c2 && !triple_leq(u, *c2, *once)) violate("not monotone at " + other.to_string());
        }
      }
    }
  }
  return rep;
}

}  // namespace cdc
