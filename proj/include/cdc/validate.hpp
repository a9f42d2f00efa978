#pragma once
// Reliability conditions over a loaded knowledge base, plus the lattice
// axioms and tier checks they lean on.

#include <set>
#include <string>
#include <vector>

#include "cdc/knowledge_base.hpp"
#include "cdc/traversal.hpp"

namespace cdc {

inline constexpr const char* kNonMonotone = "non_monotone";

struct ValidationReport {
  std::vector<AxiomCheck> checks;
  std::set<std::string> advisory;  // reported, not gating

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed && !advisory.count(c.id)) return false;
    return true;
  }
  const AxiomCheck* find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return &c;
    return nullptr;
  }
};

/// C1: finite depth under the cap (and an acyclic order to measure it on).
inline AxiomCheck check_c1(const DomainUniverse& u) {
  AxiomCheck c{"C1", "domain lattice has finite depth within h_max", true, 1, {}};
  if (u.has_cycle()) {
    c.fail("the order has a cycle, so depth is unbounded");
  } else if (u.height() > u.h_max()) {
    std::string deepest;
    for (const auto& d : u.paths())
      if (d.depth() == u.height()) deepest = d.to_string();
    c.fail("height " + std::to_string(u.height()) + " exceeds h_max " + std::to_string(u.h_max()) +
           (deepest.empty() ? "" : " at " + deepest));
  }
  return c;
}

/// C2: every relation that can take part in inheritance has its monotonicity
/// declared. A relation takes part when it has an edge r(c, x) in F(a) and
/// some strict descendant fiber of a mentions c, so a query there could
/// reach it. Declaring both monotone and non_monotone under one meta domain
/// is a conflict.
inline AxiomCheck check_c2(const DomainUniverse& u, const TypingTable& typing, const FiberStore& store) {
  AxiomCheck c{"C2", "monotonicity is declared for every relation used across layers", true, 0, {}};
  std::set<std::string> declared;
  for (const auto& [key, props] : typing.entries()) {
    if (props.count(kMonotone) || props.count(kNonMonotone)) declared.insert(key.first);
    if (props.count(kMonotone) && props.count(kNonMonotone))
      c.fail(key.first + " is both monotone and non_monotone at " + key.second.to_string());
  }
  std::set<std::string> flagged;
  for (const auto& [a, fa] : store.fibers()) {
    if (!a.is_path() || !u.contains(a)) continue;
    const auto below = u.strict_descendants(a);
    for (const auto& t : fa.triples()) {
      const bool reachable = std::any_of(below.begin(), below.end(), [&](const DomainPath& d) { return store.fiber(d).mentions(t.source); });
      if (!reachable) continue;
      ++c.cases;
      if (!declared.count(t.relation) && flagged.insert(t.relation).second)
        c.fail(t.relation + " is undeclared but " + t.to_string() + " is visible from a sub-domain");
    }
  }
  return c;
}

/// C3: the meta layer is finite and frozen for the reasoning run.
inline AxiomCheck check_c3(const TypingTable& typing) {
  AxiomCheck c{"C3", "meta layer is finite and sealed", true, typing.entries().size(), {}};
  if (!typing.sealed()) c.fail("typing table is not sealed");
  return c;
}

/// C4: each fiber is acyclic in every transitive relation.
inline AxiomCheck check_c4(const TypingTable& typing, const FiberStore& store) {
  AxiomCheck c{"C4", "fibers are acyclic in transitive relations", true, 0, {}};
  for (const auto& r : typing.relations_with(kTransitive))
    for (const auto& [d, f] : store.fibers()) {
      ++c.cases;
      if (auto cyc = cycle_check(store, r, d)) {
        std::string w;
        for (const auto& x : *cyc) w += (w.empty() ? "" : " -> ") + x;
        c.fail(r + "@" + d.to_string() + ": " + w);
      }
    }
  return c;
}

/// Everything `cdc validate` reports. A4 is advisory: the adjunction cannot
/// hold on any prefix tree that has a depth-2 path beside a sibling.
inline ValidationReport validate(const KnowledgeBase& kb) {
  ValidationReport rep;
  for (auto& c : validate_axioms(kb.universe).checks) rep.checks.push_back(std::move(c));
  rep.advisory.insert("A4");
  rep.checks.push_back(check_tiers(kb.typing, kb.universe));
  rep.checks.push_back(check_c1(kb.universe));
  rep.checks.push_back(check_c2(kb.universe, kb.typing, kb.store));
  rep.checks.push_back(check_c3(kb.typing));
  rep.checks.push_back(check_c4(kb.typing, kb.store));
  return rep;
}

}  // namespace cdc
