#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cdc/bridges.hpp"
#include "cdc/reindexing.hpp"

namespace cdc {

/// Read-only view over the pieces a reasoning run needs.
struct KbView {
  const DomainUniverse& universe;
  const TypingTable& typing;
  const FiberStore& store;
  const BridgeRegistry& bridges;
};

using Ctx = std::pair<std::string, DomainPath>;
using ContextSet = std::set<Ctx>;

enum class Layer : unsigned char { L1 = 1, L2, L3, L4, L5 };
inline std::string to_string(Layer l) { return "L" + std::to_string(static_cast<int>(l)); }

struct TraceStep {
  Layer layer = Layer::L2;
  std::string operation;
  Ctx input;
  ContextSet outputs;
  Provenance provenance;
};

// ---------------------------------------------------------------------------
// cycle detection

/// Depth-first search over r-edges of F(d). Returns the cycle as a closed
/// path [A, B, ..., A] when there is one.
inline std::optional<std::vector<std::string>> cycle_check(const FiberStore& store, const std::string& r,
                                                           const DomainPath& d) {
  const auto& f = store.fiber(d);
  std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::optional<std::vector<std::string>> found;

  std::function<bool(const std::string&)> visit = [&](const std::string& v) {
    color[v] = 1;
    stack.push_back(v);
    for (auto i : f.outgoing(v, r)) {
      const auto& w = f.triples()[i].target;
      const int c = color[w];
      if (c == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        found = std::vector<std::string>(it, stack.end());
        found->push_back(w);
        return true;
      }
      if (c == 0 && visit(w)) return true;
    }
    stack.pop_back();
    color[v] = 2;
    return false;
  };
  for (const auto& v : f.concepts())
    if (color[v] == 0 && visit(v)) break;
  return found;
}

// ---------------------------------------------------------------------------
// transitive closure

struct ClosureItem {
  std::string concept_name;
  DomainPath domain;
  Provenance provenance;
};

struct ClosureSummary {
  std::size_t levels = 0;   // L: ancestor levels consulted
  std::size_t bridges = 0;  // B: bridges followed
  std::size_t vertices = 0; // |V_d|
  std::size_t edges = 0;    // |E_d|
  std::size_t bound() const { return (levels + bridges + 1) * (vertices + edges); }
};

struct ClosureResult {
  std::vector<ClosureItem> items;  // canonical order: concept, then domain
  std::vector<TraceStep> trace;    // discovery order
  ClosureSummary summary;

  ContextSet contexts() const {
    ContextSet out;
    for (const auto& i : items) out.emplace(i.concept_name, i.domain);
    return out;
  }
};

/// Breadth-first closure of c under r at d. Each popped concept is expanded
/// by the query at d (L2), typed ancestor lookups filtered to concepts of F(d)
/// (L3, after a τ lookup at L5), and depth-1 bridges leaving d (L4). Anything
/// reached through a bridge, or derived from such a result, is a hypothesis.
inline ClosureResult transitive_closure(const KbView& kb, const std::string& c, const std::string& r, const DomainPath& d) {
  kb.universe.require(d);
  if (kb.typing.has_property(r, kTransitive)) {
    if (auto cyc = cycle_check(kb.store, r, d)) {
      std::string w;
      for (const auto& x : *cyc) w += (w.empty() ? "" : " -> ") + x;
      throw Error(ErrorCode::cyclic_requires, r + "@" + d.to_string() + " has the cycle " + w);
    }
  }
  ClosureResult res;
  const auto& fd = kb.store.fiber(d);
  res.summary.vertices = fd.concepts().size();
  res.summary.edges = fd.size();

  const bool monotone = kb.typing.tau(r, d, kb.universe) == Tau::monotone;
  const auto levels = ancestor_levels(kb.universe, d);
  const auto level_cap = std::min<std::size_t>(levels.size(), d.is_path() ? kb.universe.height() : 0);
  if (monotone) res.summary.levels = level_cap;
  const auto bridges = kb.bridges.from(d);

  std::map<std::string, Provenance> discovered{{c, Provenance::asserted()}};
  std::deque<std::string> queue{c};

  auto record = [&](Layer layer, std::string op, const std::string& input, std::vector<ClosureItem> found, Provenance prov) {
    TraceStep step{layer, std::move(op), {input, d}, {}, prov};
    for (auto& item : found) {
      step.outputs.emplace(item.concept_name, item.domain);
      if (discovered.emplace(item.concept_name, item.provenance).second) {
        res.items.push_back(item);
        queue.push_back(item.concept_name);
      }
    }
    res.trace.push_back(std::move(step));
  };

  while (!queue.empty()) {
    const auto current = queue.front();
    queue.pop_front();
    const auto base = discovered.at(current);
    auto carry = [&](Provenance p) { return base.is_hypothesis() ? base : p; };

    std::vector<ClosureItem> direct;
    for (const auto& h : kb.store.query_unchecked(current, r, d).hits)
      direct.push_back({h.target, h.domain, carry(Provenance::asserted())});
    record(Layer::L2, "query", current, std::move(direct), carry(Provenance::asserted()));

    record(Layer::L5, monotone ? "tau:monotone" : "tau:non-monotone", current, {}, carry(Provenance::asserted()));
    if (monotone) {
      for (std::size_t k = 0; k < level_cap; ++k) {
        std::vector<ClosureItem> inherited;
        for (const auto& a : levels[k]) {
          const auto& fa = kb.store.fiber(a);
          for (auto i : fa.outgoing(current, r)) {
            const auto& t = fa.triples()[i];
            if (fd.mentions(t.target)) inherited.push_back({t.target, a, carry(Provenance::inherited())});
          }
        }
        record(Layer::L3, "reindex", current, std::move(inherited), carry(Provenance::inherited()));
      }
    }

    for (const auto* phi : bridges) {
      auto image = (*phi)(current);
      if (!image) continue;
      ++res.summary.bridges;
      std::vector<ClosureItem> bridged;
      const auto hyp = Provenance::hypothesis(1);
      for (const auto& h : kb.store.query_unchecked(*image, r, phi->target_domain).hits)
        bridged.push_back({h.target, h.domain, base.is_hypothesis() ? base : hyp});
      record(Layer::L4, "bridge:" + *image + "@" + phi->target_domain.to_string(), current, std::move(bridged), hyp);
    }
  }
  std::sort(res.items.begin(), res.items.end(), [](const auto& a, const auto& b) {
    return std::tie(a.concept_name, a.domain) < std::tie(b.concept_name, b.domain);
  });
  return res;
}

/// Rebuilds a closure result from its trace alone: first discovery wins.
inline ContextSet replay(const std::vector<TraceStep>& trace, const std::string& start) {
  std::set<std::string> seen{start};
  ContextSet out;
  for (const auto& step : trace)
    for (const auto& [concept_name, domain] : step.outputs)
      if (seen.insert(concept_name).second) out.emplace(concept_name, domain);
  return out;
}

// ---------------------------------------------------------------------------
// Kleisli arrows over the powerset of (concept, domain)

using Arrow = std::function<ContextSet(const Ctx&)>;

inline ContextSet unit(const std::string& c, const DomainPath& d) { return {{c, d}}; }

inline Arrow unit_arrow() {
  return [](const Ctx& x) { return ContextSet{x}; };
}

/// c ↦ {(c', d') | r(c, c', d) asserted, or monotone-inherited from d'}.
/// The incoming domain is ignored: the step is scoped by its own d.
inline Arrow kleisli_step(const KbView& kb, const std::string& r, const DomainPath& d) {
  return [kb, r, d](const Ctx& x) {
    ContextSet out;
    for (const auto& h : scoped_lookup(kb.store, kb.universe, kb.typing, x.first, r, d).hits) out.emplace(h.target, h.domain);
    return out;
  };
}

/// (f ▷ g)(x) = ⋃_{y ∈ f(x)} g(y)
inline Arrow kleisli_compose(Arrow f, Arrow g) {
  return [f = std::move(f), g = std::move(g)](const Ctx& x) {
    ContextSet out;
    for (const auto& y : f(x)) {
      auto part = g(y);
      out.insert(part.begin(), part.end());
    }
    return out;
  };
}

inline ContextSet kleisli_bind(const ContextSet& m, const Arrow& f) {
  ContextSet out;
  for (const auto& x : m) {
    auto part = f(x);
    out.insert(part.begin(), part.end());
  }
  return out;
}

struct PathResult {
  ContextSet result;
  std::vector<ContextSet> stages;  // stages[0] is the unit
  std::vector<TraceStep> trace;
};

/// Folds the step arrows over unit(c0, d0), where d0 is the first step's
/// domain (or `start` when there are no steps).
inline PathResult traverse_path(const KbView& kb, const std::string& c0, const std::vector<std::pair<std::string, DomainPath>>& steps,
                                const DomainPath& start = DomainPath::top()) {
  PathResult res;
  const DomainPath d0 = steps.empty() ? start : steps.front().second;
  ContextSet cur = unit(c0, d0);
  res.stages.push_back(cur);
  for (const auto& [r, d] : steps) {
    kb.universe.require(d);
    const auto arrow = kleisli_step(kb, r, d);
    ContextSet next;
    for (const auto& x : cur) {
      auto part = arrow(x);
      const bool inherited = std::any_of(part.begin(), part.end(), [&](const Ctx& y) { return y.second != d; });
      res.trace.push_back({inherited ? Layer::L3 : Layer::L2, "kleisli:" + r + "@" + d.to_string(), x, part,
                           inherited ? Provenance::inherited() : Provenance::asserted()});
      next.insert(part.begin(), part.end());
    }
    cur = std::move(next);
    res.stages.push_back(cur);
  }
  res.result = std::move(cur);
  return res;
}

}  // namespace cdc
