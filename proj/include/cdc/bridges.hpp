#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cdc/fiber_store.hpp"
#include "cdc/neural.hpp"

namespace cdc {

/// A partial concept map between two fibers. Depth 1 is asserted or accepted;
/// anything produced by composition is deeper and stays a hypothesis.
struct PartialMorphism {
  DomainPath source_domain;
  DomainPath target_domain;
  std::map<std::string, std::string> mapping;
  std::size_t depth = 1;
  std::optional<double> spr_cache;

  bool is_hypothesis() const noexcept { return depth > 1; }
  bool defined_on(const std::string& c) const { return mapping.count(c) != 0; }
  std::optional<std::string> operator()(const std::string& c) const {
    auto it = mapping.find(c);
    if (it == mapping.end()) return std::nullopt;
    return it->second;
  }
  Provenance provenance() const { return Provenance::hypothesis(depth); }
};

/// Asserted bridges, one morphism per ordered domain pair. Composed
/// morphisms can be recorded for inspection but never land here.
class BridgeRegistry {
 public:
  const std::map<std::pair<DomainPath, DomainPath>, PartialMorphism>& asserted() const noexcept { return asserted_; }
  const std::vector<PartialMorphism>& hypotheses() const noexcept { return hypotheses_; }

  const PartialMorphism* find(const DomainPath& d1, const DomainPath& d2) const {
    auto it = asserted_.find({d1, d2});
    return it == asserted_.end() ? nullptr : &it->second;
  }

  /// Depth-1 morphisms leaving d.
  std::vector<const PartialMorphism*> from(const DomainPath& d) const {
    std::vector<const PartialMorphism*> out;
    for (auto it = asserted_.lower_bound({d, DomainPath::bottom()}); it != asserted_.end() && it->first.first == d; ++it)
      out.push_back(&it->second);
    return out;
  }

  void assert_morphism(const PartialMorphism& phi) {
    if (phi.is_hypothesis())
      throw Error(ErrorCode::hypothesis_not_assertable,
                  "depth-" + std::to_string(phi.depth) + " morphism " + phi.source_domain.to_string() + " -> " +
                      phi.target_domain.to_string() + " is a hypothesis");
    auto& slot = asserted_[{phi.source_domain, phi.target_domain}];
    slot.source_domain = phi.source_domain;
    slot.target_domain = phi.target_domain;
    for (const auto& [a, b] : phi.mapping) {
      auto [it, fresh] = slot.mapping.emplace(a, b);
      if (!fresh && it->second != b)
        throw Error(ErrorCode::mapping_conflict, a + " already maps to " + it->second + ", not " + b);
    }
    slot.spr_cache.reset();
  }

  void record_hypothesis(PartialMorphism phi) { hypotheses_.push_back(std::move(phi)); }

 private:
  std::map<std::pair<DomainPath, DomainPath>, PartialMorphism> asserted_;
  std::vector<PartialMorphism> hypotheses_;
};

inline const PartialMorphism& add_bridge(BridgeRegistry& reg, const FiberStore& store, const DomainUniverse& u,
                                         const std::string& c1, const std::string& c2, const DomainPath& d1,
                                         const DomainPath& d2) {
  u.require(d1);
  u.require(d2);
  if (d1 == d2) throw Error(ErrorCode::self_bridge, "bridge inside " + d1.to_string());
  if (!store.fiber(d1).mentions(c1)) throw Error(ErrorCode::unknown_concept, c1 + " is not in F(" + d1.to_string() + ")");
  if (!store.fiber(d2).mentions(c2)) throw Error(ErrorCode::unknown_concept, c2 + " is not in F(" + d2.to_string() + ")");
  PartialMorphism phi{d1, d2, {{c1, c2}}, 1, std::nullopt};
  reg.assert_morphism(phi);
  return *reg.find(d1, d2);
}

/// Out-edges per source in one fiber, as (relation, target).
inline std::map<std::string, std::vector<std::pair<std::string, std::string>>> out_edges(const Fiber& f) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> out;
  for (const auto& t : f.triples()) out[t.source].emplace_back(t.relation, t.target);
  return out;
}

struct SprDetail {
  double value = 0.0;
  std::map<std::string, double> per_concept;
};

/// Structural preservation rate: for each c in dom(φ), the share of c's
/// out-edges (r, c') whose image φ(c) -r'-> φ(c') exists with τ(r') = τ(r).
/// Concepts with no out-edges count as fully preserved.
inline SprDetail spr_detail(const PartialMorphism& phi, const FiberStore& store, const TypingTable& typing) {
  if (phi.mapping.empty()) throw Error(ErrorCode::empty_domain_of_definition, "morphism has an empty domain of definition");
  const auto src = out_edges(store.fiber(phi.source_domain));
  const auto& dst = store.fiber(phi.target_domain);
  SprDetail out;
  double sum = 0.0;
  for (const auto& [c, image] : phi.mapping) {
    auto it = src.find(c);
    if (it == src.end() || it->second.empty()) {
      out.per_concept[c] = 1.0;
      sum += 1.0;
      continue;
    }
    std::size_t ok = 0;
    for (const auto& [r, c2] : it->second) {
      auto mapped = phi(c2);
      if (!mapped) continue;
      const auto cls = typing.tau(r);
      for (const auto& t : dst.triples()) {
        if (t.source == image && t.target == *mapped && typing.tau(t.relation) == cls) {
          ++ok;
          break;
        }
      }
    }
    const double v = static_cast<double>(ok) / static_cast<double>(it->second.size());
    out.per_concept[c] = v;
    sum += v;
  }
  out.value = sum / static_cast<double>(phi.mapping.size());
  return out;
}

inline double spr(const PartialMorphism& phi, const FiberStore& store, const TypingTable& typing) {
  return spr_detail(phi, store, typing).value;
}

struct ComposeResult {
  PartialMorphism morphism;
  std::size_t dom_first = 0;
  std::size_t dom_composed = 0;
  std::vector<std::string> dropped;     // in dom(φ12) but not in the composite
  std::vector<std::string> incomplete;  // φ12(N(c)) ⊄ dom(φ23)

  bool shrank() const noexcept { return dom_composed < dom_first; }
};

inline ComposeResult compose(const PartialMorphism& phi12, const PartialMorphism& phi23, const FiberStore& store) {
  if (phi12.target_domain != phi23.source_domain)
    throw Error(ErrorCode::domain_mismatch, "cannot compose " + phi12.target_domain.to_string() + " with " +
                                                phi23.source_domain.to_string());
  ComposeResult res;
  res.morphism.source_domain = phi12.source_domain;
  res.morphism.target_domain = phi23.target_domain;
  res.morphism.depth = std::max(phi12.depth, phi23.depth) + 1;
  res.dom_first = phi12.mapping.size();
  const auto edges = out_edges(store.fiber(phi12.source_domain));
  for (const auto& [c, mid] : phi12.mapping) {
    auto end = phi23(mid);
    if (!end) {
      res.dropped.push_back(c);
      continue;
    }
    res.morphism.mapping.emplace(c, *end);
    if (auto it = edges.find(c); it != edges.end()) {
      for (const auto& e : it->second) {
        auto m = phi12(e.second);
        if (!m || !phi23.defined_on(*m)) {
          res.incomplete.push_back(c);
          break;
        }
      }
    }
  }
  res.dom_composed = res.morphism.mapping.size();
  return res;
}

// ---------------------------------------------------------------------------
// fuses_with

struct FuseOptions {
  bool authorized = false;
  std::optional<std::string> name;
  std::size_t baseline_size = 0;  // |D| the growth monitor compares against; 0 = current size
  double growth_multiplier = 4.0;
};

struct FuseResult {
  DomainPath fused;
  std::size_t height_before = 0;
  std::size_t height_after = 0;
  std::size_t version = 0;
  std::size_t size_after = 0;
  bool growth_alert = false;
  AxiomCheck conservative;
};

namespace detail {

inline std::string fuse_name(const DomainPath& a, const DomainPath& b) {
  auto flat = [](const DomainPath& d) {
    std::string s;
    for (const auto& seg : d.segments()) s += (s.empty() ? "" : "_") + seg;
    return s;
  };
  return flat(a) + "__" + flat(b);
}

}  // namespace detail

/// Checks leq and meet over all old pairs and join over all old pairs except
/// the fused one, between the universe before and after.
inline AxiomCheck conservative_extension_check(const DomainUniverse& before, const DomainUniverse& after,
                                               const DomainPath& d1, const DomainPath& d2) {
  AxiomCheck check{"fuse", "fusion is a conservative extension", true, 0, {}};
  const auto elems = before.elements();
  for (const auto& a : elems)
    for (const auto& b : elems) {
      ++check.cases;
      if (before.leq(a, b) != after.leq(a, b)) check.fail("order changed at " + a.to_string() + ", " + b.to_string());
      try {
        if (before.meet(a, b) != after.meet(a, b)) check.fail("meet changed at " + a.to_string() + ", " + b.to_string());
      } catch (const Error& e) {
        check.fail(e.what());
      }
      const bool fused_pair = (a == d1 && b == d2) || (a == d2 && b == d1);
      if (!fused_pair && before.join(a, b) != after.join(a, b))
        check.fail("join changed at " + a.to_string() + ", " + b.to_string());
    }
  return check;
}

/// Adds a new root above d1 and d2 through Δ. Needs explicit authorization;
/// refused once the height cap is reached or would be exceeded.
inline FuseResult fuse(DomainUniverse& u, const DomainPath& d1, const DomainPath& d2, const FuseOptions& opt = {}) {
  if (!opt.authorized) throw Error(ErrorCode::unauthorized, "fuse requires explicit authorization");
  u.require(d1);
  u.require(d2);
  if (!d1.is_path() || !d2.is_path()) throw Error(ErrorCode::invalid_argument, "fuse takes registered paths");
  if (d1 == d2) throw Error(ErrorCode::invalid_argument, "fusing " + d1.to_string() + " with itself is a no-op");
  FuseResult res;
  res.height_before = u.height();
  if (res.height_before >= u.h_max())
    throw Error(ErrorCode::height_bound_reached, "height " + std::to_string(res.height_before) + " is at h_max");

  std::string base = opt.name.value_or(detail::fuse_name(d1, d2));
  if (!is_token(base)) throw Error(ErrorCode::invalid_argument, "fused name must be a single token: " + base);
  std::string name = base;
  for (int k = 2; u.contains(DomainPath({name})); ++k) name = base + "_" + std::to_string(k);
  const DomainPath fused({name});

  DomainUniverse next = u;
  next.add(fused);
  next.declare_delta(d1, d2, fused);
  next.record_fusion({d1, d2, fused});
  res.height_after = next.height();
  if (res.height_after > next.h_max())
    throw Error(ErrorCode::height_bound_reached, "fusing would raise height to " + std::to_string(res.height_after));
  res.conservative = conservative_extension_check(u, next, d1, d2);
  u = std::move(next);
  res.fused = fused;
  res.version = u.version();
  res.size_after = u.size();
  const auto baseline = opt.baseline_size ? opt.baseline_size : res.size_after - 1;
  res.growth_alert = static_cast<double>(res.size_after) > opt.growth_multiplier * static_cast<double>(baseline);
  return res;
}

// ---------------------------------------------------------------------------
// discovery

struct BridgeProposal {
  std::string source;
  std::string target;
  double similarity = 0.0;
};

/// All concept pairs across the two fibers with cosine similarity of their
/// domain-conditioned embeddings above theta. Proposals only; nothing is
/// asserted. Ordered by source then target.
inline std::vector<BridgeProposal> discover_bridges(const EmbeddingStore& e, const FiberStore& store, const DomainPath& d1,
                                                    const DomainPath& d2, double theta) {
  (void)e.domain_vec(d1);
  (void)e.domain_vec(d2);
  const auto& c1s = store.fiber(d1).concepts();
  const auto& c2s = store.fiber(d2).concepts();
  std::vector<std::pair<std::string, Vec>> rhs;
  rhs.reserve(c2s.size());
  for (const auto& c : c2s) rhs.emplace_back(c, embed_concept(e, c, d2));
  std::vector<BridgeProposal> out;
  for (const auto& a : c1s) {
    const auto va = embed_concept(e, a, d1);
    for (const auto& [b, vb] : rhs) {
      const double s = cosine(va, vb);
      if (s > theta) out.push_back({a, b, s});
    }
  }
  return out;
}

/// The explicit accept step for a proposal.
inline const PartialMorphism& accept_proposal(BridgeRegistry& reg, const FiberStore& store, const DomainUniverse& u,
                                              const BridgeProposal& p, const DomainPath& d1, const DomainPath& d2) {
  return add_bridge(reg, store, u, p.source, p.target, d1, d2);
}

}  // namespace cdc
