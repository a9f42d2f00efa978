#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cdc/fiber_store.hpp"

namespace cdc {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double sup_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
inline double cosine(const Vec& a, const Vec& b) {
  const double na = norm2(a), nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

/// 64-bit FNV-1a; seeds the fixed domain vectors.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

using NodeKey = std::pair<std::string, DomainPath>;

struct EmbeddingStore {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::map<NodeKey, Vec> h_c;
  std::map<std::string, Vec> h_r;
  std::map<DomainPath, Vec> h_d;

  const Vec& concept_vec(const std::string& c, const DomainPath& d) const {
    auto it = h_c.find({c, d});
    if (it == h_c.end()) throw Error(ErrorCode::missing_embeddings, "no embedding for " + c + "@" + d.to_string());
    return it->second;
  }
  const Vec& relation_vec(const std::string& r) const {
    auto it = h_r.find(r);
    if (it == h_r.end()) throw Error(ErrorCode::missing_embeddings, "no embedding for relation " + r);
    return it->second;
  }
  const Vec& domain_vec(const DomainPath& d) const {
    auto it = h_d.find(d);
    if (it == h_d.end()) throw Error(ErrorCode::missing_embeddings, "no embedding for domain " + d.to_string());
    return it->second;
  }
  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;
};

/// Deterministic h_d: a generator seeded by the path hash, scaled to `norm`.
inline Vec domain_vector(const DomainPath& d, std::size_t dim, double norm) {
  std::mt19937_64 rng(fnv1a(d.to_string()));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(dim);
  for (auto& x : v) x = u(rng);
  const double n = norm2(v);
  for (auto& x : v) x *= norm / n;
  return v;
}

struct EmbeddingOptions {
  double h_d_norm = 0.9;
  double init_range = 0.5;  // h_c, h_r ~ U[-range, range]
};

/// Embeds every (concept, domain) pair of the store's concept set × fiber
/// domains, every relation, and every fiber domain.
inline EmbeddingStore init_embeddings(const FiberStore& store, std::size_t dim, std::uint64_t seed,
                                      const EmbeddingOptions& opt = {}) {
  if (dim < 2) throw Error(ErrorCode::invalid_argument, "embedding dimension must be >= 2");
  std::set<std::string> concepts, relations;
  std::vector<DomainPath> domains;
  for (const auto& [d, f] : store.fibers()) {
    if (f.empty()) continue;
    domains.push_back(d);
    concepts.insert(f.concepts().begin(), f.concepts().end());
    for (const auto& t : f.triples()) relations.insert(t.relation);
  }
  EmbeddingStore e;
  e.dim = dim;
  e.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-opt.init_range, opt.init_range);
  auto draw = [&] {
    Vec v(dim);
    for (auto& x : v) x = u(rng);
    return v;
  };
  for (const auto& d : domains)
    for (const auto& c : concepts) e.h_c[{c, d}] = draw();
  for (const auto& r : relations) e.h_r[r] = draw();
  for (const auto& d : domains) e.h_d[d] = domain_vector(d, dim, opt.h_d_norm);
  return e;
}

/// W_{r,d} x = h_r ⟨h_d, x⟩ without forming the matrix.
inline Vec apply_w(const Vec& h_r, const Vec& h_d, const Vec& x) {
  if (h_r.size() != h_d.size() || x.size() != h_d.size())
    throw Error(ErrorCode::dimension_mismatch, "apply_w: vector lengths differ");
  const double s = dot(h_d, x);
  Vec out(h_r.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h_r[i] * s;
  return out;
}

inline Vec apply_w(const EmbeddingStore& e, const std::string& r, const DomainPath& d, const Vec& x) {
  return apply_w(e.relation_vec(r), e.domain_vec(d), x);
}

struct ContractionReport {
  std::map<std::pair<std::string, DomainPath>, double> products;
  bool overall = true;
  double max_product = 0.0;
};

/// ρ(W_{r,d}) = ‖h_r‖·‖h_d‖ for every relation/domain pair.
inline ContractionReport contraction_check(const EmbeddingStore& e) {
  ContractionReport rep;
  for (const auto& [r, hr] : e.h_r) {
    const double nr = norm2(hr);
    for (const auto& [d, hd] : e.h_d) {
      const double p = nr * norm2(hd);
      rep.products[{r, d}] = p;
      rep.max_product = std::max(rep.max_product, p);
      if (!(p < 1.0)) rep.overall = false;
    }
  }
  return rep;
}

/// Rescales h_r so its largest product over domains is at most target.
inline void spectral_normalize(EmbeddingStore& e, double target) {
  if (!(target > 0.0 && target < 1.0)) throw Error(ErrorCode::invalid_argument, "normalization target must be in (0,1)");
  double max_d = 0.0;
  for (const auto& [d, hd] : e.h_d) max_d = std::max(max_d, norm2(hd));
  if (max_d == 0.0) return;
  for (auto& [r, hr] : e.h_r) {
    const double p = norm2(hr) * max_d;
    if (p >= target) {
      const double k = target / p;
      for (auto& x : hr) x *= k;
    }
  }
}

/// Domain-conditioned embedding: h_c(c,d) ⊙ h_d(d), unit length. A zero
/// product is returned as the zero vector.
inline Vec embed_concept(const EmbeddingStore& e, const std::string& c, const DomainPath& d) {
  const auto& hc = e.concept_vec(c, d);
  const auto& hd = e.domain_vec(d);
  Vec v(hc.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = hc[i] * hd[i];
  const double n = norm2(v);
  if (n == 0.0) return v;
  for (auto& x : v) x /= n;
  return v;
}

/// Dense per-(relation, domain) operator; lets a test substitute arbitrary
/// matrices for the rank-1 form (the unconstrained baseline).
using DenseOperator = std::function<Vec(const std::string& r, const DomainPath& d, const Vec& x)>;

struct IterateOptions {
  double epsilon = 1e-6;
  std::size_t max_iter = 1000;
  bool renormalize = true;  // cap h_r after each update
  double h_r_target = 0.95;
  std::function<double(double)> activation;  // identity when empty; must be 1-Lipschitz
  DenseOperator dense;                       // replaces W_{r,d} when set
  double blowup = 1e150;                     // treat as non-finite beyond this
};

struct ConvergenceReport {
  bool converged = false;
  bool diverged = false;  // left the finite range
  bool growing = false;   // hit max_iter with deltas rising geometrically
  std::size_t iterations = 0;
  double final_delta = 0.0;
  std::map<std::pair<std::string, DomainPath>, double> contraction_products;
  double estimated_lambda = 0.0;  // max product at the end of the run
  double observed_rate = 0.0;     // geometric mean of successive delta ratios
  std::vector<double> deltas;
};

/// Alternating update: every node with incoming edges takes the mean of
/// W_{r,d} h_source over those edges; then every relation takes the mean of
/// h_source + h_target over its edges, capped back under the product budget.
/// Divergence is reported rather than thrown; see require_finite.
inline ConvergenceReport fixed_point_iterate(const std::vector<Triple>& graph, EmbeddingStore& e,
                                             const IterateOptions& opt = {}) {
  ConvergenceReport rep;
  std::map<NodeKey, std::vector<const Triple*>> incoming;
  std::map<std::string, std::vector<const Triple*>> by_relation;
  for (const auto& t : graph) {
    (void)e.concept_vec(t.source, t.domain);
    (void)e.concept_vec(t.target, t.domain);
    if (!opt.dense) {
      (void)e.relation_vec(t.relation);
      (void)e.domain_vec(t.domain);
    }
    incoming[{t.target, t.domain}].push_back(&t);
    by_relation[t.relation].push_back(&t);
  }
  double max_d = 0.0;
  for (const auto& [d, hd] : e.h_d) max_d = std::max(max_d, norm2(hd));

  auto finite = [&](const Vec& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return std::isfinite(x) && std::abs(x) < opt.blowup; });
  };

  double log_rate_sum = 0.0;
  std::size_t rate_terms = 0;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    rep.iterations = it;
    double delta = 0.0;

    std::map<NodeKey, Vec> next_c;
    for (const auto& [node, edges] : incoming) {
      Vec acc(e.dim, 0.0);
      for (const auto* t : edges) {
        const auto& x = e.h_c.at({t->source, t->domain});
        const auto y = opt.dense ? opt.dense(t->relation, t->domain, x) : apply_w(e.h_r.at(t->relation), e.h_d.at(t->domain), x);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += y[i];
      }
      for (auto& v : acc) {
        v /= static_cast<double>(edges.size());
        if (opt.activation) v = opt.activation(v);
      }
      next_c.emplace(node, std::move(acc));
    }
    for (auto& [node, v] : next_c) {
      auto& cur = e.h_c.at(node);
      delta = std::max(delta, sup_diff(cur, v));
      cur = std::move(v);
    }

    if (!opt.dense) {
      for (const auto& [r, edges] : by_relation) {
        Vec acc(e.dim, 0.0);
        for (const auto* t : edges) {
          const auto& s = e.h_c.at({t->source, t->domain});
          const auto& g = e.h_c.at({t->target, t->domain});
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s[i] + g[i];
        }
        for (auto& v : acc) v /= static_cast<double>(edges.size());
        if (opt.renormalize && max_d > 0.0) {
          const double p = norm2(acc) * max_d;
          if (p > opt.h_r_target) {
            const double k = opt.h_r_target / p;
            for (auto& v : acc) v *= k;
          }
        }
        auto& cur = e.h_r.at(r);
        delta = std::max(delta, sup_diff(cur, acc));
        cur = std::move(acc);
      }
    }

    const bool ok = std::isfinite(delta) && delta < opt.blowup &&
                    std::all_of(e.h_c.begin(), e.h_c.end(), [&](const auto& kv) { return finite(kv.second); }) &&
                    std::all_of(e.h_r.begin(), e.h_r.end(), [&](const auto& kv) { return finite(kv.second); });
    rep.deltas.push_back(delta);
    rep.final_delta = delta;
    if (!ok) {
      rep.diverged = true;
      break;
    }
    if (rep.deltas.size() >= 2 && rep.deltas[rep.deltas.size() - 2] > 0.0 && delta > 0.0) {
      log_rate_sum += std::log(delta / rep.deltas[rep.deltas.size() - 2]);
      ++rate_terms;
    }
    if (delta < opt.epsilon) {
      rep.converged = true;
      break;
    }
  }
  if (rate_terms) rep.observed_rate = std::exp(log_rate_sum / static_cast<double>(rate_terms));
  rep.growing = !rep.converged && !rep.diverged && rep.observed_rate > 1.0;
  const auto cr = contraction_check(e);
  rep.contraction_products = cr.products;
  rep.estimated_lambda = cr.max_product;
  return rep;
}

/// Throws NonFiniteValue when the run left the finite range.
inline const ConvergenceReport& require_finite(const ConvergenceReport& rep) {
  if (rep.diverged)
    throw Error(ErrorCode::non_finite_value, "iteration left the finite range after " + std::to_string(rep.iterations) + " steps");
  return rep;
}

}  // namespace cdc
