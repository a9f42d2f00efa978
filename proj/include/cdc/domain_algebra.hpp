#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cdc/domain_path.hpp"
#include "cdc/error.hpp"

namespace cdc {

/// A declared generalization: lhs ⊔ rhs = upper. The pair is unordered.
struct DeltaDecl {
  DomainPath lhs;
  DomainPath rhs;
  DomainPath upper;

  bool covers(const DomainPath& a, const DomainPath& b) const {
    return (lhs == a && rhs == b) || (lhs == b && rhs == a);
  }
  friend bool operator==(const DeltaDecl&, const DeltaDecl&) = default;
};

struct FusionRecord {
  DomainPath lhs;
  DomainPath rhs;
  DomainPath fused;
};

/// The finite domain lattice: registered paths, declared generalizations and
/// the height cap. The order is the reflexive-transitive closure of the prefix
/// order together with the edges lhs ⊑ upper, rhs ⊑ upper of every declaration.
///
/// Mutators rebuild the closure eagerly; once loading is over the universe is
/// only read, and reads (including the memoized implication) are thread-safe.
class DomainUniverse {
 public:
  static constexpr std::size_t default_h_max = 16;

  explicit DomainUniverse(std::size_t h_max = default_h_max) : h_max_(h_max) {}

  // -- construction ---------------------------------------------------------

  /// Registers a path together with all of its proper prefixes.
  void add(const DomainPath& d) {
    require_path(d);
    bool changed = false;
    for (const auto& p : d.proper_prefixes()) changed |= insert_path(p);
    changed |= insert_path(d);
    if (changed) rebuild();
  }

  /// Registers exactly one path; used to build prefix-closure violations.
  void add_exact(const DomainPath& d) {
    require_path(d);
    if (insert_path(d)) rebuild();
  }

  template <typename Range>
  void add_all(const Range& paths) {
    bool changed = false;
    for (const DomainPath& d : paths) {
      require_path(d);
      for (const auto& p : d.proper_prefixes()) changed |= insert_path(p);
      changed |= insert_path(d);
    }
    if (changed) rebuild();
  }

  void declare_delta(const DomainPath& lhs, const DomainPath& rhs, const DomainPath& upper) {
    for (const auto* d : {&lhs, &rhs, &upper}) {
      require_path(*d);
      require(*d);
    }
    DeltaDecl decl{lhs, rhs, upper};
    if (std::find(delta_.begin(), delta_.end(), decl) != delta_.end()) return;
    delta_.push_back(std::move(decl));
    rebuild();
  }

  void record_fusion(FusionRecord record) {
    fusions_.push_back(std::move(record));
    cache_ = std::make_shared<Cache>();
    ++version_;
  }

  void set_h_max(std::size_t h_max) { h_max_ = h_max; }

  // -- inspection -----------------------------------------------------------

  std::size_t h_max() const noexcept { return h_max_; }
  std::size_t version() const noexcept { return version_; }
  std::size_t size() const noexcept { return paths_.size(); }
  bool empty() const noexcept { return paths_.empty(); }
  const std::vector<DomainPath>& paths() const noexcept { return paths_; }
  const std::vector<DeltaDecl>& delta() const noexcept { return delta_; }
  const std::vector<FusionRecord>& fusions() const noexcept { return fusions_; }
  bool has_cycle() const noexcept { return cyclic_; }

  /// Registered paths plus both bounds, bottom first.
  std::vector<DomainPath> elements() const {
    std::vector<DomainPath> out;
    out.reserve(paths_.size() + 2);
    out.push_back(DomainPath::bottom());
    out.insert(out.end(), paths_.begin(), paths_.end());
    out.push_back(DomainPath::top());
    return out;
  }

  bool contains(const DomainPath& d) const { return !d.is_path() || index_.count(d) != 0; }

  void require(const DomainPath& d) const {
    if (!contains(d)) throw Error(ErrorCode::unregistered_domain, d.to_string());
  }

  std::optional<DomainPath> find_delta(const DomainPath& a, const DomainPath& b) const {
    for (const auto& decl : delta_) {
      if (decl.covers(a, b)) return decl.upper;
    }
    return std::nullopt;
  }

  // -- order and lattice operations ----------------------------------------

  bool leq(const DomainPath& a, const DomainPath& b) const {
    require(a);
    require(b);
    return leq_unchecked(a, b);
  }

  bool comparable(const DomainPath& a, const DomainPath& b) const { return leq(a, b) || leq(b, a); }

  /// Greatest lower bound under the extended order. Incomparable elements with
  /// no common registered lower bound meet at ⊥.
  DomainPath meet(const DomainPath& a, const DomainPath& b) const {
    require(a);
    require(b);
    if (leq_unchecked(a, b)) return a;
    if (leq_unchecked(b, a)) return b;
    std::vector<std::size_t> lower;
    const auto ia = index_.at(a);
    const auto ib = index_.at(b);
    for (std::size_t i = 0; i < paths_.size(); ++i) {
      if (reach_[i][ia] && reach_[i][ib]) lower.push_back(i);
    }
    if (lower.empty()) return DomainPath::bottom();
    for (auto g : lower) {
      if (std::all_of(lower.begin(), lower.end(), [&](std::size_t x) { return reach_[x][g] != 0; })) {
        return paths_[g];
      }
    }
    throw Error(ErrorCode::no_greatest_lower_bound, a.to_string() + " ⊓ " + b.to_string());
  }

  /// Longest common prefix; ⊤ when nothing is shared.
  DomainPath base_join(const DomainPath& a, const DomainPath& b) const {
    require(a);
    require(b);
    if (a.is_top() || b.is_top()) return DomainPath::top();
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    auto shared = common_prefix(a, b);
    if (shared.empty()) return DomainPath::top();
    return DomainPath(std::move(shared));
  }

  /// Enriched join: a declared generalization wins, otherwise the base join.
  DomainPath join(const DomainPath& a, const DomainPath& b) const {
    require(a);
    require(b);
    if (auto declared = find_delta(a, b)) return *declared;
    return base_join(a, b);
  }

  /// Heyting implication by enumeration: the join of every element d with
  /// d ⊓ a ⊑ b. Memoized per (a, b).
  DomainPath implication(const DomainPath& a, const DomainPath& b) const {
    require(a);
    require(b);
    if (leq_unchecked(a, b)) return DomainPath::top();
    {
      std::lock_guard lock(cache_->mutex);
      if (auto it = cache_->implication.find({a, b}); it != cache_->implication.end()) return it->second;
    }
    DomainPath result = DomainPath::bottom();
    if (const auto* fusion = fusion_for(b)) {
      result = join(implication(a, fusion->lhs), implication(a, fusion->rhs));
    } else {
      for (const auto& d : elements()) {
        if (leq_unchecked(meet(d, a), b)) result = join(result, d);
      }
    }
    std::lock_guard lock(cache_->mutex);
    cache_->implication.emplace(std::make_pair(a, b), result);
    return result;
  }

  DomainPath negation(const DomainPath& d) const { return implication(d, DomainPath::bottom()); }

  /// A registered d with d ⊔ ¬d ≠ ⊤, if any exists.
  std::optional<DomainPath> complement_witness() const {
    for (const auto& d : paths_) {
      if (!join(d, negation(d)).is_top()) return d;
    }
    return std::nullopt;
  }

  /// Number of elements on the longest strict chain of registered paths.
  std::size_t height() const {
    if (cyclic_) throw Error(ErrorCode::cyclic_order, "declared generalizations form a cycle");
    std::size_t best = 0;
    for (auto h : chain_lengths_) best = std::max(best, h);
    return best;
  }

  /// Longest chain of registered paths whose top element is d.
  std::size_t chain_length_below(const DomainPath& d) const {
    if (cyclic_) throw Error(ErrorCode::cyclic_order, "declared generalizations form a cycle");
    require(d);
    if (!d.is_path()) return d.is_top() ? height() : 0;
    return chain_lengths_[index_.at(d)];
  }

  /// Registered strict ancestors of d (⊤ excluded), nearest first.
  std::vector<DomainPath> strict_ancestors(const DomainPath& d) const {
    require(d);
    std::vector<DomainPath> out;
    if (!d.is_path()) return out;
    const auto i = index_.at(d);
    std::vector<std::size_t> ups;
    for (std::size_t j = 0; j < paths_.size(); ++j) {
      if (j != i && reach_[i][j]) ups.push_back(j);
    }
    std::stable_sort(ups.begin(), ups.end(), [&](std::size_t x, std::size_t y) {
      if (chain_lengths_[x] != chain_lengths_[y]) return chain_lengths_[x] < chain_lengths_[y];
      return down_count_[x] < down_count_[y];
    });
    for (auto j : ups) out.push_back(paths_[j]);
    return out;
  }

  /// Registered strict descendants of d.
  std::vector<DomainPath> strict_descendants(const DomainPath& d) const {
    require(d);
    std::vector<DomainPath> out;
    if (d.is_bottom()) return out;
    for (std::size_t j = 0; j < paths_.size(); ++j) {
      if (paths_[j] != d && leq_unchecked(paths_[j], d)) out.push_back(paths_[j]);
    }
    return out;
  }

  /// Two distinct paths that are mutually below each other, when the closure
  /// contains a cycle.
  std::optional<std::pair<DomainPath, DomainPath>> cycle_witness() const {
    for (std::size_t i = 0; i < paths_.size(); ++i) {
      for (std::size_t j = i + 1; j < paths_.size(); ++j) {
        if (reach_[i][j] && reach_[j][i]) return std::make_pair(paths_[i], paths_[j]);
      }
    }
    return std::nullopt;
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<DomainPath, DomainPath>, DomainPath> implication;
  };

  static void require_path(const DomainPath& d) {
    if (!d.is_path()) throw Error(ErrorCode::invalid_argument, "only paths can be registered");
  }

  bool insert_path(const DomainPath& d) {
    if (index_.count(d)) return false;
    paths_.insert(std::upper_bound(paths_.begin(), paths_.end(), d), d);
    index_.clear();
    for (std::size_t i = 0; i < paths_.size(); ++i) index_.emplace(paths_[i], i);
    return true;
  }

  const FusionRecord* fusion_for(const DomainPath& d) const {
    for (const auto& f : fusions_) {
      if (f.fused == d) return &f;
    }
    return nullptr;
  }

  bool leq_unchecked(const DomainPath& a, const DomainPath& b) const {
    if (a.is_bottom() || b.is_top()) return true;
    if (a.is_top() || b.is_bottom()) return false;
    return reach_[index_.at(a)][index_.at(b)] != 0;
  }

  void rebuild() {
    const auto n = paths_.size();
    reach_.assign(n, std::vector<char>(n, 0));
    std::vector<std::vector<std::size_t>> up(n);
    for (std::size_t i = 0; i < n; ++i) {
      reach_[i][i] = 1;
      for (const auto& p : paths_[i].proper_prefixes()) {
        if (auto it = index_.find(p); it != index_.end()) up[i].push_back(it->second);
      }
    }
    for (const auto& decl : delta_) {
      const auto u = index_.at(decl.upper);
      if (decl.lhs.is_path()) up[index_.at(decl.lhs)].push_back(u);
      if (decl.rhs.is_path()) up[index_.at(decl.rhs)].push_back(u);
    }
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::size_t> stack{s};
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto w : up[v]) {
          if (!reach_[s][w]) {
            reach_[s][w] = 1;
            stack.push_back(w);
          }
        }
      }
    }
    cyclic_ = false;
    down_count_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (reach_[j][i]) ++down_count_[i];
        if (i != j && reach_[i][j] && reach_[j][i]) cyclic_ = true;
      }
    }
    chain_lengths_.assign(n, 0);
    if (!cyclic_) {
      // In an acyclic closure a strictly lower element has a strictly smaller down-set.
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto x, auto y) { return down_count_[x] < down_count_[y]; });
      for (auto i : order) {
        std::size_t best = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && reach_[j][i]) best = std::max(best, chain_lengths_[j]);
        }
        chain_lengths_[i] = best + 1;
      }
    }
    cache_ = std::make_shared<Cache>();
    ++version_;
  }

  std::size_t h_max_;
  std::size_t version_ = 0;
  std::vector<DomainPath> paths_;
  std::map<DomainPath, std::size_t> index_;
  std::vector<DeltaDecl> delta_;
  std::vector<FusionRecord> fusions_;
  std::vector<std::vector<char>> reach_;  // reach_[i][j] <=> paths_[i] ⊑ paths_[j]
  std::vector<std::size_t> down_count_;
  std::vector<std::size_t> chain_lengths_;
  bool cyclic_ = false;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// ---------------------------------------------------------------------------
// Axiom validation

struct AxiomCheck {
  std::string id;
  std::string title;
  bool passed = true;
  std::size_t cases = 0;
  std::vector<std::string> witnesses;

  void fail(std::string witness) {
    passed = false;
    if (witnesses.size() < 8) witnesses.push_back(std::move(witness));
  }
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
  }
  const AxiomCheck& at(std::string_view id) const {
    for (const auto& c : checks) {
      if (c.id == id) return c;
    }
    throw Error(ErrorCode::invalid_argument, "no axiom " + std::string(id));
  }
};

struct AxiomOptions {
  std::size_t exhaustive_limit = 12;  // registered paths
  std::size_t samples = 20000;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

inline std::string show(const DomainPath& d) { return d.to_string(); }

template <typename Fn>
void for_each_triple(const std::vector<DomainPath>& elems, bool exhaustive, const AxiomOptions& opt, Fn&& fn) {
  if (exhaustive) {
    for (const auto& a : elems)
      for (const auto& b : elems)
        for (const auto& c : elems) fn(a, b, c);
    return;
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
  for (std::size_t k = 0; k < opt.samples; ++k) fn(elems[pick(rng)], elems[pick(rng)], elems[pick(rng)]);
}

}  // namespace detail

/// Adjunction check a ⊓ b ⊑ c ⇔ a ⊑ (b → c); exhaustive up to the limit,
/// seeded sampling above it.
inline AxiomCheck check_adjunction(const DomainUniverse& u, const AxiomOptions& opt = {}) {
  AxiomCheck check{"A4", "implication satisfies the Heyting adjunction", true, 0, {}};
  if (u.has_cycle()) {
    check.fail("order is cyclic");
    return check;
  }
  const auto elems = u.elements();
  const bool exhaustive = u.size() <= opt.exhaustive_limit;
  detail::for_each_triple(elems, exhaustive, opt, [&](const auto& a, const auto& b, const auto& c) {
    ++check.cases;
    try {
      const bool lhs = u.leq(u.meet(a, b), c);
      const auto imp = u.implication(b, c);
      const bool rhs = u.leq(a, imp);
      if (lhs != rhs) {
        check.fail("a=" + detail::show(a) + " b=" + detail::show(b) + " c=" + detail::show(c) +
                   " : a⊓b⊑c is " + (lhs ? "true" : "false") + ", b→c=" + detail::show(imp));
      }
    } catch (const Error& e) {
      check.fail(e.what());
    }
  });
  return check;
}

inline AxiomReport validate_axioms(const DomainUniverse& u, const AxiomOptions& opt = {}) {
  using detail::show;
  AxiomReport report;
  const auto elems = u.elements();

  AxiomCheck a1{"A1", "⊑ is a partial order", true, 0, {}};
  if (auto cyc = u.cycle_witness()) a1.fail("cycle: " + show(cyc->first) + " ⊑ " + show(cyc->second) + " ⊑ " + show(cyc->first));
  if (a1.passed) {
    for (const auto& a : elems) {
      ++a1.cases;
      if (!u.leq(a, a)) a1.fail("not reflexive at " + show(a));
      for (const auto& b : elems) {
        if (a != b && u.leq(a, b) && u.leq(b, a)) a1.fail("antisymmetry: " + show(a) + ", " + show(b));
        if (!u.leq(a, b)) continue;
        for (const auto& c : elems) {
          if (u.leq(b, c) && !u.leq(a, c)) a1.fail("transitivity: " + show(a) + ", " + show(b) + ", " + show(c));
        }
      }
    }
  }
  report.checks.push_back(a1);

  AxiomCheck a2{"A2", "bounded: ⊥ ⊑ d ⊑ ⊤", true, 0, {}};
  for (const auto& d : elems) {
    ++a2.cases;
    if (!u.leq(DomainPath::bottom(), d) || !u.leq(d, DomainPath::top())) a2.fail(show(d));
  }
  report.checks.push_back(a2);

  AxiomCheck a3{"A3", "meet and join are total greatest-lower / least-upper bounds", true, 0, {}};
  if (u.has_cycle()) {
    a3.fail("order is cyclic");
  } else {
    for (const auto& a : elems) {
      for (const auto& b : elems) {
        ++a3.cases;
        try {
          const auto m = u.meet(a, b);
          if (!u.leq(m, a) || !u.leq(m, b)) a3.fail("meet not a lower bound: " + show(a) + " ⊓ " + show(b));
          for (const auto& x : elems) {
            if (u.leq(x, a) && u.leq(x, b) && !u.leq(x, m)) {
              a3.fail("meet not greatest: " + show(a) + " ⊓ " + show(b) + " = " + show(m) + " but " + show(x) + " is a lower bound");
              break;
            }
          }
          const auto j = u.join(a, b);
          if (!u.contains(j)) {
            a3.fail("join leaves the universe: " + show(a) + " ⊔ " + show(b) + " = " + show(j));
            continue;
          }
          if (!u.leq(a, j) || !u.leq(b, j)) a3.fail("join not an upper bound: " + show(a) + " ⊔ " + show(b) + " = " + show(j));
          for (const auto& x : elems) {
            if (u.leq(a, x) && u.leq(b, x) && !u.leq(j, x)) {
              a3.fail("join not least: " + show(a) + " ⊔ " + show(b) + " = " + show(j) + " but " + show(x) + " is an upper bound");
              break;
            }
          }
        } catch (const Error& e) {
          a3.fail(e.what());
        }
      }
    }
  }
  report.checks.push_back(a3);

  report.checks.push_back(check_adjunction(u, opt));

  AxiomCheck a5{"A5", "finite depth: chains are finite and bounded by h_max", true, 0, {}};
  ++a5.cases;
  if (u.has_cycle()) {
    a5.fail("infinite descending chain through a cycle");
  } else if (u.height() > u.h_max()) {
    a5.fail("height " + std::to_string(u.height()) + " exceeds h_max " + std::to_string(u.h_max()));
  }
  report.checks.push_back(a5);

  AxiomCheck a6{"A6", "prefix closure", true, 0, {}};
  for (const auto& d : u.paths()) {
    for (const auto& p : d.proper_prefixes()) {
      ++a6.cases;
      if (!u.contains(p)) a6.fail(show(d) + " registered without prefix " + show(p));
    }
  }
  report.checks.push_back(a6);

  AxiomCheck a7{"A7", "Δ-consistency", true, 0, {}};
  const auto& delta = u.delta();
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const auto& decl = delta[i];
    ++a7.cases;
    const auto text = "(" + show(decl.lhs) + ", " + show(decl.rhs) + ", " + show(decl.upper) + ")";
    if (u.has_cycle()) {
      a7.fail(text + " participates in a cyclic order");
      continue;
    }
    if (!u.leq(decl.lhs, decl.upper) || !u.leq(decl.rhs, decl.upper)) a7.fail(text + " is not an upper bound");
    for (const auto& x : u.paths()) {
      if (x != decl.upper && u.leq(decl.lhs, x) && u.leq(decl.rhs, x) && u.leq(x, decl.upper)) {
        a7.fail(text + " not minimal: " + show(x) + " is a smaller upper bound");
        break;
      }
    }
    for (std::size_t j = i + 1; j < delta.size(); ++j) {
      if (delta[j].covers(decl.lhs, decl.rhs) && delta[j].upper != decl.upper) {
        a7.fail("ambiguous: " + text + " and (" + show(delta[j].lhs) + ", " + show(delta[j].rhs) + ", " +
                show(delta[j].upper) + ")");
      }
    }
  }
  report.checks.push_back(a7);

  AxiomCheck a8{"A8", "fusion is a height-bounded lattice extension", true, 0, {}};
  ++a8.cases;
  if (!u.has_cycle() && u.height() > u.h_max()) {
    a8.fail("height " + std::to_string(u.height()) + " exceeds h_max " + std::to_string(u.h_max()));
  }
  for (const auto& f : u.fusions()) {
    ++a8.cases;
    if (!u.contains(f.fused) || u.has_cycle() || !u.leq(f.lhs, f.fused) || !u.leq(f.rhs, f.fused)) {
      a8.fail("fused " + show(f.fused) + " is not above " + show(f.lhs) + " and " + show(f.rhs));
    }
  }
  report.checks.push_back(a8);
  return report;
}

}  // namespace cdc
