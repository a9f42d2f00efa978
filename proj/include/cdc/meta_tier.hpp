#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cdc/domain_algebra.hpp"

namespace cdc {

enum class Tau : unsigned char { non_monotone, monotone };

inline const char* to_string(Tau t) { return t == Tau::monotone ? "monotone" : "non-monotone"; }

inline constexpr const char* kMonotone = "monotone";
inline constexpr const char* kTransitive = "transitive";

/// Meta-tier registry. Meta domains live in their own universe (paths are
/// registered exactly, so 'ICD11@Meta' can sit beside the object domain
/// 'ICD11'), each with a projection onto the object tier.
class TypingTable {
 public:
  /// Registers d_meta with π(d_meta) = scope. The object universe is consulted
  /// to keep the tiers disjoint and the scope meaningful.
  void declare_tier(const DomainPath& d_meta, const DomainPath& scope, const DomainUniverse& obj) {
    check_unsealed();
    if (!d_meta.is_path()) throw Error(ErrorCode::tier_violation, "meta tier entries must be paths");
    if (obj.contains(d_meta)) throw Error(ErrorCode::tier_violation, d_meta.to_string() + " is already an object domain");
    if (scope.is_bottom()) throw Error(ErrorCode::tier_violation, "meta scope cannot be ⊥");
    obj.require(scope);
    if (auto it = pi_.find(d_meta); it != pi_.end() && it->second != scope)
      throw Error(ErrorCode::tier_violation, d_meta.to_string() + " already projects to " + it->second.to_string());
    meta_.add_exact(d_meta);
    pi_[d_meta] = scope;
  }

  bool is_meta(const DomainPath& d) const { return d.is_path() && pi_.count(d) != 0; }
  const DomainUniverse& meta_universe() const noexcept { return meta_; }
  const std::map<DomainPath, DomainPath>& projections() const noexcept { return pi_; }

  DomainPath project(const DomainPath& d_meta) const {
    auto it = pi_.find(d_meta);
    if (it == pi_.end()) throw Error(ErrorCode::not_meta_tier, d_meta.to_string());
    return it->second;
  }

  void declare_meta(const std::string& relation, const std::string& property, const DomainPath& d_meta) {
    check_unsealed();
    if (!is_meta(d_meta)) throw Error(ErrorCode::not_meta_tier, d_meta.to_string());
    if (!is_token(relation) || !is_token(property)) throw Error(ErrorCode::invalid_argument, "meta entries take plain tokens");
    props_[{relation, d_meta}].insert(property);
    if (property == kMonotone) monotone_.insert(relation);
  }

  /// Closed default: monotone iff some meta entry declares it.
  Tau tau(const std::string& relation) const {
    return monotone_.count(relation) ? Tau::monotone : Tau::non_monotone;
  }

  /// Governed variant: only entries whose projection lies above d count.
  Tau tau(const std::string& relation, const DomainPath& d, const DomainUniverse& obj) const {
    if (!monotone_.count(relation)) return Tau::non_monotone;
    return has_property(relation, kMonotone, d, obj) ? Tau::monotone : Tau::non_monotone;
  }

  bool has_property(const std::string& relation, const std::string& property, const DomainPath& d,
                    const DomainUniverse& obj) const {
    for (auto it = props_.lower_bound({relation, DomainPath::bottom()}); it != props_.end() && it->first.first == relation; ++it) {
      if (it->second.count(property) && obj.leq(d, pi_.at(it->first.second))) return true;
    }
    return false;
  }

  /// Relation carries the property anywhere in the meta tier.
  bool has_property(const std::string& relation, const std::string& property) const {
    for (auto it = props_.lower_bound({relation, DomainPath::bottom()}); it != props_.end() && it->first.first == relation; ++it) {
      if (it->second.count(property)) return true;
    }
    return false;
  }

  std::set<std::string> properties(const std::string& relation, const DomainPath& d_meta) const {
    auto it = props_.find({relation, d_meta});
    return it == props_.end() ? std::set<std::string>{} : it->second;
  }

  const std::map<std::pair<std::string, DomainPath>, std::set<std::string>>& entries() const noexcept { return props_; }

  std::vector<std::string> relations_with(const std::string& property) const {
    std::set<std::string> out;
    for (const auto& [key, ps] : props_)
      if (ps.count(property)) out.insert(key.first);
    return {out.begin(), out.end()};
  }

  void seal() noexcept { sealed_ = true; }
  void unseal() noexcept { sealed_ = false; }
  bool sealed() const noexcept { return sealed_; }

 private:
  void check_unsealed() const {
    if (sealed_) throw Error(ErrorCode::session_sealed, "typing table is sealed for a reasoning run");
  }

  DomainUniverse meta_;
  std::map<DomainPath, DomainPath> pi_;
  std::map<std::pair<std::string, DomainPath>, std::set<std::string>> props_;
  std::unordered_set<std::string> monotone_;
  bool sealed_ = false;
};

/// Tier disjointness plus order preservation of π over every comparable pair
/// of meta domains.
inline AxiomCheck check_tiers(const TypingTable& table, const DomainUniverse& obj) {
  AxiomCheck check{"T", "tiers are disjoint and π preserves order", true, 0, {}};
  const auto& meta = table.meta_universe();
  for (const auto& m : meta.paths()) {
    ++check.cases;
    if (obj.contains(m)) check.fail(m.to_string() + " is in both tiers");
    if (!obj.contains(table.project(m))) check.fail("π(" + m.to_string() + ") is not an object domain");
  }
  for (const auto& a : meta.paths())
    for (const auto& b : meta.paths()) {
      if (a == b || !meta.leq(a, b)) continue;
      ++check.cases;
      const auto pa = table.project(a), pb = table.project(b);
      if (obj.contains(pa) && obj.contains(pb) && !obj.leq(pa, pb))
        check.fail("π(" + a.to_string() + ")=" + pa.to_string() + " not below π(" + b.to_string() + ")=" + pb.to_string());
    }
  return check;
}

}  // namespace cdc
