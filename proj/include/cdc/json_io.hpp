#pragma once
// JSON views of the engine's values. Object keys come out sorted (nlohmann's
// default std::map), so identical inputs print identical bytes.

#include <cmath>
#include <string>

#include "json.hpp"

#include "cdc/experiments.hpp"
#include "cdc/phq9.hpp"
#include "cdc/validate.hpp"

namespace cdc {

using Json = nlohmann::json;

/// Non-finite numbers become strings instead of silently turning into null.
inline Json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline void to_json(Json& j, const DomainPath& d) { j = d.to_string(); }
inline void to_json(Json& j, const Provenance& p) { j = p.to_string(); }

inline void to_json(Json& j, const QueryHit& h) {
  j = {{"target", h.target}, {"domain", h.domain}, {"confidence", number(h.confidence)}, {"provenance", h.provenance}};
}

inline void to_json(Json& j, const QueryStats& s) {
  j = {{"candidates_examined", s.candidates_examined}, {"fiber_size_bound", s.fiber_size_bound}, {"domains_matched", s.domains_matched}};
}

inline void to_json(Json& j, const Triple& t) {
  j = {{"source", t.source},         {"relation", t.relation},   {"target", t.target},
       {"domain", t.domain},         {"confidence", number(t.confidence)}, {"provenance", t.provenance}};
}

inline Json ctx_json(const Ctx& c) { return {{"concept", c.first}, {"domain", c.second}}; }

inline Json ctx_json(const ContextSet& s) {
  Json out = Json::array();
  for (const auto& c : s) out.push_back(ctx_json(c));
  return out;
}

inline void to_json(Json& j, const TraceStep& s) {
  j = {{"layer", to_string(s.layer)}, {"operation", s.operation}, {"input", ctx_json(s.input)},
       {"outputs", ctx_json(s.outputs)}, {"provenance", s.provenance}};
}

inline void to_json(Json& j, const ClosureItem& i) {
  j = {{"concept", i.concept_name}, {"domain", i.domain}, {"provenance", i.provenance}};
}

inline void to_json(Json& j, const ClosureSummary& s) {
  j = {{"levels", s.levels}, {"bridges", s.bridges}, {"vertices", s.vertices}, {"edges", s.edges}, {"bound", s.bound()}};
}

inline void to_json(Json& j, const AxiomCheck& c) {
  j = {{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"cases", c.cases}, {"witnesses", c.witnesses}};
}

inline void to_json(Json& j, const ValidationReport& r) {
  j = {{"passed", r.passed()}, {"checks", r.checks}, {"advisory", r.advisory}};
}

namespace kb {
inline void to_json(Json& j, const Diagnostic& d) {
  j = {{"line", d.line}, {"severity", d.severity}, {"message", d.message}};
}
}  // namespace kb

inline void to_json(Json& j, const PartialMorphism& m) {
  j = {{"source_domain", m.source_domain}, {"target_domain", m.target_domain}, {"mapping", m.mapping},
       {"depth", m.depth}, {"status", m.is_hypothesis() ? m.provenance().to_string() : "asserted"}};
}

inline void to_json(Json& j, const ComposeResult& c) {
  j = {{"morphism", c.morphism}, {"dom_first", c.dom_first}, {"dom_composed", c.dom_composed},
       {"dropped", c.dropped},   {"incomplete", c.incomplete}, {"shrank", c.shrank()}};
}

inline void to_json(Json& j, const FuseResult& f) {
  j = {{"fused", f.fused},         {"height_before", f.height_before}, {"height_after", f.height_after},
       {"version", f.version},     {"size_after", f.size_after},       {"growth_alert", f.growth_alert},
       {"conservative", f.conservative}};
}

inline void to_json(Json& j, const BridgeProposal& p) {
  j = {{"source", p.source}, {"target", p.target}, {"similarity", number(p.similarity)}};
}

inline Json products_json(const std::map<std::pair<std::string, DomainPath>, double>& m) {
  Json out = Json::array();
  for (const auto& [key, v] : m) out.push_back({{"relation", key.first}, {"domain", key.second}, {"product", number(v)}});
  return out;
}

inline void to_json(Json& j, const ConvergenceReport& r) {
  Json deltas = Json::array();
  for (double d : r.deltas) deltas.push_back(number(d));
  j = {{"converged", r.converged},
       {"diverged", r.diverged},
       {"growing", r.growing},
       {"iterations", r.iterations},
       {"final_delta", number(r.final_delta)},
       {"estimated_lambda", number(r.estimated_lambda)},
       {"observed_rate", number(r.observed_rate)},
       {"contraction_products", products_json(r.contraction_products)},
       {"deltas", deltas}};
}

namespace experiments {

inline void to_json(Json& j, const Exp1Report& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"method", row.method}, {"inherited", row.inherited}});
  j = {{"from", r.from}, {"at", r.at},       {"edges", r.edges},       {"rows", rows},
       {"domains", r.domains}, {"concepts", r.concepts}, {"pattern_ok", r.pattern_ok}};
}

inline void to_json(Json& j, const Exp2Report& r) {
  j = {{"spr", {{"phi12", number(r.spr12)}, {"phi23", number(r.spr23)}, {"composed", number(r.spr13)}}},
       {"domain_of_definition", {{"phi12", r.dom12}, {"phi23", r.dom23}, {"composed", r.dom13}}},
       {"composed_depth", r.depth13},
       {"dropped", r.dropped},
       {"in_range", r.in_range},
       {"degrades", r.degrades},
       {"shrinks", r.shrinks},
       {"ok", r.ok()}};
}

inline void to_json(Json& j, const ConditionReport& r) {
  j = {{"condition", std::string(1, static_cast<char>(r.condition))},
       {"seeds", r.seeds},
       {"converged", r.converged},
       {"diverged", r.diverged},
       {"growing", r.growing},
       {"stalled", r.stalled},
       {"max_iterations", r.max_iterations},
       {"max_final_delta", number(r.max_final_delta)},
       {"max_lambda", number(r.max_lambda)}};
}

inline void to_json(Json& j, const PruningReport& r) {
  j = {{"n", r.n},
       {"k", r.k},
       {"hits", r.hits},
       {"same_answer", r.same_answer},
       {"stats", {{"fiber_candidates", r.fiber_candidates}, {"index_candidates", r.index_candidates},
                  {"scan_candidates", r.scan_candidates}, {"domains_matched", r.domains_matched}}},
       {"ratio", number(r.ratio())}};
}

}  // namespace experiments

namespace phq9 {

inline void to_json(Json& j, const Assessment& a) {
  Json evidence = Json::array();
  for (const auto& e : a.evidence)
    evidence.push_back({{"token", e.token}, {"symptom", e.symptom}, {"item", e.item}, {"freq", e.freq}, {"confidence", number(e.confidence)}});
  Json items = Json::array();
  for (double s : a.item_scores) items.push_back(number(s));
  j = {{"subject", a.subject}, {"items", items}, {"total", number(a.total)}, {"severity", to_string(a.severity)}, {"evidence", evidence}};
  if (a.alert) {
    j["alert"] = {{"kind", a.alert->kind}, {"level", a.alert->level}, {"evidence", a.alert->evidence}};
  } else {
    j["alert"] = nullptr;
  }
}

inline void to_json(Json& j, const PropagationReport& r) {
  j = {{"passed", r.passed}, {"domains_checked", r.domains_checked}, {"witnesses", r.witnesses}};
}

}  // namespace phq9

}  // namespace cdc
