#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cdc/knowledge_base.hpp"

namespace cdc::phq9 {

enum class Severity : unsigned char { minimal, mild, moderate, moderately_severe, severe };

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::minimal: return "minimal";
    case Severity::mild: return "mild";
    case Severity::moderate: return "moderate";
    case Severity::moderately_severe: return "moderately-severe";
    case Severity::severe: return "severe";
  }
  return "?";
}

/// Published PHQ-9 bands, closed on the left: 0-4, 5-9, 10-14, 15-19, 20-27.
inline Severity severity_for(double total) {
  if (total < 5.0) return Severity::minimal;
  if (total < 10.0) return Severity::mild;
  if (total < 15.0) return Severity::moderate;
  if (total < 20.0) return Severity::moderately_severe;
  return Severity::severe;
}

struct Config {
  DomainPath domain = DomainPath::parse("Psychology@PHQ9");
  std::string item_prefix = "Item";        // Item1 .. Item9
  std::string scored_by = "scored_by";     // symptom -> item, inside the PHQ-9 fiber
  std::string alert_relation = "r_alert";  // must stay non-monotone
  std::string alert_concept = "SuicidalIdeation";
  int default_freq = 1;
};

struct Alert {
  std::string kind = "suicidal-ideation";
  std::string level = "high";
  std::vector<std::string> evidence;  // utterance tokens
};

struct Evidence {
  std::string token;
  std::string symptom;
  int item = 0;
  int freq = 0;
  double confidence = 0.0;
};

struct Assessment {
  std::string subject;
  std::array<double, 9> item_scores{};
  double total = 0.0;
  Severity severity = Severity::minimal;
  std::optional<Alert> alert;
  std::vector<Evidence> evidence;
};

inline std::string item_name(const Config& cfg, int i) { return cfg.item_prefix + std::to_string(i); }

/// Item index (1..9) a symptom concept is scored by, if any.
inline int item_of(const KnowledgeBase& kbase, const Config& cfg, const std::string& symptom) {
  if (symptom.rfind(cfg.item_prefix, 0) == 0) {
    for (int i = 1; i <= 9; ++i)
      if (symptom == item_name(cfg, i)) return i;
  }
  const auto hits = kbase.store.query_unchecked(symptom, cfg.scored_by, cfg.domain).hits;
  for (const auto& h : hits)
    for (int i = 1; i <= 9; ++i)
      if (h.target == item_name(cfg, i)) return i;
  return 0;
}

/// item score = Σ frequency × confidence over the subject's facts mapped to
/// the item, capped at 3. Item-9 evidence raises the alert regardless of the
/// total.
inline Assessment score_assessment(const KnowledgeBase& kbase, const std::string& subject, const Config& cfg = {}) {
  if (!kbase.universe.contains(cfg.domain))
    throw Error(ErrorCode::missing_fiber, "no " + cfg.domain.to_string() + " fiber is loaded");
  Assessment a;
  a.subject = subject;
  for (const auto& o : kbase.observations) {
    if (o.subject != subject || !o.domain.has_prefix(cfg.domain)) continue;
    const int item = item_of(kbase, cfg, o.concept_name);
    if (!item) continue;
    const int freq = o.freq.value_or(cfg.default_freq);
    a.evidence.push_back({o.token, o.concept_name, item, freq, o.confidence});
    a.item_scores[item - 1] += freq * o.confidence;
    if (item == 9 && o.confidence > 0.0) {
      if (!a.alert) a.alert.emplace();
      a.alert->evidence.push_back(o.token);
    }
  }
  for (auto& s : a.item_scores) {
    s = std::min(s, 3.0);
    a.total += s;
  }
  a.severity = severity_for(a.total);
  return a;
}

/// Writes the assessment back as triples in the PHQ-9 fiber so the fact ->
/// item -> score -> severity chain can be traversed. The alert goes through
/// conflict_with, apart from the score path.
inline void record_assessment(KnowledgeBase& kbase, const Assessment& a, const Config& cfg = {}) {
  const auto& d = cfg.domain;
  const std::string sheet = a.subject + "_PHQ9";
  auto tokenize = [](std::string t) {
    std::replace_if(t.begin(), t.end(), [](char ch) { return ch == '.' || ch == '-'; }, '_');
    return t;
  };
  const std::string score_tok = tokenize("Score_" + kb::format_real(a.total));
  auto put = [&](const std::string& s, const std::string& r, const std::string& t) {
    kbase.store.insert_unchecked({s, r, tokenize(t), d, 1.0, Provenance::asserted()});
  };
  for (int i = 1; i <= 9; ++i)
    if (a.item_scores[i - 1] > 0.0) put(item_name(cfg, i), "aggregated_in", sheet);
  put(sheet, "r_score", score_tok);
  put(score_tok, "r_severity", to_string(a.severity));
  if (a.alert) {
    put(a.subject, cfg.alert_relation, cfg.alert_concept);
    put(cfg.alert_concept, "conflict_with", score_tok);
  }
}

struct PropagationReport {
  bool passed = true;
  std::size_t domains_checked = 0;
  std::vector<std::string> witnesses;
};

/// The alert must not be visible as a fact of any other domain: in no other
/// registered object domain may inherited_query return it as inherited or as
/// native to that domain. Prefix containment (a general query that reaches
/// down into the PHQ-9 fiber and reports it as the origin) is not propagation.
inline PropagationReport alert_propagation_check(const KnowledgeBase& kbase, const std::string& subject, const Config& cfg = {}) {
  PropagationReport rep;
  for (const auto& d : kbase.universe.paths()) {
    if (d == cfg.domain) continue;
    ++rep.domains_checked;
    const auto res = inherited_query(kbase.store, kbase.universe, kbase.typing, subject, cfg.alert_relation, d);
    for (const auto& h : res.hits) {
      if (h.target != cfg.alert_concept) continue;
      if (h.provenance.kind == Provenance::Kind::inherited || h.domain == d) {
        rep.passed = false;
        rep.witnesses.push_back(cfg.alert_relation + "(" + subject + ", " + h.target + ") visible at " + d.to_string() +
                                " from " + h.domain.to_string());
      }
    }
  }
  return rep;
}

}  // namespace cdc::phq9
