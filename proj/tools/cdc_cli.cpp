// cdc: command-line front end over the header-only engine.
//
// Exit codes: 0 ok, 1 validation or assertion failure, 2 parse/usage
// failure, 3 authorization refused, 4 divergence or other runtime error.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdc/json_io.hpp"

namespace {

using cdc::Json;

enum Exit : int { kOk = 0, kInvalid = 1, kParse = 2, kUnauthorized = 3, kRuntime = 4 };

struct Config {
  std::vector<std::string> kb;
  std::size_t h_max = cdc::DomainUniverse::default_h_max;
  double delta_multiplier = 4.0;
  double theta = 0.9;
  double epsilon = 1e-6;
  std::size_t max_iter = 1000;
  std::uint64_t seed = 0;
  std::size_t dim = 8;
  bool strict_cycles = true;
  std::string output = "json";
  bool trace = false;
  std::string fixtures = CDC_FIXTURE_DIR;

  Json to_json() const {
    return {{"kb_paths", kb},       {"h_max", h_max},         {"delta_threshold_multiplier", delta_multiplier},
            {"theta", theta},       {"epsilon", epsilon},     {"max_iter", max_iter},
            {"seed", seed},         {"dim", dim},             {"strict_cycles", strict_cycles},
            {"output", output}};
  }
};

/// Raised to leave a command with a code and a partial result.
struct Halt {
  int code;
  Json result;
};

int exit_for(cdc::ErrorCode code) {
  switch (code) {
    case cdc::ErrorCode::parse_error: return kParse;
    case cdc::ErrorCode::unauthorized: return kUnauthorized;
    default: return kRuntime;
  }
}

// Text mode: one "path: value" line per leaf, in the same order as the JSON.
void flatten(const Json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    if (j.empty()) out << prefix << ": {}\n";
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    if (j.empty()) out << prefix << ": []\n";
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

void emit(const Config& cfg, const std::string& command, int code, const Json& result) {
  Json doc = {{"command", command}, {"config", cfg.to_json()}, {"exit_code", code}, {"result", result}};
  if (cfg.output == "text") {
    flatten(doc, "", std::cout);
  } else {
    std::cout << doc.dump(2) << "\n";
  }
}

void stream_trace(const Config& cfg, const std::vector<cdc::TraceStep>& trace) {
  if (!cfg.trace) return;
  for (const auto& s : trace) std::cerr << Json(s).dump() << "\n";
}

std::vector<std::string> kb_paths(const Config& cfg, const char* fallback) {
  if (!cfg.kb.empty()) return cfg.kb;
  if (const char* env = std::getenv("CDC_KB"); env && *env) {
    std::vector<std::string> out;
    std::stringstream ss(env);
    for (std::string p; std::getline(ss, p, ':');)
      if (!p.empty()) out.push_back(p);
    return out;
  }
  if (fallback) return {cfg.fixtures + "/" + fallback};
  throw Halt{kParse, {{"error", {{"code", "Usage"}, {"message", "no knowledge base given (--kb or CDC_KB)"}}}}};
}

/// Parse failures exit 2; load failures (semantic) exit 1 unless tolerated.
cdc::KnowledgeBase load(const Config& cfg, const char* fallback, bool tolerate_load_errors = false, bool lax = false) {
  const auto paths = kb_paths(cfg, fallback);
  cdc::kb::Document merged;
  for (const auto& p : paths) {
    std::string text;
    try {
      text = cdc::read_file(p);
    } catch (const cdc::Error& e) {
      throw Halt{kParse, {{"error", {{"code", "ParseError"}, {"message", e.what()}}}}};
    }
    auto doc = cdc::kb::parse(text);
    if (!doc.ok()) {
      for (auto& d : doc.diagnostics) d.message = p + ": " + d.message;
      throw Halt{kParse, {{"error", {{"code", "ParseError"}, {"message", "knowledge base does not parse"}}}, {"diagnostics", doc.diagnostics}}};
    }
    merged.statements.insert(merged.statements.end(), doc.statements.begin(), doc.statements.end());
  }
  cdc::KnowledgeBase kbase;
  cdc::LoadOptions opt;
  opt.h_max = cfg.h_max;
  opt.cycles = (lax || !cfg.strict_cycles) ? cdc::FiberStore::CyclePolicy::lax : cdc::FiberStore::CyclePolicy::strict;
  kbase.load(merged, opt);
  if (!kbase.ok() && !tolerate_load_errors)
    throw Halt{kInvalid, {{"error", {{"code", "LoadError"}, {"message", "knowledge base failed to load"}}}, {"diagnostics", kbase.diagnostics}}};
  return kbase;
}

cdc::DomainPath domain(const cdc::KnowledgeBase& kbase, const std::string& text) {
  try {
    return kbase.resolve(text);
  } catch (const cdc::Error& e) {
    throw Halt{kParse, {{"error", {{"code", "ParseError"}, {"message", e.what()}}}}};
  }
}

// ---------------------------------------------------------------------------

Json cmd_validate(const Config& cfg, int& code) {
  const auto kbase = load(cfg, nullptr, true, true);
  const auto rep = cdc::validate(kbase);
  Json out = rep;
  out["diagnostics"] = kbase.diagnostics;
  out["domains"] = kbase.universe.size();
  out["triples"] = kbase.store.size();
  code = rep.passed() && kbase.ok() ? kOk : kInvalid;
  out["passed"] = code == kOk;
  return out;
}

Json cmd_experiment(const Config& cfg, const std::string& which, std::size_t seeds, const std::string& condition,
                    std::size_t prune_n, std::size_t prune_k, int& code) {
  namespace ex = cdc::experiments;
  code = kOk;
  if (which == "1") {
    const auto kbase = load(cfg, "experiment1.kb");
    const auto rep = ex::experiment1(kbase);
    const auto galois = cdc::galois_check(kbase.universe, kbase.typing, kbase.store);
    if (!rep.pattern_ok || !galois.passed()) code = kInvalid;
    Json out = rep;
    out["galois"] = {{"adjunction_cases", galois.adjunction_cases}, {"closure_cases", galois.closure_cases},
                     {"excluded", galois.excluded}, {"violations", galois.violations}, {"passed", galois.passed()}};
    return out;
  }
  if (which == "2") {
    const auto rep = ex::experiment2(load(cfg, "experiment2.kb"));
    if (!rep.ok()) code = kInvalid;
    return rep;
  }
  if (which == "3") {
    const auto kbase = load(cfg, "experiment3.kb");
    ex::Exp3Options opt;
    opt.seeds = seeds;
    opt.base_seed = cfg.seed;
    opt.dim = cfg.dim;
    opt.epsilon = cfg.epsilon;
    opt.max_iter = cfg.max_iter;
    Json conds = Json::object();
    for (char c : std::string("ABC")) {
      if (condition != "all" && condition != std::string(1, c)) continue;
      const auto rep = ex::experiment3(kbase.store, static_cast<ex::Condition>(c), opt);
      if (c == 'C' && rep.converged != rep.seeds) code = kInvalid;
      conds[std::string(1, c)] = rep;
    }
    return {{"conditions", conds}, {"base_seed", cfg.seed}};
  }
  if (which == "pruning") {
    const auto rep = ex::pruning(prune_n, prune_k, cfg.seed);
    if (!rep.same_answer || rep.fiber_candidates * prune_k > rep.n || rep.ratio() < static_cast<double>(prune_k)) code = kInvalid;
    return rep;
  }
  throw Halt{kParse, {{"error", {{"code", "Usage"}, {"message", "experiment must be 1, 2, 3 or pruning"}}}}};
}

Json cmd_query(const Config& cfg, const std::string& c, const std::string& r, const std::string& d, const std::string& mode) {
  const auto kbase = load(cfg, nullptr);
  const auto dom = domain(kbase, d);
  Json out;
  if (mode == "prefix") {
    const auto res = cdc::query(kbase.store, kbase.universe, c, r, dom);
    out = {{"targets", res.targets()}, {"hits", res.hits}, {"stats", res.stats}};
  } else {
    const auto res = cdc::inherited_query(kbase.store, kbase.universe, kbase.typing, c, r, dom,
                                          mode == "standard" ? cdc::Propagation::standard : cdc::Propagation::typed);
    out = {{"targets", res.targets()}, {"hits", res.hits}, {"stats", res.stats}, {"steps", res.steps}};
  }
  out["mode"] = mode;
  out["tau"] = cdc::to_string(kbase.typing.tau(r, dom, kbase.universe));
  return out;
}

Json cmd_closure(const Config& cfg, const std::string& c, const std::string& r, const std::string& d) {
  const auto kbase = load(cfg, nullptr);
  const auto res = cdc::transitive_closure(kbase.view(), c, r, domain(kbase, d));
  stream_trace(cfg, res.trace);
  return {{"items", res.items}, {"summary", res.summary}, {"trace_steps", res.trace.size()}};
}

Json cmd_traverse(const Config& cfg, const std::string& c0, const std::vector<std::string>& steps, const std::string& start) {
  const auto kbase = load(cfg, nullptr);
  std::vector<std::pair<std::string, cdc::DomainPath>> parsed;
  for (const auto& s : steps) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
      throw Halt{kParse, {{"error", {{"code", "Usage"}, {"message", "step '" + s + "' is not RELATION:DOMAIN"}}}}};
    parsed.emplace_back(s.substr(0, colon), domain(kbase, s.substr(colon + 1)));
  }
  const auto res = cdc::traverse_path(kbase.view(), c0, parsed, start.empty() ? cdc::DomainPath::top() : domain(kbase, start));
  stream_trace(cfg, res.trace);
  Json stages = Json::array();
  for (const auto& s : res.stages) stages.push_back(cdc::ctx_json(s));
  return {{"result", cdc::ctx_json(res.result)}, {"stages", stages}};
}

Json cmd_bridge(const Config& cfg, const std::string& action, const std::vector<std::string>& doms, int& code) {
  code = kOk;
  const bool discover = action == "discover";
  const auto kbase = load(cfg, nullptr);
  std::vector<cdc::DomainPath> d;
  for (const auto& s : doms) d.push_back(domain(kbase, s));
  auto need = [&](std::size_t n) {
    if (d.size() != n)
      throw Halt{kParse, {{"error", {{"code", "Usage"}, {"message", "bridge " + action + " takes " + std::to_string(n) + " domains"}}}}};
  };
  auto find = [&](const cdc::DomainPath& a, const cdc::DomainPath& b) -> const cdc::PartialMorphism& {
    const auto* phi = kbase.bridges.find(a, b);
    if (!phi) throw cdc::Error(cdc::ErrorCode::empty_domain_of_definition, "no bridge " + a.to_string() + " -> " + b.to_string());
    return *phi;
  };
  if (action == "spr") {
    need(2);
    const auto& phi = find(d[0], d[1]);
    const auto detail = cdc::spr_detail(phi, kbase.store, kbase.typing);
    Json per = Json::object();
    for (const auto& [c, v] : detail.per_concept) per[c] = cdc::number(v);
    return {{"morphism", phi}, {"spr", cdc::number(detail.value)}, {"per_concept", per}};
  }
  if (action == "compose") {
    need(3);
    const auto& p12 = find(d[0], d[1]);
    const auto& p23 = find(d[1], d[2]);
    const auto c = cdc::compose(p12, p23, kbase.store);
    const double s12 = cdc::spr(p12, kbase.store, kbase.typing), s23 = cdc::spr(p23, kbase.store, kbase.typing);
    const double s13 = c.morphism.mapping.empty() ? 0.0 : cdc::spr(c.morphism, kbase.store, kbase.typing);
    return {{"composition", c}, {"spr", {{"phi12", cdc::number(s12)}, {"phi23", cdc::number(s23)}, {"composed", cdc::number(s13)}}},
            {"degrades", s13 < std::min(s12, s23)}};
  }
  if (discover) {
    need(2);
    const auto e = cdc::init_embeddings(kbase.store, cfg.dim, cfg.seed);
    const auto props = cdc::discover_bridges(e, kbase.store, d[0], d[1], cfg.theta);
    return {{"proposals", props}, {"theta", cfg.theta}, {"status", "proposal"}};
  }
  throw Halt{kParse, {{"error", {{"code", "Usage"}, {"message", "bridge action must be spr, compose or discover"}}}}};
}

Json cmd_fuse(const Config& cfg, const std::string& d1, const std::string& d2, bool authorize, const std::string& name, int& code) {
  auto kbase = load(cfg, nullptr);
  cdc::FuseOptions opt;
  opt.authorized = authorize;
  if (!name.empty()) opt.name = name;
  opt.baseline_size = kbase.universe.size();
  opt.growth_multiplier = cfg.delta_multiplier;
  const auto res = cdc::fuse(kbase.universe, domain(kbase, d1), domain(kbase, d2), opt);
  code = res.growth_alert || !res.conservative.passed ? kInvalid : kOk;
  return res;
}

Json cmd_neural(const Config& cfg, const std::string& condition, int& code) {
  namespace ex = cdc::experiments;
  const auto kbase = load(cfg, "experiment3.kb");
  if (condition.size() != 1 || std::string("ABC").find(condition[0]) == std::string::npos)
    throw Halt{kParse, {{"error", {{"code", "Usage"}, {"message", "condition must be A, B or C"}}}}};
  ex::Exp3Options opt;
  opt.dim = cfg.dim;
  opt.epsilon = cfg.epsilon;
  opt.max_iter = cfg.max_iter;
  const auto rep = ex::run_condition(kbase.store, static_cast<ex::Condition>(condition[0]), cfg.seed, opt);
  code = rep.converged ? kOk : kRuntime;
  Json out = rep;
  out["condition"] = condition;
  out["hook"] = condition == "A" ? "dense, spectral radius " + cdc::kb::format_real(opt.a_radius) : "rank-1";
  return out;
}

Json cmd_phq9(const Config& cfg, const std::string& subject, bool record) {
  auto kbase = load(cfg, "phq9_p001.kb");
  const auto a = cdc::phq9::score_assessment(kbase, subject);
  if (record) cdc::phq9::record_assessment(kbase, a);
  Json out = {{"assessment", a}};
  if (record) out["propagation"] = cdc::phq9::alert_propagation_check(kbase, subject);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cdc: domain-contextualized concept graph engine"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--kb", cfg.kb, "knowledge base file (repeatable; env CDC_KB, ':'-separated)");
  app.add_option("--h-max", cfg.h_max, "height cap for the domain lattice")->envname("CDC_H_MAX")->check(CLI::Range(1, 1 << 16));
  app.add_option("--delta-multiplier", cfg.delta_multiplier, "|D| growth alert multiplier for fuse")
      ->envname("CDC_DELTA_MULTIPLIER")->check(CLI::Range(1.0, 1e6));
  app.add_option("--theta", cfg.theta, "similarity threshold for bridge discovery")->envname("CDC_THETA")->check(CLI::Range(-1.0, 1.0));
  app.add_option("--epsilon", cfg.epsilon, "convergence threshold")->envname("CDC_EPSILON")->check(CLI::Range(1e-15, 1.0));
  app.add_option("--max-iter", cfg.max_iter, "iteration cap")->envname("CDC_MAX_ITER")->check(CLI::Range(1, 10000000));
  app.add_option("--seed", cfg.seed, "seed for every random draw")->envname("CDC_SEED");
  app.add_option("--dim", cfg.dim, "embedding dimension")->envname("CDC_DIM")->check(CLI::Range(2, 4096));
  app.add_flag("--strict-cycles,!--lax-cycles", cfg.strict_cycles, "reject (default) or accept cycles in transitive relations")
      ->envname("CDC_STRICT_CYCLES");
  app.add_option("--output", cfg.output, "json or text")->envname("CDC_OUTPUT")->check(CLI::IsMember({"json", "text"}));
  app.add_flag("--trace", cfg.trace, "stream trace steps as JSON lines on stderr");
  app.add_option("--fixtures", cfg.fixtures, "directory of bundled fixtures")->envname("CDC_FIXTURES");

  std::function<Json(int&)> run;
  std::string command;

  auto* validate = app.add_subcommand("validate", "check lattice axioms and conditions C1-C4");
  validate->callback([&] { command = "validate"; run = [&](int& code) { return cmd_validate(cfg, code); }; });

  std::string which, condition = "all";
  std::size_t seeds = 100, prune_n = 100000, prune_k = 50;
  auto* exp = app.add_subcommand("experiment", "run experiment 1, 2, 3 or pruning");
  exp->add_option("which", which, "1, 2, 3 or pruning")->required();
  exp->add_option("--seeds", seeds, "experiment 3 seed count")->check(CLI::Range(1, 100000));
  exp->add_option("--condition", condition, "experiment 3 condition")->check(CLI::IsMember({"A", "B", "C", "all"}));
  exp->add_option("--n", prune_n, "pruning: triple count")->check(CLI::Range(1, 10000000));
  exp->add_option("--k", prune_k, "pruning: domain count")->check(CLI::Range(1, 100000));
  exp->callback([&] {
    command = "experiment";
    run = [&](int& code) { return cmd_experiment(cfg, which, seeds, condition, prune_n, prune_k, code); };
  });

  std::string c, r, d, mode = "prefix";
  auto* q = app.add_subcommand("query", "query(c, r, d)");
  q->add_option("concept", c)->required();
  q->add_option("relation", r)->required();
  q->add_option("domain", d)->required();
  q->add_option("--mode", mode, "prefix, typed or standard")->check(CLI::IsMember({"prefix", "typed", "standard"}));
  q->callback([&] { command = "query"; run = [&](int&) { return cmd_query(cfg, c, r, d, mode); }; });

  auto* cl = app.add_subcommand("closure", "transitive closure of c under r at d");
  cl->add_option("concept", c)->required();
  cl->add_option("relation", r)->required();
  cl->add_option("domain", d)->required();
  cl->callback([&] { command = "closure"; run = [&](int&) { return cmd_closure(cfg, c, r, d); }; });

  std::vector<std::string> steps;
  std::string start;
  auto* tr = app.add_subcommand("traverse", "fold RELATION:DOMAIN steps from a start concept");
  tr->add_option("concept", c)->required();
  tr->add_option("--step", steps, "RELATION:DOMAIN (repeatable, in order)");
  tr->add_option("--start", start, "start domain when there are no steps");
  tr->callback([&] { command = "traverse"; run = [&](int&) { return cmd_traverse(cfg, c, steps, start); }; });

  std::string action;
  std::vector<std::string> doms;
  auto* br = app.add_subcommand("bridge", "spr D1 D2 | compose D1 D2 D3 | discover D1 D2");
  br->add_option("action", action)->required()->check(CLI::IsMember({"spr", "compose", "discover"}));
  br->add_option("domains", doms)->required();
  br->callback([&] { command = "bridge"; run = [&](int& code) { return cmd_bridge(cfg, action, doms, code); }; });

  std::string d1, d2, name;
  bool authorize = false;
  auto* fu = app.add_subcommand("fuse", "fuse two domains under a new root (needs --authorize)");
  fu->add_option("d1", d1)->required();
  fu->add_option("d2", d2)->required();
  fu->add_flag("--authorize", authorize, "explicitly authorize the fusion");
  fu->add_option("--name", name, "name of the new domain");
  fu->callback([&] { command = "fuse"; run = [&](int& code) { return cmd_fuse(cfg, d1, d2, authorize, name, code); }; });

  std::string ncond = "C";
  auto* ne = app.add_subcommand("neural", "one fixed-point run; condition A is the dense test hook");
  ne->add_option("--condition", ncond, "A, B or C");
  ne->callback([&] { command = "neural"; run = [&](int& code) { return cmd_neural(cfg, ncond, code); }; });

  std::string subject = "P001";
  bool record = false;
  auto* ph = app.add_subcommand("phq9", "score a subject's PHQ-9 observations");
  ph->add_option("subject", subject);
  ph->add_flag("--record", record, "write the score chain back and check alert containment");
  ph->callback([&] { command = "phq9"; run = [&](int&) { return cmd_phq9(cfg, subject, record); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  int code = kOk;
  try {
    const Json result = run(code);
    emit(cfg, command, code, result);
  } catch (const Halt& h) {
    code = h.code;
    emit(cfg, command, code, h.result);
  } catch (const cdc::Error& e) {
    code = exit_for(e.code());
    emit(cfg, command, code, {{"error", {{"code", std::string(cdc::to_string(e.code()))}, {"message", e.what()}}}});
  } catch (const std::exception& e) {
    code = kRuntime;
    emit(cfg, command, code, {{"error", {{"code", "Runtime"}, {"message", e.what()}}}});
  }
  return code;
}
