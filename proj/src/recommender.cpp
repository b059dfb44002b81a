#include "bivmap/recommender.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "bivmap/error.hpp"

namespace bivmap {

namespace {

bool property_satisfies(const PerceptionSet& p, PerceptionRequirement r) {
  switch (r) {
    case PerceptionRequirement::Selective: return p.selective;
    case PerceptionRequirement::Ordinal: return p.ordered;
    case PerceptionRequirement::Quantitative: return p.quantitative;
    case PerceptionRequirement::Associative: return p.associative;
    case PerceptionRequirement::Dissociative: return p.dissociative();
    default: return true;
  }
}

std::string property_name(PerceptionRequirement r) {
  switch (r) {
    case PerceptionRequirement::Selective: return "selective";
    case PerceptionRequirement::Ordinal: return "ordered";
    case PerceptionRequirement::Quantitative: return "quantitative";
    case PerceptionRequirement::Associative: return "associative";
    case PerceptionRequirement::Dissociative: return "non-associative";
    default: return std::string(to_string(r));
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string var(VisualVariable v) { return std::string(to_string(v)); }

// One fixed evidence ordering: ranked groups, unlisted variables tied last.
using Ordering = std::vector<std::vector<VisualVariable>>;

double borda(const Ordering& ordering, VisualVariable v) {
  const double length = static_cast<double>(kAllVariables.size());
  int position = 1;
  std::vector<VisualVariable> listed;
  for (const auto& group : ordering) {
    const int first = position, last = position + static_cast<int>(group.size()) - 1;
    if (std::find(group.begin(), group.end(), v) != group.end())
      return length - (first + last) / 2.0;
    listed.insert(listed.end(), group.begin(), group.end());
    position = last + 1;
  }
  const int remaining = static_cast<int>(kAllVariables.size() - listed.size());
  const int first = position, last = position + remaining - 1;
  return length - (first + last) / 2.0;
}

const Ordering& intuitiveness_order() {
  static const Ordering o{{VisualVariable::Blur}, {VisualVariable::Value}, {VisualVariable::Size}};
  return o;
}
const Ordering& performance_order() {
  static const Ordering o{{VisualVariable::Value},
                          {VisualVariable::Blur, VisualVariable::Transparency}};
  return o;
}
const Ordering& preference_order() {
  static const Ordering o{
      {VisualVariable::Saturation}, {VisualVariable::Blur}, {VisualVariable::Value}};
  return o;
}

}  // namespace

std::string_view to_string(TaskTarget t) {
  switch (t) {
    case TaskTarget::Thematic: return "Thematic";
    case TaskTarget::Uncertainty: return "Uncertainty";
    case TaskTarget::Both: return "Both";
  }
  return "?";
}

std::optional<TaskTarget> parse_target(std::string_view s) {
  if (s == "Thematic") return TaskTarget::Thematic;
  if (s == "Uncertainty") return TaskTarget::Uncertainty;
  if (s == "Both") return TaskTarget::Both;
  return std::nullopt;
}

std::string_view to_string(CheckRule r) {
  switch (r) {
    case CheckRule::Availability: return "availability";
    case CheckRule::Placement: return "placement";
    case CheckRule::Perception: return "perception";
    case CheckRule::Binning: return "binning";
    case CheckRule::Separability: return "separability";
    case CheckRule::Dominance: return "dominance";
  }
  return "?";
}

std::vector<Pairing> RecommendationReport::accepted() const {
  std::vector<Pairing> out;
  for (const auto& c : candidates)
    if (c.verdict == Verdict::Accepted) out.push_back(c.pairing);
  return out;
}

RequirementProfile derive_requirements(const KnowledgeBase& kb,
                                       const std::vector<TargetedTask>& tasks) {
  if (tasks.empty()) throw Error(ErrorCode::EmptyTaskList, "tasks: must be non-empty");
  RequirementProfile profile;
  for (const auto& t : tasks) {
    const auto& entry = kb.task_entry(t.task);
    if (entry.arity == TaskArity::Univariate && t.target == TaskTarget::Both)
      throw Error(ErrorCode::InvalidRequest,
                  std::string(to_string(t.task)) + " is univariate and must target one dimension");
    // Separability classes describe the pair, whatever the stated target.
    if (is_separability_requirement(entry.requirement) || t.target == TaskTarget::Both) {
      profile.pairing.insert(entry.requirement);
    } else if (t.target == TaskTarget::Thematic) {
      profile.thematic.insert(entry.requirement);
    } else {
      profile.uncertainty.insert(entry.requirement);
    }
  }
  return profile;
}

bool dominance_constraint_active(const DesignRequest& request, const RequirementProfile& profile) {
  if (request.no_uncertainty_dominance) return *request.no_uncertainty_dominance;
  return profile.uncertainty.contains(PerceptionRequirement::Dissociative) ||
         profile.pairing.contains(PerceptionRequirement::Dissociative);
}

std::vector<CandidateTrace> filter_candidates(const KnowledgeBase& kb, const DesignRequest& request,
                                              const RequirementProfile& profile) {
  const auto imp = request.implantation;
  const bool dominance = dominance_constraint_active(request, profile);
  std::vector<SeparabilityClass> required_classes;
  for (auto r : profile.pairing)
    if (auto c = as_separability(r)) required_classes.push_back(*c);

  std::vector<CandidateTrace> out;
  for (const auto& entry : kb.enumerate_pairings(imp)) {
    const auto t = entry.pairing.thematic;
    const auto u = entry.pairing.uncertainty;
    CandidateTrace trace;
    trace.pairing = entry.pairing;

    // (1) availability
    const auto avail = kb.pairing_available(t, u, imp);
    trace.checks.push_back(
        {CheckRule::Availability, avail.available,
         avail.available ? "available at " + std::string(to_string(imp)) +
                               (avail.variant ? " as " + std::string(to_string(*avail.variant)) : "")
                         : "not available at " + std::string(to_string(imp))});

    // (2) uncertainty-only placement
    const bool placed = !kb.uncertainty_only(t);
    trace.checks.push_back({CheckRule::Placement, placed,
                            placed ? "thematic " + var(t) + " may carry the estimate"
                                   : var(t) + " is reserved for the uncertainty dimension"});

    // (3) perception requirements
    {
      std::vector<std::string> failures;
      auto check_dim = [&](const char* dim, VisualVariable v, const RequirementSet& reqs) {
        const auto props = kb.variable_properties(v);
        for (auto r : reqs)
          if (!property_satisfies(props, r))
            failures.push_back(std::string(dim) + " " + var(v) + ": " +
                               std::string(to_string(r)) + " requires " + property_name(r));
      };
      check_dim("thematic", t, profile.thematic);
      check_dim("uncertainty", u, profile.uncertainty);
      if (profile.pairing.contains(PerceptionRequirement::Dissociative)) {
        RequirementSet dis{PerceptionRequirement::Dissociative};
        check_dim("thematic", t, dis);
        check_dim("uncertainty", u, dis);
      }
      trace.checks.push_back({CheckRule::Perception, failures.empty(),
                              failures.empty() ? "all perception requirements met"
                                               : join(failures, "; ")});
    }

    // (4) binning vs selective length
    {
      std::vector<std::string> parts;
      bool pass = true;
      auto check_dim = [&](const char* dim, VisualVariable v, const BinningScheme& scheme,
                           const RequirementSet& reqs) {
        try {
          const auto c = validate_binning(kb, v, imp, scheme);
          if (!c.ok) {
            pass = false;
            parts.push_back(std::string(dim) + " " + var(v) + " " + scheme.describe() + ": " +
                            c.message());
          } else {
            parts.push_back(std::string(dim) + " " + var(v) + " " + scheme.describe() + ": Ok");
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnavailableVariable) throw;
          pass = false;
          parts.push_back(std::string(dim) + " " + var(v) + ": UnavailableVariable");
        }
        if (!scheme.discrete() && reqs.contains(PerceptionRequirement::Selective)) {
          pass = false;
          parts.push_back(std::string(dim) + " " + var(v) +
                          ": Selective requires a discrete binning");
        }
      };
      check_dim("thematic", t, request.thematic.binning, profile.thematic);
      check_dim("uncertainty", u, request.uncertainty.binning, profile.uncertainty);
      trace.checks.push_back({CheckRule::Binning, pass, join(parts, "; ")});
    }

    // (5) separability class
    {
      const auto sep = kb.separability_class(t, u, imp);
      trace.cls = sep.cls;
      std::vector<std::string> failures;
      for (auto c : required_classes)
        if (c != sep.cls)
          failures.push_back(std::string(to_string(c)) + " required, pairing is " +
                             std::string(to_string(sep.cls)));
      if (sep.uncertain_not_recommended && !request.include_uncertain_classifications)
        failures.push_back("classification is uncertain and not recommended");
      trace.checks.push_back(
          {CheckRule::Separability, failures.empty(),
           failures.empty() ? std::string(to_string(sep.cls)) +
                                  (sep.uncertain_not_recommended ? " (uncertain, overridden)" : "")
                            : join(failures, "; ")});
    }

    // (6) uncertainty must not dominate the estimate
    {
      const bool u_dis = kb.variable_properties(u).dissociative();
      const bool t_dis = kb.variable_properties(t).dissociative();
      bool pass = true;
      std::string detail;
      if (!dominance) {
        detail = "not requested";
      } else if (!u_dis) {
        detail = "uncertainty " + var(u) + " is associative";
      } else if (t_dis) {
        detail = "both dimensions dissociative";
      } else {
        pass = false;
        detail = "uncertainty " + var(u) + " is dissociative but thematic " + var(t) + " is not";
      }
      trace.checks.push_back({CheckRule::Dominance, pass, detail});
    }

    const bool all_pass = std::all_of(trace.checks.begin(), trace.checks.end(),
                                      [](const CheckResult& c) { return c.pass; });
    trace.verdict = all_pass ? Verdict::Accepted : Verdict::Rejected;
    out.push_back(std::move(trace));
  }
  return out;
}

RankBreakdown borda_points(VisualVariable uncertainty) {
  return {borda(intuitiveness_order(), uncertainty), borda(performance_order(), uncertainty),
          borda(preference_order(), uncertainty)};
}

std::vector<RankedCandidate> rank_candidates(const std::vector<Pairing>& accepted,
                                             const RankingWeights& weights) {
  if (accepted.empty()) throw Error(ErrorCode::NoCandidates, "no accepted candidates to rank");
  std::vector<Pairing> unique(accepted.begin(), accepted.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<RankedCandidate> ranked;
  for (const auto& p : unique) {
    RankedCandidate rc;
    rc.pairing = p;
    rc.breakdown = borda_points(p.uncertainty);
    rc.score = weights.intuitiveness * rc.breakdown.intuitiveness +
               weights.performance * rc.breakdown.performance +
               weights.preference * rc.breakdown.preference;
    ranked.push_back(rc);
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto ka = std::make_pair(var(a.pairing.thematic), var(a.pairing.uncertainty));
    const auto kb = std::make_pair(var(b.pairing.thematic), var(b.pairing.uncertainty));
    return ka < kb;
  });
  return ranked;
}

RecommendationReport recommend(const KnowledgeBase& kb, const DesignRequest& request) {
  RecommendationReport report;
  report.request = request;
  report.knowledge_base_version = kb.version();
  report.knowledge_base_checksum = kb.checksum();
  report.profile = derive_requirements(kb, request.tasks);
  report.dominance_applied = dominance_constraint_active(request, report.profile);

  std::vector<PerceptionRequirement> classes;
  for (auto r : report.profile.pairing)
    if (is_separability_requirement(r)) classes.push_back(r);
  if (classes.size() > 1) {
    std::vector<std::string> names;
    for (auto r : classes) names.emplace_back(to_string(r));
    report.conflicts.push_back(
        {"pairing", classes,
         "tasks require incompatible separability classes (" + join(names, ", ") +
             "); no single symbol satisfies them, consider two maps"});
  }
  auto dim_conflict = [&](const char* dim, const RequirementSet& reqs) {
    if (reqs.contains(PerceptionRequirement::Associative) &&
        reqs.contains(PerceptionRequirement::Dissociative))
      report.conflicts.push_back(
          {dim,
           {PerceptionRequirement::Associative, PerceptionRequirement::Dissociative},
           std::string(dim) + " dimension must be both associative and dissociative"});
  };
  dim_conflict("thematic", report.profile.thematic);
  dim_conflict("uncertainty", report.profile.uncertainty);

  report.candidates = filter_candidates(kb, request, report.profile);
  const auto accepted = report.accepted();
  if (!accepted.empty()) report.ranked = rank_candidates(accepted, request.weights);

  const auto nt = request.thematic.binning.n_bins();
  const auto nu = request.uncertainty.binning.n_bins();
  if (nt && nu && *nt * *nu > 9) {
    for (const auto& p : accepted) {
      if (is_colour_variable(p.thematic) && is_colour_variable(p.uncertainty))
        report.warnings.push_back(to_string(p) + ": " + std::to_string(*nt * *nu) +
                                  " bivariate colour levels exceed the nine-level guidance");
    }
  }
  return report;
}

// Serialization -----------------------------------------------------------------

DesignRequest request_from_json(const nlohmann::json& j) {
  std::vector<std::string> diag;
  DesignRequest r;
  if (!j.is_object()) throw Error(ErrorCode::InvalidRequest, "request must be an object", {"$: expected object"});

  if (j.contains("schema") && j["schema"] != kRequestSchema)
    diag.push_back("schema: expected '" + std::string(kRequestSchema) + "'");

  if (!j.contains("implantation") || !j["implantation"].is_string()) {
    diag.push_back("implantation: required (Point | Line | Area)");
  } else if (auto imp = parse_implantation(j["implantation"].get<std::string>())) {
    r.implantation = *imp;
  } else {
    diag.push_back("implantation: unknown value '" + j["implantation"].get<std::string>() + "'");
  }

  auto dim = [&](const char* key, DimensionRequest& out) {
    if (!j.contains(key) || !j[key].is_object()) {
      diag.push_back(std::string(key) + ": required object {name, binning}");
      return;
    }
    const auto& d = j[key];
    if (!d.contains("name") || !d["name"].is_string())
      diag.push_back(std::string(key) + ".name: required string");
    else
      out.name = d["name"].get<std::string>();
    if (!d.contains("binning"))
      diag.push_back(std::string(key) + ".binning: required");
    else
      out.binning = binning_from_json(d["binning"], std::string(key) + ".binning", diag);
  };
  dim("thematic", r.thematic);
  dim("uncertainty", r.uncertainty);

  if (!j.contains("tasks") || !j["tasks"].is_array()) {
    diag.push_back("tasks: required array");
  } else if (j["tasks"].empty()) {
    diag.push_back("tasks: must be non-empty");
  } else {
    std::size_t i = 0;
    for (const auto& t : j["tasks"]) {
      const auto path = "tasks[" + std::to_string(i++) + "]";
      std::optional<OperationalTask> task;
      std::optional<TaskTarget> target;
      if (!t.is_object() || !t.contains("task") || !t["task"].is_string())
        diag.push_back(path + ".task: required string");
      else if (!(task = parse_task(t["task"].get<std::string>())))
        diag.push_back(path + ".task: unknown value '" + t["task"].get<std::string>() + "'");
      if (!t.is_object() || !t.contains("target") || !t["target"].is_string())
        diag.push_back(path + ".target: required (Thematic | Uncertainty | Both)");
      else if (!(target = parse_target(t["target"].get<std::string>())))
        diag.push_back(path + ".target: unknown value '" + t["target"].get<std::string>() + "'");
      if (task && target) {
        if (intrinsic_arity(*task) == TaskArity::Univariate && *target == TaskTarget::Both)
          diag.push_back(path + ".target: univariate task " + std::string(to_string(*task)) +
                         " must target Thematic or Uncertainty");
        else
          r.tasks.push_back({*task, *target});
      }
    }
  }

  if (j.contains("constraints")) {
    const auto& c = j["constraints"];
    if (!c.is_object()) {
      diag.push_back("constraints: expected object");
    } else {
      if (c.contains("no_uncertainty_dominance") && !c["no_uncertainty_dominance"].is_null()) {
        if (c["no_uncertainty_dominance"].is_boolean())
          r.no_uncertainty_dominance = c["no_uncertainty_dominance"].get<bool>();
        else
          diag.push_back("constraints.no_uncertainty_dominance: expected bool or null");
      }
      if (c.contains("include_uncertain_classifications")) {
        if (c["include_uncertain_classifications"].is_boolean())
          r.include_uncertain_classifications = c["include_uncertain_classifications"].get<bool>();
        else
          diag.push_back("constraints.include_uncertain_classifications: expected bool");
      }
    }
  }

  if (j.contains("ranking_weights")) {
    const auto& w = j["ranking_weights"];
    auto read = [&](const char* key, double& out) {
      if (!w.contains(key)) return;
      if (!w[key].is_number() || w[key].get<double>() < 0)
        diag.push_back(std::string("ranking_weights.") + key + ": must be a number >= 0");
      else
        out = w[key].get<double>();
    };
    if (!w.is_object()) {
      diag.push_back("ranking_weights: expected object");
    } else {
      read("intuitiveness", r.weights.intuitiveness);
      read("performance", r.weights.performance);
      read("preference", r.weights.preference);
      if (r.weights.intuitiveness == 0 && r.weights.performance == 0 && r.weights.preference == 0)
        diag.push_back("ranking_weights: must not all be zero");
    }
  }

  if (j.contains("schemes")) {
    if (!j["schemes"].is_array()) {
      diag.push_back("schemes: expected array");
    } else {
      std::size_t i = 0;
      for (const auto& s : j["schemes"]) {
        const auto path = "schemes[" + std::to_string(i++) + "]";
        NamedScheme ns;
        if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) {
          diag.push_back(path + ".name: required string");
          continue;
        }
        ns.name = s["name"].get<std::string>();
        if (ns.name.empty() || ns.name.find_first_of("/\\ ") != std::string::npos)
          diag.push_back(path + ".name: must be a non-empty token without spaces or slashes");
        ns.thematic = binning_from_json(s.value("thematic", nlohmann::json()), path + ".thematic", diag);
        ns.uncertainty =
            binning_from_json(s.value("uncertainty", nlohmann::json()), path + ".uncertainty", diag);
        r.schemes.push_back(std::move(ns));
      }
    }
  }

  if (!diag.empty()) {
    const auto code = std::find(diag.begin(), diag.end(), "tasks: must be non-empty") != diag.end() &&
                              diag.size() == 1
                          ? ErrorCode::EmptyTaskList
                          : ErrorCode::InvalidRequest;
    throw Error(code, "invalid design request: " + join(diag, "; "), diag);
  }
  return r;
}

DesignRequest parse_request(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("request is not valid JSON: ") + e.what(),
                {std::string("$: ") + e.what()});
  }
  return request_from_json(j);
}

nlohmann::ordered_json to_json(const DesignRequest& r) {
  nlohmann::ordered_json j;
  j["schema"] = kRequestSchema;
  j["implantation"] = to_string(r.implantation);
  j["thematic"] = {{"name", r.thematic.name}, {"binning", to_json(r.thematic.binning)}};
  j["uncertainty"] = {{"name", r.uncertainty.name}, {"binning", to_json(r.uncertainty.binning)}};
  auto tasks = nlohmann::ordered_json::array();
  for (const auto& t : r.tasks) {
    nlohmann::ordered_json row;
    row["task"] = to_string(t.task);
    row["target"] = to_string(t.target);
    tasks.push_back(row);
  }
  j["tasks"] = tasks;
  nlohmann::ordered_json c;
  c["no_uncertainty_dominance"] = r.no_uncertainty_dominance
                                      ? nlohmann::ordered_json(*r.no_uncertainty_dominance)
                                      : nlohmann::ordered_json(nullptr);
  c["include_uncertain_classifications"] = r.include_uncertain_classifications;
  j["constraints"] = c;
  nlohmann::ordered_json w;
  w["intuitiveness"] = r.weights.intuitiveness;
  w["performance"] = r.weights.performance;
  w["preference"] = r.weights.preference;
  j["ranking_weights"] = w;
  if (!r.schemes.empty()) {
    auto schemes = nlohmann::ordered_json::array();
    for (const auto& s : r.schemes) {
      nlohmann::ordered_json row;
      row["name"] = s.name;
      row["thematic"] = to_json(s.thematic);
      row["uncertainty"] = to_json(s.uncertainty);
      schemes.push_back(row);
    }
    j["schemes"] = schemes;
  }
  return j;
}

nlohmann::ordered_json to_json(const RecommendationReport& r) {
  auto names = [](const RequirementSet& s) {
    auto a = nlohmann::ordered_json::array();
    for (auto x : s) a.push_back(to_string(x));
    return a;
  };
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["knowledge_base"] = {{"version", r.knowledge_base_version},
                         {"checksum", r.knowledge_base_checksum}};
  j["request"] = to_json(r.request);
  nlohmann::ordered_json profile;
  profile["thematic"] = names(r.profile.thematic);
  profile["uncertainty"] = names(r.profile.uncertainty);
  profile["pairing"] = names(r.profile.pairing);
  j["profile"] = profile;
  j["dominance_constraint"] = r.dominance_applied;

  auto conflicts = nlohmann::ordered_json::array();
  for (const auto& c : r.conflicts) {
    nlohmann::ordered_json row;
    row["kind"] = "ConflictNotice";
    row["dimension"] = c.dimension;
    auto reqs = nlohmann::ordered_json::array();
    for (auto x : c.requirements) reqs.push_back(to_string(x));
    row["requirements"] = reqs;
    row["message"] = c.message;
    conflicts.push_back(row);
  }
  j["conflicts"] = conflicts;
  j["warnings"] = r.warnings;

  auto cands = nlohmann::ordered_json::array();
  for (const auto& c : r.candidates) {
    nlohmann::ordered_json row;
    row["thematic"] = to_string(c.pairing.thematic);
    row["uncertainty"] = to_string(c.pairing.uncertainty);
    row["class"] = c.cls ? nlohmann::ordered_json(to_string(*c.cls)) : nlohmann::ordered_json(nullptr);
    row["verdict"] = c.verdict == Verdict::Accepted ? "Accepted" : "Rejected";
    auto checks = nlohmann::ordered_json::array();
    for (const auto& ch : c.checks) {
      nlohmann::ordered_json cj;
      cj["rule"] = to_string(ch.rule);
      cj["pass"] = ch.pass;
      cj["detail"] = ch.detail;
      checks.push_back(cj);
    }
    row["checks"] = checks;
    cands.push_back(row);
  }
  j["candidates"] = cands;

  auto ranked = nlohmann::ordered_json::array();
  int rank = 1;
  for (const auto& rc : r.ranked) {
    nlohmann::ordered_json row;
    row["rank"] = rank++;
    row["thematic"] = to_string(rc.pairing.thematic);
    row["uncertainty"] = to_string(rc.pairing.uncertainty);
    row["score"] = rc.score;
    row["breakdown"] = {{"intuitiveness", rc.breakdown.intuitiveness},
                        {"performance", rc.breakdown.performance},
                        {"preference", rc.breakdown.preference}};
    ranked.push_back(row);
  }
  j["ranked"] = ranked;
  return j;
}

std::string serialize_report(const RecommendationReport& r) { return to_json(r).dump(2) + "\n"; }

}  // namespace bivmap
