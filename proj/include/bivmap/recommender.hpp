#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bivmap/data_model.hpp"
#include "bivmap/knowledge_base.hpp"

namespace bivmap {

enum class TaskTarget { Thematic, Uncertainty, Both };
std::string_view to_string(TaskTarget t);
std::optional<TaskTarget> parse_target(std::string_view s);

struct TargetedTask {
  OperationalTask task;
  TaskTarget target;
};

struct DimensionRequest {
  std::string name;
  BinningScheme binning;
};

struct RankingWeights {
  double intuitiveness = 1.0;
  double performance = 1.0;
  double preference = 1.0;
};

// A named alternative binning of both dimensions, rendered side by side by
// the ensemble command.
struct NamedScheme {
  std::string name;
  BinningScheme thematic;
  BinningScheme uncertainty;
};

struct DesignRequest {
  Implantation implantation = Implantation::Area;
  DimensionRequest thematic;
  DimensionRequest uncertainty;
  std::vector<TargetedTask> tasks;
  // nullopt: on exactly when the uncertainty dimension carries a
  // Dissociative requirement.
  std::optional<bool> no_uncertainty_dominance;
  bool include_uncertain_classifications = false;
  RankingWeights weights;
  std::vector<NamedScheme> schemes;
};

using RequirementSet = std::set<PerceptionRequirement>;

struct RequirementProfile {
  RequirementSet thematic;
  RequirementSet uncertainty;
  RequirementSet pairing;

  friend bool operator==(const RequirementProfile&, const RequirementProfile&) = default;
};

enum class CheckRule { Availability, Placement, Perception, Binning, Separability, Dominance };
std::string_view to_string(CheckRule r);

struct CheckResult {
  CheckRule rule;
  bool pass;
  std::string detail;
};

enum class Verdict { Accepted, Rejected };

struct CandidateTrace {
  Pairing pairing;
  std::optional<SeparabilityClass> cls;
  Verdict verdict = Verdict::Rejected;
  std::vector<CheckResult> checks;
};

struct RankBreakdown {
  double intuitiveness = 0;
  double performance = 0;
  double preference = 0;
};

struct RankedCandidate {
  Pairing pairing;
  double score = 0;
  RankBreakdown breakdown;
};

struct ConflictNotice {
  std::string dimension;
  std::vector<PerceptionRequirement> requirements;
  std::string message;
};

struct RecommendationReport {
  DesignRequest request;
  RequirementProfile profile;
  bool dominance_applied = false;
  std::vector<CandidateTrace> candidates;
  std::vector<RankedCandidate> ranked;
  std::vector<ConflictNotice> conflicts;
  std::vector<std::string> warnings;
  std::string knowledge_base_version;
  std::string knowledge_base_checksum;

  std::vector<Pairing> accepted() const;
};

// Step 1: tasks to requirements. Throws EmptyTaskList.
RequirementProfile derive_requirements(const KnowledgeBase& kb,
                                       const std::vector<TargetedTask>& tasks);

bool dominance_constraint_active(const DesignRequest& request, const RequirementProfile& profile);

// Steps 2-4: every enumerated pairing is run through all six checks.
std::vector<CandidateTrace> filter_candidates(const KnowledgeBase& kb, const DesignRequest& request,
                                              const RequirementProfile& profile);

// Borda points of a variable under each fixed evidence ordering.
RankBreakdown borda_points(VisualVariable uncertainty);

// Step 5 evidence ranking. Throws NoCandidates on empty input.
std::vector<RankedCandidate> rank_candidates(const std::vector<Pairing>& accepted,
                                             const RankingWeights& weights);

RecommendationReport recommend(const KnowledgeBase& kb, const DesignRequest& request);

// Structured-text forms. Parsing collects every field-level problem and
// throws Error{InvalidRequest} with them as details.
DesignRequest request_from_json(const nlohmann::json& j);
DesignRequest parse_request(std::string_view text);
nlohmann::ordered_json to_json(const DesignRequest& r);
nlohmann::ordered_json to_json(const RecommendationReport& r);
std::string serialize_report(const RecommendationReport& r);

inline constexpr std::string_view kRequestSchema = "bivmap-design-request/1";
inline constexpr std::string_view kReportSchema = "bivmap-report/1";

}  // namespace bivmap
