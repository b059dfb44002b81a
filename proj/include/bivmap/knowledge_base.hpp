#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace bivmap {

// Semiotic vocabulary ---------------------------------------------------------

enum class VisualVariable { Size, Value, Saturation, Transparency, Blur, Density, Texture };
enum class Implantation { Point, Line, Area };
enum class Evidence { Established, AuthorEstimate };
enum class SeparabilityClass { Integral, Separable, Asymmetric, Configural };
enum class SymbolVariant { BivariateChoropleth, LineWidth, WidthWithDashLength, Crosshatch };
enum class TaskArity { Univariate, Bivariate };

enum class OperationalTask {
  Identify,
  CompareWithin,
  RankCompare,
  RatioCompare,
  Locate,
  Distribution,
  WeightedDistribution,
  Isolate,
  CompareBetween,
  Correlate,
  Associate,
  PrioritisedInterpretation,
  WeightedInterpretation,
  AssociateAndIsolate,
  Combine,
};

enum class PerceptionRequirement {
  Selective,
  Ordinal,
  Quantitative,
  Associative,
  Dissociative,
  Separable,
  Integral,
  Asymmetric,
  Configural,
};

inline constexpr std::array kAllVariables{
    VisualVariable::Size,         VisualVariable::Value, VisualVariable::Saturation,
    VisualVariable::Transparency, VisualVariable::Blur,  VisualVariable::Density,
    VisualVariable::Texture};

inline constexpr std::array kAllImplantations{Implantation::Point, Implantation::Line,
                                              Implantation::Area};

// Row and column order of the bivariate symbol tables as printed.
inline constexpr std::array kThematicRowOrder{VisualVariable::Value, VisualVariable::Size,
                                              VisualVariable::Texture, VisualVariable::Density};
inline constexpr std::array kUncertaintyColumnOrder{
    VisualVariable::Saturation, VisualVariable::Blur, VisualVariable::Transparency,
    VisualVariable::Value,      VisualVariable::Size, VisualVariable::Texture,
    VisualVariable::Density};

inline constexpr std::array kAllTasks{
    OperationalTask::Identify,
    OperationalTask::CompareWithin,
    OperationalTask::RankCompare,
    OperationalTask::RatioCompare,
    OperationalTask::Locate,
    OperationalTask::Distribution,
    OperationalTask::WeightedDistribution,
    OperationalTask::Isolate,
    OperationalTask::CompareBetween,
    OperationalTask::Correlate,
    OperationalTask::Associate,
    OperationalTask::PrioritisedInterpretation,
    OperationalTask::WeightedInterpretation,
    OperationalTask::AssociateAndIsolate,
    OperationalTask::Combine};

std::string_view to_string(VisualVariable v);
std::string_view to_string(Implantation i);
std::string_view to_string(Evidence e);
std::string_view to_string(SeparabilityClass c);
std::string_view to_string(SymbolVariant v);
std::string_view to_string(TaskArity a);
std::string_view to_string(OperationalTask t);
std::string_view to_string(PerceptionRequirement r);

std::optional<VisualVariable> parse_variable(std::string_view s);
std::optional<Implantation> parse_implantation(std::string_view s);
std::optional<Evidence> parse_evidence(std::string_view s);
std::optional<SeparabilityClass> parse_separability(std::string_view s);
std::optional<SymbolVariant> parse_variant(std::string_view s);
std::optional<TaskArity> parse_arity(std::string_view s);
std::optional<OperationalTask> parse_task(std::string_view s);
std::optional<PerceptionRequirement> parse_requirement(std::string_view s);

// Arity implied by the task's section in the task table. The loaded table
// must agree with this.
TaskArity intrinsic_arity(OperationalTask t);

bool is_separability_requirement(PerceptionRequirement r);

// Variables whose levels are carried by colour (nine-level guidance).
bool is_colour_variable(VisualVariable v);
std::optional<SeparabilityClass> as_separability(PerceptionRequirement r);

// Table records ---------------------------------------------------------------

struct PerceptionSet {
  bool selective = false;
  bool associative = false;
  bool ordered = false;
  bool quantitative = false;

  // Treated as the negation of associative; the case-study reasoning uses
  // it that way for every non-texture variable.
  bool dissociative() const { return !associative; }

  friend bool operator==(const PerceptionSet&, const PerceptionSet&) = default;
};

struct SelectiveLength {
  std::optional<int> length;  // nullopt: variable unusable at this implantation
  Evidence evidence = Evidence::AuthorEstimate;

  bool available() const { return length.has_value(); }
  friend bool operator==(const SelectiveLength&, const SelectiveLength&) = default;
};

struct Pairing {
  VisualVariable thematic;
  VisualVariable uncertainty;

  friend bool operator==(const Pairing&, const Pairing&) = default;
  friend auto operator<=>(const Pairing&, const Pairing&) = default;
};

std::string to_string(const Pairing& p);

struct AvailabilityEntry {
  Pairing pairing;
  Implantation implantation;
  bool available = false;
  std::optional<SymbolVariant> variant;

  friend bool operator==(const AvailabilityEntry&, const AvailabilityEntry&) = default;
};

struct SeparabilityEntry {
  Pairing pairing;
  Implantation implantation;
  SeparabilityClass cls;
  Evidence evidence;
  bool uncertain_not_recommended = false;

  friend bool operator==(const SeparabilityEntry&, const SeparabilityEntry&) = default;
};

struct TaskEntry {
  OperationalTask task;
  TaskArity arity;
  PerceptionRequirement requirement;
  std::string description;
};

struct VariableEntry {
  VisualVariable variable;
  bool uncertainty_only = false;
  PerceptionSet properties;
  Evidence property_evidence = Evidence::AuthorEstimate;
  std::array<SelectiveLength, 3> lengths;  // indexed by Implantation
};

enum class TableId { Availability, Properties, Lengths, Separability, Tasks };
std::optional<TableId> parse_table_id(std::string_view s);
std::string_view to_string(TableId t);

// Immutable rule tables. Loaded once from the versioned rule document and
// validated against the structural invariants of the tables; every query
// afterwards is a pure read.
class KnowledgeBase {
 public:
  static KnowledgeBase from_json(std::string_view text);
  static KnowledgeBase load_file(const std::string& path);
  // Rule document compiled into the library.
  static const KnowledgeBase& builtin();
  static std::string_view builtin_document();

  PerceptionSet variable_properties(VisualVariable v) const;
  bool uncertainty_only(VisualVariable v) const;
  Evidence property_evidence(VisualVariable v) const;
  SelectiveLength selective_length(VisualVariable v, Implantation i) const;
  AvailabilityEntry pairing_available(VisualVariable t, VisualVariable u, Implantation i) const;
  // Throws Error{NotAvailable} when the pairing is absent at `i`.
  SeparabilityEntry separability_class(VisualVariable t, VisualVariable u, Implantation i) const;
  PerceptionRequirement task_requirement(OperationalTask task) const;
  const TaskEntry& task_entry(OperationalTask task) const;
  const std::vector<TaskEntry>& tasks() const { return tasks_; }

  // Available pairings at `i`, thematic row-major in printed table order.
  std::vector<AvailabilityEntry> enumerate_pairings(Implantation i) const;

  const std::string& version() const { return version_; }
  // "sha256:<hex>" of the canonical serialization.
  const std::string& checksum() const { return checksum_; }
  // Canonical rule document; reloading it yields an identical checksum.
  std::string canonical_json() const;
  nlohmann::ordered_json to_json() const;
  nlohmann::ordered_json table_dump(TableId id) const;

 private:
  KnowledgeBase() = default;
  void validate() const;

  std::string version_;
  std::string checksum_;
  std::array<VariableEntry, 7> variables_{};
  std::map<std::tuple<Implantation, VisualVariable, VisualVariable>, AvailabilityEntry>
      availability_;
  std::map<std::tuple<Implantation, VisualVariable, VisualVariable>, SeparabilityEntry>
      separability_;
  std::vector<TaskEntry> tasks_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace bivmap
