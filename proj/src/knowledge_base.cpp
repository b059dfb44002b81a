#include "bivmap/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <openssl/evp.h>

#include "bivmap/error.hpp"

namespace bivmap {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& names,
                        std::string_view s) {
  for (const auto& [e, n] : names)
    if (n == s) return e;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& names, E e) {
  for (const auto& [k, n] : names)
    if (k == e) return n;
  return "?";
}

constexpr std::array<std::pair<VisualVariable, std::string_view>, 7> kVariableNames{{
    {VisualVariable::Size, "Size"},
    {VisualVariable::Value, "Value"},
    {VisualVariable::Saturation, "Saturation"},
    {VisualVariable::Transparency, "Transparency"},
    {VisualVariable::Blur, "Blur"},
    {VisualVariable::Density, "Density"},
    {VisualVariable::Texture, "Texture"},
}};

constexpr std::array<std::pair<Implantation, std::string_view>, 3> kImplantationNames{{
    {Implantation::Point, "Point"},
    {Implantation::Line, "Line"},
    {Implantation::Area, "Area"},
}};

constexpr std::array<std::pair<Evidence, std::string_view>, 2> kEvidenceNames{{
    {Evidence::Established, "Established"},
    {Evidence::AuthorEstimate, "AuthorEstimate"},
}};

constexpr std::array<std::pair<SeparabilityClass, std::string_view>, 4> kClassNames{{
    {SeparabilityClass::Integral, "Integral"},
    {SeparabilityClass::Separable, "Separable"},
    {SeparabilityClass::Asymmetric, "Asymmetric"},
    {SeparabilityClass::Configural, "Configural"},
}};

constexpr std::array<std::pair<SymbolVariant, std::string_view>, 4> kVariantNames{{
    {SymbolVariant::BivariateChoropleth, "BivariateChoropleth"},
    {SymbolVariant::LineWidth, "LineWidth"},
    {SymbolVariant::WidthWithDashLength, "WidthWithDashLength"},
    {SymbolVariant::Crosshatch, "Crosshatch"},
}};

constexpr std::array<std::pair<TaskArity, std::string_view>, 2> kArityNames{{
    {TaskArity::Univariate, "Univariate"},
    {TaskArity::Bivariate, "Bivariate"},
}};

constexpr std::array<std::pair<OperationalTask, std::string_view>, 15> kTaskNames{{
    {OperationalTask::Identify, "Identify"},
    {OperationalTask::CompareWithin, "CompareWithin"},
    {OperationalTask::RankCompare, "RankCompare"},
    {OperationalTask::RatioCompare, "RatioCompare"},
    {OperationalTask::Locate, "Locate"},
    {OperationalTask::Distribution, "Distribution"},
    {OperationalTask::WeightedDistribution, "WeightedDistribution"},
    {OperationalTask::Isolate, "Isolate"},
    {OperationalTask::CompareBetween, "CompareBetween"},
    {OperationalTask::Correlate, "Correlate"},
    {OperationalTask::Associate, "Associate"},
    {OperationalTask::PrioritisedInterpretation, "PrioritisedInterpretation"},
    {OperationalTask::WeightedInterpretation, "WeightedInterpretation"},
    {OperationalTask::AssociateAndIsolate, "AssociateAndIsolate"},
    {OperationalTask::Combine, "Combine"},
}};

constexpr std::array<std::pair<PerceptionRequirement, std::string_view>, 9> kRequirementNames{{
    {PerceptionRequirement::Selective, "Selective"},
    {PerceptionRequirement::Ordinal, "Ordinal"},
    {PerceptionRequirement::Quantitative, "Quantitative"},
    {PerceptionRequirement::Associative, "Associative"},
    {PerceptionRequirement::Dissociative, "Dissociative"},
    {PerceptionRequirement::Separable, "Separable"},
    {PerceptionRequirement::Integral, "Integral"},
    {PerceptionRequirement::Asymmetric, "Asymmetric"},
    {PerceptionRequirement::Configural, "Configural"},
}};

constexpr std::array<std::pair<TableId, std::string_view>, 5> kTableNames{{
    {TableId::Availability, "availability"},
    {TableId::Properties, "properties"},
    {TableId::Lengths, "lengths"},
    {TableId::Separability, "separability"},
    {TableId::Tasks, "tasks"},
}};

constexpr std::string_view kRuleSchema = "bivmap-rule-tables/1";

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::RuleTableInvalid, "rule tables: " + what);
}

template <typename T>
T require(std::optional<T> v, const std::string& field, const nlohmann::json& raw) {
  if (!v) invalid(field + ": unknown value " + raw.dump());
  return *v;
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_string())
    invalid(ctx + "." + key + ": expected string");
  return obj.at(key).get<std::string>();
}

bool require_bool(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key) || !obj.at(key).is_boolean()) invalid(ctx + "." + key + ": expected bool");
  return obj.at(key).get<bool>();
}

std::size_t index_of(VisualVariable v) { return static_cast<std::size_t>(v); }
std::size_t index_of(Implantation i) { return static_cast<std::size_t>(i); }

// Printed order positions, used to sort enumerations.
int thematic_rank(VisualVariable v) {
  auto it = std::find(kThematicRowOrder.begin(), kThematicRowOrder.end(), v);
  return it == kThematicRowOrder.end() ? 99 : static_cast<int>(it - kThematicRowOrder.begin());
}
int uncertainty_rank(VisualVariable v) {
  auto it = std::find(kUncertaintyColumnOrder.begin(), kUncertaintyColumnOrder.end(), v);
  return static_cast<int>(it - kUncertaintyColumnOrder.begin());
}

// Order variables as in the properties table (Blur first).
constexpr std::array kPropertyRowOrder{VisualVariable::Blur,  VisualVariable::Transparency,
                                       VisualVariable::Saturation, VisualVariable::Value,
                                       VisualVariable::Size,  VisualVariable::Texture,
                                       VisualVariable::Density};

bool table_order_less(const std::tuple<Implantation, VisualVariable, VisualVariable>& a,
                      const std::tuple<Implantation, VisualVariable, VisualVariable>& b) {
  auto key = [](const auto& k) {
    return std::make_tuple(index_of(std::get<0>(k)), thematic_rank(std::get<1>(k)),
                           uncertainty_rank(std::get<2>(k)));
  };
  return key(a) < key(b);
}

}  // namespace

std::string_view to_string(VisualVariable v) { return name_of(kVariableNames, v); }
std::string_view to_string(Implantation i) { return name_of(kImplantationNames, i); }
std::string_view to_string(Evidence e) { return name_of(kEvidenceNames, e); }
std::string_view to_string(SeparabilityClass c) { return name_of(kClassNames, c); }
std::string_view to_string(SymbolVariant v) { return name_of(kVariantNames, v); }
std::string_view to_string(TaskArity a) { return name_of(kArityNames, a); }
std::string_view to_string(OperationalTask t) { return name_of(kTaskNames, t); }
std::string_view to_string(PerceptionRequirement r) { return name_of(kRequirementNames, r); }
std::string_view to_string(TableId t) { return name_of(kTableNames, t); }

std::optional<VisualVariable> parse_variable(std::string_view s) { return lookup(kVariableNames, s); }
std::optional<Implantation> parse_implantation(std::string_view s) {
  return lookup(kImplantationNames, s);
}
std::optional<Evidence> parse_evidence(std::string_view s) { return lookup(kEvidenceNames, s); }
std::optional<SeparabilityClass> parse_separability(std::string_view s) {
  return lookup(kClassNames, s);
}
std::optional<SymbolVariant> parse_variant(std::string_view s) { return lookup(kVariantNames, s); }
std::optional<TaskArity> parse_arity(std::string_view s) { return lookup(kArityNames, s); }
std::optional<OperationalTask> parse_task(std::string_view s) { return lookup(kTaskNames, s); }
std::optional<PerceptionRequirement> parse_requirement(std::string_view s) {
  return lookup(kRequirementNames, s);
}
std::optional<TableId> parse_table_id(std::string_view s) { return lookup(kTableNames, s); }

std::string to_string(const Pairing& p) {
  return "(" + std::string(to_string(p.thematic)) + "," + std::string(to_string(p.uncertainty)) +
         ")";
}

TaskArity intrinsic_arity(OperationalTask t) {
  return static_cast<int>(t) < static_cast<int>(OperationalTask::Isolate) ? TaskArity::Univariate
                                                                          : TaskArity::Bivariate;
}

bool is_separability_requirement(PerceptionRequirement r) { return as_separability(r).has_value(); }

std::optional<SeparabilityClass> as_separability(PerceptionRequirement r) {
  switch (r) {
    case PerceptionRequirement::Separable: return SeparabilityClass::Separable;
    case PerceptionRequirement::Integral: return SeparabilityClass::Integral;
    case PerceptionRequirement::Asymmetric: return SeparabilityClass::Asymmetric;
    case PerceptionRequirement::Configural: return SeparabilityClass::Configural;
    default: return std::nullopt;
  }
}

bool is_colour_variable(VisualVariable v) {
  return v == VisualVariable::Value || v == VisualVariable::Saturation ||
         v == VisualVariable::Transparency;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

KnowledgeBase KnowledgeBase::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    invalid(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) invalid("document must be an object");
  if (require_string(doc, "schema", "") != kRuleSchema)
    invalid("schema: expected " + std::string(kRuleSchema));

  KnowledgeBase kb;
  kb.version_ = require_string(doc, "version", "");

  std::array<bool, 7> seen{};
  if (!doc.contains("variables") || !doc["variables"].is_array()) invalid("variables: expected array");
  for (const auto& row : doc["variables"]) {
    const auto name = require_string(row, "name", "variables[]");
    const auto v = require(parse_variable(name), "variables[].name", row["name"]);
    if (seen[index_of(v)]) invalid("variables: duplicate " + name);
    seen[index_of(v)] = true;
    auto& entry = kb.variables_[index_of(v)];
    const auto ctx = "variables[" + name + "]";
    entry.variable = v;
    entry.uncertainty_only = require_bool(row, "uncertainty_only", ctx);
    entry.properties.selective = require_bool(row, "selective", ctx);
    entry.properties.associative = require_bool(row, "associative", ctx);
    entry.properties.ordered = require_bool(row, "ordered", ctx);
    entry.properties.quantitative = require_bool(row, "quantitative", ctx);
    entry.property_evidence = require(parse_evidence(require_string(row, "property_evidence", ctx)),
                                      ctx + ".property_evidence", row["property_evidence"]);
    if (!row.contains("selective_length") || !row["selective_length"].is_object())
      invalid(ctx + ".selective_length: expected object");
    for (auto imp : kAllImplantations) {
      const auto key = std::string(to_string(imp));
      const auto& lengths = row["selective_length"];
      if (!lengths.contains(key)) invalid(ctx + ".selective_length." + key + ": missing");
      const auto& cell = lengths[key];
      SelectiveLength sl;
      if (!cell.is_null()) {
        if (!cell.contains("length") || !cell["length"].is_number_integer())
          invalid(ctx + ".selective_length." + key + ".length: expected integer");
        sl.length = cell["length"].get<int>();
        sl.evidence = require(parse_evidence(require_string(cell, "evidence", ctx)),
                              ctx + ".selective_length." + key + ".evidence", cell["evidence"]);
      }
      entry.lengths[index_of(imp)] = sl;
    }
  }
  for (auto v : kAllVariables)
    if (!seen[index_of(v)]) invalid("variables: missing " + std::string(to_string(v)));

  auto read_key = [](const nlohmann::json& row, const std::string& ctx) {
    const auto imp = require(parse_implantation(require_string(row, "implantation", ctx)),
                             ctx + ".implantation", row["implantation"]);
    const auto t = require(parse_variable(require_string(row, "thematic", ctx)), ctx + ".thematic",
                           row["thematic"]);
    const auto u = require(parse_variable(require_string(row, "uncertainty", ctx)),
                           ctx + ".uncertainty", row["uncertainty"]);
    return std::make_tuple(imp, t, u);
  };

  if (!doc.contains("availability") || !doc["availability"].is_array())
    invalid("availability: expected array");
  for (const auto& row : doc["availability"]) {
    const auto key = read_key(row, "availability[]");
    AvailabilityEntry e{{std::get<1>(key), std::get<2>(key)}, std::get<0>(key), true, std::nullopt};
    if (row.contains("variant") && !row["variant"].is_null())
      e.variant = require(parse_variant(row["variant"].get<std::string>()), "availability[].variant",
                          row["variant"]);
    if (!kb.availability_.emplace(key, e).second)
      invalid("availability: duplicate entry " + to_string(e.pairing));
  }

  if (!doc.contains("separability") || !doc["separability"].is_array())
    invalid("separability: expected array");
  for (const auto& row : doc["separability"]) {
    const auto key = read_key(row, "separability[]");
    SeparabilityEntry e{{std::get<1>(key), std::get<2>(key)},
                        std::get<0>(key),
                        require(parse_separability(require_string(row, "class", "separability[]")),
                                "separability[].class", row["class"]),
                        require(parse_evidence(require_string(row, "evidence", "separability[]")),
                                "separability[].evidence", row["evidence"]),
                        require_bool(row, "uncertain", "separability[]")};
    if (!kb.separability_.emplace(key, e).second)
      invalid("separability: duplicate entry " + to_string(e.pairing));
  }

  if (!doc.contains("tasks") || !doc["tasks"].is_array()) invalid("tasks: expected array");
  for (const auto& row : doc["tasks"]) {
    TaskEntry t{require(parse_task(require_string(row, "task", "tasks[]")), "tasks[].task", row["task"]),
                require(parse_arity(require_string(row, "arity", "tasks[]")), "tasks[].arity",
                        row["arity"]),
                require(parse_requirement(require_string(row, "requirement", "tasks[]")),
                        "tasks[].requirement", row["requirement"]),
                row.value("description", std::string{})};
    kb.tasks_.push_back(std::move(t));
  }
  std::sort(kb.tasks_.begin(), kb.tasks_.end(),
            [](const TaskEntry& a, const TaskEntry& b) { return a.task < b.task; });

  kb.validate();
  kb.checksum_ = "sha256:" + sha256_hex(kb.canonical_json());
  return kb;
}

void KnowledgeBase::validate() const {
  for (const auto& v : variables_) {
    for (auto imp : kAllImplantations) {
      const auto& sl = v.lengths[index_of(imp)];
      if (sl.length && (*sl.length < 3 || *sl.length > 5))
        invalid("selective length out of range for " + std::string(to_string(v.variable)));
    }
  }
  for (const auto& [key, e] : availability_) {
    const auto [imp, t, u] = key;
    if (uncertainty_only(t))
      invalid("uncertainty-only variable in thematic slot: " + to_string(e.pairing));
    if (!selective_length(t, imp).available() || !selective_length(u, imp).available())
      invalid("pairing uses a variable unavailable at " + std::string(to_string(imp)) + ": " +
              to_string(e.pairing));
    const bool value_value = t == VisualVariable::Value && u == VisualVariable::Value;
    const bool density_area =
        t == VisualVariable::Density && u == VisualVariable::Density && imp == Implantation::Area;
    if ((e.variant == SymbolVariant::BivariateChoropleth) != value_value)
      invalid("bivariate choropleth variant must mark exactly the Value/Value pairing");
    if ((e.variant == SymbolVariant::Crosshatch) != density_area)
      invalid("crosshatch variant must mark exactly the area Density/Density pairing");
    if ((e.variant == SymbolVariant::LineWidth || e.variant == SymbolVariant::WidthWithDashLength) &&
        imp != Implantation::Line)
      invalid("line-width variants are only valid for line implantation");
  }
  for (const auto& [key, e] : separability_) {
    if (!availability_.contains(key))
      invalid("separability entry without availability: " + to_string(e.pairing));
  }
  for (const auto& [key, e] : availability_) {
    if (!separability_.contains(key))
      invalid("available pairing lacks a separability class: " + to_string(e.pairing) + " at " +
              std::string(to_string(std::get<0>(key))));
  }
  if (tasks_.size() != kAllTasks.size()) invalid("tasks: expected one row per operational task");
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const auto& t = tasks_[i];
    if (t.task != kAllTasks[i]) invalid("tasks: duplicate or missing task");
    if (t.arity != intrinsic_arity(t.task))
      invalid("tasks: arity mismatch for " + std::string(to_string(t.task)));
    const bool sep = is_separability_requirement(t.requirement);
    const bool dis = t.requirement == PerceptionRequirement::Dissociative;
    if (t.arity == TaskArity::Bivariate && !(sep || dis))
      invalid("tasks: bivariate task with univariate requirement");
    if (t.arity == TaskArity::Univariate && sep)
      invalid("tasks: univariate task with separability requirement");
  }
}

KnowledgeBase KnowledgeBase::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open rule tables: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const KnowledgeBase& KnowledgeBase::builtin() {
  static const KnowledgeBase kb = from_json(builtin_document());
  return kb;
}

PerceptionSet KnowledgeBase::variable_properties(VisualVariable v) const {
  return variables_[index_of(v)].properties;
}

bool KnowledgeBase::uncertainty_only(VisualVariable v) const {
  return variables_[index_of(v)].uncertainty_only;
}

Evidence KnowledgeBase::property_evidence(VisualVariable v) const {
  return variables_[index_of(v)].property_evidence;
}

SelectiveLength KnowledgeBase::selective_length(VisualVariable v, Implantation i) const {
  return variables_[index_of(v)].lengths[index_of(i)];
}

AvailabilityEntry KnowledgeBase::pairing_available(VisualVariable t, VisualVariable u,
                                                   Implantation i) const {
  if (auto it = availability_.find({i, t, u}); it != availability_.end()) return it->second;
  return AvailabilityEntry{{t, u}, i, false, std::nullopt};
}

SeparabilityEntry KnowledgeBase::separability_class(VisualVariable t, VisualVariable u,
                                                    Implantation i) const {
  if (auto it = separability_.find({i, t, u}); it != separability_.end()) return it->second;
  throw Error(ErrorCode::NotAvailable, "pairing " + to_string(Pairing{t, u}) +
                                           " is not available at " + std::string(to_string(i)));
}

const TaskEntry& KnowledgeBase::task_entry(OperationalTask task) const {
  return tasks_[static_cast<std::size_t>(task)];
}

PerceptionRequirement KnowledgeBase::task_requirement(OperationalTask task) const {
  return task_entry(task).requirement;
}

std::vector<AvailabilityEntry> KnowledgeBase::enumerate_pairings(Implantation i) const {
  std::vector<std::tuple<Implantation, VisualVariable, VisualVariable>> keys;
  for (const auto& [key, e] : availability_)
    if (std::get<0>(key) == i) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), table_order_less);
  std::vector<AvailabilityEntry> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(availability_.at(k));
  return out;
}

nlohmann::ordered_json KnowledgeBase::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema"] = kRuleSchema;
  doc["version"] = version_;

  auto vars = nlohmann::ordered_json::array();
  for (auto v : kPropertyRowOrder) {
    const auto& e = variables_[index_of(v)];
    nlohmann::ordered_json row;
    row["name"] = to_string(v);
    row["uncertainty_only"] = e.uncertainty_only;
    row["selective"] = e.properties.selective;
    row["associative"] = e.properties.associative;
    row["ordered"] = e.properties.ordered;
    row["quantitative"] = e.properties.quantitative;
    row["property_evidence"] = to_string(e.property_evidence);
    nlohmann::ordered_json lengths;
    for (auto imp : kAllImplantations) {
      const auto& sl = e.lengths[index_of(imp)];
      if (sl.length)
        lengths[std::string(to_string(imp))] = {{"length", *sl.length},
                                                {"evidence", to_string(sl.evidence)}};
      else
        lengths[std::string(to_string(imp))] = nullptr;
    }
    row["selective_length"] = lengths;
    vars.push_back(row);
  }
  doc["variables"] = vars;

  std::vector<std::tuple<Implantation, VisualVariable, VisualVariable>> keys;
  for (const auto& [k, e] : availability_) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), table_order_less);

  auto avail = nlohmann::ordered_json::array();
  auto sep = nlohmann::ordered_json::array();
  for (const auto& k : keys) {
    const auto& a = availability_.at(k);
    nlohmann::ordered_json row;
    row["implantation"] = to_string(a.implantation);
    row["thematic"] = to_string(a.pairing.thematic);
    row["uncertainty"] = to_string(a.pairing.uncertainty);
    row["variant"] = a.variant ? nlohmann::ordered_json(to_string(*a.variant)) : nlohmann::ordered_json(nullptr);
    avail.push_back(row);

    const auto& s = separability_.at(k);
    nlohmann::ordered_json srow;
    srow["implantation"] = to_string(s.implantation);
    srow["thematic"] = to_string(s.pairing.thematic);
    srow["uncertainty"] = to_string(s.pairing.uncertainty);
    srow["class"] = to_string(s.cls);
    srow["evidence"] = to_string(s.evidence);
    srow["uncertain"] = s.uncertain_not_recommended;
    sep.push_back(srow);
  }
  doc["availability"] = avail;
  doc["separability"] = sep;

  auto tasks = nlohmann::ordered_json::array();
  for (const auto& t : tasks_) {
    nlohmann::ordered_json row;
    row["task"] = to_string(t.task);
    row["arity"] = to_string(t.arity);
    row["requirement"] = to_string(t.requirement);
    row["description"] = t.description;
    tasks.push_back(row);
  }
  doc["tasks"] = tasks;
  return doc;
}

std::string KnowledgeBase::canonical_json() const { return to_json().dump(2) + "\n"; }

nlohmann::ordered_json KnowledgeBase::table_dump(TableId id) const {
  const auto full = to_json();
  nlohmann::ordered_json out;
  out["table"] = to_string(id);
  out["version"] = version_;
  out["checksum"] = checksum_;
  switch (id) {
    case TableId::Availability: out["rows"] = full["availability"]; break;
    case TableId::Separability: out["rows"] = full["separability"]; break;
    case TableId::Tasks: out["rows"] = full["tasks"]; break;
    case TableId::Properties: {
      auto rows = nlohmann::ordered_json::array();
      for (const auto& v : full["variables"]) {
        nlohmann::ordered_json r;
        for (const char* k : {"name", "uncertainty_only", "selective", "associative", "ordered",
                              "quantitative", "property_evidence"})
          r[k] = v[k];
        r["dissociative"] = !v["associative"].get<bool>();
        rows.push_back(r);
      }
      out["rows"] = rows;
      break;
    }
    case TableId::Lengths: {
      auto rows = nlohmann::ordered_json::array();
      for (const auto& v : full["variables"]) {
        for (auto imp : kAllImplantations) {
          const auto& cell = v["selective_length"][std::string(to_string(imp))];
          nlohmann::ordered_json r;
          r["variable"] = v["name"];
          r["implantation"] = to_string(imp);
          r["length"] = cell.is_null() ? nlohmann::ordered_json(nullptr) : cell["length"];
          r["evidence"] = cell.is_null() ? nlohmann::ordered_json(nullptr) : cell["evidence"];
          rows.push_back(r);
        }
      }
      out["rows"] = rows;
      break;
    }
  }
  return out;
}

}  // namespace bivmap
