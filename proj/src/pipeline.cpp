#include "bivmap/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "bivmap/error.hpp"

namespace bivmap {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string var(VisualVariable v) { return std::string(to_string(v)); }

std::string svg_name(const std::string& scheme, const Pairing& p) {
  return scheme + "-" + var(p.thematic) + "-" + var(p.uncertainty) + ".svg";
}

DimensionRequest dimension_from_json(const nlohmann::json& j, const std::string& key,
                                     std::vector<std::string>& diag) {
  DimensionRequest d;
  if (!j.contains(key) || !j[key].is_object()) {
    diag.push_back(key + ": required object {name, binning}");
    return d;
  }
  const auto& o = j[key];
  if (!o.contains("name") || !o["name"].is_string())
    diag.push_back(key + ".name: required string");
  else
    d.name = o["name"].get<std::string>();
  if (!o.contains("binning"))
    diag.push_back(key + ".binning: required");
  else
    d.binning = binning_from_json(o["binning"], key + ".binning", diag);
  return d;
}

void check_dimension(const KnowledgeBase& kb, VisualVariable v, Implantation imp,
                     const DimensionRequest& d, const char* dim) {
  BinningCheck check;
  try {
    check = validate_binning(kb, v, imp, d.binning);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(dim) + " " + e.what(), {std::string(dim) + ": " + e.what()});
  }
  if (!check.ok) {
    const auto msg = std::string(dim) + " " + var(v) + " at " + std::string(to_string(imp)) + ": " +
                     check.message();
    throw Error(ErrorCode::BinningViolation, msg, {msg});
  }
}

void check_pairing(const KnowledgeBase& kb, const Pairing& p, Implantation imp) {
  if (imp == Implantation::Line)
    throw Error(ErrorCode::UnsupportedImplantation, "line implantation cannot be rendered");
  if (!kb.pairing_available(p.thematic, p.uncertainty, imp).available)
    throw Error(ErrorCode::NotAvailable,
                to_string(p) + " is not an available bivariate symbol at " + std::string(to_string(imp)));
}

DimensionBins bins_for_scheme(const std::string& name, const BinningScheme& s) {
  if (!s.discrete()) return DimensionBins::continuous(name);
  if (s.kind == BinningScheme::Kind::Threshold) {
    BinnedAttribute b;
    b.name = name;
    b.scheme = s;
    b.n_bins = s.n_bins();
    b.cuts = s.edges;
    return DimensionBins::from(b);
  }
  return DimensionBins::discrete(name, *s.n_bins());
}

nlohmann::ordered_json binned_json(const Dataset& ds, const std::string& scheme,
                                   const BinnedAttribute& t, const BinnedAttribute& u) {
  nlohmann::ordered_json j;
  j["scheme"] = scheme;
  j["thematic"] = to_json(t, ds);
  j["uncertainty"] = to_json(u, ds);
  return j;
}

std::vector<NamedScheme> schemes_of(const DesignRequest& r) {
  if (!r.schemes.empty()) return r.schemes;
  return {NamedScheme{"primary", r.thematic.binning, r.uncertainty.binning}};
}

DesignRequest with_scheme(DesignRequest r, const NamedScheme& s) {
  r.thematic.binning = s.thematic;
  r.uncertainty.binning = s.uncertainty;
  return r;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::optional<CvDerivation> cv_from_json(const nlohmann::json& j, const std::string& field,
                                         std::vector<std::string>& diag) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object()) {
    diag.push_back(field + ": expected object {mean, sd, name}");
    return std::nullopt;
  }
  CvDerivation cv;
  for (const auto& [key, out] : {std::pair<const char*, std::string*>{"mean", &cv.mean},
                                 {"sd", &cv.sd},
                                 {"name", &cv.name}}) {
    if (!j.contains(key)) {
      if (std::string_view(key) != "name") diag.push_back(field + "." + key + ": required string");
      continue;
    }
    if (!j[key].is_string() || j[key].get<std::string>().empty())
      diag.push_back(field + "." + key + ": expected non-empty string");
    else
      *out = j[key].get<std::string>();
  }
  return cv;
}

CvDerivation parse_cv_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() < 2 || parts.size() > 3 ||
      std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.empty(); }))
    throw Error(ErrorCode::InvalidRequest, "--cv expects MEAN,SD or MEAN,SD,NAME; got '" + spec + "'");
  CvDerivation cv{parts[0], parts[1]};
  if (parts.size() == 3) cv.name = parts[2];
  return cv;
}

Dataset apply_cv(Dataset ds, const std::optional<CvDerivation>& cv) {
  if (!cv) return ds;
  return with_coefficient_of_variation(std::move(ds), cv->mean, cv->sd, cv->name);
}

RenderRequest render_request_from_json(const nlohmann::json& j) {
  std::vector<std::string> diag;
  RenderRequest r;
  if (!j.is_object()) throw Error(ErrorCode::InvalidRequest, "render request must be an object",
                                  {"body: expected object"});
  if (!j.contains("pairing") || !j["pairing"].is_object()) {
    diag.push_back("pairing: required object {thematic, uncertainty}");
  } else {
    for (const char* key : {"thematic", "uncertainty"}) {
      const auto& p = j["pairing"];
      const auto path = std::string("pairing.") + key;
      if (!p.contains(key) || !p[key].is_string()) {
        diag.push_back(path + ": required visual variable name");
        continue;
      }
      auto v = parse_variable(p[key].get<std::string>());
      if (!v) {
        diag.push_back(path + ": unknown value '" + p[key].get<std::string>() + "'");
        continue;
      }
      (std::string_view(key) == "thematic" ? r.pairing.thematic : r.pairing.uncertainty) = *v;
    }
  }
  if (j.contains("implantation")) {
    if (!j["implantation"].is_string())
      diag.push_back("implantation: expected string");
    else if (auto imp = parse_implantation(j["implantation"].get<std::string>()))
      r.implantation = *imp;
    else
      diag.push_back("implantation: unknown value '" + j["implantation"].get<std::string>() + "'");
  }
  r.thematic = dimension_from_json(j, "thematic", diag);
  r.uncertainty = dimension_from_json(j, "uncertainty", diag);
  if (j.contains("cv")) r.cv = cv_from_json(j["cv"], "cv", diag);
  if (j.contains("config")) r.palette = palette_from_json(j["config"], diag);
  if (!diag.empty())
    throw Error(ErrorCode::InvalidRequest, "invalid render request: " + join(diag, "; "), diag);
  return r;
}

PreparedRender prepare_render(const KnowledgeBase& kb, const Dataset& ds, const RenderRequest& r) {
  const auto imp = r.implantation.value_or(ds.implantation);
  if (imp != ds.implantation)
    throw Error(ErrorCode::StyleDatasetMismatch,
                "request is for " + std::string(to_string(imp)) + " but dataset is " +
                    std::string(to_string(ds.implantation)));
  check_pairing(kb, r.pairing, imp);
  check_dimension(kb, r.pairing.thematic, imp, r.thematic, "thematic");
  check_dimension(kb, r.pairing.uncertainty, imp, r.uncertainty, "uncertainty");
  for (const auto* d : {&r.thematic, &r.uncertainty})
    if (!ds.has_attribute(d->name))
      throw Error(ErrorCode::MissingAttribute, "dataset has no attribute '" + d->name + "'", {d->name});
  PreparedRender out;
  out.thematic = bin_attribute(ds, r.thematic.name, r.thematic.binning);
  out.uncertainty = bin_attribute(ds, r.uncertainty.name, r.uncertainty.binning);
  out.style = build_style(r.pairing, imp, DimensionBins::from(out.thematic),
                          DimensionBins::from(out.uncertainty), r.palette);
  return out;
}

MapStyle legend_style(const KnowledgeBase& kb, Implantation imp, const RenderRequest& r) {
  check_pairing(kb, r.pairing, imp);
  check_dimension(kb, r.pairing.thematic, imp, r.thematic, "thematic");
  check_dimension(kb, r.pairing.uncertainty, imp, r.uncertainty, "uncertainty");
  return build_style(r.pairing, imp, bins_for_scheme(r.thematic.name, r.thematic.binning),
                     bins_for_scheme(r.uncertainty.name, r.uncertainty.binning), r.palette);
}

EnsembleBundle build_ensemble(const KnowledgeBase& kb, const Dataset& ds, const DesignRequest& request,
                              const PaletteConfig& palette) {
  EnsembleBundle out;
  out.primary = recommend(kb, request);
  if (out.primary.accepted().empty()) {
    std::vector<std::string> notes;
    for (const auto& c : out.primary.conflicts) notes.push_back(c.message);
    throw Error(ErrorCode::NoCandidates, "the request accepts no bivariate symbol", notes);
  }
  std::vector<EnsembleEntry> entries;
  nlohmann::ordered_json binned = nlohmann::ordered_json::array();
  for (const auto& scheme : schemes_of(request)) {
    auto report = recommend(kb, with_scheme(request, scheme));
    const auto t = bin_attribute(ds, request.thematic.name, scheme.thematic);
    const auto u = bin_attribute(ds, request.uncertainty.name, scheme.uncertainty);
    binned.push_back(binned_json(ds, scheme.name, t, u));
    for (const auto& p : report.accepted()) {
      EnsembleEntry e;
      e.file_name = svg_name(scheme.name, p);
      e.label = scheme.name + ": " + to_string(p);
      e.style = build_style(p, request.implantation, DimensionBins::from(t), DimensionBins::from(u),
                            palette);
      e.thematic = t;
      e.uncertainty = u;
      entries.push_back(std::move(e));
    }
    out.scheme_reports.emplace_back(scheme.name, std::move(report));
  }
  auto rendered = render_ensemble(ds, entries);
  for (auto& [name, svg] : rendered.documents) out.files.push_back({name, std::move(svg)});
  rendered.manifest["binned"] = binned;
  out.files.push_back({"manifest.json", dump(rendered.manifest)});
  return out;
}

const std::vector<CaseStudyPanel>& casestudy_panels() {
  using V = VisualVariable;
  static const std::vector<CaseStudyPanel> panels{
      {"a", "scheme1", {V::Size, V::Transparency}, false, "Pattern with variable size and transparency"},
      {"b", "scheme2", {V::Value, V::Size}, false, "Pattern with variable value and size"},
      {"c", "scheme2", {V::Value, V::Size}, true,
       "Pattern of variable size (black) overlayed on fill of variable value"},
      {"d", "scheme3", {V::Value, V::Blur}, false, "Fill with variable value and blur"},
      {"e", "scheme3", {V::Value, V::Size}, false, "Pattern with variable value and size"},
      {"f", "scheme3", {V::Size, V::Value}, false, "Pattern with variable size and value"},
  };
  return panels;
}

CaseStudyBundle run_casestudy(const KnowledgeBase& kb, const Dataset& raw, const DesignRequest& request,
                              const CaseStudyOptions& options) {
  CaseStudyBundle out;
  out.dataset = with_coefficient_of_variation(raw, options.mean_attribute, options.sd_attribute,
                                              options.cv_attribute);
  const auto& ds = out.dataset;
  out.report = recommend(kb, request);

  std::map<std::string, std::pair<BinnedAttribute, BinnedAttribute>> bins;
  nlohmann::ordered_json binned = nlohmann::ordered_json::array();
  for (const auto& scheme : schemes_of(request)) {
    auto t = bin_attribute(ds, request.thematic.name, scheme.thematic);
    auto u = bin_attribute(ds, request.uncertainty.name, scheme.uncertainty);
    binned.push_back(binned_json(ds, scheme.name, t, u));
    bins.emplace(scheme.name, std::make_pair(std::move(t), std::move(u)));
    out.scheme_reports.emplace_back(scheme.name, recommend(kb, with_scheme(request, scheme)));
  }

  std::vector<EnsembleEntry> entries;
  nlohmann::ordered_json panels = nlohmann::ordered_json::array();
  for (const auto& panel : casestudy_panels()) {
    auto it = bins.find(panel.scheme);
    if (it == bins.end())
      throw Error(ErrorCode::InvalidRequest,
                  "case-study request lacks binning scheme '" + panel.scheme + "'",
                  {"schemes: missing " + panel.scheme});
    const auto& [t, u] = it->second;
    auto palette = options.palette;
    palette.overlay_pattern = panel.overlay;
    EnsembleEntry e;
    e.file_name = panel.label + "-" + svg_name(panel.scheme, panel.pairing);
    e.label = panel.label;
    e.style = build_style(panel.pairing, request.implantation, DimensionBins::from(t),
                          DimensionBins::from(u), palette);
    e.thematic = t;
    e.uncertainty = u;
    entries.push_back(std::move(e));

    const auto& scheme_report = std::find_if(out.scheme_reports.begin(), out.scheme_reports.end(),
                                             [&](const auto& r) { return r.first == panel.scheme; })
                                    ->second;
    const auto accepted = scheme_report.accepted();
    nlohmann::ordered_json pj;
    pj["label"] = panel.label;
    pj["scheme"] = panel.scheme;
    pj["description"] = panel.description;
    pj["thematic"] = var(panel.pairing.thematic);
    pj["uncertainty"] = var(panel.pairing.uncertainty);
    pj["accepted_under_scheme"] =
        std::find(accepted.begin(), accepted.end(), panel.pairing) != accepted.end();
    panels.push_back(pj);
  }

  auto rendered = render_ensemble(ds, entries);
  out.files.push_back({"report.json", serialize_report(out.report)});
  for (const auto& [name, report] : out.scheme_reports)
    out.files.push_back({"report-" + name + ".json", serialize_report(report)});
  out.files.push_back({"dataset.geojson", dataset_to_geojson(ds)});
  nlohmann::ordered_json bj;
  bj["schema"] = "bivmap-binned/1";
  bj["schemes"] = binned;
  out.files.push_back({"binned.json", dump(bj)});
  for (auto& [name, svg] : rendered.documents) out.files.push_back({name, std::move(svg)});
  rendered.manifest["panels"] = panels;
  out.files.push_back({"manifest.json", dump(rendered.manifest)});
  return out;
}

std::string report_summary(const RecommendationReport& report, std::size_t top) {
  std::ostringstream os;
  auto names = [](const RequirementSet& s) {
    std::vector<std::string> v;
    for (auto r : s) v.push_back(std::string(to_string(r)));
    return "{" + join(v, ", ") + "}";
  };
  os << "requirements: thematic " << names(report.profile.thematic) << ", uncertainty "
     << names(report.profile.uncertainty) << ", pairing " << names(report.profile.pairing) << "\n";
  os << "dominance constraint: " << (report.dominance_applied ? "on" : "off") << "\n";
  const auto accepted = report.accepted();
  os << "accepted " << accepted.size() << " of " << report.candidates.size() << " candidates:\n";
  for (const auto& c : report.candidates) {
    if (c.verdict != Verdict::Accepted) continue;
    os << "  " << to_string(c.pairing) << "  " << (c.cls ? to_string(*c.cls) : "-") << "\n";
  }
  if (!report.ranked.empty()) {
    os << "top " << std::min(top, report.ranked.size()) << ":\n";
    for (std::size_t i = 0; i < report.ranked.size() && i < top; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", report.ranked[i].score);
      os << "  " << i + 1 << ". " << to_string(report.ranked[i].pairing) << "  score " << buf << "\n";
    }
  }
  for (const auto& c : report.conflicts) os << "conflict (" << c.dimension << "): " << c.message << "\n";
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  os << "knowledge base " << report.knowledge_base_version << " " << report.knowledge_base_checksum
     << "\n";
  return os.str();
}

}  // namespace bivmap
