#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bivmap/data_model.hpp"
#include "bivmap/knowledge_base.hpp"
#include "bivmap/recommender.hpp"
#include "bivmap/renderer.hpp"

// Workflows composed from the core modules, shared by the command line,
// the HTTP service and the Python bindings.
namespace bivmap {

// Derives a coefficient-of-variation attribute before binning.
struct CvDerivation {
  std::string mean;
  std::string sd;
  std::string name = "CV";
};

std::optional<CvDerivation> cv_from_json(const nlohmann::json& j, const std::string& field,
                                         std::vector<std::string>& diagnostics);
// Accepts "MEAN,SD" or "MEAN,SD,NAME".
CvDerivation parse_cv_spec(const std::string& spec);
Dataset apply_cv(Dataset ds, const std::optional<CvDerivation>& cv);

// One map or legend to draw.
struct RenderRequest {
  Pairing pairing{VisualVariable::Value, VisualVariable::Value};
  std::optional<Implantation> implantation;  // defaults to the dataset's
  DimensionRequest thematic;
  DimensionRequest uncertainty;
  std::optional<CvDerivation> cv;
  PaletteConfig palette;
};

// Throws Error{InvalidRequest} carrying field diagnostics.
RenderRequest render_request_from_json(const nlohmann::json& j);

struct PreparedRender {
  MapStyle style;
  BinnedAttribute thematic;
  BinnedAttribute uncertainty;
};

// Checks availability and selective lengths, bins both attributes and
// builds the style. Throws Error{NotAvailable} or Error{BinningViolation}
// (message carries "Violation(n > length)").
PreparedRender prepare_render(const KnowledgeBase& kb, const Dataset& ds, const RenderRequest& r);

// Legend without a dataset: bin counts come from the schemes; quantile and
// continuous axes carry generic labels.
MapStyle legend_style(const KnowledgeBase& kb, Implantation implantation, const RenderRequest& r);

struct OutputFile {
  std::string name;
  std::string content;
};

struct EnsembleBundle {
  RecommendationReport primary;
  std::vector<std::pair<std::string, RecommendationReport>> scheme_reports;
  std::vector<OutputFile> files;  // SVG documents, then manifest.json
};

// Renders every accepted pairing under each of the request's schemes
// (or its own binning when it lists none). File names follow
// `<scheme>-<thematic>-<uncertainty>.svg`. Throws Error{NoCandidates}
// when the request's own accepted set is empty.
EnsembleBundle build_ensemble(const KnowledgeBase& kb, const Dataset& ds, const DesignRequest& request,
                              const PaletteConfig& palette);

// A figure of the sediment case study: map label, binning scheme and pairing.
struct CaseStudyPanel {
  std::string label;
  std::string scheme;
  Pairing pairing;
  bool overlay = false;
  std::string description;
};

const std::vector<CaseStudyPanel>& casestudy_panels();

struct CaseStudyOptions {
  std::string mean_attribute = "TSS";
  std::string sd_attribute = "TSS_sd";
  std::string cv_attribute = "CV";
  PaletteConfig palette;
};

struct CaseStudyBundle {
  Dataset dataset;  // with the derived CV attribute
  RecommendationReport report;
  std::vector<std::pair<std::string, RecommendationReport>> scheme_reports;
  std::vector<OutputFile> files;
};

// Full case-study reproduction: CV derivation, the three binning schemes,
// the design request, and the six adopted styles.
CaseStudyBundle run_casestudy(const KnowledgeBase& kb, const Dataset& raw, const DesignRequest& request,
                              const CaseStudyOptions& options = {});

// Human summary used by the CLI: accepted pairings with their classes and
// the top of the ranking.
std::string report_summary(const RecommendationReport& report, std::size_t top = 3);

}  // namespace bivmap
