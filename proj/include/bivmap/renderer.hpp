#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bivmap/data_model.hpp"
#include "bivmap/knowledge_base.hpp"

namespace bivmap {

enum class RenderMode { PatternOnFill, PatternOnly, FillOnly, Crosshatch, BivariateChoropleth };
enum class PatternGlyph { Dot, Hatch45, Cross };

std::string_view to_string(RenderMode m);
std::string_view to_string(PatternGlyph g);

struct Canvas {
  double width = 600;
  double height = 600;
  double margin = 20;
};

// Concrete ladder endpoints per visual variable: the value drawn for the
// lowest bin and for the highest bin.
struct LadderEndpoints {
  double low;
  double high;
};

struct PaletteConfig {
  double hue = 8.0;             // warm red
  double secondary_hue = 210.0;  // second ramp of the bivariate choropleth
  double base_saturation = 0.8;
  double glyph_lightness = 0.4;  // pattern glyph colour when lightness is not encoded
  double glyph_radius = 3.5;     // dot radius when size is not encoded
  double point_radius = 5.0;     // point marker radius when size is not encoded
  double lattice = 14.0;         // pattern tile anchored to the canvas
  bool white_glyphs = false;     // overlay glyph colour over fills
  bool overlay_pattern = false;  // Value+Size as pattern over a value fill
  Canvas canvas;
  std::map<VisualVariable, LadderEndpoints> endpoints = default_endpoints();

  static std::map<VisualVariable, LadderEndpoints> default_endpoints();
};

// Reads palette.* and canvas.* keys, leaving unspecified fields at defaults.
PaletteConfig palette_from_json(const nlohmann::json& j, std::vector<std::string>& diagnostics);
nlohmann::ordered_json to_json(const PaletteConfig& p);

// Discrete levels, or a continuous [low, high] range when `levels` is empty.
struct Ladder {
  VisualVariable variable;
  std::vector<double> levels;
  std::optional<LadderEndpoints> continuous_range;

  bool continuous() const { return continuous_range.has_value(); }
  std::size_t size() const { return levels.size(); }
  double at_normalized(double t) const;
};

// Bin layout of one dimension as the style sees it.
struct DimensionBins {
  std::string name;
  std::optional<int> n_bins;  // nullopt: continuous
  std::vector<std::string> labels;  // one per bin, or {min, max} for continuous

  static DimensionBins from(const BinnedAttribute& b);
  static DimensionBins discrete(std::string name, int n);
  static DimensionBins continuous(std::string name);
};

struct MapStyle {
  Pairing pairing;
  Implantation implantation = Implantation::Area;
  RenderMode mode = RenderMode::PatternOnly;
  Ladder thematic_ladder;
  Ladder uncertainty_ladder;
  double base_hue = 8.0;
  std::optional<double> secondary_hue;  // bivariate choropleth only
  PatternGlyph pattern_glyph = PatternGlyph::Dot;
  Canvas canvas;
  PaletteConfig palette;
  DimensionBins thematic;
  DimensionBins uncertainty;
};

MapStyle build_style(const Pairing& pairing, Implantation implantation,
                     const DimensionBins& thematic_bins, const DimensionBins& uncertainty_bins,
                     const PaletteConfig& palette = {});

// Full map document: defs, one group per feature in dataset order, legend.
std::string render_map(const Dataset& dataset, const BinnedAttribute& thematic,
                       const BinnedAttribute& uncertainty, const MapStyle& style);

// Standalone legend document.
std::string render_legend(const MapStyle& style);

struct EnsembleEntry {
  std::string file_name;
  std::string label;
  MapStyle style;
  BinnedAttribute thematic;
  BinnedAttribute uncertainty;
};

struct EnsembleOutput {
  std::vector<std::pair<std::string, std::string>> documents;  // (file name, svg)
  nlohmann::ordered_json manifest;
};

// Every entry is drawn on the first entry's canvas and geographic frame.
EnsembleOutput render_ensemble(const Dataset& dataset, std::span<const EnsembleEntry> entries);

nlohmann::ordered_json style_summary(const MapStyle& style);

// Colour helpers shared with tests.
struct Rgb {
  int r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};
Rgb hsl_to_rgb(double hue, double saturation, double lightness);
std::string to_hex(const Rgb& c);
double hex_lightness(std::string_view hex);

}  // namespace bivmap
