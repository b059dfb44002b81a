#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bivmap/knowledge_base.hpp"

namespace bivmap {

struct Point2 {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

using Ring = std::vector<Point2>;

// A polygon is an outer ring followed by holes; multipolygons flatten into
// several polygons of one feature.
struct PolygonGeometry {
  std::vector<std::vector<Ring>> polygons;
};

struct PointGeometry {
  Point2 position;
};

using Geometry = std::variant<PolygonGeometry, PointGeometry>;

struct Feature {
  std::string id;
  Geometry geometry;
  std::map<std::string, double> attributes;
};

struct Dataset {
  std::vector<Feature> features;
  Implantation implantation = Implantation::Area;

  std::vector<double> attribute(const std::string& name) const;
  bool has_attribute(const std::string& name) const;
};

// Parses a GeoJSON FeatureCollection. Feature ids come from the feature's
// "id" member or, failing that, from the `id_property` property. When an
// attribute table (CSV with header row) is supplied it is joined on
// `join_key`; the table's other columns become numeric attributes.
Dataset load_dataset(std::string_view geometry_doc,
                     std::optional<std::string_view> attribute_table = std::nullopt,
                     const std::string& join_key = "id");

// Lossless GeoJSON serialization (17 significant digits).
std::string dataset_to_geojson(const Dataset& ds);

double coefficient_of_variation(double mean, double sd);

// Adds `out_name` = sd / mean per feature.
Dataset with_coefficient_of_variation(Dataset ds, const std::string& mean_attr,
                                      const std::string& sd_attr, const std::string& out_name);

struct BinningScheme {
  enum class Kind { Threshold, Quantile, Continuous };
  Kind kind = Kind::Continuous;
  std::vector<double> edges;  // Threshold only
  int k = 0;                  // Quantile only

  static BinningScheme threshold(std::vector<double> edges);
  static BinningScheme quantile(int k);
  static BinningScheme continuous();

  bool discrete() const { return kind != Kind::Continuous; }
  // Bin count for discrete schemes; nullopt for Continuous.
  std::optional<int> n_bins() const;
  std::string describe() const;

  friend bool operator==(const BinningScheme&, const BinningScheme&) = default;
};

std::string_view to_string(BinningScheme::Kind k);

struct BinnedAttribute {
  std::string name;
  BinningScheme scheme;
  std::vector<int> bins;           // discrete schemes
  std::vector<double> normalized;  // Continuous
  std::optional<int> n_bins;
  // Threshold edges or quantile cut values; empty for Continuous.
  std::vector<double> cuts;
  double min = 0;
  double max = 0;

  bool continuous() const { return !n_bins.has_value(); }
  std::size_t size() const { return continuous() ? normalized.size() : bins.size(); }
};

// Edge values fall into the upper bin.
std::vector<int> bin_threshold(std::span<const double> values, std::span<const double> edges);

// Rank cuts at ceil(j*n/k) (1-based) of the sorted values; values equal to a
// cut fall into the lower bin.
std::vector<int> bin_quantile(std::span<const double> values, int k);
std::vector<double> quantile_cuts(std::span<const double> values, int k);

// Min-max normalization; all-equal input maps to 0.
std::vector<double> normalize_continuous(std::span<const double> values);

BinnedAttribute bin_attribute(const std::string& name, std::span<const double> values,
                              const BinningScheme& scheme);
BinnedAttribute bin_attribute(const Dataset& ds, const std::string& name,
                              const BinningScheme& scheme);

struct BinningCheck {
  bool ok = true;
  std::optional<int> n_bins;
  std::optional<int> length;
  std::string message() const;
};

// Throws Error{UnavailableVariable} when the variable has no selective
// length at `i` and the scheme is discrete.
BinningCheck validate_binning(const KnowledgeBase& kb, VisualVariable variable, Implantation i,
                              const BinningScheme& scheme);

nlohmann::ordered_json to_json(const BinningScheme& s);
BinningScheme binning_from_json(const nlohmann::json& j, const std::string& field,
                                std::vector<std::string>& diagnostics);
nlohmann::ordered_json to_json(const BinnedAttribute& b, const Dataset& ds);

}  // namespace bivmap
