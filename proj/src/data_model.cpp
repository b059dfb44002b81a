#include "bivmap/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bivmap/error.hpp"

namespace bivmap {

namespace {

[[noreturn]] void geometry_error(const std::string& what) {
  throw Error(ErrorCode::GeometryParse, "geometry: " + what);
}

Point2 parse_position(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
    geometry_error("position must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Ring> parse_polygon(const nlohmann::json& rings) {
  if (!rings.is_array() || rings.empty()) geometry_error("polygon must have at least one ring");
  std::vector<Ring> out;
  for (const auto& r : rings) {
    if (!r.is_array() || r.size() < 4) geometry_error("linear ring needs at least 4 positions");
    Ring ring;
    for (const auto& p : r) ring.push_back(parse_position(p));
    if (!(ring.front() == ring.back())) geometry_error("linear ring is not closed");
    out.push_back(std::move(ring));
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

struct AttributeTable {
  std::vector<std::string> columns;
  std::unordered_map<std::string, std::map<std::string, double>> rows;
};

AttributeTable parse_attribute_table(std::string_view text, const std::string& join_key) {
  std::istringstream in{std::string(text)};
  std::string line;
  AttributeTable table;
  if (!std::getline(in, line)) throw Error(ErrorCode::GeometryParse, "attribute table is empty");
  for (auto& c : split_csv_line(line)) table.columns.push_back(trim(c));
  auto key_it = std::find(table.columns.begin(), table.columns.end(), join_key);
  if (key_it == table.columns.end())
    throw Error(ErrorCode::JoinKeyMissing, "join key '" + join_key + "' not in attribute table header");
  const auto key_col = static_cast<std::size_t>(key_it - table.columns.begin());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.columns.size())
      throw Error(ErrorCode::GeometryParse,
                  "attribute table line " + std::to_string(line_no) + ": wrong column count");
    std::map<std::string, double> row;
    const auto key = trim(cells[key_col]);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == key_col) continue;
      auto v = parse_number(trim(cells[c]));
      if (!v)
        throw Error(ErrorCode::MissingAttribute,
                    "attribute table line " + std::to_string(line_no) + ": column '" +
                        table.columns[c] + "' is not a number",
                    {key + ":" + table.columns[c]});
      row[table.columns[c]] = *v;
    }
    if (!table.rows.emplace(key, std::move(row)).second)
      throw Error(ErrorCode::DuplicateFeatureId, "attribute table has duplicate key " + key, {key});
  }
  return table;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> Dataset::attribute(const std::string& name) const {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    auto it = f.attributes.find(name);
    if (it == f.attributes.end())
      throw Error(ErrorCode::MissingAttribute, "feature " + f.id + " lacks attribute " + name,
                  {f.id});
    out.push_back(it->second);
  }
  return out;
}

bool Dataset::has_attribute(const std::string& name) const {
  return !features.empty() && features.front().attributes.contains(name);
}

Dataset load_dataset(std::string_view geometry_doc, std::optional<std::string_view> attribute_table,
                     const std::string& join_key) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(geometry_doc);
  } catch (const nlohmann::json::parse_error& e) {
    geometry_error(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    geometry_error("expected a FeatureCollection");
  if (!doc.contains("features") || !doc["features"].is_array())
    geometry_error("FeatureCollection.features must be an array");

  Dataset ds;
  std::optional<Implantation> kind;
  std::unordered_set<std::string> ids;
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    if (!f.is_object() || f.value("type", "") != "Feature")
      geometry_error("features[" + std::to_string(index) + "] is not a Feature");
    Feature feat;
    const auto& props = f.contains("properties") && f["properties"].is_object()
                            ? f["properties"]
                            : nlohmann::json::object();
    if (f.contains("id") && (f["id"].is_string() || f["id"].is_number())) {
      feat.id = f["id"].is_string() ? f["id"].get<std::string>() : f["id"].dump();
    } else if (props.contains(join_key) && (props[join_key].is_string() || props[join_key].is_number())) {
      feat.id = props[join_key].is_string() ? props[join_key].get<std::string>()
                                            : props[join_key].dump();
    } else {
      geometry_error("features[" + std::to_string(index) + "] has no id");
    }
    if (!ids.insert(feat.id).second)
      throw Error(ErrorCode::DuplicateFeatureId, "duplicate feature id " + feat.id, {feat.id});

    if (!f.contains("geometry") || !f["geometry"].is_object())
      geometry_error("feature " + feat.id + " has no geometry");
    const auto& g = f["geometry"];
    const auto type = g.value("type", "");
    if (!g.contains("coordinates")) geometry_error("feature " + feat.id + " geometry lacks coordinates");
    Implantation this_kind;
    if (type == "Polygon") {
      feat.geometry = PolygonGeometry{{parse_polygon(g["coordinates"])}};
      this_kind = Implantation::Area;
    } else if (type == "MultiPolygon") {
      PolygonGeometry pg;
      if (!g["coordinates"].is_array() || g["coordinates"].empty())
        geometry_error("feature " + feat.id + ": empty MultiPolygon");
      for (const auto& poly : g["coordinates"]) pg.polygons.push_back(parse_polygon(poly));
      feat.geometry = std::move(pg);
      this_kind = Implantation::Area;
    } else if (type == "Point") {
      feat.geometry = PointGeometry{parse_position(g["coordinates"])};
      this_kind = Implantation::Point;
    } else {
      geometry_error("feature " + feat.id + ": unsupported geometry type '" + type + "'");
    }
    if (kind && *kind != this_kind)
      throw Error(ErrorCode::MixedGeometryKinds,
                  "dataset mixes polygon and point geometries (feature " + feat.id + ")", {feat.id});
    kind = this_kind;

    for (const auto& [k, v] : props.items()) {
      if (k == join_key) continue;
      if (v.is_number()) feat.attributes[k] = v.get<double>();
    }
    ds.features.push_back(std::move(feat));
    ++index;
  }
  ds.implantation = kind.value_or(Implantation::Area);

  if (attribute_table) {
    const auto table = parse_attribute_table(*attribute_table, join_key);
    std::vector<std::string> missing;
    for (const auto& f : ds.features)
      if (!table.rows.contains(f.id)) missing.push_back(f.id);
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::JoinKeyMissing, "attribute table lacks keys: " + list, missing);
    }
    for (auto& f : ds.features)
      for (const auto& [k, v] : table.rows.at(f.id)) f.attributes[k] = v;
  }

  if (!ds.features.empty()) {
    std::set<std::string> names;
    for (const auto& [k, v] : ds.features.front().attributes) names.insert(k);
    for (const auto& f : ds.features) {
      std::set<std::string> these;
      for (const auto& [k, v] : f.attributes) these.insert(k);
      if (these != names) {
        std::vector<std::string> diff;
        std::set_symmetric_difference(names.begin(), names.end(), these.begin(), these.end(),
                                      std::back_inserter(diff));
        throw Error(ErrorCode::MissingAttribute,
                    "feature " + f.id + " has a different attribute set than " +
                        ds.features.front().id,
                    diff);
      }
    }
  }
  return ds;
}

std::string dataset_to_geojson(const Dataset& ds) {
  // Numbers are emitted by hand so the 17-digit form survives verbatim.
  auto pos = [](const Point2& p) { return "[" + format_g17(p.x) + "," + format_g17(p.y) + "]"; };
  auto ring_str = [&](const Ring& r) {
    std::string s = "[";
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + pos(r[i]);
    return s + "]";
  };
  auto poly_str = [&](const std::vector<Ring>& rings) {
    std::string s = "[";
    for (std::size_t i = 0; i < rings.size(); ++i) s += (i ? "," : "") + ring_str(rings[i]);
    return s + "]";
  };
  std::string out = "{\"type\":\"FeatureCollection\",\"features\":[";
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    const auto& f = ds.features[i];
    out += i ? ",\n" : "\n";
    out += "{\"type\":\"Feature\",\"id\":" + nlohmann::json(f.id).dump() + ",\"properties\":{";
    bool first = true;
    for (const auto& [k, v] : f.attributes) {
      out += (first ? "" : ",") + nlohmann::json(k).dump() + ":" + format_g17(v);
      first = false;
    }
    out += "},\"geometry\":";
    if (const auto* pg = std::get_if<PolygonGeometry>(&f.geometry)) {
      if (pg->polygons.size() == 1) {
        out += "{\"type\":\"Polygon\",\"coordinates\":" + poly_str(pg->polygons[0]) + "}";
      } else {
        out += "{\"type\":\"MultiPolygon\",\"coordinates\":[";
        for (std::size_t p = 0; p < pg->polygons.size(); ++p)
          out += (p ? "," : "") + poly_str(pg->polygons[p]);
        out += "]}";
      }
    } else {
      out += "{\"type\":\"Point\",\"coordinates\":" + pos(std::get<PointGeometry>(f.geometry).position) +
             "}";
    }
    out += "}";
  }
  out += "\n]}\n";
  return out;
}

double coefficient_of_variation(double mean, double sd) {
  if (mean == 0.0) throw Error(ErrorCode::ZeroMean, "coefficient of variation: mean is zero");
  if (sd < 0.0)
    throw Error(ErrorCode::NegativeDeviation, "coefficient of variation: negative standard deviation");
  return sd / mean;
}

Dataset with_coefficient_of_variation(Dataset ds, const std::string& mean_attr,
                                      const std::string& sd_attr, const std::string& out_name) {
  for (auto& f : ds.features) {
    auto m = f.attributes.find(mean_attr);
    auto s = f.attributes.find(sd_attr);
    if (m == f.attributes.end() || s == f.attributes.end())
      throw Error(ErrorCode::MissingAttribute,
                  "feature " + f.id + " lacks " + mean_attr + " or " + sd_attr, {f.id});
    try {
      f.attributes[out_name] = coefficient_of_variation(m->second, s->second);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (feature " + f.id + ")", {f.id});
    }
  }
  return ds;
}

BinningScheme BinningScheme::threshold(std::vector<double> edges) {
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i]))
      throw Error(ErrorCode::NonMonotonicEdges, "threshold edges must be strictly increasing");
  BinningScheme s;
  s.kind = Kind::Threshold;
  s.edges = std::move(edges);
  return s;
}

BinningScheme BinningScheme::quantile(int k) {
  if (k < 2) throw Error(ErrorCode::BadK, "quantile binning needs k >= 2, got " + std::to_string(k));
  BinningScheme s;
  s.kind = Kind::Quantile;
  s.k = k;
  return s;
}

BinningScheme BinningScheme::continuous() { return {}; }

std::optional<int> BinningScheme::n_bins() const {
  switch (kind) {
    case Kind::Threshold: return static_cast<int>(edges.size()) + 1;
    case Kind::Quantile: return k;
    case Kind::Continuous: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view to_string(BinningScheme::Kind k) {
  switch (k) {
    case BinningScheme::Kind::Threshold: return "Threshold";
    case BinningScheme::Kind::Quantile: return "Quantile";
    case BinningScheme::Kind::Continuous: return "Continuous";
  }
  return "?";
}

std::string BinningScheme::describe() const {
  switch (kind) {
    case Kind::Threshold: {
      std::string s = "Threshold(";
      for (std::size_t i = 0; i < edges.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", edges[i]);
        s += (i ? "," : "") + std::string(buf);
      }
      return s + ")";
    }
    case Kind::Quantile: return "Quantile(" + std::to_string(k) + ")";
    case Kind::Continuous: return "Continuous";
  }
  return "?";
}

std::vector<int> bin_threshold(std::span<const double> values, std::span<const double> edges) {
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i]))
      throw Error(ErrorCode::NonMonotonicEdges, "threshold edges must be strictly increasing");
  std::vector<int> out;
  out.reserve(values.size());
  for (double x : values)
    out.push_back(static_cast<int>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()));
  return out;
}

std::vector<double> quantile_cuts(std::span<const double> values, int k) {
  if (k < 2) throw Error(ErrorCode::BadK, "quantile binning needs k >= 2, got " + std::to_string(k));
  if (values.empty()) throw Error(ErrorCode::EmptyValues, "quantile binning needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<long long>(sorted.size());
  std::vector<double> cuts;
  for (long long j = 1; j < k; ++j) {
    const long long rank = (j * n + k - 1) / k;  // ceil(j*n/k), 1-based
    cuts.push_back(sorted[static_cast<std::size_t>(std::max(rank, 1LL) - 1)]);
  }
  return cuts;
}

std::vector<int> bin_quantile(std::span<const double> values, int k) {
  const auto cuts = quantile_cuts(values, k);
  std::vector<int> out;
  out.reserve(values.size());
  for (double x : values)
    out.push_back(static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), x) - cuts.begin()));
  return out;
}

std::vector<double> normalize_continuous(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out;
  out.reserve(values.size());
  for (double x : values) out.push_back(range > 0 ? (x - min) / range : 0.0);
  return out;
}

BinnedAttribute bin_attribute(const std::string& name, std::span<const double> values,
                              const BinningScheme& scheme) {
  BinnedAttribute b;
  b.name = name;
  b.scheme = scheme;
  if (!values.empty()) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    b.min = *lo;
    b.max = *hi;
  }
  switch (scheme.kind) {
    case BinningScheme::Kind::Threshold:
      b.bins = bin_threshold(values, scheme.edges);
      b.cuts = scheme.edges;
      b.n_bins = scheme.n_bins();
      break;
    case BinningScheme::Kind::Quantile:
      b.bins = bin_quantile(values, scheme.k);
      b.cuts = quantile_cuts(values, scheme.k);
      b.n_bins = scheme.k;
      break;
    case BinningScheme::Kind::Continuous:
      b.normalized = normalize_continuous(values);
      break;
  }
  return b;
}

BinnedAttribute bin_attribute(const Dataset& ds, const std::string& name,
                              const BinningScheme& scheme) {
  const auto values = ds.attribute(name);
  return bin_attribute(name, values, scheme);
}

std::string BinningCheck::message() const {
  if (ok) return "Ok";
  return "Violation(" + std::to_string(n_bins.value_or(0)) + " > " +
         std::to_string(length.value_or(0)) + ")";
}

BinningCheck validate_binning(const KnowledgeBase& kb, VisualVariable variable, Implantation i,
                              const BinningScheme& scheme) {
  BinningCheck check;
  const auto sl = kb.selective_length(variable, i);
  check.length = sl.length;
  if (!scheme.discrete()) return check;
  if (!sl.available())
    throw Error(ErrorCode::UnavailableVariable,
                std::string(to_string(variable)) + " has no selective length at " +
                    std::string(to_string(i)));
  check.n_bins = scheme.n_bins();
  check.ok = *check.n_bins <= *sl.length;
  return check;
}

nlohmann::ordered_json to_json(const BinningScheme& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == BinningScheme::Kind::Threshold) j["edges"] = s.edges;
  if (s.kind == BinningScheme::Kind::Quantile) j["k"] = s.k;
  return j;
}

BinningScheme binning_from_json(const nlohmann::json& j, const std::string& field,
                                std::vector<std::string>& diagnostics) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    diagnostics.push_back(field + ".kind: required (Threshold | Quantile | Continuous)");
    return {};
  }
  const auto kind = j["kind"].get<std::string>();
  try {
    if (kind == "Threshold") {
      if (!j.contains("edges") || !j["edges"].is_array()) {
        diagnostics.push_back(field + ".edges: required array of numbers");
        return {};
      }
      std::vector<double> edges;
      for (const auto& e : j["edges"]) {
        if (!e.is_number()) {
          diagnostics.push_back(field + ".edges: must contain only numbers");
          return {};
        }
        edges.push_back(e.get<double>());
      }
      return BinningScheme::threshold(std::move(edges));
    }
    if (kind == "Quantile") {
      if (!j.contains("k") || !j["k"].is_number_integer()) {
        diagnostics.push_back(field + ".k: required integer");
        return {};
      }
      return BinningScheme::quantile(j["k"].get<int>());
    }
    if (kind == "Continuous") return BinningScheme::continuous();
  } catch (const Error& e) {
    diagnostics.push_back(field + ": " + e.what());
    return {};
  }
  diagnostics.push_back(field + ".kind: unknown value '" + kind + "'");
  return {};
}

nlohmann::ordered_json to_json(const BinnedAttribute& b, const Dataset& ds) {
  nlohmann::ordered_json j;
  j["name"] = b.name;
  j["scheme"] = to_json(b.scheme);
  j["n_bins"] = b.n_bins ? nlohmann::ordered_json(*b.n_bins) : nlohmann::ordered_json(nullptr);
  j["cuts"] = b.cuts;
  j["min"] = b.min;
  j["max"] = b.max;
  auto feats = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < b.size() && i < ds.features.size(); ++i) {
    nlohmann::ordered_json f;
    f["id"] = ds.features[i].id;
    if (b.continuous())
      f["normalized"] = b.normalized[i];
    else
      f["bin"] = b.bins[i];
    feats.push_back(f);
  }
  j["features"] = feats;
  return j;
}

}  // namespace bivmap
