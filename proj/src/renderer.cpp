#include "bivmap/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "bivmap/error.hpp"

namespace bivmap {

namespace {

constexpr double kLegendPanelWidth = 280.0;
constexpr double kSwatch = 28.0;
constexpr double kSwatchGap = 4.0;
constexpr double kLegendLabelWidth = 86.0;
constexpr double kGradientLength = 140.0;
constexpr double kGradientThickness = 12.0;

std::string num(double v) {
  if (std::abs(v) < 5e-7) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Rgb multiply(const Rgb& a, const Rgb& b) {
  auto ch = [](int x, int y) { return static_cast<int>(std::lround(x * y / 255.0)); };
  return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_endpoints(VisualVariable v, const LadderEndpoints& e, const PaletteConfig& palette,
                     Implantation imp) {
  const auto name = std::string(to_string(v));
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::LadderEndpointInvalid,
                name + " ladder endpoints (" + num(e.low) + ", " + num(e.high) + "): " + why);
  };
  if (!std::isfinite(e.low) || !std::isfinite(e.high)) fail("must be finite");
  if (e.low == e.high) fail("must differ so the ladder is strictly monotone");
  switch (v) {
    case VisualVariable::Value:
    case VisualVariable::Saturation:
    case VisualVariable::Transparency:
      if (!in_unit(e.low) || !in_unit(e.high)) fail("must lie in [0, 1]");
      break;
    case VisualVariable::Blur:
      if (e.low < 0 || e.high < 0) fail("blur radii must be >= 0");
      break;
    case VisualVariable::Size:
      if (e.low <= 0 || e.high <= 0) fail("radii must be > 0");
      if (imp == Implantation::Area && 2 * std::max(e.low, e.high) > palette.lattice)
        fail("glyph diameter exceeds the pattern lattice");
      break;
    case VisualVariable::Density:
    case VisualVariable::Texture:
      if (e.low <= 0 || e.high <= 0) fail("spacings must be > 0");
      break;
  }
}

Ladder make_ladder(VisualVariable v, const DimensionBins& bins, const LadderEndpoints& e) {
  Ladder l;
  l.variable = v;
  if (!bins.n_bins) {
    l.continuous_range = e;
    return l;
  }
  const int n = *bins.n_bins;
  if (n < 1)
    throw Error(ErrorCode::StyleDatasetMismatch, bins.name + ": a discrete ladder needs >= 1 bin");
  for (int k = 0; k < n; ++k)
    l.levels.push_back(n == 1 ? e.low : e.low + (e.high - e.low) * k / (n - 1));
  return l;
}

// Level of one dimension: a bin index or a continuous position in permille.
struct LevelRef {
  bool continuous = false;
  int index = 0;

  std::string tag() const { return continuous ? "c" + std::to_string(index) : std::to_string(index); }
  friend auto operator<=>(const LevelRef&, const LevelRef&) = default;
};

double quantity(const Ladder& l, const LevelRef& ref) {
  return ref.continuous ? l.at_normalized(ref.index / 1000.0) : l.levels.at(ref.index);
}

std::string level_id(const LevelRef& t, const LevelRef& u) {
  return "lvl-t" + t.tag() + "-u" + u.tag();
}

enum class GlyphShape { None, Dot, Rect, Hatch, Cross };

// Concrete appearance of one (thematic, uncertainty) level pair.
struct Symbol {
  std::optional<Rgb> fill;
  double fill_opacity = 1.0;
  GlyphShape glyph = GlyphShape::None;
  double radius = 0;
  double rect_w = 0, rect_h = 0;
  double tile_w = 0, tile_h = 0;
  bool rotate = false;
  Rgb glyph_color{0, 0, 0};
  double glyph_opacity = 1.0;
  double blur = 0;
  bool blur_shape = false;  // blur the whole feature rather than the glyphs
};

Symbol area_symbol(const MapStyle& s, double tq, double uq) {
  const auto& p = s.palette;
  const auto T = s.pairing.thematic;
  const auto U = s.pairing.uncertainty;
  Symbol sym;
  sym.tile_w = sym.tile_h = p.lattice;
  switch (s.mode) {
    case RenderMode::BivariateChoropleth:
      sym.fill = multiply(hsl_to_rgb(s.base_hue, p.base_saturation, tq),
                          hsl_to_rgb(s.secondary_hue.value_or(p.secondary_hue), p.base_saturation, uq));
      return sym;
    case RenderMode::FillOnly: {
      double sat = p.base_saturation;
      if (U == VisualVariable::Saturation) sat = uq;
      if (U == VisualVariable::Transparency) sym.fill_opacity = uq;
      if (U == VisualVariable::Blur) {
        sym.blur = uq;
        sym.blur_shape = true;
      }
      sym.fill = hsl_to_rgb(s.base_hue, sat, tq);
      return sym;
    }
    case RenderMode::Crosshatch:
      sym.glyph = GlyphShape::Cross;
      sym.tile_h = tq;
      sym.tile_w = uq;
      sym.rotate = true;
      sym.glyph_color = hsl_to_rgb(s.base_hue, p.base_saturation, p.glyph_lightness);
      return sym;
    case RenderMode::PatternOnFill:
    case RenderMode::PatternOnly:
      break;
  }

  double glyph_l = p.glyph_lightness;
  double glyph_s = p.base_saturation;
  bool black = false;
  sym.glyph = GlyphShape::Dot;
  sym.radius = p.glyph_radius;

  auto apply_structure = [&](VisualVariable v, double q) {
    switch (v) {
      case VisualVariable::Size:
        if (sym.glyph == GlyphShape::Dot && T == VisualVariable::Size && v == U &&
            s.mode == RenderMode::PatternOnly) {
          sym.glyph = GlyphShape::Rect;
          sym.rect_w = 2 * sym.radius;
          sym.rect_h = 2 * q;
        } else {
          sym.radius = q;
        }
        break;
      case VisualVariable::Texture:
        sym.tile_w = sym.tile_h = q;
        sym.radius = 0.28 * q;
        break;
      case VisualVariable::Density:
        sym.glyph = GlyphShape::Hatch;
        sym.tile_w = p.lattice;
        sym.tile_h = q;
        sym.rotate = true;
        break;
      default: break;
    }
  };

  if (s.mode == RenderMode::PatternOnFill) {
    sym.fill = hsl_to_rgb(s.base_hue, p.base_saturation, tq);
    black = true;
    apply_structure(U, uq);
  } else {
    if (T == VisualVariable::Value) glyph_l = tq;
    apply_structure(T, tq);
    switch (U) {
      case VisualVariable::Saturation: glyph_s = uq; break;
      case VisualVariable::Transparency: sym.glyph_opacity = uq; break;
      case VisualVariable::Blur: sym.blur = uq; break;
      case VisualVariable::Value: glyph_l = uq; break;
      default: apply_structure(U, uq); break;
    }
  }
  sym.glyph_color = black ? (p.white_glyphs ? Rgb{255, 255, 255} : Rgb{0, 0, 0})
                          : hsl_to_rgb(s.base_hue, glyph_s, glyph_l);
  return sym;
}

// Point marker: a circle whose fill, radius, opacity and blur carry the levels.
Symbol point_symbol(const MapStyle& s, double tq, double uq) {
  const auto& p = s.palette;
  const auto T = s.pairing.thematic;
  const auto U = s.pairing.uncertainty;
  Symbol sym;
  sym.glyph = GlyphShape::Dot;
  sym.radius = p.point_radius;
  double l = p.glyph_lightness, sat = p.base_saturation;
  if (T == VisualVariable::Value) l = tq;
  if (T == VisualVariable::Size) sym.radius = tq;
  switch (U) {
    case VisualVariable::Saturation: sat = uq; break;
    case VisualVariable::Transparency: sym.glyph_opacity = uq; break;
    case VisualVariable::Blur: sym.blur = uq; break;
    case VisualVariable::Size: sym.radius = uq; break;
    case VisualVariable::Value: l = uq; break;
    default: break;
  }
  if (s.mode == RenderMode::BivariateChoropleth)
    sym.glyph_color = multiply(hsl_to_rgb(s.base_hue, p.base_saturation, tq),
                               hsl_to_rgb(s.secondary_hue.value_or(p.secondary_hue), p.base_saturation, uq));
  else
    sym.glyph_color = hsl_to_rgb(s.base_hue, sat, l);
  return sym;
}

Symbol symbol_for(const MapStyle& s, const LevelRef& t, const LevelRef& u) {
  const double tq = quantity(s.thematic_ladder, t);
  const double uq = quantity(s.uncertainty_ladder, u);
  return s.implantation == Implantation::Point ? point_symbol(s, tq, uq) : area_symbol(s, tq, uq);
}

std::string opacity_attr(const char* name, double o) {
  return o < 1.0 ? " " + std::string(name) + "=\"" + num(o) + "\"" : "";
}

std::string blur_filter(const std::string& id, double sd) {
  return "<filter id=\"" + id + "\" x=\"-50%\" y=\"-50%\" width=\"200%\" height=\"200%\">" +
         "<feGaussianBlur stdDeviation=\"" + num(sd) + "\"/></filter>";
}

std::string glyph_markup(const Symbol& sym, const std::string& blur_ref, double cx, double cy) {
  const auto color = to_hex(sym.glyph_color);
  const auto filter = blur_ref.empty() ? "" : " filter=\"url(#" + blur_ref + ")\"";
  const auto op = opacity_attr("opacity", sym.glyph_opacity);
  switch (sym.glyph) {
    case GlyphShape::Dot:
      return "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(sym.radius) +
             "\" fill=\"" + color + "\"" + op + filter + "/>";
    case GlyphShape::Rect:
      return "<rect x=\"" + num(cx - sym.rect_w / 2) + "\" y=\"" + num(cy - sym.rect_h / 2) +
             "\" width=\"" + num(sym.rect_w) + "\" height=\"" + num(sym.rect_h) + "\" fill=\"" +
             color + "\"" + op + filter + "/>";
    case GlyphShape::Hatch:
      return "<line x1=\"0\" y1=\"" + num(sym.tile_h / 2) + "\" x2=\"" + num(sym.tile_w) +
             "\" y2=\"" + num(sym.tile_h / 2) + "\" stroke=\"" + color + "\" stroke-width=\"1\"" +
             op + filter + "/>";
    case GlyphShape::Cross:
      return "<g class=\"crosshatch\" data-thematic-spacing=\"" + num(sym.tile_h) +
             "\" data-uncertainty-spacing=\"" + num(sym.tile_w) + "\" stroke=\"" + color +
             "\" stroke-width=\"0.8\"" + op + filter + ">" + "<line x1=\"0\" y1=\"0\" x2=\"" +
             num(sym.tile_w) + "\" y2=\"0\"/>" + "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"" +
             num(sym.tile_h) + "\"/></g>";
    case GlyphShape::None: return "";
  }
  return "";
}

// Definition for one level pair plus the paint attributes a shape uses to
// reference it.
struct LevelDef {
  std::string defs;
  std::string paint;  // attributes for a polygon path or swatch rect
};

LevelDef area_level_def(const std::string& id, const Symbol& sym) {
  LevelDef d;
  if (sym.blur_shape) {
    d.defs = blur_filter(id, sym.blur);
    d.paint = " fill=\"" + to_hex(*sym.fill) + "\"" + opacity_attr("fill-opacity", sym.fill_opacity) +
              " filter=\"url(#" + id + ")\"";
    return d;
  }
  std::string body;
  if (sym.fill)
    body += "<rect width=\"" + num(sym.tile_w) + "\" height=\"" + num(sym.tile_h) + "\" fill=\"" +
            to_hex(*sym.fill) + "\"" + opacity_attr("fill-opacity", sym.fill_opacity) + "/>";
  std::string blur_ref;
  if (sym.glyph != GlyphShape::None && sym.blur > 0) {
    blur_ref = id + "-blur";
    body += blur_filter(blur_ref, sym.blur);
  }
  body += glyph_markup(sym, blur_ref, sym.tile_w / 2, sym.tile_h / 2);
  d.defs = "<pattern id=\"" + id + "\" patternUnits=\"userSpaceOnUse\" x=\"0\" y=\"0\" width=\"" +
           num(sym.tile_w) + "\" height=\"" + num(sym.tile_h) + "\"" +
           (sym.rotate ? " patternTransform=\"rotate(45)\"" : "") + ">" + body + "</pattern>";
  d.paint = " fill=\"url(#" + id + ")\"";
  return d;
}

LevelDef point_level_def(const std::string& id, const Symbol& sym) {
  LevelDef d;
  std::string body;
  std::string blur_ref;
  if (sym.blur > 0) {
    blur_ref = id + "-blur";
    body += blur_filter(blur_ref, sym.blur);
  }
  body += glyph_markup(sym, blur_ref, 0, 0);
  d.defs = "<g id=\"" + id + "\">" + body + "</g>";
  d.paint = " href=\"#" + id + "\"";
  return d;
}

LevelDef level_def(const MapStyle& s, const LevelRef& t, const LevelRef& u) {
  const auto sym = symbol_for(s, t, u);
  const auto id = level_id(t, u);
  return s.implantation == Implantation::Point ? point_level_def(id, sym) : area_level_def(id, sym);
}

struct Transform {
  double scale = 1, ox = 0, oy = 0, minx = 0, maxy = 0;
  Point2 apply(const Point2& p) const { return {ox + (p.x - minx) * scale, oy + (maxy - p.y) * scale}; }
};

Transform fit(const Dataset& ds, const Canvas& c) {
  double minx = std::numeric_limits<double>::infinity(), miny = minx;
  double maxx = -minx, maxy = -minx;
  auto add = [&](const Point2& p) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
    maxx = std::max(maxx, p.x);
    maxy = std::max(maxy, p.y);
  };
  for (const auto& f : ds.features) {
    if (const auto* pg = std::get_if<PolygonGeometry>(&f.geometry)) {
      for (const auto& poly : pg->polygons)
        for (const auto& ring : poly)
          for (const auto& p : ring) add(p);
    } else {
      add(std::get<PointGeometry>(f.geometry).position);
    }
  }
  Transform t;
  if (ds.features.empty()) return t;
  const double w = c.width - 2 * c.margin, h = c.height - 2 * c.margin;
  const double bw = maxx - minx, bh = maxy - miny;
  if (bw > 0 && bh > 0)
    t.scale = std::min(w / bw, h / bh);
  else if (bw > 0)
    t.scale = w / bw;
  else if (bh > 0)
    t.scale = h / bh;
  t.minx = minx;
  t.maxy = maxy;
  t.ox = c.margin + (w - bw * t.scale) / 2;
  t.oy = c.margin + (h - bh * t.scale) / 2;
  return t;
}

std::string path_data(const PolygonGeometry& g, const Transform& tf) {
  std::string d;
  for (const auto& poly : g.polygons) {
    for (const auto& ring : poly) {
      // The closing position repeats the first; "Z" closes the subpath.
      for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const auto p = tf.apply(ring[i]);
        d += (i == 0 ? (d.empty() ? "M" : " M") : " L") + num(p.x) + " " + num(p.y);
      }
      d += " Z";
    }
  }
  return d;
}

LevelRef level_of(const BinnedAttribute& b, std::size_t i) {
  if (b.continuous())
    return {true, static_cast<int>(std::lround(std::clamp(b.normalized[i], 0.0, 1.0) * 1000))};
  return {false, b.bins[i]};
}

// Swatch positions shown in the legend: every discrete bin, or the
// midpoint of a continuous dimension.
std::vector<LevelRef> legend_levels(const Ladder& l) {
  if (l.continuous()) return {LevelRef{true, 500}};
  std::vector<LevelRef> out;
  for (std::size_t i = 0; i < l.size(); ++i) out.push_back({false, static_cast<int>(i)});
  return out;
}

std::string gradient_def(const MapStyle& s, const std::string& id, const Ladder& l) {
  const auto& p = s.palette;
  const auto range = *l.continuous_range;
  std::string out = "<linearGradient id=\"" + id + "\" x1=\"0\" y1=\"0\" x2=\"1\" y2=\"0\">";
  for (int k = 0; k <= 4; ++k) {
    const double t = k / 4.0;
    const double q = l.at_normalized(t);
    Rgb c;
    double op = 1.0;
    switch (l.variable) {
      case VisualVariable::Value: c = hsl_to_rgb(s.base_hue, p.base_saturation, q); break;
      case VisualVariable::Saturation: c = hsl_to_rgb(s.base_hue, q, 0.5); break;
      case VisualVariable::Transparency:
        c = hsl_to_rgb(s.base_hue, p.base_saturation, p.glyph_lightness);
        op = q;
        break;
      default: {
        // Non-colour cues are shown as a grey magnitude ramp.
        const double mag = (q - range.low) / (range.high - range.low);
        c = hsl_to_rgb(0, 0, 0.9 - 0.6 * mag);
        break;
      }
    }
    out += "<stop offset=\"" + num(t) + "\" stop-color=\"" + to_hex(c) + "\"" +
           (op < 1.0 ? " stop-opacity=\"" + num(op) + "\"" : "") + "/>";
  }
  return out + "</linearGradient>";
}

struct LegendParts {
  std::string defs;
  std::string group;
  double width = 0;
  double height = 0;
  int swatches = 0;
};

void collect_legend_levels(const MapStyle& s, std::set<std::pair<LevelRef, LevelRef>>& levels) {
  for (const auto& t : legend_levels(s.thematic_ladder))
    for (const auto& u : legend_levels(s.uncertainty_ladder)) levels.insert({t, u});
}

LegendParts legend_group(const MapStyle& s, double x0, double y0) {
  LegendParts out;
  const auto rows = legend_levels(s.thematic_ladder);
  const auto cols = legend_levels(s.uncertainty_ladder);
  const double cell = kSwatch + kSwatchGap;
  std::string g = "<g id=\"legend\" transform=\"translate(" + num(x0) + "," + num(y0) + ")\">";
  g += "<text class=\"legend-title\" x=\"0\" y=\"12\" font-size=\"12\" font-family=\"sans-serif\">" +
       escape(s.thematic.name) + " (" + escape(to_string(s.pairing.thematic)) + ") by " +
       escape(s.uncertainty.name) + " (" + escape(to_string(s.pairing.uncertainty)) + ")</text>";
  const double gx = kLegendLabelWidth, gy = 24;
  // Highest thematic bin on top.
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y = gy + (rows.size() - 1 - r) * cell;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double x = gx + c * cell;
      const auto id = level_id(rows[r], cols[c]);
      const auto def = level_def(s, rows[r], cols[c]);
      const auto swatch_id = "swatch-t" + rows[r].tag() + "-u" + cols[c].tag();
      if (s.implantation == Implantation::Point) {
        g += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(kSwatch) +
             "\" height=\"" + num(kSwatch) + "\" fill=\"none\" stroke=\"#cccccc\"/>";
        g += "<use class=\"swatch\" id=\"" + swatch_id + "\" data-level=\"" + id + "\"" + def.paint +
             " x=\"" + num(x + kSwatch / 2) + "\" y=\"" + num(y + kSwatch / 2) + "\"/>";
      } else {
        g += "<rect class=\"swatch\" id=\"" + swatch_id + "\" data-level=\"" + id + "\" x=\"" +
             num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(kSwatch) + "\" height=\"" +
             num(kSwatch) + "\"" + def.paint + " stroke=\"#808080\" stroke-width=\"0.5\"/>";
      }
      ++out.swatches;
    }
  }
  const double grid_bottom = gy + rows.size() * cell;
  auto label = [&](double x, double y, const std::string& cls, const std::string& text,
                   const char* anchor) {
    return "<text class=\"" + cls + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
           "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" +
           escape(text) + "</text>";
  };
  if (!s.thematic_ladder.continuous()) {
    for (std::size_t r = 0; r < rows.size() && r < s.thematic.labels.size(); ++r)
      g += label(gx - 4, gy + (rows.size() - 1 - r) * cell + kSwatch / 2 + 3, "axis-label axis-thematic",
                 s.thematic.labels[r], "end");
  }
  if (!s.uncertainty_ladder.continuous()) {
    for (std::size_t c = 0; c < cols.size() && c < s.uncertainty.labels.size(); ++c) {
      const double x = gx + c * cell + kSwatch / 2;
      g += "<text class=\"axis-label axis-uncertainty\" x=\"" + num(x) + "\" y=\"" +
           num(grid_bottom + 4) + "\" font-size=\"9\" font-family=\"sans-serif\" transform=\"rotate(45 " +
           num(x) + " " + num(grid_bottom + 4) + ")\">" + escape(s.uncertainty.labels[c]) + "</text>";
    }
  }
  double y = grid_bottom + 56;
  auto gradient = [&](const Ladder& l, const DimensionBins& bins, const std::string& dim) {
    const auto id = "grad-" + dim;
    out.defs += gradient_def(s, id, l);
    g += label(0, y - 4, "axis-title", bins.name + " (continuous " +
                                          std::string(to_string(l.variable)) + ")",
               "start");
    g += "<rect class=\"gradient-bar\" data-dimension=\"" + dim + "\" x=\"0\" y=\"" + num(y) +
         "\" width=\"" + num(kGradientLength) + "\" height=\"" + num(kGradientThickness) +
         "\" fill=\"url(#" + id + ")\" stroke=\"#808080\" stroke-width=\"0.5\"/>";
    if (bins.labels.size() >= 2) {
      g += label(0, y + kGradientThickness + 10, "axis-label", bins.labels.front(), "start");
      g += label(kGradientLength, y + kGradientThickness + 10, "axis-label", bins.labels.back(), "end");
    }
    y += kGradientThickness + 34;
  };
  if (s.thematic_ladder.continuous()) gradient(s.thematic_ladder, s.thematic, "thematic");
  if (s.uncertainty_ladder.continuous()) gradient(s.uncertainty_ladder, s.uncertainty, "uncertainty");

  const bool both_discrete = !s.thematic_ladder.continuous() && !s.uncertainty_ladder.continuous();
  if (both_discrete && rows.size() * cols.size() > 9 && is_colour_variable(s.pairing.thematic) &&
      is_colour_variable(s.pairing.uncertainty)) {
    g += label(0, y, "advisory",
               std::to_string(rows.size() * cols.size()) +
                   " colour levels: more than nine bivariate levels are hard to internalise",
               "start");
    y += 14;
  }
  g += "</g>";
  out.group = g;
  out.width = kLegendPanelWidth;
  out.height = y + 10;
  return out;
}

std::string svg_open(double w, double h, const MapStyle& s) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n" +
         "<desc>" + escape(style_summary(s).dump()) + "</desc>\n";
}

void check_style(const MapStyle& s) {
  if (s.implantation == Implantation::Line)
    throw Error(ErrorCode::UnsupportedImplantation, "line implantation cannot be rendered");
}

void check_coverage(const Dataset& ds, const BinnedAttribute& b, const Ladder& l, const char* dim) {
  if (b.size() != ds.features.size())
    throw Error(ErrorCode::FeatureMissingBin,
                std::string(dim) + " attribute '" + b.name + "' covers " + std::to_string(b.size()) +
                    " of " + std::to_string(ds.features.size()) + " features");
  if (b.continuous() != l.continuous())
    throw Error(ErrorCode::StyleDatasetMismatch,
                std::string(dim) + ": style and binning disagree on continuity");
  if (!b.continuous()) {
    if (static_cast<std::size_t>(*b.n_bins) != l.size())
      throw Error(ErrorCode::StyleDatasetMismatch,
                  std::string(dim) + ": style has " + std::to_string(l.size()) + " levels, binning has " +
                      std::to_string(*b.n_bins));
    for (std::size_t i = 0; i < b.bins.size(); ++i)
      if (b.bins[i] < 0 || static_cast<std::size_t>(b.bins[i]) >= l.size())
        throw Error(ErrorCode::FeatureMissingBin,
                    std::string(dim) + ": feature " + ds.features[i].id + " has no valid bin",
                    {ds.features[i].id});
  }
}

}  // namespace

std::string_view to_string(RenderMode m) {
  switch (m) {
    case RenderMode::PatternOnFill: return "PatternOnFill";
    case RenderMode::PatternOnly: return "PatternOnly";
    case RenderMode::FillOnly: return "FillOnly";
    case RenderMode::Crosshatch: return "Crosshatch";
    case RenderMode::BivariateChoropleth: return "BivariateChoropleth";
  }
  return "?";
}

std::string_view to_string(PatternGlyph g) {
  switch (g) {
    case PatternGlyph::Dot: return "Dot";
    case PatternGlyph::Hatch45: return "Hatch45";
    case PatternGlyph::Cross: return "Cross";
  }
  return "?";
}

std::map<VisualVariable, LadderEndpoints> PaletteConfig::default_endpoints() {
  return {
      {VisualVariable::Value, {0.92, 0.25}},      {VisualVariable::Size, {1.5, 6.0}},
      {VisualVariable::Transparency, {1.0, 0.15}}, {VisualVariable::Blur, {0.0, 2.5}},
      {VisualVariable::Density, {8.0, 2.0}},       {VisualVariable::Saturation, {0.9, 0.1}},
      {VisualVariable::Texture, {16.0, 6.0}},
  };
}

PaletteConfig palette_from_json(const nlohmann::json& j, std::vector<std::string>& diag) {
  PaletteConfig p;
  if (j.is_null()) return p;
  if (!j.is_object()) {
    diag.push_back("config: expected object");
    return p;
  }
  auto num_field = [&](const nlohmann::json& obj, const std::string& path, const char* key,
                       double& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number())
      diag.push_back(path + "." + key + ": expected number");
    else
      out = obj[key].get<double>();
  };
  auto bool_field = [&](const nlohmann::json& obj, const std::string& path, const char* key,
                        bool& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_boolean())
      diag.push_back(path + "." + key + ": expected bool");
    else
      out = obj[key].get<bool>();
  };
  if (j.contains("palette")) {
    const auto& pj = j["palette"];
    if (!pj.is_object()) {
      diag.push_back("palette: expected object");
    } else {
      num_field(pj, "palette", "hue", p.hue);
      num_field(pj, "palette", "secondary_hue", p.secondary_hue);
      num_field(pj, "palette", "base_saturation", p.base_saturation);
      num_field(pj, "palette", "glyph_lightness", p.glyph_lightness);
      num_field(pj, "palette", "glyph_radius", p.glyph_radius);
      num_field(pj, "palette", "point_radius", p.point_radius);
      num_field(pj, "palette", "lattice", p.lattice);
      bool_field(pj, "palette", "white_glyphs", p.white_glyphs);
      bool_field(pj, "palette", "overlay_pattern", p.overlay_pattern);
      if (pj.contains("endpoints")) {
        if (!pj["endpoints"].is_object()) {
          diag.push_back("palette.endpoints: expected object");
        } else {
          for (const auto& [k, v] : pj["endpoints"].items()) {
            auto var = parse_variable(k);
            if (!var) {
              diag.push_back("palette.endpoints." + k + ": unknown visual variable");
              continue;
            }
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
              diag.push_back("palette.endpoints." + k + ": expected [low, high]");
              continue;
            }
            p.endpoints[*var] = {v[0].get<double>(), v[1].get<double>()};
          }
        }
      }
      if (p.hue < 0 || p.hue >= 360) diag.push_back("palette.hue: must be in [0, 360)");
      if (p.secondary_hue < 0 || p.secondary_hue >= 360)
        diag.push_back("palette.secondary_hue: must be in [0, 360)");
      if (!in_unit(p.base_saturation)) diag.push_back("palette.base_saturation: must be in [0, 1]");
      if (!in_unit(p.glyph_lightness)) diag.push_back("palette.glyph_lightness: must be in [0, 1]");
      if (p.lattice <= 0) diag.push_back("palette.lattice: must be > 0");
      if (p.glyph_radius <= 0) diag.push_back("palette.glyph_radius: must be > 0");
      if (p.point_radius <= 0) diag.push_back("palette.point_radius: must be > 0");
    }
  }
  if (j.contains("canvas")) {
    const auto& cj = j["canvas"];
    if (!cj.is_object()) {
      diag.push_back("canvas: expected object");
    } else {
      num_field(cj, "canvas", "width", p.canvas.width);
      num_field(cj, "canvas", "height", p.canvas.height);
      num_field(cj, "canvas", "margin", p.canvas.margin);
      if (p.canvas.width <= 2 * p.canvas.margin || p.canvas.height <= 2 * p.canvas.margin)
        diag.push_back("canvas: width and height must exceed twice the margin");
    }
  }
  return p;
}

nlohmann::ordered_json to_json(const PaletteConfig& p) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json pal;
  pal["hue"] = p.hue;
  pal["secondary_hue"] = p.secondary_hue;
  pal["base_saturation"] = p.base_saturation;
  pal["glyph_lightness"] = p.glyph_lightness;
  pal["glyph_radius"] = p.glyph_radius;
  pal["point_radius"] = p.point_radius;
  pal["lattice"] = p.lattice;
  pal["white_glyphs"] = p.white_glyphs;
  pal["overlay_pattern"] = p.overlay_pattern;
  nlohmann::ordered_json ends;
  for (auto v : kAllVariables) {
    auto it = p.endpoints.find(v);
    if (it != p.endpoints.end()) ends[std::string(to_string(v))] = {it->second.low, it->second.high};
  }
  pal["endpoints"] = ends;
  j["palette"] = pal;
  j["canvas"] = {{"width", p.canvas.width}, {"height", p.canvas.height}, {"margin", p.canvas.margin}};
  return j;
}

double Ladder::at_normalized(double t) const {
  if (continuous_range) return continuous_range->low + (continuous_range->high - continuous_range->low) * t;
  if (levels.empty()) return 0;
  const double pos = t * (levels.size() - 1);
  const auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, levels.size() - 1.0));
  if (i + 1 >= levels.size()) return levels.back();
  return levels[i] + (levels[i + 1] - levels[i]) * (pos - i);
}

DimensionBins DimensionBins::from(const BinnedAttribute& b) {
  DimensionBins d;
  d.name = b.name;
  d.n_bins = b.n_bins;
  if (b.continuous()) {
    d.labels = {short_num(b.min), short_num(b.max)};
    return d;
  }
  const auto& c = b.cuts;
  const int n = *b.n_bins;
  const bool threshold = b.scheme.kind == BinningScheme::Kind::Threshold;
  // Threshold edges belong to the upper bin, quantile cuts to the lower bin.
  const std::string lo_op = threshold ? "< " : "<= ";
  const std::string hi_op = threshold ? ">= " : "> ";
  for (int i = 0; i < n; ++i) {
    if (c.empty() || static_cast<int>(c.size()) != n - 1)
      d.labels.push_back("bin " + std::to_string(i + 1));
    else if (i == 0)
      d.labels.push_back(lo_op + short_num(c.front()));
    else if (i == n - 1)
      d.labels.push_back(hi_op + short_num(c.back()));
    else
      d.labels.push_back(short_num(c[i - 1]) + " - " + short_num(c[i]));
  }
  return d;
}

DimensionBins DimensionBins::discrete(std::string name, int n) {
  DimensionBins d;
  d.name = std::move(name);
  d.n_bins = n;
  for (int i = 0; i < n; ++i) d.labels.push_back("bin " + std::to_string(i + 1));
  return d;
}

DimensionBins DimensionBins::continuous(std::string name) {
  DimensionBins d;
  d.name = std::move(name);
  d.labels = {"min", "max"};
  return d;
}

MapStyle build_style(const Pairing& pairing, Implantation implantation,
                     const DimensionBins& thematic_bins, const DimensionBins& uncertainty_bins,
                     const PaletteConfig& palette) {
  if (implantation == Implantation::Line)
    throw Error(ErrorCode::UnsupportedImplantation, "line implantation cannot be rendered");
  const auto T = pairing.thematic;
  const auto U = pairing.uncertainty;
  auto endpoints = [&](VisualVariable v) {
    auto it = palette.endpoints.find(v);
    const auto e = it != palette.endpoints.end() ? it->second : PaletteConfig::default_endpoints().at(v);
    check_endpoints(v, e, palette, implantation);
    return e;
  };

  MapStyle s;
  s.pairing = pairing;
  s.implantation = implantation;
  s.palette = palette;
  s.canvas = palette.canvas;
  s.base_hue = palette.hue;
  s.thematic = thematic_bins;
  s.uncertainty = uncertainty_bins;
  s.thematic_ladder = make_ladder(T, thematic_bins, endpoints(T));
  s.uncertainty_ladder = make_ladder(U, uncertainty_bins, endpoints(U));

  const bool colour_u = U == VisualVariable::Saturation || U == VisualVariable::Transparency ||
                        U == VisualVariable::Blur;
  if (T == VisualVariable::Value && U == VisualVariable::Value) {
    s.mode = RenderMode::BivariateChoropleth;
    s.secondary_hue = palette.secondary_hue;
  } else if (T == VisualVariable::Density && U == VisualVariable::Density) {
    s.mode = RenderMode::Crosshatch;
    s.pattern_glyph = PatternGlyph::Cross;
  } else if (T == VisualVariable::Value && colour_u) {
    s.mode = RenderMode::FillOnly;
  } else if (T == VisualVariable::Value &&
             (U == VisualVariable::Texture || U == VisualVariable::Density ||
              (U == VisualVariable::Size && palette.overlay_pattern))) {
    s.mode = RenderMode::PatternOnFill;
  } else {
    s.mode = RenderMode::PatternOnly;
  }
  if (s.mode != RenderMode::Crosshatch &&
      (T == VisualVariable::Density || U == VisualVariable::Density))
    s.pattern_glyph = PatternGlyph::Hatch45;
  return s;
}

nlohmann::ordered_json style_summary(const MapStyle& s) {
  auto ladder = [](const Ladder& l) {
    nlohmann::ordered_json j;
    j["variable"] = to_string(l.variable);
    if (l.continuous())
      j["continuous"] = {l.continuous_range->low, l.continuous_range->high};
    else
      j["levels"] = l.levels;
    return j;
  };
  nlohmann::ordered_json j;
  j["thematic"] = to_string(s.pairing.thematic);
  j["uncertainty"] = to_string(s.pairing.uncertainty);
  j["implantation"] = to_string(s.implantation);
  j["mode"] = to_string(s.mode);
  j["glyph"] = to_string(s.pattern_glyph);
  j["hue"] = s.base_hue;
  if (s.secondary_hue) j["secondary_hue"] = *s.secondary_hue;
  j["thematic_ladder"] = ladder(s.thematic_ladder);
  j["uncertainty_ladder"] = ladder(s.uncertainty_ladder);
  return j;
}

std::string render_map(const Dataset& dataset, const BinnedAttribute& thematic,
                       const BinnedAttribute& uncertainty, const MapStyle& style) {
  check_style(style);
  if (dataset.implantation != style.implantation)
    throw Error(ErrorCode::StyleDatasetMismatch,
                "style is for " + std::string(to_string(style.implantation)) + " but dataset is " +
                    std::string(to_string(dataset.implantation)));
  check_coverage(dataset, thematic, style.thematic_ladder, "thematic");
  check_coverage(dataset, uncertainty, style.uncertainty_ladder, "uncertainty");

  const auto tf = fit(dataset, style.canvas);
  std::vector<std::pair<LevelRef, LevelRef>> feature_levels;
  std::set<std::pair<LevelRef, LevelRef>> used;
  for (std::size_t i = 0; i < dataset.features.size(); ++i) {
    feature_levels.emplace_back(level_of(thematic, i), level_of(uncertainty, i));
    used.insert(feature_levels.back());
  }
  collect_legend_levels(style, used);

  const auto legend = legend_group(style, style.canvas.width + 10, style.canvas.margin);
  const double width = style.canvas.width + legend.width;
  const double height = std::max(style.canvas.height, legend.height + style.canvas.margin);

  std::string out = svg_open(width, height, style);
  out += "<defs>\n";
  for (const auto& [t, u] : used) out += level_def(style, t, u).defs + "\n";
  out += legend.defs;
  out += "</defs>\n";
  out += "<rect id=\"background\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"#ffffff\"/>\n";
  out += "<g id=\"features\">\n";
  for (std::size_t i = 0; i < dataset.features.size(); ++i) {
    const auto& f = dataset.features[i];
    const auto& [t, u] = feature_levels[i];
    const auto id = level_id(t, u);
    const auto paint = level_def(style, t, u).paint;
    out += "<g id=\"feat-" + escape(f.id) + "\" class=\"feature\" data-level=\"" + id + "\">";
    if (const auto* pg = std::get_if<PolygonGeometry>(&f.geometry)) {
      out += "<path d=\"" + path_data(*pg, tf) + "\" fill-rule=\"evenodd\"" + paint +
             " stroke=\"#606060\" stroke-width=\"0.5\"/>";
    } else {
      const auto p = tf.apply(std::get<PointGeometry>(f.geometry).position);
      out += "<use" + paint + " x=\"" + num(p.x) + "\" y=\"" + num(p.y) + "\"/>";
    }
    out += "</g>\n";
  }
  out += "</g>\n";
  out += legend.group + "\n";
  out += "</svg>\n";
  return out;
}

std::string render_legend(const MapStyle& style) {
  check_style(style);
  std::set<std::pair<LevelRef, LevelRef>> used;
  collect_legend_levels(style, used);
  const auto legend = legend_group(style, 10, 10);
  const double width = legend.width + 20;
  const double height = legend.height + 20;
  std::string out = svg_open(width, height, style);
  out += "<defs>\n";
  for (const auto& [t, u] : used) out += level_def(style, t, u).defs + "\n";
  out += legend.defs;
  out += "</defs>\n";
  out += "<rect id=\"background\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"#ffffff\"/>\n";
  out += legend.group + "\n";
  out += "</svg>\n";
  return out;
}

EnsembleOutput render_ensemble(const Dataset& dataset, std::span<const EnsembleEntry> entries) {
  if (entries.empty())
    throw Error(ErrorCode::StyleDatasetMismatch, "ensemble needs at least one style");
  EnsembleOutput out;
  const auto canvas = entries.front().style.canvas;
  nlohmann::ordered_json docs = nlohmann::ordered_json::array();
  std::set<std::string> names;
  for (const auto& e : entries) {
    if (!names.insert(e.file_name).second)
      throw Error(ErrorCode::StyleDatasetMismatch, "duplicate ensemble file name " + e.file_name);
    auto style = e.style;
    style.canvas = canvas;
    out.documents.emplace_back(e.file_name, render_map(dataset, e.thematic, e.uncertainty, style));
    nlohmann::ordered_json d;
    d["file"] = e.file_name;
    d["label"] = e.label;
    d["style"] = style_summary(style);
    d["thematic"] = {{"name", e.thematic.name}, {"scheme", to_json(e.thematic.scheme)}};
    d["uncertainty"] = {{"name", e.uncertainty.name}, {"scheme", to_json(e.uncertainty.scheme)}};
    docs.push_back(d);
  }
  out.manifest["schema"] = "bivmap-ensemble/1";
  out.manifest["canvas"] = {{"width", canvas.width}, {"height", canvas.height}, {"margin", canvas.margin}};
  out.manifest["feature_count"] = dataset.features.size();
  out.manifest["documents"] = docs;
  return out;
}

Rgb hsl_to_rgb(double hue, double saturation, double lightness) {
  const double h = std::fmod(std::fmod(hue, 360.0) + 360.0, 360.0) / 360.0;
  const double s = std::clamp(saturation, 0.0, 1.0);
  const double l = std::clamp(lightness, 0.0, 1.0);
  auto channel = [](double p, double q, double t) {
    if (t < 0) t += 1;
    if (t > 1) t -= 1;
    if (t < 1.0 / 6) return p + (q - p) * 6 * t;
    if (t < 0.5) return q;
    if (t < 2.0 / 3) return p + (q - p) * (2.0 / 3 - t) * 6;
    return p;
  };
  double r = l, g = l, b = l;
  if (s > 0) {
    const double q = l < 0.5 ? l * (1 + s) : l + s - l * s;
    const double p = 2 * l - q;
    r = channel(p, q, h + 1.0 / 3);
    g = channel(p, q, h);
    b = channel(p, q, h - 1.0 / 3);
  }
  auto to8 = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255)); };
  return {to8(r), to8(g), to8(b)};
}

std::string to_hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

double hex_lightness(std::string_view hex) {
  if (hex.size() != 7 || hex[0] != '#') return -1;
  auto byte = [&](std::size_t i) { return std::stoi(std::string(hex.substr(i, 2)), nullptr, 16) / 255.0; };
  const double r = byte(1), g = byte(3), b = byte(5);
  return (std::max({r, g, b}) + std::min({r, g, b})) / 2;
}

}  // namespace bivmap
