#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "bivmap/error.hpp"
#include "bivmap/renderer.hpp"
#include "oracle.hpp"
#include "svg_probe.hpp"

using namespace bivmap;
using V = VisualVariable;

namespace {

struct Prepared {
  Dataset ds;
  BinnedAttribute t;
  BinnedAttribute u;
};

const Dataset& fixture() {
  static const Dataset ds = with_coefficient_of_variation(
      load_dataset(oracle::read_text(BIVMAP_FIXTURE_GEOJSON)), "TSS", "TSS_sd", "CV");
  return ds;
}

Prepared prepare(const BinningScheme& ts, const BinningScheme& us) {
  return {fixture(), bin_attribute(fixture(), "TSS", ts), bin_attribute(fixture(), "CV", us)};
}

Prepared scheme3() { return prepare(BinningScheme::threshold({837, 2204}), BinningScheme::quantile(3)); }

MapStyle style_for(const Prepared& p, V t, V u, PaletteConfig palette = {}) {
  return build_style({t, u}, Implantation::Area, DimensionBins::from(p.t), DimensionBins::from(p.u),
                     palette);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

}  // namespace

TEST(BuildStyle, ModeSelection) {
  const auto p = scheme3();
  EXPECT_EQ(style_for(p, V::Value, V::Value).mode, RenderMode::BivariateChoropleth);
  EXPECT_EQ(style_for(p, V::Density, V::Density).mode, RenderMode::Crosshatch);
  EXPECT_EQ(style_for(p, V::Value, V::Blur).mode, RenderMode::FillOnly);
  EXPECT_EQ(style_for(p, V::Value, V::Saturation).mode, RenderMode::FillOnly);
  EXPECT_EQ(style_for(p, V::Value, V::Texture).mode, RenderMode::PatternOnFill);
  EXPECT_EQ(style_for(p, V::Value, V::Size).mode, RenderMode::PatternOnly);
  PaletteConfig overlay;
  overlay.overlay_pattern = true;
  EXPECT_EQ(style_for(p, V::Value, V::Size, overlay).mode, RenderMode::PatternOnFill);
  EXPECT_EQ(style_for(p, V::Size, V::Transparency).mode, RenderMode::PatternOnly);
  EXPECT_EQ(style_for(p, V::Density, V::Blur).pattern_glyph, PatternGlyph::Hatch45);
}

TEST(BuildStyle, LaddersAreStrictlyMonotone) {
  for (int n = 2; n <= 5; ++n)
    for (auto v : kAllVariables) {
      const auto s = build_style({V::Value, v}, Implantation::Area, DimensionBins::discrete("a", n),
                                 DimensionBins::discrete("b", n));
      const auto& l = s.uncertainty_ladder.levels;
      ASSERT_EQ(l.size(), static_cast<std::size_t>(n));
      const bool up = l.back() > l.front();
      for (std::size_t i = 1; i < l.size(); ++i) EXPECT_EQ(l[i] > l[i - 1], up) << to_string(v);
    }
}

TEST(BuildStyle, RejectsBadEndpointsAndLines) {
  PaletteConfig flat;
  flat.endpoints[V::Value] = {0.5, 0.5};
  EXPECT_EQ(code_of([&] { style_for(scheme3(), V::Value, V::Blur, flat); }), ErrorCode::LadderEndpointInvalid);
  PaletteConfig big;
  big.endpoints[V::Size] = {1, 9};
  EXPECT_EQ(code_of([&] { style_for(scheme3(), V::Size, V::Blur, big); }), ErrorCode::LadderEndpointInvalid);
  PaletteConfig dark;
  dark.endpoints[V::Saturation] = {-0.1, 0.5};
  EXPECT_EQ(code_of([&] { style_for(scheme3(), V::Value, V::Saturation, dark); }),
            ErrorCode::LadderEndpointInvalid);
  EXPECT_EQ(code_of([] {
              build_style({V::Size, V::Value}, Implantation::Line, DimensionBins::discrete("a", 3),
                          DimensionBins::discrete("b", 3));
            }),
            ErrorCode::UnsupportedImplantation);
}

TEST(RenderMap, OneGroupPerFeatureWithMatchingLevel) {
  const auto p = scheme3();
  const auto svg = render_map(p.ds, p.t, p.u, style_for(p, V::Value, V::Blur));
  const auto feats = probe::features(svg);
  ASSERT_EQ(feats.size(), p.ds.features.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    EXPECT_EQ(feats[i].id, p.ds.features[i].id);
    EXPECT_EQ(feats[i].level,
              "lvl-t" + std::to_string(p.t.bins[i]) + "-u" + std::to_string(p.u.bins[i]));
  }
  std::string why;
  EXPECT_TRUE(probe::well_formed(svg, &why)) << why;
}

TEST(RenderMap, LevelDefinitionsAreDeduplicated) {
  const auto p = scheme3();
  for (auto [t, u] : {std::pair{V::Value, V::Blur}, {V::Size, V::Transparency}, {V::Value, V::Size}}) {
    const auto svg = render_map(p.ds, p.t, p.u, style_for(p, t, u));
    const auto defs = probe::level_defs(svg);
    const std::set<std::string> unique(defs.begin(), defs.end());
    EXPECT_EQ(defs.size(), unique.size());
    // Every discrete cell appears once, whether or not a feature uses it.
    EXPECT_EQ(unique.size(), 9u);
    for (const auto& f : probe::features(svg)) EXPECT_TRUE(unique.contains(f.level));
  }
}

TEST(RenderMap, GeometryIsPreservedUnderTheFitTransform) {
  const auto p = scheme3();
  const auto style = style_for(p, V::Size, V::Value);
  const auto svg = render_map(p.ds, p.t, p.u, style);

  double minx = std::numeric_limits<double>::infinity(), miny = minx, maxx = -minx, maxy = -minx;
  for (const auto& f : p.ds.features)
    for (const auto& poly : std::get<PolygonGeometry>(f.geometry).polygons)
      for (const auto& ring : poly)
        for (const auto& q : ring) {
          minx = std::min(minx, q.x);
          maxx = std::max(maxx, q.x);
          miny = std::min(miny, q.y);
          maxy = std::max(maxy, q.y);
        }
  const auto& c = style.canvas;
  const double w = c.width - 2 * c.margin, h = c.height - 2 * c.margin;
  const double scale = std::min(w / (maxx - minx), h / (maxy - miny));
  const double ox = c.margin + (w - (maxx - minx) * scale) / 2;
  const double oy = c.margin + (h - (maxy - miny) * scale) / 2;

  const auto feats = probe::features(svg);
  ASSERT_EQ(feats.size(), p.ds.features.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto d = probe::string_attribute(feats[i].body, "d");
    std::vector<double> nums;
    for (std::size_t pos = 0; pos < d.size();) {
      if (d[pos] == '-' || std::isdigit(static_cast<unsigned char>(d[pos]))) {
        std::size_t used = 0;
        nums.push_back(std::stod(d.substr(pos), &used));
        pos += used;
      } else {
        ++pos;
      }
    }
    std::vector<double> expected;
    for (const auto& poly : std::get<PolygonGeometry>(p.ds.features[i].geometry).polygons)
      for (const auto& ring : poly)
        for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
          expected.push_back(ox + (ring[k].x - minx) * scale);
          expected.push_back(oy + (maxy - ring[k].y) * scale);
        }
    ASSERT_EQ(nums.size(), expected.size()) << feats[i].id;
    for (std::size_t k = 0; k < nums.size(); ++k) EXPECT_NEAR(nums[k], expected[k], 1e-6);
  }
}

TEST(RenderMap, PaintMatchesTheLadder) {
  const auto p = scheme3();
  const auto style = style_for(p, V::Value, V::Blur);
  const auto svg = render_map(p.ds, p.t, p.u, style);
  // Blur radius grows with the uncertainty bin; lightness falls with the thematic bin.
  double last_blur = -1;
  for (int u = 0; u < 3; ++u) {
    const auto def = probe::def_markup(svg, "lvl-t0-u" + std::to_string(u));
    const double sd = probe::attribute(def, "stdDeviation");
    EXPECT_NEAR(sd, style.uncertainty_ladder.levels[u], 1e-6);
    EXPECT_GT(sd, last_blur);
    last_blur = sd;
  }
  double last_l = 2;
  for (int t = 0; t < 3; ++t) {
    const std::string needle = "data-level=\"lvl-t" + std::to_string(t) + "-u0\"><path";
    const auto at = svg.find(needle);
    if (at == std::string::npos) continue;
    const auto fill = probe::string_attribute(svg.substr(at, 4000), "fill");
    const double l = hex_lightness(fill);
    EXPECT_LT(l, last_l);
    last_l = l;
  }
}

TEST(RenderMap, ErrorsOnMismatch) {
  const auto p = scheme3();
  const auto five = bin_attribute(p.ds, "CV", BinningScheme::quantile(5));
  EXPECT_EQ(code_of([&] { render_map(p.ds, p.t, five, style_for(p, V::Value, V::Blur)); }),
            ErrorCode::StyleDatasetMismatch);
  auto shorter = p.u;
  shorter.bins.pop_back();
  EXPECT_EQ(code_of([&] { render_map(p.ds, p.t, shorter, style_for(p, V::Value, V::Blur)); }),
            ErrorCode::FeatureMissingBin);
  const auto cont = bin_attribute(p.ds, "CV", BinningScheme::continuous());
  EXPECT_EQ(code_of([&] { render_map(p.ds, p.t, cont, style_for(p, V::Value, V::Blur)); }),
            ErrorCode::StyleDatasetMismatch);
}

TEST(RenderMap, ContinuousLevelsUsePermille) {
  const auto p = prepare(BinningScheme::threshold({837, 2204}), BinningScheme::continuous());
  const auto svg = render_map(p.ds, p.t, p.u, style_for(p, V::Size, V::Transparency));
  for (std::size_t i = 0; i < p.ds.features.size(); ++i) {
    const auto f = probe::features(svg)[i];
    const auto permille = std::lround(p.u.normalized[i] * 1000);
    EXPECT_EQ(f.level, "lvl-t" + std::to_string(p.t.bins[i]) + "-uc" + std::to_string(permille));
  }
}

TEST(RenderMap, PointDatasets) {
  const std::string geo = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","id":"p1","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"a":1,"b":3}},
    {"type":"Feature","id":"p2","geometry":{"type":"Point","coordinates":[5,2]},"properties":{"a":2,"b":2}},
    {"type":"Feature","id":"p3","geometry":{"type":"Point","coordinates":[9,9]},"properties":{"a":3,"b":1}}]})";
  const auto ds = load_dataset(geo);
  const auto t = bin_attribute(ds, "a", BinningScheme::quantile(3));
  const auto u = bin_attribute(ds, "b", BinningScheme::quantile(3));
  const auto style = build_style({V::Size, V::Blur}, Implantation::Point, DimensionBins::from(t),
                                 DimensionBins::from(u));
  const auto svg = render_map(ds, t, u, style);
  EXPECT_EQ(probe::features(svg).size(), 3u);
  EXPECT_TRUE(probe::well_formed(svg));
  EXPECT_EQ(code_of([&] { render_map(fixture(), t, u, style); }), ErrorCode::StyleDatasetMismatch);
}

TEST(RenderLegend, SwatchCounts) {
  const auto nine = render_legend(style_for(scheme3(), V::Value, V::Blur));
  EXPECT_EQ(probe::swatch_levels(nine).size(), 9u);
  EXPECT_EQ(probe::count(nine, "class=\"gradient-bar\""), 0);

  const auto q5 = prepare(BinningScheme::quantile(5), BinningScheme::quantile(5));
  const auto twentyfive = render_legend(style_for(q5, V::Value, V::Size));
  EXPECT_EQ(probe::swatch_levels(twentyfive).size(), 25u);

  const auto c = prepare(BinningScheme::threshold({837, 2204}), BinningScheme::continuous());
  const auto bar = render_legend(style_for(c, V::Size, V::Transparency));
  EXPECT_EQ(probe::swatch_levels(bar).size(), 3u);
  EXPECT_EQ(probe::count(bar, "class=\"gradient-bar\""), 1);
  EXPECT_EQ(probe::count(bar, "id=\"grad-uncertainty\""), 1);
  for (const auto* doc : {&nine, &twentyfive, &bar}) EXPECT_TRUE(probe::well_formed(*doc));
}

TEST(RenderLegend, AdvisoryOnlyForLargeColourGrids) {
  const auto q5 = prepare(BinningScheme::quantile(5), BinningScheme::quantile(5));
  EXPECT_EQ(probe::count(render_legend(style_for(q5, V::Value, V::Saturation)), "class=\"advisory\""), 1);
  EXPECT_EQ(probe::count(render_legend(style_for(q5, V::Value, V::Size)), "class=\"advisory\""), 0);
  EXPECT_EQ(probe::count(render_legend(style_for(scheme3(), V::Value, V::Saturation)), "class=\"advisory\""), 0);
}

TEST(RenderLegend, SwatchesReuseMapLevels) {
  const auto p = scheme3();
  const auto svg = render_map(p.ds, p.t, p.u, style_for(p, V::Size, V::Value));
  const auto defs = probe::level_defs(svg);
  const std::set<std::string> defined(defs.begin(), defs.end());
  for (const auto& s : probe::swatch_levels(svg)) EXPECT_TRUE(defined.contains(s)) << s;
}

TEST(Render, Deterministic) {
  const auto p = scheme3();
  const auto style = style_for(p, V::Density, V::Transparency);
  EXPECT_EQ(render_map(p.ds, p.t, p.u, style), render_map(p.ds, p.t, p.u, style));
  EXPECT_EQ(render_legend(style), render_legend(style));
}

TEST(Render, EveryAreaPairingRendersWellFormed) {
  const auto p = scheme3();
  for (const auto& e : KnowledgeBase::builtin().enumerate_pairings(Implantation::Area)) {
    const auto svg = render_map(p.ds, p.t, p.u, style_for(p, e.pairing.thematic, e.pairing.uncertainty));
    std::string why;
    EXPECT_TRUE(probe::well_formed(svg, &why)) << to_string(e.pairing) << ": " << why;
    EXPECT_EQ(probe::features(svg).size(), 40u);
  }
}

TEST(RenderEnsemble, ManifestListsEveryDocument) {
  const auto p = scheme3();
  std::vector<EnsembleEntry> entries{
      {"a.svg", "a", style_for(p, V::Value, V::Blur), p.t, p.u},
      {"b.svg", "b", style_for(p, V::Size, V::Value), p.t, p.u}};
  const auto out = render_ensemble(p.ds, entries);
  ASSERT_EQ(out.documents.size(), 2u);
  EXPECT_EQ(out.manifest["schema"], "bivmap-ensemble/1");
  EXPECT_EQ(out.manifest["feature_count"], 40);
  EXPECT_EQ(out.manifest["documents"][1]["file"], "b.svg");
  entries[1].file_name = "a.svg";
  EXPECT_EQ(code_of([&] { render_ensemble(p.ds, entries); }), ErrorCode::StyleDatasetMismatch);
}

TEST(Colour, HslConversion) {
  EXPECT_EQ(hsl_to_rgb(0, 1, 0.5), (Rgb{255, 0, 0}));
  EXPECT_EQ(hsl_to_rgb(120, 1, 0.5), (Rgb{0, 255, 0}));
  EXPECT_EQ(hsl_to_rgb(0, 0, 1), (Rgb{255, 255, 255}));
  EXPECT_EQ(to_hex({255, 16, 0}), "#ff1000");
  EXPECT_NEAR(hex_lightness("#808080"), 128 / 255.0, 1e-3);
}
