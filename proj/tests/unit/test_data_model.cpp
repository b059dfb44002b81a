#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bivmap/data_model.hpp"
#include "bivmap/error.hpp"
#include "oracle.hpp"

using namespace bivmap;

namespace {

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

std::string square(const std::string& id, double x, double y, const std::string& props) {
  return R"({"type":"Feature","id":")" + id +
         R"(","geometry":{"type":"Polygon","coordinates":[[[)" + std::to_string(x) + "," +
         std::to_string(y) + "],[" + std::to_string(x + 1) + "," + std::to_string(y) + "],[" +
         std::to_string(x + 1) + "," + std::to_string(y + 1) + "],[" + std::to_string(x) + "," +
         std::to_string(y) + "]]]},\"properties\":{" + props + "}}";
}

std::string collection(const std::vector<std::string>& features) {
  std::string s = R"({"type":"FeatureCollection","features":[)";
  for (std::size_t i = 0; i < features.size(); ++i) s += (i ? "," : "") + features[i];
  return s + "]}";
}

const Dataset& fixture() {
  static const Dataset ds = load_dataset(oracle::read_text(BIVMAP_FIXTURE_GEOJSON));
  return ds;
}

}  // namespace

TEST(LoadDataset, ReadsTheBundledFixture) {
  const auto& ds = fixture();
  EXPECT_EQ(ds.features.size(), 40u);
  EXPECT_EQ(ds.implantation, Implantation::Area);
  EXPECT_TRUE(ds.has_attribute("TSS"));
  EXPECT_TRUE(ds.has_attribute("TSS_sd"));
  EXPECT_EQ(ds.features.front().id, "SC01");
}

TEST(LoadDataset, JoinsAttributeTable) {
  const auto geo = collection({square("a", 0, 0, ""), square("b", 2, 0, "")});
  const auto ds = load_dataset(geo, std::string_view("id,TSS,CV\na,10,0.2\nb,20,0.4\n"), "id");
  EXPECT_DOUBLE_EQ(ds.features[1].attributes.at("CV"), 0.4);
  EXPECT_DOUBLE_EQ(ds.features[0].attributes.at("TSS"), 10);
}

TEST(LoadDataset, Errors) {
  EXPECT_EQ(code_of([] { load_dataset("{not json"); }), ErrorCode::GeometryParse);
  EXPECT_EQ(code_of([] { load_dataset(R"({"type":"Feature"})"); }), ErrorCode::GeometryParse);
  const auto geo = collection({square("a", 0, 0, ""), square("b", 2, 0, "")});
  EXPECT_EQ(code_of([&] { load_dataset(geo, std::string_view("key,TSS\na,1\nb,2\n"), "id"); }),
            ErrorCode::JoinKeyMissing);
  EXPECT_EQ(code_of([&] { load_dataset(geo, std::string_view("id,TSS\na,1\n"), "id"); }),
            ErrorCode::JoinKeyMissing);
  EXPECT_EQ(code_of([&] { load_dataset(geo, std::string_view("id,TSS\na,1\nb,\n"), "id"); }),
            ErrorCode::MissingAttribute);
  EXPECT_EQ(code_of([] { load_dataset(collection({square("a", 0, 0, ""), square("a", 2, 0, "")})); }),
            ErrorCode::DuplicateFeatureId);
  const auto mixed = collection(
      {square("a", 0, 0, ""),
       R"({"type":"Feature","id":"p","geometry":{"type":"Point","coordinates":[1,2]},"properties":{}})"});
  EXPECT_EQ(code_of([&] { load_dataset(mixed); }), ErrorCode::MixedGeometryKinds);
  EXPECT_EQ(code_of([] {
              load_dataset(collection({square("a", 0, 0, R"("TSS":1)"), square("b", 2, 0, "")}));
            }),
            ErrorCode::MissingAttribute);
}

TEST(LoadDataset, GeoJsonRoundTripIsExact) {
  const auto& ds = fixture();
  const auto text = dataset_to_geojson(ds);
  const auto again = load_dataset(text);
  ASSERT_EQ(again.features.size(), ds.features.size());
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    EXPECT_EQ(again.features[i].id, ds.features[i].id);
    EXPECT_EQ(again.features[i].attributes, ds.features[i].attributes);
    const auto& a = std::get<PolygonGeometry>(ds.features[i].geometry).polygons;
    const auto& b = std::get<PolygonGeometry>(again.features[i].geometry).polygons;
    EXPECT_EQ(a, b);
  }
  EXPECT_EQ(dataset_to_geojson(again), text);
}

TEST(CoefficientOfVariation, Examples) {
  EXPECT_DOUBLE_EQ(coefficient_of_variation(1000, 200), 0.2);
  EXPECT_EQ(code_of([] { coefficient_of_variation(0, 1); }), ErrorCode::ZeroMean);
  EXPECT_EQ(code_of([] { coefficient_of_variation(10, -1); }), ErrorCode::NegativeDeviation);
  const auto ds = with_coefficient_of_variation(fixture(), "TSS", "TSS_sd", "CV");
  for (const auto& f : ds.features)
    EXPECT_DOUBLE_EQ(f.attributes.at("CV"), f.attributes.at("TSS_sd") / f.attributes.at("TSS"));
}

TEST(ThresholdBinning, EdgesGoUp) {
  const std::vector<double> edges{837, 2204};
  const std::vector<double> values{500, 837, 1500, 2204, 3000};
  EXPECT_EQ(bin_threshold(values, edges), (std::vector<int>{0, 1, 1, 2, 2}));
  const std::vector<double> bad{2204, 837};
  EXPECT_EQ(code_of([&] { bin_threshold(values, bad); }), ErrorCode::NonMonotonicEdges);
  EXPECT_EQ(code_of([] { BinningScheme::threshold({1, 1}); }), ErrorCode::NonMonotonicEdges);
}

TEST(ThresholdBinning, MatchesCountOfEdgesNotAbove) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 3000);
  const std::vector<double> edges{837, 2204};
  std::vector<double> values(1000);
  for (auto& v : values) v = std::round(u(rng));
  const auto bins = bin_threshold(values, edges);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int expected = (values[i] >= 837) + (values[i] >= 2204);
    ASSERT_EQ(bins[i], expected) << values[i];
  }
}

TEST(QuantileBinning, Examples) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(bin_quantile(v, 3), (std::vector<int>{0, 0, 1, 1, 2, 2}));
  const std::vector<double> ties{1, 1, 1, 2};
  EXPECT_EQ(bin_quantile(ties, 2), (std::vector<int>{0, 0, 0, 1}));
  const std::vector<double> none;
  EXPECT_EQ(code_of([&] { bin_quantile(none, 3); }), ErrorCode::EmptyValues);
  EXPECT_EQ(code_of([&] { bin_quantile(v, 1); }), ErrorCode::BadK);
  EXPECT_EQ(code_of([] { BinningScheme::quantile(0); }), ErrorCode::BadK);
}

TEST(QuantileBinning, AgreesWithBothOraclesOnRandomVectors) {
  std::mt19937_64 rng(1996);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 80)(rng);
    const int k = std::uniform_int_distribution<int>(2, 9)(rng);
    const bool coarse = trial % 3 == 0;  // many ties
    std::vector<double> v(n);
    for (auto& x : v)
      x = coarse ? std::uniform_int_distribution<int>(0, 4)(rng)
                 : std::uniform_real_distribution<double>(-50, 50)(rng);
    const auto bins = bin_quantile(v, k);
    ASSERT_EQ(bins, oracle::quantile_by_rank(v, k)) << "trial " << trial;
    ASSERT_EQ(bins, oracle::quantile_by_sort(v, k)) << "trial " << trial;
  }
}

TEST(QuantileBinning, Properties) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 60)(rng);
    const int k = std::uniform_int_distribution<int>(2, 7)(rng);
    std::vector<double> v(n);
    for (auto& x : v) x = std::uniform_int_distribution<int>(0, trial % 2 ? 5 : 100000)(rng);
    const auto bins = bin_quantile(v, k);
    for (std::size_t i = 0; i < v.size(); ++i) {
      ASSERT_GE(bins[i], 0);
      ASSERT_LT(bins[i], k);
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[i] == v[j]) ASSERT_EQ(bins[i], bins[j]);
        if (v[i] < v[j]) ASSERT_LE(bins[i], bins[j]);
      }
    }
    std::vector<double> distinct = v;
    std::sort(distinct.begin(), distinct.end());
    if (std::adjacent_find(distinct.begin(), distinct.end()) == distinct.end() && n >= k) {
      std::vector<int> counts(k);
      for (int b : bins) ++counts[b];
      for (int c : counts) ASSERT_GT(c, 0);
    }
  }
}

TEST(ContinuousBinning, NormalizesToUnitRange) {
  const std::vector<double> v{10, 20, 15};
  EXPECT_EQ(normalize_continuous(v), (std::vector<double>{0, 1, 0.5}));
  const std::vector<double> flat{3, 3};
  EXPECT_EQ(normalize_continuous(flat), (std::vector<double>{0, 0}));
  const auto b = bin_attribute("x", v, BinningScheme::continuous());
  EXPECT_TRUE(b.continuous());
  EXPECT_DOUBLE_EQ(b.min, 10);
  EXPECT_DOUBLE_EQ(b.max, 20);
}

TEST(BinAttribute, FixtureSpreadsOverAllThresholdBins) {
  const auto b = bin_attribute(fixture(), "TSS", BinningScheme::threshold({837, 2204}));
  std::vector<int> counts(3);
  for (int x : b.bins) ++counts[x];
  EXPECT_EQ(counts, (std::vector<int>{9, 27, 4}));
  EXPECT_EQ(code_of([] { bin_attribute(fixture(), "nope", BinningScheme::quantile(3)); }),
            ErrorCode::MissingAttribute);
}

TEST(ValidateBinning, Examples) {
  const auto& kb = KnowledgeBase::builtin();
  const auto ok = validate_binning(kb, VisualVariable::Value, Implantation::Area, BinningScheme::quantile(5));
  EXPECT_TRUE(ok.ok);
  EXPECT_EQ(ok.message(), "Ok");
  const auto bad = validate_binning(kb, VisualVariable::Blur, Implantation::Area, BinningScheme::quantile(4));
  EXPECT_FALSE(bad.ok);
  EXPECT_EQ(bad.message(), "Violation(4 > 3)");
  EXPECT_TRUE(validate_binning(kb, VisualVariable::Blur, Implantation::Area, BinningScheme::continuous()).ok);
  EXPECT_EQ(code_of([&] {
              validate_binning(kb, VisualVariable::Texture, Implantation::Point, BinningScheme::quantile(3));
            }),
            ErrorCode::UnavailableVariable);
}

TEST(ValidateBinning, ExhaustiveAgainstLengthTable) {
  const auto& kb = KnowledgeBase::builtin();
  for (auto v : kAllVariables)
    for (auto i : kAllImplantations) {
      const auto len = kb.selective_length(v, i);
      for (int k = 2; k <= 8; ++k) {
        if (!len.available()) continue;
        const auto c = validate_binning(kb, v, i, BinningScheme::quantile(k));
        EXPECT_EQ(c.ok, k <= *len.length);
        std::vector<double> edges;
        for (int j = 1; j < k; ++j) edges.push_back(j);
        const auto t = validate_binning(kb, v, i, BinningScheme::threshold(edges));
        EXPECT_EQ(t.ok, k <= *len.length);
      }
    }
}

TEST(BinningSchemeJson, RoundTrip) {
  for (const auto& s : {BinningScheme::threshold({837, 2204}), BinningScheme::quantile(3),
                        BinningScheme::continuous()}) {
    std::vector<std::string> diag;
    const auto back = binning_from_json(nlohmann::json::parse(to_json(s).dump()), "b", diag);
    EXPECT_TRUE(diag.empty());
    EXPECT_EQ(back, s);
  }
}
