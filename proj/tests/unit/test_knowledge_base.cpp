#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bivmap/error.hpp"
#include "bivmap/knowledge_base.hpp"
#include "oracle.hpp"
#include "table_audit.hpp"

using namespace bivmap;
using V = VisualVariable;
using I = Implantation;

namespace {

const KnowledgeBase& kb() { return KnowledgeBase::builtin(); }

nlohmann::json raw_rules() { return nlohmann::json::parse(KnowledgeBase::builtin_document()); }

}  // namespace

TEST(VariableProperties, TableRows) {
  const auto texture = kb().variable_properties(V::Texture);
  EXPECT_TRUE(texture.selective && texture.associative && texture.ordered);
  EXPECT_FALSE(texture.quantitative);

  const auto size = kb().variable_properties(V::Size);
  EXPECT_TRUE(size.selective && size.ordered && size.quantitative);
  EXPECT_FALSE(size.associative);

  const auto blur = kb().variable_properties(V::Blur);
  EXPECT_TRUE(blur.selective && blur.ordered);
  EXPECT_FALSE(blur.associative || blur.quantitative);
}

TEST(VariableProperties, InvariantsAcrossAllVariables) {
  for (auto v : kAllVariables) {
    const auto p = kb().variable_properties(v);
    EXPECT_TRUE(p.selective) << to_string(v);
    EXPECT_TRUE(p.ordered) << to_string(v);
    EXPECT_EQ(p.associative, v == V::Texture) << to_string(v);
    EXPECT_EQ(p.quantitative, v == V::Size) << to_string(v);
    EXPECT_EQ(p.dissociative(), !p.associative);
    const bool colour_only = v == V::Saturation || v == V::Blur || v == V::Transparency;
    EXPECT_EQ(kb().uncertainty_only(v), colour_only) << to_string(v);
  }
  EXPECT_EQ(kAllVariables.size(), 7u);
  EXPECT_EQ(kAllImplantations.size(), 3u);
}

TEST(SelectiveLength, Examples) {
  const auto value_area = kb().selective_length(V::Value, I::Area);
  ASSERT_TRUE(value_area.available());
  EXPECT_EQ(*value_area.length, 5);
  EXPECT_EQ(value_area.evidence, Evidence::Established);

  const auto blur_point = kb().selective_length(V::Blur, I::Point);
  ASSERT_TRUE(blur_point.available());
  EXPECT_EQ(*blur_point.length, 3);
  EXPECT_EQ(blur_point.evidence, Evidence::AuthorEstimate);

  EXPECT_FALSE(kb().selective_length(V::Texture, I::Point).available());
}

TEST(SelectiveLength, RangeAndEstablishedCells) {
  const std::map<std::pair<V, I>, int> established{
      {{V::Value, I::Point}, 3}, {{V::Value, I::Line}, 4}, {{V::Value, I::Area}, 5},
      {{V::Size, I::Point}, 4},  {{V::Size, I::Line}, 4},  {{V::Size, I::Area}, 5},
      {{V::Texture, I::Line}, 4}, {{V::Texture, I::Area}, 5}};
  for (auto v : kAllVariables)
    for (auto i : kAllImplantations) {
      const auto l = kb().selective_length(v, i);
      const bool blank = (v == V::Texture || v == V::Density) && i == I::Point;
      EXPECT_EQ(l.available(), !blank) << to_string(v) << "/" << to_string(i);
      if (!l.available()) continue;
      EXPECT_GE(*l.length, 3);
      EXPECT_LE(*l.length, 5);
      auto it = established.find({v, i});
      EXPECT_EQ(l.evidence == Evidence::Established, it != established.end());
      if (it != established.end()) EXPECT_EQ(*l.length, it->second);
    }
}

TEST(PairingAvailable, Examples) {
  const auto vv = kb().pairing_available(V::Value, V::Value, I::Point);
  EXPECT_TRUE(vv.available);
  EXPECT_EQ(vv.variant, SymbolVariant::BivariateChoropleth);

  const auto dd = kb().pairing_available(V::Density, V::Density, I::Area);
  EXPECT_TRUE(dd.available);
  EXPECT_EQ(dd.variant, SymbolVariant::Crosshatch);

  EXPECT_FALSE(kb().pairing_available(V::Texture, V::Size, I::Point).available);
}

TEST(PairingAvailable, VariantInvariants) {
  for (auto i : kAllImplantations)
    for (auto t : kAllVariables)
      for (auto u : kAllVariables) {
        const auto e = kb().pairing_available(t, u, i);
        if (!e.available) {
          EXPECT_FALSE(e.variant.has_value());
          continue;
        }
        EXPECT_FALSE(kb().uncertainty_only(t));
        EXPECT_EQ(e.variant == SymbolVariant::BivariateChoropleth, t == V::Value && u == V::Value);
        EXPECT_EQ(e.variant == SymbolVariant::Crosshatch,
                  t == V::Density && u == V::Density && i == I::Area);
        if (e.variant == SymbolVariant::LineWidth || e.variant == SymbolVariant::WidthWithDashLength)
          EXPECT_EQ(i, I::Line);
      }
}

TEST(SeparabilityClass, Examples) {
  const auto vs = kb().separability_class(V::Value, V::Saturation, I::Area);
  EXPECT_EQ(vs.cls, SeparabilityClass::Integral);
  EXPECT_EQ(vs.evidence, Evidence::Established);

  const auto ss = kb().separability_class(V::Size, V::Size, I::Area);
  EXPECT_EQ(ss.cls, SeparabilityClass::Configural);
  EXPECT_EQ(ss.evidence, Evidence::Established);

  const auto st = kb().separability_class(V::Size, V::Texture, I::Line);
  EXPECT_EQ(st.cls, SeparabilityClass::Asymmetric);
  EXPECT_TRUE(st.uncertain_not_recommended);
}

TEST(SeparabilityClass, UnavailablePairingThrows) {
  try {
    kb().separability_class(V::Texture, V::Size, I::Point);
    FAIL() << "expected NotAvailable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAvailable);
  }
}

TEST(SeparabilityClass, CellsAreReadIndependently) {
  // Mirror cells are separate entries; one may exist without the other.
  EXPECT_EQ(kb().separability_class(V::Value, V::Density, I::Area).cls, SeparabilityClass::Asymmetric);
  EXPECT_EQ(kb().separability_class(V::Density, V::Value, I::Area).cls, SeparabilityClass::Asymmetric);
  EXPECT_EQ(kb().separability_class(V::Value, V::Density, I::Line).cls, SeparabilityClass::Asymmetric);
  EXPECT_EQ(kb().separability_class(V::Density, V::Value, I::Line).cls, SeparabilityClass::Asymmetric);
  EXPECT_EQ(kb().separability_class(V::Value, V::Texture, I::Area).cls, SeparabilityClass::Separable);
  EXPECT_EQ(kb().separability_class(V::Texture, V::Value, I::Area).cls, SeparabilityClass::Separable);
  EXPECT_TRUE(kb().pairing_available(V::Value, V::Saturation, I::Area).available);
  EXPECT_FALSE(kb().pairing_available(V::Saturation, V::Value, I::Area).available);
  EXPECT_TRUE(kb().pairing_available(V::Value, V::Texture, I::Area).available);
  EXPECT_FALSE(kb().pairing_available(V::Texture, V::Texture, I::Area).available);
}

TEST(SeparabilityClass, UncertainCellsAreTheAsteriskedLineCells) {
  std::set<std::pair<V, V>> uncertain;
  for (auto i : kAllImplantations)
    for (const auto& a : kb().enumerate_pairings(i)) {
      const auto e = kb().separability_class(a.pairing.thematic, a.pairing.uncertainty, i);
      if (e.uncertain_not_recommended) {
        EXPECT_EQ(i, I::Line);
        uncertain.insert({a.pairing.thematic, a.pairing.uncertainty});
      }
    }
  const std::set<std::pair<V, V>> expected{{V::Size, V::Size},
                                           {V::Size, V::Texture},
                                           {V::Size, V::Density},
                                           {V::Texture, V::Size},
                                           {V::Density, V::Size}};
  EXPECT_EQ(uncertain, expected);
}

TEST(TaskRequirement, FullMapping) {
  using T = OperationalTask;
  using R = PerceptionRequirement;
  const std::map<T, R> expected{
      {T::Identify, R::Selective},           {T::Locate, R::Selective},
      {T::CompareWithin, R::Ordinal},        {T::RankCompare, R::Ordinal},
      {T::RatioCompare, R::Quantitative},    {T::Distribution, R::Associative},
      {T::WeightedDistribution, R::Dissociative}, {T::WeightedInterpretation, R::Dissociative},
      {T::Isolate, R::Separable},            {T::CompareBetween, R::Separable},
      {T::Correlate, R::Integral},           {T::Associate, R::Integral},
      {T::PrioritisedInterpretation, R::Asymmetric}, {T::AssociateAndIsolate, R::Configural},
      {T::Combine, R::Configural}};
  ASSERT_EQ(expected.size(), 15u);
  for (const auto& [task, req] : expected) EXPECT_EQ(kb().task_requirement(task), req) << to_string(task);
}

TEST(TaskRequirement, ArityPartitionsRequirements) {
  using R = PerceptionRequirement;
  const std::set<R> univariate{R::Selective, R::Ordinal, R::Quantitative, R::Associative, R::Dissociative};
  const std::set<R> bivariate{R::Separable, R::Integral, R::Asymmetric, R::Configural, R::Dissociative};
  for (const auto& t : kb().tasks()) {
    EXPECT_EQ(t.arity, intrinsic_arity(t.task));
    if (t.arity == TaskArity::Univariate)
      EXPECT_TRUE(univariate.contains(t.requirement)) << to_string(t.task);
    else
      EXPECT_TRUE(bivariate.contains(t.requirement)) << to_string(t.task);
  }
}

TEST(EnumeratePairings, CountsMatchTheAvailabilityGrids) {
  EXPECT_EQ(kb().enumerate_pairings(I::Point).size(), 9u);
  EXPECT_EQ(kb().enumerate_pairings(I::Line).size(), 24u);
  EXPECT_EQ(kb().enumerate_pairings(I::Area).size(), 21u);
  for (auto i : kAllImplantations)
    for (const auto& e : kb().enumerate_pairings(i)) EXPECT_TRUE(e.available);
}

TEST(EnumeratePairings, PrintedRowMajorOrder) {
  auto rank = [](V v, const auto& order) {
    return std::find(order.begin(), order.end(), v) - order.begin();
  };
  for (auto i : kAllImplantations) {
    const auto list = kb().enumerate_pairings(i);
    for (std::size_t k = 1; k < list.size(); ++k) {
      const auto a = std::make_pair(rank(list[k - 1].pairing.thematic, kThematicRowOrder),
                                    rank(list[k - 1].pairing.uncertainty, kUncertaintyColumnOrder));
      const auto b = std::make_pair(rank(list[k].pairing.thematic, kThematicRowOrder),
                                    rank(list[k].pairing.uncertainty, kUncertaintyColumnOrder));
      EXPECT_LT(a, b);
    }
  }
}

TEST(EnumeratePairings, ClosureWithSeparabilityTable) {
  const auto raw = raw_rules();
  for (auto i : kAllImplantations) {
    const auto listed = kb().enumerate_pairings(i);
    std::set<std::pair<std::string, std::string>> from_library;
    for (const auto& e : listed)
      from_library.emplace(to_string(e.pairing.thematic), to_string(e.pairing.uncertainty));
    std::set<std::pair<std::string, std::string>> classified;
    for (const auto& s : raw["separability"])
      if (s["implantation"] == to_string(i))
        classified.emplace(s["thematic"].get<std::string>(), s["uncertainty"].get<std::string>());
    EXPECT_EQ(from_library, classified) << to_string(i);
    EXPECT_EQ(from_library, oracle::enumerated(raw, std::string(to_string(i))));
  }
}

TEST(KnowledgeBase, EstablishedCountsPerGrid) {
  std::map<I, int> established;
  for (auto i : kAllImplantations)
    for (const auto& a : kb().enumerate_pairings(i))
      if (kb().separability_class(a.pairing.thematic, a.pairing.uncertainty, i).evidence ==
          Evidence::Established)
        ++established[i];
  EXPECT_EQ(established[I::Point], 9);
  EXPECT_EQ(established[I::Line], 0);
  EXPECT_EQ(established[I::Area], 13);
}

TEST(KnowledgeBase, QueriesArePure) {
  const auto again = KnowledgeBase::from_json(KnowledgeBase::builtin_document());
  for (auto i : kAllImplantations) {
    const auto a = kb().enumerate_pairings(i);
    const auto b = again.enumerate_pairings(i);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k], b[k]);
      EXPECT_EQ(kb().separability_class(a[k].pairing.thematic, a[k].pairing.uncertainty, i),
                again.separability_class(b[k].pairing.thematic, b[k].pairing.uncertainty, i));
    }
  }
  EXPECT_EQ(kb().checksum(), again.checksum());
}

TEST(KnowledgeBase, CanonicalRoundTripKeepsChecksum) {
  const auto canonical = kb().canonical_json();
  const auto reloaded = KnowledgeBase::from_json(canonical);
  EXPECT_EQ(reloaded.checksum(), kb().checksum());
  EXPECT_EQ(reloaded.canonical_json(), canonical);
  EXPECT_EQ(kb().checksum().rfind("sha256:", 0), 0u);
  EXPECT_EQ(kb().checksum().size(), 7u + 64u);
}

TEST(KnowledgeBase, ChecksumTracksContentNotFormatting) {
  auto raw = raw_rules();
  const auto reformatted = KnowledgeBase::from_json(raw.dump());
  EXPECT_EQ(reformatted.checksum(), kb().checksum());

  for (auto& s : raw["separability"])
    if (s["implantation"] == "Area" && s["thematic"] == "Value" && s["uncertainty"] == "Texture")
      s["class"] = "Asymmetric";
  const auto edited = KnowledgeBase::from_json(raw.dump());
  EXPECT_NE(edited.checksum(), kb().checksum());
}

TEST(KnowledgeBase, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

namespace {

void expect_invalid(const nlohmann::json& doc, const std::string& label) {
  try {
    KnowledgeBase::from_json(doc.dump());
    ADD_FAILURE() << label << ": accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RuleTableInvalid) << label << ": " << e.what();
  }
}

}  // namespace

TEST(KnowledgeBase, RejectsStructurallyInvalidDocuments) {
  {
    auto d = raw_rules();
    d["availability"].push_back({{"implantation", "Area"}, {"thematic", "Blur"},
                                 {"uncertainty", "Value"}, {"variant", nullptr}});
    d["separability"].push_back({{"implantation", "Area"}, {"thematic", "Blur"}, {"uncertainty", "Value"},
                                 {"class", "Separable"}, {"evidence", "AuthorEstimate"},
                                 {"uncertain", false}});
    expect_invalid(d, "uncertainty-only thematic");
  }
  {
    auto d = raw_rules();
    d["variables"][0]["selective_length"]["Area"]["length"] = 6;
    expect_invalid(d, "length out of range");
  }
  {
    auto d = raw_rules();
    d["separability"].erase(0);
    expect_invalid(d, "missing separability cell");
  }
  {
    auto d = raw_rules();
    d["tasks"].erase(3);
    expect_invalid(d, "missing task row");
  }
  {
    auto d = raw_rules();
    for (auto& a : d["availability"])
      if (a["thematic"] == "Value" && a["uncertainty"] == "Value") a["variant"] = nullptr;
    expect_invalid(d, "choropleth footnote dropped");
  }
  expect_invalid(nlohmann::json::object(), "empty document");
  EXPECT_THROW(KnowledgeBase::from_json("not json"), Error);
}

TEST(TableDump, LengthsAndTasks) {
  const auto lengths = kb().table_dump(TableId::Lengths);
  bool found = false;
  for (const auto& r : lengths["rows"])
    if (r["variable"] == "Value" && r["implantation"] == "Area") {
      EXPECT_EQ(r["length"], 5);
      EXPECT_EQ(r["evidence"], "Established");
      found = true;
    }
  EXPECT_TRUE(found);
  EXPECT_EQ(kb().table_dump(TableId::Tasks)["rows"].size(), 15u);
  EXPECT_EQ(kb().table_dump(TableId::Properties)["rows"].size(), 7u);
  EXPECT_EQ(kb().table_dump(TableId::Availability)["checksum"], kb().checksum());
  EXPECT_FALSE(parse_table_id("nonsense").has_value());
}

TEST(TableAudit, TranscriptionAgreesCellForCell) {
  const auto t = audit::parse_transcription(oracle::read_text(BIVMAP_TEST_FIXTURES "/tables_transcription.txt"));
  const auto r = audit::run(kb(), t);
  for (const auto& m : r.mismatches) ADD_FAILURE() << m;
  EXPECT_EQ(r.asterisks, 5);
  EXPECT_EQ(r.task_rows, 15);
  EXPECT_EQ(r.established.at("separability Point"), 9);
  EXPECT_EQ(r.established.at("separability Area"), 13);
  EXPECT_EQ(r.established.count("separability Line"), 0u);
  EXPECT_GT(r.cells, 300);
}

TEST(TableAudit, DetectsAFlippedCell) {
  auto raw = raw_rules();
  for (auto& s : raw["separability"])
    if (s["implantation"] == "Line" && s["thematic"] == "Density" && s["uncertainty"] == "Size")
      s["uncertain"] = false;
  const auto edited = KnowledgeBase::from_json(raw.dump());
  const auto t = audit::parse_transcription(oracle::read_text(BIVMAP_TEST_FIXTURES "/tables_transcription.txt"));
  const auto r = audit::run(edited, t);
  ASSERT_EQ(r.mismatches.size(), 1u);
  EXPECT_NE(r.mismatches[0].find("(Density,Size)"), std::string::npos);
}
