#include <gtest/gtest.h>

#include <thread>

#include "bivmap/resources.hpp"
#include "bivmap/service.hpp"
#include "oracle.hpp"
#include "svg_probe.hpp"

using namespace bivmap;
using json = nlohmann::json;

namespace {

const KnowledgeBase& kb() { return KnowledgeBase::builtin(); }

json payload(const HttpResponse& r) { return json::parse(r.body).at("payload"); }

std::string render_body(const json& dataset_ref, const std::string& u_binning = R"({"kind":"Quantile","k":3})") {
  json j = {{"pairing", {{"thematic", "Value"}, {"uncertainty", "Blur"}}},
            {"thematic", {{"name", "TSS"}, {"binning", {{"kind", "Threshold"}, {"edges", {837, 2204}}}}}},
            {"uncertainty", {{"name", "CV"}, {"binning", json::parse(u_binning)}}},
            {"cv", {{"mean", "TSS"}, {"sd", "TSS_sd"}}}};
  j.update(dataset_ref);
  return j.dump();
}

}  // namespace

TEST(Service, HealthCarriesTheChecksum) {
  Service s(kb());
  const auto r = s.handle("GET", "/api/v1/health", "");
  EXPECT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["schema_version"], "bivmap-api/1");
  EXPECT_EQ(j["kind"], "health");
  EXPECT_EQ(j["payload"]["knowledge_base"]["checksum"], kb().checksum());
  EXPECT_EQ(r.headers.at("X-KB-Checksum"), kb().checksum());
  EXPECT_EQ(r.headers.at("X-Schema-Version"), "bivmap-api/1");
}

TEST(Service, RecommendReturnsTheReport) {
  Service s(kb());
  const auto r = s.handle("POST", "/api/v1/recommend", std::string(resources::casestudy_request()));
  ASSERT_EQ(r.status, 200) << r.body;
  const auto p = payload(r);
  EXPECT_EQ(p["schema"], "bivmap-report/1");
  EXPECT_EQ(p["ranked"].size(), 9u);
}

TEST(Service, RecommendValidationErrors) {
  Service s(kb());
  const auto bad = s.handle("POST", "/api/v1/recommend", "{nope");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(payload(bad)["code"], "InvalidRequest");
  const auto empty = s.handle("POST", "/api/v1/recommend", R"({"implantation":"Area","tasks":[]})");
  EXPECT_EQ(empty.status, 400);
  EXPECT_GE(payload(empty)["diagnostics"].size(), 2u);
}

TEST(Service, Tables) {
  Service s(kb());
  for (const char* id : {"availability", "properties", "lengths", "separability", "tasks"}) {
    const auto r = s.handle("GET", std::string("/api/v1/tables/") + id, "");
    EXPECT_EQ(r.status, 200) << id;
    EXPECT_EQ(payload(r)["table"], id);
  }
  EXPECT_EQ(s.handle("GET", "/api/v1/tables/colours", "").status, 404);
}

TEST(Service, RoutingErrors) {
  Service s(kb());
  EXPECT_EQ(s.handle("GET", "/api/v1/nothing", "").status, 404);
  EXPECT_EQ(s.handle("GET", "/elsewhere", "").status, 404);
  EXPECT_EQ(s.handle("GET", "/api/v1/recommend", "").status, 405);
  EXPECT_EQ(s.handle("POST", "/api/v1/health", "").status, 405);
}

TEST(Service, UploadThenRenderByReference) {
  Service s(kb());
  const auto up = s.handle("POST", "/api/v1/datasets", std::string(resources::casestudy_geojson()));
  ASSERT_EQ(up.status, 200) << up.body;
  const auto id = payload(up)["dataset_id"].get<std::string>();
  EXPECT_EQ(id.rfind("sha256:", 0), 0u);
  EXPECT_EQ(payload(up)["features"], 40);

  const auto again = s.handle("POST", "/api/v1/datasets", std::string(resources::casestudy_geojson()));
  EXPECT_EQ(payload(again)["dataset_id"], id);
  EXPECT_EQ(s.cache().size(), 1u);

  const auto map = s.handle("POST", "/api/v1/render/map", render_body({{"dataset_id", id}}));
  ASSERT_EQ(map.status, 200) << map.body;
  EXPECT_EQ(map.content_type, "image/svg+xml");
  EXPECT_EQ(probe::features(map.body).size(), 40u);
  EXPECT_TRUE(probe::well_formed(map.body));

  const auto legend = s.handle("POST", "/api/v1/render/legend", render_body({{"dataset_id", id}}));
  ASSERT_EQ(legend.status, 200);
  EXPECT_EQ(probe::swatch_levels(legend.body).size(), 9u);
}

TEST(Service, InlineDatasetAndDatasetFreeLegend) {
  Service s(kb());
  const auto geo = json::parse(resources::casestudy_geojson());
  const auto map = s.handle("POST", "/api/v1/render/map", render_body({{"dataset", geo}}));
  ASSERT_EQ(map.status, 200) << map.body;
  EXPECT_EQ(probe::features(map.body).size(), 40u);

  const auto legend = s.handle("POST", "/api/v1/render/legend", render_body(json::object()));
  ASSERT_EQ(legend.status, 200) << legend.body;
  EXPECT_EQ(probe::swatch_levels(legend.body).size(), 9u);

  EXPECT_EQ(s.handle("POST", "/api/v1/render/map", render_body(json::object())).status, 400);
}

TEST(Service, RenderErrors) {
  Service s(kb());
  const auto unknown = s.handle("POST", "/api/v1/render/map", render_body({{"dataset_id", "sha256:00"}}));
  EXPECT_EQ(unknown.status, 404);
  EXPECT_EQ(payload(unknown)["code"], "UnknownDataset");

  const auto geo = json::parse(resources::casestudy_geojson());
  const auto over = s.handle("POST", "/api/v1/render/map",
                             render_body({{"dataset", geo}}, R"({"kind":"Quantile","k":4})"));
  EXPECT_EQ(over.status, 400);
  EXPECT_EQ(payload(over)["code"], "BinningViolation");
  EXPECT_NE(payload(over)["message"].get<std::string>().find("Violation(4 > 3)"), std::string::npos);

  auto body = json::parse(render_body({{"dataset", geo}}));
  body["pairing"] = {{"thematic", "Blur"}, {"uncertainty", "Value"}};
  const auto na = s.handle("POST", "/api/v1/render/map", body.dump());
  EXPECT_EQ(na.status, 400);
  EXPECT_EQ(payload(na)["code"], "NotAvailable");

  body = json::parse(render_body({{"dataset", geo}}));
  body["thematic"]["name"] = "missing";
  EXPECT_EQ(payload(s.handle("POST", "/api/v1/render/map", body.dump()))["code"], "MissingAttribute");
}

TEST(DatasetCache, EvictsLeastRecentlyUsed) {
  DatasetCache cache(100);
  auto ds = std::make_shared<const Dataset>();
  cache.put(ds, 40, "a");
  cache.put(ds, 40, "b");
  ASSERT_TRUE(cache.get("a"));  // a is now most recent
  cache.put(ds, 40, "c");
  EXPECT_TRUE(cache.get("a"));
  EXPECT_FALSE(cache.get("b"));
  EXPECT_TRUE(cache.get("c"));
  EXPECT_EQ(cache.bytes(), 80u);
  cache.put(ds, 500, "huge");
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_TRUE(cache.get("huge"));
}

TEST(Service, ConcurrentRequests) {
  Service s(kb());
  std::vector<std::thread> pool;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i)
    pool.emplace_back([&] {
      for (int k = 0; k < 5; ++k)
        if (s.handle("POST", "/api/v1/datasets", std::string(resources::casestudy_geojson())).status == 200)
          ++ok;
    });
  for (auto& t : pool) t.join();
  EXPECT_EQ(ok, 20);
  EXPECT_EQ(s.cache().size(), 1u);
}
