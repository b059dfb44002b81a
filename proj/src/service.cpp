#include "bivmap/service.hpp"

#include "bivmap/error.hpp"
#include "bivmap/pipeline.hpp"
#include "bivmap/recommender.hpp"
#include "bivmap/renderer.hpp"

namespace bivmap {

namespace {

constexpr std::string_view kPrefix = "/api/v1";

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::RuleTableInvalid:
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

nlohmann::ordered_json error_payload(std::string_view code, const std::string& message,
                                     const std::vector<std::string>& diagnostics) {
  nlohmann::ordered_json p;
  p["code"] = code;
  p["message"] = message;
  p["diagnostics"] = diagnostics;
  return p;
}

nlohmann::json parse_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("body is not valid JSON: ") + e.what(),
                {"body: not valid JSON"});
  }
}

std::string text_of(const nlohmann::json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

struct Upload {
  Dataset dataset;
  std::size_t bytes;
};

// Either a bare FeatureCollection or {geojson, attributes_csv?, join_key?}.
Upload dataset_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_object() && j.contains("type")) {
    auto text = j.dump();
    return {load_dataset(text), text.size()};
  }
  if (j.is_string()) {
    auto text = j.get<std::string>();
    return {load_dataset(text), text.size()};
  }
  if (!j.is_object() || !j.contains("geojson"))
    throw Error(ErrorCode::InvalidRequest, field + ": expected a FeatureCollection or {geojson, ...}",
                {field + ": expected a FeatureCollection or {geojson, attributes_csv, join_key}"});
  const auto geo = text_of(j["geojson"]);
  std::optional<std::string> csv;
  std::string key = "id";
  if (j.contains("attributes_csv")) {
    if (!j["attributes_csv"].is_string())
      throw Error(ErrorCode::InvalidRequest, field + ".attributes_csv: expected string",
                  {field + ".attributes_csv: expected string"});
    csv = j["attributes_csv"].get<std::string>();
  }
  if (j.contains("join_key")) {
    if (!j["join_key"].is_string())
      throw Error(ErrorCode::InvalidRequest, field + ".join_key: expected string",
                  {field + ".join_key: expected string"});
    key = j["join_key"].get<std::string>();
  }
  auto ds = csv ? load_dataset(geo, std::string_view(*csv), key) : load_dataset(geo, std::nullopt, key);
  return {std::move(ds), geo.size() + (csv ? csv->size() : 0)};
}

std::string dataset_id(const Dataset& ds) { return "sha256:" + sha256_hex(dataset_to_geojson(ds)); }

}  // namespace

std::string DatasetCache::put(std::shared_ptr<const Dataset> ds, std::size_t bytes,
                              const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = slots_.find(id); it != slots_.end()) {
    order_.splice(order_.begin(), order_, it->second.order);
    return id;
  }
  order_.push_front(id);
  slots_.emplace(id, Slot{std::move(ds), bytes, order_.begin()});
  used_ += bytes;
  // The newest entry always stays, even when it alone exceeds the cap.
  while (used_ > capacity_ && order_.size() > 1) {
    const auto victim = order_.back();
    used_ -= slots_.at(victim).bytes;
    slots_.erase(victim);
    order_.pop_back();
  }
  return id;
}

std::shared_ptr<const Dataset> DatasetCache::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second.order);
  return it->second.dataset;
}

std::size_t DatasetCache::size() const {
  std::lock_guard lock(mutex_);
  return slots_.size();
}

std::size_t DatasetCache::bytes() const {
  std::lock_guard lock(mutex_);
  return used_;
}

Service::Service(const KnowledgeBase& kb, ServiceOptions options)
    : kb_(kb), cache_(options.cache_bytes) {}

void Service::stamp(HttpResponse& r) const {
  r.headers["X-Schema-Version"] = std::string(kApiSchema);
  r.headers["X-KB-Checksum"] = kb_.checksum();
}

HttpResponse Service::envelope(int status, std::string_view kind,
                               nlohmann::ordered_json payload) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kApiSchema;
  j["kind"] = kind;
  j["payload"] = std::move(payload);
  HttpResponse r;
  r.status = status;
  r.body = j.dump(2) + "\n";
  stamp(r);
  return r;
}

HttpResponse Service::svg(std::string document) const {
  HttpResponse r;
  r.content_type = "image/svg+xml";
  r.body = std::move(document);
  stamp(r);
  return r;
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::string& body) const {
  try {
    if (path.rfind(kPrefix, 0) != 0)
      return envelope(404, "error", error_payload("NotFound", "no route " + path, {}));
    const auto route = path.substr(kPrefix.size());
    auto allow = [&](const char* m) { return method == m; };
    auto not_allowed = [&] {
      return envelope(405, "error",
                      error_payload("MethodNotAllowed", method + " not allowed on " + path, {}));
    };
    if (route == "/health") return allow("GET") ? health() : not_allowed();
    if (route == "/recommend") return allow("POST") ? recommend(body) : not_allowed();
    if (route == "/datasets") return allow("POST") ? upload(body) : not_allowed();
    if (route == "/render/map") return allow("POST") ? render(body, false) : not_allowed();
    if (route == "/render/legend") return allow("POST") ? render(body, true) : not_allowed();
    if (route.rfind("/tables/", 0) == 0)
      return allow("GET") ? tables(route.substr(8)) : not_allowed();
    return envelope(404, "error", error_payload("NotFound", "no route " + path, {}));
  } catch (const Error& e) {
    auto details = e.details();
    if (details.empty()) details.push_back(e.what());
    return envelope(status_for(e.code()), "error", error_payload(to_string(e.code()), e.what(), details));
  } catch (const std::exception& e) {
    return envelope(500, "error", error_payload("Internal", e.what(), {}));
  }
}

HttpResponse Service::health() const {
  nlohmann::ordered_json p;
  p["status"] = "ok";
  p["knowledge_base"] = {{"version", kb_.version()}, {"checksum", kb_.checksum()}};
  p["datasets_cached"] = cache_.size();
  return envelope(200, "health", p);
}

HttpResponse Service::recommend(const std::string& body) const {
  const auto request = parse_request(body);
  const auto report = bivmap::recommend(kb_, request);
  return envelope(200, "report", to_json(report));
}

HttpResponse Service::tables(const std::string& id) const {
  const auto table = parse_table_id(id);
  if (!table)
    return envelope(404, "error",
                    error_payload("NotFound", "unknown table '" + id + "'",
                                  {"id: expected availability | properties | lengths | "
                                   "separability | tasks"}));
  return envelope(200, "table", kb_.table_dump(*table));
}

HttpResponse Service::upload(const std::string& body) const {
  auto up = dataset_from_json(parse_body(body), "body");
  auto ds = std::make_shared<const Dataset>(std::move(up.dataset));
  const auto id = cache_.put(ds, up.bytes, dataset_id(*ds));
  nlohmann::ordered_json p;
  p["dataset_id"] = id;
  p["features"] = ds->features.size();
  p["implantation"] = to_string(ds->implantation);
  std::vector<std::string> attrs;
  if (!ds->features.empty())
    for (const auto& [name, value] : ds->features.front().attributes) attrs.push_back(name);
  p["attributes"] = attrs;
  return envelope(200, "dataset", p);
}

HttpResponse Service::render(const std::string& body, bool legend_only) const {
  const auto j = parse_body(body);
  const auto request = render_request_from_json(j);

  std::shared_ptr<const Dataset> ds;
  if (j.contains("dataset_id")) {
    if (!j["dataset_id"].is_string())
      throw Error(ErrorCode::InvalidRequest, "dataset_id: expected string", {"dataset_id: expected string"});
    const auto id = j["dataset_id"].get<std::string>();
    ds = cache_.get(id);
    if (!ds)
      return envelope(404, "error",
                      error_payload("UnknownDataset", "unknown dataset '" + id + "'",
                                    {"dataset_id: not uploaded in this session"}));
  } else if (j.contains("dataset")) {
    ds = std::make_shared<const Dataset>(dataset_from_json(j["dataset"], "dataset").dataset);
  }

  if (!ds) {
    if (!legend_only)
      throw Error(ErrorCode::InvalidRequest, "dataset or dataset_id required",
                  {"dataset: required (inline FeatureCollection) unless dataset_id is given"});
    const auto imp = request.implantation.value_or(Implantation::Area);
    return svg(render_legend(legend_style(kb_, imp, request)));
  }
  const auto data = apply_cv(*ds, request.cv);
  const auto prepared = prepare_render(kb_, data, request);
  if (legend_only) return svg(render_legend(prepared.style));
  return svg(render_map(data, prepared.thematic, prepared.uncertainty, prepared.style));
}

}  // namespace bivmap
