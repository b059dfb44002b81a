#pragma once

#include <cstddef>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>

#include "bivmap/data_model.hpp"
#include "bivmap/knowledge_base.hpp"

namespace bivmap {

inline constexpr std::string_view kApiSchema = "bivmap-api/1";

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

// Content-addressed dataset store with least-recently-used eviction once
// the summed document sizes exceed the cap.
class DatasetCache {
 public:
  explicit DatasetCache(std::size_t capacity_bytes) : capacity_(capacity_bytes) {}

  // Returns the id; inserting known content only refreshes its recency.
  std::string put(std::shared_ptr<const Dataset> ds, std::size_t bytes, const std::string& id);
  std::shared_ptr<const Dataset> get(const std::string& id);
  std::size_t size() const;
  std::size_t bytes() const;

 private:
  struct Slot {
    std::shared_ptr<const Dataset> dataset;
    std::size_t bytes;
    std::list<std::string>::iterator order;
  };
  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::size_t used_ = 0;
  std::list<std::string> order_;  // most recent first
  std::unordered_map<std::string, Slot> slots_;
};

struct ServiceOptions {
  std::size_t cache_bytes = 256u * 1024u * 1024u;
};

// HTTP facade over the recommender, rule tables and renderer. `handle` is
// transport-free so it can be exercised without sockets; all handlers are
// safe to call concurrently.
class Service {
 public:
  explicit Service(const KnowledgeBase& kb, ServiceOptions options = {});

  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::string& body) const;

  DatasetCache& cache() const { return cache_; }

 private:
  HttpResponse recommend(const std::string& body) const;
  HttpResponse tables(const std::string& id) const;
  HttpResponse health() const;
  HttpResponse upload(const std::string& body) const;
  HttpResponse render(const std::string& body, bool legend_only) const;

  HttpResponse envelope(int status, std::string_view kind, nlohmann::ordered_json payload) const;
  HttpResponse svg(std::string document) const;
  void stamp(HttpResponse& r) const;

  const KnowledgeBase& kb_;
  mutable DatasetCache cache_;
};

struct ServerOptions {
  std::string bind = "127.0.0.1";
  int port = 8787;
  std::string static_dir;  // served at "/" when set
};

// Blocks serving HTTP until the process is stopped. Returns non-zero when
// the socket cannot be bound.
int run_server(const Service& service, const ServerOptions& options);

}  // namespace bivmap
