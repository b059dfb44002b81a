#include <cstdio>

#include "bivmap/service.hpp"
#include "httplib.h"

namespace bivmap {

int run_server(const Service& service, const ServerOptions& options) {
  httplib::Server server;
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/api/v1/.*)", forward);
  server.Post(R"(/api/v1/.*)", forward);
  server.Put(R"(/api/v1/.*)", forward);
  server.Delete(R"(/api/v1/.*)", forward);
  if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir)) {
    std::fprintf(stderr, "static directory %s not found\n", options.static_dir.c_str());
    return 2;
  }
  if (!server.bind_to_port(options.bind, options.port)) {
    std::fprintf(stderr, "cannot bind %s:%d\n", options.bind.c_str(), options.port);
    return 2;
  }
  std::fprintf(stderr, "bivmap service listening on http://%s:%d\n", options.bind.c_str(),
               options.port);
  return server.listen_after_bind() ? 0 : 2;
}

}  // namespace bivmap
