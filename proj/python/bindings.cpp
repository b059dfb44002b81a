#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bivmap/error.hpp"
#include "bivmap/pipeline.hpp"
#include "bivmap/resources.hpp"

namespace py = pybind11;
using namespace bivmap;

namespace {

const KnowledgeBase& rules(const std::optional<std::string>& path) {
  if (!path) return KnowledgeBase::builtin();
  // Loaded tables are kept alive for the life of the interpreter.
  static std::map<std::string, KnowledgeBase> loaded;
  auto it = loaded.find(*path);
  if (it == loaded.end()) it = loaded.emplace(*path, KnowledgeBase::load_file(*path)).first;
  return it->second;
}

BinningScheme scheme_from(const std::string& text) {
  std::vector<std::string> diag;
  auto s = binning_from_json(nlohmann::json::parse(text), "scheme", diag);
  if (!diag.empty()) throw Error(ErrorCode::InvalidRequest, diag.front(), diag);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of bivmap";

  static py::exception<Error> error(m, "BivmapError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("details") = e.details();
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("checksum", [](std::optional<std::string> path) { return rules(path).checksum(); },
        py::arg("rules") = py::none());
  m.def("version", [](std::optional<std::string> path) { return rules(path).version(); },
        py::arg("rules") = py::none());
  m.def(
      "table",
      [](const std::string& id, std::optional<std::string> path) {
        const auto t = parse_table_id(id);
        if (!t) throw Error(ErrorCode::InvalidRequest, "unknown table '" + id + "'");
        return rules(path).table_dump(*t).dump();
      },
      py::arg("id"), py::arg("rules") = py::none());
  m.def(
      "recommend",
      [](const std::string& request, std::optional<std::string> path) {
        return serialize_report(bivmap::recommend(rules(path), parse_request(request)));
      },
      py::arg("request"), py::arg("rules") = py::none());
  m.def("bin_quantile", [](const std::vector<double>& v, int k) { return bin_quantile(v, k); });
  m.def("bin_threshold",
        [](const std::vector<double>& v, const std::vector<double>& e) { return bin_threshold(v, e); });
  m.def("bin", [](const std::string& geojson, const std::string& attribute, const std::string& scheme) {
    const auto ds = load_dataset(geojson);
    return to_json(bin_attribute(ds, attribute, scheme_from(scheme)), ds).dump();
  });
  m.def(
      "render_map",
      [](const std::string& geojson, const std::string& request, std::optional<std::string> path) {
        const auto r = render_request_from_json(nlohmann::json::parse(request));
        const auto ds = apply_cv(load_dataset(geojson), r.cv);
        const auto p = prepare_render(rules(path), ds, r);
        return render_map(ds, p.thematic, p.uncertainty, p.style);
      },
      py::arg("geojson"), py::arg("request"), py::arg("rules") = py::none());
  m.def(
      "render_legend",
      [](const std::string& request, const std::string& implantation, std::optional<std::string> path) {
        const auto r = render_request_from_json(nlohmann::json::parse(request));
        const auto imp = parse_implantation(implantation);
        if (!imp) throw Error(ErrorCode::InvalidRequest, "unknown implantation '" + implantation + "'");
        return render_legend(legend_style(rules(path), *imp, r));
      },
      py::arg("request"), py::arg("implantation") = "Area", py::arg("rules") = py::none());
  m.def("casestudy", []() {
    const auto bundle = run_casestudy(KnowledgeBase::builtin(), load_dataset(resources::casestudy_geojson()),
                                      parse_request(resources::casestudy_request()));
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& f : bundle.files) files.emplace_back(f.name, f.content);
    return files;
  });
  m.def("casestudy_geojson", [] { return std::string(resources::casestudy_geojson()); });
  m.def("casestudy_request", [] { return std::string(resources::casestudy_request()); });
}
