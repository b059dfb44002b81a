// bivmap: recommend, bin, render and reproduce bivariate uncertainty maps.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bivmap/data_model.hpp"
#include "bivmap/error.hpp"
#include "bivmap/knowledge_base.hpp"
#include "bivmap/pipeline.hpp"
#include "bivmap/recommender.hpp"
#include "bivmap/renderer.hpp"
#include "bivmap/resources.hpp"
#include "bivmap/service.hpp"

namespace fs = std::filesystem;
using namespace bivmap;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_bundle(const fs::path& dir, const std::vector<OutputFile>& files) {
  make_dir(dir);
  for (const auto& f : files) write_file(dir / f.name, f.content);
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidRequest, what + " is not valid JSON: " + e.what(),
                {what + ": not valid JSON"});
  }
}

struct Globals {
  std::string rules;
  std::string config;
};

struct Config {
  PaletteConfig palette;
  ServerOptions server;
};

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  const auto j = parse_json(read_file(path), path);
  std::vector<std::string> diag;
  c.palette = palette_from_json(j, diag);
  if (j.contains("service")) {
    const auto& s = j["service"];
    if (s.contains("port")) {
      if (s["port"].is_number_integer())
        c.server.port = s["port"].get<int>();
      else
        diag.push_back("service.port: expected integer");
    }
    if (s.contains("bind")) {
      if (s["bind"].is_string())
        c.server.bind = s["bind"].get<std::string>();
      else
        diag.push_back("service.bind: expected string");
    }
  }
  if (!diag.empty()) throw Error(ErrorCode::InvalidRequest, "invalid config " + path, diag);
  return c;
}

const KnowledgeBase& knowledge_base(const Globals& g) {
  static std::optional<KnowledgeBase> loaded;
  if (g.rules.empty()) return KnowledgeBase::builtin();
  if (!loaded) loaded = KnowledgeBase::from_json(read_file(g.rules));
  return *loaded;
}

Dataset load_data(const std::string& data, const std::string& csv, const std::string& join_key) {
  const auto geo = data.empty() ? std::string(resources::casestudy_geojson()) : read_file(data);
  if (csv.empty()) return load_dataset(geo, std::nullopt, join_key);
  const auto table = read_file(csv);
  return load_dataset(geo, std::string_view(table), join_key);
}

RankingWeights parse_weights(const std::string& spec) {
  std::vector<double> w;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      w.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidRequest, "--weights: '" + part + "' is not a number",
                  {"--weights: expected w1,w2,w3"});
    }
  }
  if (w.size() != 3)
    throw Error(ErrorCode::InvalidRequest, "--weights expects three comma-separated numbers",
                {"--weights: expected w1,w2,w3"});
  for (double x : w)
    if (x < 0) throw Error(ErrorCode::InvalidRequest, "--weights must be >= 0", {"--weights: negative"});
  if (w[0] + w[1] + w[2] == 0)
    throw Error(ErrorCode::InvalidRequest, "--weights must not all be zero", {"--weights: all zero"});
  return {w[0], w[1], w[2]};
}

BinningScheme parse_scheme(const std::string& spec) {
  const auto colon = spec.find(':');
  const auto kind = spec.substr(0, colon);
  const auto arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  auto bad = [&] {
    return Error(ErrorCode::InvalidRequest,
                 "--scheme '" + spec + "': expected threshold:E1,E2,... | quantile:K | continuous",
                 {"--scheme: malformed"});
  };
  try {
    if (kind == "continuous" && arg.empty()) return BinningScheme::continuous();
    if (kind == "quantile") {
      std::size_t used = 0;
      const int k = std::stoi(arg, &used);
      if (used != arg.size()) throw bad();
      return BinningScheme::quantile(k);
    }
    if (kind == "threshold") {
      std::vector<double> edges;
      std::stringstream ss(arg);
      for (std::string part; std::getline(ss, part, ',');) {
        std::size_t used = 0;
        edges.push_back(std::stod(part, &used));
        if (used != part.size()) throw bad();
      }
      return BinningScheme::threshold(edges);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
  throw bad();
}

void print_diagnostics(const Error& e) {
  std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
  for (const auto& d : e.details()) std::fprintf(stderr, "  - %s\n", d.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design engine for bivariate maps of a thematic estimate and its uncertainty"};
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--rules", g.rules, "Rule-table document to load instead of the built-in one");
  app.add_option("--config", g.config, "JSON config with palette, canvas and service keys");

  // recommend
  auto* rec = app.add_subcommand("recommend", "Run the five-step recommendation for a design request");
  std::string rec_request, rec_out, rec_weights;
  bool rec_uncertain = false;
  rec->add_option("--request", rec_request, "Design request JSON")->required();
  rec->add_option("--out", rec_out, "Write the full report here");
  rec->add_flag("--include-uncertain", rec_uncertain, "Admit classifications marked uncertain");
  rec->add_option("--weights", rec_weights, "Ranking weights intuitiveness,performance,preference");

  // bin
  auto* bin = app.add_subcommand("bin", "Classify one attribute of a dataset");
  std::string bin_data, bin_csv, bin_key = "id", bin_attr, bin_scheme, bin_cv, bin_out;
  bin->add_option("--data", bin_data, "GeoJSON FeatureCollection (default: bundled fixture)");
  bin->add_option("--csv", bin_csv, "Attribute table joined on --join-key");
  bin->add_option("--join-key", bin_key, "Join column");
  bin->add_option("--attribute", bin_attr, "Attribute to classify")->required();
  bin->add_option("--scheme", bin_scheme, "threshold:E1,E2,... | quantile:K | continuous")->required();
  bin->add_option("--cv", bin_cv, "Derive a CV attribute first: MEAN,SD[,NAME]");
  bin->add_option("--out", bin_out, "Write binned JSON here (default: standard output)");

  // render
  auto* ren = app.add_subcommand("render", "Render one map or legend");
  std::string ren_data, ren_csv, ren_key = "id", ren_request, ren_out, ren_cv;
  bool ren_legend = false;
  ren->add_option("--data", ren_data, "GeoJSON FeatureCollection (default: bundled fixture)");
  ren->add_option("--csv", ren_csv, "Attribute table joined on --join-key");
  ren->add_option("--join-key", ren_key, "Join column");
  ren->add_option("--request,--style", ren_request, "Render request JSON")->required();
  ren->add_option("--out", ren_out, "Output SVG")->required();
  ren->add_option("--cv", ren_cv, "Derive a CV attribute first: MEAN,SD[,NAME]");
  ren->add_flag("--legend", ren_legend, "Write only the legend");

  // ensemble
  auto* ens = app.add_subcommand("ensemble", "Render every accepted pairing under each binning scheme");
  std::string ens_data, ens_csv, ens_key = "id", ens_request, ens_outdir, ens_cv;
  ens->add_option("--data", ens_data, "GeoJSON FeatureCollection")->required();
  ens->add_option("--csv", ens_csv, "Attribute table joined on --join-key");
  ens->add_option("--join-key", ens_key, "Join column");
  ens->add_option("--request", ens_request, "Design request JSON")->required();
  ens->add_option("--outdir", ens_outdir, "Output directory")->required();
  ens->add_option("--cv", ens_cv, "Derive a CV attribute first: MEAN,SD[,NAME]");

  // tables
  auto* tab = app.add_subcommand("tables", "Dump the rule tables");
  std::string tab_id, tab_out;
  tab->add_option("--id", tab_id, "availability | properties | lengths | separability | tasks");
  tab->add_option("--out", tab_out, "Output file (default: standard output)");

  // casestudy
  auto* cs = app.add_subcommand("casestudy", "Reproduce the sediment case study");
  std::string cs_outdir, cs_data, cs_request, cs_mean = "TSS", cs_sd = "TSS_sd";
  cs->add_option("--outdir", cs_outdir, "Output directory")->required();
  cs->add_option("--data", cs_data, "Sub-catchment GeoJSON (default: bundled synthetic fixture)");
  cs->add_option("--request", cs_request, "Design request (default: bundled case-study request)");
  cs->add_option("--mean", cs_mean, "Mean attribute");
  cs->add_option("--sd", cs_sd, "Standard deviation attribute");

  // serve
  auto* srv = app.add_subcommand("serve", "Start the HTTP service");
  std::optional<int> srv_port;
  std::optional<std::string> srv_bind;
  std::string srv_static;
  srv->add_option("--port", srv_port, "Port (default 8787)");
  srv->add_option("--bind", srv_bind, "Bind address (default 127.0.0.1)");
  srv->add_option("--static", srv_static, "Directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const auto config = load_config(g.config);
    const auto& kb = knowledge_base(g);

    if (*rec) {
      auto request = parse_request(read_file(rec_request));
      if (rec_uncertain) request.include_uncertain_classifications = true;
      if (!rec_weights.empty()) request.weights = parse_weights(rec_weights);
      const auto report = recommend(kb, request);
      if (!rec_out.empty()) write_file(rec_out, serialize_report(report));
      std::cout << report_summary(report);
      return kOk;
    }

    if (*bin) {
      auto ds = load_data(bin_data, bin_csv, bin_key);
      if (!bin_cv.empty()) ds = apply_cv(std::move(ds), parse_cv_spec(bin_cv));
      if (!ds.has_attribute(bin_attr))
        throw Error(ErrorCode::MissingAttribute, "dataset has no attribute '" + bin_attr + "'",
                    {bin_attr});
      const auto b = bin_attribute(ds, bin_attr, parse_scheme(bin_scheme));
      const auto text = to_json(b, ds).dump(2) + "\n";
      if (bin_out.empty())
        std::cout << text;
      else
        write_file(bin_out, text);
      return kOk;
    }

    if (*ren) {
      const auto body = parse_json(read_file(ren_request), ren_request);
      auto request = render_request_from_json(body);
      if (!body.contains("config")) request.palette = config.palette;
      if (!ren_cv.empty()) request.cv = parse_cv_spec(ren_cv);
      const auto ds = apply_cv(load_data(ren_data, ren_csv, ren_key), request.cv);
      const auto prepared = prepare_render(kb, ds, request);
      write_file(ren_out, ren_legend ? render_legend(prepared.style)
                                     : render_map(ds, prepared.thematic, prepared.uncertainty,
                                                  prepared.style));
      return kOk;
    }

    if (*ens) {
      const auto request = parse_request(read_file(ens_request));
      auto ds = load_data(ens_data, ens_csv, ens_key);
      if (!ens_cv.empty()) ds = apply_cv(std::move(ds), parse_cv_spec(ens_cv));
      const auto bundle = build_ensemble(kb, ds, request, config.palette);
      write_bundle(ens_outdir, bundle.files);
      std::cout << report_summary(bundle.primary);
      std::cout << "wrote " << bundle.files.size() << " files to " << ens_outdir << "\n";
      return kOk;
    }

    if (*tab) {
      std::string text;
      if (tab_id.empty()) {
        text = kb.canonical_json();
      } else {
        const auto id = parse_table_id(tab_id);
        if (!id)
          throw Error(ErrorCode::InvalidRequest, "unknown table '" + tab_id + "'",
                      {"--id: expected availability | properties | lengths | separability | tasks"});
        text = kb.table_dump(*id).dump(2) + "\n";
      }
      if (tab_out.empty())
        std::cout << text;
      else
        write_file(tab_out, text);
      return kOk;
    }

    if (*cs) {
      // Fail on an unwritable directory before doing any work.
      make_dir(cs_outdir);
      const auto raw = load_data(cs_data, "", "id");
      const auto request = parse_request(cs_request.empty() ? std::string(resources::casestudy_request())
                                                            : read_file(cs_request));
      CaseStudyOptions options;
      options.mean_attribute = cs_mean;
      options.sd_attribute = cs_sd;
      options.cv_attribute = request.uncertainty.name;
      options.palette = config.palette;
      const auto bundle = run_casestudy(kb, raw, request, options);
      write_bundle(cs_outdir, bundle.files);
      std::cout << report_summary(bundle.report);
      std::cout << "wrote " << bundle.files.size() << " files to " << cs_outdir << "\n";
      return kOk;
    }

    if (*srv) {
      auto options = config.server;
      if (srv_port) options.port = *srv_port;
      if (srv_bind) options.bind = *srv_bind;
      options.static_dir = srv_static;
      Service service(kb);
      return run_server(service, options);
    }
  } catch (const Error& e) {
    print_diagnostics(e);
    return e.code() == ErrorCode::Io ? kIo : kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  }
  return kOk;
}
