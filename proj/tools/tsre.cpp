// tsre: command-line front end for the two-spin random ensemble lab.
//
// Exit codes: 0 success, 2 configuration error, 3 degeneracy warning,
// 4 unsupported topology, 5 solver failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "tsre/dmrg.hpp"
#include "tsre/errors.hpp"
#include "tsre/gauge.hpp"
#include "tsre/harness.hpp"
#include "tsre/serialize.hpp"

namespace fs = std::filesystem;
using namespace tsre;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitTopology = 4;
constexpr int kExitSolver = 5;
constexpr const char* kVersion = "tsre 1.0.0";

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  bool resume = false;
  std::string preset;
};

int resolve_workers(const Globals& g) {
  if (g.workers) return *g.workers;
  if (const char* env = std::getenv("TSRE_WORKERS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("TSRE_WORKERS is not an integer: ") + env);
    }
  }
  return 0;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// Write-then-rename so a crash never leaves a half-written manifest.
void write_json_atomic(const fs::path& path, const Json& j) {
  const fs::path tmp = path.string() + ".tmp";
  write_json_file(tmp, j);
  fs::rename(tmp, path);
}

fs::path out_dir(const Globals& g, const fs::path& fallback) {
  const fs::path dir = g.out.empty() ? fallback : fs::path(g.out);
  if (!dir.empty()) fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::optional<int> count;
  std::uint64_t first = 0;
};

int cmd_sample(const Globals& g, const SampleArgs& a) {
  if (g.config.empty()) throw ConfigError("sample needs --config with a graph description");
  const Json doc = read_json_file(g.config);
  const Json& graph_doc = doc.contains("graph") ? doc.at("graph") : doc;
  auto graph = std::make_shared<InteractionGraph>(graph_from_json(graph_doc));
  const std::uint64_t seed = g.seed ? *g.seed : doc.value("seed", std::uint64_t{0});
  const int count = a.count ? *a.count : doc.value("count", 1);
  if (count < 1) throw ConfigError("count must be >= 1");
  const fs::path dir = out_dir(g, ".");
  for (int i = 0; i < count; ++i) {
    const std::uint64_t index = a.first + static_cast<std::uint64_t>(i);
    char name[64];
    std::snprintf(name, sizeof name, "sample_%06llu.json", static_cast<unsigned long long>(index));
    write_json_file(dir / name, sample_to_json(sample(graph, seed, index)));
    std::cout << (dir / name).string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------- canonicalize

int cmd_canonicalize(const Globals& g, const std::string& file) {
  const TsreSample s = sample_from_json(read_json_file(file));
  const CanonicalForm form = canonicalize(s);
  const fs::path dir = out_dir(g, fs::path(file).parent_path());
  const fs::path target = dir / (fs::path(file).stem().string() + ".canonical.json");
  write_json_file(target, canonical_to_json(form));
  std::cout << "wrote " << target.string() << '\n'
            << "max_asymmetry " << format_number(form.max_asymmetry) << '\n'
            << "first_bond_offdiagonal " << format_number(form.first_bond_offdiagonal) << '\n'
            << "reconstruction_residual " << format_number(form.reconstruction_residual) << '\n'
            << "free_parameters " << free_parameter_count(form) << '\n';
  if (form.degenerate) {
    std::cerr << "warning: degenerate singular values; canonical form is not unique\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

// ----------------------------------------------------------------- solve

struct SolveArgs {
  std::string method = "exact";
  std::string normalization = "spin_half";
  bool no_gap = false;
  int chi_max = 64;
  double penalty_weight = 0.0;
  std::string export_dense;
  std::string checkpoint;
};

Json record_json(const EnsembleRecord& r) { return Json::parse(to_jsonl(r)); }

int cmd_solve(const Globals& g, const SolveArgs& a, const std::string& file) {
  const TsreSample s = sample_from_json(read_json_file(file));
  SweepConfig cfg;
  cfg.solver.method = method_from_string(a.method);
  cfg.solver.dmrg.chi_max = a.chi_max;
  cfg.solver.penalty_weight = a.penalty_weight;
  cfg.normalization = spin_normalization_from_string(a.normalization);
  cfg.observables.gap = !a.no_gap;
  if (cfg.solver.method == Method::dmrg && !s.graph->is_chain())
    throw UnsupportedTopologyError("DMRG supports open chains only");
  if (!a.export_dense.empty()) export_dense(HamiltonianOperator(s, cfg.normalization), a.export_dense);

  EnsembleRecord rec;
  try {
    rec = solve_sample(cfg, s);
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ExcitedStateFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  if (!a.checkpoint.empty()) {
    if (cfg.solver.method != Method::dmrg) throw ConfigError("--checkpoint needs --method dmrg");
    const DmrgResult r = dmrg_ground(build_mpo(s, cfg.normalization), cfg.solver.dmrg);
    save_checkpoint(r.mps, {s.seed, s.realization_index, r.diagnostics.half_sweep_energies}, a.checkpoint);
  }
  const Json j = record_json(rec);
  std::cout << j.dump(2) << '\n';
  if (!g.out.empty())
    write_json_file(out_dir(g, ".") / (fs::path(file).stem().string() + ".solution.json"), j);
  if (rec.degenerate_flag) {
    std::cerr << "warning: lowest pair is degenerate within tolerance\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

// ----------------------------------------------------------------- sweep

std::string group_key(int n, double lambda) { return std::to_string(n) + "|" + format_number(lambda); }

Json manifest_groups(const SweepConfig& cfg, const std::map<std::string, std::size_t>& done) {
  Json groups = Json::array();
  for (int n : cfg.n_list)
    for (double l : cfg.lambda_list) {
      const auto it = done.find(group_key(n, l));
      Json e = {{"n", n}, {"lambda", number12(l)}, {"status", it == done.end() ? "pending" : "complete"}};
      if (it != done.end()) e["records"] = it->second;
      groups.push_back(e);
    }
  return groups;
}

void write_records(const fs::path& csv, const fs::path& jsonl, const std::vector<EnsembleRecord>& records) {
  write_csv(csv, records);
  std::ofstream os(jsonl);
  if (!os) throw ResourceError("cannot write " + jsonl.string());
  for (const auto& r : records) os << to_jsonl(r) << '\n';
}

int cmd_sweep(const Globals& g) {
  SweepConfig cfg;
  if (!g.preset.empty() && !g.config.empty()) throw ConfigError("give either --preset or --config, not both");
  if (!g.preset.empty())
    cfg = preset(g.preset);
  else if (!g.config.empty())
    cfg = sweep_config_from_json(read_json_file(g.config));
  else
    throw ConfigError("sweep needs --preset or --config");
  if (g.seed) cfg.master_seed = *g.seed;
  cfg.validate();
  const int workers = resolve_workers(g);

  const fs::path dir = out_dir(g, "tsre-run");
  const fs::path manifest_path = dir / "manifest.json";
  const fs::path csv = dir / "records.csv";
  const fs::path jsonl = dir / "records.jsonl";
  const Json config_json = sweep_config_to_json(cfg);

  std::map<std::string, std::size_t> done;
  std::vector<EnsembleRecord> kept;
  Json manifest;
  if (g.resume) {
    if (!fs::exists(manifest_path)) throw ConfigError("--resume: no manifest in " + dir.string());
    manifest = read_json_file(manifest_path);
    if (manifest.value("config", Json()) != config_json)
      throw ConfigError("--resume: configuration differs from the manifest");
    for (const auto& e : manifest.at("groups"))
      if (e.value("status", "") == "complete")
        done[group_key(e.at("n").get<int>(), e.at("lambda").get<double>())] = e.value("records", std::size_t{0});
    // Rows of groups that never reached "complete" are dropped and recomputed.
    if (fs::exists(jsonl))
      for (auto& r : read_jsonl(jsonl))
        if (done.count(group_key(r.n, r.lambda))) kept.push_back(std::move(r));
  } else {
    manifest = Json::object();
    manifest["started_at"] = timestamp();
  }
  write_records(csv, jsonl, kept);

  manifest["artifact_version"] = kVersion;
  manifest["config"] = config_json;
  manifest["master_seed"] = cfg.master_seed;
  manifest["workers"] = workers;
  manifest["outputs"] = {{"csv", csv.filename().string()}, {"jsonl", jsonl.filename().string()}};
  manifest["warnings"] = cfg.warnings();
  manifest["status"] = "running";
  manifest["groups"] = manifest_groups(cfg, done);
  manifest.erase("finished_at");
  write_json_atomic(manifest_path, manifest);
  for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';

  std::ofstream csv_out(csv, std::ios::app), jsonl_out(jsonl, std::ios::app);
  const auto on_group = [&](int n, double lambda, const std::vector<EnsembleRecord>& records) {
    for (const auto& r : records) {
      csv_out << to_csv_row(r) << '\n';
      jsonl_out << to_jsonl(r) << '\n';
    }
    csv_out.flush();
    jsonl_out.flush();
    done[group_key(n, lambda)] = records.size();
    manifest["groups"] = manifest_groups(cfg, done);
    write_json_atomic(manifest_path, manifest);
    std::size_t failed = 0;
    for (const auto& r : records) failed += !r.ok();
    std::cerr << "N=" << n << " lambda=" << format_number(lambda) << ": " << records.size() << " records, "
              << failed << " failed\n";
  };
  const auto skip = [&](int n, double lambda) { return done.count(group_key(n, lambda)) > 0; };
  run_sweep(cfg, workers, on_group, skip);
  csv_out.close();
  jsonl_out.close();

  // Canonical order so interrupted and uninterrupted runs give identical files.
  std::vector<EnsembleRecord> all = read_jsonl(jsonl);
  sort_records(all);
  write_records(csv, jsonl, all);
  std::size_t failures = 0;
  for (const auto& r : all) failures += !r.ok();
  manifest["status"] = "complete";
  manifest["finished_at"] = timestamp();
  manifest["summary"] = {{"records", all.size()}, {"successes", all.size() - failures}, {"failures", failures}};
  write_json_atomic(manifest_path, manifest);
  std::cerr << all.size() << " records, " << failures << " failures\n";
  if (failures > 0) std::cerr << "warning: " << failures << " records flagged with errors (see records.csv)\n";
  return kExitOk;
}

// --------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string analysis;
  std::string records;
  std::string fit;
  std::optional<int> n;
  std::optional<double> lambda;
  int bins = 40;
  double hist_max = 4.0;
  std::optional<double> r_min, r_max;
  double lambda_min = 0.1, lambda_max = 1.0;
  double k = 4.0, lambda_star = 4.0;
};

/// Fills unset fields from an analysis-spec JSON document.
void merge_spec(AnalyzeArgs& a, const Json& j) {
  if (a.analysis.empty()) a.analysis = j.value("analysis", "");
  if (a.records.empty()) a.records = j.value("records", "");
  if (a.fit.empty()) a.fit = j.value("fit", "");
  if (!a.n && j.contains("n")) a.n = j["n"].get<int>();
  if (!a.lambda && j.contains("lambda")) a.lambda = j["lambda"].get<double>();
  if (!a.r_min && j.contains("r_min")) a.r_min = j["r_min"].get<double>();
  if (!a.r_max && j.contains("r_max")) a.r_max = j["r_max"].get<double>();
  a.bins = j.value("bins", a.bins);
  a.lambda_min = j.value("lambda_min", a.lambda_min);
  a.lambda_max = j.value("lambda_max", a.lambda_max);
  a.k = j.value("k", a.k);
  a.lambda_star = j.value("lambda_star", a.lambda_star);
}

std::vector<EnsembleRecord> load_records(const AnalyzeArgs& a) {
  if (a.records.empty()) throw ConfigError("analyze needs --records");
  const fs::path p(a.records);
  std::vector<EnsembleRecord> all = p.extension() == ".jsonl" ? read_jsonl(p) : read_csv(p);
  std::vector<EnsembleRecord> out;
  for (auto& r : all)
    if ((!a.n || r.n == *a.n) && (!a.lambda || std::abs(r.lambda - *a.lambda) < 1e-12)) out.push_back(std::move(r));
  if (out.empty()) throw ConfigError("no records match the selection");
  return out;
}

/// Records of one (N, lambda) group each, in sorted order.
std::vector<std::vector<EnsembleRecord>> split_groups(std::vector<EnsembleRecord> records) {
  sort_records(records);
  std::vector<std::vector<EnsembleRecord>> groups;
  for (auto& r : records) {
    if (groups.empty() || groups.back().front().n != r.n || groups.back().front().lambda != r.lambda)
      groups.emplace_back();
    groups.back().push_back(std::move(r));
  }
  return groups;
}

void require_fit(const std::string& fit, std::initializer_list<const char*> allowed) {
  for (const char* name : allowed)
    if (fit == name) return;
  std::string list;
  for (const char* name : allowed) list += std::string(list.empty() ? "" : ", ") + name;
  throw ConfigError("unknown fit '" + fit + "' (expected one of: " + list + ")");
}

std::string fit_lines(const FitResult& f) {
  std::ostringstream os;
  os << "# fit " << f.model << " over [" << format_number(f.range_lo) << ", " << format_number(f.range_hi)
     << "], rss " << format_number(f.rss) << '\n';
  for (const auto& p : f.parameters)
    os << "#   " << p.name << " = " << format_number(p.value) << " +- " << format_number(p.se) << '\n';
  return os.str();
}

struct Output {
  std::ostringstream table;
  Json json = Json::object();
};

void analyze_gap_histogram(const AnalyzeArgs& a, const std::vector<EnsembleRecord>& records, Output& out) {
  const std::string overlay = a.fit.empty() ? "gue" : a.fit;
  require_fit(overlay, {"gue", "poisson"});
  const auto density = overlay == "gue" ? gue_surmise_density : poisson_density;
  Json groups = Json::array();
  for (const auto& group : split_groups(records)) {
    const std::vector<double> g = normalized_gaps(group);
    const Histogram h = make_histogram(g, a.bins, 0.0, a.hist_max);
    const double ks_gue = ks_distance(g, gue_surmise_cdf), ks_poisson = ks_distance(g, poisson_cdf);
    out.table << "# n=" << group.front().n << " lambda=" << format_number(group.front().lambda)
              << " samples=" << g.size() << " ks_gue=" << format_number(ks_gue)
              << " ks_poisson=" << format_number(ks_poisson) << '\n'
              << "g,empirical_density," << overlay << "_density\n";
    Json rows = Json::array();
    for (std::size_t b = 0; b < h.density.size(); ++b) {
      const double c = h.center(b);
      out.table << format_number(c) << ',' << format_number(h.density[b]) << ',' << format_number(density(c)) << '\n';
      rows.push_back({number12(c), number12(h.density[b]), number12(density(c))});
    }
    groups.push_back({{"n", group.front().n},
                      {"lambda", number12(group.front().lambda)},
                      {"samples", g.size()},
                      {"ks_gue", number12(ks_gue)},
                      {"ks_poisson", number12(ks_poisson)},
                      {"columns", {"g", "empirical_density", overlay + "_density"}},
                      {"rows", rows}});
  }
  out.json["groups"] = groups;
}

/// Per-lambda series of (N, mean, se) for one observable.
template <class Get>
std::map<double, std::vector<std::array<double, 3>>> series(const std::vector<EnsembleRecord>& records, Get get) {
  std::map<double, std::vector<std::array<double, 3>>> out;
  for (const auto& s : aggregate(records)) {
    const MeanSe m = get(s);
    if (std::isfinite(m.mean)) out[s.lambda].push_back({static_cast<double>(s.n), m.mean, m.se});
  }
  return out;
}

template <class FitFn>
void scaling_analysis(const std::map<double, std::vector<std::array<double, 3>>>& data, const char* quantity,
                      const std::vector<std::string>& fits, FitFn fit, Output& out) {
  Json per_lambda = Json::array();
  for (const auto& [lambda, rows] : data) {
    out.table << "# lambda=" << format_number(lambda) << '\n' << "n,mean_" << quantity << ",se\n";
    std::vector<double> n, y, se;
    for (const auto& r : rows) {
      out.table << format_number(r[0]) << ',' << format_number(r[1]) << ',' << format_number(r[2]) << '\n';
      n.push_back(r[0]);
      y.push_back(r[1]);
      se.push_back(r[2]);
    }
    Json entry = {{"lambda", number12(lambda)}, {"fits", Json::array()}};
    for (const auto& name : fits) {
      try {
        const FitResult f = fit(name, n, y, se);
        out.table << fit_lines(f);
        entry["fits"].push_back(fit_to_json(f));
      } catch (const InsufficientDataError& e) {
        out.table << "# fit " << name << " skipped: " << e.what() << '\n';
      }
    }
    per_lambda.push_back(entry);
  }
  out.json["series"] = per_lambda;
}

/// Standard errors are used as weights only when every one is positive.
std::span<const double> usable(const std::vector<double>& se) {
  for (double s : se)
    if (!(s > 0) || !std::isfinite(s)) return {};
  return se;
}

void analyze_gap_scaling(const AnalyzeArgs& a, const std::vector<EnsembleRecord>& records, Output& out) {
  std::vector<std::string> fits = {"power_law", "exponential"};
  if (!a.fit.empty()) {
    require_fit(a.fit, {"power_law", "exponential"});
    fits = {a.fit};
  }
  scaling_analysis(series(records, [](const GroupStatistics& s) { return s.gap; }), "gap", fits,
                   [](const std::string& name, const auto& n, const auto& y, const auto& se) {
                     return fit_gap_scaling(n, y, name == "power_law" ? GapModel::power_law : GapModel::exponential,
                                            usable(se));
                   },
                   out);
}

void analyze_entropy_scaling(const AnalyzeArgs& a, const std::vector<EnsembleRecord>& records, Output& out) {
  std::vector<std::string> fits = {"log_linear", "saturation"};
  if (!a.fit.empty()) {
    require_fit(a.fit, {"log_linear", "saturation"});
    fits = {a.fit};
  }
  scaling_analysis(series(records, [](const GroupStatistics& s) { return s.entropy; }), "entropy_bits", fits,
                   [](const std::string& name, const auto& n, const auto& y, const auto& se) {
                     return fit_entropy_scaling(
                         n, y, name == "log_linear" ? EntropyModel::log_linear : EntropyModel::saturation, usable(se));
                   },
                   out);
}

struct Profile {
  int n;
  double lambda;
  std::vector<double> c, se;
};

std::vector<Profile> profiles(const std::vector<EnsembleRecord>& records) {
  std::vector<Profile> out;
  for (const auto& s : aggregate(records))
    if (!s.c_of_r.empty()) out.push_back({s.n, s.lambda, s.c_of_r, s.c_of_r_se});
  if (out.empty()) throw ConfigError("records carry no C(r) profiles (analyze the .jsonl file of a correlation run)");
  return out;
}

FitResult xi_fit(const AnalyzeArgs& a, const Profile& p) {
  std::vector<double> r;
  for (std::size_t i = 0; i < p.c.size(); ++i) r.push_back(static_cast<double>(i + 1));
  return fit_correlation_length(r, p.c, a.r_min.value_or(1.0), a.r_max.value_or(p.n / 2.0));
}

void analyze_correlation(const AnalyzeArgs& a, const std::vector<EnsembleRecord>& records, Output& out) {
  if (!a.fit.empty()) require_fit(a.fit, {"exponential"});
  Json arr = Json::array();
  for (const auto& p : profiles(records)) {
    out.table << "# n=" << p.n << " lambda=" << format_number(p.lambda) << '\n' << "r,c,se\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < p.c.size(); ++i) {
      out.table << i + 1 << ',' << format_number(p.c[i]) << ',' << format_number(p.se[i]) << '\n';
      rows.push_back({i + 1, number12(p.c[i]), number12(p.se[i])});
    }
    Json entry = {{"n", p.n}, {"lambda", number12(p.lambda)}, {"rows", rows}};
    try {
      const FitResult f = xi_fit(a, p);
      out.table << fit_lines(f);
      entry["fit"] = fit_to_json(f);
    } catch (const Error& e) {
      out.table << "# fit skipped: " << e.what() << '\n';
    }
    arr.push_back(entry);
  }
  out.json["profiles"] = arr;
}

void analyze_xi_divergence(const AnalyzeArgs& a, const std::vector<EnsembleRecord>& records, Output& out) {
  if (!a.fit.empty()) require_fit(a.fit, {"log"});
  auto ps = profiles(records);
  const int n = a.n ? *a.n : std::max_element(ps.begin(), ps.end(), [](auto& x, auto& y) { return x.n < y.n; })->n;
  std::vector<double> lam, xi, xi_se;
  out.table << "# n=" << n << '\n' << "lambda,xi,xi_se\n";
  for (const auto& p : ps) {
    if (p.n != n) continue;
    const FitResult f = xi_fit(a, p);
    lam.push_back(p.lambda);
    xi.push_back(f.value("xi"));
    xi_se.push_back(f.se("xi"));
    out.table << format_number(p.lambda) << ',' << format_number(xi.back()) << ',' << format_number(xi_se.back())
              << '\n';
  }
  const FitResult f = fit_xi_divergence(lam, xi, a.lambda_min, a.lambda_max, usable(xi_se));
  out.table << fit_lines(f);
  Json pts = Json::array();
  for (std::size_t i = 0; i < lam.size(); ++i) pts.push_back({number12(lam[i]), number12(xi[i]), number12(xi_se[i])});
  out.json = {{"n", n}, {"points", pts}, {"fit", fit_to_json(f)}};
}

void analyze_saturation_divergence(const AnalyzeArgs& a, const std::vector<EnsembleRecord>& records, Output& out) {
  const std::string mode_name = a.fit.empty() ? "fixed" : a.fit;
  require_fit(mode_name, {"fixed", "fixed_lambda_star", "fixed_k", "free"});
  const DivergenceMode mode = mode_name == "fixed"               ? DivergenceMode::fixed
                              : mode_name == "fixed_lambda_star" ? DivergenceMode::fixed_lambda_star
                              : mode_name == "fixed_k"           ? DivergenceMode::fixed_k
                                                                 : DivergenceMode::free;
  std::vector<double> lam, s_inf;
  out.table << "lambda,s_inf,s_inf_se\n";
  Json pts = Json::array();
  for (const auto& [lambda, rows] : series(records, [](const GroupStatistics& s) { return s.entropy; })) {
    std::vector<double> n, y, se;
    for (const auto& r : rows) {
      n.push_back(r[0]);
      y.push_back(r[1]);
      se.push_back(r[2]);
    }
    try {
      const FitResult f = fit_entropy_scaling(n, y, EntropyModel::saturation, usable(se));
      lam.push_back(lambda);
      s_inf.push_back(f.value("S_inf"));
      out.table << format_number(lambda) << ',' << format_number(f.value("S_inf")) << ','
                << format_number(f.se("S_inf")) << '\n';
      pts.push_back({number12(lambda), number12(f.value("S_inf")), number12(f.se("S_inf"))});
    } catch (const InsufficientDataError& e) {
      out.table << "# lambda=" << format_number(lambda) << " skipped: " << e.what() << '\n';
    }
  }
  SaturationDivergenceOptions opt;
  opt.k = a.k;
  opt.lambda_star = a.lambda_star;
  opt.lambda_max = a.lambda_max;
  const FitResult f = fit_entropy_saturation_divergence(lam, s_inf, mode, opt);
  out.table << fit_lines(f);
  out.json = {{"points", pts}, {"fit", fit_to_json(f)}};
}

int cmd_analyze(const Globals& g, AnalyzeArgs a) {
  if (!g.config.empty()) merge_spec(a, read_json_file(g.config));
  const std::map<std::string, void (*)(const AnalyzeArgs&, const std::vector<EnsembleRecord>&, Output&)> table = {
      {"gap-histogram", analyze_gap_histogram},
      {"gap-scaling", analyze_gap_scaling},
      {"entropy-scaling", analyze_entropy_scaling},
      {"correlation", analyze_correlation},
      {"xi-divergence", analyze_xi_divergence},
      {"saturation-divergence", analyze_saturation_divergence},
  };
  const auto it = table.find(a.analysis);
  if (it == table.end()) throw ConfigError("unknown analysis '" + a.analysis + "'");
  Output out;
  it->second(a, load_records(a), out);
  out.json["analysis"] = a.analysis;
  out.json["records"] = a.records;
  std::cout << out.table.str();
  if (!g.out.empty()) {
    const fs::path dir = out_dir(g, ".");
    std::ofstream(dir / (a.analysis + ".csv")) << out.table.str();
    write_json_file(dir / (a.analysis + ".json"), out.json);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-spin random ensemble lab: sample, canonicalize, solve, sweep, analyze"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--config", g.config, "JSON config (graph, sweep or analysis spec)");
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--workers", g.workers, "Worker threads (default: TSRE_WORKERS, then OpenMP default)");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--resume", g.resume, "Continue an interrupted sweep from its manifest");
  app.add_option("--preset", g.preset, "Desk-scale preset: fig1-desk, fig2-desk, fig3-desk, fig4-desk, fig56-desk");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Draw samples from a graph description");
  sample_cmd->add_option("--count", sa.count, "Number of realizations");
  sample_cmd->add_option("--first-index", sa.first, "Realization index of the first sample");

  std::string canon_file;
  auto* canon_cmd = app.add_subcommand("canonicalize", "Gauge-fix a sample file");
  canon_cmd->add_option("sample", canon_file, "Sample JSON")->required();

  SolveArgs so;
  std::string solve_file;
  auto* solve_cmd = app.add_subcommand("solve", "Lowest levels and observables of one sample");
  solve_cmd->add_option("sample", solve_file, "Sample JSON")->required();
  solve_cmd->add_option("--method", so.method, "exact or dmrg");
  solve_cmd->add_option("--normalization", so.normalization, "spin_half or pauli");
  solve_cmd->add_flag("--no-gap", so.no_gap, "Ground state only");
  solve_cmd->add_option("--chi-max", so.chi_max, "DMRG bond dimension");
  solve_cmd->add_option("--penalty-weight", so.penalty_weight, "DMRG excited-state penalty (default from the norm bound)");
  solve_cmd->add_option("--export-dense", so.export_dense, "Write the dense matrix to STEM.bin/STEM.json (N <= 12)");
  solve_cmd->add_option("--checkpoint", so.checkpoint, "Write the DMRG ground state to STEM.bin/STEM.json");

  auto* sweep_cmd = app.add_subcommand("sweep", "Ensemble sweep over (N, lambda)");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Histograms and fits from record files");
  analyze_cmd->add_option("analysis", an.analysis,
                          "gap-histogram, gap-scaling, entropy-scaling, correlation, xi-divergence, "
                          "saturation-divergence");
  analyze_cmd->add_option("--records", an.records, "records.csv or records.jsonl");
  analyze_cmd->add_option("--fit", an.fit, "Model or overlay name");
  analyze_cmd->add_option("--n", an.n, "Restrict to one size");
  analyze_cmd->add_option("--lambda", an.lambda, "Restrict to one field strength");
  analyze_cmd->add_option("--bins", an.bins, "Histogram bins on [0, 4]");
  analyze_cmd->add_option("--r-min", an.r_min, "Correlation fit range start");
  analyze_cmd->add_option("--r-max", an.r_max, "Correlation fit range end (default N/2)");
  analyze_cmd->add_option("--lambda-min", an.lambda_min, "Divergence fit: exclusive lower lambda bound");
  analyze_cmd->add_option("--lambda-max", an.lambda_max, "Divergence fit: upper lambda bound");
  analyze_cmd->add_option("--k", an.k, "Saturation divergence exponent (fixed modes)");
  analyze_cmd->add_option("--lambda-star", an.lambda_star, "Saturation divergence scale (fixed modes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sample_cmd) return cmd_sample(g, sa);
    if (*canon_cmd) return cmd_canonicalize(g, canon_file);
    if (*solve_cmd) return cmd_solve(g, so, solve_file);
    if (*sweep_cmd) return cmd_sweep(g);
    if (*analyze_cmd) return cmd_analyze(g, an);
  } catch (const UnsupportedTopologyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTopology;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ExcitedStateFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}
