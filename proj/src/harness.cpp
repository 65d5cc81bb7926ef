#include "tsre/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "tsre/errors.hpp"
#include "tsre/observables.hpp"
#include "tsre/rng.hpp"

namespace tsre {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GraphPtr make_graph(const GraphSpec& spec, int n, double lambda) {
  switch (spec.kind) {
    case GraphKind::chain: return std::make_shared<InteractionGraph>(build_chain(n, spec.mu, lambda));
    case GraphKind::ring: return std::make_shared<InteractionGraph>(build_ring(n, spec.mu, lambda));
    default: throw ConfigError("sweeps support chain and ring graphs");
  }
}

void solve_exact(const SweepConfig& cfg, const TsreSample& s, EnsembleRecord& rec) {
  const HamiltonianOperator h(s, cfg.normalization);
  GroundSolution sol;
  try {
    sol = cfg.observables.gap ? lowest_two(h, cfg.solver.exact) : lowest_one(h, cfg.solver.exact);
  } catch (const ConvergenceError& e) {
    const GroundSolution& best = e.best();
    rec.e0 = best.e0;
    rec.e1 = best.e1;
    rec.gap = best.gap;
    rec.iterations = best.iterations;
    rec.residual_norms = best.residual_norms;
    throw;
  }
  rec.e0 = sol.e0;
  rec.e1 = sol.e1;
  rec.gap = sol.gap;
  rec.degenerate_flag = sol.degenerate_flag;
  rec.iterations = sol.iterations;
  rec.residual_norms = sol.residual_norms;
  rec.spectral_range = sol.spectral_range;
  if (cfg.observables.entropy) {
    const EntropyResult er = entanglement_entropy(sol.psi0, rec.n / 2);
    rec.entropy_bits = er.entropy_bits;
    rec.chi_eff = effective_rank(er.schmidt_spectrum, kChiEpsilon);
  }
  if (cfg.observables.correlation)
    rec.c_of_r = ring_correlation_profile(sol.psi0, *s.graph, cfg.normalization).c_of_r;
}

void solve_dmrg(const SweepConfig& cfg, const TsreSample& s, EnsembleRecord& rec) {
  const MatrixProductOperator mpo = build_mpo(s, cfg.normalization);
  const DmrgResult ground = dmrg_ground(mpo, cfg.solver.dmrg);
  rec.e0 = ground.energy;
  rec.e1 = rec.gap = kNaN;
  rec.dmrg_sweeps = ground.diagnostics.sweeps;
  rec.max_discarded_weight = ground.diagnostics.max_discarded_weight;
  rec.solver_warning = ground.diagnostics.warning;
  // 2 x norm bound brackets the spectral range.
  rec.spectral_range = 2.0 * mpo.norm_bound;
  if (cfg.observables.entropy) {
    const EntropyResult er = mps_entropy(ground.mps, rec.n / 2);
    rec.entropy_bits = er.entropy_bits;
    rec.chi_eff = effective_rank(er.schmidt_spectrum, kChiEpsilon);
  }
  if (cfg.observables.gap) {
    const double w = cfg.solver.penalty_weight > 0 ? cfg.solver.penalty_weight : default_penalty_weight(mpo);
    const DmrgResult excited = dmrg_first_excited(mpo, ground.mps, w, cfg.solver.dmrg);
    rec.e1 = excited.energy;
    rec.gap = std::max(0.0, rec.e1 - rec.e0);
    rec.ground_overlap = excited.diagnostics.ground_overlap;
    rec.solver_warning = rec.solver_warning || excited.diagnostics.warning;
    rec.max_discarded_weight = std::max(rec.max_discarded_weight, excited.diagnostics.max_discarded_weight);
    rec.degenerate_flag = rec.gap < cfg.solver.exact.degeneracy_tol * rec.spectral_range;
  }
}

void solve_into(const SweepConfig& cfg, const TsreSample& s, EnsembleRecord& rec) {
  if (cfg.solver.method == Method::exact)
    solve_exact(cfg, s, rec);
  else
    solve_dmrg(cfg, s, rec);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan" || s == "-nan" || s.empty()) return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("malformed number '" + s + "'");
  return v;
}

nlohmann::json rounded(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

double json_number(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::string to_string(Method m) { return m == Method::exact ? "exact" : "dmrg"; }

Method method_from_string(const std::string& name) {
  if (name == "exact") return Method::exact;
  if (name == "dmrg") return Method::dmrg;
  throw ConfigError("unknown method '" + name + "'");
}

int SweepConfig::realizations_for(int n) const {
  const auto it = realizations_per_n.find(n);
  return it == realizations_per_n.end() ? realizations : it->second;
}

void SweepConfig::validate() const {
  if (n_list.empty()) throw ConfigError("n_list is empty");
  if (lambda_list.empty()) throw ConfigError("lambda_list is empty");
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  for (const auto& [n, count] : realizations_per_n)
    if (count < 1) throw ConfigError("realizations for N=" + std::to_string(n) + " must be >= 1");
  for (double l : lambda_list)
    if (!(l >= 0) || !std::isfinite(l)) throw ConfigError("lambda values must be finite and >= 0");
  if (!(graph.mu >= 0) || !std::isfinite(graph.mu)) throw ConfigError("mu must be finite and >= 0");
  if (graph.kind != GraphKind::chain && graph.kind != GraphKind::ring)
    throw ConfigError("sweeps support chain and ring graphs");
  const int min_n = graph.kind == GraphKind::ring ? 3 : 2;
  for (int n : n_list) {
    if (n < min_n) throw ConfigError("N=" + std::to_string(n) + " too small for " + to_string(graph.kind));
    if (solver.method == Method::exact && n > 24)
      throw ConfigError("exact diagonalization limited to N <= 24");
  }
  if (solver.method == Method::dmrg && graph.kind != GraphKind::chain)
    throw ConfigError("DMRG supports open chains only");
  if (observables.correlation && graph.kind != GraphKind::ring)
    throw ConfigError("C(r) profiles need ring graphs");
  if (solver.method == Method::dmrg && observables.correlation)
    throw ConfigError("C(r) profiles need exact diagonalization");
}

std::vector<std::string> SweepConfig::warnings() const {
  std::vector<std::string> out;
  const bool zero = std::any_of(lambda_list.begin(), lambda_list.end(), [](double l) { return l == 0.0; });
  if (!zero) return out;
  for (int n : n_list)
    if (n % 2 == 1)
      out.push_back("N=" + std::to_string(n) +
                    " with lambda=0: every level is a Kramers pair, records are flagged degenerate");
  return out;
}

std::uint64_t size_seed(std::uint64_t master_seed, int n, GraphKind kind) {
  return mix64(mix64(master_seed) ^ (static_cast<std::uint64_t>(n) << 8) ^ static_cast<std::uint64_t>(kind));
}

EnsembleRecord run_realization(const SweepConfig& cfg, int n, double lambda, std::uint64_t realization) {
  EnsembleRecord rec;
  rec.n = n;
  rec.lambda = lambda;
  rec.realization = realization;
  rec.method = cfg.solver.method;
  rec.seed = size_seed(cfg.master_seed, n, cfg.graph.kind);
  try {
    const TsreSample s = sample(make_graph(cfg.graph, n, lambda), rec.seed, realization);
    solve_into(cfg, s, rec);
  } catch (const Error& e) {
    rec.error = e.kind() + ": " + e.what();
  } catch (const std::exception& e) {
    rec.error = std::string("internal: ") + e.what();
  }
  if (n % 2 == 1 && lambda == 0.0) rec.degenerate_flag = true;
  return rec;
}

EnsembleRecord solve_sample(const SweepConfig& cfg, const TsreSample& s) {
  EnsembleRecord rec;
  rec.n = s.n_spins();
  const auto& lam = s.graph->lambda_values();
  rec.lambda = lam.front();
  rec.realization = s.realization_index;
  rec.method = cfg.solver.method;
  rec.seed = s.seed;
  solve_into(cfg, s, rec);
  const bool zero_field = std::all_of(lam.begin(), lam.end(), [](double l) { return l == 0.0; });
  if (rec.n % 2 == 1 && zero_field) rec.degenerate_flag = true;
  return rec;
}

std::vector<EnsembleRecord> run_group(const SweepConfig& cfg, int n, double lambda, int workers) {
  const int count = cfg.realizations_for(n);
  std::vector<EnsembleRecord> out(static_cast<std::size_t>(count));
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = run_realization(cfg, n, lambda, static_cast<std::uint64_t>(i));
  return out;
}

SweepSummary run_sweep(const SweepConfig& cfg, int workers, const GroupCallback& on_group,
                       const std::function<bool(int, double)>& skip) {
  cfg.validate();
  SweepSummary summary;
  summary.warnings = cfg.warnings();
  for (int n : cfg.n_list)
    for (double lambda : cfg.lambda_list) {
      if (skip && skip(n, lambda)) continue;
      const auto records = run_group(cfg, n, lambda, workers);
      for (const auto& r : records) {
        ++summary.records;
        if (r.ok())
          ++summary.successes;
        else
          ++summary.failures;
      }
      if (on_group) on_group(n, lambda, records);
    }
  return summary;
}

std::vector<EnsembleRecord> run_sweep(const SweepConfig& cfg, int workers) {
  std::vector<EnsembleRecord> all;
  run_sweep(cfg, workers, [&](int, double, const std::vector<EnsembleRecord>& g) {
    all.insert(all.end(), g.begin(), g.end());
  });
  sort_records(all);
  return all;
}

void sort_records(std::vector<EnsembleRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.n, a.lambda, a.realization) < std::tie(b.n, b.lambda, b.realization);
  });
}

std::vector<GroupStatistics> aggregate(const std::vector<EnsembleRecord>& records) {
  std::vector<EnsembleRecord> sorted = records;
  sort_records(sorted);
  std::vector<GroupStatistics> out;
  auto summarize = [](const std::vector<double>& v) {
    if (v.size() >= 2) return mean_se(v);
    return MeanSe{v.empty() ? kNaN : v.front(), kNaN};
  };
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].n == sorted[i].n && sorted[j].lambda == sorted[i].lambda) ++j;
    GroupStatistics g;
    g.n = sorted[i].n;
    g.lambda = sorted[i].lambda;
    std::vector<double> gaps, ent, chi;
    std::vector<std::vector<double>> profile;
    for (std::size_t k = i; k < j; ++k) {
      const auto& r = sorted[k];
      if (!r.ok()) {
        ++g.failures;
        continue;
      }
      ++g.count;
      if (std::isfinite(r.gap)) gaps.push_back(r.gap);
      ent.push_back(r.entropy_bits);
      chi.push_back(r.chi_eff);
      if (!r.c_of_r.empty()) profile.push_back(r.c_of_r);
    }
    g.gap = summarize(gaps);
    g.entropy = summarize(ent);
    g.chi_eff = summarize(chi);
    if (!profile.empty()) {
      for (std::size_t r = 0; r < profile.front().size(); ++r) {
        std::vector<double> col;
        for (const auto& p : profile) col.push_back(p[r]);
        const MeanSe m = summarize(col);
        g.c_of_r.push_back(m.mean);
        g.c_of_r_se.push_back(m.se);
      }
    }
    out.push_back(std::move(g));
    i = j;
  }
  return out;
}

std::vector<double> normalized_gaps(const std::vector<EnsembleRecord>& records) {
  if (records.empty()) throw InsufficientDataError("no records");
  std::vector<double> gaps;
  for (const auto& r : records) {
    if (r.n != records.front().n || r.lambda != records.front().lambda)
      throw GroupingError("records mix (N, lambda) groups");
    if (r.ok() && std::isfinite(r.gap)) gaps.push_back(r.gap);
  }
  if (gaps.empty()) throw InsufficientDataError("no successful gap records");
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  if (!(mean > 0)) throw DomainError("mean gap is not positive");
  for (double& g : gaps) g /= mean;
  return gaps;
}

Histogram normalized_gap_histogram(const std::vector<EnsembleRecord>& records, int bins, double lo, double hi) {
  const std::vector<double> g = normalized_gaps(records);
  return make_histogram(g, bins, lo, hi);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_header() {
  return "n,lambda,realization,method,e0,e1,gap,entropy_bits,chi_eff,degenerate_flag,error";
}

std::string to_csv_row(const EnsembleRecord& r) {
  std::ostringstream os;
  os << r.n << ',' << format_number(r.lambda) << ',' << r.realization << ',' << to_string(r.method) << ','
     << format_number(r.e0) << ',' << format_number(r.e1) << ',' << format_number(r.gap) << ','
     << format_number(r.entropy_bits) << ',' << r.chi_eff << ',' << (r.degenerate_flag ? 1 : 0) << ','
     << csv_escape(r.error);
  return os.str();
}

EnsembleRecord from_csv_row(const std::string& line) {
  const auto f = csv_split(line);
  if (f.size() != 11) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields, expected 11");
  EnsembleRecord r;
  try {
    r.n = std::stoi(f[0]);
    r.lambda = parse_number(f[1]);
    r.realization = std::stoull(f[2]);
    r.method = method_from_string(f[3]);
    r.e0 = parse_number(f[4]);
    r.e1 = parse_number(f[5]);
    r.gap = parse_number(f[6]);
    r.entropy_bits = parse_number(f[7]);
    r.chi_eff = std::stoi(f[8]);
    r.degenerate_flag = f[9] == "1";
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("malformed CSV row: ") + e.what());
  }
  r.error = f[10];
  return r;
}

void write_csv(const std::filesystem::path& path, const std::vector<EnsembleRecord>& records) {
  std::ofstream os(path);
  if (!os) throw ResourceError("cannot write " + path.string());
  os << csv_header() << '\n';
  for (const auto& r : records) os << to_csv_row(r) << '\n';
}

std::vector<EnsembleRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + " is empty");
  const auto header = csv_split(line);
  const auto expected = csv_split(csv_header());
  for (const auto& col : expected)
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw ConfigError(path.string() + " lacks column '" + col + "'");
  if (header != expected) throw ConfigError(path.string() + " has columns in an unexpected order");
  std::vector<EnsembleRecord> out;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(from_csv_row(line));
  return out;
}

std::string to_jsonl(const EnsembleRecord& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["lambda"] = rounded(r.lambda);
  j["realization"] = r.realization;
  j["method"] = to_string(r.method);
  j["seed"] = r.seed;
  j["e0"] = rounded(r.e0);
  j["e1"] = rounded(r.e1);
  j["gap"] = rounded(r.gap);
  j["entropy_bits"] = rounded(r.entropy_bits);
  j["chi_eff"] = r.chi_eff;
  j["degenerate_flag"] = r.degenerate_flag;
  j["error"] = r.error;
  nlohmann::json c = nlohmann::json::array();
  for (double v : r.c_of_r) c.push_back(rounded(v));
  j["c_of_r"] = c;
  j["diagnostics"] = {{"iterations", r.iterations},
                      {"residual_norms", {rounded(r.residual_norms[0]), rounded(r.residual_norms[1])}},
                      {"spectral_range", rounded(r.spectral_range)},
                      {"dmrg_sweeps", r.dmrg_sweeps},
                      {"max_discarded_weight", rounded(r.max_discarded_weight)},
                      {"ground_overlap", rounded(r.ground_overlap)},
                      {"solver_warning", r.solver_warning}};
  return j.dump();
}

EnsembleRecord from_jsonl(const std::string& line) {
  EnsembleRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.n = j.at("n").get<int>();
    r.lambda = json_number(j.at("lambda"));
    r.realization = j.at("realization").get<std::uint64_t>();
    r.method = method_from_string(j.at("method").get<std::string>());
    r.seed = j.value("seed", std::uint64_t{0});
    r.e0 = json_number(j.at("e0"));
    r.e1 = json_number(j.at("e1"));
    r.gap = json_number(j.at("gap"));
    r.entropy_bits = json_number(j.at("entropy_bits"));
    r.chi_eff = j.at("chi_eff").get<int>();
    r.degenerate_flag = j.at("degenerate_flag").get<bool>();
    r.error = j.at("error").get<std::string>();
    for (const auto& v : j.value("c_of_r", nlohmann::json::array())) r.c_of_r.push_back(json_number(v));
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      r.iterations = d.value("iterations", 0);
      if (d.contains("residual_norms"))
        r.residual_norms = {json_number(d["residual_norms"][0]), json_number(d["residual_norms"][1])};
      r.spectral_range = json_number(d.value("spectral_range", nlohmann::json()));
      r.dmrg_sweeps = d.value("dmrg_sweeps", 0);
      r.max_discarded_weight = json_number(d.value("max_discarded_weight", nlohmann::json()));
      r.ground_overlap = json_number(d.value("ground_overlap", nlohmann::json()));
      r.solver_warning = d.value("solver_warning", false);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed record: ") + e.what());
  }
  return r;
}

std::vector<EnsembleRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::vector<EnsembleRecord> out;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(from_jsonl(line));
  return out;
}

std::vector<std::string> preset_names() {
  return {"fig1-desk", "fig2-desk", "fig3-desk", "fig4-desk", "fig56-desk"};
}

SweepConfig preset(const std::string& name) {
  SweepConfig c;
  c.master_seed = 20240601;
  if (name == "fig1-desk") {
    // Gap histograms; lambda = 0 is the Poisson-like reference.
    c.n_list = {8, 10};
    c.lambda_list = {1.0, 0.0};
    c.realizations = 2000;
    c.observables.entropy = false;
  } else if (name == "fig2-desk") {
    c.n_list = {8, 10, 12, 14};
    c.lambda_list = {0.0, 1.0};
    c.realizations = 500;
    c.observables.entropy = false;
  } else if (name == "fig3-desk") {
    c.n_list = {8, 10, 12, 14, 16};
    c.lambda_list = {0.0, 1.0};
    c.realizations = 300;
    c.realizations_per_n = {{14, 200}, {16, 100}};
    c.observables.gap = false;
  } else if (name == "fig4-desk") {
    c.graph.kind = GraphKind::ring;
    c.n_list = {12, 16};
    c.lambda_list = {0.0, 1.0};
    c.realizations = 200;
    c.observables.gap = false;
    c.observables.entropy = false;
    c.observables.correlation = true;
  } else if (name == "fig56-desk") {
    c.graph.kind = GraphKind::ring;
    c.n_list = {8, 10, 12, 14, 16};
    c.lambda_list = {0.1, 0.25, 0.5, 1.0, 2.0};
    c.realizations = 100;
    c.realizations_per_n = {{16, 50}};
    c.observables.gap = false;
    c.observables.correlation = true;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace tsre
