#include "tsre/serialize.hpp"

#include <cmath>
#include <fstream>

#include "tsre/errors.hpp"

namespace tsre {

namespace {

Json matrix_json(const Eigen::Matrix3d& m) {
  Json rows = Json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({number12(m(i, 0)), number12(m(i, 1)), number12(m(i, 2))});
  return rows;
}

Json vector_json(const Eigen::Vector3d& v) { return {number12(v(0)), number12(v(1)), number12(v(2))}; }

/// Row-major 9-element array.
Json flat_matrix_json(const Eigen::Matrix3d& m) {
  Json out = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out.push_back(number12(m(i, k)));
  return out;
}

Eigen::Matrix3d flat_matrix_from(const Json& j) {
  if (!j.is_array() || j.size() != 9) throw ConfigError("bond matrix must be a row-major 9-element array");
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) m(i, k) = j[3 * i + k].get<double>();
  return m;
}

Eigen::Vector3d vector_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("field vector must have 3 components");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<double> strengths(const Json& j, const char* key, std::size_t count, double fallback) {
  if (!j.contains(key)) return std::vector<double>(count, fallback);
  const Json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(count, v.get<double>());
  if (!v.is_array() || v.size() != count)
    throw ConfigError(std::string("'") + key + "' must be a number or a list of " + std::to_string(count));
  return v.get<std::vector<double>>();
}

Json strengths_json(const std::vector<double>& v) {
  const bool uniform = std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  if (uniform && !v.empty()) return number12(v.front());
  Json out = Json::array();
  for (double x : v) out.push_back(number12(x));
  return out;
}

template <class F>
auto config_guard(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed document: ") + e.what());
  }
}

/// Typos in config files must not silently fall back to defaults.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw ResourceError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

Json number12(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

InteractionGraph graph_from_json(const Json& j) {
  return config_guard([&] {
    reject_unknown_keys(j, {"type", "n", "edges", "mu", "lambda"}, "graph");
    const GraphKind kind = graph_kind_from_string(j.value("type", std::string("chain")));
    const int n = j.at("n").get<int>();
    if (kind == GraphKind::chain || kind == GraphKind::ring) {
      InteractionGraph base = kind == GraphKind::chain ? build_chain(n, 1.0, 0.0) : build_ring(n, 1.0, 0.0);
      return InteractionGraph(n, base.edges(), strengths(j, "mu", base.edges().size(), 1.0),
                              strengths(j, "lambda", static_cast<std::size_t>(n), 1.0), kind);
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("edges must be [j, k] pairs");
      edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    const std::size_t m = edges.size();
    return InteractionGraph(n, std::move(edges), strengths(j, "mu", m, 1.0),
                            strengths(j, "lambda", static_cast<std::size_t>(n), 1.0), kind);
  });
}

Json graph_to_json(const InteractionGraph& g) {
  Json j;
  j["type"] = to_string(g.kind());
  j["n"] = g.vertex_count();
  if (g.kind() == GraphKind::custom) {
    Json edges = Json::array();
    for (const auto& e : g.edges()) edges.push_back({e.first, e.second});
    j["edges"] = edges;
  }
  j["mu"] = strengths_json(g.mu_values());
  j["lambda"] = strengths_json(g.lambda_values());
  return j;
}

Json sample_to_json(const TsreSample& s) {
  Json j;
  j["graph"] = graph_to_json(*s.graph);
  j["seed"] = s.seed;
  j["realization_index"] = s.realization_index;
  Json bonds = Json::array();
  for (std::size_t e = 0; e < s.bonds.size(); ++e) {
    const Edge& edge = s.graph->edge(e);
    bonds.push_back({{"edge", {edge.first, edge.second}}, {"matrix", flat_matrix_json(s.bonds[e])}});
  }
  j["bonds"] = bonds;
  Json fields = Json::array();
  for (const auto& f : s.fields) fields.push_back(vector_json(f));
  j["fields"] = fields;
  return j;
}

TsreSample sample_from_json(const Json& j) {
  return config_guard([&] {
    auto g = std::make_shared<InteractionGraph>(graph_from_json(j.at("graph")));
    std::vector<BondMatrix> bonds;
    for (const auto& b : j.at("bonds")) bonds.push_back(flat_matrix_from(b.at("matrix")));
    std::vector<FieldVector> fields;
    for (const auto& f : j.at("fields")) fields.push_back(vector_from(f));
    return make_sample(g, std::move(bonds), std::move(fields), j.value("seed", std::uint64_t{0}),
                       j.value("realization_index", std::uint64_t{0}));
  });
}

Json canonical_to_json(const CanonicalForm& form) {
  Json j;
  j["sample"] = sample_to_json(form.transformed_sample);
  Json rot = Json::array();
  for (const auto& r : form.rotations.rotations()) rot.push_back(matrix_json(r));
  j["rotations"] = rot;
  j["first_bond"] = form.first_bond;
  j["first_bond_singular_values"] = vector_json(form.first_bond_singular_values);
  j["closing_bond"] = form.closing_bond ? Json(*form.closing_bond) : Json(nullptr);
  Json topo = Json::array(), sym = Json::array();
  for (const auto& r : form.topological_rotations) topo.push_back(matrix_json(r));
  for (const auto& s : form.closing_symmetric_factors) sym.push_back(matrix_json(s));
  j["topological_rotations"] = topo;
  j["closing_symmetric_factors"] = sym;
  j["bond_degenerate"] = form.bond_degenerate;
  j["degenerate"] = form.degenerate;
  j["diagnostics"] = {{"max_asymmetry", number12(form.max_asymmetry)},
                      {"first_bond_offdiagonal", number12(form.first_bond_offdiagonal)},
                      {"reconstruction_residual", number12(form.reconstruction_residual)},
                      {"free_parameters", free_parameter_count(form)}};
  return j;
}

Json fit_to_json(const FitResult& fit) {
  Json j;
  j["model"] = fit.model;
  j["convention"] = fit.convention;
  Json params = Json::object();
  for (const auto& p : fit.parameters) params[p.name] = {{"value", number12(p.value)}, {"se", number12(p.se)}};
  j["parameters"] = params;
  j["range"] = {number12(fit.range_lo), number12(fit.range_hi)};
  Json x = Json::array(), y = Json::array(), res = Json::array();
  for (double v : fit.x) x.push_back(number12(v));
  for (double v : fit.y) y.push_back(number12(v));
  for (double v : fit.residuals) res.push_back(number12(v));
  j["x"] = x;
  j["y"] = y;
  j["residuals"] = res;
  j["rss"] = number12(fit.rss);
  return j;
}

SweepConfig sweep_config_from_json(const Json& j) {
  return config_guard([&] {
    reject_unknown_keys(j,
                        {"graph", "n_list", "lambda_list", "realizations", "realizations_per_n", "master_seed",
                         "normalization", "pauli_normalization", "solver", "observables"},
                        "sweep config");
    SweepConfig c;
    if (j.contains("graph")) {
      const Json& g = j["graph"];
      reject_unknown_keys(g, {"type", "mu"}, "sweep graph");
      c.graph.kind = graph_kind_from_string(g.value("type", std::string("chain")));
      c.graph.mu = g.value("mu", 1.0);
    }
    c.n_list = j.at("n_list").get<std::vector<int>>();
    c.lambda_list = j.at("lambda_list").get<std::vector<double>>();
    c.realizations = j.value("realizations", 1);
    if (j.contains("realizations_per_n"))
      for (const auto& [k, v] : j["realizations_per_n"].items()) c.realizations_per_n[std::stoi(k)] = v.get<int>();
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    c.normalization = spin_normalization_from_string(j.value("normalization", std::string("spin_half")));
    if (j.value("pauli_normalization", false)) c.normalization = SpinNormalization::pauli;
    if (j.contains("solver")) {
      const Json& s = j["solver"];
      reject_unknown_keys(s,
                          {"method", "tol", "max_restarts", "degeneracy_tol", "chi_max", "chi_initial", "sweeps",
                           "energy_tol", "penalty_weight"},
                          "solver");
      c.solver.method = method_from_string(s.value("method", std::string("exact")));
      c.solver.exact.krylov.tol = s.value("tol", c.solver.exact.krylov.tol);
      c.solver.exact.krylov.max_restarts = s.value("max_restarts", c.solver.exact.krylov.max_restarts);
      c.solver.exact.degeneracy_tol = s.value("degeneracy_tol", c.solver.exact.degeneracy_tol);
      c.solver.dmrg.chi_max = s.value("chi_max", c.solver.dmrg.chi_max);
      c.solver.dmrg.chi_initial = s.value("chi_initial", c.solver.dmrg.chi_initial);
      c.solver.dmrg.max_sweeps = s.value("sweeps", c.solver.dmrg.max_sweeps);
      c.solver.dmrg.energy_tol = s.value("energy_tol", c.solver.dmrg.energy_tol);
      c.solver.penalty_weight = s.value("penalty_weight", 0.0);
    }
    if (j.contains("observables")) {
      const Json& o = j["observables"];
      reject_unknown_keys(o, {"gap", "entropy", "correlation"}, "observables");
      c.observables.gap = o.value("gap", c.observables.gap);
      c.observables.entropy = o.value("entropy", c.observables.entropy);
      c.observables.correlation = o.value("correlation", c.observables.correlation);
    }
    c.validate();
    return c;
  });
}

Json sweep_config_to_json(const SweepConfig& c) {
  Json j;
  j["graph"] = {{"type", to_string(c.graph.kind)}, {"mu", number12(c.graph.mu)}};
  j["n_list"] = c.n_list;
  Json lambdas = Json::array();
  for (double l : c.lambda_list) lambdas.push_back(number12(l));
  j["lambda_list"] = lambdas;
  j["realizations"] = c.realizations;
  Json per = Json::object();
  for (const auto& [n, count] : c.realizations_per_n) per[std::to_string(n)] = count;
  j["realizations_per_n"] = per;
  j["master_seed"] = c.master_seed;
  j["normalization"] = to_string(c.normalization);
  j["solver"] = {{"method", to_string(c.solver.method)},
                 {"tol", c.solver.exact.krylov.tol},
                 {"max_restarts", c.solver.exact.krylov.max_restarts},
                 {"degeneracy_tol", c.solver.exact.degeneracy_tol},
                 {"chi_max", c.solver.dmrg.chi_max},
                 {"chi_initial", c.solver.dmrg.chi_initial},
                 {"sweeps", c.solver.dmrg.max_sweeps},
                 {"energy_tol", c.solver.dmrg.energy_tol},
                 {"penalty_weight", c.solver.penalty_weight}};
  j["observables"] = {{"gap", c.observables.gap},
                      {"entropy", c.observables.entropy},
                      {"correlation", c.observables.correlation}};
  return j;
}

}  // namespace tsre
