#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsre/dmrg.hpp"
#include "tsre/eigensolver.hpp"
#include "tsre/graph.hpp"
#include "tsre/hamiltonian.hpp"
#include "tsre/stats.hpp"

namespace tsre {

enum class Method { exact, dmrg };
std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Graph family for a sweep: chain or ring of each requested size, uniform mu.
struct GraphSpec {
  GraphKind kind = GraphKind::chain;
  double mu = 1.0;
};

struct SolverConfig {
  Method method = Method::exact;
  SolverOptions exact;
  DmrgOptions dmrg;
  /// 0 selects default_penalty_weight().
  double penalty_weight = 0.0;
};

struct ObservableToggles {
  /// Second level and gap; ground-state-only runs leave gap NaN.
  bool gap = true;
  bool entropy = true;
  /// C(r) profile (rings only).
  bool correlation = false;
};

struct SweepConfig {
  GraphSpec graph;
  std::vector<int> n_list;
  std::vector<double> lambda_list;
  int realizations = 1;
  /// Per-size overrides of `realizations`.
  std::map<int, int> realizations_per_n;
  std::uint64_t master_seed = 0;
  SolverConfig solver;
  ObservableToggles observables;
  SpinNormalization normalization = SpinNormalization::spin_half;

  int realizations_for(int n) const;
  /// Throws ConfigError on an invalid configuration.
  void validate() const;
  /// Non-fatal notices, e.g. odd N with lambda = 0 (Kramers pairs).
  std::vector<std::string> warnings() const;
};

/// Disorder seed for size n: shared by every lambda so curves at different
/// lambda use the same coupling draws.
std::uint64_t size_seed(std::uint64_t master_seed, int n, GraphKind kind);

struct EnsembleRecord {
  int n = 0;
  double lambda = 0.0;
  std::uint64_t realization = 0;
  Method method = Method::exact;
  std::uint64_t seed = 0;
  double e0 = 0.0;
  double e1 = 0.0;
  double gap = 0.0;
  double entropy_bits = 0.0;
  int chi_eff = 0;
  bool degenerate_flag = false;
  /// Empty on success, otherwise "<kind>: <message>".
  std::string error;
  std::vector<double> c_of_r;

  // Solver diagnostics.
  int iterations = 0;
  std::array<double, 2> residual_norms{};
  double spectral_range = 0.0;
  int dmrg_sweeps = 0;
  double max_discarded_weight = 0.0;
  double ground_overlap = 0.0;
  bool solver_warning = false;

  bool ok() const { return error.empty(); }
};

/// chi_eff threshold used in records.
inline constexpr double kChiEpsilon = 1e-6;

/// Runs one realization; solver failures are captured in the record.
EnsembleRecord run_realization(const SweepConfig& cfg, int n, double lambda, std::uint64_t realization);

/// Solves one explicit sample under the config's solver and observable
/// settings. Unlike run_realization, errors propagate to the caller.
EnsembleRecord solve_sample(const SweepConfig& cfg, const TsreSample& s);

/// All realizations of one (N, lambda) group, ordered by realization index.
/// `workers` <= 0 uses the OpenMP default. Results do not depend on it.
std::vector<EnsembleRecord> run_group(const SweepConfig& cfg, int n, double lambda, int workers = 0);

struct SweepSummary {
  std::size_t records = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::vector<std::string> warnings;
};

/// Every (N, lambda) group in config order; `on_group` sees each completed
/// group, e.g. to persist it. Groups listed in `skip` are not recomputed.
using GroupCallback = std::function<void(int n, double lambda, const std::vector<EnsembleRecord>&)>;
SweepSummary run_sweep(const SweepConfig& cfg, int workers, const GroupCallback& on_group,
                       const std::function<bool(int n, double lambda)>& skip = {});
/// Convenience: collects every record in (N, lambda, realization) order.
std::vector<EnsembleRecord> run_sweep(const SweepConfig& cfg, int workers = 0);

/// Orders records by (N, lambda, realization).
void sort_records(std::vector<EnsembleRecord>& records);

struct GroupStatistics {
  int n = 0;
  double lambda = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
  MeanSe gap;
  MeanSe entropy;
  MeanSe chi_eff;
  /// Mean C(r) profile and its standard errors, r = 1..N-1 (when recorded).
  std::vector<double> c_of_r;
  std::vector<double> c_of_r_se;
};

/// Per-(N, lambda) means over successful records, in sorted key order.
std::vector<GroupStatistics> aggregate(const std::vector<EnsembleRecord>& records);

/// g / <g> for successful records. Throws GroupingError when the records mix
/// (N, lambda) groups and DomainError when <g> is not positive.
std::vector<double> normalized_gaps(const std::vector<EnsembleRecord>& records);
Histogram normalized_gap_histogram(const std::vector<EnsembleRecord>& records, int bins = 40, double lo = 0.0,
                                   double hi = 4.0);

// Record files.
std::string csv_header();
std::string to_csv_row(const EnsembleRecord& r);
EnsembleRecord from_csv_row(const std::string& line);
void write_csv(const std::filesystem::path& path, const std::vector<EnsembleRecord>& records);
std::vector<EnsembleRecord> read_csv(const std::filesystem::path& path);
std::string to_jsonl(const EnsembleRecord& r);
EnsembleRecord from_jsonl(const std::string& line);
std::vector<EnsembleRecord> read_jsonl(const std::filesystem::path& path);

/// Decimal text with 12 significant digits.
std::string format_number(double v);

/// Names of the desk-scale presets.
std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
SweepConfig preset(const std::string& name);

}  // namespace tsre
