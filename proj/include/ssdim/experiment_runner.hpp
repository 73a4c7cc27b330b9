#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssdim/hankel_stats.hpp"
#include "ssdim/spike_oracle.hpp"
#include "ssdim/state_space.hpp"
#include "ssdim/types.hpp"

namespace ssdim {

/// splitmix64 step; the basis of all derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-trial seed: master, M, N and the trial index are folded in through
/// successive splitmix64 rounds, so any subset of a grid reruns identically.
std::uint64_t derive_trial_seed(std::uint64_t master, int M, long N,
                                std::uint64_t trial);

/// Monte-Carlo campaign description. Presets:
///   "table"     signal model of the estimator tables (autocov s=5, cca s=1)
///   "cca_fig"   / "cca_fig2"  the L=4 cosine-noise models (cca s=1 / s=2)
///   "fig_s3" "fig_s5" "fig_s2" the constructive histogram models
///   "noise_only" pure noise (oracle empty)
struct ExperimentConfig {
  std::string preset = "table";
  std::string kind = "both"; // "autocov", "cca" or "both"
  std::vector<std::pair<int, long>> grid = {{200, 800}};
  int L = 1;                      // noise_only only; presets fix their own L
  std::string noise_type = "white"; // noise_only only: "white" or "cosine"
  double sigma2 = 1.0;
  int trials = 100;
  double eps1 = 0.01;
  double eps2 = 0.05;
  std::uint64_t seed = 1;
  int threads = 0; // 0 = OpenMP default pool, 1 = serial reference
  std::string out_dir;
};

/// A preset instantiated at one grid point.
struct PresetInstance {
  std::optional<StateSpaceModel> model; // absent for noise_only
  NoiseModel noise;
  int L = 1;
};

PresetInstance build_preset(const std::string& preset, int M, long N, int L,
                            const std::string& noise_type, double sigma2);

struct TrialRecord {
  std::uint64_t seed = 0;
  int M = 0;
  long N = 0;
  std::string model_kind; // "autocov" or "cca"
  int s_threshold = 0;
  int s_ratio = 0;
  VectorXd top_eigs; // first 12 sample eigenvalues
};

struct FrequencyRow {
  int M = 0;
  long N = 0;
  std::string estimator; // e.g. "cca_s_threshold"
  int value = 0;         // 0..8, 9 = overflow bin (>= 9)
  double probability = 0.0;
};

struct GridOracle {
  int M = 0;
  long N = 0;
  std::optional<SpikeReport> autocov;
  std::optional<SpikeReport> cca;
};

struct TableResult {
  std::vector<FrequencyRow> rows;
  std::vector<TrialRecord> records; // ordered by (grid point, trial, kind)
  std::vector<GridOracle> oracles;
  /// P(estimator == value) at a grid point; zero when absent.
  double probability(int M, long N, const std::string& estimator, int value) const;
  std::string to_csv() const;
};

/// Estimator frequency tables over the grid, deterministic per seed and
/// independent of the thread count (trials are reduced in index order).
TableResult run_table(const ExperimentConfig& config);

struct FigureResult {
  int M = 0;
  long N = 0;
  std::string kind; // "autocov" or "cca"
  std::vector<double> bin_edges; // Freedman-Diaconis by default
  std::vector<long> counts;
  SpectralMeasure density; // deterministic equivalent on a grid
  VectorXd markers;        // oracle outlier locations (empty when none)
  double bulk_edge = 0.0;
  std::string to_hist_csv() const;
  std::string to_density_csv() const;
  std::string to_markers_csv() const;
};

struct FigureOptions {
  int bins = 0;          // 0: Freedman-Diaconis
  int density_points = 800;
  double left_margin = 1e-3; // autocov density grid starts here
};

/// Plot-ready data for one grid point: histogram of one realization's
/// eigenvalues, the deterministic-equivalent density and the oracle markers.
FigureResult run_figure(const ExperimentConfig& config,
                        const FigureOptions& opts = {});

struct DeviationSummary {
  int s = 0;             // oracle outlier count
  long trials = 0;
  VectorXd median;       // per k = 1..s, median |lambda_hat_k - rho_k|
  VectorXd p90;          // per k, 90th percentile
};

/// Per-trial deviations between the top sample eigenvalues and the oracle
/// locations, for the configured kind ("autocov" or "cca"; not "both").
DeviationSummary oracle_vs_empirical(const ExperimentConfig& config);

} // namespace ssdim
