#include "ssdim/experiment_runner.hpp"

#include "ssdim/noise_equivalents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssdim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_trial_seed(std::uint64_t master, int M, long N,
                                std::uint64_t trial) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(M));
  s = splitmix64(s ^ static_cast<std::uint64_t>(N));
  return splitmix64(s ^ trial);
}

PresetInstance build_preset(const std::string& preset, int M, long N, int L,
                            const std::string& noise_type, double sigma2) {
  // Preset model bases are drawn from fixed seeds: mc_model is a
  // deterministic function of (preset, M, N), trial randomness comes from
  // the per-trial seeds alone.
  if (preset == "table" || preset == "cca_fig" || preset == "cca_fig2") {
    McPreset p = mc_model(preset, M, N);
    return PresetInstance{std::move(p.model), std::move(p.noise), p.L};
  }
  if (preset == "fig_s3" || preset == "fig_s5") {
    NoiseModel noise = NoiseModel::white(M, 1, N, 1.0);
    OddSOptions o;
    o.theta_seed = 2;
    ExampleModel ex =
        example_model_odd_s(M, preset == "fig_s3" ? 2 : 3, noise.c, 1.0, o);
    return PresetInstance{std::move(ex.model), std::move(noise), 1};
  }
  if (preset == "fig_s2") {
    NoiseModel noise = NoiseModel::white(M, 1, N, 1.0);
    S2Options o;
    o.theta_seed = 3;
    ExampleModel ex = example_model_s2(M, noise.c, 1.0, o);
    return PresetInstance{std::move(ex.model), std::move(noise), 1};
  }
  if (preset == "noise_only") {
    NoiseModel noise = noise_type == "cosine" ? NoiseModel::cosine(M, L, N)
                                              : NoiseModel::white(M, L, N, sigma2);
    return PresetInstance{std::nullopt, std::move(noise), L};
  }
  throw std::invalid_argument("build_preset: unknown preset '" + preset + "'");
}

namespace {

struct KindFlags {
  bool autocov = false;
  bool cca = false;
};

KindFlags parse_kind(const std::string& kind) {
  if (kind == "autocov") return {true, false};
  if (kind == "cca") return {false, true};
  if (kind == "both") return {true, true};
  throw std::invalid_argument("kind must be autocov, cca or both");
}

struct TrialOutcome {
  TrialRecord autocov;
  TrialRecord cca;
};

VectorXd head12(const VectorXd& v) {
  return v.head(std::min<Eigen::Index>(12, v.size()));
}

// One simulated realization, both spectra as requested. Pure function of the
// seed: the parallel and serial drivers produce identical outcomes.
TrialOutcome run_one_trial(const PresetInstance& inst, const KindFlags& kinds,
                           double eps1, double eps2, double autocov_edge,
                           double cca_edge, std::uint64_t seed) {
  const MatrixXcd samples =
      inst.model ? simulate(*inst.model, inst.noise, inst.noise.N, inst.L, seed)
                 : simulate_noise_only(inst.noise, inst.noise.N, inst.L, seed);
  const HankelPair pair = build_hankel_pair(samples, inst.L);

  TrialOutcome out;
  if (kinds.autocov) {
    const EmpiricalSpectrum spec = autocov_sample_spectrum(pair);
    out.autocov.seed = seed;
    out.autocov.M = inst.noise.M;
    out.autocov.N = inst.noise.N;
    out.autocov.model_kind = "autocov";
    out.autocov.s_threshold = estimate_s_threshold(spec, autocov_edge, eps1);
    out.autocov.s_ratio = estimate_s_ratio(spec, eps2).s;
    out.autocov.top_eigs = head12(spec.eigs);
  }
  if (kinds.cca) {
    const EmpiricalSpectrum spec = cca_sample_spectrum(pair);
    out.cca.seed = seed;
    out.cca.M = inst.noise.M;
    out.cca.N = inst.noise.N;
    out.cca.model_kind = "cca";
    out.cca.s_threshold = estimate_s_threshold(spec, cca_edge, eps1);
    out.cca.s_ratio = estimate_s_ratio(spec, eps2).s;
    out.cca.top_eigs = head12(spec.eigs);
  }
  return out;
}

void run_trials(const PresetInstance& inst, const KindFlags& kinds,
                const ExperimentConfig& config, double autocov_edge,
                double cca_edge, int M, long N,
                std::vector<TrialOutcome>& outcomes) {
  outcomes.resize(config.trials);
  if (config.threads == 1) {
    // serial reference path
    for (int t = 0; t < config.trials; ++t)
      outcomes[t] = run_one_trial(inst, kinds, config.eps1, config.eps2,
                                  autocov_edge, cca_edge,
                                  derive_trial_seed(config.seed, M, N, t));
    return;
  }
#ifdef _OPENMP
  if (config.threads > 1) omp_set_num_threads(config.threads);
#pragma omp parallel for schedule(dynamic)
#endif
  for (int t = 0; t < config.trials; ++t)
    outcomes[t] = run_one_trial(inst, kinds, config.eps1, config.eps2,
                                autocov_edge, cca_edge,
                                derive_trial_seed(config.seed, M, N, t));
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

double TableResult::probability(int M, long N, const std::string& estimator,
                                int value) const {
  for (const auto& r : rows)
    if (r.M == M && r.N == N && r.estimator == estimator && r.value == value)
      return r.probability;
  return 0.0;
}

std::string TableResult::to_csv() const {
  std::ostringstream os;
  os << "M,N,estimator,value,probability\n";
  for (const auto& r : rows)
    os << r.M << ',' << r.N << ',' << r.estimator << ',' << r.value << ','
       << format17(r.probability) << '\n';
  return os.str();
}

TableResult run_table(const ExperimentConfig& config) {
  if (config.trials < 1)
    throw std::invalid_argument("run_table: trials must be >= 1");
  const KindFlags kinds = parse_kind(config.kind);

  TableResult result;
  for (const auto& [M, N] : config.grid) {
    const PresetInstance inst = build_preset(config.preset, M, N, config.L,
                                             config.noise_type, config.sigma2);
    const double cca_edge = 4.0 * inst.noise.c * (1.0 - inst.noise.c);
    const double autocov_edge =
        kinds.autocov ? support_edge_autocov(inst.noise).x_plus : 0.0;

    GridOracle oracle;
    oracle.M = M;
    oracle.N = N;
    if (inst.model) {
      const SignalStats stats = theoretical_stats(*inst.model, inst.noise, inst.L);
      if (kinds.autocov) oracle.autocov = autocov_outliers(inst.noise, stats);
      if (kinds.cca) oracle.cca = cca_outliers(inst.noise.c, stats);
    }
    result.oracles.push_back(std::move(oracle));

    std::vector<TrialOutcome> outcomes;
    run_trials(inst, kinds, config, autocov_edge, cca_edge, M, N, outcomes);

    // deterministic reduction in trial-index order
    auto reduce = [&](const std::string& prefix,
                      auto member) {
      std::vector<long> thr_count(10, 0), rat_count(10, 0);
      for (const auto& o : outcomes) {
        const TrialRecord& rec = o.*member;
        ++thr_count[std::min(rec.s_threshold, 9)];
        ++rat_count[std::min(rec.s_ratio, 9)];
      }
      for (int v = 0; v <= 9; ++v)
        result.rows.push_back({M, N, prefix + "_s_threshold", v,
                               static_cast<double>(thr_count[std::min(v, 9)]) /
                                   config.trials});
      for (int v = 0; v <= 9; ++v)
        result.rows.push_back({M, N, prefix + "_s_ratio", v,
                               static_cast<double>(rat_count[std::min(v, 9)]) /
                                   config.trials});
    };
    if (kinds.autocov) reduce("autocov", &TrialOutcome::autocov);
    if (kinds.cca) reduce("cca", &TrialOutcome::cca);
    for (const auto& o : outcomes) {
      if (kinds.autocov) result.records.push_back(o.autocov);
      if (kinds.cca) result.records.push_back(o.cca);
    }
  }
  return result;
}

namespace {

std::vector<double> fd_bin_edges(const VectorXd& values, int bins) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  if (bins <= 0) {
    const double q1 = v[v.size() / 4];
    const double q3 = v[(3 * v.size()) / 4];
    const double width =
        2.0 * (q3 - q1) / std::cbrt(static_cast<double>(v.size()));
    bins = width > 0.0
               ? std::max(1, static_cast<int>(std::ceil((hi - lo) / width)))
               : 1;
    bins = std::min(bins, 400);
  }
  std::vector<double> edges(bins + 1);
  const double span = hi > lo ? hi - lo : 1.0;
  for (int i = 0; i <= bins; ++i)
    edges[i] = lo + span * i / bins;
  return edges;
}

} // namespace

std::string FigureResult::to_hist_csv() const {
  std::ostringstream os;
  os << "bin_left,bin_right,count\n";
  for (size_t i = 0; i + 1 < bin_edges.size(); ++i)
    os << format17(bin_edges[i]) << ',' << format17(bin_edges[i + 1]) << ','
       << counts[i] << '\n';
  return os.str();
}

std::string FigureResult::to_density_csv() const {
  std::ostringstream os;
  os << "x,density\n";
  for (int i = 0; i < density.grid.size(); ++i)
    os << format17(density.grid[i]) << ',' << format17(density.density[i]) << '\n';
  return os.str();
}

std::string FigureResult::to_markers_csv() const {
  std::ostringstream os;
  os << "rho\n";
  for (int i = 0; i < markers.size(); ++i) os << format17(markers[i]) << '\n';
  return os.str();
}

FigureResult run_figure(const ExperimentConfig& config, const FigureOptions& opts) {
  const KindFlags kinds = parse_kind(config.kind);
  if (kinds.autocov == kinds.cca)
    throw std::invalid_argument("run_figure: kind must be autocov or cca");
  if (config.grid.empty())
    throw std::invalid_argument("run_figure: empty grid");
  const auto [M, N] = config.grid.front();
  const PresetInstance inst = build_preset(config.preset, M, N, config.L,
                                           config.noise_type, config.sigma2);

  FigureResult fig;
  fig.M = M;
  fig.N = N;
  fig.kind = kinds.autocov ? "autocov" : "cca";

  const std::uint64_t seed = derive_trial_seed(config.seed, M, N, 0);
  const MatrixXcd samples =
      inst.model ? simulate(*inst.model, inst.noise, inst.noise.N, inst.L, seed)
                 : simulate_noise_only(inst.noise, inst.noise.N, inst.L, seed);
  const HankelPair pair = build_hankel_pair(samples, inst.L);

  VectorXd eigs;
  if (kinds.autocov) {
    eigs = autocov_sample_spectrum(pair).eigs;
    const SupportAutocov edge = support_edge_autocov(inst.noise);
    fig.bulk_edge = edge.x_plus;
    const int n = opts.density_points;
    VectorXd grid(n);
    const double lo = std::min(opts.left_margin, edge.x_plus / 2.0);
    for (int i = 0; i < n; ++i)
      grid[i] = lo + (edge.x_plus - lo) * i / (n - 1.0);
    fig.density = density_autocov(inst.noise, grid).measure;
  } else {
    const EmpiricalSpectrum spec = cca_sample_spectrum(pair);
    eigs = spec.eigs.head(inst.noise.M * inst.L); // nonzero part
    const SupportCca sup = cca_support(inst.noise.c);
    fig.bulk_edge = sup.bulk_right;
    const int n = opts.density_points;
    VectorXd grid(n);
    const double lo = sup.bulk_right * 1e-4;
    const double hi = sup.bulk_right * (1.0 - 1e-9);
    for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * i / (n - 1.0);
    fig.density = cca_density(inst.noise.c, grid);
  }

  fig.bin_edges = fd_bin_edges(eigs, opts.bins);
  fig.counts.assign(fig.bin_edges.size() - 1, 0);
  for (int i = 0; i < eigs.size(); ++i) {
    const double x = eigs[i];
    size_t b = fig.bin_edges.size() - 2;
    for (size_t j = 0; j + 1 < fig.bin_edges.size(); ++j)
      if (x < fig.bin_edges[j + 1]) { b = j; break; }
    ++fig.counts[b];
  }

  if (inst.model) {
    const SignalStats stats = theoretical_stats(*inst.model, inst.noise, inst.L);
    const SpikeReport rep = kinds.autocov
                                ? autocov_outliers(inst.noise, stats)
                                : cca_outliers(inst.noise.c, stats);
    fig.markers = rep.rho;
  }
  return fig;
}

DeviationSummary oracle_vs_empirical(const ExperimentConfig& config) {
  const KindFlags kinds = parse_kind(config.kind);
  if (kinds.autocov == kinds.cca)
    throw std::invalid_argument("oracle_vs_empirical: kind must be autocov or cca");
  if (config.grid.empty())
    throw std::invalid_argument("oracle_vs_empirical: empty grid");
  const auto [M, N] = config.grid.front();
  const PresetInstance inst = build_preset(config.preset, M, N, config.L,
                                           config.noise_type, config.sigma2);

  DeviationSummary out;
  out.trials = config.trials;
  VectorXd rho;
  if (inst.model) {
    const SignalStats stats = theoretical_stats(*inst.model, inst.noise, inst.L);
    const SpikeReport rep = kinds.autocov
                                ? autocov_outliers(inst.noise, stats)
                                : cca_outliers(inst.noise.c, stats);
    rho = rep.rho;
  }
  out.s = static_cast<int>(rho.size());
  if (out.s == 0) {
    out.median.resize(0);
    out.p90.resize(0);
    return out;
  }

  const double cca_edge = 4.0 * inst.noise.c * (1.0 - inst.noise.c);
  const double autocov_edge =
      kinds.autocov ? support_edge_autocov(inst.noise).x_plus : 0.0;
  std::vector<TrialOutcome> outcomes;
  run_trials(inst, kinds, config, autocov_edge, cca_edge, M, N, outcomes);

  MatrixXd dev(config.trials, out.s);
  for (int t = 0; t < config.trials; ++t) {
    const TrialRecord& rec = kinds.autocov ? outcomes[t].autocov : outcomes[t].cca;
    for (int k = 0; k < out.s; ++k)
      dev(t, k) = k < rec.top_eigs.size()
                      ? std::abs(rec.top_eigs[k] - rho[k])
                      : std::abs(rho[k]);
  }
  out.median.resize(out.s);
  out.p90.resize(out.s);
  for (int k = 0; k < out.s; ++k) {
    std::vector<double> col(dev.col(k).data(), dev.col(k).data() + config.trials);
    std::sort(col.begin(), col.end());
    out.median[k] = col[col.size() / 2];
    out.p90[k] = col[std::min(col.size() - 1,
                              static_cast<size_t>(std::ceil(0.9 * col.size())))];
  }
  return out;
}

} // namespace ssdim
