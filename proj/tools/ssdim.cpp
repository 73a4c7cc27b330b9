// ssdim - spectral estimation of the minimal state-space dimension of
// high-dimensional time series: deterministic-equivalent densities, spike
// oracles, the two estimators, and seeded Monte-Carlo reproductions.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ssdim/experiment_runner.hpp"
#include "ssdim/noise_equivalents.hpp"
#include "ssdim/serialize.hpp"

namespace fs = std::filesystem;
using namespace ssdim;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  is >> j;
  return j;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

NoiseModel noise_from_config(const json& j) {
  const int M = j.at("M").get<int>();
  const int L = j.value("L", 1);
  const long N = j.at("N").get<long>();
  return noise_from_json(j.value("noise", json{{"type", "white"}}), M, L, N);
}

// -------------------------------------------------------------------------
// density
// -------------------------------------------------------------------------

int cmd_density(const std::string& kind, const std::string& config_path,
                const std::string& out_dir) {
  const json cfg = read_json_file(config_path);
  ensure_dir(out_dir);
  const int points = cfg.value("grid_points", 1000);
  std::ostringstream csv;
  csv << "x,density\n";
  json support;

  if (kind == "autocov") {
    const NoiseModel noise = noise_from_config(cfg);
    const SupportAutocov sup = autocov_support(noise);
    const double lo = cfg.value("left_margin", 1e-3);
    VectorXd grid(points);
    for (int i = 0; i < points; ++i)
      grid[i] = lo + (sup.x_plus - lo) * i / (points - 1.0);
    const AutocovDensity dens = density_autocov(noise, grid);
    for (int i = 0; i < points; ++i) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", grid[i],
                    dens.measure.density[i]);
      csv << buf;
    }
    support = to_json(sup);
    support["mass_below_grid"] = dens.mass_below_grid;
  } else if (kind == "cca") {
    double c;
    if (cfg.contains("c")) {
      c = cfg.at("c").get<double>();
    } else {
      const NoiseModel noise = noise_from_config(cfg);
      c = noise.c;
    }
    const SupportCca sup = cca_support(c);
    VectorXd grid(points);
    for (int i = 0; i < points; ++i) {
      const double u = (i + 0.5) / (points + 1.0);
      grid[i] = sup.bulk_right * u * u; // sqrt spacing resolves the 0+ blowup
    }
    const SpectralMeasure dens = cca_density(c, grid);
    for (int i = 0; i < points; ++i) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", grid[i], dens.density[i]);
      csv << buf;
    }
    support = to_json(sup);
    if (!dens.atoms.empty()) support["atom_mass_of_nu"] = dens.atoms[0].second;
  } else {
    throw std::invalid_argument("density: kind must be autocov or cca");
  }

  write_text_file(out_dir + "/density_" + kind + ".csv", csv.str());
  write_text_file(out_dir + "/support_" + kind + ".json", support.dump(2) + "\n");
  std::cout << support.dump(2) << std::endl;
  return 0;
}

// -------------------------------------------------------------------------
// oracle
// -------------------------------------------------------------------------

int cmd_oracle(const std::string& config_path) {
  const json cfg = read_json_file(config_path);
  PresetInstance inst = [&] {
    if (cfg.contains("model")) {
      NoiseModel noise = noise_from_config(cfg);
      return PresetInstance{model_from_json(cfg.at("model")), std::move(noise),
                            cfg.value("L", 1)};
    }
    const int M = cfg.value("M", 0);
    const long N = cfg.value("N", 0L);
    const json noise = cfg.value("noise", json{{"type", "white"}});
    return build_preset(cfg.value("preset", "table"), M, N, cfg.value("L", 1),
                        noise.value("type", "white"), noise.value("sigma2", 1.0));
  }();

  json out;
  if (!inst.model) {
    // pure noise: both oracles are empty by construction
    out["autocov"] = json{{"s", 0}};
    out["cca"] = json{{"s", 0}};
  } else {
    const SignalStats stats = theoretical_stats(*inst.model, inst.noise, inst.L);
    const std::string kind = cfg.value("kind", "both");
    if (kind == "autocov" || kind == "both")
      out["autocov"] = to_json(autocov_outliers(inst.noise, stats));
    if (kind == "cca" || kind == "both")
      out["cca"] =
          to_json(cca_outliers(inst.noise.c, stats, cfg.value("kappa", 1e-3)));
  }
  std::cout << out.dump(2) << std::endl;
  return 0;
}

// -------------------------------------------------------------------------
// simulate
// -------------------------------------------------------------------------

int cmd_simulate(const std::string& preset, int M, long N, int L,
                 std::uint64_t seed, const std::string& out_path) {
  const PresetInstance inst = build_preset(preset, M, N, L, "white", 1.0);
  const MatrixXcd samples =
      inst.model
          ? simulate(*inst.model, inst.noise, inst.noise.N, inst.L, seed)
          : simulate_noise_only(inst.noise, inst.noise.N, inst.L, seed);
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot open output file: " + out_path);
  write_samples_csv(os, samples, inst.L);
  std::cout << "wrote " << samples.rows() << "x" << samples.cols()
            << " samples (L = " << inst.L << ") to " << out_path << "\n";
  return 0;
}

// -------------------------------------------------------------------------
// estimate
// -------------------------------------------------------------------------

int cmd_estimate(const std::string& input, const std::string& kind,
                 double eps1, double eps2, double sigma2,
                 const std::string& config_path,
                 const std::string& spectrum_out) {
  std::ifstream is(input);
  if (!is) throw std::invalid_argument("cannot open samples file: " + input);
  const SamplesFile file = read_samples_csv(is);
  const HankelPair pair = build_hankel_pair(file.samples, file.L);

  json out;
  out["M"] = pair.M;
  out["L"] = pair.L;
  out["N"] = pair.N;

  auto report = [&](const EmpiricalSpectrum& spec, double edge,
                    const std::string& name) {
    json r;
    r["edge"] = edge;
    r["s_threshold"] = estimate_s_threshold(spec, edge, eps1);
    const RatioEstimate ratio = estimate_s_ratio(spec, eps2);
    r["s_ratio"] = ratio.s;
    r["s_ratio_overflow"] = ratio.overflow;
    out[name] = std::move(r);
  };

  if (kind == "autocov" || kind == "both") {
    NoiseModel noise = [&] {
      if (!config_path.empty()) {
        const json cfg = read_json_file(config_path);
        return noise_from_json(cfg.value("noise", json{{"type", "white"}}),
                               pair.M, pair.L, pair.N);
      }
      return NoiseModel::white(pair.M, pair.L, pair.N, sigma2);
    }();
    const EmpiricalSpectrum spec = autocov_sample_spectrum(pair);
    report(spec, support_edge_autocov(noise).x_plus, "autocov");
    if (!spectrum_out.empty())
      write_text_file(spectrum_out + ".autocov.csv", spectrum_to_csv(spec));
  }
  if (kind == "cca" || kind == "both") {
    const double c =
        static_cast<double>(pair.M) * pair.L / static_cast<double>(pair.N);
    const EmpiricalSpectrum spec = cca_sample_spectrum(pair);
    report(spec, 4.0 * c * (1.0 - c), "cca");
    if (!spectrum_out.empty())
      write_text_file(spectrum_out + ".cca.csv", spectrum_to_csv(spec));
  }
  std::cout << out.dump(2) << std::endl;
  return 0;
}

// -------------------------------------------------------------------------
// reproduce-*
// -------------------------------------------------------------------------

std::vector<std::pair<int, long>> parse_grid(const std::string& arg) {
  std::vector<std::pair<int, long>> grid;
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int M = 0;
    long N = 0;
    if (std::sscanf(item.c_str(), "%dx%ld", &M, &N) != 2 || M <= 0 || N <= 0)
      throw CLI::ValidationError("grid", "expected MxN[,MxN...]");
    grid.emplace_back(M, N);
  }
  if (grid.empty()) throw CLI::ValidationError("grid", "empty grid");
  return grid;
}

int cmd_reproduce_table(const std::string& kind, const std::string& grid_arg,
                        int trials, std::uint64_t seed, int threads,
                        const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.preset = "table";
  cfg.kind = kind;
  cfg.grid = parse_grid(grid_arg);
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = threads;
  const TableResult res = run_table(cfg);
  ensure_dir(out_dir);
  const std::string name = kind == "autocov" ? "table1" : "table2";
  write_text_file(out_dir + "/" + name + ".csv", res.to_csv());
  write_text_file(out_dir + "/" + name + "_summary.json",
                  table_summary_json(cfg, res).dump(2) + "\n");
  std::cout << res.to_csv();
  return 0;
}

int cmd_reproduce_figures(std::uint64_t seed, int threads,
                          const std::string& out_dir) {
  ensure_dir(out_dir);
  struct FigureSpec {
    const char* name;
    const char* preset;
    const char* kind;
    int M;
    long N;
  };
  // figs 1-3: c = 1/2, N = 1200 histograms; figs 4-5: the L=4 cosine models
  const FigureSpec figures[] = {
      {"fig1_s3", "fig_s3", "autocov", 600, 1200},
      {"fig2_s5", "fig_s5", "autocov", 600, 1200},
      {"fig3_s2", "fig_s2", "autocov", 600, 1200},
      {"fig4_cca1", "cca_fig", "cca", 130, 2000},
      {"fig5_cca2", "cca_fig2", "cca", 130, 2000},
  };
  for (const auto& f : figures) {
    ExperimentConfig cfg;
    cfg.preset = f.preset;
    cfg.kind = f.kind;
    cfg.grid = {{f.M, f.N}};
    cfg.seed = seed;
    cfg.threads = threads;
    const FigureResult fig = run_figure(cfg);
    write_text_file(out_dir + "/" + f.name + "_hist.csv", fig.to_hist_csv());
    write_text_file(out_dir + "/" + f.name + "_density.csv", fig.to_density_csv());
    write_text_file(out_dir + "/" + f.name + "_markers.csv", fig.to_markers_csv());
    std::cout << f.name << ": " << fig.markers.size()
              << " outlier markers, bulk edge " << fig.bulk_edge << "\n";
  }
  // fig 6 data: eigenvalue ratios of one realization per kind
  ExperimentConfig cfg;
  cfg.preset = "table";
  cfg.kind = "both";
  cfg.grid = {{600, 2400}};
  cfg.trials = 1;
  cfg.seed = seed;
  cfg.threads = threads;
  const TableResult res = run_table(cfg);
  std::ostringstream ratios;
  ratios << "kind,i,ratio\n";
  for (const auto& rec : res.records) {
    for (int i = 0; i + 1 < rec.top_eigs.size(); ++i) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s,%d,%.17g\n", rec.model_kind.c_str(),
                    i, rec.top_eigs[i + 1] / rec.top_eigs[i]);
      ratios << buf;
    }
  }
  write_text_file(out_dir + "/fig6_eigenvalue_ratios.csv", ratios.str());
  std::cout << "fig6_eigenvalue_ratios: written\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral estimators of the minimal state-space dimension"};
  app.require_subcommand(1);

  std::string kind = "cca", config_path, out_dir = ".", input, spectrum_out;
  std::string preset = "table", out_path = "samples.csv";
  double eps1 = 0.01, eps2 = 0.05, sigma2 = 1.0;
  std::string grid_arg = "200x800";
  int trials = 100, threads = 0, M = 100, L = 1;
  long N = 400;
  std::uint64_t seed = 1;

  auto* density = app.add_subcommand(
      "density", "deterministic-equivalent density and support summary");
  density->add_option("--kind", kind, "autocov or cca")->required();
  density->add_option("--config", config_path, "JSON config")->required();
  density->add_option("--out", out_dir, "output directory");

  auto* oracle = app.add_subcommand(
      "oracle", "finite-N spike prediction (counts and locations) as JSON");
  oracle->add_option("--config", config_path, "JSON config")->required();

  auto* simulate_cmd = app.add_subcommand(
      "simulate", "write a seeded preset realization as a samples CSV");
  simulate_cmd->add_option("--preset", preset,
                           "table | cca_fig | cca_fig2 | fig_s* | noise_only");
  simulate_cmd->add_option("--M", M, "cross-section dimension");
  simulate_cmd->add_option("--N", N, "sample size");
  simulate_cmd->add_option("--L", L, "Hankel depth (noise_only only)");
  simulate_cmd->add_option("--seed", seed, "seed");
  simulate_cmd->add_option("--out", out_path, "output CSV path");

  auto* estimate = app.add_subcommand(
      "estimate", "run both estimators of s on a samples CSV");
  estimate->add_option("--input", input, "samples CSV (header M,L)")->required();
  estimate->add_option("--kind", kind, "autocov, cca or both");
  estimate->add_option("--eps1", eps1, "threshold-estimator margin");
  estimate->add_option("--eps2", eps2, "ratio-estimator margin");
  estimate->add_option("--sigma2", sigma2, "white-noise variance for the edge");
  estimate->add_option("--config", config_path, "noise descriptor JSON");
  estimate->add_option("--spectrum-out", spectrum_out,
                       "also dump the sample spectra under this path prefix");

  auto* table1 = app.add_subcommand(
      "reproduce-table1", "estimator frequencies, autocovariance spectrum");
  auto* table2 = app.add_subcommand(
      "reproduce-table2", "estimator frequencies, canonical-correlation spectrum");
  for (auto* t : {table1, table2}) {
    t->add_option("--grid", grid_arg, "grid points MxN[,MxN...]");
    t->add_option("--trials", trials, "Monte-Carlo trials")
        ->check(CLI::PositiveNumber);
    t->add_option("--seed", seed, "master seed");
    t->add_option("--threads", threads, "0 = default pool, 1 = serial");
    t->add_option("--out", out_dir, "output directory");
  }

  auto* figures = app.add_subcommand(
      "reproduce-figures", "histogram + density + marker data for the figures");
  figures->add_option("--seed", seed, "master seed");
  figures->add_option("--threads", threads, "0 = default pool, 1 = serial");
  figures->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (density->parsed()) return cmd_density(kind, config_path, out_dir);
    if (oracle->parsed()) return cmd_oracle(config_path);
    if (simulate_cmd->parsed())
      return cmd_simulate(preset, M, N, L, seed, out_path);
    if (estimate->parsed())
      return cmd_estimate(input, kind, eps1, eps2, sigma2, config_path,
                          spectrum_out);
    if (table1->parsed())
      return cmd_reproduce_table("autocov", grid_arg, trials, seed, threads,
                                 out_dir);
    if (table2->parsed())
      return cmd_reproduce_table("cca", grid_arg, trials, seed, threads,
                                 out_dir);
    if (figures->parsed())
      return cmd_reproduce_figures(seed, threads, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
