// Benchmark of the Monte-Carlo trial kernel: OpenMP pool vs the serial
// reference path, verifying on the way that both produce identical tables.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssdim/experiment_runner.hpp"

using namespace ssdim;
using clock_type = std::chrono::steady_clock;

namespace {

double run_timed(ExperimentConfig cfg, std::string* csv) {
  const auto start = clock_type::now();
  const TableResult res = run_table(cfg);
  const auto stop = clock_type::now();
  *csv = res.to_csv();
  return std::chrono::duration<double>(stop - start).count();
}

} // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  cfg.preset = "table";
  cfg.kind = "both";
  cfg.grid = {{100, 400}};
  cfg.trials = argc > 1 ? std::atoi(argv[1]) : 24;
  cfg.seed = 7;

#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp not enabled in this build\n");
#endif
  std::printf("preset=%s M=%d N=%ld trials=%d\n", cfg.preset.c_str(),
              cfg.grid[0].first, cfg.grid[0].second, cfg.trials);

  std::string serial_csv, parallel_csv;
  cfg.threads = 1;
  const double t_serial = run_timed(cfg, &serial_csv);
  cfg.threads = 0;
  const double t_parallel = run_timed(cfg, &parallel_csv);

  std::printf("serial reference: %8.3f s\n", t_serial);
  std::printf("openmp pool:      %8.3f s  (speedup %.2fx)\n", t_parallel,
              t_serial / t_parallel);
  if (serial_csv != parallel_csv) {
    std::printf("MISMATCH: serial and parallel tables differ\n");
    return 1;
  }
  std::printf("tables identical: yes\n");
  return 0;
}
