#include <doctest.h>

#include <sstream>

#include "ssdim/serialize.hpp"

using namespace ssdim;

TEST_CASE("complex matrix json round trip") {
  MatrixXcd m(2, 3);
  m << cplx(1, 2), cplx(0, -1), cplx(3, 0),
       cplx(-2, 0.5), cplx(0, 0), cplx(1e-7, 1e7);
  const MatrixXcd back = matrix_from_json(matrix_to_json(m));
  CHECK((m - back).norm() == 0.0);
}

TEST_CASE("state-space model json round trip") {
  const auto ex = example_model_odd_s(8, 2, 0.25, 1.0);
  const StateSpaceModel back = model_from_json(to_json(ex.model));
  CHECK((back.A - ex.model.A).norm() == 0.0);
  CHECK((back.B - ex.model.B).norm() == 0.0);
  CHECK((back.C - ex.model.C).norm() == 0.0);
  CHECK((back.D - ex.model.D).norm() == 0.0);
}

TEST_CASE("noise descriptors") {
  const NoiseModel w = noise_from_json(json{{"type", "white"}, {"sigma2", 2.0}},
                                       10, 1, 100);
  CHECK(w.lambda[0] == 2.0);
  const NoiseModel c = noise_from_json(json{{"type", "cosine"}}, 10, 2, 100);
  CHECK(c.lambda[0] == doctest::Approx(0.5 + M_PI / 4));
  CHECK_THROWS(noise_from_json(json{{"type", "nope"}}, 10, 1, 100));
}

TEST_CASE("samples csv round trip") {
  MatrixXcd y(2, 4);
  y << cplx(1, -1), cplx(2, 0.5), cplx(0, 0), cplx(-3, 2),
       cplx(0.25, 8), cplx(1e-9, -1e9), cplx(7, 7), cplx(-1, 0);
  std::stringstream ss;
  write_samples_csv(ss, y, 2);
  const SamplesFile back = read_samples_csv(ss);
  CHECK(back.L == 2);
  CHECK((back.samples - y).norm() == 0.0);

  std::stringstream bad("not,a,header\n1,2,3\n");
  CHECK_THROWS(read_samples_csv(bad));
}

TEST_CASE("config parsing defaults and validation") {
  const json j{{"preset", "table"}, {"kind", "cca"}, {"M", 100}, {"N", 400},
               {"trials", 3}, {"seed", 7}};
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.grid.size() == 1);
  CHECK(cfg.grid[0].first == 100);
  CHECK(cfg.eps1 == 0.01);
  CHECK(cfg.eps2 == 0.05);
  CHECK_THROWS(config_from_json(json{{"preset", "table"}})); // no grid
  CHECK_THROWS(config_from_json(json{{"M", 10}, {"N", 100}, {"trials", 0}}));
}

TEST_CASE("spike report json carries the count and locations") {
  SpikeReport rep;
  rep.kind = SpikeReport::Kind::cca;
  rep.s = 2;
  rep.rho.resize(2);
  rep.rho << 0.9, 0.8;
  rep.edge = 0.75;
  const json j = to_json(rep);
  CHECK(j["s"] == 2);
  CHECK(j["kind"] == "cca");
  CHECK(j["rho"][1] == 0.8);
}

TEST_CASE("table summary embeds oracle reports") {
  ExperimentConfig cfg;
  cfg.preset = "table";
  cfg.kind = "cca";
  cfg.grid = {{40, 160}};
  cfg.trials = 2;
  const TableResult res = run_table(cfg);
  const json j = table_summary_json(cfg, res);
  CHECK(j["oracles"][0]["cca"]["s"] == 1);
  CHECK(j["rows"].size() == res.rows.size());
}
