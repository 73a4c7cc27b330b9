#include "ssdim/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssdim {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

} // namespace

json matrix_to_json(const MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXcd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix_from_json: expected nested array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (int k = 0; k < cols; ++k) {
      const auto& e = j[i][k];
      if (e.is_number())
        m(i, k) = cplx(e.get<double>(), 0.0);
      else
        m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

json to_json(const NoiseModel& noise) {
  json lam = json::array();
  for (int i = 0; i < noise.lambda.size(); ++i) lam.push_back(noise.lambda[i]);
  return json{{"M", noise.M}, {"L", noise.L}, {"N", noise.N},
              {"c", noise.c}, {"lambda", std::move(lam)}};
}

NoiseModel noise_from_json(const json& j, int M, int L, long N) {
  const std::string type = j.value("type", "white");
  if (type == "white")
    return NoiseModel::white(M, L, N, j.value("sigma2", 1.0));
  if (type == "cosine") return NoiseModel::cosine(M, L, N);
  if (type == "spectrum") {
    const auto& lam = j.at("lambda");
    VectorXd v(lam.size());
    for (size_t i = 0; i < lam.size(); ++i) v[i] = lam[i].get<double>();
    return NoiseModel(M, L, N, std::move(v));
  }
  throw std::invalid_argument("noise type must be white, cosine or spectrum");
}

json to_json(const StateSpaceModel& model) {
  return json{{"A", matrix_to_json(model.A)},
              {"B", matrix_to_json(model.B)},
              {"C", matrix_to_json(model.C)},
              {"D", matrix_to_json(model.D)}};
}

StateSpaceModel model_from_json(const json& j) {
  return StateSpaceModel::make_checked(
      matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
      matrix_from_json(j.at("C")), matrix_from_json(j.at("D")));
}

json to_json(const SpikeReport& report) {
  return json{
      {"kind", report.kind == SpikeReport::Kind::autocov ? "autocov" : "cca"},
      {"s", report.s},
      {"rho", vector_to_json(report.rho)},
      {"oracle_eigs", vector_to_json(report.oracle_eigs)},
      {"edge", report.edge},
      {"edge_degenerate", report.edge_degenerate},
      {"no_escape", report.no_escape}};
}

json to_json(const EmpiricalSpectrum& spec) {
  return json{
      {"kind",
       spec.kind == EmpiricalSpectrum::Kind::autocov_squared ? "autocov" : "cca"},
      {"M", spec.M}, {"L", spec.L}, {"N", spec.N}, {"c", spec.c},
      {"eigenvalues", vector_to_json(spec.eigs)}};
}

json to_json(const SupportAutocov& support) {
  json intervals = json::array();
  for (const auto& [a, b] : support.intervals) intervals.push_back({a, b});
  return json{{"w_plus", support.w_plus},
              {"x_plus", support.x_plus},
              {"intervals", std::move(intervals)}};
}

json to_json(const SupportCca& support) {
  return json{{"bulk_right", support.bulk_right},
              {"has_unit_atom", support.has_unit_atom},
              {"atom_mass_at_one", support.atom_mass_at_one}};
}

json to_json(const DeviationSummary& dev) {
  return json{{"s", dev.s},
              {"trials", dev.trials},
              {"median", vector_to_json(dev.median)},
              {"p90", vector_to_json(dev.p90)}};
}

std::string spectrum_to_csv(const EmpiricalSpectrum& spec) {
  std::ostringstream os;
  os << "eigenvalue\n";
  for (int i = 0; i < spec.eigs.size(); ++i) os << fmt17(spec.eigs[i]) << '\n';
  return os.str();
}

void write_samples_csv(std::ostream& os, const MatrixXcd& samples, int L) {
  os << samples.rows() << ',' << L << '\n';
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < samples.rows(); ++i) {
      for (int j = 0; j < samples.cols(); ++j) {
        if (j) os << ',';
        os << fmt17(pass == 0 ? samples(i, j).real() : samples(i, j).imag());
      }
      os << '\n';
    }
}

SamplesFile read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("read_samples_csv: empty file");
  int M = 0, L = 0;
  if (std::sscanf(line.c_str(), "%d,%d", &M, &L) != 2 || M <= 0 || L <= 0)
    throw std::runtime_error("read_samples_csv: bad header, expected 'M,L'");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != 2 * M)
    throw std::runtime_error("read_samples_csv: expected 2M data rows");
  const size_t T = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != T) throw std::runtime_error("read_samples_csv: ragged rows");
  SamplesFile out;
  out.L = L;
  out.samples.resize(M, static_cast<long>(T));
  for (int i = 0; i < M; ++i)
    for (size_t j = 0; j < T; ++j)
      out.samples(i, static_cast<long>(j)) = cplx(rows[i][j], rows[i + M][j]);
  return out;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.preset = j.value("preset", cfg.preset);
  cfg.kind = j.value("kind", cfg.kind);
  cfg.grid.clear();
  if (j.contains("grid")) {
    for (const auto& g : j.at("grid"))
      cfg.grid.emplace_back(g[0].get<int>(), g[1].get<long>());
  } else if (j.contains("M") && j.contains("N")) {
    cfg.grid = {{j.at("M").get<int>(), j.at("N").get<long>()}};
  }
  cfg.L = j.value("L", cfg.L);
  if (j.contains("noise")) {
    cfg.noise_type = j.at("noise").value("type", "white");
    cfg.sigma2 = j.at("noise").value("sigma2", 1.0);
  }
  cfg.trials = j.value("trials", cfg.trials);
  cfg.eps1 = j.value("eps1", cfg.eps1);
  cfg.eps2 = j.value("eps2", cfg.eps2);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.out_dir = j.value("out", cfg.out_dir);
  if (cfg.grid.empty())
    throw std::invalid_argument("config: grid (or M and N) is required");
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  for (auto& [M, N] : cfg.grid) {
    const int L = cfg.L;
    if (static_cast<double>(M) * L / N >= 1.0 && cfg.preset == "noise_only")
      throw std::invalid_argument("config: grid point with c = ML/N >= 1");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  json j;
  is >> j;
  return config_from_json(j);
}

json table_summary_json(const ExperimentConfig& config, const TableResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back(json{{"M", r.M}, {"N", r.N}, {"estimator", r.estimator},
                        {"value", r.value}, {"probability", r.probability}});
  json oracles = json::array();
  for (const auto& o : result.oracles) {
    json e{{"M", o.M}, {"N", o.N}};
    if (o.autocov) e["autocov"] = to_json(*o.autocov);
    if (o.cca) e["cca"] = to_json(*o.cca);
    oracles.push_back(std::move(e));
  }
  return json{{"preset", config.preset},
              {"kind", config.kind},
              {"trials", config.trials},
              {"eps1", config.eps1},
              {"eps2", config.eps2},
              {"seed", config.seed},
              {"rows", std::move(rows)},
              {"oracles", std::move(oracles)}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << content;
}

} // namespace ssdim
