// Command-line front end for the online sparse + low-rank decomposition
// library: dataset generation, per-frame runs, phase-diagram sweeps, and
// sweep-CSV reporting.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osdec/osdec.hpp"

namespace {

namespace fs = std::filesystem;

// Everything a command needs, resolved from profile defaults, the config
// file, then command-line overrides, in that order.
struct ExperimentConfig {
  std::string profile = "desk";
  Eigen::Index n = 128;
  int r = 3;
  Eigen::Index d = 40;
  Eigen::Index q = 20;
  std::vector<int> s0_list{8, 16, 24, 32};
  std::vector<Eigen::Index> m_list{32, 51, 77};
  int trials = 20;
  std::uint64_t master_seed = 1;
  std::string output_dir = ".";
  osdec::SolverConfig solver;
};

void apply_profile(ExperimentConfig& cfg, const std::string& name) {
  const osdec::ExperimentProfile p = name == "paper"
                                         ? osdec::ExperimentProfile::paper()
                                         : osdec::ExperimentProfile::desk();
  if (name != "paper" && name != "desk") {
    throw osdec::ParseError("unknown profile '" + name +
                            "' (expected desk or paper)");
  }
  cfg.profile = name;
  cfg.n = p.n;
  cfg.r = p.r;
  cfg.d = p.d;
  cfg.q = p.q;
  cfg.s0_list = p.s0_values;
  cfg.m_list = p.m_values;
  cfg.trials = p.trials;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long parse_long(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw osdec::ParseError("line " + std::to_string(line) + ": key '" + key +
                            "' needs an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw osdec::ParseError("line " + std::to_string(line) + ": key '" + key +
                            "' needs a number, got '" + v + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& v, const std::string& key,
                          int line) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(T(parse_long(trim(item), key, line)));
  }
  if (out.empty()) {
    throw osdec::ParseError("line " + std::to_string(line) + ": key '" + key +
                            "' needs a nonempty comma-separated list");
  }
  return out;
}

// Flat key=value config with '#' comments. The schema key is required and
// versioned; unknown keys are hard errors so typos fail loud.
ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw osdec::IoError("cannot open config: " + path);

  std::map<std::string, std::pair<std::string, int>> kv;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw osdec::ParseError("line " + std::to_string(line_no) +
                              ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw osdec::ParseError("line " + std::to_string(line_no) +
                              ": empty key");
    }
    if (kv.count(key)) {
      throw osdec::ParseError("line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
    }
    kv[key] = {value, line_no};
  }

  const auto schema = kv.find("schema");
  if (schema == kv.end()) {
    throw osdec::ParseError("config is missing the required 'schema' key");
  }
  if (parse_long(schema->second.first, "schema", schema->second.second) != 1) {
    throw osdec::ParseError("line " + std::to_string(schema->second.second) +
                            ": unsupported schema version '" +
                            schema->second.first + "' (expected 1)");
  }

  ExperimentConfig cfg;
  const auto prof = kv.find("profile");
  if (prof != kv.end()) apply_profile(cfg, prof->second.first);

  const std::vector<std::string> known = {
      "schema",        "profile",       "n",
      "r",             "d",             "q",
      "s0_list",       "m_list",        "trials",
      "master_seed",   "output_dir",    "lambda",
      "mu_bar",        "mu0",           "epsilon_mu",
      "epsilon_weights", "clusters",    "priors",
      "max_iter",      "tol",           "recluster_stride"};
  for (const auto& [key, value_line] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw osdec::ParseError("line " + std::to_string(value_line.second) +
                              ": unknown key '" + key + "'");
    }
  }

  auto get = [&](const char* key) -> std::optional<std::pair<std::string, int>> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = get("n")) cfg.n = Eigen::Index(parse_long(v->first, "n", v->second));
  if (auto v = get("r")) cfg.r = int(parse_long(v->first, "r", v->second));
  if (auto v = get("d")) cfg.d = Eigen::Index(parse_long(v->first, "d", v->second));
  if (auto v = get("q")) cfg.q = Eigen::Index(parse_long(v->first, "q", v->second));
  if (auto v = get("s0_list")) cfg.s0_list = parse_list<int>(v->first, "s0_list", v->second);
  if (auto v = get("m_list")) cfg.m_list = parse_list<Eigen::Index>(v->first, "m_list", v->second);
  if (auto v = get("trials")) cfg.trials = int(parse_long(v->first, "trials", v->second));
  if (auto v = get("master_seed")) cfg.master_seed = std::uint64_t(parse_long(v->first, "master_seed", v->second));
  if (auto v = get("output_dir")) cfg.output_dir = v->first;
  if (auto v = get("lambda")) cfg.solver.lambda = parse_double(v->first, "lambda", v->second);
  if (auto v = get("mu_bar")) cfg.solver.mu_bar = parse_double(v->first, "mu_bar", v->second);
  if (auto v = get("mu0")) cfg.solver.mu0 = parse_double(v->first, "mu0", v->second);
  if (auto v = get("epsilon_mu")) cfg.solver.epsilon_mu = parse_double(v->first, "epsilon_mu", v->second);
  if (auto v = get("epsilon_weights")) cfg.solver.epsilon_weights = parse_double(v->first, "epsilon_weights", v->second);
  if (auto v = get("clusters")) cfg.solver.clusters = int(parse_long(v->first, "clusters", v->second));
  if (auto v = get("priors")) cfg.solver.priors = int(parse_long(v->first, "priors", v->second));
  if (auto v = get("max_iter")) cfg.solver.max_iter = int(parse_long(v->first, "max_iter", v->second));
  if (auto v = get("tol")) cfg.solver.tol = parse_double(v->first, "tol", v->second);
  if (auto v = get("recluster_stride")) cfg.solver.recluster_stride = int(parse_long(v->first, "recluster_stride", v->second));
  return cfg;
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw osdec::IoError("cannot create output dir " + dir + ": " +
                               ec.message());
}

std::string stream_file_name(int s0, std::uint64_t seed) {
  return "stream_s0_" + std::to_string(s0) + "_seed_" + std::to_string(seed) +
         ".bin";
}

// gen: one dataset file per s0 value. The stream seed folds the master seed
// with the s0 coordinate; the file records it, and run derives the sensing
// operator from the recorded seed, so gen + run is reproducible from the
// file alone.
int cmd_gen(const ExperimentConfig& cfg) {
  ensure_output_dir(cfg.output_dir);
  for (const int s0 : cfg.s0_list) {
    const std::uint64_t stream_seed =
        osdec::mix_seed({cfg.master_seed, std::uint64_t(s0), 0x73ULL});
    const osdec::SyntheticStream stream =
        osdec::gen_stream(cfg.n, cfg.r, cfg.d, cfg.q, s0, stream_seed);
    const fs::path path =
        fs::path(cfg.output_dir) / stream_file_name(s0, cfg.master_seed);
    osdec::save_stream(stream, path.string());
    std::cout << path.string() << "\n";
  }
  return 0;
}

// run: stream one dataset's test frames through the online pipeline and
// write the per-frame CSV. Uses the first entry of m_list as the
// measurement count. Reruns reproduce every column except wall_time_ms.
int cmd_run(const ExperimentConfig& cfg, const std::string& dataset_path) {
  const osdec::SyntheticStream stream = osdec::load_stream(dataset_path);
  if (stream.params.n != cfg.n || stream.params.d != cfg.d ||
      stream.params.q != cfg.q) {
    throw osdec::InvalidInput(
        "dataset dimensions (n=" + std::to_string(stream.params.n) +
        ", d=" + std::to_string(stream.params.d) +
        ", q=" + std::to_string(stream.params.q) +
        ") do not match the config (n=" + std::to_string(cfg.n) +
        ", d=" + std::to_string(cfg.d) + ", q=" + std::to_string(cfg.q) + ")");
  }
  const Eigen::Index m = cfg.m_list.front();
  if (m < 1 || m > cfg.n) throw osdec::InvalidInput("run: need 1 <= m <= n");

  const osdec::Matrix Phi = osdec::gen_sensing(
      m, cfg.n, osdec::mix_seed({stream.params.seed, 0xF1ULL}));
  const osdec::Matrix train =
      stream.L_true.leftCols(cfg.d) + stream.X_true.leftCols(cfg.d);
  const osdec::Matrix B0 = osdec::pcp_decompose(train).L;

  osdec::SolverConfig solver = cfg.solver;
  solver.subspace_dim = cfg.d;
  osdec::StreamState state =
      osdec::StreamState::initial(cfg.n, cfg.d, solver.priors, B0);

  ensure_output_dir(cfg.output_dir);
  const fs::path out_path = fs::path(cfg.output_dir) / "run.csv";
  std::ofstream out(out_path);
  if (!out) throw osdec::IoError("cannot write " + out_path.string());
  out << "frame_index,iterations,converged,rel_err_sparse,rel_err_lowrank,"
         "wall_time_ms\n";

  for (Eigen::Index t = 0; t < cfg.q; ++t) {
    const osdec::Vector x_true = stream.X_true.col(cfg.d + t);
    const osdec::Vector v_true = stream.L_true.col(cfg.d + t);
    const osdec::Vector y = Phi * (x_true + v_true);
    const auto start = std::chrono::steady_clock::now();
    auto [res, next] = osdec::decompose_frame(y, Phi, state, solver);
    const auto stop = std::chrono::steady_clock::now();
    state = std::move(next);
    const double xn = x_true.norm(), vn = v_true.norm();
    const double xe = (res.x_hat - x_true).norm() / (xn > 0.0 ? xn : 1.0);
    const double ve = (res.v_hat - v_true).norm() / (vn > 0.0 ? vn : 1.0);
    const double ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    char line[256];
    std::snprintf(line, sizeof(line), "%ld,%d,%d,%.12g,%.12g,%.3f\n", long(t),
                  res.iterations, res.converged ? 1 : 0, xe, ve, ms);
    out << line;
  }
  out.close();
  if (!out) throw osdec::IoError("close failed: " + out_path.string());
  std::cout << out_path.string() << "\n";
  return 0;
}

// sweep: Monte Carlo phase diagram over the config grid, one CSV row per
// cell. Identical config and seed give byte-identical output at any --jobs.
int cmd_sweep(const ExperimentConfig& cfg, int jobs) {
  const osdec::PhaseDiagram diagram = osdec::sweep_phase_diagram(
      cfg.s0_list, cfg.m_list, cfg.n, cfg.r, cfg.d, cfg.q, cfg.trials,
      cfg.solver, jobs, cfg.master_seed);

  ensure_output_dir(cfg.output_dir);
  const fs::path out_path = fs::path(cfg.output_dir) / "sweep.csv";
  std::ofstream out(out_path);
  if (!out) throw osdec::IoError("cannot write " + out_path.string());
  out << "s0,m,prob_sparse,prob_lowrank,trials\n";
  bool any_failed = false;
  for (std::size_t i = 0; i < diagram.s0_values.size(); ++i) {
    for (std::size_t j = 0; j < diagram.m_values.size(); ++j) {
      const osdec::PhaseCell& cell = diagram.at(i, j);
      char line[160];
      if (cell.failed) {
        any_failed = true;
        std::cerr << "cell s0=" << diagram.s0_values[i]
                  << " m=" << diagram.m_values[j]
                  << " failed: " << cell.error << "\n";
        std::snprintf(line, sizeof(line), "%d,%ld,nan,nan,%d\n",
                      diagram.s0_values[i], long(diagram.m_values[j]),
                      cell.trials);
      } else {
        std::snprintf(line, sizeof(line), "%d,%ld,%.6f,%.6f,%d\n",
                      diagram.s0_values[i], long(diagram.m_values[j]),
                      cell.prob_sparse, cell.prob_lowrank, cell.trials);
      }
      out << line;
    }
  }
  out.close();
  if (!out) throw osdec::IoError("close failed: " + out_path.string());
  std::cout << out_path.string() << "\n";
  return any_failed ? 1 : 0;
}

struct SweepRow {
  int s0 = 0;
  long m = 0;
  double prob_sparse = 0.0;
  double prob_lowrank = 0.0;
};

// report: render a sweep CSV as two aligned text grids (rows s0, columns m)
// and write gnuplot nonuniform-matrix files next to them.
int cmd_report(const std::string& csv_path, const std::string& out_dir) {
  std::ifstream in(csv_path);
  if (!in) throw osdec::IoError("cannot open sweep CSV: " + csv_path);

  std::string header;
  if (!std::getline(in, header)) {
    throw osdec::ParseError("line 1: empty CSV");
  }
  std::vector<std::string> cols;
  {
    std::stringstream ss(trim(header));
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(trim(c));
  }
  const std::vector<std::string> required = {"s0", "m", "prob_sparse",
                                             "prob_lowrank", "trials"};
  for (const std::string& need : required) {
    if (std::find(cols.begin(), cols.end(), need) == cols.end()) {
      throw osdec::ParseError("line 1: missing column '" + need + "'");
    }
  }
  auto col_of = [&](const std::string& name) {
    return std::size_t(std::find(cols.begin(), cols.end(), name) -
                       cols.begin());
  };
  const std::size_t i_s0 = col_of("s0"), i_m = col_of("m"),
                    i_ps = col_of("prob_sparse"),
                    i_pl = col_of("prob_lowrank");

  std::vector<SweepRow> rows;
  std::string raw;
  int line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string p;
    while (std::getline(ss, p, ',')) parts.push_back(trim(p));
    if (parts.size() != cols.size()) {
      throw osdec::ParseError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(cols.size()) + " fields, got " +
                              std::to_string(parts.size()));
    }
    SweepRow row;
    row.s0 = int(parse_long(parts[i_s0], "s0", line_no));
    row.m = parse_long(parts[i_m], "m", line_no);
    row.prob_sparse = parse_double(parts[i_ps], "prob_sparse", line_no);
    row.prob_lowrank = parse_double(parts[i_pl], "prob_lowrank", line_no);
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw osdec::ParseError("line " + std::to_string(line_no) +
                            ": no data rows");
  }

  std::vector<int> s0s;
  std::vector<long> ms;
  for (const SweepRow& row : rows) {
    if (std::find(s0s.begin(), s0s.end(), row.s0) == s0s.end())
      s0s.push_back(row.s0);
    if (std::find(ms.begin(), ms.end(), row.m) == ms.end()) ms.push_back(row.m);
  }
  std::sort(s0s.begin(), s0s.end());
  std::sort(ms.begin(), ms.end());
  auto lookup = [&](int s0, long m) -> const SweepRow* {
    for (const SweepRow& row : rows)
      if (row.s0 == s0 && row.m == m) return &row;
    return nullptr;
  };

  auto print_grid = [&](const char* title, bool sparse) {
    std::printf("%s (rows s0, columns m)\n", title);
    std::printf("%6s", "s0\\m");
    for (long m : ms) std::printf("%8ld", m);
    std::printf("\n");
    for (int s0 : s0s) {
      std::printf("%6d", s0);
      for (long m : ms) {
        const SweepRow* row = lookup(s0, m);
        if (!row) {
          std::printf("%8s", "-");
        } else {
          std::printf("%8.2f", sparse ? row->prob_sparse : row->prob_lowrank);
        }
      }
      std::printf("\n");
    }
    std::printf("\n");
  };
  print_grid("sparse success", true);
  print_grid("low-rank success", false);

  ensure_output_dir(out_dir);
  auto write_matrix = [&](const std::string& name, bool sparse) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw osdec::IoError("cannot write " + path.string());
    out << long(ms.size());
    for (long m : ms) out << " " << m;
    out << "\n";
    for (int s0 : s0s) {
      out << s0;
      for (long m : ms) {
        const SweepRow* row = lookup(s0, m);
        out << " " << (row ? (sparse ? row->prob_sparse : row->prob_lowrank)
                           : std::nan(""));
      }
      out << "\n";
    }
  };
  write_matrix("plot_sparse.dat", true);
  write_matrix("plot_lowrank.dat", false);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online sparse + low-rank decomposition experiments"};
  app.require_subcommand(1);

  std::string config_path, profile_flag, out_flag, dataset_path, csv_path;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  int jobs = 1;

  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--seed", seed_flag, "master seed override")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--jobs", jobs, "worker thread count")->check(CLI::Range(1, 1024));
  app.add_option("--profile", profile_flag, "scale preset: desk or paper");
  app.add_option("--out", out_flag, "output directory override");

  CLI::App* gen = app.add_subcommand("gen", "generate dataset files");
  CLI::App* run = app.add_subcommand("run", "decompose one dataset's frames");
  run->add_option("dataset", dataset_path, "stream file from gen")->required();
  CLI::App* sweep = app.add_subcommand("sweep", "phase-diagram Monte Carlo");
  CLI::App* report = app.add_subcommand("report", "render a sweep CSV");
  report->add_option("csv", csv_path, "sweep CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    if (!profile_flag.empty()) apply_profile(cfg, profile_flag);
    if (seed_set) cfg.master_seed = seed_flag;
    if (!out_flag.empty()) cfg.output_dir = out_flag;

    if (gen->parsed()) return cmd_gen(cfg);
    if (run->parsed()) return cmd_run(cfg, dataset_path);
    if (sweep->parsed()) return cmd_sweep(cfg, jobs);
    if (report->parsed()) return cmd_report(csv_path, cfg.output_dir);
    return 2;
  } catch (const osdec::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const osdec::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const osdec::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const osdec::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
