#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "osdec/errors.hpp"
#include "osdec/parallel.hpp"
#include "osdec/pcp.hpp"
#include "osdec/rng.hpp"
#include "osdec/solver.hpp"
#include "osdec/synth.hpp"

namespace osdec {

struct FrameRecord {
  long frame_index = 0;      // position within the test split, from 0
  int iterations = 0;
  bool converged = false;
  double rel_err_sparse = 0.0;   // absolute error when the truth is zero
  double rel_err_lowrank = 0.0;
  double wall_time_ms = 0.0;
};

struct TrialOutcome {
  std::vector<FrameRecord> frames;
  double sparse_success = 0.0;
  double lowrank_success = 0.0;
};

struct TrialSpec {
  Eigen::Index n = 128;
  int r = 3;
  Eigen::Index d = 40;   // training frames; also the width of the prior B_0
  Eigen::Index q = 20;   // test frames
  int s0 = 10;
  Eigen::Index m = 77;   // measurement rows
  std::uint64_t seed = 0;
};

// One full experiment trial: generate a stream and a sensing matrix from the
// spec's seed, bootstrap the low-rank prior by batch decomposition of the
// uncompressed training split, then push the compressed test frames through
// the online solver, carrying priors forward between frames.
inline TrialOutcome stream_trial(const TrialSpec& spec, const SolverConfig& cfg,
                                 const PcpConfig& pcp_cfg = {},
                                 double threshold = 1e-2) {
  if (spec.m < 1 || spec.m > spec.n) {
    throw InvalidInput("stream_trial: need 1 <= m <= n");
  }
  const SyntheticStream stream =
      gen_stream(spec.n, spec.r, spec.d, spec.q, spec.s0,
                 mix_seed({spec.seed, 0x73ULL}));
  const Matrix Phi = gen_sensing(spec.m, spec.n, mix_seed({spec.seed, 0xF1ULL}));

  const Matrix train =
      stream.L_true.leftCols(spec.d) + stream.X_true.leftCols(spec.d);
  const Matrix B0 = pcp_decompose(train, pcp_cfg).L;

  SolverConfig frame_cfg = cfg;
  frame_cfg.subspace_dim = spec.d;
  StreamState state =
      StreamState::initial(spec.n, spec.d, frame_cfg.priors, B0);

  TrialOutcome out;
  std::vector<Vector> x_hats, x_trues, v_hats, v_trues;
  for (Eigen::Index t = 0; t < spec.q; ++t) {
    const Vector x_true = stream.X_true.col(spec.d + t);
    const Vector v_true = stream.L_true.col(spec.d + t);
    const Vector y = Phi * (x_true + v_true);

    const auto start = std::chrono::steady_clock::now();
    auto [result, next] = decompose_frame(y, Phi, state, frame_cfg);
    const auto stop = std::chrono::steady_clock::now();
    state = std::move(next);

    FrameRecord rec;
    rec.frame_index = long(t);
    rec.iterations = result.iterations;
    rec.converged = result.converged;
    const double xn = x_true.norm(), vn = v_true.norm();
    rec.rel_err_sparse = (result.x_hat - x_true).norm() / (xn > 0.0 ? xn : 1.0);
    rec.rel_err_lowrank =
        (result.v_hat - v_true).norm() / (vn > 0.0 ? vn : 1.0);
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    out.frames.push_back(rec);

    x_hats.push_back(result.x_hat);
    x_trues.push_back(x_true);
    v_hats.push_back(result.v_hat);
    v_trues.push_back(v_true);
  }
  if (!out.frames.empty()) {
    out.sparse_success = success_probability(x_hats, x_trues, threshold);
    out.lowrank_success = success_probability(v_hats, v_trues, threshold);
  }
  return out;
}

struct PhaseCell {
  double prob_sparse = 0.0;
  double prob_lowrank = 0.0;
  int trials = 0;
  bool failed = false;       // a trial in this cell threw; probabilities unset
  std::string error;         // first failure message, empty otherwise
};

struct PhaseDiagram {
  std::vector<int> s0_values;
  std::vector<Eigen::Index> m_values;
  std::vector<PhaseCell> cells;  // row-major: s0 index major, m index minor

  const PhaseCell& at(std::size_t s0_idx, std::size_t m_idx) const {
    return cells[s0_idx * m_values.size() + m_idx];
  }
};

// Monte Carlo sweep over the (s0, m) grid. Every (cell, trial) pair is an
// independent work item seeded from the master seed and the cell's
// coordinate values, never from indices or scheduling order, so any --jobs
// level produces identical numbers. A throwing trial marks its cell failed
// instead of aborting the sweep.
inline PhaseDiagram sweep_phase_diagram(
    const std::vector<int>& s0_values, const std::vector<Eigen::Index>& m_values,
    Eigen::Index n, int r, Eigen::Index d, Eigen::Index q, int trials,
    const SolverConfig& cfg, int jobs, std::uint64_t master_seed,
    const PcpConfig& pcp_cfg = {}) {
  if (s0_values.empty() || m_values.empty()) {
    throw InvalidInput("sweep: grid must be nonempty");
  }
  if (trials < 1) throw InvalidInput("sweep: trials must be >= 1");

  PhaseDiagram diagram;
  diagram.s0_values = s0_values;
  diagram.m_values = m_values;
  const std::size_t n_cells = s0_values.size() * m_values.size();
  diagram.cells.assign(n_cells, PhaseCell{});

  struct TrialSlot {
    double sparse = 0.0;
    double lowrank = 0.0;
    bool failed = false;
    std::string error;
  };
  std::vector<TrialSlot> slots(n_cells * std::size_t(trials));

  const long total = long(slots.size());
  parallel_for(total, jobs, [&](long item) {
    const std::size_t cell = std::size_t(item) / std::size_t(trials);
    const int trial = int(std::size_t(item) % std::size_t(trials));
    const std::size_t s0_idx = cell / m_values.size();
    const std::size_t m_idx = cell % m_values.size();

    TrialSpec spec;
    spec.n = n;
    spec.r = r;
    spec.d = d;
    spec.q = q;
    spec.s0 = s0_values[s0_idx];
    spec.m = m_values[m_idx];
    spec.seed = mix_seed({master_seed, std::uint64_t(spec.s0),
                          std::uint64_t(spec.m), std::uint64_t(trial)});
    TrialSlot& slot = slots[std::size_t(item)];
    try {
      const TrialOutcome outcome = stream_trial(spec, cfg, pcp_cfg);
      slot.sparse = outcome.sparse_success;
      slot.lowrank = outcome.lowrank_success;
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
    }
  });

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    PhaseCell& out = diagram.cells[cell];
    out.trials = trials;
    double sparse = 0.0, lowrank = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      const TrialSlot& slot = slots[cell * std::size_t(trials) + trial];
      if (slot.failed) {
        out.failed = true;
        if (out.error.empty()) out.error = slot.error;
      }
      sparse += slot.sparse;
      lowrank += slot.lowrank;
    }
    if (!out.failed) {
      out.prob_sparse = sparse / trials;
      out.prob_lowrank = lowrank / trials;
    }
  }
  return diagram;
}

// Scale presets for the two experiment regimes.
struct ExperimentProfile {
  Eigen::Index n;
  int r;
  Eigen::Index d;
  Eigen::Index q;
  std::vector<int> s0_values;
  std::vector<Eigen::Index> m_values;
  int trials;

  static ExperimentProfile desk() {
    return {128, 3, 40, 20, {8, 16, 24, 32}, {32, 51, 77}, 20};
  }
  static ExperimentProfile paper() {
    return {500, 5, 100, 100, {10, 30, 50, 70, 90, 110}, {125, 200, 300}, 50};
  }
};

}  // namespace osdec
