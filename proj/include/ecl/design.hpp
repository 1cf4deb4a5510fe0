#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ecl/box_lbfgs.hpp"
#include "ecl/dataset.hpp"
#include "ecl/entropy.hpp"
#include "ecl/errors.hpp"
#include "ecl/gp.hpp"
#include "ecl/lhs.hpp"
#include "ecl/limit_state.hpp"
#include "ecl/rng.hpp"

namespace ecl {

enum class OptimizerStrategy { TwoStage, SingleCandidateSet, FreshCandidateSets };

struct DesignConfig {
  int n_initial = 0;
  int n_total = 0;
  int n_candidates = 0;  // 0 resolves to 10 * dim
  int batch_size = 1;
  OptimizerStrategy strategy = OptimizerStrategy::TwoStage;
  double duplicate_tolerance = 1e-8;  // unit-cube euclidean distance
  std::uint64_t seed = 0;
  KernelFamily kernel_family = KernelFamily::SquaredExponential;
  FitConfig fit;
  int stage2_max_iterations = 200;
  double stage2_fd_step = 1e-6;

  void validate() const {
    if (n_initial < 2) throw ConfigError("DesignConfig: n_initial must be >= 2");
    if (n_total < n_initial) throw ConfigError("DesignConfig: n_total must be >= n_initial");
    if (batch_size < 1) throw ConfigError("DesignConfig: batch_size must be >= 1");
    if ((n_total - n_initial) % batch_size != 0)
      throw ConfigError("DesignConfig: n_total - n_initial must be divisible by batch_size");
    if (!(duplicate_tolerance > 0.0)) throw ConfigError("DesignConfig: duplicate_tolerance must be > 0");
  }

  int resolved_candidates(int dim) const { return n_candidates > 0 ? n_candidates : 10 * dim; }
};

struct Acquisition {
  Eigen::VectorXd x_unit;          // chosen input
  Eigen::VectorXd candidate_unit;  // stage-1 winner
  double entropy = 0.0;
  double candidate_entropy = 0.0;
  bool improved = false;    // continuous stage beat the candidate
  bool degenerate = false;  // flat-zero entropy surface; distance fallback used
  bool reverted = false;    // duplicate policy undid the continuous stage
  bool fallback = false;    // duplicate policy picked a different candidate
  Eigen::MatrixXd candidates;  // scored stage-1 set (unit coords)
  Eigen::VectorXd scores;
};

namespace detail {

template <typename Model>
double entropy_at(const Model& model, const LimitState& limit, const Eigen::VectorXd& u) {
  auto [mean, sd] = model.predict_point_unit(u);
  return contour_entropy(mean, sd, limit);
}

/// Stage-1 winner over a candidate set: argmax entropy, ties to the lowest
/// index. A flat-zero surface falls back to the candidate farthest from
/// the current design to keep exploring.
template <typename Model>
std::pair<int, bool> pick_candidate(const Model& model, const Eigen::MatrixXd& candidates,
                                    const Eigen::VectorXd& scores) {
  int best = 0;
  for (int i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  if (scores[best] > 0.0) return {best, false};
  int far = 0;
  double far_dist = -1.0;
  for (int i = 0; i < candidates.rows(); ++i) {
    const double dist = min_scaled_distance(model.unit_inputs(), candidates.row(i).transpose());
    if (dist > far_dist) {
      far_dist = dist;
      far = i;
    }
  }
  return {far, true};
}

}  // namespace detail

/// One acquisition: discrete search over a fresh LHS candidate set, then a
/// continuous box-constrained ascent over the whole domain started at the
/// stage-1 winner. Returns the better of the two by entropy.
template <typename Model>
Acquisition entropy_opt(const Model& model, const LimitState& limit, int n_candidates, Rng& rng,
                        int stage2_max_iterations = 200, double stage2_fd_step = 1e-6) {
  if (n_candidates < 1) throw ConfigError("entropy_opt: n_candidates must be >= 1");
  const int d = model.dim();
  Acquisition acq;
  acq.candidates = latin_hypercube(n_candidates, d, rng);
  acq.scores.resize(n_candidates);
  for (int i = 0; i < n_candidates; ++i)
    acq.scores[i] = detail::entropy_at(model, limit, acq.candidates.row(i).transpose());

  auto [best, degenerate] = detail::pick_candidate(model, acq.candidates, acq.scores);
  acq.candidate_unit = acq.candidates.row(best).transpose();
  acq.candidate_entropy = acq.scores[best];
  acq.degenerate = degenerate;
  acq.x_unit = acq.candidate_unit;
  acq.entropy = acq.candidate_entropy;
  if (degenerate) return acq;

  BoxOptimOptions opts;
  opts.max_iterations = stage2_max_iterations;
  auto objective = [&](const Eigen::VectorXd& u) { return detail::entropy_at(model, limit, u); };
  BoxOptimResult res =
      maximize_box_fd(objective, acq.candidate_unit, Eigen::VectorXd::Zero(d),
                      Eigen::VectorXd::Ones(d), stage2_fd_step, opts);
  if (res.value > acq.candidate_entropy) {
    acq.x_unit = res.x;
    acq.entropy = res.value;
    acq.improved = true;
  }
  return acq;
}

/// Candidate machinery for the acquisition-strategy variants. The
/// single-set strategy draws its pool once and removes chosen points;
/// the fresh-set strategy redraws per call and skips the continuous stage.
class CandidateSource {
 public:
  CandidateSource(OptimizerStrategy strategy, int n_candidates, int dim, Rng& pool_rng,
                  int stage2_max_iterations = 200, double stage2_fd_step = 1e-6)
      : strategy_(strategy),
        n_candidates_(n_candidates),
        stage2_iters_(stage2_max_iterations),
        stage2_step_(stage2_fd_step) {
    if (strategy_ == OptimizerStrategy::SingleCandidateSet)
      pool_ = latin_hypercube(n_candidates, dim, pool_rng);
  }

  template <typename Model>
  Acquisition next(const Model& model, const LimitState& limit, Rng& rng) {
    if (strategy_ == OptimizerStrategy::TwoStage)
      return entropy_opt(model, limit, n_candidates_, rng, stage2_iters_, stage2_step_);

    Acquisition acq;
    if (strategy_ == OptimizerStrategy::FreshCandidateSets) {
      acq.candidates = latin_hypercube(n_candidates_, model.dim(), rng);
    } else {
      if (pool_.rows() == 0)
        throw AcquisitionExhaustedError("single candidate set exhausted");
      acq.candidates = pool_;
    }
    acq.scores.resize(acq.candidates.rows());
    for (int i = 0; i < acq.candidates.rows(); ++i)
      acq.scores[i] = detail::entropy_at(model, limit, acq.candidates.row(i).transpose());
    auto [best, degenerate] = detail::pick_candidate(model, acq.candidates, acq.scores);
    acq.candidate_unit = acq.candidates.row(best).transpose();
    acq.candidate_entropy = acq.scores[best];
    acq.degenerate = degenerate;
    acq.x_unit = acq.candidate_unit;
    acq.entropy = acq.candidate_entropy;
    return acq;
  }

  /// Removes the finally-chosen point from the single-set pool (the
  /// duplicate policy may have settled on a different row than the argmax).
  void note_chosen(const Eigen::VectorXd& u) {
    if (strategy_ != OptimizerStrategy::SingleCandidateSet) return;
    for (int i = 0; i < pool_.rows(); ++i)
      if ((pool_.row(i).transpose() - u).norm() == 0.0) {
        remove_pool_row(i);
        return;
      }
  }

  int pool_size() const { return static_cast<int>(pool_.rows()); }

 private:
  void remove_pool_row(int row) {
    const auto n = pool_.rows();
    if (row < n - 1) pool_.middleRows(row, n - 1 - row) = pool_.bottomRows(n - 1 - row).eval();
    pool_.conservativeResize(n - 1, Eigen::NoChange);
  }

  OptimizerStrategy strategy_;
  int n_candidates_;
  int stage2_iters_;
  double stage2_step_;
  Eigen::MatrixXd pool_;
};

/// Greedy batch selection: each element comes from a fresh acquisition
/// against a variance-only augmented surrogate. Near-duplicates (within
/// tol of the design or of the batch so far) revert to the stage-1
/// candidate, then to the best non-duplicating candidate.
inline std::vector<Acquisition> entropy_batch_detailed(const GpModel& model,
                                                       const LimitState& limit, int n_batch,
                                                       CandidateSource& source, Rng& rng,
                                                       double duplicate_tolerance = 1e-8) {
  if (n_batch < 1) throw ConfigError("entropy_batch: n_batch must be >= 1");
  std::vector<Acquisition> picks;
  picks.reserve(static_cast<std::size_t>(n_batch));
  AugmentedGp aug(model);
  for (int b = 0; b < n_batch; ++b) {
    Acquisition acq = source.next(aug, limit, rng);
    auto dup = [&](const Eigen::VectorXd& u) {
      return min_scaled_distance(aug.unit_inputs(), u) <= duplicate_tolerance;
    };
    if (dup(acq.x_unit)) {
      acq.x_unit = acq.candidate_unit;
      acq.entropy = acq.candidate_entropy;
      acq.improved = false;
      acq.reverted = true;
      if (dup(acq.x_unit)) {
        int best = -1;
        for (int i = 0; i < acq.candidates.rows(); ++i) {
          if (dup(acq.candidates.row(i).transpose())) continue;
          if (best < 0 || acq.scores[i] > acq.scores[best]) best = i;
        }
        if (best < 0)
          throw AcquisitionExhaustedError("entropy_batch: every candidate duplicates the design");
        acq.x_unit = acq.candidates.row(best).transpose();
        acq.entropy = acq.scores[best];
        acq.fallback = true;
      }
    }
    source.note_chosen(acq.x_unit);
    if (b + 1 < n_batch) aug = aug.with_point_unit(acq.x_unit);
    picks.push_back(std::move(acq));
  }
  return picks;
}

/// Batch of unit-coordinate design points (Alg. "batch entropy" form).
inline Eigen::MatrixXd entropy_batch(const GpModel& model, const LimitState& limit, int n_batch,
                                     int n_candidates, Rng& rng,
                                     double duplicate_tolerance = 1e-8) {
  CandidateSource source(OptimizerStrategy::TwoStage, n_candidates, model.dim(), rng);
  auto picks = entropy_batch_detailed(model, limit, n_batch, source, rng, duplicate_tolerance);
  Eigen::MatrixXd out(n_batch, model.dim());
  for (int b = 0; b < n_batch; ++b) out.row(b) = picks[static_cast<std::size_t>(b)].x_unit.transpose();
  return out;
}

struct TraceRecord {
  int iteration = 0;    // 1-based acquisition ordinal
  int batch_index = 0;  // position within its batch
  Eigen::VectorXd x;          // original units
  Eigen::VectorXd candidate;  // original units
  double entropy = 0.0;
  std::string stage;  // candidate | local | reverted | fallback | degenerate
  bool improved = false;
  KernelSpec kernel_after_refit;
  double seconds = 0.0;
};

struct DesignResult {
  Dataset data;
  GpModel model;
  std::vector<TraceRecord> trace;
};

using Simulator = std::function<double(const Eigen::VectorXd&)>;

namespace detail {

inline Eigen::VectorXd evaluate_simulator(const Simulator& sim, const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y[i] = sim(x.row(i).transpose());
    if (!std::isfinite(y[i])) {
      std::string msg = "simulator returned non-finite value at input [";
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        msg += (j ? ", " : "") + std::to_string(x(i, j));
      throw SimulatorError(msg + "]");
    }
  }
  return y;
}

inline std::string stage_label(const Acquisition& a) {
  if (a.degenerate) return "degenerate";
  if (a.fallback) return "fallback";
  if (a.reverted) return "reverted";
  return a.improved ? "local" : "candidate";
}

}  // namespace detail

/// Full adaptive-design loop: initial LHS, then batches of entropy
/// acquisitions with a hyperparameter refit after each completed batch.
/// All randomness derives from (seed, repetition, stage) substreams, so
/// repetitions can run in parallel and reproduce serial runs.
inline DesignResult run_design(const Simulator& simulator, const Bounds& domain,
                               const DesignConfig& cfg, const LimitState& limit,
                               std::uint64_t repetition = 0) {
  cfg.validate();
  const int d = domain.dim();
  const int n_cand = cfg.resolved_candidates(d);

  Rng init_rng = substream(cfg.seed, {repetition, 0, stream::kInitialDesign});
  Eigen::MatrixXd x0 = domain.from_unit_rows(latin_hypercube(cfg.n_initial, d, init_rng));
  Dataset data(x0, detail::evaluate_simulator(simulator, x0), domain);

  Rng fit_rng = substream(cfg.seed, {repetition, 0, stream::kFit});
  GpModel model = GpModel::fit(data, cfg.kernel_family, cfg.fit, fit_rng);

  Rng pool_rng = substream(cfg.seed, {repetition, 0, stream::kCandidatePool});
  CandidateSource source(cfg.strategy, n_cand, d, pool_rng, cfg.stage2_max_iterations,
                         cfg.stage2_fd_step);

  DesignResult out;
  const int n_batches = (cfg.n_total - cfg.n_initial) / cfg.batch_size;
  for (int stage = 1; stage <= n_batches; ++stage) {
    Rng acq_rng = substream(cfg.seed, {repetition, static_cast<std::uint64_t>(stage), stream::kAcquire});
    const auto t0 = std::chrono::steady_clock::now();
    auto picks = entropy_batch_detailed(model, limit, cfg.batch_size, source, acq_rng,
                                        cfg.duplicate_tolerance);
    const double batch_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Eigen::MatrixXd x_batch(cfg.batch_size, d);
    for (int b = 0; b < cfg.batch_size; ++b)
      x_batch.row(b) = domain.from_unit(picks[static_cast<std::size_t>(b)].x_unit).transpose();
    Eigen::VectorXd y_batch = detail::evaluate_simulator(simulator, x_batch);
    data = data.extended(x_batch, y_batch);

    Rng refit_rng = substream(cfg.seed, {repetition, static_cast<std::uint64_t>(stage), stream::kFit});
    model = GpModel::fit(data, cfg.kernel_family, cfg.fit, refit_rng);

    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& a = picks[static_cast<std::size_t>(b)];
      TraceRecord rec;
      rec.iteration = (stage - 1) * cfg.batch_size + b + 1;
      rec.batch_index = b;
      rec.x = x_batch.row(b).transpose();
      rec.candidate = domain.from_unit(a.candidate_unit);
      rec.entropy = a.entropy;
      rec.stage = detail::stage_label(a);
      rec.improved = a.improved;
      rec.kernel_after_refit = model.kernel();
      rec.seconds = batch_seconds / cfg.batch_size;
      out.trace.push_back(std::move(rec));
    }
  }

  out.data = std::move(data);
  out.model = std::move(model);
  return out;
}

}  // namespace ecl
