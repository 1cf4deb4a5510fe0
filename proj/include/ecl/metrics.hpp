#pragma once

#include <Eigen/Dense>
#include <limits>
#include <numeric>
#include <vector>

#include "ecl/design.hpp"
#include "ecl/gp.hpp"
#include "ecl/limit_state.hpp"

namespace ecl {

/// Failure-region classification statistics over a dense test design:
/// truth labels from the simulator, predicted labels from the surrogate's
/// direction-aware confidence bound (delta=0 uses the mean surface).
struct ClassificationReport {
  long long tp = 0, fp = 0, tn = 0, fn = 0;
  long long n_test = 0;
  double sensitivity = std::numeric_limits<double>::quiet_NaN();  // TP/(TP+FN)
  double specificity = std::numeric_limits<double>::quiet_NaN();  // TN/(TN+FP)
  double predicted_volume = 0.0;
  double true_volume = 0.0;
  double relative_volume_error = std::numeric_limits<double>::quiet_NaN();
  bool sensitivity_defined = false;  // false when the test set holds no true failures
};

template <typename Model>
ClassificationReport classify_report(const Model& model, const Simulator& truth,
                                     const LimitState& limit,
                                     const Eigen::MatrixXd& test_inputs, double delta) {
  ClassificationReport rep;
  rep.n_test = test_inputs.rows();
  const Eigen::Index block = 65536;
  for (Eigen::Index start = 0; start < test_inputs.rows(); start += block) {
    const Eigen::Index m = std::min(block, test_inputs.rows() - start);
    const Eigen::MatrixXd chunk = test_inputs.middleRows(start, m);
    Eigen::VectorXd mean;
    Eigen::VectorXd sd = Eigen::VectorXd::Zero(m);
    if (delta == 0.0) {
      mean = model.predict_mean(chunk);
    } else {
      PredictiveDist dist = model.predict(chunk);
      mean = std::move(dist.mean);
      sd = std::move(dist.sd);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool actual = limit.is_failure(truth(chunk.row(i).transpose()));
      const bool predicted = limit.margin(mean[i]) + delta * sd[i] > 0.0;
      if (actual && predicted) ++rep.tp;
      else if (!actual && predicted) ++rep.fp;
      else if (actual && !predicted) ++rep.fn;
      else ++rep.tn;
    }
  }
  const double volume = model.bounds().volume();
  rep.predicted_volume =
      volume * static_cast<double>(rep.tp + rep.fp) / static_cast<double>(rep.n_test);
  rep.true_volume =
      volume * static_cast<double>(rep.tp + rep.fn) / static_cast<double>(rep.n_test);
  if (rep.tp + rep.fn > 0) {
    rep.sensitivity = static_cast<double>(rep.tp) / static_cast<double>(rep.tp + rep.fn);
    rep.sensitivity_defined = true;
    rep.relative_volume_error =
        std::abs(rep.predicted_volume - rep.true_volume) / rep.true_volume;
  }
  if (rep.tn + rep.fp > 0)
    rep.specificity = static_cast<double>(rep.tn) / static_cast<double>(rep.tn + rep.fp);
  return rep;
}

/// Connected components of a point cloud under a fixed linking radius
/// (union-find over all close pairs). Used to count disjoint failure
/// clusters in unit coordinates.
inline int count_point_clusters(const Eigen::MatrixXd& points, double radius) {
  const auto n = points.rows();
  if (n == 0) return 0;
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<Eigen::Index(Eigen::Index)> find = [&](Eigen::Index a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  const double r2 = radius * radius;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((points.row(i) - points.row(j)).squaredNorm() <= r2) {
        const Eigen::Index ri = find(i), rj = find(j);
        if (ri != rj) parent[static_cast<std::size_t>(ri)] = rj;
      }
  int clusters = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (find(i) == i) ++clusters;
  return clusters;
}

}  // namespace ecl
