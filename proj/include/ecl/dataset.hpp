#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

#include "ecl/errors.hpp"

namespace ecl {

/// Axis-aligned design domain [lo, hi]^d with the affine maps between
/// original units and the unit cube used internally everywhere.
struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Bounds() = default;
  Bounds(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.size() == 0)
      throw ConfigError("Bounds: lo/hi size mismatch or empty");
    for (Eigen::Index j = 0; j < lo.size(); ++j)
      if (!(lo[j] < hi[j])) throw ConfigError("Bounds: lo must be < hi in every dimension");
  }

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const { return (hi - lo).prod(); }

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
    for (Eigen::Index j = 0; j < lo.size(); ++j)
      if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
    return true;
  }

  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const {
    return (x - lo).cwiseQuotient(hi - lo);
  }
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const {
    return lo + u.cwiseProduct(hi - lo);
  }

  Eigen::MatrixXd to_unit_rows(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd u = x;
    u.rowwise() -= lo.transpose();
    u.array().rowwise() /= (hi - lo).transpose().array();
    return u;
  }
  Eigen::MatrixXd from_unit_rows(const Eigen::MatrixXd& u) const {
    Eigen::MatrixXd x = u;
    x.array().rowwise() *= (hi - lo).transpose().array();
    x.rowwise() += lo.transpose();
    return x;
  }
};

/// Paired design inputs and scalar responses, in original units.
/// Rows must lie inside the bounds and be pairwise distinct (scaled
/// distance > 1e-12).
struct Dataset {
  Eigen::MatrixXd inputs;   // N x d
  Eigen::VectorXd outputs;  // N
  Bounds bounds;

  Dataset() = default;
  Dataset(Eigen::MatrixXd inputs_, Eigen::VectorXd outputs_, Bounds bounds_)
      : inputs(std::move(inputs_)), outputs(std::move(outputs_)), bounds(std::move(bounds_)) {
    validate();
  }

  int size() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }

  void validate() const {
    if (inputs.rows() < 1) throw ConfigError("Dataset: needs at least one row");
    if (inputs.rows() != outputs.size()) throw ConfigError("Dataset: inputs/outputs length mismatch");
    if (inputs.cols() != bounds.dim()) throw ConfigError("Dataset: input dimension != bounds dimension");
    const Eigen::MatrixXd u = bounds.to_unit_rows(inputs);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (!bounds.contains(inputs.row(i).transpose(), 1e-12))
        throw ConfigError("Dataset: input row outside bounds");
      for (Eigen::Index k = 0; k < i; ++k)
        if ((u.row(i) - u.row(k)).norm() <= 1e-12)
          throw DuplicatePointError("Dataset: duplicate input rows");
    }
  }

  /// new dataset with extra rows appended (re-validated)
  Dataset extended(const Eigen::MatrixXd& x_new, const Eigen::VectorXd& y_new) const {
    Dataset out;
    out.bounds = bounds;
    out.inputs.resize(inputs.rows() + x_new.rows(), inputs.cols());
    out.inputs << inputs, x_new;
    out.outputs.resize(outputs.size() + y_new.size());
    out.outputs << outputs, y_new;
    out.validate();
    return out;
  }
};

inline double min_scaled_distance(const Eigen::MatrixXd& unit_rows, const Eigen::VectorXd& u) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < unit_rows.rows(); ++i)
    best = std::min(best, (unit_rows.row(i).transpose() - u).norm());
  return best;
}

}  // namespace ecl
