#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <utility>

namespace ecl {

struct BoxOptimOptions {
  int max_iterations = 200;
  double grad_tolerance = 1e-8;   // sup-norm of the projected gradient
  double step_tolerance = 1e-12;  // sup-norm of the accepted step
  int memory = 6;
  int max_line_search = 40;
};

struct BoxOptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Objective callback: returns f(x); fills grad when want_grad is set.
using BoxObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

/// Maximizes f over the box [lo, hi] with a projected L-BFGS: two-loop
/// directions, iterates clamped to the box, Armijo backtracking measured
/// along the clamped step. Deterministic for a deterministic objective.
inline BoxOptimResult maximize_box(const BoxObjective& fg, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                   const BoxOptimOptions& opts = {}) {
  const auto n = x0.size();
  auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(lo).cwiseMin(hi); };
  // ascent components pushing out of an active bound are frozen
  auto project_grad = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x[i] <= lo[i] && g[i] < 0.0) pg[i] = 0.0;
      if (x[i] >= hi[i] && g[i] > 0.0) pg[i] = 0.0;
    }
    return pg;
  };

  Eigen::VectorXd x = clamp(std::move(x0));
  Eigen::VectorXd g(n);
  double f = fg(x, &g);

  // (s, y) pairs in minimization convention: y = -(pg_new - pg_old)
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem;

  BoxOptimResult res;
  int it = 0;
  Eigen::VectorXd pg = project_grad(x, g);
  for (; it < opts.max_iterations; ++it) {
    if (pg.lpNorm<Eigen::Infinity>() <= opts.grad_tolerance) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd q = pg;
    std::deque<double> alphas;
    for (auto rit = mem.rbegin(); rit != mem.rend(); ++rit) {
      const double rho = 1.0 / rit->second.dot(rit->first);
      const double a = rho * rit->first.dot(q);
      q -= a * rit->second;
      alphas.push_front(a);
    }
    if (!mem.empty()) {
      const auto& [s_l, y_l] = mem.back();
      q *= s_l.dot(y_l) / y_l.squaredNorm();
    }
    std::size_t idx = 0;
    for (auto& [s, y] : mem) {
      const double rho = 1.0 / y.dot(s);
      const double b = rho * y.dot(q);
      q += (alphas[idx++] - b) * s;
    }
    if (!q.allFinite() || q.dot(pg) <= 0.0) q = pg;  // fall back to steepest ascent

    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      Eigen::VectorXd cand = clamp(x + step * q);
      Eigen::VectorXd delta = cand - x;
      if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
      const double f_cand = fg(cand, nullptr);
      const double gain = std::max(g.dot(delta), 0.0);
      if (std::isfinite(f_cand) && f_cand > f && f_cand >= f + 1e-4 * gain) {
        x_new = std::move(cand);
        f_new = f_cand;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no improving step along this direction
      break;
    }

    Eigen::VectorXd g_new(n);
    fg(x_new, &g_new);
    Eigen::VectorXd pg_new = project_grad(x_new, g_new);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = -(pg_new - pg);
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) mem.emplace_back(s, std::move(y));
    if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();

    const double moved = s.lpNorm<Eigen::Infinity>();
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    pg = std::move(pg_new);
    if (moved < opts.step_tolerance) {
      res.converged = true;
      break;
    }
  }

  res.x = std::move(x);
  res.value = f;
  res.iterations = it;
  return res;
}

/// Derivative-free variant: central differences with a fixed step,
/// clamped at the box faces.
inline BoxOptimResult maximize_box_fd(const std::function<double(const Eigen::VectorXd&)>& f,
                                      Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi, double fd_step = 1e-6,
                                      const BoxOptimOptions& opts = {}) {
  auto fg = [&, fd_step](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const double fx = f(x);
    if (grad) {
      grad->resize(x.size());
      Eigen::VectorXd xp = x;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        const double up = std::min(orig + fd_step, hi[i]);
        const double dn = std::max(orig - fd_step, lo[i]);
        if (up > dn) {
          xp[i] = up;
          const double fu = f(xp);
          xp[i] = dn;
          const double fd = f(xp);
          (*grad)[i] = (fu - fd) / (up - dn);
        } else {
          (*grad)[i] = 0.0;
        }
        xp[i] = orig;
      }
    }
    return fx;
  };
  return maximize_box(fg, std::move(x0), lo, hi, opts);
}

}  // namespace ecl
