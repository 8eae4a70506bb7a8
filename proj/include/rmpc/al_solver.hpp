/*
 * Copyright 2026 The rmpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RMPC_AL_SOLVER_HPP_
#define RMPC_AL_SOLVER_HPP_

/**
 * @file
 * @brief Augmented-Lagrangian solver for small dense NLPs with simple bounds.
 *
 * Solves
 *
 *   min f(z)  s.t.  c_eq(z) = 0,  c_in(z) <= 0,  lo <= z <= hi
 *
 * with a PHR augmented Lagrangian on the general constraints. Each inner
 * subproblem is a bound-constrained minimization handled by a projected
 * quasi-Newton method: the Hessian model is a damped BFGS approximation of the
 * Lagrangian curvature plus the exact Gauss-Newton part mu J^T J of the
 * penalty, restricted to the free variables; steps follow the projection arc
 * with Armijo backtracking.
 *
 * A problem type P must provide
 *
 *   int dimension() const;  int num_eq() const;  int num_ineq() const;
 *   Eigen::VectorXd lower() const;  Eigen::VectorXd upper() const;
 *   void evaluate(const Eigen::VectorXd& z, NlpEval& out) const;
 */

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rmpc/ocp.hpp"
#include "rmpc/status.hpp"

namespace rmpc {

template <class P>
concept BoundedNlp = requires(const P& p, const Eigen::VectorXd& z, NlpEval& out) {
  { p.dimension() } -> std::convertible_to<int>;
  { p.num_eq() } -> std::convertible_to<int>;
  { p.num_ineq() } -> std::convertible_to<int>;
  { p.lower() } -> std::convertible_to<Eigen::VectorXd>;
  { p.upper() } -> std::convertible_to<Eigen::VectorXd>;
  p.evaluate(z, out);
};

struct SolverOptions {
  int max_outer = 30;
  int max_inner = 200;
  double kkt_tol = 1e-6;
  // Feasibility tolerance reported to callers.
  double feas_tol = 1e-6;
  // The iterate itself is driven tighter so that re-propagated (single
  // shooting) trajectories stay within feas_tol.
  double internal_feas_tol = 1e-9;
  double mu_initial = 100.0;
  double mu_growth = 10.0;
  double mu_max = 1e10;
  double initial_curvature = 0.05;
  double armijo = 1e-4;
  int stall_rounds = 3;  // outer rounds without progress at mu_max before giving up
  double multiplier_bound = 1e8;  // safeguard on multiplier estimates
};

struct AlResult {
  Eigen::VectorXd z;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
  double f = 0.0;
  double kkt_residual = 0.0;
  double violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  SolveStatus status = SolveStatus::kIterationCapReached;
};

namespace detail {

inline void check_finite(const NlpEval& e) {
  if (!std::isfinite(e.f) || !e.grad.allFinite() || !e.c_eq.allFinite() || !e.c_in.allFinite() ||
      !e.jac_eq.allFinite() || !e.jac_in.allFinite()) {
    throw NumericalBreakdown("non-finite value during NLP evaluation");
  }
}

inline double violation(const NlpEval& e) {
  double v = 0.0;
  if (e.c_eq.size() > 0) v = e.c_eq.cwiseAbs().maxCoeff();
  if (e.c_in.size() > 0) v = std::max(v, e.c_in.maxCoeff());
  return v;
}

// Projected gradient norm (infinity) of a gradient at z.
inline double projected_gradient_norm(const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return ((z - g).cwiseMax(lo).cwiseMin(hi) - z).lpNorm<Eigen::Infinity>();
}

// Augmented Lagrangian value and pieces for fixed multipliers and penalty.
struct AlPoint {
  NlpEval eval;
  double phi = 0.0;
  Eigen::VectorXd grad;      // gradient of the augmented Lagrangian
  Eigen::VectorXd eq_hat;    // lambda + mu c_eq
  Eigen::VectorXd ineq_hat;  // max(0, nu + mu c_in)
};

template <BoundedNlp P>
AlPoint al_point(const P& problem, const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                 const Eigen::VectorXd& nu, double mu) {
  AlPoint pt;
  problem.evaluate(z, pt.eval);
  check_finite(pt.eval);
  const NlpEval& e = pt.eval;
  pt.eq_hat = lambda + mu * e.c_eq;
  pt.ineq_hat = (nu + mu * e.c_in).cwiseMax(0.0);
  pt.phi = e.f + lambda.dot(e.c_eq) + 0.5 * mu * e.c_eq.squaredNorm() +
           (pt.ineq_hat.squaredNorm() - nu.squaredNorm()) / (2.0 * mu);
  pt.grad = e.grad;
  if (e.c_eq.size() > 0) pt.grad.noalias() += e.jac_eq.transpose() * pt.eq_hat;
  if (e.c_in.size() > 0) pt.grad.noalias() += e.jac_in.transpose() * pt.ineq_hat;
  return pt;
}

// Gradient of f + y_eq^T c_eq + y_in^T c_in at an evaluated point.
inline Eigen::VectorXd lagrangian_gradient(const NlpEval& e, const Eigen::VectorXd& y_eq,
                                           const Eigen::VectorXd& y_in) {
  Eigen::VectorXd g = e.grad;
  if (e.c_eq.size() > 0) g.noalias() += e.jac_eq.transpose() * y_eq;
  if (e.c_in.size() > 0) g.noalias() += e.jac_in.transpose() * y_in;
  return g;
}

}  // namespace detail

template <BoundedNlp P>
AlResult solve_augmented_lagrangian(const P& problem, Eigen::VectorXd z0, const SolverOptions& opt,
                                    std::optional<Eigen::VectorXd> eq_multipliers = std::nullopt,
                                    std::optional<Eigen::VectorXd> ineq_multipliers = std::nullopt) {
  const int n = problem.dimension();
  const Eigen::VectorXd lo = problem.lower();
  const Eigen::VectorXd hi = problem.upper();
  if (z0.size() != n) throw std::invalid_argument("solve_augmented_lagrangian: bad initial guess size");
  Eigen::VectorXd z = z0.cwiseMax(lo).cwiseMin(hi);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(problem.num_eq());
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(problem.num_ineq());
  const double ybound = opt.multiplier_bound;
  if (eq_multipliers && eq_multipliers->size() == lambda.size()) {
    lambda = eq_multipliers->cwiseMax(-ybound).cwiseMin(ybound);
  }
  if (ineq_multipliers && ineq_multipliers->size() == nu.size()) nu = ineq_multipliers->cwiseMax(0.0).cwiseMin(ybound);
  double mu = opt.mu_initial;

  AlResult best;
  bool have_best = false;
  // Feasibility first (below the internal target all iterates tie), then
  // stationarity, then objective.
  const auto better = [&](double viol, double kkt, double f) {
    if (!have_best) return true;
    const double a = std::max(viol, opt.internal_feas_tol);
    const double b = std::max(best.violation, opt.internal_feas_tol);
    if (a != b) return a < b;
    const bool ka = kkt <= opt.kkt_tol;
    const bool kb = best.kkt_residual <= opt.kkt_tol;
    if (ka != kb) return ka;
    if (!ka && kkt != best.kkt_residual) return kkt < best.kkt_residual;
    return f < best.f;
  };

  Eigen::MatrixXd hess = opt.initial_curvature * Eigen::MatrixXd::Identity(n, n);
  double prev_violation = std::numeric_limits<double>::infinity();
  int inner_total = 0;
  int stalled_rounds = 0;

  for (int outer = 1; outer <= opt.max_outer; ++outer) {
    const Eigen::VectorXd z_round_start = z;
    detail::AlPoint pt = detail::al_point(problem, z, lambda, nu, mu);
    double pg_norm = detail::projected_gradient_norm(z, pt.grad, lo, hi);

    for (int inner = 0; inner < opt.max_inner && pg_norm > 0.1 * opt.kkt_tol; ++inner) {
      ++inner_total;
      const double eps_active = std::min(1e-8, pg_norm);
      std::vector<int> free_idx;
      free_idx.reserve(n);
      for (int i = 0; i < n; ++i) {
        const bool at_lo = z(i) - lo(i) <= eps_active && pt.grad(i) > 0.0;
        const bool at_hi = hi(i) - z(i) <= eps_active && pt.grad(i) < 0.0;
        if (!at_lo && !at_hi) free_idx.push_back(i);
      }

      Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
      if (!free_idx.empty()) {
        Eigen::MatrixXd model = hess;
        const NlpEval& e = pt.eval;
        if (e.c_eq.size() > 0) model.noalias() += mu * e.jac_eq.transpose() * e.jac_eq;
        for (int r = 0; r < e.c_in.size(); ++r) {
          if (pt.ineq_hat(r) > 0.0) {
            model.noalias() += mu * e.jac_in.row(r).transpose() * e.jac_in.row(r);
          }
        }
        const int nf = static_cast<int>(free_idx.size());
        Eigen::MatrixXd reduced(nf, nf);
        Eigen::VectorXd rhs(nf);
        for (int a = 0; a < nf; ++a) {
          rhs(a) = -pt.grad(free_idx[a]);
          for (int b = 0; b < nf; ++b) reduced(a, b) = model(free_idx[a], free_idx[b]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(reduced);
        double shift = 1e-12 * std::max(1.0, reduced.diagonal().cwiseAbs().maxCoeff());
        while (llt.info() != Eigen::Success) {
          reduced.diagonal().array() += shift;
          shift *= 10.0;
          llt.compute(reduced);
          if (!std::isfinite(shift)) throw NumericalBreakdown("quasi-Newton model not factorizable");
        }
        const Eigen::VectorXd step = llt.solve(rhs);
        for (int a = 0; a < nf; ++a) dir(free_idx[a]) = step(a);
      }

      // Backtracking along the projection arc.
      Eigen::VectorXd z_next;
      const auto search = [&](const Eigen::VectorXd& d) -> std::optional<detail::AlPoint> {
        double alpha = 1.0;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
          Eigen::VectorXd trial = (z + alpha * d).cwiseMax(lo).cwiseMin(hi);
          const double decrease = pt.grad.dot(trial - z);
          if (!(decrease < 0.0)) continue;
          std::optional<detail::AlPoint> evaluated;
          try {
            evaluated = detail::al_point(problem, trial, lambda, nu, mu);
          } catch (const NumericalBreakdown&) {
            continue;  // overflow far from z; shorten the step
          }
          detail::AlPoint& cand = *evaluated;
          if (cand.phi <= pt.phi + opt.armijo * decrease) {
            z_next = std::move(trial);
            return std::move(cand);
          }
        }
        return std::nullopt;
      };
      std::optional<detail::AlPoint> next = search(dir);
      if (!next) {
        const double scale = 1.0 / (hess.diagonal().maxCoeff() + mu);
        next = search(-scale * pt.grad);
      }
      if (!next) {
        hess = opt.initial_curvature * Eigen::MatrixXd::Identity(n, n);
        break;  // stalled at this penalty level
      }

      // Damped BFGS on the Lagrangian curvature; the secant pair uses the
      // multiplier estimate of the new point at both ends so the penalty's
      // Gauss-Newton part (already exact in the model) is not double counted.
      const Eigen::VectorXd s = z_next - z;
      const Eigen::VectorXd y =
          detail::lagrangian_gradient(next->eval, next->eq_hat, next->ineq_hat) -
          detail::lagrangian_gradient(pt.eval, next->eq_hat, next->ineq_hat);
      const Eigen::VectorXd hs = hess * s;
      const double shs = s.dot(hs);
      // Steps at round-off level carry no curvature information.
      if (s.norm() > 1e-13 * std::max(1.0, z.norm()) && shs > 0.0) {
        double sy = s.dot(y);
        Eigen::VectorXd r = y;
        if (sy < 0.2 * shs) {
          const double theta = 0.8 * shs / (shs - sy);
          r = theta * y + (1.0 - theta) * hs;
          sy = s.dot(r);
        }
        hess.noalias() += (r * r.transpose()) / sy - (hs * hs.transpose()) / shs;
        if (!hess.allFinite()) hess = opt.initial_curvature * Eigen::MatrixXd::Identity(n, n);
      }

      z = std::move(z_next);
      pt = std::move(*next);
      pg_norm = detail::projected_gradient_norm(z, pt.grad, lo, hi);
    }

    // First-order multiplier update. The projected gradient of the augmented
    // Lagrangian at z equals that of the ordinary Lagrangian at the updated
    // multipliers, so pg_norm is the stationarity residual.
    const NlpEval& e = pt.eval;
    const bool unchanged = z == z_round_start && pt.eq_hat == lambda && pt.ineq_hat == nu;
    lambda = pt.eq_hat.cwiseMax(-ybound).cwiseMin(ybound);
    nu = pt.ineq_hat.cwiseMin(ybound);
    const double viol = detail::violation(e);
    double complementarity = 0.0;
    for (int r = 0; r < e.c_in.size(); ++r) {
      complementarity = std::max(complementarity, std::abs(std::min(nu(r), -e.c_in(r))));
    }
    const double kkt = std::max(pg_norm, complementarity);

    if (better(viol, kkt, e.f)) {
      have_best = true;
      best.z = z;
      best.eq_multipliers = lambda;
      best.ineq_multipliers = nu;
      best.f = e.f;
      best.kkt_residual = kkt;
      best.violation = viol;
      best.outer_iterations = outer;
    }
    if (viol <= opt.internal_feas_tol && kkt <= opt.kkt_tol) {
      best.status = SolveStatus::kConverged;
      break;
    }
    // A round that moved nothing is a fixed point unless the penalty can
    // still grow.
    if (unchanged && (viol <= opt.internal_feas_tol || mu >= opt.mu_max)) {
      best.status = SolveStatus::kStalled;
      break;
    }
    // At the penalty cap a violation that no longer shrinks means the
    // constraints are (locally) inconsistent; more iterations will not help.
    if (mu >= opt.mu_max) {
      stalled_rounds = viol > opt.internal_feas_tol && viol > 0.99 * prev_violation ? stalled_rounds + 1 : 0;
      if (stalled_rounds >= opt.stall_rounds) {
        best.status = SolveStatus::kStalled;
        break;
      }
    }
    if (viol > 0.25 * prev_violation) mu = std::min(mu * opt.mu_growth, opt.mu_max);
    prev_violation = viol;
  }
  best.inner_iterations = inner_total;
  return best;
}

}  // namespace rmpc

#endif  // RMPC_AL_SOLVER_HPP_
