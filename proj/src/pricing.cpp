// SPDX-License-Identifier: Apache-2.0

#include "misobb/pricing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace misobb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PricingResult run_pricing(const NetworkInstance& inst, const UtilitySpec& util,
                          const ConstraintSet& cons,
                          const PricingOptions& opts) {
  inst.validate();
  cons.validate(inst);
  util.validate(inst);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1]");
  }

  InterferenceMap map = interference_box(inst, cons);
  const int L = map.dim();

  arma::vec i_hat = opts.i0.is_empty() ? arma::vec(L, arma::fill::zeros)
                                       : arma::vec(opts.i0);
  arma::vec lambda = opts.lambda0.is_empty() ? arma::vec(L, arma::fill::ones)
                                             : arma::vec(opts.lambda0);
  if (i_hat.n_elem != static_cast<arma::uword>(L) ||
      lambda.n_elem != static_cast<arma::uword>(L)) {
    throw std::invalid_argument("i0 and lambda0 must have length K*L_C");
  }
  i_hat = arma::clamp(i_hat, 0.0, kInf);
  i_hat = arma::min(i_hat, map.i_max);
  lambda = arma::clamp(lambda, 0.0, kInf);

  PricingResult res;
  res.cost = kInf;
  const double theta = opts.damping;

  CovariancePoint Q;
  arma::vec fi;
  double gap_i = kInf;

  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    res.outer_iters = outer;
    for (int inner = 1; inner <= opts.max_inner; ++inner) {
      ++res.inner_iters;
      ConvexSubproblem sub;
      sub.inst = &inst;
      sub.util = &util;
      sub.cons = &cons;
      sub.i_fix = i_hat;
      sub.penalty = lambda;
      SolveResult sr = solve(sub, opts.tol_kkt, opts.max_newton);
      Q = sr.Q;
      fi = interference_map(inst, Q);
      gap_i = arma::norm(i_hat - fi, 2);

      double true_cost = cost(inst, util, Q, fi);
      if (true_cost < res.cost) {
        res.cost = true_cost;
        res.Q = Q;
        res.i_hat = i_hat;
        res.lambda = lambda;
      }
      res.trace.push_back(
          {outer, inner, gap_i, -1.0, sr.objective, true_cost});

      if (gap_i <= opts.eps_i) break;
      i_hat = (1.0 - theta) * i_hat + theta * fi;
      i_hat = arma::clamp(i_hat, 0.0, kInf);
      i_hat = arma::min(i_hat, map.i_max);
    }

    arma::vec g = cost_gradient_i(inst, util, Q, i_hat);
    double gap_lambda = arma::norm(lambda - g, 2);
    res.trace.back().gap_lambda = gap_lambda;

    if (gap_i <= opts.eps_i && gap_lambda <= opts.eps_lambda) {
      res.converged = true;
      res.Q = Q;
      res.i_hat = i_hat;
      res.lambda = lambda;
      res.cost = cost(inst, util, Q, fi);
      break;
    }
    lambda = arma::clamp((1.0 - theta) * lambda + theta * g, 0.0, kInf);
  }
  return res;
}

double pricing_kkt_residual(const NetworkInstance& inst,
                            const UtilitySpec& util, const ConstraintSet& cons,
                            const CovariancePoint& Q, const arma::vec& i_hat,
                            const arma::vec& lambda, double tol_kkt,
                            long max_newton) {
  ConvexSubproblem sub;
  sub.inst = &inst;
  sub.util = &util;
  sub.cons = &cons;
  sub.i_fix = i_hat;
  sub.penalty = lambda;

  double at_Q = subproblem_objective(sub, Q);
  SolveResult sr = solve(sub, tol_kkt, max_newton);
  double a = std::max(at_Q - sr.objective, 0.0);

  // Budget feasibility of the candidate itself.
  VarLayout layout = VarLayout::build(inst);
  arma::vec x = layout.pack(Q);
  for (const auto& c : cons.constraints) {
    double lhs = 0.0;
    for (int b = 0; b < inst.blocks(); ++b) {
      if (c.A[b].is_empty()) continue;
      arma::vec row(layout.total, arma::fill::zeros);
      layout.add_functional(row, b, c.A[b]);
      lhs += arma::dot(row, x);
    }
    a += std::max((lhs - c.P) / std::max(1.0, c.P), 0.0);
  }

  double b = arma::norm(i_hat - interference_map(inst, Q), 2);
  double c = arma::norm(lambda - cost_gradient_i(inst, util, Q, i_hat), 2);
  return std::sqrt(a * a + b * b + c * c);
}

}  // namespace misobb
