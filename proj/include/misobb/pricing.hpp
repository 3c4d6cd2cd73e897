// SPDX-License-Identifier: Apache-2.0
//
// Fast local solver: alternate between solving the convex subproblem at a
// fixed interference estimate with a linear interference price, refreshing
// the estimate from the minimizer, and refreshing the price from the cost
// gradient. A fixed point of both maps satisfies first-order stationarity
// of the original nonconvex problem.

#pragma once

#include <vector>

#include "misobb/convexcore.hpp"
#include "misobb/model.hpp"

namespace misobb {

struct PricingOptions {
  arma::vec i0;       // initial interference estimate; empty = zeros
  arma::vec lambda0;  // initial price; empty = ones
  double eps_i = 1e-6;
  double eps_lambda = 1e-6;
  int max_inner = 200;  // interference fixed-point sweeps per price update
  int max_outer = 100;  // price updates
  double damping = 1.0;  // 1 = plain fixed point, <1 averages with previous
  double tol_kkt = kTolKkt;
  long max_newton = 20000;
};

struct PricingTraceRow {
  int outer = 0;
  int inner = 0;
  double gap_i = 0.0;       // distance between estimate and realized interference
  double gap_lambda = -1.0; // price update distance, only on outer rows
  double subproblem_cost = 0.0;
  double true_cost = 0.0;
};

struct PricingResult {
  CovariancePoint Q;
  arma::vec i_hat;
  arma::vec lambda;
  double cost = 0.0;  // true cost of Q at its own interference
  bool converged = false;
  int outer_iters = 0;
  long inner_iters = 0;
  std::vector<PricingTraceRow> trace;
};

PricingResult run_pricing(const NetworkInstance& inst, const UtilitySpec& util,
                          const ConstraintSet& cons,
                          const PricingOptions& opts = {});

// Stationarity residual of a candidate triple: subproblem optimality of Q at
// (i_hat, lambda), consistency of i_hat with the realized interference, and
// consistency of lambda with the cost gradient.
double pricing_kkt_residual(const NetworkInstance& inst,
                            const UtilitySpec& util, const ConstraintSet& cons,
                            const CovariancePoint& Q, const arma::vec& i_hat,
                            const arma::vec& lambda, double tol_kkt = kTolKkt,
                            long max_newton = 20000);

}  // namespace misobb
