// SPDX-License-Identifier: Apache-2.0
//
// Inner convex solver. Minimizes the decoupled cost at a fixed interference
// vector, plus an optional linear interference penalty, over the constraint
// set, with optional box constraints on the interference map.
//
// Method: log-barrier interior point. PSD cones carry -log det barriers,
// scalar inequalities carry -log slack barriers, and each barrier stage is
// minimized by damped Newton steps on a real parametrization of the
// Hermitian blocks (diagonal entries, then re/im pairs of the upper
// triangle). The stage schedule shrinks mu by 10x from 1 until the duality
// gap estimate mu * theta falls below tol_kkt.

#pragma once

#include <armadillo>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "misobb/model.hpp"

namespace misobb {

inline constexpr double kTolKkt = 1e-8;
inline constexpr double kTolFeas = 1e-9;

// Real coordinates for the Hermitian blocks. Block b of dimension n uses
// n^2 reals: n diagonal entries, then (re, im) per upper-triangle entry in
// row-major order. Linear functionals tr(M Q_b) become exact real dot
// products against these coordinates.
struct VarLayout {
  std::vector<int> offset;
  std::vector<int> dim;
  std::vector<std::vector<std::pair<int, int>>> pairs;  // upper (i, j) per block
  int total = 0;

  static VarLayout build(const NetworkInstance& inst);

  arma::cx_mat unpack_block(const arma::vec& x, int b) const;
  void pack_block(const arma::cx_mat& Q, int b, arma::vec& x) const;
  CovariancePoint unpack(const NetworkInstance& inst, const arma::vec& x) const;
  arma::vec pack(const CovariancePoint& Q) const;

  // a += scale * gradient of (q -> tr(M Q_b)), with M Hermitian.
  void add_functional(arma::vec& a, int b, const arma::cx_mat& M,
                      double scale = 1.0) const;
};

struct ConvexSubproblem {
  const NetworkInstance* inst = nullptr;
  const UtilitySpec* util = nullptr;
  const ConstraintSet* cons = nullptr;
  arma::vec i_fix;    // length K * L_C
  arma::vec penalty;  // lambda >= 0; empty = no penalty term
  // Box on the interference map. Empty vectors disable the box. Lower
  // components <= 0 and non-finite upper components are dropped.
  arma::vec box_lo;
  arma::vec box_hi;
};

enum class SolveStatus { Optimal, Infeasible, MaxIter };
std::string to_string(SolveStatus s);

struct SolveResult {
  CovariancePoint Q;
  double objective = 0.0;  // cost(Q, i_fix) + penalty' f_i(Q)
  SolveStatus status = SolveStatus::MaxIter;
  double kkt_residual = 0.0;   // suboptimality bound at the returned point
  double feas_violation = 0.0; // worst scalar-constraint violation, >= 0
  long newton_iters = 0;
  double phase1_certificate = 0.0;  // > 0 certifies an empty box
};

SolveResult solve(const ConvexSubproblem& sub, double tol_kkt = kTolKkt,
                  long max_newton = 20000);

// Objective value / gradient of the subproblem at an arbitrary point, in the
// VarLayout coordinates. Diagnostic surface; the gradient is the analytic
// form the solver differentiates.
double subproblem_objective(const ConvexSubproblem& sub,
                            const CovariancePoint& Q);
arma::vec subproblem_gradient(const ConvexSubproblem& sub,
                              const CovariancePoint& Q);

struct Phase1Result {
  std::optional<CovariancePoint> point;  // strictly feasible when present
  double certificate = 0.0;  // lower bound on the auxiliary slack optimum
};

// Finds a strictly feasible point for the subproblem's box via the standard
// auxiliary-slack problem, keeping budget and PSD constraints hard.
Phase1Result phase1(const ConvexSubproblem& sub, long max_newton = 20000);

// Constrained maximum of sum_t tr(weight_t Q_{block_t}) over the feasible set.
double maximize_linear(const NetworkInstance& inst, const ConstraintSet& cons,
                       const std::vector<InterferenceMap::Term>& component);

namespace barrier {

// One scalar inequality a' x <= b.
struct Ineq {
  arma::vec a;
  double b = 0.0;
};

// Smooth convex objective on an open domain, plus the domain's
// self-concordant barrier. add_* methods accumulate into g and H.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double theta() const = 0;  // barrier parameter of the domain
  virtual double value(const arma::vec& x) const = 0;
  virtual void add_derivatives(const arma::vec& x, arma::vec& g,
                               arma::mat& H) const = 0;
  virtual double domain_value(const arma::vec& x) const = 0;  // +inf outside
  virtual void add_domain_derivatives(const arma::vec& x, arma::vec& g,
                                      arma::mat& H, double mu) const = 0;
};

struct Options {
  double tol = kTolKkt;
  long max_newton = 20000;
  double mu0 = 1.0;
  double mu_shrink = 0.1;
  // Checked after every accepted step; return true to stop at the current x.
  std::function<bool(const arma::vec&)> stop_early;
};

struct Outcome {
  arma::vec x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  double kkt_residual = 0.0;
  long newton_iters = 0;
  bool stopped_early = false;
};

// Minimizes obj.value over {domain, a' x <= b} from a strictly feasible x0.
Outcome minimize(const Objective& obj, const std::vector<Ineq>& ineqs,
                 arma::vec x0, const Options& opt);

}  // namespace barrier

}  // namespace misobb
