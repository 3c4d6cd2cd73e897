// SPDX-License-Identifier: Apache-2.0
//
// Network model for multicarrier MISO interference and broadcast channels:
// channel instances, transmit covariance points, generalized power
// constraints, alpha-fair utilities, and the affine interference map.

#pragma once

#include <armadillo>
#include <string>
#include <utility>
#include <vector>

namespace misobb {

// Rates below this floor are clamped before applying f_alpha with alpha >= 1,
// where the utility diverges at zero rate. Numeric guard only.
inline constexpr double kRateFloor = 1e-12;

// Relative tolerance for Hermitian symmetry checks.
inline constexpr double kTolHerm = 1e-10;
// Eigenvalue floor for PSD checks, relative to the trace.
inline constexpr double kTolPsd = 1e-9;
// Relative inflation applied to computed interference upper corners so the
// initial box strictly contains every achievable interference vector.
inline constexpr double kBoxInflation = 1e-6;

enum class Topology { IC, BC };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

// K transmitter-receiver pairs, N[k] transmit antennas at transmitter k,
// L_C parallel carriers. channel(j, k, l) is the 1 x N[j] response from
// transmitter j to receiver k on carrier l. A broadcast channel is the
// special case where the response at receiver k is the same for every j.
//
// Interference components and covariance blocks share the flat layout
// c = k * L_C + l.
struct NetworkInstance {
  int K = 0;
  std::vector<int> N;
  int L_C = 1;
  Topology topology = Topology::IC;
  std::vector<arma::cx_rowvec> channels;  // [(j * K + k) * L_C + l]
  arma::mat noise;                        // K x L_C, sigma^2 > 0

  static NetworkInstance blank(int K, std::vector<int> N, int L_C,
                               Topology topology);

  const arma::cx_rowvec& channel(int j, int k, int l) const;
  arma::cx_rowvec& channel(int j, int k, int l);

  int blocks() const { return K * L_C; }
  int block(int k, int l) const { return k * L_C + l; }
  int interference_dim() const { return K * L_C; }

  void validate() const;  // throws std::invalid_argument
};

// One transmit covariance matrix per (user, carrier) block.
struct CovariancePoint {
  std::vector<arma::cx_mat> Q;  // [k * L_C + l], N_k x N_k Hermitian PSD

  static CovariancePoint zeros(const NetworkInstance& inst);
  void validate(const NetworkInstance& inst) const;
  double total_trace() const;
};

// sum_{k,l} tr(A[k*L_C+l] * Q_{kl}) <= P. An empty matrix excludes a block.
struct LinearConstraint {
  std::vector<arma::cx_mat> A;
  double P = 0.0;
};

struct ConstraintSet {
  std::vector<LinearConstraint> constraints;

  // Checks PSD weights, nonnegative budgets, and that every block is covered
  // by at least one constraint whose weight is positive definite on it, so
  // the feasible set is bounded.
  void validate(const NetworkInstance& inst) const;
};

// Weighted alpha-fair aggregate: cost(r) = -sum_k w_k f_alpha(r_k) with
// f_alpha(r) = log r for alpha = 1 and r^(1-alpha) / (1-alpha) otherwise.
// alpha = 0 is weighted sum-rate maximization.
struct UtilitySpec {
  double alpha = 0.0;
  std::vector<double> weights;  // empty = all ones

  double weight(int k) const;
  double falpha(double r) const;
  double falpha_prime(double r) const;
  double falpha_second(double r) const;
  void validate(const NetworkInstance& inst) const;
};

// Affine map from covariance blocks to per-(receiver, carrier) interference
// powers, plus the enclosing box [0, i_max] of achievable values.
struct InterferenceMap {
  struct Term {
    int block;           // contributing covariance block (j, l)
    arma::cx_mat weight; // h^H h of the cross channel, PSD
  };
  std::vector<std::vector<Term>> components;  // [c], zero terms pruned
  arma::vec i_max;  // inflated upper corner; empty until the box is computed

  static InterferenceMap build(const NetworkInstance& inst);
  int dim() const { return static_cast<int>(components.size()); }
};

// Real part of h Q h^H; asserts the imaginary residue is negligible.
double quad_form_real(const arma::cx_rowvec& h, const arma::cx_mat& Q);

// Aggregate interference at each (receiver, carrier) under covariances Q.
arma::vec interference_map(const NetworkInstance& inst,
                           const CovariancePoint& Q);

// Per-user rates in nats, treating interference as noise.
arma::vec rates(const NetworkInstance& inst, const CovariancePoint& Q);

// Rates with the interference terms replaced by the supplied vector i.
arma::vec rates_given_interference(const NetworkInstance& inst,
                                   const CovariancePoint& Q,
                                   const arma::vec& i);

// Decoupled cost f(Q, i) = -sum_k w_k f_alpha(r_k(Q, i)). Convex in Q for
// fixed i and monotone nondecreasing in i.
double cost(const NetworkInstance& inst, const UtilitySpec& util,
            const CovariancePoint& Q, const arma::vec& i);

// Gradient of the decoupled cost with respect to i. Componentwise >= 0.
arma::vec cost_gradient_i(const NetworkInstance& inst, const UtilitySpec& util,
                          const CovariancePoint& Q, const arma::vec& i);

// Computes the interference map together with its box [0, i_max], where each
// i_max component is the constrained maximum of that component inflated by
// kBoxInflation. Components with no cross channel are exactly zero.
InterferenceMap interference_box(const NetworkInstance& inst,
                                 const ConstraintSet& cons);

// Broadcast instance: every virtual transmitter shares the channel vectors
// h_{kl} and one sum-power budget P_tot covers all blocks.
std::pair<NetworkInstance, ConstraintSet> make_bc(
    int K, int N, int L_C, const std::vector<arma::cx_rowvec>& h_kl,
    const arma::mat& sigma2, double P_tot);

}  // namespace misobb
