// SPDX-License-Identifier: Apache-2.0
//
// Deterministic test fixtures. Randomness goes through an explicit engine so
// every test reproduces bit-for-bit.

#pragma once

#include <complex>
#include <random>
#include <vector>

#include "misobb/io.hpp"
#include "misobb/model.hpp"

namespace testutil {

inline double urand(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1p-53;
}

inline double nrand(std::mt19937_64& g) {
  // Box-Muller, cosine branch only; test fixtures don't need the pair.
  double u1 = (static_cast<double>(g() >> 11) + 1.0) * 0x1p-53;
  double u2 = urand(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline arma::cx_double crand(std::mt19937_64& g) {
  double re = nrand(g);
  double im = nrand(g);
  return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
}

inline arma::cx_mat random_psd(std::mt19937_64& g, int n, double scale = 1.0) {
  arma::cx_mat B(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) B(r, c) = crand(g);
  arma::cx_mat Q = B * B.t();
  return (scale / std::max(1.0, std::real(arma::trace(Q)))) * Q;
}

// Random covariance point with total trace per user below the given budget,
// so it is strictly feasible for per-user identity constraints.
inline misobb::CovariancePoint random_point(const misobb::NetworkInstance& inst,
                                            std::mt19937_64& g,
                                            double budget_frac = 0.5) {
  misobb::CovariancePoint p = misobb::CovariancePoint::zeros(inst);
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      p.Q[inst.block(k, l)] =
          random_psd(g, inst.N[k], budget_frac / inst.L_C);
    }
  return p;
}

inline misobb::InstanceBundle small_ic(std::uint64_t seed, int K = 2, int N = 2,
                                       int L_C = 1, double P = 10.0,
                                       double alpha = 0.0) {
  misobb::GeneratorSpec spec;
  spec.K = K;
  spec.N = {N};
  spec.L_C = L_C;
  spec.topology = misobb::Topology::IC;
  spec.alpha = alpha;
  spec.P = P;
  spec.seed = seed;
  return misobb::generate_instance(spec);
}

inline misobb::InstanceBundle small_bc(std::uint64_t seed, int K = 2, int N = 2,
                                       double P = 10.0) {
  misobb::GeneratorSpec spec;
  spec.K = K;
  spec.N = {N};
  spec.L_C = 1;
  spec.topology = misobb::Topology::BC;
  spec.P = P;
  spec.seed = seed;
  return misobb::generate_instance(spec);
}

// Zeroes every cross link, preserving the direct channels.
inline void decouple(misobb::NetworkInstance& inst) {
  for (int j = 0; j < inst.K; ++j)
    for (int k = 0; k < inst.K; ++k) {
      if (j == k) continue;
      for (int l = 0; l < inst.L_C; ++l) {
        inst.channel(j, k, l).zeros();
      }
    }
}

}  // namespace testutil
