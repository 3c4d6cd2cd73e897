// SPDX-License-Identifier: Apache-2.0

#include "misobb/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace misobb {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string place(int k, int l) {
  std::ostringstream os;
  os << "user " << k << ", carrier " << l;
  return os.str();
}

bool is_hermitian(const arma::cx_mat& M) {
  if (M.n_rows != M.n_cols) return false;
  double scale = std::max(1e-300, arma::abs(M).max());
  return arma::abs(M - M.t()).max() <= kTolHerm * std::max(1.0, scale);
}

double min_eig(const arma::cx_mat& M) {
  arma::vec ev;
  if (!arma::eig_sym(ev, M)) {
    throw std::runtime_error("eigenvalue decomposition failed");
  }
  return ev.min();
}

}  // namespace

std::string to_string(Topology t) { return t == Topology::IC ? "IC" : "BC"; }

Topology topology_from_string(const std::string& s) {
  if (s == "IC" || s == "ic") return Topology::IC;
  if (s == "BC" || s == "bc") return Topology::BC;
  throw std::invalid_argument("unknown topology '" + s + "' (expected IC or BC)");
}

NetworkInstance NetworkInstance::blank(int K, std::vector<int> N, int L_C,
                                       Topology topology) {
  NetworkInstance inst;
  inst.K = K;
  inst.N = std::move(N);
  inst.L_C = L_C;
  inst.topology = topology;
  inst.channels.resize(static_cast<size_t>(K) * K * L_C);
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L_C; ++l)
        inst.channel(j, k, l) = arma::cx_rowvec(inst.N[j], arma::fill::zeros);
  inst.noise = arma::mat(K, L_C, arma::fill::ones);
  return inst;
}

const arma::cx_rowvec& NetworkInstance::channel(int j, int k, int l) const {
  return channels[(static_cast<size_t>(j) * K + k) * L_C + l];
}

arma::cx_rowvec& NetworkInstance::channel(int j, int k, int l) {
  return channels[(static_cast<size_t>(j) * K + k) * L_C + l];
}

void NetworkInstance::validate() const {
  require(K >= 1, "K must be >= 1");
  require(static_cast<int>(N.size()) == K, "N must list one antenna count per user");
  for (int k = 0; k < K; ++k)
    require(N[k] >= 1, "N[" + std::to_string(k) + "] must be >= 1");
  require(L_C >= 1, "L_C must be >= 1");
  require(channels.size() == static_cast<size_t>(K) * K * L_C,
          "channel table must hold K*K*L_C entries");
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L_C; ++l) {
        const auto& h = channel(j, k, l);
        require(static_cast<int>(h.n_elem) == N[j],
                "channel (j=" + std::to_string(j) + ", k=" + std::to_string(k) +
                    ", l=" + std::to_string(l) + ") must have length N[j]");
        require(h.is_finite(), "channel (j=" + std::to_string(j) + ", k=" +
                                   std::to_string(k) + ", l=" + std::to_string(l) +
                                   ") has non-finite entries");
      }
  require(noise.n_rows == static_cast<arma::uword>(K) &&
              noise.n_cols == static_cast<arma::uword>(L_C),
          "noise must be K x L_C");
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L_C; ++l)
      require(std::isfinite(noise(k, l)) && noise(k, l) > 0.0,
              "noise power must be positive at " + place(k, l));
  if (topology == Topology::BC) {
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L_C; ++l) {
        const auto& ref = channel(0, k, l);
        for (int j = 1; j < K; ++j) {
          double scale = std::max(1.0, arma::abs(ref).max());
          require(channel(j, k, l).n_elem == ref.n_elem &&
                      arma::abs(channel(j, k, l) - ref).max() <= 1e-12 * scale,
                  "BC instance requires identical channels across transmitters "
                  "at " + place(k, l));
        }
      }
  }
}

CovariancePoint CovariancePoint::zeros(const NetworkInstance& inst) {
  CovariancePoint p;
  p.Q.resize(inst.blocks());
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l)
      p.Q[inst.block(k, l)] = arma::cx_mat(inst.N[k], inst.N[k], arma::fill::zeros);
  return p;
}

void CovariancePoint::validate(const NetworkInstance& inst) const {
  require(Q.size() == static_cast<size_t>(inst.blocks()),
          "covariance point must hold one block per (user, carrier)");
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      const auto& M = Q[inst.block(k, l)];
      require(M.n_rows == static_cast<arma::uword>(inst.N[k]) &&
                  M.n_cols == static_cast<arma::uword>(inst.N[k]),
              "covariance block at " + place(k, l) + " must be N_k x N_k");
      require(M.is_finite(), "covariance block at " + place(k, l) +
                                 " has non-finite entries");
      require(is_hermitian(M),
              "covariance block at " + place(k, l) + " is not Hermitian");
      double tr = std::real(arma::trace(M));
      require(min_eig((M + M.t()) / 2.0) >= -kTolPsd * std::max(1.0, tr),
              "covariance block at " + place(k, l) + " is not PSD");
    }
}

double CovariancePoint::total_trace() const {
  double t = 0.0;
  for (const auto& M : Q) t += std::real(arma::trace(M));
  return t;
}

void ConstraintSet::validate(const NetworkInstance& inst) const {
  require(!constraints.empty(), "constraint set must not be empty");
  for (size_t d = 0; d < constraints.size(); ++d) {
    const auto& c = constraints[d];
    require(std::isfinite(c.P) && c.P >= 0.0,
            "budget P of constraint " + std::to_string(d) + " must be >= 0");
    require(c.A.size() == static_cast<size_t>(inst.blocks()),
            "constraint " + std::to_string(d) +
                " must hold one weight per (user, carrier)");
    for (int k = 0; k < inst.K; ++k)
      for (int l = 0; l < inst.L_C; ++l) {
        const auto& A = c.A[inst.block(k, l)];
        if (A.is_empty()) continue;
        require(A.n_rows == static_cast<arma::uword>(inst.N[k]) &&
                    A.n_cols == static_cast<arma::uword>(inst.N[k]),
                "constraint " + std::to_string(d) + " weight at " + place(k, l) +
                    " must be N_k x N_k");
        require(is_hermitian(A), "constraint " + std::to_string(d) +
                                     " weight at " + place(k, l) +
                                     " is not Hermitian");
        double tr = std::real(arma::trace(A));
        require(min_eig((A + A.t()) / 2.0) >= -kTolPsd * std::max(1.0, tr),
                "constraint " + std::to_string(d) + " weight at " + place(k, l) +
                    " is not PSD");
      }
  }
  // Boundedness: every block needs a positive-definite weight somewhere.
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      bool covered = false;
      for (const auto& c : constraints) {
        const auto& A = c.A[inst.block(k, l)];
        if (A.is_empty()) continue;
        double tr = std::max(1.0, std::real(arma::trace(A)));
        if (min_eig((A + A.t()) / 2.0) > 1e-12 * tr) {
          covered = true;
          break;
        }
      }
      require(covered, "block at " + place(k, l) +
                           " is not covered by any positive-definite "
                           "constraint weight; feasible set would be unbounded");
    }
}

double UtilitySpec::weight(int k) const {
  return weights.empty() ? 1.0 : weights[k];
}

double UtilitySpec::falpha(double r) const {
  if (alpha == 0.0) return r;
  double x = (alpha >= 1.0) ? std::max(r, kRateFloor) : r;
  if (alpha == 1.0) return std::log(x);
  return std::pow(x, 1.0 - alpha) / (1.0 - alpha);
}

double UtilitySpec::falpha_prime(double r) const {
  if (alpha == 0.0) return 1.0;
  if (alpha >= 1.0 && r < kRateFloor) return 0.0;
  if (alpha == 1.0) return 1.0 / r;
  return std::pow(r, -alpha);
}

double UtilitySpec::falpha_second(double r) const {
  if (alpha == 0.0) return 0.0;
  if (alpha >= 1.0 && r < kRateFloor) return 0.0;
  if (alpha == 1.0) return -1.0 / (r * r);
  return -alpha * std::pow(r, -alpha - 1.0);
}

void UtilitySpec::validate(const NetworkInstance& inst) const {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
  if (!weights.empty()) {
    require(static_cast<int>(weights.size()) == inst.K,
            "weights must list one entry per user");
    for (int k = 0; k < inst.K; ++k)
      require(std::isfinite(weights[k]) && weights[k] > 0.0,
              "weight of user " + std::to_string(k) + " must be positive");
  }
}

InterferenceMap InterferenceMap::build(const NetworkInstance& inst) {
  InterferenceMap map;
  map.components.resize(inst.interference_dim());
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      auto& terms = map.components[inst.block(k, l)];
      for (int j = 0; j < inst.K; ++j) {
        if (j == k) continue;
        const auto& h = inst.channel(j, k, l);
        if (arma::norm(h, 2) == 0.0) continue;
        terms.push_back({inst.block(j, l), h.t() * h});
      }
    }
  return map;
}

double quad_form_real(const arma::cx_rowvec& h, const arma::cx_mat& Q) {
  arma::cx_double v = arma::as_scalar(h * Q * h.t());
  double re = std::real(v);
  double im = std::imag(v);
  if (std::abs(im) > 1e-9 * std::abs(re) + 1e-12) {
    throw std::runtime_error("quadratic form has non-negligible imaginary part");
  }
  return re;
}

arma::vec interference_map(const NetworkInstance& inst,
                           const CovariancePoint& Q) {
  arma::vec out(inst.interference_dim(), arma::fill::zeros);
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      double acc = 0.0;
      for (int j = 0; j < inst.K; ++j) {
        if (j == k) continue;
        acc += quad_form_real(inst.channel(j, k, l), Q.Q[inst.block(j, l)]);
      }
      out[inst.block(k, l)] = acc;
    }
  return out;
}

arma::vec rates_given_interference(const NetworkInstance& inst,
                                   const CovariancePoint& Q,
                                   const arma::vec& i) {
  if (i.n_elem != static_cast<arma::uword>(inst.interference_dim())) {
    throw std::invalid_argument("interference vector has wrong length");
  }
  arma::vec r(inst.K, arma::fill::zeros);
  for (int k = 0; k < inst.K; ++k) {
    double acc = 0.0;
    for (int l = 0; l < inst.L_C; ++l) {
      double S = quad_form_real(inst.channel(k, k, l), Q.Q[inst.block(k, l)]);
      double D = inst.noise(k, l) + i[inst.block(k, l)];
      acc += std::log1p(S / D);
    }
    r[k] = acc;
  }
  return r;
}

arma::vec rates(const NetworkInstance& inst, const CovariancePoint& Q) {
  return rates_given_interference(inst, Q, interference_map(inst, Q));
}

double cost(const NetworkInstance& inst, const UtilitySpec& util,
            const CovariancePoint& Q, const arma::vec& i) {
  arma::vec r = rates_given_interference(inst, Q, i);
  double c = 0.0;
  for (int k = 0; k < inst.K; ++k) c -= util.weight(k) * util.falpha(r[k]);
  return c;
}

arma::vec cost_gradient_i(const NetworkInstance& inst, const UtilitySpec& util,
                          const CovariancePoint& Q, const arma::vec& i) {
  arma::vec r = rates_given_interference(inst, Q, i);
  arma::vec g(inst.interference_dim(), arma::fill::zeros);
  for (int k = 0; k < inst.K; ++k) {
    double fp = util.falpha_prime(r[k]);
    if (fp == 0.0) continue;
    for (int l = 0; l < inst.L_C; ++l) {
      int c = inst.block(k, l);
      double S = quad_form_real(inst.channel(k, k, l), Q.Q[c]);
      double D = inst.noise(k, l) + i[c];
      g[c] = util.weight(k) * fp * S / (D * (D + S));
    }
  }
  return g;
}

std::pair<NetworkInstance, ConstraintSet> make_bc(
    int K, int N, int L_C, const std::vector<arma::cx_rowvec>& h_kl,
    const arma::mat& sigma2, double P_tot) {
  if (static_cast<int>(h_kl.size()) != K * L_C) {
    throw std::invalid_argument("make_bc needs one channel per (user, carrier)");
  }
  NetworkInstance inst =
      NetworkInstance::blank(K, std::vector<int>(K, N), L_C, Topology::BC);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L_C; ++l) {
      const auto& h = h_kl[static_cast<size_t>(k) * L_C + l];
      if (static_cast<int>(h.n_elem) != N) {
        throw std::invalid_argument("make_bc channel length must equal N");
      }
      for (int j = 0; j < K; ++j) inst.channel(j, k, l) = h;
    }
  inst.noise = sigma2;

  LinearConstraint sum_power;
  sum_power.P = P_tot;
  sum_power.A.resize(inst.blocks());
  for (int b = 0; b < inst.blocks(); ++b)
    sum_power.A[b] = arma::cx_mat(N, N, arma::fill::eye);
  ConstraintSet cons;
  cons.constraints.push_back(std::move(sum_power));

  inst.validate();
  cons.validate(inst);
  return {std::move(inst), std::move(cons)};
}

}  // namespace misobb
