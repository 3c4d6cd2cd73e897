// SPDX-License-Identifier: Apache-2.0

#include "misobb/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "misobb/convexcore.hpp"

namespace misobb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr long kGridEvalCap = 1000000000L;

// Budget per user for constraint sets made of one scaled-identity row per
// user, covering exactly that user's blocks.
std::vector<double> per_user_identity_budgets(const NetworkInstance& inst,
                                              const ConstraintSet& cons) {
  std::vector<double> P(inst.K, -1.0);
  if (cons.constraints.size() != static_cast<size_t>(inst.K)) {
    throw std::invalid_argument("expected exactly one budget per user");
  }
  for (const auto& c : cons.constraints) {
    int user = -1;
    double scale = 0.0;
    std::vector<bool> seen(inst.L_C, false);
    for (int k = 0; k < inst.K; ++k)
      for (int l = 0; l < inst.L_C; ++l) {
        const auto& A = c.A[inst.block(k, l)];
        if (A.is_empty()) continue;
        if (user == -1) user = k;
        if (k != user) {
          throw std::invalid_argument("budget rows must not span users");
        }
        int n = inst.N[k];
        double s = std::real(arma::trace(A)) / n;
        if (!(s > 0.0) ||
            arma::norm(A - s * arma::cx_mat(arma::eye<arma::cx_mat>(n, n)),
                       "fro") > 1e-12 * s * n) {
          throw std::invalid_argument("budget rows must be scaled identities");
        }
        if (scale == 0.0) scale = s;
        if (std::abs(s - scale) > 1e-12 * scale) {
          throw std::invalid_argument("budget scale must match across carriers");
        }
        seen[l] = true;
      }
    if (user == -1 || std::count(seen.begin(), seen.end(), true) != inst.L_C) {
      throw std::invalid_argument("each budget must cover one user's blocks");
    }
    if (P[user] >= 0.0) {
      throw std::invalid_argument("user covered by more than one budget");
    }
    P[user] = c.P / scale;
  }
  return P;
}

// ---------------------------------------------------------------------------
// Grid search

struct AxisSpec {
  arma::vec values;
  double step = 0.0;
  bool wrap = false;  // relative phases live on a circle
};

// Unit beamformer from nested spherical angles and relative phases; the
// first coordinate is kept real, fixing the irrelevant global phase.
arma::cx_colvec beam_from_params(const double* th, const double* ph, int N) {
  arma::cx_colvec w(N);
  double sinprod = 1.0;
  for (int i = 0; i < N; ++i) {
    double mag = sinprod;
    if (i < N - 1) {
      mag *= std::cos(th[i]);
      sinprod *= std::sin(th[i]);
    }
    w[i] = std::polar(mag, i == 0 ? 0.0 : ph[i - 1]);
  }
  return w;
}

struct UCand {
  double own = 0.0;    // received signal power at the user's own receiver
  double cross = 0.0;  // power caused at the other receiver
  std::array<double, 7> params{};
};

struct UserSpace {
  int N = 1;
  int n_ang = 0;              // angles and phases each
  double Pmax = 0.0;
  arma::cx_rowvec h_own;
  arma::cx_rowvec h_cross;    // empty for single-user networks
  std::vector<AxisSpec> axes; // thetas, phases, power
  int n_axes() const { return 2 * n_ang + 1; }
};

void fill_candidate(const UserSpace& u, const double* params, UCand& c) {
  std::copy(params, params + u.n_axes(), c.params.begin());
  arma::cx_colvec w = beam_from_params(params, params + u.n_ang, u.N);
  double p = params[2 * u.n_ang];
  c.own = p * std::norm(arma::cx_double(arma::as_scalar(u.h_own * w)));
  c.cross = u.h_cross.is_empty()
                ? 0.0
                : p * std::norm(arma::cx_double(arma::as_scalar(u.h_cross * w)));
}

std::vector<UCand> enumerate_user(const UserSpace& u,
                                  const double* center /* may be null */) {
  long count = 1;
  for (const auto& ax : u.axes) count *= ax.values.n_elem;
  std::vector<UCand> out;
  out.reserve(count + 1);
  std::vector<arma::uword> idx(u.n_axes(), 0);
  std::array<double, 7> params{};
  for (long n = 0; n < count; ++n) {
    for (int a = 0; a < u.n_axes(); ++a) params[a] = u.axes[a].values[idx[a]];
    UCand c;
    fill_candidate(u, params.data(), c);
    out.push_back(c);
    for (int a = u.n_axes() - 1; a >= 0; --a) {
      if (++idx[a] < u.axes[a].values.n_elem) break;
      idx[a] = 0;
    }
  }
  if (center != nullptr) {
    UCand c;
    fill_candidate(u, center, c);
    out.push_back(c);
  }
  return out;
}

// The joint utility reads a candidate only through (own, cross); it never
// falls when own rises and never rises when cross does, whichever partner
// the other user plays. Candidates dominated in both coordinates therefore
// cannot host the max, and sweeping the (own max, cross min) staircase is
// exact. This also collapses the beam directions that tie in both received
// powers, which otherwise crowd out genuinely distinct regions downstream.
void pareto_prune(std::vector<UCand>& v) {
  std::stable_sort(v.begin(), v.end(), [](const UCand& a, const UCand& b) {
    if (a.own != b.own) return a.own > b.own;
    return a.cross < b.cross;
  });
  std::vector<UCand> keep;
  double best_cross = kInf;
  for (const auto& c : v) {
    if (c.cross < best_cross) {
      keep.push_back(c);
      best_cross = c.cross;
    }
  }
  v.swap(keep);
}

double wrap_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

struct Basin {
  double u = -kInf;
  std::array<double, 7> p1{}, p2{};
};

// Best separated candidates seen during one stage. Two points share a basin
// when every coordinate differs by at most 2.5 grid steps.
class BasinKeeper {
 public:
  BasinKeeper(int cap, const std::vector<UserSpace>* spaces)
      : cap_(cap), spaces_(spaces) {}

  void offer(double u, const std::array<double, 7>& p1,
             const std::array<double, 7>& p2) {
    if (static_cast<int>(kept_.size()) == cap_ && u <= min_kept_) return;
    for (auto& b : kept_) {
      if (same_basin(b, p1, p2)) {
        if (u > b.u) {
          b.u = u;
          b.p1 = p1;
          b.p2 = p2;
          refresh_min();
        }
        return;
      }
    }
    if (static_cast<int>(kept_.size()) < cap_) {
      kept_.push_back({u, p1, p2});
    } else {
      auto worst = std::min_element(
          kept_.begin(), kept_.end(),
          [](const Basin& a, const Basin& b) { return a.u < b.u; });
      *worst = {u, p1, p2};
    }
    refresh_min();
  }

  std::vector<Basin> sorted() const {
    std::vector<Basin> v = kept_;
    std::sort(v.begin(), v.end(),
              [](const Basin& a, const Basin& b) { return a.u > b.u; });
    return v;
  }

 private:
  void refresh_min() {
    min_kept_ = kInf;
    for (const auto& b : kept_) min_kept_ = std::min(min_kept_, b.u);
    if (static_cast<int>(kept_.size()) < cap_) min_kept_ = -kInf;
  }

  bool same_basin(const Basin& b, const std::array<double, 7>& p1,
                  const std::array<double, 7>& p2) const {
    for (size_t s = 0; s < spaces_->size(); ++s) {
      const UserSpace& u = (*spaces_)[s];
      const auto& bp = s == 0 ? b.p1 : b.p2;
      const auto& np = s == 0 ? p1 : p2;
      for (int a = 0; a < u.n_axes(); ++a) {
        double d = u.axes[a].wrap ? wrap_dist(bp[a], np[a])
                                  : std::abs(bp[a] - np[a]);
        if (d > 2.5 * u.axes[a].step) return false;
      }
    }
    return true;
  }

  int cap_;
  const std::vector<UserSpace>* spaces_;
  std::vector<Basin> kept_;
  double min_kept_ = -kInf;
};

AxisSpec make_axis(double lo, double hi, int count, bool wrap) {
  AxisSpec ax;
  ax.values = arma::linspace(lo, hi, count);
  ax.step = count > 1 ? (hi - lo) / (count - 1) : 0.0;
  ax.wrap = wrap;
  return ax;
}

// Window of width 2*hw around c, shifted to stay inside [dlo, dhi].
AxisSpec make_zoom_axis(double c, double hw, int count, double dlo, double dhi,
                        bool wrap) {
  if (wrap) return make_axis(c - hw, c + hw, count, true);
  double lo = c - hw, hi = c + hw;
  if (hi - lo >= dhi - dlo) return make_axis(dlo, dhi, count, false);
  if (lo < dlo) {
    hi += dlo - lo;
    lo = dlo;
  }
  if (hi > dhi) {
    lo -= hi - dhi;
    hi = dhi;
  }
  return make_axis(lo, hi, count, false);
}

}  // namespace

GridResult grid_search(const NetworkInstance& inst, const UtilitySpec& util,
                       const ConstraintSet& cons, const GridOptions& opts) {
  inst.validate();
  cons.validate(inst);
  util.validate(inst);
  if (inst.L_C != 1) throw std::invalid_argument("grid oracle: L_C must be 1");
  if (inst.K > 2) throw std::invalid_argument("grid oracle: at most 2 users");
  int total_N = 0;
  for (int n : inst.N) total_N += n;
  if (total_N > 4) {
    throw std::invalid_argument("grid oracle: at most 4 antennas in total");
  }
  if (opts.resolution < 8 || opts.power_resolution < 8) {
    throw std::invalid_argument("grid oracle: resolutions must be at least 8");
  }
  if (opts.refine_rounds < 0 || opts.keep_basins < 1 ||
      !(opts.shrink > 0.0 && opts.shrink < 1.0)) {
    throw std::invalid_argument("grid oracle: bad refinement settings");
  }
  std::vector<double> P = per_user_identity_budgets(inst, cons);

  const int K = inst.K;
  std::vector<UserSpace> spaces(K);
  for (int k = 0; k < K; ++k) {
    auto& u = spaces[k];
    u.N = inst.N[k];
    u.n_ang = u.N - 1;
    u.Pmax = P[k];
    u.h_own = inst.channel(k, k, 0);
    if (K == 2) u.h_cross = inst.channel(k, 1 - k, 0);
  }

  // Candidate enumeration is the cost known up front; the joint sweep runs
  // on Pareto-pruned sets whose size is data dependent, so it is metered
  // against the same budget while sweeping.
  auto stage_counts = [&](bool refined) {
    long total = 0;
    for (int k = 0; k < K; ++k) {
      const auto& u = spaces[k];
      long ck = 1;
      long na = refined ? (opts.resolution | 1) : opts.resolution + 1;
      long np = refined ? (opts.resolution | 1) : opts.resolution;
      long npw = refined ? (opts.power_resolution | 1)
                         : opts.power_resolution + 1;
      for (int a = 0; a < u.n_ang; ++a) ck *= na;
      for (int a = 0; a < u.n_ang; ++a) ck *= np;
      ck *= npw;
      total += ck;
    }
    return total;
  };
  long est = stage_counts(false) +
             static_cast<long>(opts.refine_rounds) * opts.keep_basins *
                 stage_counts(true);
  if (est > kGridEvalCap) {
    throw std::invalid_argument("grid oracle: evaluation budget exceeded");
  }

  const double sig0 = inst.noise(0, 0);
  const double sig1 = K == 2 ? inst.noise(1, 0) : 0.0;
  const double w0 = util.weight(0);
  const double w1 = K == 2 ? util.weight(1) : 0.0;

  GridResult res;
  res.utility = -kInf;
  std::array<double, 7> best_p1{}, best_p2{};

  auto eval_pair = [&](const UCand& a, const UCand& b) {
    double r0 = std::log1p(a.own / (sig0 + b.cross));
    double r1 = std::log1p(b.own / (sig1 + a.cross));
    return w0 * util.falpha(r0) + w1 * util.falpha(r1);
  };
  auto eval_single = [&](const UCand& a) {
    return w0 * util.falpha(std::log1p(a.own / sig0));
  };

  // One full sweep over a user-space pair; tracks the global best and the
  // basin keeper for the next zoom stage.
  auto combine = [&](const std::vector<UCand>& c0, const std::vector<UCand>& c1,
                     BasinKeeper& keeper) {
    long pairs = K == 1 ? static_cast<long>(c0.size())
                        : static_cast<long>(c0.size()) *
                              static_cast<long>(c1.size());
    if (res.evaluations + pairs > kGridEvalCap) {
      throw std::runtime_error("grid oracle: evaluation budget exceeded");
    }
    if (K == 1) {
      for (const auto& a : c0) {
        double u = eval_single(a);
        ++res.evaluations;
        keeper.offer(u, a.params, {});
        if (u > res.utility) {
          res.utility = u;
          best_p1 = a.params;
        }
      }
      return;
    }
    for (const auto& a : c0)
      for (const auto& b : c1) {
        double u = eval_pair(a, b);
        ++res.evaluations;
        keeper.offer(u, a.params, b.params);
        if (u > res.utility) {
          res.utility = u;
          best_p1 = a.params;
          best_p2 = b.params;
        }
      }
  };

  // Stage 0: the full domain.
  for (int k = 0; k < K; ++k) {
    auto& u = spaces[k];
    u.axes.clear();
    for (int a = 0; a < u.n_ang; ++a) {
      u.axes.push_back(make_axis(0.0, kPi / 2.0, opts.resolution + 1, false));
    }
    for (int a = 0; a < u.n_ang; ++a) {
      u.axes.push_back(make_axis(
          0.0, 2.0 * kPi * (opts.resolution - 1.0) / opts.resolution,
          opts.resolution, true));
    }
    u.axes.push_back(make_axis(0.0, u.Pmax, opts.power_resolution + 1, false));
  }
  std::vector<Basin> basins;
  {
    BasinKeeper keeper(opts.keep_basins, &spaces);
    std::vector<UCand> c0 = enumerate_user(spaces[0], nullptr);
    std::vector<UCand> c1 =
        K == 2 ? enumerate_user(spaces[1], nullptr) : std::vector<UCand>{};
    res.evaluations += static_cast<long>(c0.size() + c1.size());
    pareto_prune(c0);
    if (K == 2) pareto_prune(c1);
    combine(c0, c1, keeper);
    basins = keeper.sorted();
  }

  // Zoom stages: shrink a window around each kept basin and re-sweep.
  std::vector<double> span0;  // full-domain span per axis, shared by users
  for (int s = 1; s <= opts.refine_rounds; ++s) {
    BasinKeeper keeper(opts.keep_basins, &spaces);
    double factor = std::pow(opts.shrink, s);
    for (const auto& basin : basins) {
      for (int k = 0; k < K; ++k) {
        auto& u = spaces[k];
        const auto& center = k == 0 ? basin.p1 : basin.p2;
        u.axes.clear();
        int cnt_a = opts.resolution | 1;
        int cnt_p = opts.power_resolution | 1;
        for (int a = 0; a < u.n_ang; ++a) {
          double hw = 0.5 * (kPi / 2.0) * factor;
          u.axes.push_back(
              make_zoom_axis(center[a], hw, cnt_a, 0.0, kPi / 2.0, false));
        }
        for (int a = 0; a < u.n_ang; ++a) {
          double hw = 0.5 * (2.0 * kPi) * factor;
          u.axes.push_back(make_zoom_axis(center[u.n_ang + a], hw, cnt_a, 0.0,
                                          0.0, true));
        }
        double hw = 0.5 * u.Pmax * factor;
        u.axes.push_back(make_zoom_axis(center[2 * u.n_ang], hw, cnt_p, 0.0,
                                        u.Pmax, false));
      }
      std::vector<UCand> c0 = enumerate_user(spaces[0], basin.p1.data());
      std::vector<UCand> c1 = K == 2
                                  ? enumerate_user(spaces[1], basin.p2.data())
                                  : std::vector<UCand>{};
      res.evaluations += static_cast<long>(c0.size() + c1.size());
      pareto_prune(c0);
      if (K == 2) pareto_prune(c1);
      combine(c0, c1, keeper);
    }
    basins = keeper.sorted();
  }
  (void)span0;

  // Sensitivity of the best value to one final-stage step along each axis.
  auto eval_params = [&](const std::array<double, 7>& p1,
                         const std::array<double, 7>& p2) {
    UCand a, b;
    fill_candidate(spaces[0], p1.data(), a);
    if (K == 2) {
      fill_candidate(spaces[1], p2.data(), b);
      return eval_pair(a, b);
    }
    return eval_single(a);
  };
  res.res_bound = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& u = spaces[k];
    for (int a = 0; a < u.n_axes(); ++a) {
      double step = u.axes[a].step;
      double delta = 0.0;
      for (int sgn : {-1, 1}) {
        auto p1 = best_p1;
        auto p2 = best_p2;
        auto& p = k == 0 ? p1 : p2;
        p[a] += sgn * step;
        if (!u.axes[a].wrap) {
          double hi_dom = a < u.n_ang ? kPi / 2.0
                                      : (a < 2 * u.n_ang ? kInf : u.Pmax);
          p[a] = std::clamp(p[a], 0.0, hi_dom);
        }
        double un = eval_params(p1, p2);
        if (un > res.utility) {
          res.utility = un;
          best_p1 = p1;
          best_p2 = p2;
        }
        delta = std::max(delta, std::abs(res.utility - un));
      }
      res.res_bound += delta;
    }
  }

  res.Q = CovariancePoint::zeros(inst);
  for (int k = 0; k < K; ++k) {
    const auto& u = spaces[k];
    const auto& p = k == 0 ? best_p1 : best_p2;
    arma::cx_colvec w = beam_from_params(p.data(), p.data() + u.n_ang, u.N);
    res.Q.Q[inst.block(k, 0)] = p[2 * u.n_ang] * (w * w.t());
  }
  return res;
}

WaterfillingResult waterfilling_decoupled(const NetworkInstance& inst,
                                          const UtilitySpec& util,
                                          const ConstraintSet& cons) {
  inst.validate();
  cons.validate(inst);
  util.validate(inst);
  if (util.alpha != 0.0) {
    throw std::invalid_argument("waterfilling needs alpha = 0");
  }
  InterferenceMap map = InterferenceMap::build(inst);
  for (const auto& comp : map.components) {
    if (!comp.empty()) {
      throw std::invalid_argument("waterfilling needs an interference-free network");
    }
  }
  std::vector<double> P = per_user_identity_budgets(inst, cons);

  WaterfillingResult res;
  res.Q = CovariancePoint::zeros(inst);
  for (int k = 0; k < inst.K; ++k) {
    arma::vec gain(inst.L_C);
    for (int l = 0; l < inst.L_C; ++l) {
      const auto& h = inst.channel(k, k, l);
      gain[l] = std::pow(arma::norm(h, 2), 2) / inst.noise(k, l);
    }
    arma::uvec usable = arma::find(gain > 0.0);
    arma::vec p(inst.L_C, arma::fill::zeros);
    if (!usable.is_empty()) {
      arma::vec inv = 1.0 / gain.elem(usable);
      arma::uvec order = arma::sort_index(inv);
      double level = 0.0;
      double acc = 0.0;
      int active = 0;
      for (arma::uword m = 0; m < order.n_elem; ++m) {
        acc += inv[order[m]];
        double cand = (P[k] + acc) / static_cast<double>(m + 1);
        if (cand > inv[order[m]]) {
          level = cand;
          active = static_cast<int>(m + 1);
        }
      }
      (void)active;
      for (arma::uword m = 0; m < usable.n_elem; ++m) {
        p[usable[m]] = std::max(0.0, level - inv[m]);
      }
    }
    res.powers.push_back(p);
    for (int l = 0; l < inst.L_C; ++l) {
      if (p[l] <= 0.0) continue;
      const auto& h = inst.channel(k, k, l);
      double nh2 = std::pow(arma::norm(h, 2), 2);
      res.Q.Q[inst.block(k, l)] = (p[l] / nh2) * (h.t() * h);
      res.utility += util.weight(k) * std::log1p(p[l] * gain[l]);
    }
  }
  return res;
}

namespace {

class DualMacObjective final : public barrier::Objective {
 public:
  DualMacObjective(std::vector<arma::cx_rowvec> h, arma::vec sigma2, int N)
      : h_(std::move(h)), sigma2_(std::move(sigma2)), N_(N) {}

  int dim() const override { return static_cast<int>(h_.size()); }
  double theta() const override { return 0.0; }

  double value(const arma::vec& q) const override {
    arma::cx_mat X = gram(q);
    arma::cx_mat R;
    if (!arma::chol(R, X)) return kInf;
    double v = 0.0;
    for (int i = 0; i < N_; ++i) v -= 2.0 * std::log(std::real(R(i, i)));
    return v;
  }

  void add_derivatives(const arma::vec& q, arma::vec& g,
                       arma::mat& H) const override {
    arma::cx_mat Xi;
    if (!arma::inv_sympd(Xi, gram(q))) {
      throw std::runtime_error("dual uplink matrix not invertible");
    }
    const int K = dim();
    std::vector<arma::cx_rowvec> hXi(K);
    for (int k = 0; k < K; ++k) hXi[k] = h_[k] * Xi;
    for (int k = 0; k < K; ++k) {
      g[k] -= std::real(arma::cx_double(arma::as_scalar(hXi[k] * h_[k].t()))) /
              sigma2_[k];
      for (int j = 0; j <= k; ++j) {
        double v = std::norm(arma::cx_double(arma::as_scalar(hXi[j] * h_[k].t()))) /
                   (sigma2_[j] * sigma2_[k]);
        H(j, k) += v;
        if (j != k) H(k, j) += v;
      }
    }
  }

  double domain_value(const arma::vec&) const override { return 0.0; }
  void add_domain_derivatives(const arma::vec&, arma::vec&, arma::mat&,
                              double) const override {}

 private:
  arma::cx_mat gram(const arma::vec& q) const {
    arma::cx_mat X = arma::eye<arma::cx_mat>(N_, N_);
    for (int k = 0; k < dim(); ++k) {
      X += (q[k] / sigma2_[k]) * (h_[k].t() * h_[k]);
    }
    return X;
  }

  std::vector<arma::cx_rowvec> h_;
  arma::vec sigma2_;
  int N_;
};

}  // namespace

double dpc_sum_capacity_nats(const NetworkInstance& inst,
                             const ConstraintSet& cons) {
  inst.validate();
  cons.validate(inst);
  if (inst.topology != Topology::BC || inst.L_C != 1) {
    throw std::invalid_argument("dirty-paper bound needs a single-carrier broadcast network");
  }
  for (int k = 1; k < inst.K; ++k) {
    if (inst.N[k] != inst.N[0]) {
      throw std::invalid_argument("broadcast users must share the antenna count");
    }
  }
  if (cons.constraints.size() != 1) {
    throw std::invalid_argument("dirty-paper bound needs one sum-power budget");
  }
  const auto& c = cons.constraints[0];
  double scale = 0.0;
  for (int b = 0; b < inst.blocks(); ++b) {
    const auto& A = c.A[b];
    int n = inst.N[0];
    if (A.is_empty()) {
      throw std::invalid_argument("sum-power budget must cover every user");
    }
    double s = std::real(arma::trace(A)) / n;
    if (!(s > 0.0) ||
        arma::norm(A - s * arma::cx_mat(arma::eye<arma::cx_mat>(n, n)), "fro") >
            1e-12 * s * n) {
      throw std::invalid_argument("sum-power budget must be a scaled identity");
    }
    if (scale == 0.0) scale = s;
    if (std::abs(s - scale) > 1e-12 * scale) {
      throw std::invalid_argument("sum-power scale must match across users");
    }
  }
  double P = c.P / scale;

  std::vector<arma::cx_rowvec> h(inst.K);
  arma::vec sigma2(inst.K);
  for (int k = 0; k < inst.K; ++k) {
    h[k] = inst.channel(k, k, 0);
    sigma2[k] = inst.noise(k, 0);
  }
  DualMacObjective obj(std::move(h), sigma2, inst.N[0]);

  std::vector<barrier::Ineq> rows;
  for (int k = 0; k < inst.K; ++k) {
    arma::vec a(inst.K, arma::fill::zeros);
    a[k] = -1.0;
    rows.push_back({a, 0.0});
  }
  rows.push_back({arma::vec(inst.K, arma::fill::ones), P});

  arma::vec x0(inst.K);
  x0.fill(P / (2.0 * inst.K));
  barrier::Options opt;
  opt.tol = kTolKkt;
  barrier::Outcome oc = barrier::minimize(obj, rows, std::move(x0), opt);
  double cap = -oc.objective;
  if (oc.status != SolveStatus::Optimal &&
      oc.kkt_residual > 1e-6 * std::max(1.0, std::abs(cap))) {
    throw std::runtime_error("dirty-paper bound did not converge");
  }
  return cap;
}

}  // namespace misobb
