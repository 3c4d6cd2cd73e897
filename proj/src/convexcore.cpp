// SPDX-License-Identifier: Apache-2.0

#include "misobb/convexcore.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace misobb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

VarLayout VarLayout::build(const NetworkInstance& inst) {
  VarLayout layout;
  int off = 0;
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      int n = inst.N[k];
      layout.offset.push_back(off);
      layout.dim.push_back(n);
      std::vector<std::pair<int, int>> pr;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pr.emplace_back(i, j);
      layout.pairs.push_back(std::move(pr));
      off += n * n;
    }
  layout.total = off;
  return layout;
}

arma::cx_mat VarLayout::unpack_block(const arma::vec& x, int b) const {
  int n = dim[b];
  int off = offset[b];
  arma::cx_mat Q(n, n);
  for (int i = 0; i < n; ++i) Q(i, i) = x[off + i];
  for (size_t p = 0; p < pairs[b].size(); ++p) {
    auto [i, j] = pairs[b][p];
    arma::cx_double z(x[off + n + 2 * p], x[off + n + 2 * p + 1]);
    Q(i, j) = z;
    Q(j, i) = std::conj(z);
  }
  return Q;
}

void VarLayout::pack_block(const arma::cx_mat& Q, int b, arma::vec& x) const {
  int n = dim[b];
  int off = offset[b];
  for (int i = 0; i < n; ++i) x[off + i] = std::real(Q(i, i));
  for (size_t p = 0; p < pairs[b].size(); ++p) {
    auto [i, j] = pairs[b][p];
    x[off + n + 2 * p] = std::real(Q(i, j));
    x[off + n + 2 * p + 1] = std::imag(Q(i, j));
  }
}

CovariancePoint VarLayout::unpack(const NetworkInstance& inst,
                                  const arma::vec& x) const {
  CovariancePoint p = CovariancePoint::zeros(inst);
  for (int b = 0; b < inst.blocks(); ++b) p.Q[b] = unpack_block(x, b);
  return p;
}

arma::vec VarLayout::pack(const CovariancePoint& Q) const {
  arma::vec x(total, arma::fill::zeros);
  for (size_t b = 0; b < Q.Q.size(); ++b) pack_block(Q.Q[b], b, x);
  return x;
}

void VarLayout::add_functional(arma::vec& a, int b, const arma::cx_mat& M,
                               double scale) const {
  int n = dim[b];
  int off = offset[b];
  for (int i = 0; i < n; ++i) a[off + i] += scale * std::real(M(i, i));
  for (size_t p = 0; p < pairs[b].size(); ++p) {
    auto [i, j] = pairs[b][p];
    a[off + n + 2 * p] += scale * 2.0 * std::real(M(i, j));
    a[off + n + 2 * p + 1] += scale * 2.0 * std::imag(M(i, j));
  }
}

namespace barrier {

Outcome minimize(const Objective& obj, const std::vector<Ineq>& ineqs,
                 arma::vec x0, const Options& opt) {
  const int n = obj.dim();
  const double theta_total = obj.theta() + static_cast<double>(ineqs.size());

  auto phi = [&](const arma::vec& y, double mu) -> double {
    double dv = obj.domain_value(y);
    if (!std::isfinite(dv)) return kInf;
    double sb = 0.0;
    for (const auto& q : ineqs) {
      double s = q.b - arma::dot(q.a, y);
      if (!(s > 0.0)) return kInf;
      sb -= std::log(s);
    }
    double v = obj.value(y);
    if (!std::isfinite(v)) return kInf;
    return v + mu * (dv + sb);
  };

  Outcome out;
  out.x = std::move(x0);
  if (!std::isfinite(phi(out.x, opt.mu0))) {
    throw std::logic_error("barrier start is not strictly feasible");
  }

  double mu = opt.mu0;
  double dec2 = kInf;
  bool exhausted = false;
  arma::vec g(n), d;
  arma::mat H(n, n);

  for (;;) {
    const bool final_stage = mu * theta_total <= 0.5 * opt.tol || mu <= 1e-300;
    const double target_half = final_stage ? 0.25 * opt.tol : 0.05 * mu;
    int stage_iters = 0;
    for (;;) {
      g.zeros();
      H.zeros();
      obj.add_derivatives(out.x, g, H);
      obj.add_domain_derivatives(out.x, g, H, mu);
      for (const auto& q : ineqs) {
        double s = q.b - arma::dot(q.a, out.x);
        g += (mu / s) * q.a;
        H += (mu / (s * s)) * (q.a * q.a.t());
      }
      bool solved = false;
      double ridge = 0.0;
      double hs = std::max(arma::trace(H) / n, 1.0);
      for (int attempt = 0; attempt < 9; ++attempt) {
        arma::mat Hr = H;
        if (ridge > 0.0) Hr.diag() += ridge;
        if (arma::solve(d, Hr, g,
                        arma::solve_opts::likely_sympd +
                            arma::solve_opts::no_approx) &&
            d.is_finite()) {
          dec2 = arma::dot(g, d);
          if (std::isfinite(dec2) && dec2 >= 0.0) {
            solved = true;
            break;
          }
        }
        ridge = (ridge == 0.0) ? 1e-14 * hs : ridge * 100.0;
      }
      if (!solved) break;  // stall; either shrink mu or finish
      if (0.5 * dec2 <= target_half) break;
      if (out.newton_iters >= opt.max_newton || stage_iters >= 400) {
        exhausted = out.newton_iters >= opt.max_newton;
        break;
      }
      double phix = phi(out.x, mu);
      double t = 1.0;
      int bt = 0;
      arma::vec xn;
      for (; bt <= 60; ++bt) {
        xn = out.x - t * d;
        if (phi(xn, mu) <= phix - 0.3 * t * dec2) break;
        t *= 0.5;
      }
      if (bt > 60) break;  // line search stall
      out.x = std::move(xn);
      ++out.newton_iters;
      ++stage_iters;
      if (opt.stop_early && opt.stop_early(out.x)) {
        out.stopped_early = true;
        out.objective = obj.value(out.x);
        out.kkt_residual = mu * theta_total + 0.5 * dec2;
        out.status = SolveStatus::Optimal;
        return out;
      }
    }
    if (final_stage || exhausted) {
      out.objective = obj.value(out.x);
      out.kkt_residual = mu * theta_total + 0.5 * dec2;
      out.status = (!exhausted && out.kkt_residual <= opt.tol)
                       ? SolveStatus::Optimal
                       : SolveStatus::MaxIter;
      return out;
    }
    mu *= opt.mu_shrink;
  }
}

}  // namespace barrier

namespace {

// -log det barrier over the Hermitian blocks of a VarLayout.
struct DomainCore {
  const NetworkInstance* inst = nullptr;
  VarLayout layout;
  double theta = 0.0;

  explicit DomainCore(const NetworkInstance& instance)
      : inst(&instance), layout(VarLayout::build(instance)) {
    for (int b = 0; b < instance.blocks(); ++b) theta += layout.dim[b];
  }

  double value(const arma::vec& x) const {
    double v = 0.0;
    for (size_t b = 0; b < layout.dim.size(); ++b) {
      arma::cx_mat R;
      if (!arma::chol(R, layout.unpack_block(x, b))) return kInf;
      for (int i = 0; i < layout.dim[b]; ++i) {
        double rii = std::real(R(i, i));
        if (!(rii > 0.0)) return kInf;
        v -= 2.0 * std::log(rii);
      }
    }
    return v;
  }

  void add_derivs(const arma::vec& x, arma::vec& g, arma::mat& H,
                  double mu) const {
    for (size_t b = 0; b < layout.dim.size(); ++b) {
      arma::cx_mat Q = layout.unpack_block(x, b);
      arma::cx_mat C;
      if (!arma::inv_sympd(C, Q) && !arma::inv(C, Q)) {
        throw std::runtime_error("barrier Hessian: block not invertible");
      }
      C = (C + C.t()) / 2.0;
      layout.add_functional(g, b, C, -mu);
      hessian_block(b, C, H, mu);
    }
  }

  // d^2(-log det Q)/dt1 dt2 = Re tr(C D1 C D2) with C = Q^{-1} and D the
  // sparse parameter directions; tr(C E_ab C E_cd) = C(d,a) C(b,c).
  void hessian_block(int b, const arma::cx_mat& C, arma::mat& H,
                     double mu) const {
    const int n = layout.dim[b];
    const int off = layout.offset[b];
    const int m = n * n;
    using Entry = std::tuple<int, int, arma::cx_double>;
    auto entries = [&](int t, std::array<Entry, 2>& e) -> int {
      if (t < n) {
        e[0] = {t, t, arma::cx_double(1.0, 0.0)};
        return 1;
      }
      int p = (t - n) / 2;
      auto [i, j] = layout.pairs[b][p];
      if ((t - n) % 2 == 0) {
        e[0] = {i, j, arma::cx_double(1.0, 0.0)};
        e[1] = {j, i, arma::cx_double(1.0, 0.0)};
      } else {
        e[0] = {i, j, arma::cx_double(0.0, 1.0)};
        e[1] = {j, i, arma::cx_double(0.0, -1.0)};
      }
      return 2;
    };
    std::array<Entry, 2> e1, e2;
    for (int t1 = 0; t1 < m; ++t1) {
      int c1 = entries(t1, e1);
      for (int t2 = t1; t2 < m; ++t2) {
        int c2 = entries(t2, e2);
        arma::cx_double s(0.0, 0.0);
        for (int u = 0; u < c1; ++u) {
          auto [r1, q1, w1] = e1[u];
          for (int v = 0; v < c2; ++v) {
            auto [r2, q2, w2] = e2[v];
            s += w1 * w2 * C(q2, r1) * C(q1, r2);
          }
        }
        double val = mu * std::real(s);
        H(off + t1, off + t2) += val;
        if (t1 != t2) H(off + t2, off + t1) += val;
      }
    }
  }
};

// Cost at fixed interference plus optional linear interference penalty.
class SubproblemObjective final : public barrier::Objective {
 public:
  explicit SubproblemObjective(const ConvexSubproblem& sub)
      : sub_(sub), core_(*sub.inst) {
    const auto& inst = *sub.inst;
    const int L = inst.interference_dim();
    if (sub.i_fix.n_elem != static_cast<arma::uword>(L)) {
      throw std::invalid_argument("i_fix must have length K*L_C");
    }
    if (!sub.i_fix.is_finite() || sub.i_fix.min() < -1e-12) {
      throw std::invalid_argument("i_fix must be finite and nonnegative");
    }
    imap_ = InterferenceMap::build(inst);
    comp_.resize(L, arma::vec(core_.layout.total, arma::fill::zeros));
    comp_trace_.assign(L, 0.0);
    for (int c = 0; c < L; ++c) {
      for (const auto& term : imap_.components[c]) {
        core_.layout.add_functional(comp_[c], term.block, term.weight);
        comp_trace_[c] += std::real(arma::trace(term.weight));
      }
    }
    sig_.resize(inst.blocks());
    den0_.resize(inst.blocks());
    for (int k = 0; k < inst.K; ++k)
      for (int l = 0; l < inst.L_C; ++l) {
        int c = inst.block(k, l);
        const auto& h = inst.channel(k, k, l);
        sig_[c] = arma::vec(core_.layout.total, arma::fill::zeros);
        core_.layout.add_functional(sig_[c], c, arma::cx_mat(h.t() * h));
        den0_[c] = inst.noise(k, l) + std::max(sub.i_fix[c], 0.0);
        if (!(den0_[c] > 0.0)) {
          throw std::invalid_argument("noise-plus-interference must be positive");
        }
      }
    if (!sub.penalty.is_empty()) {
      if (sub.penalty.n_elem != static_cast<arma::uword>(L)) {
        throw std::invalid_argument("penalty must have length K*L_C");
      }
      if (sub.penalty.min() < -1e-12) {
        throw std::invalid_argument("penalty must be nonnegative");
      }
      pen_ = arma::vec(core_.layout.total, arma::fill::zeros);
      for (int c = 0; c < L; ++c) {
        double lam = std::max(sub.penalty[c], 0.0);
        if (lam > 0.0) pen_ += lam * comp_[c];
      }
    }
  }

  const DomainCore& core() const { return core_; }
  const std::vector<arma::vec>& components() const { return comp_; }
  const std::vector<double>& component_traces() const { return comp_trace_; }

  int dim() const override { return core_.layout.total; }
  double theta() const override { return core_.theta; }

  double value(const arma::vec& x) const override {
    const auto& inst = *sub_.inst;
    double c = pen_.is_empty() ? 0.0 : arma::dot(pen_, x);
    for (int k = 0; k < inst.K; ++k) {
      double r = 0.0;
      for (int l = 0; l < inst.L_C; ++l) {
        int b = inst.block(k, l);
        double S = std::max(arma::dot(sig_[b], x), 0.0);
        r += std::log1p(S / den0_[b]);
      }
      c -= sub_.util->weight(k) * sub_.util->falpha(r);
    }
    return c;
  }

  void add_derivatives(const arma::vec& x, arma::vec& g,
                       arma::mat& H) const override {
    const auto& inst = *sub_.inst;
    for (int k = 0; k < inst.K; ++k) {
      double r = 0.0;
      std::vector<double> den(inst.L_C);
      for (int l = 0; l < inst.L_C; ++l) {
        int b = inst.block(k, l);
        double S = std::max(arma::dot(sig_[b], x), 0.0);
        den[l] = den0_[b] + S;
        r += std::log1p(S / den0_[b]);
      }
      double w = sub_.util->weight(k);
      double fp = sub_.util->falpha_prime(r);
      double fs = sub_.util->falpha_second(r);
      arma::vec u;
      if (fs != 0.0) u.zeros(core_.layout.total);
      for (int l = 0; l < inst.L_C; ++l) {
        int b = inst.block(k, l);
        if (fp != 0.0) {
          g += (-w * fp / den[l]) * sig_[b];
          H += (w * fp / (den[l] * den[l])) * (sig_[b] * sig_[b].t());
        }
        if (fs != 0.0) u += sig_[b] / den[l];
      }
      if (fs != 0.0) H += (-w * fs) * (u * u.t());
    }
    if (!pen_.is_empty()) g += pen_;
  }

  double domain_value(const arma::vec& x) const override {
    return core_.value(x);
  }

  void add_domain_derivatives(const arma::vec& x, arma::vec& g, arma::mat& H,
                              double mu) const override {
    core_.add_derivs(x, g, H, mu);
  }

 private:
  const ConvexSubproblem& sub_;
  DomainCore core_;
  InterferenceMap imap_;
  std::vector<arma::vec> comp_;     // interference functionals, per component
  std::vector<double> comp_trace_;  // f_c at Q = I
  std::vector<arma::vec> sig_;      // own-signal functionals, per block
  std::vector<double> den0_;        // noise + fixed interference, per block
  arma::vec pen_;
};

// Linear objective c' x over the same domain, used for interference bounds.
class LinearObjective final : public barrier::Objective {
 public:
  LinearObjective(const NetworkInstance& inst, arma::vec c)
      : core_(inst), c_(std::move(c)) {}

  const DomainCore& core() const { return core_; }
  int dim() const override { return core_.layout.total; }
  double theta() const override { return core_.theta; }
  double value(const arma::vec& x) const override { return arma::dot(c_, x); }
  void add_derivatives(const arma::vec&, arma::vec& g,
                       arma::mat&) const override {
    g += c_;
  }
  double domain_value(const arma::vec& x) const override {
    return core_.value(x);
  }
  void add_domain_derivatives(const arma::vec& x, arma::vec& g, arma::mat& H,
                              double mu) const override {
    core_.add_derivs(x, g, H, mu);
  }

 private:
  DomainCore core_;
  arma::vec c_;
};

// Auxiliary-slack objective: minimize s over (q, s) with the PSD barrier on
// the q part only.
class Phase1Objective final : public barrier::Objective {
 public:
  explicit Phase1Objective(const NetworkInstance& inst) : core_(inst) {}

  const DomainCore& core() const { return core_; }
  int dim() const override { return core_.layout.total + 1; }
  double theta() const override { return core_.theta; }
  double value(const arma::vec& x) const override { return x[x.n_elem - 1]; }
  void add_derivatives(const arma::vec&, arma::vec& g,
                       arma::mat&) const override {
    g[g.n_elem - 1] += 1.0;
  }
  double domain_value(const arma::vec& x) const override {
    return core_.value(x.head(core_.layout.total));
  }
  void add_domain_derivatives(const arma::vec& x, arma::vec& g, arma::mat& H,
                              double mu) const override {
    int nq = core_.layout.total;
    arma::vec gq(nq, arma::fill::zeros);
    arma::mat Hq(nq, nq, arma::fill::zeros);
    core_.add_derivs(x.head(nq), gq, Hq, mu);
    g.head(nq) += gq;
    H.submat(0, 0, nq - 1, nq - 1) += Hq;
  }

 private:
  DomainCore core_;
};

struct PreparedRows {
  std::vector<barrier::Ineq> hard;  // budget rows
  std::vector<double> hard_P;
  std::vector<double> hard_trace;   // lhs at Q = I
  std::vector<barrier::Ineq> box;   // eta-relaxed box rows
  std::vector<bool> box_is_upper;
  std::vector<double> box_trace;    // lhs at Q = I
  bool has_lower = false;
  bool infeasible = false;
  double infeasible_cert = 0.0;
};

PreparedRows prepare_rows(const ConvexSubproblem& sub,
                          const SubproblemObjective& obj) {
  const auto& inst = *sub.inst;
  const auto& layout = obj.core().layout;
  PreparedRows rows;

  for (const auto& c : sub.cons->constraints) {
    arma::vec a(layout.total, arma::fill::zeros);
    double tr = 0.0;
    for (int b = 0; b < inst.blocks(); ++b) {
      if (c.A[b].is_empty()) continue;
      layout.add_functional(a, b, c.A[b]);
      tr += std::real(arma::trace(c.A[b]));
    }
    if (arma::norm(a, 2) == 0.0) continue;  // 0 <= P always holds
    if (!(c.P > 0.0)) {
      throw std::invalid_argument(
          "a zero budget on a nonzero constraint leaves no strict interior");
    }
    rows.hard.push_back({a, c.P});
    rows.hard_P.push_back(c.P);
    rows.hard_trace.push_back(tr);
  }

  const int L = inst.interference_dim();
  bool have_lo = !sub.box_lo.is_empty();
  bool have_hi = !sub.box_hi.is_empty();
  if ((have_lo && sub.box_lo.n_elem != static_cast<arma::uword>(L)) ||
      (have_hi && sub.box_hi.n_elem != static_cast<arma::uword>(L))) {
    throw std::invalid_argument("box bounds must have length K*L_C");
  }
  for (int c = 0; c < L && (have_lo || have_hi); ++c) {
    double lo = have_lo ? sub.box_lo[c] : -kInf;
    double hi = have_hi ? sub.box_hi[c] : kInf;
    double scale = 1.0;
    if (std::isfinite(lo)) scale = std::max(scale, std::abs(lo));
    if (std::isfinite(hi)) scale = std::max(scale, std::abs(hi));
    double eta = kTolFeas * scale;
    const arma::vec& a = obj.components()[c];
    bool zero_map = arma::norm(a, 2) == 0.0;
    if (std::isfinite(lo) && lo - eta > 0.0) {
      if (zero_map) {
        rows.infeasible = true;
        rows.infeasible_cert = std::max(rows.infeasible_cert, lo - eta);
        continue;
      }
      rows.box.push_back({-a, -(lo - eta)});
      rows.box_is_upper.push_back(false);
      rows.box_trace.push_back(-obj.component_traces()[c]);
      rows.has_lower = true;
    }
    if (std::isfinite(hi)) {
      if (hi + eta < 0.0) {
        rows.infeasible = true;
        rows.infeasible_cert = std::max(rows.infeasible_cert, -(hi + eta));
        continue;
      }
      if (!zero_map) {
        rows.box.push_back({a, hi + eta});
        rows.box_is_upper.push_back(true);
        rows.box_trace.push_back(obj.component_traces()[c]);
      }
    }
  }
  return rows;
}

// Strictly interior start: Q_kl = delta I with delta from the tightest
// budget, shrunk further so kept upper box rows stay slack.
arma::vec delta_start(const VarLayout& layout, const PreparedRows& rows) {
  double total_dim = 0.0;
  for (int n : layout.dim) total_dim += n;
  double pmin = kInf;
  for (double P : rows.hard_P) pmin = std::min(pmin, P);
  if (!std::isfinite(pmin)) pmin = 1.0;  // only possible without budgets
  double delta = 1e-3 * pmin / std::max(total_dim, 1.0);
  for (size_t d = 0; d < rows.hard.size(); ++d) {
    if (rows.hard_trace[d] > 0.0) {
      delta = std::min(delta, 0.5 * rows.hard_P[d] / rows.hard_trace[d]);
    }
  }
  for (size_t r = 0; r < rows.box.size(); ++r) {
    if (rows.box_is_upper[r] && rows.box_trace[r] > 0.0) {
      delta = std::min(delta, 0.5 * rows.box[r].b / rows.box_trace[r]);
    }
  }
  if (!(delta > 0.0)) {
    throw std::runtime_error("could not construct a strictly interior start");
  }
  arma::vec x(layout.total, arma::fill::zeros);
  for (size_t b = 0; b < layout.dim.size(); ++b)
    for (int i = 0; i < layout.dim[b]; ++i) x[layout.offset[b] + i] = delta;
  return x;
}

Phase1Result run_phase1(const ConvexSubproblem& sub,
                        const SubproblemObjective& obj,
                        const PreparedRows& rows, long max_newton) {
  Phase1Result res;
  if (rows.infeasible) {
    res.certificate = rows.infeasible_cert;
    return res;
  }
  const auto& layout = obj.core().layout;
  arma::vec xq = delta_start(layout, rows);

  if (rows.box.empty()) {
    res.point = layout.unpack(*sub.inst, xq);
    return res;
  }

  double worst = -kInf;
  for (const auto& r : rows.box) {
    worst = std::max(worst, arma::dot(r.a, xq) - r.b);
  }
  const int nq = layout.total;
  Phase1Objective p1(*sub.inst);
  std::vector<barrier::Ineq> ext;
  for (const auto& r : rows.hard) {
    arma::vec a(nq + 1, arma::fill::zeros);
    a.head(nq) = r.a;
    ext.push_back({a, r.b});
  }
  for (const auto& r : rows.box) {
    arma::vec a(nq + 1, arma::fill::zeros);
    a.head(nq) = r.a;
    a[nq] = -1.0;
    ext.push_back({a, r.b});
  }
  arma::vec x0(nq + 1);
  x0.head(nq) = xq;
  x0[nq] = worst + 1.0;

  barrier::Options opt;
  opt.tol = 1e-10;
  opt.max_newton = max_newton;
  opt.mu0 = std::max(1.0, std::abs(x0[nq]));
  opt.stop_early = [nq](const arma::vec& x) { return x[nq] <= -1e-9; };
  barrier::Outcome oc = barrier::minimize(p1, ext, std::move(x0), opt);

  arma::vec q = oc.x.head(nq);
  double min_slack = kInf;
  bool hard_ok = true;
  for (const auto& r : rows.box) {
    min_slack = std::min(min_slack, r.b - arma::dot(r.a, q));
  }
  for (const auto& r : rows.hard) {
    if (!(r.b - arma::dot(r.a, q) > 0.0)) hard_ok = false;
  }
  if (min_slack >= 1e-10 && hard_ok && obj.core().value(q) < kInf) {
    res.point = layout.unpack(*sub.inst, q);
    return res;
  }
  double s_final = oc.x[nq];
  res.certificate = std::max(s_final - oc.kkt_residual, 0.0);
  return res;
}

double relative_feas_violation(const ConvexSubproblem& sub,
                               const SubproblemObjective& obj,
                               const arma::vec& x) {
  const auto& inst = *sub.inst;
  double v = 0.0;
  for (const auto& c : sub.cons->constraints) {
    double lhs = 0.0;
    for (int b = 0; b < inst.blocks(); ++b) {
      if (c.A[b].is_empty()) continue;
      arma::vec a(obj.core().layout.total, arma::fill::zeros);
      obj.core().layout.add_functional(a, b, c.A[b]);
      lhs += arma::dot(a, x);
    }
    v = std::max(v, (lhs - c.P) / std::max(1.0, c.P));
  }
  const int L = inst.interference_dim();
  for (int c = 0; c < L; ++c) {
    double fc = arma::dot(obj.components()[c], x);
    if (!sub.box_lo.is_empty() && std::isfinite(sub.box_lo[c])) {
      double scale = std::max(1.0, std::abs(sub.box_lo[c]));
      v = std::max(v, (sub.box_lo[c] - fc) / scale);
    }
    if (!sub.box_hi.is_empty() && std::isfinite(sub.box_hi[c])) {
      double scale = std::max(1.0, std::abs(sub.box_hi[c]));
      v = std::max(v, (fc - sub.box_hi[c]) / scale);
    }
  }
  return std::max(v, 0.0);
}

}  // namespace

SolveResult solve(const ConvexSubproblem& sub, double tol_kkt,
                  long max_newton) {
  SubproblemObjective obj(sub);
  PreparedRows rows = prepare_rows(sub, obj);

  SolveResult res;
  if (rows.infeasible) {
    res.status = SolveStatus::Infeasible;
    res.objective = kInf;
    res.phase1_certificate = rows.infeasible_cert;
    res.Q = CovariancePoint::zeros(*sub.inst);
    return res;
  }

  arma::vec x0;
  if (rows.has_lower) {
    Phase1Result p1 = run_phase1(sub, obj, rows, max_newton);
    if (!p1.point) {
      res.status = SolveStatus::Infeasible;
      res.objective = kInf;
      res.phase1_certificate = p1.certificate;
      res.Q = CovariancePoint::zeros(*sub.inst);
      return res;
    }
    x0 = obj.core().layout.pack(*p1.point);
  } else {
    x0 = delta_start(obj.core().layout, rows);
  }

  std::vector<barrier::Ineq> ineqs = rows.hard;
  ineqs.insert(ineqs.end(), rows.box.begin(), rows.box.end());
  barrier::Options opt;
  opt.tol = tol_kkt;
  opt.max_newton = max_newton;
  barrier::Outcome oc = barrier::minimize(obj, ineqs, std::move(x0), opt);

  res.Q = obj.core().layout.unpack(*sub.inst, oc.x);
  res.objective = oc.objective;
  res.status = oc.status;
  res.kkt_residual = oc.kkt_residual;
  res.newton_iters = oc.newton_iters;
  res.feas_violation = relative_feas_violation(sub, obj, oc.x);
  return res;
}

double subproblem_objective(const ConvexSubproblem& sub,
                            const CovariancePoint& Q) {
  SubproblemObjective obj(sub);
  return obj.value(obj.core().layout.pack(Q));
}

arma::vec subproblem_gradient(const ConvexSubproblem& sub,
                              const CovariancePoint& Q) {
  SubproblemObjective obj(sub);
  arma::vec x = obj.core().layout.pack(Q);
  arma::vec g(obj.dim(), arma::fill::zeros);
  arma::mat H(obj.dim(), obj.dim(), arma::fill::zeros);
  obj.add_derivatives(x, g, H);
  return g;
}

Phase1Result phase1(const ConvexSubproblem& sub, long max_newton) {
  SubproblemObjective obj(sub);
  PreparedRows rows = prepare_rows(sub, obj);
  return run_phase1(sub, obj, rows, max_newton);
}

double maximize_linear(const NetworkInstance& inst, const ConstraintSet& cons,
                       const std::vector<InterferenceMap::Term>& component) {
  VarLayout layout = VarLayout::build(inst);
  arma::vec a(layout.total, arma::fill::zeros);
  for (const auto& term : component) {
    layout.add_functional(a, term.block, term.weight);
  }
  if (arma::norm(a, 2) == 0.0) return 0.0;

  LinearObjective obj(inst, -a);
  ConvexSubproblem probe;  // reuse the budget-row builder
  probe.inst = &inst;
  probe.cons = &cons;
  UtilitySpec util;
  probe.util = &util;
  probe.i_fix = arma::vec(inst.interference_dim(), arma::fill::zeros);
  SubproblemObjective helper(probe);
  PreparedRows rows = prepare_rows(probe, helper);

  arma::vec x0 = delta_start(layout, rows);
  barrier::Options opt;
  opt.tol = kTolKkt;
  barrier::Outcome oc = barrier::minimize(obj, rows.hard, std::move(x0), opt);
  double best = -oc.objective;
  if (oc.status != SolveStatus::Optimal &&
      oc.kkt_residual > 1e-6 * std::max(1.0, std::abs(best))) {
    throw std::runtime_error("interference bound solve did not converge");
  }
  return std::max(best, 0.0);
}

InterferenceMap interference_box(const NetworkInstance& inst,
                                 const ConstraintSet& cons) {
  inst.validate();
  cons.validate(inst);
  InterferenceMap map = InterferenceMap::build(inst);
  map.i_max = arma::vec(map.dim(), arma::fill::zeros);
  for (int c = 0; c < map.dim(); ++c) {
    if (map.components[c].empty()) continue;
    double m = maximize_linear(inst, cons, map.components[c]);
    map.i_max[c] = m * (1.0 + kBoxInflation);
  }
  return map;
}

}  // namespace misobb
