// SPDX-License-Identifier: Apache-2.0
//
// Release gate. Runs ten end-to-end checks that pin the solver stack to
// closed forms, independent oracles, and its own certificates, and prints
// one verdict line per check. Exit code 0 only if every check passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "misobb/bb.hpp"
#include "misobb/cli.hpp"
#include "misobb/convexcore.hpp"
#include "misobb/io.hpp"
#include "misobb/model.hpp"
#include "misobb/oracle.hpp"
#include "misobb/pricing.hpp"

using namespace misobb;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void verdict(bool ok, int index, const char* name, const std::string& stats) {
  std::printf("[%s] %2d. %s: %s\n", ok ? "PASS" : "FAIL", index, name,
              stats.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// Shared between checks 2, 3, and 6.
struct PairRun {
  InstanceBundle bundle;
  double bb_upper = 0.0;
  double bb_lower = 0.0;
  bool bb_converged = false;
};

// Shared between checks 7 and 8.
struct SweepPoint {
  double bb_bits = 0.0;
  double bound_bits = 0.0;
  double bits_a = 0.0;
  double bits_b = 0.0;
  double dpc_bits = 0.0;
  int db = 0;
};

bool check_single_user(int index) {
  const int trials = 20;
  const int antennas[] = {1, 2, 4};
  const double powers[] = {1.0, 5.0, 10.0, 31.622776601683793};
  double worst_err = 0.0, worst_time = 0.0;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    auto b = testutil::small_ic(100 + t, 1, antennas[t % 3], 1,
                                powers[t % 4]);
    auto t0 = std::chrono::steady_clock::now();
    BBResult res = run_bb(b.inst, b.util, b.cons);
    double dt = seconds_since(t0);
    double nh2 = std::pow(arma::norm(b.inst.channel(0, 0, 0), 2), 2);
    double analytic = std::log1p(powers[t % 4] * nh2 / b.inst.noise(0, 0));
    double err = std::abs(-res.upper - analytic);
    worst_err = std::max(worst_err, err);
    worst_time = std::max(worst_time, dt);
    if (!(res.nodes == 1 && res.converged && err <= 1e-6 && dt < 1.0)) {
      ++failures;
    }
  }
  bool ok = failures == 0;
  verdict(ok, index, "single-user exactness",
          fmt("%d/%d root-node solves, worst error %.2e nats, worst time "
              "%.3f s",
              trials - failures, trials, worst_err, worst_time));
  return ok;
}

bool check_oracle_sandwich(std::vector<PairRun>& runs, long& nest_children,
                           long& nest_violations, int index) {
  const int trials = 30;
  int failures = 0;
  double worst_res = 0.0, worst_time = 0.0;
  double worst_lo_margin = arma::datum::inf;  // -grid - L
  double worst_hi_margin = arma::datum::inf;  // U + res_bound - (-grid)
  for (int t = 0; t < trials; ++t) {
    PairRun run;
    run.bundle = testutil::small_ic(2000 + t, 2, 2, 1, 10.0);
    const auto& b = run.bundle;

    auto t0 = std::chrono::steady_clock::now();
    BBOptions opts;
    opts.keep_records = false;
    std::vector<double> lowers;
    bool ids_dense = true;
    opts.on_node = [&](const BBNodeRecord& r) {
      if (r.id != static_cast<long>(lowers.size())) ids_dense = false;
      if (r.parent >= 0) {
        ++nest_children;
        if (r.lower < lowers[static_cast<size_t>(r.parent)] - 2.0 * kTolKkt) {
          ++nest_violations;
        }
      }
      lowers.push_back(r.lower);
    };
    BBResult res = run_bb(b.inst, b.util, b.cons, opts);
    // Fine first sweep so near-tied regions rank reliably before zooming;
    // the step sensitivity then lands well under the 5e-3 budget.
    GridOptions gopt;
    gopt.resolution = 64;
    gopt.power_resolution = 64;
    gopt.refine_rounds = 3;
    gopt.keep_basins = 8;
    GridResult grid = grid_search(b.inst, b.util, b.cons, gopt);
    double dt = seconds_since(t0);

    run.bb_upper = res.upper;
    run.bb_lower = res.lower;
    run.bb_converged = res.converged;
    runs.push_back(std::move(run));

    double lin = -grid.utility;  // grid optimum as a cost
    worst_res = std::max(worst_res, grid.res_bound);
    worst_time = std::max(worst_time, dt);
    worst_lo_margin = std::min(worst_lo_margin, lin - res.lower);
    worst_hi_margin = std::min(worst_hi_margin,
                               res.upper + grid.res_bound - lin);
    bool ok_t = ids_dense && res.lower <= lin &&
                lin <= res.upper + grid.res_bound &&
                grid.res_bound <= 5e-3 && dt < 300.0;
    if (!ok_t) ++failures;
  }
  bool ok = failures == 0;
  verdict(ok, index, "oracle sandwich",
          fmt("%d/%d instances, slack lower %.2e / upper %.2e nats, worst "
              "res bound %.2e, worst time %.1f s",
              trials - failures, trials, worst_lo_margin, worst_hi_margin,
              worst_res, worst_time));
  return ok;
}

bool check_bound_nesting(long children, long violations, int index) {
  bool ok = violations == 0 && children > 0;
  verdict(ok, index, "bound nesting",
          fmt("%ld child rectangles, %ld below parent by more than %.1e",
              children, violations, 2.0 * kTolKkt));
  return ok;
}

bool check_gap_convergence(int index) {
  const int trials = 10;
  int failures = 0;
  double worst_final = 0.0;
  double worst_drop = -arma::datum::inf;  // max of gap(j+3) - gap(j)
  for (int t = 0; t < trials; ++t) {
    auto b = testutil::small_ic(600 + t, 2, 2, 1, 10.0);
    PricingResult pr = run_pricing(b.inst, b.util, b.cons);
    arma::vec istar = interference_map(b.inst, pr.Q);
    InterferenceMap map = interference_box(b.inst, b.cons);

    double delta0 = 0.01 * (1.0 + arma::norm(istar, "inf"));
    std::vector<double> gap;
    bool solved = true;
    for (int j = 0; j <= 8; ++j) {
      double delta = delta0 / std::pow(2.0, j);
      ConvexSubproblem sub;
      sub.inst = &b.inst;
      sub.util = &b.util;
      sub.cons = &b.cons;
      sub.box_lo = arma::clamp(istar - delta, 0.0, arma::datum::inf);
      sub.box_hi = arma::min(istar + delta, map.i_max);
      sub.i_fix = sub.box_lo;
      SolveResult sr = solve(sub);
      if (sr.status != SolveStatus::Optimal) {
        solved = false;
        break;
      }
      double lower = sr.objective - sr.kkt_residual;
      arma::vec fi = interference_map(b.inst, sr.Q);
      double upper = cost(b.inst, b.util, sr.Q, fi);
      gap.push_back(upper - lower);
    }
    if (!solved) {
      ++failures;
      continue;
    }
    bool ok_t = gap.back() < 1e-3;
    worst_final = std::max(worst_final, gap.back());
    for (size_t j = 0; j + 3 < gap.size(); ++j) {
      worst_drop = std::max(worst_drop, gap[j + 3] - gap[j]);
      if (!(gap[j + 3] < gap[j] + 2.0 * kTolKkt)) ok_t = false;
    }
    if (!ok_t) ++failures;
  }
  bool ok = failures == 0;
  verdict(ok, index, "box gap convergence",
          fmt("%d/%d instances, worst final gap %.2e nats, worst eightfold "
              "shrink slack %.2e",
              trials - failures, trials, worst_final, worst_drop));
  return ok;
}

bool check_gradients(int index) {
  std::mt19937_64 g(7000);
  double worst_sub = 0.0;
  const int points = 100;
  for (int t = 0; t < points; ++t) {
    int K = 1 + t % 3;
    int N = 1 + (t / 3) % 3;
    int L = 1 + t % 2;
    double alphas[] = {0.0, 0.5, 1.0, 2.0};
    auto b = testutil::small_ic(7000 + t, K, N, L, 6.0, alphas[t % 4]);
    ConvexSubproblem sub;
    sub.inst = &b.inst;
    sub.util = &b.util;
    sub.cons = &b.cons;
    sub.i_fix = arma::vec(b.inst.interference_dim());
    sub.penalty = arma::vec(b.inst.interference_dim());
    for (arma::uword c = 0; c < sub.i_fix.n_elem; ++c) {
      sub.i_fix[c] = 2.0 * testutil::urand(g);
      sub.penalty[c] = testutil::urand(g);
    }
    VarLayout layout = VarLayout::build(b.inst);
    CovariancePoint Q = testutil::random_point(b.inst, g);
    arma::vec x = layout.pack(Q);
    arma::vec grad = subproblem_gradient(sub, Q);
    for (arma::uword i = 0; i < x.n_elem; ++i) {
      double h = 1e-6 * (1.0 + std::abs(x[i]));
      arma::vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fd = (subproblem_objective(sub, layout.unpack(b.inst, xp)) -
                   subproblem_objective(sub, layout.unpack(b.inst, xm))) /
                  (2.0 * h);
      double rel = std::abs(fd - grad[i]) /
                   std::max({1e-3, std::abs(grad[i]), std::abs(fd)});
      worst_sub = std::max(worst_sub, rel);
    }
  }

  double worst_cost = 0.0;
  for (int t = 0; t < points; ++t) {
    int K = 1 + t % 3;
    auto b = testutil::small_ic(7200 + t, K, 2, 1 + t % 2, 4.0,
                                t % 2 ? 1.0 : 0.0);
    CovariancePoint Q = testutil::random_point(b.inst, g);
    arma::vec i(b.inst.interference_dim());
    for (arma::uword c = 0; c < i.n_elem; ++c) i[c] = 3.0 * testutil::urand(g);
    arma::vec grad = cost_gradient_i(b.inst, b.util, Q, i);
    for (arma::uword c = 0; c < i.n_elem; ++c) {
      double h = 1e-6 * (1.0 + i[c]);
      arma::vec ip = i, im = i;
      ip[c] += h;
      im[c] -= h;
      double fd = (cost(b.inst, b.util, Q, ip) - cost(b.inst, b.util, Q, im)) /
                  (2.0 * h);
      double rel = std::abs(fd - grad[c]) /
                   std::max({1e-3, std::abs(grad[c]), std::abs(fd)});
      worst_cost = std::max(worst_cost, rel);
    }
  }
  bool ok = worst_sub <= 1e-5 && worst_cost <= 1e-5;
  verdict(ok, index, "gradient check",
          fmt("%d points each, worst relative error: solver objective %.2e, "
              "interference direction %.2e",
              points, worst_sub, worst_cost));
  return ok;
}

bool check_pricing_stationarity(const std::vector<PairRun>& runs, int index) {
  int converged = 0, failures = 0;
  double worst_kkt = 0.0;
  double worst_margin = arma::datum::inf;  // cost - L_final
  for (const auto& run : runs) {
    PricingResult pr =
        run_pricing(run.bundle.inst, run.bundle.util, run.bundle.cons);
    if (!pr.converged) continue;
    ++converged;
    double kkt = pricing_kkt_residual(run.bundle.inst, run.bundle.util,
                                      run.bundle.cons, pr.Q, pr.i_hat,
                                      pr.lambda);
    worst_kkt = std::max(worst_kkt, kkt);
    worst_margin = std::min(worst_margin, pr.cost - run.bb_lower);
    if (!(kkt <= 3e-6 && pr.cost >= run.bb_lower)) ++failures;
  }
  bool ok = converged > 0 && failures == 0;
  verdict(ok, index, "pricing stationarity",
          fmt("%d converged runs, %d bad, worst residual %.2e, closest "
              "approach to the global bound %.2e nats",
              converged, failures, worst_kkt, worst_margin));
  return ok;
}

std::vector<SweepPoint> run_broadcast_sweeps() {
  std::vector<SweepPoint> points;
  const int ensemble = 20;
  const int dbs[] = {5, 10, 15, 20, 25, 30, 35};
  for (int e = 0; e < ensemble; ++e) {
    GeneratorSpec spec;
    spec.K = 4;
    spec.N = {4};
    spec.topology = Topology::BC;
    spec.P = 10.0;
    spec.seed = 7300 + e;
    InstanceBundle b = generate_instance(spec);

    double p_ref = 0.0;
    for (const auto& c : b.cons.constraints) p_ref = std::max(p_ref, c.P);

    for (int db : dbs) {
      double factor = std::pow(10.0, db / 10.0) / p_ref;
      ConstraintSet scaled = b.cons;
      for (auto& c : scaled.constraints) c.P *= factor;

      SweepPoint pt;
      pt.db = db;

      BBOptions opts;
      opts.max_nodes = 400;
      opts.keep_records = false;
      BBResult bb = run_bb(b.inst, b.util, scaled, opts);
      pt.bb_bits = -bb.upper / kLn2;
      pt.bound_bits = -bb.lower / kLn2;

      arma::vec ones_i(b.inst.interference_dim(), arma::fill::ones);
      PricingOptions pa;
      pa.i0 = ones_i;
      pa.lambda0 = arma::vec(b.inst.interference_dim());
      pa.lambda0.fill(1e-5);
      PricingOptions pb;
      pb.i0 = ones_i;
      pb.lambda0 = arma::vec(b.inst.interference_dim(), arma::fill::ones);
      pt.bits_a = -run_pricing(b.inst, b.util, scaled, pa).cost / kLn2;
      pt.bits_b = -run_pricing(b.inst, b.util, scaled, pb).cost / kLn2;

      pt.dpc_bits = dpc_sum_capacity_nats(b.inst, scaled) / kLn2;
      points.push_back(pt);
    }
  }
  return points;
}

bool check_init_sensitivity(const std::vector<SweepPoint>& pts, int index) {
  double max_diff = 0.0, max_below = 0.0;
  for (const auto& p : pts) {
    max_diff = std::max(max_diff, std::abs(p.bits_a - p.bits_b));
    max_below = std::max(max_below, p.bound_bits - p.bits_a);
    max_below = std::max(max_below, p.bound_bits - p.bits_b);
  }
  bool ok = max_diff >= 0.1 && max_below >= 0.5;
  verdict(ok, index, "initialization sensitivity",
          fmt("%zu sweep points, largest start-dependent spread %.3f bits, "
              "largest shortfall against the global bound %.3f bits",
              pts.size(), max_diff, max_below));
  return ok;
}

bool check_dpc_dominance(const std::vector<SweepPoint>& pts, int index) {
  int violations = 0;
  double worst = arma::datum::inf;  // min dpc - bb
  double top_gap = 0.0;
  int top_n = 0;
  for (const auto& p : pts) {
    double margin = p.dpc_bits - p.bb_bits;
    worst = std::min(worst, margin);
    if (margin < -1e-3) ++violations;
    if (p.db == 35) {
      top_gap += margin;
      ++top_n;
    }
  }
  double mean_top = top_n ? top_gap / top_n : 0.0;
  bool ok = violations == 0 && mean_top > 0.0;
  verdict(ok, index, "dirty-paper dominance",
          fmt("%zu points, %d below linear, smallest margin %.3e bits, mean "
              "gap at 35 dB %.3f bits",
              pts.size(), violations, worst, mean_top));
  return ok;
}

bool check_decoupled_agreement(int index) {
  const int trials = 10;
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto b = testutil::small_ic(900 + t, 2, 2, 2, 5.0);
    testutil::decouple(b.inst);
    BBResult bb = run_bb(b.inst, b.util, b.cons);
    PricingResult pr = run_pricing(b.inst, b.util, b.cons);
    WaterfillingResult wf = waterfilling_decoupled(b.inst, b.util, b.cons);
    double c1 = bb.upper, c2 = pr.cost, c3 = -wf.utility;
    double spread = std::max({c1, c2, c3}) - std::min({c1, c2, c3});
    worst = std::max(worst, spread);
    if (!(spread <= 1e-4 && bb.converged && pr.converged)) ++failures;
  }
  bool ok = failures == 0;
  verdict(ok, index, "decoupled closed form",
          fmt("%d/%d instances, worst three-way spread %.2e nats",
              trials - failures, trials, worst));
  return ok;
}

std::string slurp(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return {};
  std::string text;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
  std::fclose(f);
  return text;
}

bool check_deterministic_sweep(int index) {
  const char* inst = "acceptance_sweep_instance.json";
  const char* out_a = "acceptance_sweep_a.csv";
  const char* out_b = "acceptance_sweep_b.csv";
  const char* gen[] = {"misobb", "generate", "--out", inst, "-K", "2",
                       "-N", "2", "--seed", "77", "-P", "10"};
  int rc_gen = run_cli(12, gen);
  const char* sweep_a[] = {"misobb", "sweep", inst, "--db", "0", "--db", "10",
                           "--db", "20", "--deterministic", "--out", out_a};
  const char* sweep_b[] = {"misobb", "sweep", inst, "--db", "0", "--db", "10",
                           "--db", "20", "--deterministic", "--out", out_b};
  int rc_a = run_cli(12, sweep_a);
  int rc_b = run_cli(12, sweep_b);
  std::string a = slurp(out_a);
  std::string b = slurp(out_b);
  std::remove(inst);
  std::remove(out_a);
  std::remove(out_b);
  bool ok = rc_gen == 0 && rc_a == rc_b && !a.empty() && a == b &&
            (rc_a == 0 || rc_a == 3);
  verdict(ok, index, "deterministic sweep output",
          fmt("2 runs x 3 power levels, %zu bytes, byte-identical: %s",
              a.size(), a == b && !a.empty() ? "yes" : "no"));
  return ok;
}

}  // namespace

int main() {
  std::vector<PairRun> runs;
  long nest_children = 0, nest_violations = 0;

  bool ok = true;
  ok &= check_single_user(1);
  ok &= check_oracle_sandwich(runs, nest_children, nest_violations, 2);
  ok &= check_bound_nesting(nest_children, nest_violations, 3);
  ok &= check_gap_convergence(4);
  ok &= check_gradients(5);
  ok &= check_pricing_stationarity(runs, 6);
  std::vector<SweepPoint> pts = run_broadcast_sweeps();
  ok &= check_init_sensitivity(pts, 7);
  ok &= check_dpc_dominance(pts, 8);
  ok &= check_decoupled_agreement(9);
  ok &= check_deterministic_sweep(10);

  std::printf("%s\n", ok ? "acceptance: all checks passed"
                         : "acceptance: FAILURES present");
  return ok ? 0 : 1;
}
