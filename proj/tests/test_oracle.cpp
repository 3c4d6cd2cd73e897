// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "misobb/oracle.hpp"
#include "misobb/pricing.hpp"

using namespace misobb;

namespace {

// Single transmitter, one antenna, two carriers with the given amplitude
// gains, one unit budget. Small enough to waterfill by hand.
InstanceBundle two_carrier_link(double g0, double g1, double P) {
  InstanceBundle b;
  b.inst = NetworkInstance::blank(1, {1}, 2, Topology::IC);
  b.inst.channel(0, 0, 0) = arma::cx_rowvec{arma::cx_double(g0, 0.0)};
  b.inst.channel(0, 0, 1) = arma::cx_rowvec{arma::cx_double(g1, 0.0)};
  b.inst.noise.set_size(1, 2);
  b.inst.noise.fill(1.0);
  LinearConstraint c;
  c.A.resize(2);
  c.A[0] = arma::eye<arma::cx_mat>(1, 1);
  c.A[1] = arma::eye<arma::cx_mat>(1, 1);
  c.P = P;
  b.cons.constraints.push_back(std::move(c));
  return b;
}

}  // namespace

TEST_CASE("grid search recovers the single-user closed form") {
  auto b = testutil::small_ic(401, 1, 2, 1, 3.0);
  GridResult res = grid_search(b.inst, b.util, b.cons);
  double nh2 = std::pow(arma::norm(b.inst.channel(0, 0, 0), 2), 2);
  double analytic = std::log1p(3.0 * nh2 / b.inst.noise(0, 0));
  CHECK(res.utility <= analytic + 1e-9);  // grid points are feasible
  CHECK(analytic - res.utility <= 5e-3);
  CHECK(res.res_bound > 0.0);
  CHECK(res.evaluations > 0);

  // The reported point reproduces the reported utility.
  arma::vec r = rates(b.inst, res.Q);
  CHECK(r[0] == doctest::Approx(res.utility).epsilon(1e-12));
}

TEST_CASE("doubling the resolution never loses ground") {
  auto b = testutil::small_ic(402, 2, 2, 1, 4.0);
  GridOptions coarse;
  coarse.resolution = 8;
  coarse.power_resolution = 8;
  coarse.refine_rounds = 0;
  GridOptions fine = coarse;
  fine.resolution = 16;
  fine.power_resolution = 16;
  GridResult a = grid_search(b.inst, b.util, b.cons, coarse);
  GridResult c = grid_search(b.inst, b.util, b.cons, fine);
  CHECK(c.utility >= a.utility - 1e-12);
  CHECK(c.evaluations > a.evaluations);
}

TEST_CASE("zoom stages improve on the plain sweep") {
  auto b = testutil::small_ic(403, 2, 2, 1, 4.0);
  GridOptions flat;
  flat.resolution = 8;
  flat.power_resolution = 8;
  flat.refine_rounds = 0;
  GridOptions zoom = flat;
  zoom.refine_rounds = 3;
  GridResult a = grid_search(b.inst, b.util, b.cons, flat);
  GridResult c = grid_search(b.inst, b.util, b.cons, zoom);
  CHECK(c.utility >= a.utility - 1e-12);
  CHECK(c.res_bound < a.res_bound);
}

TEST_CASE("grid search is deterministic") {
  auto b = testutil::small_ic(404, 2, 2, 1, 2.0);
  GridOptions opts;
  opts.resolution = 8;
  opts.power_resolution = 8;
  opts.refine_rounds = 1;
  GridResult a = grid_search(b.inst, b.util, b.cons, opts);
  GridResult c = grid_search(b.inst, b.util, b.cons, opts);
  CHECK(a.utility == c.utility);
  CHECK(a.res_bound == c.res_bound);
  CHECK(a.evaluations == c.evaluations);
}

TEST_CASE("grid search rejects shapes it cannot sweep") {
  auto crowd = testutil::small_ic(405, 3, 1);
  CHECK_THROWS_AS(grid_search(crowd.inst, crowd.util, crowd.cons),
                  std::invalid_argument);
  auto carriers = testutil::small_ic(406, 2, 2, 2);
  CHECK_THROWS_AS(grid_search(carriers.inst, carriers.util, carriers.cons),
                  std::invalid_argument);
  auto wide = testutil::small_ic(407, 2, 3);
  CHECK_THROWS_AS(grid_search(wide.inst, wide.util, wide.cons),
                  std::invalid_argument);
  auto ok = testutil::small_ic(408, 2, 2);
  GridOptions low;
  low.resolution = 4;
  CHECK_THROWS_AS(grid_search(ok.inst, ok.util, ok.cons, low),
                  std::invalid_argument);
  GridOptions huge;
  huge.resolution = 1024;
  huge.power_resolution = 1024;
  CHECK_THROWS_AS(grid_search(ok.inst, ok.util, ok.cons, huge),
                  std::invalid_argument);
}

TEST_CASE("waterfilling solves the two-carrier textbook case") {
  auto b = two_carrier_link(1.0, 2.0, 1.0);  // power gains 1 and 4
  WaterfillingResult wf = waterfilling_decoupled(b.inst, b.util, b.cons);
  REQUIRE(wf.powers.size() == 1);
  REQUIRE(wf.powers[0].n_elem == 2);
  CHECK(wf.powers[0][0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(wf.powers[0][1] == doctest::Approx(0.875).epsilon(1e-12));
  double expect = std::log1p(0.125) + std::log1p(0.875 * 4.0);
  CHECK(wf.utility == doctest::Approx(expect).epsilon(1e-12));

  // A weak carrier below the water level gets nothing.
  auto weak = two_carrier_link(1.0, 10.0, 0.5);
  WaterfillingResult wf2 = waterfilling_decoupled(weak.inst, weak.util,
                                                  weak.cons);
  CHECK(wf2.powers[0][0] == 0.0);
  CHECK(wf2.powers[0][1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("waterfilling beams along each channel") {
  auto b = testutil::small_ic(409, 2, 3, 2, 4.0);
  testutil::decouple(b.inst);
  WaterfillingResult wf = waterfilling_decoupled(b.inst, b.util, b.cons);
  arma::vec r = rates(b.inst, wf.Q);
  double total = 0.0;
  for (int k = 0; k < b.inst.K; ++k) total += b.util.weight(k) * r[k];
  CHECK(total == doctest::Approx(wf.utility).epsilon(1e-12));
  for (int k = 0; k < b.inst.K; ++k) {
    double spent = 0.0;
    for (int l = 0; l < b.inst.L_C; ++l) {
      spent += std::real(arma::trace(wf.Q.Q[b.inst.block(k, l)]));
    }
    CHECK(spent == doctest::Approx(4.0).epsilon(1e-9));
  }
}

TEST_CASE("waterfilling rejects coupled or unsupported inputs") {
  auto coupled = testutil::small_ic(410, 2, 2);
  CHECK_THROWS_AS(
      waterfilling_decoupled(coupled.inst, coupled.util, coupled.cons),
      std::invalid_argument);
  auto fair = testutil::small_ic(411, 2, 2, 1, 10.0, 1.0);
  testutil::decouple(fair.inst);
  CHECK_THROWS_AS(waterfilling_decoupled(fair.inst, fair.util, fair.cons),
                  std::invalid_argument);
  auto bc = testutil::small_bc(412);  // one budget spans both users
  testutil::decouple(bc.inst);
  CHECK_THROWS_AS(waterfilling_decoupled(bc.inst, bc.util, bc.cons),
                  std::invalid_argument);
}

TEST_CASE("dirty-paper bound matches the single-user capacity") {
  auto b = testutil::small_bc(413, 1, 3, 5.0);
  double cap = dpc_sum_capacity_nats(b.inst, b.cons);
  double nh2 = std::pow(arma::norm(b.inst.channel(0, 0, 0), 2), 2);
  CHECK(cap == doctest::Approx(std::log1p(5.0 * nh2)).epsilon(1e-7));
}

TEST_CASE("dirty-paper bound matches a scan of the dual powers") {
  auto b = testutil::small_bc(414, 2, 2, 5.0);
  double cap = dpc_sum_capacity_nats(b.inst, b.cons);

  const auto& h0 = b.inst.channel(0, 0, 0);
  const auto& h1 = b.inst.channel(0, 1, 0);
  auto dual = [&](double q0) {
    arma::cx_mat X = arma::eye<arma::cx_mat>(2, 2);
    X += q0 * (h0.t() * h0) + (5.0 - q0) * (h1.t() * h1);
    return std::log(std::real(arma::det(X)));
  };
  // The dual objective is concave along the budget line; ternary search.
  double lo = 0.0, hi = 5.0;
  for (int it = 0; it < 300; ++it) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (dual(m1) < dual(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  double scan = dual(0.5 * (lo + hi));
  CHECK(cap == doctest::Approx(scan).epsilon(1e-7));
}

TEST_CASE("dirty-paper bound dominates linear precoding") {
  auto b = testutil::small_bc(415, 2, 2, 8.0);
  double cap = dpc_sum_capacity_nats(b.inst, b.cons);
  // Any feasible linear point is achievable without dirty-paper coding too,
  // so its weighted sum rate can never exceed the bound.
  PricingResult lin = run_pricing(b.inst, b.util, b.cons);
  CHECK(cap >= -lin.cost - 1e-9);
}

TEST_CASE("dirty-paper bound rejects unsupported shapes") {
  auto ic = testutil::small_ic(416, 2, 2);
  CHECK_THROWS_AS(dpc_sum_capacity_nats(ic.inst, ic.cons),
                  std::invalid_argument);
}
