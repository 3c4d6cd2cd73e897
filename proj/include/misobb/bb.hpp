// SPDX-License-Identifier: Apache-2.0
//
// Global solver: branch and bound over the box of achievable interference
// values. Rectangles are bounded by the convex relaxation that pins the
// interference seen by each receiver at the rectangle's lower corner, and
// probed by the true cost of the relaxation's minimizer.

#pragma once

#include <functional>
#include <vector>

#include "misobb/convexcore.hpp"
#include "misobb/model.hpp"

namespace misobb {

struct BBOptions {
  double tol = 1e-3;        // target gap between incumbent and bound, nats
  long max_nodes = 50000;   // budget on relaxation solves
  double tol_kkt = kTolKkt;
  long max_newton = 20000;
  bool keep_records = true;
  // Called once per bounded node, in bounding order.
  std::function<void(const struct BBNodeRecord&)> on_node;
};

struct BBNodeRecord {
  long id = 0;
  long parent = -1;
  arma::vec lo, hi;
  double lower = 0.0;       // certified bound for the rectangle
  double node_upper = 0.0;  // true cost of the relaxation minimizer, inf if none
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
};

struct BBResult {
  double upper = 0.0;  // incumbent cost
  double lower = 0.0;  // certified bound on the global optimum
  CovariancePoint best_Q;
  arma::vec best_i;    // interference produced by the incumbent
  long nodes = 0;      // relaxations solved
  bool converged = false;
  bool budget_exhausted = false;
  std::vector<BBNodeRecord> records;

  double gap() const { return upper - lower; }
};

// Index of the longest edge after normalizing by the root box width; ties
// resolve to the lowest index. Zero-width roots contribute zero length.
int longest_edge_index(const arma::vec& lo, const arma::vec& hi,
                       const arma::vec& root_width);

// Selection order among live rectangles: smallest bound first, then larger
// longest normalized edge, then first-created.
struct NodeKey {
  double lower = 0.0;
  double edge = 0.0;
  long seq = 0;
};
bool select_before(const NodeKey& a, const NodeKey& b);

BBResult run_bb(const NetworkInstance& inst, const UtilitySpec& util,
                const ConstraintSet& cons, const BBOptions& opts = {});

}  // namespace misobb
