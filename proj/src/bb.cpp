// SPDX-License-Identifier: Apache-2.0

#include "misobb/bb.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace misobb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  arma::vec lo, hi;
  double lower = -kInf;
  double edge = 0.0;  // longest normalized edge, cached for selection
  long seq = 0;
};

struct NodeOrder {
  // priority_queue keeps the largest element on top, so invert.
  bool operator()(const Node& a, const Node& b) const {
    return select_before({b.lower, b.edge, b.seq}, {a.lower, a.edge, a.seq});
  }
};

double longest_edge(const arma::vec& lo, const arma::vec& hi,
                    const arma::vec& root_width) {
  int j = longest_edge_index(lo, hi, root_width);
  double w = root_width[j];
  return w > 0.0 ? (hi[j] - lo[j]) / w : 0.0;
}

}  // namespace

int longest_edge_index(const arma::vec& lo, const arma::vec& hi,
                       const arma::vec& root_width) {
  int best = 0;
  double best_len = -1.0;
  for (arma::uword c = 0; c < lo.n_elem; ++c) {
    double w = root_width[c];
    double len = w > 0.0 ? (hi[c] - lo[c]) / w : 0.0;
    if (len > best_len) {
      best_len = len;
      best = static_cast<int>(c);
    }
  }
  return best;
}

bool select_before(const NodeKey& a, const NodeKey& b) {
  if (a.lower != b.lower) return a.lower < b.lower;
  if (a.edge != b.edge) return a.edge > b.edge;
  return a.seq < b.seq;
}

BBResult run_bb(const NetworkInstance& inst, const UtilitySpec& util,
                const ConstraintSet& cons, const BBOptions& opts) {
  inst.validate();
  cons.validate(inst);
  util.validate(inst);

  InterferenceMap map = interference_box(inst, cons);
  const int L = map.dim();
  const arma::vec root_lo(L, arma::fill::zeros);
  const arma::vec& root_hi = map.i_max;

  BBResult res;
  res.upper = kInf;
  res.lower = -kInf;

  long next_id = 0;

  // Bounds one rectangle: solves the relaxation at the lower corner, updates
  // the incumbent from the minimizer, and returns the certified bound.
  auto bound = [&](const arma::vec& lo, const arma::vec& hi, long parent,
                   double parent_lower) -> Node {
    ConvexSubproblem sub;
    sub.inst = &inst;
    sub.util = &util;
    sub.cons = &cons;
    sub.i_fix = lo;
    sub.box_lo = lo;
    sub.box_hi = hi;
    for (int c = 0; c < L; ++c) {
      // The root box already contains every achievable value, so an upper
      // edge that still spans it is redundant.
      if (hi[c] >= root_hi[c] * (1.0 - 1e-12)) sub.box_hi[c] = kInf;
    }
    SolveResult sr = solve(sub, opts.tol_kkt, opts.max_newton);

    Node node;
    node.lo = lo;
    node.hi = hi;
    node.seq = next_id++;
    node.edge = longest_edge(lo, hi, root_hi);

    double node_upper = kInf;
    if (sr.status != SolveStatus::Infeasible) {
      arma::vec fi = interference_map(inst, sr.Q);
      node_upper = cost(inst, util, sr.Q, fi);
      if (node_upper < res.upper) {
        res.upper = node_upper;
        res.best_Q = sr.Q;
        res.best_i = fi;
      }
    }
    switch (sr.status) {
      case SolveStatus::Optimal:
        node.lower = sr.objective - sr.kkt_residual;
        break;
      case SolveStatus::Infeasible:
        node.lower = kInf;
        break;
      case SolveStatus::MaxIter:
        node.lower = parent_lower;  // inherited; still valid for the subset
        break;
    }
    ++res.nodes;

    if (opts.keep_records || opts.on_node) {
      BBNodeRecord rec;
      rec.id = node.seq;
      rec.parent = parent;
      rec.lo = lo;
      rec.hi = hi;
      rec.lower = node.lower;
      rec.node_upper = node_upper;
      rec.kkt_residual = sr.kkt_residual;
      rec.status = sr.status;
      if (opts.on_node) opts.on_node(rec);
      if (opts.keep_records) res.records.push_back(std::move(rec));
    }
    return node;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> live;
  {
    Node root = bound(root_lo, root_hi, -1, -kInf);
    if (std::isfinite(root.lower) || root.lower == -kInf) live.push(root);
  }

  while (!live.empty()) {
    const Node& top = live.top();
    if (top.lower >= res.upper - opts.tol) {
      res.converged = true;
      break;
    }
    if (res.nodes + 2 > opts.max_nodes) {
      res.budget_exhausted = true;
      break;
    }
    Node node = top;
    live.pop();

    int j = longest_edge_index(node.lo, node.hi, root_hi);
    if (!(node.edge > 0.0)) {
      // Zero-volume rectangle: its relaxation was tight, nothing to split.
      // The incumbent already reflects its minimizer, so it can retire.
      continue;
    }
    double mid = 0.5 * (node.lo[j] + node.hi[j]);

    arma::vec hi1 = node.hi;
    hi1[j] = mid;
    Node left = bound(node.lo, hi1, node.seq, node.lower);
    if (left.lower < res.upper - opts.tol) live.push(left);

    arma::vec lo2 = node.lo;
    lo2[j] = mid;
    Node right = bound(lo2, node.hi, node.seq, node.lower);
    if (right.lower < res.upper - opts.tol) live.push(right);
  }

  double live_min = live.empty() ? kInf : live.top().lower;
  res.lower = std::min(live_min, res.upper - opts.tol);
  if (live.empty()) res.converged = true;
  if (res.upper == kInf && res.lower == kInf) {
    // No feasible point anywhere; both bounds agree on an empty problem.
    res.converged = true;
  }
  return res;
}

}  // namespace misobb
