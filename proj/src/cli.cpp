// SPDX-License-Identifier: Apache-2.0

#include "misobb/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "misobb/bb.hpp"
#include "misobb/io.hpp"
#include "misobb/model.hpp"
#include "misobb/oracle.hpp"
#include "misobb/pricing.hpp"

namespace misobb {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_g10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit(const std::string& out_path, const ordered_json& j) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

ordered_json dump_vec(const arma::vec& v) {
  ordered_json a = ordered_json::array();
  for (arma::uword i = 0; i < v.n_elem; ++i) a.push_back(v[i]);
  return a;
}

ordered_json dump_covariance(const NetworkInstance& inst,
                             const CovariancePoint& Q) {
  ordered_json blocks = ordered_json::array();
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      const auto& M = Q.Q[inst.block(k, l)];
      ordered_json re = ordered_json::array();
      ordered_json im = ordered_json::array();
      for (arma::uword r = 0; r < M.n_rows; ++r)
        for (arma::uword c = 0; c < M.n_cols; ++c) {
          re.push_back(std::real(M(r, c)));
          im.push_back(std::imag(M(r, c)));
        }
      ordered_json e;
      e["k"] = k;
      e["l"] = l;
      e["re"] = std::move(re);
      e["im"] = std::move(im);
      blocks.push_back(std::move(e));
    }
  return blocks;
}

arma::vec noise_as_interference(const NetworkInstance& inst) {
  arma::vec v(inst.interference_dim());
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) v[inst.block(k, l)] = inst.noise(k, l);
  return v;
}

ConstraintSet scale_budgets(const ConstraintSet& cons, double factor) {
  ConstraintSet scaled = cons;
  for (auto& c : scaled.constraints) c.P *= factor;
  return scaled;
}

struct SolveArgs {
  std::string instance_path;
  std::string method = "bb";
  std::string out_path;
  std::string trace_path;
  double tol = 1e-3;
  long max_nodes = 50000;
  double lambda0 = 1.0;
  std::optional<double> i0;
  double damping = 1.0;
  int max_inner = 200;
  int max_outer = 100;
};

int cmd_solve(const SolveArgs& a) {
  InstanceBundle b = load_instance(a.instance_path);

  if (a.method == "bb") {
    std::ofstream trace;
    BBOptions opts;
    opts.tol = a.tol;
    opts.max_nodes = a.max_nodes;
    opts.keep_records = false;
    if (!a.trace_path.empty()) {
      trace.open(a.trace_path, std::ios::binary);
      if (!trace) {
        throw std::runtime_error("cannot open for writing: " + a.trace_path);
      }
      opts.on_node = [&trace](const BBNodeRecord& r) {
        ordered_json j;
        j["id"] = r.id;
        j["parent"] = r.parent;
        j["lo"] = dump_vec(r.lo);
        j["hi"] = dump_vec(r.hi);
        j["lower"] = r.lower;
        j["node_upper"] = r.node_upper;
        j["kkt"] = r.kkt_residual;
        j["status"] = to_string(r.status);
        trace << j.dump() << "\n";
      };
    }
    BBResult res = run_bb(b.inst, b.util, b.cons, opts);
    ordered_json j;
    j["method"] = "bb";
    j["converged"] = res.converged;
    j["budget_exhausted"] = res.budget_exhausted;
    j["nodes"] = res.nodes;
    j["upper_cost_nats"] = res.upper;
    j["lower_cost_nats"] = res.lower;
    j["gap_nats"] = res.gap();
    j["utility_nats"] = -res.upper;
    j["utility_bits"] = -res.upper / kLn2;
    j["utility_bound_bits"] = -res.lower / kLn2;
    j["interference"] = dump_vec(res.best_i);
    j["Q"] = dump_covariance(b.inst, res.best_Q);
    emit(a.out_path, j);
    return res.budget_exhausted ? 3 : 0;
  }

  if (a.method == "pricing") {
    PricingOptions opts;
    opts.lambda0 = arma::vec(b.inst.interference_dim());
    opts.lambda0.fill(a.lambda0);
    if (a.i0) {
      opts.i0 = arma::vec(b.inst.interference_dim());
      opts.i0.fill(*a.i0);
    } else {
      opts.i0 = noise_as_interference(b.inst);
    }
    opts.damping = a.damping;
    opts.max_inner = a.max_inner;
    opts.max_outer = a.max_outer;
    PricingResult res = run_pricing(b.inst, b.util, b.cons, opts);
    double kkt = pricing_kkt_residual(b.inst, b.util, b.cons, res.Q, res.i_hat,
                                      res.lambda);
    if (!a.trace_path.empty()) {
      std::ofstream trace(a.trace_path, std::ios::binary);
      if (!trace) {
        throw std::runtime_error("cannot open for writing: " + a.trace_path);
      }
      for (const auto& row : res.trace) {
        ordered_json j;
        j["outer"] = row.outer;
        j["inner"] = row.inner;
        j["gap_i"] = row.gap_i;
        if (row.gap_lambda >= 0.0) j["gap_lambda"] = row.gap_lambda;
        j["subproblem_cost"] = row.subproblem_cost;
        j["true_cost"] = row.true_cost;
        trace << j.dump() << "\n";
      }
    }
    ordered_json j;
    j["method"] = "pricing";
    j["converged"] = res.converged;
    j["outer_iters"] = res.outer_iters;
    j["inner_iters"] = res.inner_iters;
    j["cost_nats"] = res.cost;
    j["utility_nats"] = -res.cost;
    j["utility_bits"] = -res.cost / kLn2;
    j["kkt_residual"] = kkt;
    j["lambda"] = dump_vec(res.lambda);
    j["interference"] = dump_vec(res.i_hat);
    j["Q"] = dump_covariance(b.inst, res.Q);
    emit(a.out_path, j);
    return res.converged ? 0 : 4;
  }

  throw CLI::ValidationError("--method must be bb or pricing");
}

struct OracleArgs {
  std::string instance_path;
  std::string method = "grid";
  std::string out_path;
  int resolution = 12;
  int power_resolution = 12;
  int refine_rounds = 3;
};

int cmd_oracle(const OracleArgs& a) {
  InstanceBundle b = load_instance(a.instance_path);
  ordered_json j;
  j["method"] = a.method;
  if (a.method == "grid") {
    GridOptions opts;
    opts.resolution = a.resolution;
    opts.power_resolution = a.power_resolution;
    opts.refine_rounds = a.refine_rounds;
    GridResult res = grid_search(b.inst, b.util, b.cons, opts);
    j["utility_nats"] = res.utility;
    j["utility_bits"] = res.utility / kLn2;
    j["res_bound_nats"] = res.res_bound;
    j["evaluations"] = res.evaluations;
  } else if (a.method == "waterfilling") {
    WaterfillingResult res = waterfilling_decoupled(b.inst, b.util, b.cons);
    j["utility_nats"] = res.utility;
    j["utility_bits"] = res.utility / kLn2;
  } else if (a.method == "dpc") {
    double cap = dpc_sum_capacity_nats(b.inst, b.cons);
    j["utility_nats"] = cap;
    j["utility_bits"] = cap / kLn2;
  } else {
    throw CLI::ValidationError("--method must be grid, waterfilling, or dpc");
  }
  emit(a.out_path, j);
  return 0;
}

struct SweepArgs {
  std::string instance_path;
  std::string out_path;
  std::vector<double> db = {5, 10, 15, 20, 25, 30, 35};
  double tol = 1e-3;
  long max_nodes = 400;
  bool deterministic = false;
};

int cmd_sweep(const SweepArgs& a) {
  InstanceBundle b = load_instance(a.instance_path);
  double P_ref = 0.0;
  for (const auto& c : b.cons.constraints) P_ref = std::max(P_ref, c.P);
  if (!(P_ref > 0.0)) {
    throw std::runtime_error("sweep needs a positive power budget to scale");
  }
  // Sequential evaluation is the only mode; the flag records intent.
  (void)a.deterministic;

  bool dpc_ok = true;
  try {
    dpc_sum_capacity_nats(b.inst, scale_budgets(b.cons, 1.0));
  } catch (const std::exception&) {
    dpc_ok = false;
  }

  std::ostringstream csv;
  csv << "P_dB,bb_bits,bb_bound_bits,pricing_a_bits,pricing_b_bits,dpc_bits\n";
  bool any_exhausted = false;
  for (double db : a.db) {
    double factor = std::pow(10.0, db / 10.0) / P_ref;
    ConstraintSet cons = scale_budgets(b.cons, factor);

    double bb_bits = kNaN, bb_bound_bits = kNaN;
    try {
      BBOptions opts;
      opts.tol = a.tol;
      opts.max_nodes = a.max_nodes;
      opts.keep_records = false;
      BBResult res = run_bb(b.inst, b.util, cons, opts);
      bb_bits = -res.upper / kLn2;
      if (b.util.alpha == 0.0) bb_bound_bits = -res.lower / kLn2;
      if (res.budget_exhausted) any_exhausted = true;
    } catch (const std::exception&) {
    }

    auto pricing_bits = [&](double lam0) {
      try {
        PricingOptions opts;
        opts.lambda0 = arma::vec(b.inst.interference_dim());
        opts.lambda0.fill(lam0);
        opts.i0 = noise_as_interference(b.inst);
        PricingResult res = run_pricing(b.inst, b.util, cons, opts);
        return -res.cost / kLn2;
      } catch (const std::exception&) {
        return kNaN;
      }
    };
    double pa = pricing_bits(1e-5);
    double pb = pricing_bits(1.0);

    double dpc_bits = kNaN;
    if (dpc_ok) {
      try {
        dpc_bits = dpc_sum_capacity_nats(b.inst, cons) / kLn2;
      } catch (const std::exception&) {
      }
    }

    csv << format_g10(db) << "," << format_g10(bb_bits) << ","
        << format_g10(bb_bound_bits) << "," << format_g10(pa) << ","
        << format_g10(pb) << "," << format_g10(dpc_bits) << "\n";
  }

  if (a.out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out_path, csv.str());
  }
  return any_exhausted ? 3 : 0;
}

struct CompareArgs {
  std::string instance_path;
  double tol = 1e-3;
  long max_nodes = 50000;
};

int cmd_compare(const CompareArgs& a) {
  InstanceBundle b = load_instance(a.instance_path);
  int code = 0;
  std::printf("%-14s %14s %14s   %s\n", "method", "utility_bits", "bound_bits",
              "notes");

  BBOptions opts;
  opts.tol = a.tol;
  opts.max_nodes = a.max_nodes;
  opts.keep_records = false;
  BBResult bb = run_bb(b.inst, b.util, b.cons, opts);
  std::printf("%-14s %14.6f %14.6f   %s\n", "bb", -bb.upper / kLn2,
              -bb.lower / kLn2,
              bb.budget_exhausted ? "node budget exhausted" : "converged");
  if (bb.budget_exhausted) code = 3;

  PricingOptions popts;
  popts.i0 = noise_as_interference(b.inst);
  PricingResult pr = run_pricing(b.inst, b.util, b.cons, popts);
  std::printf("%-14s %14.6f %14s   %s\n", "pricing", -pr.cost / kLn2, "-",
              pr.converged ? "converged" : "not converged");
  if (!pr.converged && code == 0) code = 4;

  try {
    GridResult g = grid_search(b.inst, b.util, b.cons);
    std::printf("%-14s %14.6f %14s   res_bound %.2e\n", "grid",
                g.utility / kLn2, "-", g.res_bound);
  } catch (const std::invalid_argument&) {
  }
  try {
    WaterfillingResult w = waterfilling_decoupled(b.inst, b.util, b.cons);
    std::printf("%-14s %14.6f %14s   %s\n", "waterfilling", w.utility / kLn2,
                "-", "closed form");
  } catch (const std::invalid_argument&) {
  }
  try {
    double cap = dpc_sum_capacity_nats(b.inst, b.cons);
    std::printf("%-14s %14.6f %14s   %s\n", "dpc", cap / kLn2, "-",
                "nonlinear upper reference");
  } catch (const std::invalid_argument&) {
  }
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Global and fast local transmit covariance optimization for "
               "MISO interference and broadcast networks"};
  app.require_subcommand(1);

  // generate
  GeneratorSpec gen;
  std::string gen_out;
  std::string gen_topology = "ic";
  auto* g = app.add_subcommand("generate", "Draw a random instance file");
  g->add_option("--out", gen_out, "Output path")->required();
  g->add_option("-K,--users", gen.K, "Number of users");
  g->add_option("-N,--antennas", gen.N,
                "Transmit antennas (one value, or one per user)");
  g->add_option("-C,--carriers", gen.L_C, "Number of parallel carriers");
  g->add_option("--topology", gen_topology, "ic or bc");
  g->add_option("--alpha", gen.alpha, "Fairness exponent");
  g->add_option("--weights", gen.weights, "Per-user utility weights");
  g->add_option("-P,--power", gen.P, "Power budget");
  g->add_option("--seed", gen.seed, "Random seed");

  // solve
  SolveArgs sa;
  auto* s = app.add_subcommand("solve", "Run the global or the local solver");
  s->add_option("instance,--instance", sa.instance_path, "Instance file")
      ->required();
  s->add_option("--method,--algo", sa.method, "bb or pricing");
  s->add_option("--out", sa.out_path, "Result JSON path (default stdout)");
  s->add_option("--trace", sa.trace_path, "Per-iteration JSONL trace path");
  s->add_option("--tol,--eps", sa.tol, "Target gap in nats (bb)");
  s->add_option("--max-nodes", sa.max_nodes, "Relaxation budget (bb)");
  double sa_i0 = 0.0;
  auto* i0opt =
      s->add_option("--i0", sa_i0, "Initial interference estimate (pricing)");
  s->add_option("--lambda0", sa.lambda0, "Initial price (pricing)");
  s->add_option("--damping", sa.damping, "Fixed-point damping in (0, 1]");
  s->add_option("--max-inner", sa.max_inner, "Inner sweeps per price update");
  s->add_option("--max-outer", sa.max_outer, "Price updates");

  // oracle
  OracleArgs oa;
  auto* o = app.add_subcommand("oracle", "Run an independent reference solver");
  o->add_option("instance,--instance", oa.instance_path, "Instance file")
      ->required();
  o->add_option("--method,--algo", oa.method, "grid, waterfilling, or dpc");
  o->add_option("--out", oa.out_path, "Result JSON path (default stdout)");
  o->add_option("--resolution", oa.resolution, "Angle samples per dimension");
  o->add_option("--power-resolution", oa.power_resolution, "Power steps");
  o->add_option("--refine-rounds", oa.refine_rounds, "Zoom stages");

  // sweep
  SweepArgs wa;
  auto* w = app.add_subcommand(
      "sweep", "Solver comparison across power levels, CSV output");
  w->add_option("instance,--instance", wa.instance_path, "Instance file")
      ->required();
  w->add_option("--out", wa.out_path, "CSV path (default stdout)");
  w->add_option("--db", wa.db, "Budget levels in dB over unit power");
  w->add_option("--tol,--eps", wa.tol, "Target gap in nats per point");
  w->add_option("--max-nodes", wa.max_nodes, "Relaxation budget per point");
  w->add_flag("--deterministic", wa.deterministic,
              "Force the sequential evaluation order (always on)");

  // compare
  CompareArgs ca;
  auto* c = app.add_subcommand(
      "compare", "Run every applicable solver on one instance");
  c->add_option("instance,--instance", ca.instance_path, "Instance file")
      ->required();
  c->add_option("--tol,--eps", ca.tol, "Target gap in nats");
  c->add_option("--max-nodes", ca.max_nodes, "Relaxation budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (g->parsed()) {
      Topology topo = topology_from_string(gen_topology);
      gen.topology = topo;
      InstanceBundle b = generate_instance(gen);
      save_instance(gen_out, b);
      return 0;
    }
    if (s->parsed()) {
      if (i0opt->count() > 0) sa.i0 = sa_i0;
      return cmd_solve(sa);
    }
    if (o->parsed()) return cmd_oracle(oa);
    if (w->parsed()) return cmd_sweep(wa);
    if (c->parsed()) return cmd_compare(ca);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace misobb
