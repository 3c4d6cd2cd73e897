// SPDX-License-Identifier: Apache-2.0

#include "misobb/io.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace misobb {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

// Normal pairs via Box-Muller on top of mt19937_64. The standard normal
// distribution's algorithm is implementation-defined, which would break the
// fixed draw order this generator promises.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}

  arma::cx_double complex_normal() {
    double u1 = u01();
    double u2 = u01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    // Unit total variance, split evenly across the two parts.
    return {r * std::cos(a) * std::sqrt(0.5), r * std::sin(a) * std::sqrt(0.5)};
  }

 private:
  double u01() {  // strictly positive, so the log above stays finite
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }
  std::mt19937_64 eng_;
};

const ordered_json& need(const ordered_json& j, const char* key,
                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::runtime_error("instance json: missing '" + std::string(key) +
                             "' in " + where);
  }
  return *it;
}

arma::cx_rowvec parse_cx_row(const ordered_json& re, const ordered_json& im,
                             const std::string& where) {
  if (!re.is_array() || !im.is_array() || re.size() != im.size()) {
    throw std::runtime_error("instance json: 're'/'im' must be equal-length arrays in " + where);
  }
  arma::cx_rowvec v(re.size());
  for (size_t i = 0; i < re.size(); ++i) {
    v[i] = arma::cx_double(re[i].get<double>(), im[i].get<double>());
  }
  return v;
}

arma::cx_mat parse_cx_mat(const ordered_json& re, const ordered_json& im,
                          int n, const std::string& where) {
  arma::cx_rowvec flat = parse_cx_row(re, im, where);
  if (flat.n_elem != static_cast<arma::uword>(n) * n) {
    throw std::runtime_error("instance json: matrix size mismatch in " + where);
  }
  arma::cx_mat M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = flat[r * n + c];  // row-major
  return M;
}

ordered_json dump_cx_row(const arma::cx_rowvec& v) {
  ordered_json re = ordered_json::array();
  ordered_json im = ordered_json::array();
  for (arma::uword i = 0; i < v.n_elem; ++i) {
    re.push_back(std::real(v[i]));
    im.push_back(std::imag(v[i]));
  }
  ordered_json out;
  out["re"] = std::move(re);
  out["im"] = std::move(im);
  return out;
}

ordered_json dump_cx_mat(const arma::cx_mat& M) {
  ordered_json re = ordered_json::array();
  ordered_json im = ordered_json::array();
  for (arma::uword r = 0; r < M.n_rows; ++r)
    for (arma::uword c = 0; c < M.n_cols; ++c) {
      re.push_back(std::real(M(r, c)));
      im.push_back(std::imag(M(r, c)));
    }
  ordered_json out;
  out["re"] = std::move(re);
  out["im"] = std::move(im);
  return out;
}

}  // namespace

InstanceBundle generate_instance(const GeneratorSpec& spec) {
  if (spec.K < 1 || spec.L_C < 1) {
    throw std::invalid_argument("generator: K and L_C must be positive");
  }
  std::vector<int> N = spec.N;
  if (N.size() == 1) N.assign(spec.K, N[0]);
  if (N.size() != static_cast<size_t>(spec.K)) {
    throw std::invalid_argument("generator: N must have one entry or K entries");
  }
  if (spec.topology == Topology::BC) {
    for (int n : N) {
      if (n != N[0]) {
        throw std::invalid_argument("generator: broadcast users share one transmitter");
      }
    }
  }
  if (!(spec.P >= 0.0)) throw std::invalid_argument("generator: P must be nonnegative");

  InstanceBundle b;
  b.seed = spec.seed;
  auto& inst = b.inst;
  inst = NetworkInstance::blank(spec.K, N, spec.L_C, spec.topology);

  GaussianSource rng(spec.seed);
  if (spec.topology == Topology::BC) {
    // One physical transmitter: the row for user k is the same from every
    // transmitter index. Draw per (k, l), then replicate.
    for (int k = 0; k < spec.K; ++k)
      for (int l = 0; l < spec.L_C; ++l) {
        arma::cx_rowvec h(N[k]);
        for (int i = 0; i < N[k]; ++i) h[i] = rng.complex_normal();
        for (int j = 0; j < spec.K; ++j) inst.channel(j, k, l) = h;
      }
  } else {
    for (int j = 0; j < spec.K; ++j)
      for (int k = 0; k < spec.K; ++k)
        for (int l = 0; l < spec.L_C; ++l) {
          arma::cx_rowvec h(N[j]);
          for (int i = 0; i < N[j]; ++i) h[i] = rng.complex_normal();
          inst.channel(j, k, l) = h;
        }
  }
  inst.noise.fill(1.0);

  auto& cons = b.cons;
  if (spec.topology == Topology::BC) {
    LinearConstraint c;
    c.A.resize(inst.blocks());
    for (int bix = 0; bix < inst.blocks(); ++bix) {
      c.A[bix] = arma::eye<arma::cx_mat>(N[0], N[0]);
    }
    c.P = spec.P;
    cons.constraints.push_back(std::move(c));
  } else {
    for (int k = 0; k < spec.K; ++k) {
      LinearConstraint c;
      c.A.resize(inst.blocks());
      for (int l = 0; l < spec.L_C; ++l) {
        c.A[inst.block(k, l)] = arma::eye<arma::cx_mat>(N[k], N[k]);
      }
      c.P = spec.P;
      cons.constraints.push_back(std::move(c));
    }
  }

  b.util.alpha = spec.alpha;
  b.util.weights = spec.weights;

  inst.validate();
  cons.validate(inst);
  b.util.validate(inst);
  return b;
}

std::string serialize_instance(const InstanceBundle& bundle) {
  const auto& inst = bundle.inst;
  ordered_json j;
  j["format"] = "misobb-instance-v1";
  j["K"] = inst.K;
  j["N"] = inst.N;
  j["L_C"] = inst.L_C;
  j["topology"] = to_string(inst.topology);

  ordered_json channels = ordered_json::array();
  for (int tx = 0; tx < inst.K; ++tx)
    for (int rx = 0; rx < inst.K; ++rx)
      for (int l = 0; l < inst.L_C; ++l) {
        ordered_json e;
        e["j"] = tx;
        e["k"] = rx;
        e["l"] = l;
        ordered_json row = dump_cx_row(inst.channel(tx, rx, l));
        e["re"] = std::move(row["re"]);
        e["im"] = std::move(row["im"]);
        channels.push_back(std::move(e));
      }
  j["channels"] = std::move(channels);

  ordered_json noise = ordered_json::array();
  for (int k = 0; k < inst.K; ++k)
    for (int l = 0; l < inst.L_C; ++l) {
      ordered_json e;
      e["k"] = k;
      e["l"] = l;
      e["sigma2"] = inst.noise(k, l);
      noise.push_back(std::move(e));
    }
  j["noise"] = std::move(noise);

  ordered_json constraints = ordered_json::array();
  for (const auto& c : bundle.cons.constraints) {
    ordered_json e;
    e["P"] = c.P;
    ordered_json blocks = ordered_json::array();
    for (int k = 0; k < inst.K; ++k)
      for (int l = 0; l < inst.L_C; ++l) {
        const auto& A = c.A[inst.block(k, l)];
        if (A.is_empty()) continue;  // zero blocks are implied
        ordered_json m = dump_cx_mat(A);
        ordered_json entry;
        entry["k"] = k;
        entry["l"] = l;
        entry["re"] = std::move(m["re"]);
        entry["im"] = std::move(m["im"]);
        blocks.push_back(std::move(entry));
      }
    e["A"] = std::move(blocks);
    constraints.push_back(std::move(e));
  }
  j["constraints"] = std::move(constraints);

  ordered_json util;
  util["alpha"] = bundle.util.alpha;
  ordered_json w = ordered_json::array();
  for (int k = 0; k < inst.K; ++k) w.push_back(bundle.util.weight(k));
  util["weights"] = std::move(w);
  j["utility"] = std::move(util);

  if (bundle.seed) j["seed"] = *bundle.seed;
  return j.dump(2) + "\n";
}

InstanceBundle parse_instance(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("instance json: parse error: ") +
                             e.what());
  }
  std::string format = need(j, "format", "document").get<std::string>();
  if (format != "misobb-instance-v1") {
    throw std::runtime_error("instance json: unsupported format '" + format +
                             "'");
  }
  int K = need(j, "K", "document").get<int>();
  std::vector<int> N = need(j, "N", "document").get<std::vector<int>>();
  int L_C = need(j, "L_C", "document").get<int>();
  Topology topo =
      topology_from_string(need(j, "topology", "document").get<std::string>());
  if (K < 1 || static_cast<int>(N.size()) != K || L_C < 1) {
    throw std::runtime_error("instance json: inconsistent K/N/L_C header");
  }

  InstanceBundle b;
  b.inst = NetworkInstance::blank(K, N, L_C, topo);

  const auto& channels = need(j, "channels", "document");
  if (!channels.is_array() ||
      channels.size() != static_cast<size_t>(K) * K * L_C) {
    throw std::runtime_error("instance json: 'channels' must list every (j, k, l)");
  }
  std::vector<bool> seen(static_cast<size_t>(K) * K * L_C, false);
  for (const auto& e : channels) {
    int tx = need(e, "j", "channels").get<int>();
    int rx = need(e, "k", "channels").get<int>();
    int l = need(e, "l", "channels").get<int>();
    std::ostringstream where;
    where << "channels[j=" << tx << ",k=" << rx << ",l=" << l << "]";
    if (tx < 0 || tx >= K || rx < 0 || rx >= K || l < 0 || l >= L_C) {
      throw std::runtime_error("instance json: index out of range in " +
                               where.str());
    }
    arma::cx_rowvec h =
        parse_cx_row(need(e, "re", where.str()), need(e, "im", where.str()),
                     where.str());
    if (h.n_elem != static_cast<arma::uword>(N[tx])) {
      throw std::runtime_error("instance json: channel length must be N[j] in " +
                               where.str());
    }
    size_t flat = (static_cast<size_t>(tx) * K + rx) * L_C + l;
    if (seen[flat]) {
      throw std::runtime_error("instance json: duplicate entry " + where.str());
    }
    seen[flat] = true;
    b.inst.channel(tx, rx, l) = h;
  }

  const auto& noise = need(j, "noise", "document");
  if (!noise.is_array() || noise.size() != static_cast<size_t>(K) * L_C) {
    throw std::runtime_error("instance json: 'noise' must list every (k, l)");
  }
  for (const auto& e : noise) {
    int k = need(e, "k", "noise").get<int>();
    int l = need(e, "l", "noise").get<int>();
    if (k < 0 || k >= K || l < 0 || l >= L_C) {
      throw std::runtime_error("instance json: noise index out of range");
    }
    b.inst.noise(k, l) = need(e, "sigma2", "noise").get<double>();
  }

  const auto& constraints = need(j, "constraints", "document");
  if (!constraints.is_array() || constraints.empty()) {
    throw std::runtime_error("instance json: 'constraints' must be a nonempty array");
  }
  for (const auto& e : constraints) {
    LinearConstraint c;
    c.P = need(e, "P", "constraints").get<double>();
    c.A.resize(b.inst.blocks());
    const auto& blocks = need(e, "A", "constraints");
    if (!blocks.is_array()) {
      throw std::runtime_error("instance json: constraint 'A' must be an array");
    }
    for (const auto& m : blocks) {
      int k = need(m, "k", "constraints.A").get<int>();
      int l = need(m, "l", "constraints.A").get<int>();
      std::ostringstream where;
      where << "constraints.A[k=" << k << ",l=" << l << "]";
      if (k < 0 || k >= K || l < 0 || l >= L_C) {
        throw std::runtime_error("instance json: index out of range in " +
                                 where.str());
      }
      c.A[b.inst.block(k, l)] =
          parse_cx_mat(need(m, "re", where.str()), need(m, "im", where.str()),
                       N[k], where.str());
    }
    b.cons.constraints.push_back(std::move(c));
  }

  const auto& util = need(j, "utility", "document");
  b.util.alpha = need(util, "alpha", "utility").get<double>();
  std::vector<double> w =
      need(util, "weights", "utility").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != K) {
    throw std::runtime_error("instance json: 'weights' must have K entries");
  }
  b.util.weights = std::move(w);

  if (j.contains("seed")) b.seed = j["seed"].get<std::uint64_t>();

  b.inst.validate();
  b.cons.validate(b.inst);
  b.util.validate(b.inst);
  return b;
}

void save_instance(const std::string& path, const InstanceBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize_instance(bundle);
  if (!out) throw std::runtime_error("write failed: " + path);
}

InstanceBundle load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

}  // namespace misobb
