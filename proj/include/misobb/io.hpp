// SPDX-License-Identifier: Apache-2.0
//
// Instance files: a single JSON document holding the network, the power
// budgets, and the utility. Serialization is byte-deterministic: object keys
// keep insertion order and doubles use the shortest round-trip form, so a
// bundle always produces the same bytes on the same platform.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misobb/model.hpp"

namespace misobb {

struct InstanceBundle {
  NetworkInstance inst;
  ConstraintSet cons;
  UtilitySpec util;
  std::optional<std::uint64_t> seed;
};

struct GeneratorSpec {
  int K = 2;
  std::vector<int> N = {2};  // one entry broadcasts to every user
  int L_C = 1;
  Topology topology = Topology::IC;
  double alpha = 0.0;
  std::vector<double> weights;  // empty = all ones
  double P = 10.0;              // per-user budget (IC) or sum budget (BC)
  std::uint64_t seed = 1;
};

// Random network with unit-variance complex normal channel entries and unit
// noise. Interference networks get one identity budget per user, broadcast
// networks one identity sum-power budget. The draw order is fixed, so equal
// specs produce equal instances on every run.
InstanceBundle generate_instance(const GeneratorSpec& spec);

std::string serialize_instance(const InstanceBundle& bundle);
InstanceBundle parse_instance(const std::string& text);

void save_instance(const std::string& path, const InstanceBundle& bundle);
InstanceBundle load_instance(const std::string& path);

}  // namespace misobb
