// SPDX-License-Identifier: Apache-2.0
//
// Independent reference solvers. None of them share machinery with the
// interior-point core: the grid search enumerates beamformers directly,
// waterfilling uses the closed form for decoupled links, and the broadcast
// bound runs dirty-paper coding through uplink-downlink duality.

#pragma once

#include <vector>

#include "misobb/model.hpp"

namespace misobb {

struct GridOptions {
  int resolution = 12;        // angle samples per dimension, at least 8
  int power_resolution = 12;  // power steps, at least 8
  int refine_rounds = 3;      // zoom stages after the initial sweep
  int keep_basins = 4;        // separated candidates refined per stage
  double shrink = 0.2;        // range contraction per zoom stage
};

struct GridResult {
  double utility = 0.0;    // best weighted utility found, nats
  double res_bound = 0.0;  // neighbor-step sensitivity at the best point
  CovariancePoint Q;       // rank-one per user
  long evaluations = 0;    // candidates built plus candidate pairs scored
};

// Exhaustive beamformer search for single-carrier networks with at most two
// users, at most four transmit antennas in total, and one identity power
// budget per user. Each user's covariance is parametrized as a rank-one
// beamformer (spherical angles plus relative phases) times a power level.
GridResult grid_search(const NetworkInstance& inst, const UtilitySpec& util,
                       const ConstraintSet& cons, const GridOptions& opts = {});

struct WaterfillingResult {
  CovariancePoint Q;
  double utility = 0.0;           // nats
  std::vector<arma::vec> powers;  // per user, per carrier
};

// Closed form for interference-free networks with proportional-rate weights
// disabled (alpha = 0) and one identity budget per user: beamform along each
// channel and waterfill the budget across carriers.
WaterfillingResult waterfilling_decoupled(const NetworkInstance& inst,
                                          const UtilitySpec& util,
                                          const ConstraintSet& cons);

// Sum capacity of a single-carrier broadcast network with one identity
// sum-power budget, in nats, computed in the dual multiple-access channel.
double dpc_sum_capacity_nats(const NetworkInstance& inst,
                             const ConstraintSet& cons);

}  // namespace misobb
