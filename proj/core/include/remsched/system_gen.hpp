#pragma once

#include <cstdint>
#include <vector>

#include "remsched/channel_model.hpp"
#include "remsched/process_model.hpp"

namespace remsched {

/// Knobs for random system generation. Defaults follow the standard desk
/// setup: 2-dimensional processes with scalar measurements, identity noise,
/// spectral radius drawn in (1, 1.4), five channel levels.
struct SystemGenSpec {
  int state_dim = 2;
  int meas_dim = 1;
  double rho_min = 1.0;  // exclusive
  double rho_max = 1.4;
  double c_min = 0.0;
  double c_max = 1.0;
  std::vector<double> drop_prob = {0.2, 0.15, 0.1, 0.05, 0.01};
};

struct GeneratedSystem {
  std::vector<ProcessModel> processes;
  ChannelModel channel;
};

/// Deterministic for a fixed seed. System matrices get uniform(-1,1) entries
/// rescaled to a uniform random target spectral radius; measurement rows are
/// uniform; per-pair level distributions are normalized uniform draws.
GeneratedSystem generate_random_system(int sensors, int channels, const SystemGenSpec& spec,
                                       std::uint64_t seed);

}  // namespace remsched
