#pragma once

#include <functional>
#include <vector>

#include "remsched/mdp_solver.hpp"

namespace remsched {

enum class StructureProperty {
  channel_threshold,
  aoi_threshold,
  monotonicity,
  prob_supermodularity,
  proposition1,
};

const char* to_string(StructureProperty p);

struct Witness {
  long state = -1;
  long paired_state = -1;
  int sensor = -1;
  int other_sensor = -1;
  int channel = -1;
  int action_at_state = -1;
  int action_at_pair = -1;
  double lhs = 0, rhs = 0;  // value-inequality checks only
};

/// Outcome of one property scan. Empty witnesses means the property holds over
/// all checked pairs; ties resolved in the property's favor are counted
/// separately, as are premise states skipped by a precondition.
struct ViolationReport {
  StructureProperty kind{};
  std::vector<Witness> witnesses;
  long checked_pairs = 0;
  long tie_excluded = 0;
  long precondition_skipped = 0;
  bool passed() const { return witnesses.empty(); }
};

/// Policy access used by the action-based checkers: the canonical (argmax)
/// action per state plus a tie-aware optimality test. Checkers accept a
/// conclusion whenever ANY optimal action satisfies it, so exact ties never
/// produce spurious violations.
struct PolicyView {
  const std::vector<ScheduleAction>* actions = nullptr;
  std::function<int(long)> action_at;
  std::function<bool(long, int)> is_optimal;
};

PolicyView view_of(const SolvedMdp& solved, double slack);
PolicyView view_of(const Policy& policy, const std::vector<ScheduleAction>& actions);

/// Raising one assigned pair's channel level must keep the assignment.
ViolationReport check_channel_threshold(const StateSpace& space, const PolicyView& view);

/// Raising a scheduled sensor's AoI must keep it on an equal-or-better
/// channel. Pairs with the raised AoI below `large_tau_floor` are not scanned
/// (pass 1 for the full scan; the floor is for asymptotic-only regimes).
ViolationReport check_aoi_threshold(const StateSpace& space, const PolicyView& view,
                                    int large_tau_floor = 1);

/// Optimal values must not increase when any single AoI component grows.
ViolationReport check_monotonicity(const StateSpace& space, const std::vector<double>& v,
                                   double slack);

/// The p-weighted meet/join inequality on the optimal value function
/// (single-channel systems only; throws otherwise). With asymptotic_gap > 0
/// only pairs whose sensor-i AoI drop is at least the gap are scanned.
ViolationReport check_prob_supermodularity(const StateSpace& space, const ChannelModel& model,
                                           const std::vector<double>& v, double slack,
                                           int asymptotic_gap = 0);

/// When a scheduled sensor's AoI grows and all other assignments stay put, its
/// channel must not be taken over by an unscheduled sensor with a worse level.
ViolationReport check_proposition1(const StateSpace& space, const PolicyView& view);

}  // namespace remsched
