#include "remsched/structure_checks.hpp"

namespace remsched {

const char* to_string(StructureProperty p) {
  switch (p) {
    case StructureProperty::channel_threshold: return "channel_threshold";
    case StructureProperty::aoi_threshold: return "aoi_threshold";
    case StructureProperty::monotonicity: return "monotonicity";
    case StructureProperty::prob_supermodularity: return "prob_supermodularity";
    case StructureProperty::proposition1: return "proposition1";
  }
  return "?";
}

PolicyView view_of(const SolvedMdp& solved, double slack) {
  PolicyView view;
  view.actions = &solved.model.actions();
  view.action_at = [&solved](long s) { return solved.policy.action[s]; };
  view.is_optimal = [&solved, slack](long s, int a) { return solved.optimal(s, a, slack); };
  return view;
}

PolicyView view_of(const Policy& policy, const std::vector<ScheduleAction>& actions) {
  PolicyView view;
  view.actions = &actions;
  view.action_at = [&policy](long s) { return policy.action[s]; };
  view.is_optimal = [&policy](long s, int a) { return policy.action[s] == a; };
  return view;
}

namespace {

struct Strides {
  std::vector<long> tau;  // step in full index per unit AoI of sensor n
  std::vector<long> h;    // step in full index per unit level of pair (n,m)

  explicit Strides(const StateSpace& space) {
    const int N = space.sensors(), NM = space.sensors() * space.channels();
    tau.resize(N);
    h.resize(NM);
    h[NM - 1] = 1;
    for (int i = NM - 2; i >= 0; --i) h[i] = h[i + 1] * space.levels();
    tau[N - 1] = space.h_count();
    for (int n = N - 2; n >= 0; --n) tau[n] = tau[n + 1] * space.tau_max();
  }
};

bool any_optimal_with(const PolicyView& view, long s,
                      const std::function<bool(const ScheduleAction&)>& pred) {
  for (int a = 0; a < static_cast<int>(view.actions->size()); ++a)
    if (pred((*view.actions)[a]) && view.is_optimal(s, a)) return true;
  return false;
}

}  // namespace

ViolationReport check_channel_threshold(const StateSpace& space, const PolicyView& view) {
  ViolationReport report;
  report.kind = StructureProperty::channel_threshold;
  const Strides strides(space);
  const int M = space.channels();
  SystemState st;
  for (long s = 0; s < space.size(); ++s) {
    const int a_idx = view.action_at(s);
    const ScheduleAction& act = (*view.actions)[a_idx];
    st = space.decode(s);
    for (int n = 0; n < space.sensors(); ++n) {
      const int m = act.a[n];
      if (m == 0) continue;
      const int cur = st.level(n, m - 1, M);
      for (int lvl = cur + 1; lvl <= space.levels(); ++lvl) {
        const long s2 = s + static_cast<long>(lvl - cur) * strides.h[n * M + (m - 1)];
        ++report.checked_pairs;
        const int a2_idx = view.action_at(s2);
        if ((*view.actions)[a2_idx].a[n] == m) continue;
        if (any_optimal_with(view, s2, [&](const ScheduleAction& c) { return c.a[n] == m; })) {
          ++report.tie_excluded;
          continue;
        }
        Witness w;
        w.state = s;
        w.paired_state = s2;
        w.sensor = n;
        w.channel = m;
        w.action_at_state = a_idx;
        w.action_at_pair = a2_idx;
        report.witnesses.push_back(w);
      }
    }
  }
  return report;
}

ViolationReport check_aoi_threshold(const StateSpace& space, const PolicyView& view,
                                    int large_tau_floor) {
  ViolationReport report;
  report.kind = StructureProperty::aoi_threshold;
  const Strides strides(space);
  const int M = space.channels();
  SystemState st;
  for (long s = 0; s < space.size(); ++s) {
    const int a_idx = view.action_at(s);
    const ScheduleAction& act = (*view.actions)[a_idx];
    st = space.decode(s);
    for (int n = 0; n < space.sensors(); ++n) {
      const int m = act.a[n];
      if (m == 0) continue;
      const int base_level = st.level(n, m - 1, M);
      const int from = std::max(st.tau[n] + 1, large_tau_floor);
      for (int t2 = from; t2 <= space.tau_max(); ++t2) {
        const long s2 = s + static_cast<long>(t2 - st.tau[n]) * strides.tau[n];
        ++report.checked_pairs;
        // Sensor n must stay scheduled on a channel at least as good.
        auto keeps = [&](const ScheduleAction& c) {
          const int m2 = c.a[n];
          return m2 > 0 && st.level(n, m2 - 1, M) >= base_level;
        };
        const int a2_idx = view.action_at(s2);
        if (keeps((*view.actions)[a2_idx])) continue;
        if (any_optimal_with(view, s2, keeps)) {
          ++report.tie_excluded;
          continue;
        }
        Witness w;
        w.state = s;
        w.paired_state = s2;
        w.sensor = n;
        w.channel = m;
        w.action_at_state = a_idx;
        w.action_at_pair = a2_idx;
        report.witnesses.push_back(w);
      }
    }
  }
  return report;
}

ViolationReport check_monotonicity(const StateSpace& space, const std::vector<double>& v,
                                   double slack) {
  ViolationReport report;
  report.kind = StructureProperty::monotonicity;
  if (v.size() != static_cast<size_t>(space.size()))
    throw ValidationError("check_monotonicity: value table size mismatch");
  const Strides strides(space);
  std::vector<int> tau;
  for (long t = 0; t < space.tau_count(); ++t) {
    space.decode_tau(t, tau);
    for (int n = 0; n < space.sensors(); ++n) {
      if (tau[n] >= space.tau_max()) continue;
      for (long h = 0; h < space.h_count(); ++h) {
        const long s = t * space.h_count() + h;
        const long s2 = s + strides.tau[n];
        ++report.checked_pairs;
        if (v[s2] > v[s] + slack) {
          Witness w;
          w.state = s;
          w.paired_state = s2;
          w.sensor = n;
          w.lhs = v[s2];
          w.rhs = v[s];
          report.witnesses.push_back(w);
        }
      }
    }
  }
  return report;
}

ViolationReport check_prob_supermodularity(const StateSpace& space, const ChannelModel& model,
                                           const std::vector<double>& v, double slack,
                                           int asymptotic_gap) {
  ViolationReport report;
  report.kind = StructureProperty::prob_supermodularity;
  if (space.channels() != 1)
    throw ValidationError("probabilistic supermodularity is defined for single-channel systems");
  if (v.size() != static_cast<size_t>(space.size()))
    throw ValidationError("check_prob_supermodularity: value table size mismatch");

  const Strides strides(space);
  const int N = space.sensors(), T = space.tau_max();
  const long HC = space.h_count();

  // Enumerate AoI assignments of all sensors other than (i, j) with an
  // odometer; each full index is base + contributions of i and j.
  std::vector<int> rest(N, 1);
  std::vector<int> h;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      std::fill(rest.begin(), rest.end(), 1);
      bool done = false;
      while (!done) {
        long base_tau = 0;
        for (int n = 0; n < N; ++n)
          if (n != i && n != j) base_tau += static_cast<long>(rest[n] - 1) * strides.tau[n];
        for (long hidx = 0; hidx < HC; ++hidx) {
          space.decode_h(hidx, h);
          const double p_i = model.success_at_level(h[i]);
          const double p_j = model.success_at_level(h[j]);
          const long base = base_tau + hidx;
          for (int ti = 1; ti <= T; ++ti) {
            const int tii_hi = asymptotic_gap > 0 ? ti - asymptotic_gap : ti;
            for (int tii = 1; tii <= tii_hi; ++tii) {
              for (int tj = 1; tj <= T; ++tj) {
                for (int tjj = tj; tjj <= T; ++tjj) {
                  const long s = base + static_cast<long>(ti - 1) * strides.tau[i] +
                                 static_cast<long>(tj - 1) * strides.tau[j];
                  const long so = base + static_cast<long>(tii - 1) * strides.tau[i] +
                                  static_cast<long>(tjj - 1) * strides.tau[j];
                  const long meet = base + static_cast<long>(tii - 1) * strides.tau[i] +
                                    static_cast<long>(tj - 1) * strides.tau[j];
                  const long join = base + static_cast<long>(ti - 1) * strides.tau[i] +
                                    static_cast<long>(tjj - 1) * strides.tau[j];
                  ++report.checked_pairs;
                  const double lhs = p_j * v[meet] + (p_j - p_i) * v[join];
                  const double rhs = p_j * v[s] + (p_j - p_i) * v[so];
                  if (lhs < rhs - slack) {
                    Witness w;
                    w.state = s;
                    w.paired_state = so;
                    w.sensor = i;
                    w.other_sensor = j;
                    w.lhs = lhs;
                    w.rhs = rhs;
                    report.witnesses.push_back(w);
                  }
                }
              }
            }
          }
        }
        // advance the odometer over the remaining sensors
        done = true;
        for (int n = 0; n < N; ++n) {
          if (n == i || n == j) continue;
          if (rest[n] < T) {
            ++rest[n];
            done = false;
            break;
          }
          rest[n] = 1;
        }
      }
    }
  }
  return report;
}

ViolationReport check_proposition1(const StateSpace& space, const PolicyView& view) {
  ViolationReport report;
  report.kind = StructureProperty::proposition1;
  const Strides strides(space);
  const int M = space.channels();
  SystemState st;
  for (long s = 0; s < space.size(); ++s) {
    const int a_idx = view.action_at(s);
    const ScheduleAction& act = (*view.actions)[a_idx];
    st = space.decode(s);
    for (int i = 0; i < space.sensors(); ++i) {
      const int m = act.a[i];
      if (m == 0) continue;
      for (int t2 = st.tau[i] + 1; t2 <= space.tau_max(); ++t2) {
        const long s2 = s + static_cast<long>(t2 - st.tau[i]) * strides.tau[i];
        const int a2_idx = view.action_at(s2);
        const ScheduleAction& act2 = (*view.actions)[a2_idx];
        // Premise: every other scheduled sensor keeps its channel.
        bool constant = true;
        for (int n = 0; n < space.sensors() && constant; ++n)
          if (n != i && act.a[n] != 0 && act2.a[n] != act.a[n]) constant = false;
        if (!constant) {
          ++report.precondition_skipped;
          continue;
        }
        for (int j = 0; j < space.sensors(); ++j) {
          if (j == i || act.a[j] != 0) continue;
          if (st.level(j, m - 1, M) > st.level(i, m - 1, M)) continue;
          ++report.checked_pairs;
          if (act2.a[j] != m) continue;
          auto fine = [&](const ScheduleAction& c) {
            if (c.a[j] == m) return false;
            for (int n = 0; n < space.sensors(); ++n)
              if (n != i && act.a[n] != 0 && c.a[n] != act.a[n]) return false;
            return true;
          };
          if (any_optimal_with(view, s2, fine)) {
            ++report.tie_excluded;
            continue;
          }
          Witness w;
          w.state = s;
          w.paired_state = s2;
          w.sensor = i;
          w.other_sensor = j;
          w.channel = m;
          w.action_at_state = a_idx;
          w.action_at_pair = a2_idx;
          report.witnesses.push_back(w);
        }
      }
    }
  }
  return report;
}

}  // namespace remsched
