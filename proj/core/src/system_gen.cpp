#include "remsched/system_gen.hpp"

#include <random>

namespace remsched {

GeneratedSystem generate_random_system(int sensors, int channels, const SystemGenSpec& spec,
                                       std::uint64_t seed) {
  if (sensors < 1 || channels < 1 || channels > sensors)
    throw ValidationError("generate_random_system: need 1 <= channels <= sensors");
  if (spec.rho_min < 1.0 || spec.rho_max <= spec.rho_min)
    throw ValidationError("generate_random_system: spectral radius range must lie above 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> rho_draw(spec.rho_min, spec.rho_max);
  std::uniform_real_distribution<double> c_draw(spec.c_min, spec.c_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GeneratedSystem out;
  out.processes.reserve(sensors);
  const int l = spec.state_dim, e = spec.meas_dim;
  for (int n = 0; n < sensors; ++n) {
    Eigen::MatrixXd A(l, l);
    double rho = 0;
    do {
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) A(i, j) = sym(rng);
      rho = spectral_radius_of(A);
    } while (rho < 1e-9);  // resample near-nilpotent draws
    A *= rho_draw(rng) / rho;
    Eigen::MatrixXd C(e, l);
    for (int i = 0; i < e; ++i)
      for (int j = 0; j < l; ++j) C(i, j) = c_draw(rng);
    out.processes.push_back(ProcessModel::make(A, C, Eigen::MatrixXd::Identity(l, l),
                                               Eigen::MatrixXd::Identity(e, e)));
  }

  const int levels = static_cast<int>(spec.drop_prob.size());
  std::vector<std::vector<double>> dist;
  dist.reserve(static_cast<size_t>(sensors) * channels);
  for (int n = 0; n < sensors; ++n) {
    for (int m = 0; m < channels; ++m) {
      std::vector<double> q(levels);
      double sum = 0;
      do {
        sum = 0;
        for (double& x : q) {
          x = unit(rng);
          sum += x;
        }
      } while (sum <= 1e-12);
      for (double& x : q) x /= sum;
      dist.push_back(std::move(q));
    }
  }
  out.channel = ChannelModel::make(sensors, channels, spec.drop_prob, std::move(dist));
  return out;
}

}  // namespace remsched
