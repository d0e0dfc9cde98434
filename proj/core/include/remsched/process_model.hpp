#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <string>
#include <vector>

#include "remsched/errors.hpp"

namespace remsched {

enum class RewardKind { sum_mse, sum_aoi, product_mse };

RewardKind reward_kind_from_string(const std::string& name);
const char* to_string(RewardKind kind);

/// Steady-state posterior covariance of a per-sensor Kalman filter, found by
/// fixed-point iteration of one predict+update cycle starting from W.
///
/// Requires (A, C) observable and (A, sqrt(W)) controllable for the iteration
/// to converge; that is the caller's responsibility. Throws ConvergenceError
/// (carrying the final residual) when max_iter is exhausted, ValidationError
/// for non-SPD noise covariances or mismatched dimensions.
Eigen::MatrixXd steady_state_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                        const Eigen::MatrixXd& W, const Eigen::MatrixXd& V,
                                        double tol = 1e-10, long max_iter = 100000);

/// One linear time-invariant process with its sensor-side filter already in
/// steady state. Immutable after construction; safe for concurrent reads.
struct ProcessModel {
  Eigen::MatrixXd A;     // system matrix, l x l, spectral radius > 1
  Eigen::MatrixXd C;     // measurement matrix, e x l
  Eigen::MatrixXd W;     // process noise covariance, SPD
  Eigen::MatrixXd V;     // measurement noise covariance, SPD
  Eigen::MatrixXd Pbar;  // steady-state posterior covariance
  double spectral_radius = 0.0;

  static ProcessModel make(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                           const Eigen::MatrixXd& W, const Eigen::MatrixXd& V,
                           double tol = 1e-10, long max_iter = 100000);

  int state_dim() const { return static_cast<int>(A.rows()); }
  int meas_dim() const { return static_cast<int>(C.rows()); }

  /// One-step open-loop covariance growth: A X A^T + W.
  Eigen::MatrixXd hold(const Eigen::MatrixXd& X) const;

  /// Sup-norm change of one full predict+update cycle applied at Pbar.
  double kalman_cycle_residual() const;

  /// The same residual scaled by 1 + the covariance magnitude; this is the
  /// quantity the fixed-point iteration drives below its tolerance.
  double relative_cycle_residual() const;
};

double spectral_radius_of(const Eigen::MatrixXd& A);

/// Tr of the open-loop covariance after `age` holding steps from steady state,
/// precomputed for age = 1..length. Strictly increasing in age. Lookups above
/// the precomputed range clamp to the last entry and bump a counter so callers
/// can detect saturation.
class MseTable {
 public:
  MseTable(const ProcessModel& process, int length);

  // the clamp counter is atomic, so copies/moves are spelled out
  MseTable(const MseTable& other)
      : values_(other.values_), clamped_(other.clamped_.load(std::memory_order_relaxed)) {}
  MseTable(MseTable&& other) noexcept
      : values_(std::move(other.values_)),
        clamped_(other.clamped_.load(std::memory_order_relaxed)) {}
  MseTable& operator=(const MseTable& other) {
    values_ = other.values_;
    clamped_.store(other.clamped_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    return *this;
  }

  double at(int age) const;  // age < 1 -> ValidationError
  int length() const { return static_cast<int>(values_.size()); }
  long clamped_lookups() const { return clamped_.load(std::memory_order_relaxed); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
  mutable std::atomic<long> clamped_{0};
};

/// Tr(f^age(Pbar)) via the table; the memoized form of the age->MSE map.
inline double aoi_error_trace(const MseTable& table, int age) { return table.at(age); }

/// Instantaneous reward of an AoI vector. Strictly decreasing in every
/// component for all kinds.
double reward(const std::vector<MseTable>& tables, const std::vector<int>& tau, RewardKind kind);

}  // namespace remsched
