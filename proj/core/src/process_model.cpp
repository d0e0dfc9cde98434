#include "remsched/process_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace remsched {

RewardKind reward_kind_from_string(const std::string& name) {
  if (name == "sum_mse") return RewardKind::sum_mse;
  if (name == "sum_aoi") return RewardKind::sum_aoi;
  if (name == "product_mse") return RewardKind::product_mse;
  throw ValidationError("unknown reward kind: " + name);
}

const char* to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::sum_mse: return "sum_mse";
    case RewardKind::sum_aoi: return "sum_aoi";
    case RewardKind::product_mse: return "product_mse";
  }
  return "?";
}

namespace {

void require_spd(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(name) + " must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw ValidationError(std::string(name) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw ValidationError(std::string(name) + " must be positive definite");
}

Eigen::MatrixXd kalman_cycle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                             const Eigen::MatrixXd& W, const Eigen::MatrixXd& V,
                             const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd prior = A * P * A.transpose() + W;
  const Eigen::MatrixXd S = C * prior * C.transpose() + V;
  const Eigen::MatrixXd K = S.ldlt().solve(C * prior).transpose();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  Eigen::MatrixXd post = (I - K * C) * prior;
  return 0.5 * (post + post.transpose());  // keep iterates symmetric
}

}  // namespace

double spectral_radius_of(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw ValidationError("spectral radius of a non-square matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd steady_state_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                        const Eigen::MatrixXd& W, const Eigen::MatrixXd& V,
                                        double tol, long max_iter) {
  if (A.rows() != A.cols()) throw ValidationError("A must be square");
  if (C.cols() != A.rows()) throw ValidationError("C has wrong number of columns");
  require_spd(W, "W");
  require_spd(V, "V");
  if (tol <= 0) throw ValidationError("tol must be positive");

  Eigen::MatrixXd P = W;
  double residual = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd next = kalman_cycle(A, C, W, V, P);
    residual = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    // Scale-relative stop: weakly observable systems reach covariances around
    // 1e4, where an absolute 1e-10 change sits below one cycle's rounding.
    // The 8x margin keeps the one-cycle residual below tol even when the
    // iteration contracts slowly.
    if (residual <= 0.125 * tol * (1.0 + P.cwiseAbs().maxCoeff())) return P;
  }
  throw ConvergenceError("steady-state covariance iteration did not converge", residual);
}

ProcessModel ProcessModel::make(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& W, const Eigen::MatrixXd& V,
                                double tol, long max_iter) {
  ProcessModel p;
  p.A = A;
  p.C = C;
  p.W = W;
  p.V = V;
  p.spectral_radius = spectral_radius_of(A);
  if (p.spectral_radius <= 1.0)
    throw ValidationError("process must be unstable: spectral radius of A must exceed 1");
  p.Pbar = steady_state_covariance(A, C, W, V, tol, max_iter);
  return p;
}

Eigen::MatrixXd ProcessModel::hold(const Eigen::MatrixXd& X) const {
  return A * X * A.transpose() + W;
}

double ProcessModel::kalman_cycle_residual() const {
  return (kalman_cycle(A, C, W, V, Pbar) - Pbar).cwiseAbs().maxCoeff();
}

double ProcessModel::relative_cycle_residual() const {
  return kalman_cycle_residual() / (1.0 + Pbar.cwiseAbs().maxCoeff());
}

MseTable::MseTable(const ProcessModel& process, int length) {
  if (length < 1) throw ValidationError("MseTable length must be >= 1");
  values_.reserve(length);
  Eigen::MatrixXd P = process.Pbar;
  for (int age = 1; age <= length; ++age) {
    P = process.hold(P);
    const double tr = P.trace();
    if (!values_.empty() && tr <= values_.back())
      throw ValidationError("MSE table is not strictly increasing; process violates contract");
    values_.push_back(tr);
  }
}

double MseTable::at(int age) const {
  if (age < 1) throw ValidationError("AoI must be >= 1");
  if (age > static_cast<int>(values_.size())) {
    clamped_.fetch_add(1, std::memory_order_relaxed);
    return values_.back();
  }
  return values_[age - 1];
}

double reward(const std::vector<MseTable>& tables, const std::vector<int>& tau, RewardKind kind) {
  if (tables.size() != tau.size())
    throw ValidationError("reward: AoI vector length does not match process count");
  switch (kind) {
    case RewardKind::sum_mse: {
      double sum = 0;
      for (size_t n = 0; n < tau.size(); ++n) sum += tables[n].at(tau[n]);
      return -sum;
    }
    case RewardKind::sum_aoi: {
      double sum = 0;
      for (int t : tau) {
        if (t < 1) throw ValidationError("AoI must be >= 1");
        sum += t;
      }
      return -sum;
    }
    case RewardKind::product_mse: {
      double prod = 1;
      for (size_t n = 0; n < tau.size(); ++n) prod *= tables[n].at(tau[n]);
      return -prod;
    }
  }
  throw ValidationError("reward: bad kind");
}

}  // namespace remsched
