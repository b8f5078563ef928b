#pragma once

#include <cstddef>
#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

// Symmetric positive definite matrix, validated at construction (symmetry
// within 1e-12, eigenvalues > 1e-12).
class SpdMatrix {
 public:
  SpdMatrix() = default;
  SpdMatrix(int d, std::vector<double> data);

  int dim() const { return d_; }
  const std::vector<double>& data() const { return a_; }
  double operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * d_ + c]; }

  static SpdMatrix identity(int d);

 private:
  int d_ = 0;
  std::vector<double> a_;
};

// Symmetric eigendecomposition by cyclic Jacobi; A = V diag(w) V^T.
struct EigenSym {
  std::vector<double> values;   // d
  std::vector<double> vectors;  // d*d, columns are eigenvectors
};
EigenSym eigen_sym(int d, const std::vector<double>& a);

// Principal square root, |B*B - A|_F <= 1e-10 (1 + |A|_F).
SpdMatrix spd_sqrt(const SpdMatrix& A);

SpdMatrix spd_inverse(const SpdMatrix& A);

// A = S^{-1/2} (S^{1/2} Sigma S^{1/2})^{1/2} S^{-1/2}; satisfies A S A = Sigma.
SpdMatrix gaussian_A_matrix(const SpdMatrix& S, const SpdMatrix& Sigma);

// Precision update S_{k+1}^{-1} = S_k^{-1} + eta (I - sum_i w_i A_{i,k});
// throws SolverError("step too large") if the updated precision is not SPD.
SpdMatrix gaussian_mirror_step(const SpdMatrix& S, const std::vector<SpdMatrix>& Sigmas,
                               const std::vector<double>& weights, double eta);

double bures_wasserstein_distance(const GaussianMeasure& g1, const GaussianMeasure& g2);

// Fixed-point iteration for the barycenter covariance:
// S <- S^{-1/2} (sum_i w_i (S^{1/2} Sigma_i S^{1/2})^{1/2})^2 S^{-1/2}.
SpdMatrix gaussian_barycenter_ground_truth(const std::vector<SpdMatrix>& Sigmas,
                                           const std::vector<double>& weights,
                                           double tol = 1e-12, int max_iters = 1000);

struct GaussianRunResult {
  SpdMatrix covariance;
  std::vector<double> bw_trace;  // BW distance to the fixed-point truth per iteration
  int eta_halvings = 0;          // "step too large" recoveries
};

// Mirror descent from S_0 = I with a constant or scheduled step; eta supplied
// per iteration by the caller through the schedule vector (size T+1).
GaussianRunResult run_gaussian_barycenter(const std::vector<SpdMatrix>& Sigmas,
                                          const std::vector<double>& weights,
                                          const std::vector<double>& etas);

}  // namespace wbary
