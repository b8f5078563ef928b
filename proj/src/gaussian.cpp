#include "wbary/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wbary/errors.hpp"

namespace wbary {

namespace {

using Mat = std::vector<double>;

Mat matmul(int d, const Mat& a, const Mat& b) {
  Mat c(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const double aik = a[i * d + k];
      for (int j = 0; j < d; ++j) c[i * d + j] += aik * b[k * d + j];
    }
  return c;
}

void symmetrize(int d, Mat& a) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (a[i * d + j] + a[j * d + i]);
      a[i * d + j] = v;
      a[j * d + i] = v;
    }
}

// V diag(f(w)) V^T for a spectral function f
template <typename F>
Mat spectral_apply(int d, const EigenSym& eig, F f) {
  Mat out(static_cast<std::size_t>(d) * d, 0.0);
  for (int k = 0; k < d; ++k) {
    const double fk = f(eig.values[k]);
    for (int i = 0; i < d; ++i) {
      const double vik = eig.vectors[i * d + k] * fk;
      for (int j = 0; j <= i; ++j) out[i * d + j] += vik * eig.vectors[j * d + k];
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) out[j * d + i] = out[i * d + j];
  return out;
}

}  // namespace

SpdMatrix::SpdMatrix(int d, std::vector<double> data) : d_(d), a_(std::move(data)) {
  if (d <= 0 || a_.size() != static_cast<std::size_t>(d) * d)
    throw std::invalid_argument("SpdMatrix: bad shape");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(a_[i * d + j] - a_[j * d + i]) > 1e-12)
        throw std::invalid_argument("invalid covariance: not symmetric");
  symmetrize(d, a_);
  const EigenSym eig = eigen_sym(d_, a_);
  for (double w : eig.values)
    if (!(w > 1e-12)) throw std::invalid_argument("invalid covariance: not positive definite");
}

SpdMatrix SpdMatrix::identity(int d) {
  std::vector<double> a(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) a[i * d + i] = 1.0;
  return SpdMatrix(d, std::move(a));
}

EigenSym eigen_sym(int d, const std::vector<double>& a_in) {
  Mat a = a_in;
  Mat v(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) v[i * d + i] = 1.0;

  // cyclic Jacobi sweeps until off-diagonal mass is negligible
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double fro2 = 0.0;
    for (double x : a) fro2 += x * x;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += a[i * d + j] * a[i * d + j];
    if (off <= 1e-28 * (1.0 + fro2)) break;

    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double app = a[p * d + p];
        const double aqq = a[q * d + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a[k * d + p];
          const double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[p * d + k];
          const double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          const double vkp = v[k * d + p];
          const double vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  EigenSym out;
  out.values.resize(d);
  for (int i = 0; i < d; ++i) out.values[i] = a[i * d + i];
  out.vectors = std::move(v);
  return out;
}

SpdMatrix spd_sqrt(const SpdMatrix& A) {
  const int d = A.dim();
  const EigenSym eig = eigen_sym(d, A.data());
  for (double w : eig.values)
    if (!(w > 0.0)) throw std::invalid_argument("spd_sqrt: input not positive definite");
  Mat b = spectral_apply(d, eig, [](double w) { return std::sqrt(w); });
  return SpdMatrix(d, std::move(b));
}

SpdMatrix spd_inverse(const SpdMatrix& A) {
  const int d = A.dim();
  const EigenSym eig = eigen_sym(d, A.data());
  Mat b = spectral_apply(d, eig, [](double w) { return 1.0 / w; });
  return SpdMatrix(d, std::move(b));
}

SpdMatrix gaussian_A_matrix(const SpdMatrix& S, const SpdMatrix& Sigma) {
  const int d = S.dim();
  if (Sigma.dim() != d) throw std::invalid_argument("dimension mismatch");
  const EigenSym eig = eigen_sym(d, S.data());
  const Mat shalf = spectral_apply(d, eig, [](double w) { return std::sqrt(w); });
  const Mat sneghalf = spectral_apply(d, eig, [](double w) { return 1.0 / std::sqrt(w); });
  Mat mid = matmul(d, matmul(d, shalf, Sigma.data()), shalf);
  symmetrize(d, mid);
  const EigenSym meig = eigen_sym(d, mid);
  const Mat midroot = spectral_apply(d, meig, [](double w) { return std::sqrt(std::max(w, 0.0)); });
  Mat out = matmul(d, matmul(d, sneghalf, midroot), sneghalf);
  symmetrize(d, out);
  return SpdMatrix(d, std::move(out));
}

SpdMatrix gaussian_mirror_step(const SpdMatrix& S, const std::vector<SpdMatrix>& Sigmas,
                               const std::vector<double>& weights, double eta) {
  const int d = S.dim();
  if (Sigmas.size() != weights.size() || Sigmas.empty())
    throw std::invalid_argument("gaussian_mirror_step: bad inputs");
  Mat drift(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) drift[i * d + i] = 1.0;
  for (std::size_t i = 0; i < Sigmas.size(); ++i) {
    const SpdMatrix Ai = gaussian_A_matrix(S, Sigmas[i]);
    for (std::size_t k = 0; k < drift.size(); ++k) drift[k] -= weights[i] * Ai.data()[k];
  }
  const SpdMatrix Sinv = spd_inverse(S);
  Mat prec(Sinv.data());
  for (std::size_t k = 0; k < prec.size(); ++k) prec[k] += eta * drift[k];
  symmetrize(d, prec);
  const EigenSym eig = eigen_sym(d, prec);
  for (double w : eig.values)
    if (!(w > 1e-12)) throw SolverError("step too large");
  Mat next = spectral_apply(d, eig, [](double w) { return 1.0 / w; });
  return SpdMatrix(d, std::move(next));
}

double bures_wasserstein_distance(const GaussianMeasure& g1, const GaussianMeasure& g2) {
  if (g1.dim != g2.dim) throw std::invalid_argument("dimension mismatch");
  const int d = g1.dim;
  double msq = 0.0;
  for (int a = 0; a < d; ++a) {
    const double t = g1.mean[a] - g2.mean[a];
    msq += t * t;
  }
  const SpdMatrix s1(d, g1.cov);
  const SpdMatrix s2(d, g2.cov);
  const SpdMatrix r1 = spd_sqrt(s1);
  Mat mid = matmul(d, matmul(d, r1.data(), s2.data()), r1.data());
  symmetrize(d, mid);
  const EigenSym meig = eigen_sym(d, mid);
  double tr = 0.0;
  for (int i = 0; i < d; ++i)
    tr += s1(i, i) + s2(i, i) - 2.0 * std::sqrt(std::max(meig.values[i], 0.0));
  return std::sqrt(std::max(0.0, msq + tr));
}

SpdMatrix gaussian_barycenter_ground_truth(const std::vector<SpdMatrix>& Sigmas,
                                           const std::vector<double>& weights,
                                           double tol, int max_iters) {
  if (Sigmas.empty() || Sigmas.size() != weights.size())
    throw std::invalid_argument("gaussian_barycenter_ground_truth: bad inputs");
  const int d = Sigmas[0].dim();
  SpdMatrix S = SpdMatrix::identity(d);
  for (int it = 0; it < max_iters; ++it) {
    const EigenSym eig = eigen_sym(d, S.data());
    const Mat shalf = spectral_apply(d, eig, [](double w) { return std::sqrt(w); });
    const Mat sneghalf = spectral_apply(d, eig, [](double w) { return 1.0 / std::sqrt(w); });
    Mat acc(static_cast<std::size_t>(d) * d, 0.0);
    for (std::size_t i = 0; i < Sigmas.size(); ++i) {
      Mat mid = matmul(d, matmul(d, shalf, Sigmas[i].data()), shalf);
      symmetrize(d, mid);
      const EigenSym meig = eigen_sym(d, mid);
      const Mat root = spectral_apply(d, meig, [](double w) { return std::sqrt(std::max(w, 0.0)); });
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += weights[i] * root[k];
    }
    Mat next = matmul(d, matmul(d, sneghalf, matmul(d, acc, acc)), sneghalf);
    symmetrize(d, next);
    double diff = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      const double t = next[k] - S.data()[k];
      diff += t * t;
    }
    S = SpdMatrix(d, std::move(next));
    if (std::sqrt(diff) <= tol) return S;
  }
  throw SolverError("gaussian_barycenter_ground_truth: no convergence");
}

GaussianRunResult run_gaussian_barycenter(const std::vector<SpdMatrix>& Sigmas,
                                          const std::vector<double>& weights,
                                          const std::vector<double>& etas) {
  if (Sigmas.empty() || Sigmas.size() != weights.size())
    throw std::invalid_argument("run_gaussian_barycenter: bad inputs");
  const int d = Sigmas[0].dim();
  const SpdMatrix truth = gaussian_barycenter_ground_truth(Sigmas, weights);
  const std::vector<double> zero_mean(d, 0.0);
  const GaussianMeasure truth_g(zero_mean, truth.data());

  GaussianRunResult out;
  out.covariance = SpdMatrix::identity(d);
  out.bw_trace.reserve(etas.size());
  for (double eta : etas) {
    out.bw_trace.push_back(
        bures_wasserstein_distance(GaussianMeasure(zero_mean, out.covariance.data()), truth_g));
    double step = eta;
    for (;;) {
      try {
        out.covariance = gaussian_mirror_step(out.covariance, Sigmas, weights, step);
        break;
      } catch (const SolverError&) {
        step *= 0.5;  // "step too large": halve and retry
        ++out.eta_halvings;
        if (step < 1e-12) throw;
      }
    }
  }
  out.bw_trace.push_back(
      bures_wasserstein_distance(GaussianMeasure(zero_mean, out.covariance.data()), truth_g));
  return out;
}

}  // namespace wbary
