#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace pagecurve {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Thrown when a computation produces NaN/inf or loses its normalization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Local basis convention for a spin-1/2: index 0 = up, index 1 = down.
namespace spin {

inline CMatrix sx() {
  CMatrix m(2, 2);
  m << 0.0, 0.5, 0.5, 0.0;
  return m;
}
inline CMatrix sy() {
  CMatrix m(2, 2);
  m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
  return m;
}
inline CMatrix sz() {
  CMatrix m(2, 2);
  m << 0.5, 0.0, 0.0, -0.5;
  return m;
}
/// S^+ raises down -> up.
inline CMatrix splus() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}
inline CMatrix sminus() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}
/// Occupation n = Sz + 1/2.
inline CMatrix number() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  return m;
}
inline CMatrix id2() { return CMatrix::Identity(2, 2); }

inline CVector up() {
  CVector v = CVector::Zero(2);
  v(0) = 1.0;
  return v;
}
inline CVector down() {
  CVector v = CVector::Zero(2);
  v(1) = 1.0;
  return v;
}

}  // namespace spin

/// Kronecker product a (x) b with a acting on the more significant index.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline double hermiticity_defect(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline double unitarity_defect(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

/// exp(-i h tau) for Hermitian h via eigendecomposition.
inline CMatrix expm_hermitian(const CMatrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("expm_hermitian: eigensolver failed");
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k)
    phases(k) = std::exp(Complex(0.0, -tau * es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// -sum p ln p over the given probabilities; entries below `floor` are skipped.
inline double shannon_entropy(const RVector& probs, double floor = 1e-32) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k)
    if (probs(k) > floor) s -= probs(k) * std::log(probs(k));
  return s;
}

}  // namespace pagecurve
