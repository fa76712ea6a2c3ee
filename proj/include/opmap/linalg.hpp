#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace opmap {

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using RowVector2 = Eigen::Matrix<Scalar, 1, 2>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Mat2 = Matrix2<double>;
using Row2 = RowVector2<double>;
using Col2 = Vector2<double>;

template <typename Scalar = double>
inline Vector2<Scalar> ones2() {
  return Vector2<Scalar>::Ones();
}

/// Eigenvalues of a real 2x2 matrix, as a complex pair ordered by real part
/// (largest first).
template <typename Derived>
std::pair<std::complex<typename Derived::Scalar>, std::complex<typename Derived::Scalar>>
eigenvalues2(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  const S half_trace = (a(0, 0) + a(1, 1)) / S(2);
  const S half_gap = (a(0, 0) - a(1, 1)) / S(2);
  const S disc = half_gap * half_gap + a(0, 1) * a(1, 0);
  if (disc >= S(0)) {
    const S root = std::sqrt(disc);
    return {std::complex<S>(half_trace + root), std::complex<S>(half_trace - root)};
  }
  const S root = std::sqrt(-disc);
  return {std::complex<S>(half_trace, root), std::complex<S>(half_trace, -root)};
}

namespace detail {

// Scaling and squaring with an order-18 Taylor polynomial; used when the
// spectral formula is ill conditioned.
template <typename Scalar>
Matrix2<Scalar> expm2_scaling_squaring(const Matrix2<Scalar>& a) {
  const Scalar norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  Scalar scale = Scalar(1);
  while (norm * scale >= Scalar(0.5)) {
    scale /= Scalar(2);
    ++squarings;
  }
  const Matrix2<Scalar> b = a * scale;
  Matrix2<Scalar> term = Matrix2<Scalar>::Identity();
  Matrix2<Scalar> sum = Matrix2<Scalar>::Identity();
  for (int k = 1; k <= 18; ++k) {
    term = (term * b) / Scalar(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace detail

/// Spectral form of t -> exp(a t) for a fixed 2x2 matrix.
///
/// With distinct real eigenvalues l1 > l2 the exponential is
/// exp(l1 t) P1 + exp(l2 t) P2, where P1 = (a - l2 I)/(l1 - l2) and
/// P2 = (a - l1 I)/(l2 - l1) are the spectral projectors. Complex pairs use
/// the real rotation form. Near-coincident eigenvalues fall back to scaling
/// and squaring for each t.
template <typename Scalar>
class MatrixExp2 {
 public:
  enum class Kind { RealDistinct, ComplexPair, Fallback };

  explicit MatrixExp2(const Matrix2<Scalar>& a) : a_(a) {
    const auto [l1, l2] = eigenvalues2(a);
    const Scalar scale = std::max(a.cwiseAbs().maxCoeff(), Scalar(1e-300));
    const Scalar gap = std::abs(l1 - l2);
    if (!(gap >= Scalar(1e-3) * scale)) {
      kind_ = Kind::Fallback;
      return;
    }
    if (l1.imag() == Scalar(0)) {
      kind_ = Kind::RealDistinct;
      lambda1_ = l1.real();
      lambda2_ = l2.real();
      const Matrix2<Scalar> id = Matrix2<Scalar>::Identity();
      proj1_ = (a - lambda2_ * id) / (lambda1_ - lambda2_);
      proj2_ = (a - lambda1_ * id) / (lambda2_ - lambda1_);
    } else {
      kind_ = Kind::ComplexPair;
      lambda1_ = l1.real();
      omega_ = std::abs(l1.imag());
      shifted_ = a - lambda1_ * Matrix2<Scalar>::Identity();
    }
  }

  Kind kind() const { return kind_; }
  Scalar lambda1() const { return lambda1_; }
  Scalar lambda2() const { return lambda2_; }
  const Matrix2<Scalar>& projector1() const { return proj1_; }
  const Matrix2<Scalar>& projector2() const { return proj2_; }

  Matrix2<Scalar> operator()(Scalar t) const {
    switch (kind_) {
      case Kind::RealDistinct:
        return std::exp(lambda1_ * t) * proj1_ + std::exp(lambda2_ * t) * proj2_;
      case Kind::ComplexPair: {
        const Scalar wt = omega_ * t;
        return std::exp(lambda1_ * t) *
               (std::cos(wt) * Matrix2<Scalar>::Identity() + (std::sin(wt) / omega_) * shifted_);
      }
      case Kind::Fallback:
        break;
    }
    return detail::expm2_scaling_squaring<Scalar>(a_ * t);
  }

 private:
  Matrix2<Scalar> a_;
  Kind kind_ = Kind::Fallback;
  Scalar lambda1_ = 0;
  Scalar lambda2_ = 0;
  Scalar omega_ = 0;
  Matrix2<Scalar> proj1_ = Matrix2<Scalar>::Zero();
  Matrix2<Scalar> proj2_ = Matrix2<Scalar>::Zero();
  Matrix2<Scalar> shifted_ = Matrix2<Scalar>::Zero();
};

/// exp(a t) for a 2x2 matrix with finite entries.
template <typename Derived>
Matrix2<typename Derived::Scalar> expm2(const Eigen::MatrixBase<Derived>& a,
                                       typename Derived::Scalar t = 1) {
  using S = typename Derived::Scalar;
  if (t == S(0) || a.isZero(0)) return Matrix2<S>::Identity();
  return MatrixExp2<S>(a.eval())(t);
}

/// Probability vector x with x m = 0 for a 2x2 matrix with zero row sums
/// (a generator, or P - I for a stochastic P). Only the off-diagonal
/// entries are read, so rounding in the diagonal does not leak in.
/// The caller guards m01 + m10 > 0.
template <typename Scalar>
RowVector2<Scalar> left_null_probability(const Matrix2<Scalar>& m) {
  const Scalar a = m(1, 0);
  const Scalar b = m(0, 1);
  RowVector2<Scalar> x;
  x << a, b;
  return x / (a + b);
}

}  // namespace opmap
