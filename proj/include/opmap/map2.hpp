#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "opmap/linalg.hpp"

namespace opmap {

inline constexpr double kGeneratorTolerance = 1e-10;

enum class CanonicalForm { GammaPositive, GammaNonpositive };

/// Four-parameter canonical representation of a two-state MAP.
///
///   GammaPositive:    D0 = [x y; 0 u],  D1 = [-x-y 0; v -u-v]
///   GammaNonpositive: D0 = [x y; 0 u],  D1 = [0 -x-y; -u-v v]
///
/// with x, u, x+y, u+v <= 0 and y, v >= 0.
struct CanonicalMap2 {
  CanonicalForm form = CanonicalForm::GammaPositive;
  double x = -1.0;
  double y = 0.0;
  double u = -1.0;
  double v = 0.0;

  bool satisfies_constraints() const {
    return x <= 0 && u <= 0 && y >= 0 && v >= 0 && x + y <= 0 && u + v <= 0;
  }
};

/// A validated two-state Markovian arrival process {D0, D1}. Instances only
/// exist in a valid state; construction throws opmap::Error otherwise.
class Map2 {
 public:
  Map2(const Mat2& d0, const Mat2& d1);

  const Mat2& d0() const { return d0_; }
  const Mat2& d1() const { return d1_; }
  Mat2 generator() const { return d0_ + d1_; }

  /// Canonical parameters, when the model was built from them.
  const std::optional<CanonicalMap2>& canonical() const { return canonical_; }

  friend Map2 expand_canonical(const CanonicalMap2& c);

 private:
  Mat2 d0_;
  Mat2 d1_;
  std::optional<CanonicalMap2> canonical_;
};

Map2 validate_map2(const Mat2& d0, const Mat2& d1);
Map2 expand_canonical(const CanonicalMap2& c);

/// Poisson process of the given rate written as an ergodic two-state MAP
/// (both states emit at rate lambda and redistribute uniformly).
Map2 poisson_embedding(double lambda);

struct StationaryObjects {
  Row2 pi;       // stationary law of D = D0 + D1
  Row2 phi;      // stationary law of the phase at loss epochs
  Mat2 p_star;   // (-D0)^{-1} D1
  double gamma;  // non-unit eigenvalue of p_star
  bool near_periodic = false;  // |gamma| > 1 - 1e-9
};

StationaryObjects stationary_objects(const Map2& m);

/// Q(t) = (I - exp(D0 t)) P*.
Mat2 semi_markov_kernel(const Map2& m, double t);

/// Inter-loss time law {phi, D0} of the stationary process.
struct PhaseType2 {
  Row2 phi;
  Mat2 d0;
};

PhaseType2 inter_loss_distribution(const Map2& m);

double ph_cdf(const PhaseType2& p, double t);
double ph_pdf(const PhaseType2& p, double t);
double ph_survival(const PhaseType2& p, double t);
double ph_quantile(const PhaseType2& p, double q);
/// E(T^n) = n! phi (-D0)^{-n} e.
double ph_moment(const PhaseType2& p, int n);

/// Loss rate lambda* = pi D1 e = 1 / m1.
double arrival_rate(const Map2& m);

/// Lag-1 correlation of consecutive inter-loss times.
double lag1_correlation(const Map2& m);

/// Log of phi e^{D0 t1} D1 ... e^{D0 tn} D1 e with per-step renormalisation.
double log_likelihood(const Map2& m, std::span<const double> times);

/// n consecutive stationary inter-loss times.
std::vector<double> simulate_map2(const Map2& m, std::size_t n_losses, std::uint64_t seed);

}  // namespace opmap
