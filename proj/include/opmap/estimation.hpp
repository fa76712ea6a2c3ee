#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "opmap/map2.hpp"

namespace opmap {

/// Sample raw moments and lag-1 autocorrelation of an inter-loss trace.
struct EmpiricalSummary {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double rho = 0.0;
  std::size_t n = 0;
};

EmpiricalSummary empirical_summary(std::span<const double> times);

/// Theoretical (m1, m2, m3, rho) of a model, in summary form.
EmpiricalSummary model_summary(const Map2& m);

/// Squared relative moment distance plus squared correlation gap.
double moment_distance(const EmpiricalSummary& model, const EmpiricalSummary& target);

/// Unconstrained coordinates (a, b, s1, s2) for the canonical parameters:
/// x = -e^a, u = -e^b, y = -x sigmoid(s1), v = -u sigmoid(s2). Every point
/// maps to a feasible model.
using CanonicalCoordinates = Eigen::Vector4d;
CanonicalMap2 from_coordinates(const CanonicalCoordinates& z, CanonicalForm form);
CanonicalCoordinates to_coordinates(const CanonicalMap2& c);

struct MomentsMatch {
  CanonicalMap2 params;
  double delta = 0.0;
};

MomentsMatch moments_match(const EmpiricalSummary& summary, CanonicalForm form, int restarts = 8,
                           std::uint64_t seed = 1);

enum class FormChoice { Auto, GammaPositive, GammaNonpositive };

struct FitOptions {
  int restarts = 8;
  int max_iterations = 2000;
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
  FormChoice form = FormChoice::Auto;
};

struct FitResult {
  CanonicalMap2 params;
  Map2 model;
  double loglik;
  /// Best log-likelihood reached under each form (NaN when not tried).
  double loglik_gamma_positive;
  double loglik_gamma_nonpositive;
  CanonicalMap2 warm_start;
  double warm_start_loglik;
  double delta_at_start;
  bool converged;
  int iterations;
};

FitResult fit_mle(std::span<const double> times, const FitOptions& options = {});

}  // namespace opmap
