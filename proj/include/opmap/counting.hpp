#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "opmap/map2.hpp"
#include "opmap/random.hpp"

namespace opmap {

/// Distribution of the stationary loss count N(tau).
struct CountingDist {
  double tau = 0.0;
  /// P(n, tau)_{ij} = P(N = n, J(tau) = j | J(0) = i), n = 0..n_max.
  std::vector<Mat2> p_matrices;
  /// P(N(tau) = n) = pi P(n, tau) e.
  std::vector<double> mass;
  /// 1 - sum(mass).
  double truncation_mass = 0.0;
  /// Uniformisation rate and the Poisson tail dropped at truncation.
  double uniformization_rate = 0.0;
  double poisson_tail = 0.0;

  std::size_t n_max() const { return mass.empty() ? 0 : mass.size() - 1; }
  double mean() const;
  double variance() const;
  /// P(N >= n).
  double tail(std::size_t n) const;
};

CountingDist count_distribution(const Map2& m, double tau, double eps = 1e-10);

/// E[N(tau)] = lambda* tau.
double count_mean(const Map2& m, double tau);
double count_variance(const Map2& m, double tau);
double vtm_ratio(const Map2& m, double tau);

/// Covariance of counts on adjacent intervals of length tau, using the
/// asymptotic first-moment matrix M1(tau). The result does not depend on tau
/// and equals the large-tau limit of the exact covariance.
double count_covariance(const Map2& m, double tau);

/// Exact covariance of counts on adjacent intervals: [V(2 tau) - 2 V(tau)] / 2.
double adjacent_count_covariance(const Map2& m, double tau);

struct CountMoments {
  double mean;
  double variance;
  double vtm;
  double covariance;
};

CountMoments count_moments(const Map2& m, double tau);

/// Draws canonical parameters for the overdispersion sweep.
using CanonicalSampler = std::function<CanonicalMap2(Rng&)>;

/// Log-uniform -x, -u on [1e-2, 1e2]; y ~ U[0, -x]; v ~ U[0, -u]; each
/// canonical form with probability 1/2.
CanonicalMap2 sample_sweep_canonical(Rng& rng);

struct VtmSweepRow {
  std::size_t model;
  CanonicalMap2 params;
  double tau;
  double vtm;
};

struct VtmSweep {
  std::vector<VtmSweepRow> rows;
  std::vector<double> taus;
  /// Fraction of evaluated models with VtM < 1, per tau.
  std::vector<double> fraction_below_one;
  /// Draws whose moments could not be evaluated (singular corrections).
  std::size_t skipped = 0;
};

VtmSweep vtm_sweep(std::size_t n_models, const std::vector<double>& taus, std::uint64_t seed,
                   const CanonicalSampler& sampler = sample_sweep_canonical);

}  // namespace opmap
