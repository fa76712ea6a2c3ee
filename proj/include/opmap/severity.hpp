#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "opmap/random.hpp"

namespace opmap {

/// Double-Pareto-Lognormal law: X = exp(Z + W), Z ~ N(mu, sigma2), W skewed
/// Laplace with upper rate alpha and lower rate beta. sigma2 is the variance
/// (sigma = 1.29 is stored as 1.6641).
struct DplnParams {
  double alpha = 1.0;
  double beta = 1.0;
  double mu = 0.0;
  double sigma2 = 1.0;

  void validate() const;
};

/// Composition sampler: Z ~ N(mu, sigma2); W = +Exp(alpha) with
/// probability beta / (alpha + beta), otherwise -Exp(beta); X = exp(Z + W).
class DplnSampler {
 public:
  explicit DplnSampler(const DplnParams& p);
  double operator()(Rng& rng);

 private:
  DplnParams p_;
  double sigma_;
  double upper_probability_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> unit_exp_{1.0};
};

std::vector<double> dpln_sample(const DplnParams& p, std::size_t n, std::uint64_t seed);

/// E(X^r) for r < alpha.
double dpln_moment(const DplnParams& p, double r);

double dpln_pdf(const DplnParams& p, double x);
double dpln_log_pdf(const DplnParams& p, double x);
double dpln_cdf(const DplnParams& p, double x);
double dpln_quantile(const DplnParams& p, double q);

/// log of the Mills ratio R(z) = (1 - Phi(z)) / phi(z).
double log_mills_ratio(double z);

struct DplnFitOptions {
  int max_iterations = 4000;
  double tolerance = 1e-10;
};

struct DplnFit {
  DplnParams params;
  double loglik = 0.0;
  DplnParams start;
  double start_loglik = 0.0;
  int iterations = 0;
  bool converged = false;
};

double dpln_log_likelihood(const DplnParams& p, std::span<const double> data);
DplnFit dpln_fit_mle(std::span<const double> data, const DplnFitOptions& options = {});

}  // namespace opmap
