#include "opmap/severity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "opmap/error.hpp"
#include "opmap/nelder_mead.hpp"

namespace opmap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_std_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

void DplnParams::validate() const {
  if (!(alpha > 0) || !(beta > 0) || !(sigma2 > 0) || !std::isfinite(mu) || !std::isfinite(alpha) ||
      !std::isfinite(beta) || !std::isfinite(sigma2))
    throw Error(ErrorCode::InvalidArgument, "dPlN needs alpha, beta, sigma2 > 0 and finite mu");
}

double log_mills_ratio(double z) {
  if (z < 6.0) {
    const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
    return std::log(tail) - log_std_normal_pdf(z);
  }
  // Continued fraction R(z) = 1 / (z + 1 / (z + 2 / (z + 3 / (z + ...)))).
  double t = z;
  for (int k = 80; k >= 1; --k) t = z + k / t;
  return -std::log(t);
}

DplnSampler::DplnSampler(const DplnParams& p)
    : p_(p), sigma_(std::sqrt(p.sigma2)), upper_probability_(p.beta / (p.alpha + p.beta)) {
  p.validate();
}

double DplnSampler::operator()(Rng& rng) {
  const double z = p_.mu + sigma_ * normal_(rng);
  const double e = unit_exp_(rng);
  const double w = uniform_open(rng) < upper_probability_ ? e / p_.alpha : -e / p_.beta;
  return std::exp(z + w);
}

std::vector<double> dpln_sample(const DplnParams& p, std::size_t n, std::uint64_t seed) {
  DplnSampler draw(p);
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = draw(rng);
  return out;
}

double dpln_moment(const DplnParams& p, double r) {
  p.validate();
  if (r >= p.alpha || r <= -p.beta)
    throw Error(ErrorCode::InfiniteMoment, "moment of order " + std::to_string(r) + " is infinite");
  return p.alpha * p.beta / ((p.alpha - r) * (p.beta + r)) * std::exp(r * p.mu + 0.5 * r * r * p.sigma2);
}

double dpln_log_pdf(const DplnParams& p, double x) {
  if (!(x > 0)) throw Error(ErrorCode::NonpositiveX, "dPlN support is x > 0");
  if (std::isinf(x)) return -kInf;
  const double sigma = std::sqrt(p.sigma2);
  const double y = std::log(x);
  const double z = (y - p.mu) / sigma;
  const double upper = log_mills_ratio(p.alpha * sigma - z);
  const double lower = log_mills_ratio(p.beta * sigma + z);
  const double log_g = std::log(p.alpha * p.beta / (p.alpha + p.beta)) + log_std_normal_pdf(z) + log_add(upper, lower);
  return log_g - y;
}

double dpln_pdf(const DplnParams& p, double x) { return std::exp(dpln_log_pdf(p, x)); }

double dpln_cdf(const DplnParams& p, double x) {
  if (!(x > 0)) throw Error(ErrorCode::NonpositiveX, "dPlN support is x > 0");
  if (std::isinf(x)) return 1.0;
  const double sigma = std::sqrt(p.sigma2);
  const double z = (std::log(x) - p.mu) / sigma;
  const double base = log_std_normal_pdf(z) - std::log(p.alpha + p.beta);
  const double upper = std::exp(base + std::log(p.beta) + log_mills_ratio(p.alpha * sigma - z));
  const double lower = std::exp(base + std::log(p.alpha) + log_mills_ratio(p.beta * sigma + z));
  const double normal_cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double normal_sf = 0.5 * std::erfc(z / std::numbers::sqrt2);
  // Use whichever side avoids cancellation.
  const double cdf = z < 0 ? normal_cdf - upper + lower : 1.0 - (normal_sf + upper - lower);
  return std::clamp(cdf, 0.0, 1.0);
}

double dpln_quantile(const DplnParams& p, double q) {
  p.validate();
  if (!(q > 0 && q < 1)) throw Error(ErrorCode::OutOfRangeQuantile, "q must lie in (0, 1)");
  const double sigma = std::sqrt(p.sigma2);
  double lo = p.mu - sigma;
  double hi = p.mu + sigma;
  auto cdf_log = [&](double y) { return dpln_cdf(p, std::exp(y)); };
  double step = sigma + 1.0 / p.beta;
  while (cdf_log(lo) > q) {
    lo -= step;
    step *= 2;
  }
  step = sigma + 1.0 / p.alpha;
  while (cdf_log(hi) < q) {
    hi += step;
    step *= 2;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf_log(mid) < q ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double dpln_log_likelihood(const DplnParams& p, std::span<const double> data) {
  p.validate();
  double acc = 0.0;
  for (double x : data) acc += dpln_log_pdf(p, x);
  return acc;
}

DplnFit dpln_fit_mle(std::span<const double> data, const DplnFitOptions& options) {
  if (data.size() < 20) throw Error(ErrorCode::TooShort, "need at least 20 severities");
  double mean = 0.0;
  for (double x : data) {
    if (!(x > 0) || !std::isfinite(x)) throw Error(ErrorCode::NonpositiveX, "severities must be positive");
    mean += std::log(x);
  }
  const double n = static_cast<double>(data.size());
  mean /= n;
  double var = 0.0;
  for (double x : data) var += (std::log(x) - mean) * (std::log(x) - mean);
  var /= n - 1.0;
  if (!(var > 1e-12)) throw Error(ErrorCode::OptimizerFailed, "log-severities have zero spread");

  // Split the log-scale variance between the normal and the two exponential
  // components: var(log X) = sigma2 + 1/alpha^2 + 1/beta^2.
  DplnParams start{3.0, 3.0, mean, 0.0};
  if (var > 1.5 * (2.0 / 9.0)) {
    start.sigma2 = var - 2.0 / 9.0;
  } else {
    start.sigma2 = 0.5 * var;
    start.alpha = start.beta = std::sqrt(2.0 / (0.5 * var));
  }

  auto unpack = [&](const Eigen::Vector4d& z) { return DplnParams{std::exp(z(0)), std::exp(z(1)), z(2), std::exp(z(3))}; };
  auto objective = [&](const Eigen::Vector4d& z) {
    const double ll = dpln_log_likelihood(unpack(z), data);
    return std::isfinite(ll) ? -ll / n : kInf;
  };
  Eigen::Vector4d z0(std::log(start.alpha), std::log(start.beta), start.mu, std::log(start.sigma2));

  DplnFit fit;
  fit.start = start;
  fit.start_loglik = dpln_log_likelihood(start, data);

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.tolerance = options.tolerance;
  nm.initial_step = 0.5;
  auto r = nelder_mead<4>(objective, z0, nm);
  nm.initial_step = 0.05;
  const auto polished = nelder_mead<4>(objective, r.x, nm);
  fit.iterations = r.iterations + polished.iterations;
  fit.converged = polished.converged;
  if (!std::isfinite(polished.value)) throw Error(ErrorCode::OptimizerFailed, "likelihood is not finite");
  fit.params = unpack(polished.x);
  fit.loglik = -polished.value * n;
  if (fit.loglik < fit.start_loglik) {
    fit.params = start;
    fit.loglik = fit.start_loglik;
  }
  return fit;
}

}  // namespace opmap
