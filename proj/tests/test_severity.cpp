#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "opmap/error.hpp"
#include "opmap/published.hpp"
#include "opmap/severity.hpp"
#include "oracles.hpp"

using namespace opmap;

namespace {

const std::vector<DplnParams> kParams{
    {1.24, 1.8, 10.4, 1.6641}, {3.0, 3.0, 0.0, 1.0}, {1.5, 0.7, 2.0, 0.25}, {6.0, 2.0, -1.0, 2.0}, {2.2, 5.0, 5.0, 0.5}};

double ks_statistic(std::vector<double> x, auto cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST_CASE("dPlN density agrees with direct quadrature") {
  for (const auto& p : kParams) {
    const double sigma = std::sqrt(p.sigma2);
    for (double k : {-4.0, -1.5, 0.0, 0.7, 2.0, 5.0}) {
      const double y = p.mu + k * sigma;
      const double x = std::exp(y);
      const double want = oracle::dpln_log_scale_density(p, y) / x;
      CHECK(dpln_pdf(p, x) == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("dPlN cdf integrates the density and inverts the quantile") {
  for (const auto& p : kParams) {
    const double sigma = std::sqrt(p.sigma2);
    const double lo = p.mu - 30 * sigma - 60 / p.beta;
    const int steps = 40000;
    double acc = 0.0;
    double prev = 0.0;
    const double h = (p.mu + 3 * sigma - lo) / steps;
    for (int i = 0; i <= steps; ++i) {
      const double y = lo + i * h;
      const double g = dpln_pdf(p, std::exp(y)) * std::exp(y);
      if (i > 0) acc += 0.5 * h * (g + prev);
      prev = g;
    }
    CHECK(dpln_cdf(p, std::exp(p.mu + 3 * sigma)) == doctest::Approx(acc).epsilon(1e-6));
    for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1 - 1e-9}) {
      const double x = dpln_quantile(p, q);
      CHECK(x > 0);
      CHECK(dpln_cdf(p, x) == doctest::Approx(q).epsilon(1e-9));
    }
  }
}

TEST_CASE("dPlN density integrates to one") {
  for (const auto& p : kParams) {
    const double sigma = std::sqrt(p.sigma2);
    const double lo = p.mu - 30 * sigma - 80 / p.beta;
    const double hi = p.mu + 30 * sigma + 80 / p.alpha;
    const int steps = 200000;
    const double h = (hi - lo) / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double y = lo + i * h;
      const double g = dpln_pdf(p, std::exp(y)) * std::exp(y);
      acc += (i == 0 || i == steps ? 0.5 : 1.0) * g * h;
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("dPlN power-law tails") {
  for (const auto& p : kParams) {
    const double sigma = std::sqrt(p.sigma2);
    const double y = p.mu + 12 * sigma + 40 / p.alpha;
    const double slope = (dpln_log_pdf(p, std::exp(y + 1)) - dpln_log_pdf(p, std::exp(y))) / 1.0;
    CHECK(slope == doctest::Approx(-(p.alpha + 1)).epsilon(1e-3));
    const double yl = p.mu - 12 * sigma - 40 / p.beta;
    const double lower = (dpln_log_pdf(p, std::exp(yl)) - dpln_log_pdf(p, std::exp(yl - 1))) / 1.0;
    CHECK(lower == doctest::Approx(p.beta - 1).epsilon(1e-3));
  }
}

TEST_CASE("Mills ratio is continuous across branches") {
  for (double z : {5.99, 6.0, 6.01}) {
    const long double tail = 0.5L * std::erfc(static_cast<long double>(z) / std::sqrt(2.0L));
    const long double dens = std::exp(-0.5L * z * z) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
    CHECK(log_mills_ratio(z) == doctest::Approx(static_cast<double>(std::log(tail / dens))).epsilon(1e-12));
  }
  CHECK(std::isfinite(log_mills_ratio(60.0)));
  CHECK(log_mills_ratio(60.0) == doctest::Approx(-std::log(60.0)).epsilon(1e-3));
  CHECK(std::isfinite(log_mills_ratio(-30.0)));
}

TEST_CASE("dPlN sampler") {
  const DplnParams lognormal_limit{1e4, 1e4, 1.0, 0.49};
  const auto x = dpln_sample(lognormal_limit, 20000, 1);
  CHECK(std::all_of(x.begin(), x.end(), [](double v) { return v > 0; }));
  const double d = ks_statistic(x, [](double v) { return 0.5 * std::erfc(-(std::log(v) - 1.0) / (0.7 * std::numbers::sqrt2)); });
  CHECK(d < 1.36 / std::sqrt(20000.0));

  for (std::size_t i = 0; i < kParams.size(); ++i) {
    const auto s = dpln_sample(kParams[i], 200000, 10 + i);
    CHECK(ks_statistic(s, [&](double v) { return dpln_cdf(kParams[i], v); }) < 1.63 / std::sqrt(200000.0));
    std::vector<double> root(s.size());
    std::transform(s.begin(), s.end(), root.begin(), [](double v) { return std::sqrt(v); });
    CHECK(oracle::iid_mean(root).within(dpln_moment(kParams[i], 0.5)));
  }
}

TEST_CASE("dPlN moments") {
  const DplnParams p = published::severity();
  CHECK(std::abs(dpln_moment(p, 1.0) - 2.508e5) < 500);
  CHECK_THROWS_AS(dpln_moment(p, 1.24), Error);
  CHECK_THROWS_AS(dpln_moment(p, 2.0), Error);
  CHECK_THROWS_AS(dpln_moment(p, -1.8), Error);
  CHECK(dpln_moment(p, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(dpln_pdf(p, 0.0), Error);
  CHECK_THROWS_AS(dpln_cdf(p, -1.0), Error);
  CHECK_THROWS_AS(dpln_quantile(p, 1.0), Error);
  CHECK_THROWS_AS((DplnParams{0.0, 1.0, 0.0, 1.0}.validate()), Error);
}

TEST_CASE("dPlN tail index from a Hill estimate") {
  const DplnParams p = published::severity();
  auto s = dpln_sample(p, 1'000'000, 21);
  std::sort(s.begin(), s.end(), std::greater<>());
  const std::size_t k = 2000;
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(s[i] / s[k]);
  const double hill = static_cast<double>(k) / acc;
  CHECK(hill == doctest::Approx(p.alpha).epsilon(0.1));
}

TEST_CASE("dPlN log-scale KDE matches the smoothed density") {
  const DplnParams p = published::severity();
  const std::size_t n = 100000;
  const auto s = dpln_sample(p, n, 33);
  const double h = 0.25;
  const double sigma = std::sqrt(p.sigma2);
  for (double k : {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
    const double y0 = p.mu + k * sigma;
    std::vector<double> kern(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (std::log(s[i]) - y0) / h;
      kern[i] = std::exp(-0.5 * z * z) / (h * std::sqrt(2 * std::numbers::pi));
    }
    double smoothed = 0.0;
    const int steps = 400;
    const double dy = 16 * h / steps;
    for (int i = 0; i <= steps; ++i) {
      const double y = y0 - 8 * h + i * dy;
      const double z = (y - y0) / h;
      const double w = std::exp(-0.5 * z * z) / (h * std::sqrt(2 * std::numbers::pi));
      smoothed += (i == 0 || i == steps ? 0.5 : 1.0) * w * dpln_pdf(p, std::exp(y)) * std::exp(y) * dy;
    }
    CHECK(oracle::iid_mean(kern).within(smoothed));
  }
}

TEST_CASE("dPlN maximum likelihood") {
  const DplnParams truth = published::severity();
  const auto s = dpln_sample(truth, 100000, 44);
  const auto fit = dpln_fit_mle(s);
  CHECK(fit.params.alpha == doctest::Approx(truth.alpha).epsilon(0.1 / truth.alpha));
  CHECK(fit.loglik >= dpln_log_likelihood(truth, s));
  CHECK(fit.loglik >= fit.start_loglik);

  std::vector<double> lognormal(20000);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(3.0, 0.8);
  for (auto& v : lognormal) v = std::exp(z(rng));
  const auto lfit = dpln_fit_mle(lognormal);
  CHECK(lfit.params.sigma2 == doctest::Approx(0.64).epsilon(0.1));
  CHECK(lfit.params.alpha > 5);
  CHECK(lfit.params.beta > 5);

  const std::vector<double> constant(100, 7.0);
  try {
    dpln_fit_mle(constant);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OptimizerFailed);
  }
  CHECK_THROWS_AS(dpln_fit_mle(std::vector<double>(5, 1.0)), Error);
}
