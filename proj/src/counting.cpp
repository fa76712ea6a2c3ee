#include "opmap/counting.hpp"

#include <cmath>

#include "opmap/error.hpp"

namespace opmap {

namespace {

struct Moments {
  Row2 pi;
  double rate;
  Mat2 d;
};

Moments moments_inputs(const Map2& m) {
  const auto s = stationary_objects(m);
  return {s.pi, (s.pi * m.d1() * ones2()).value(), m.generator()};
}

Mat2 checked_inverse(const Mat2& a, const char* what) {
  const double det = a.determinant();
  if (!(std::abs(det) > 1e-300) || !std::isfinite(det))
    throw Error(ErrorCode::SingularCorrection, std::string(what) + " is singular");
  return a.inverse();
}

}  // namespace

double CountingDist::mean() const {
  double acc = 0.0;
  for (std::size_t n = 0; n < mass.size(); ++n) acc += static_cast<double>(n) * mass[n];
  return acc;
}

double CountingDist::variance() const {
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t n = 0; n < mass.size(); ++n) {
    const double d = static_cast<double>(n) - mu;
    acc += d * d * mass[n];
  }
  return acc;
}

double CountingDist::tail(std::size_t n) const {
  double below = 0.0;
  for (std::size_t k = 0; k < std::min(n, mass.size()); ++k) below += mass[k];
  return 1.0 - below;
}

CountingDist count_distribution(const Map2& m, double tau, double eps) {
  if (!(tau > 0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");

  const auto s = stationary_objects(m);
  const Mat2 d = m.generator();
  const double theta =
      1.01 * std::max({-m.d0()(0, 0), -m.d0()(1, 1), -d(0, 0), -d(1, 1)});
  const double lambda = theta * tau;

  // Poisson(lambda) weights in log space; stop once the upper tail is < eps.
  std::vector<double> weights;
  double cumulative = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double logw = -lambda + static_cast<double>(k) * std::log(lambda) - std::lgamma(k + 1.0);
    const double w = std::exp(logw);
    weights.push_back(w);
    cumulative += w;
    if (static_cast<double>(k) > lambda && 1.0 - cumulative < eps) break;
  }

  const Mat2 a0 = Mat2::Identity() + m.d0() / theta;
  const Mat2 a1 = m.d1() / theta;

  // coeffs[n] holds the z^n coefficient of (A0 + z A1)^k.
  const std::size_t kmax = weights.size() - 1;
  std::vector<Mat2> coeffs{Mat2::Identity()};
  coeffs.reserve(kmax + 1);
  CountingDist out;
  out.tau = tau;
  out.uniformization_rate = theta;
  out.poisson_tail = std::max(0.0, 1.0 - cumulative);
  out.p_matrices.assign(kmax + 1, Mat2::Zero());
  for (std::size_t k = 0; k <= kmax; ++k) {
    for (std::size_t n = 0; n < coeffs.size(); ++n) out.p_matrices[n] += weights[k] * coeffs[n];
    if (k == kmax) break;
    coeffs.push_back(coeffs.back() * a1);
    for (std::size_t n = coeffs.size() - 2; n > 0; --n) coeffs[n] = coeffs[n] * a0 + coeffs[n - 1] * a1;
    coeffs[0] = coeffs[0] * a0;
  }

  // Drop the negligible far tail of the count.
  std::size_t last = kmax;
  while (last > 0 && out.p_matrices[last].maxCoeff() == 0.0) --last;
  out.p_matrices.resize(last + 1);
  out.mass.resize(last + 1);
  double total = 0.0;
  for (std::size_t n = 0; n <= last; ++n) {
    out.mass[n] = (s.pi * out.p_matrices[n] * ones2()).value();
    total += out.mass[n];
  }
  out.truncation_mass = 1.0 - total;
  return out;
}

double count_mean(const Map2& m, double tau) {
  if (!(tau >= 0)) throw Error(ErrorCode::InvalidArgument, "tau must be >= 0");
  return arrival_rate(m) * tau;
}

double count_variance(const Map2& m, double tau) {
  if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  const auto in = moments_inputs(m);
  const Mat2 e_pi = ones2() * in.pi;
  const Mat2 z = checked_inverse(e_pi + in.d, "e pi + D");
  const double mean = in.rate * tau;
  const Col2 d1e = m.d1() * ones2();
  const Row2 pid1 = in.pi * m.d1();
  const double linear = (pid1 * z * d1e).value();
  const double transient = (pid1 * (Mat2::Identity() - expm2(in.d, tau)) * z * z * d1e).value();
  return (1.0 + 2.0 * in.rate) * mean - 2.0 * linear * tau - 2.0 * transient;
}

double vtm_ratio(const Map2& m, double tau) { return count_variance(m, tau) / count_mean(m, tau); }

double count_covariance(const Map2& m, double tau) {
  if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  const auto in = moments_inputs(m);
  const Mat2 e_pi = ones2() * in.pi;
  const Mat2 w = checked_inverse(e_pi - in.d, "e pi - D");
  const double mean = in.rate * tau;
  const Mat2 m1 = mean * e_pi + w * m.d1() * e_pi + ones2() * (in.pi * m.d1() * w) -
                  2.0 * (mean / tau) * e_pi;
  const double second = (in.pi * m1 * m1 * ones2()).value();
  const double left = (in.pi * m1 * ones2()).value();
  const double right = (in.pi * expm2(in.d, tau) * m1 * ones2()).value();
  return second - left * right;
}

double adjacent_count_covariance(const Map2& m, double tau) {
  return 0.5 * (count_variance(m, 2.0 * tau) - 2.0 * count_variance(m, tau));
}

CountMoments count_moments(const Map2& m, double tau) {
  const double mean = count_mean(m, tau);
  const double var = count_variance(m, tau);
  return {mean, var, var / mean, count_covariance(m, tau)};
}

CanonicalMap2 sample_sweep_canonical(Rng& rng) {
  std::uniform_real_distribution<double> log_rate(-2.0, 2.0);
  CanonicalMap2 c;
  c.x = -std::pow(10.0, log_rate(rng));
  c.u = -std::pow(10.0, log_rate(rng));
  c.y = std::uniform_real_distribution<double>(0.0, -c.x)(rng);
  c.v = std::uniform_real_distribution<double>(0.0, -c.u)(rng);
  c.form = std::bernoulli_distribution(0.5)(rng) ? CanonicalForm::GammaPositive : CanonicalForm::GammaNonpositive;
  return c;
}

VtmSweep vtm_sweep(std::size_t n_models, const std::vector<double>& taus, std::uint64_t seed,
                   const CanonicalSampler& sampler) {
  if (n_models < 1) throw Error(ErrorCode::InvalidArgument, "need at least one model");
  VtmSweep out;
  out.taus = taus;
  std::vector<std::size_t> below(taus.size(), 0);
  std::size_t evaluated = 0;
  Rng rng(seed);
  for (std::size_t i = 0; i < n_models; ++i) {
    const CanonicalMap2 c = sampler(rng);
    std::vector<double> ratios;
    try {
      const Map2 m = expand_canonical(c);
      for (double tau : taus) ratios.push_back(vtm_ratio(m, tau));
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    bool finite = true;
    for (double r : ratios) finite = finite && std::isfinite(r);
    if (!finite) {
      ++out.skipped;
      continue;
    }
    ++evaluated;
    for (std::size_t j = 0; j < taus.size(); ++j) {
      out.rows.push_back({i, c, taus[j], ratios[j]});
      if (ratios[j] < 1.0) ++below[j];
    }
  }
  for (std::size_t j = 0; j < taus.size(); ++j)
    out.fraction_below_one.push_back(evaluated ? static_cast<double>(below[j]) / evaluated : 0.0);
  return out;
}

}  // namespace opmap
