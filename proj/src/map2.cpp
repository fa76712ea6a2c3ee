#include "opmap/map2.hpp"

#include <cmath>
#include <limits>

#include "opmap/error.hpp"
#include "opmap/random.hpp"

namespace opmap {

namespace {

void check_finite(const Mat2& m, const char* name) {
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " has non-finite entries");
}

}  // namespace

Map2::Map2(const Mat2& d0, const Mat2& d1) : d0_(d0), d1_(d1) {
  check_finite(d0, "D0");
  check_finite(d1, "D1");
  if (d0(0, 1) < 0 || d0(1, 0) < 0) throw Error(ErrorCode::NegativeRate, "off-diagonal entry of D0 is negative");
  if ((d1.array() < 0).any()) throw Error(ErrorCode::NegativeRate, "D1 has a negative entry");
  if (!(d0(0, 0) < 0) || !(d0(1, 1) < 0)) throw Error(ErrorCode::UnstableD0, "diagonal of D0 must be negative");
  for (int i = 0; i < 2; ++i) {
    const double row = d0(i, 0) + d0(i, 1) + d1(i, 0) + d1(i, 1);
    if (std::abs(row) > kGeneratorTolerance)
      throw Error(ErrorCode::NotAGenerator, "row " + std::to_string(i) + " of D0 + D1 sums to " + std::to_string(row));
  }
  // Nonnegative off-diagonals make the eigenvalues real; both negative iff
  // trace < 0 and det > 0.
  const double det = d0.determinant();
  if (!(det > 0) || !(d0.trace() < 0)) throw Error(ErrorCode::UnstableD0, "D0 is singular or not stable");
}

Map2 validate_map2(const Mat2& d0, const Mat2& d1) { return Map2(d0, d1); }

Map2 expand_canonical(const CanonicalMap2& c) {
  if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.u) || !std::isfinite(c.v))
    throw Error(ErrorCode::ConstraintViolated, "canonical parameters must be finite");
  if (!c.satisfies_constraints())
    throw Error(ErrorCode::ConstraintViolated, "need x, u, x+y, u+v <= 0 and y, v >= 0");
  Mat2 d0;
  Mat2 d1;
  d0 << c.x, c.y, 0.0, c.u;
  if (c.form == CanonicalForm::GammaPositive) {
    d1 << -(c.x + c.y), 0.0, c.v, -(c.u + c.v);
  } else {
    d1 << 0.0, -(c.x + c.y), -(c.u + c.v), c.v;
  }
  Map2 m(d0, d1);
  m.canonical_ = c;
  return m;
}

Map2 poisson_embedding(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "Poisson rate must be positive");
  Mat2 d0 = -lambda * Mat2::Identity();
  Mat2 d1 = Mat2::Constant(lambda / 2);
  return Map2(d0, d1);
}

StationaryObjects stationary_objects(const Map2& m) {
  const Mat2 d = m.generator();
  if (!(d(0, 1) + d(1, 0) > 0))
    throw Error(ErrorCode::SingularSystem, "D has no coupling between states; pi is not unique");
  StationaryObjects s;
  s.pi = left_null_probability<double>(d);
  s.p_star = (-m.d0()).partialPivLu().solve(m.d1());
  const double coupling = s.p_star(0, 1) + s.p_star(1, 0);
  if (!(coupling > 1e-15))
    throw Error(ErrorCode::Reducible, "P* is the identity; phi is not unique");
  s.phi = left_null_probability<double>(s.p_star - Mat2::Identity());
  s.gamma = s.p_star.trace() - 1.0;
  s.near_periodic = std::abs(s.gamma) > 1.0 - 1e-9;
  return s;
}

Mat2 semi_markov_kernel(const Map2& m, double t) {
  if (t < 0 || std::isnan(t)) throw Error(ErrorCode::NegativeTime, "t must be >= 0");
  const Mat2 p_star = (-m.d0()).partialPivLu().solve(m.d1());
  if (std::isinf(t)) return p_star;
  return (Mat2::Identity() - expm2(m.d0(), t)) * p_star;
}

PhaseType2 inter_loss_distribution(const Map2& m) { return {stationary_objects(m).phi, m.d0()}; }

double ph_survival(const PhaseType2& p, double t) {
  if (t < 0 || std::isnan(t)) throw Error(ErrorCode::NegativeTime, "t must be >= 0");
  return (p.phi * expm2(p.d0, t) * ones2()).value();
}

double ph_cdf(const PhaseType2& p, double t) { return 1.0 - ph_survival(p, t); }

double ph_pdf(const PhaseType2& p, double t) {
  if (t < 0 || std::isnan(t)) throw Error(ErrorCode::NegativeTime, "t must be >= 0");
  return (p.phi * expm2(p.d0, t) * (-p.d0) * ones2()).value();
}

double ph_moment(const PhaseType2& p, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 1");
  const auto lu = (-p.d0).partialPivLu();
  Col2 x = ones2();
  double factorial = 1.0;
  for (int k = 1; k <= n; ++k) {
    x = lu.solve(x);
    factorial *= k;
  }
  return factorial * (p.phi * x).value();
}

double ph_quantile(const PhaseType2& p, double q) {
  if (!(q > 0 && q < 1)) throw Error(ErrorCode::OutOfRangeQuantile, "q must lie in (0, 1)");
  double lo = 0.0;
  double hi = ph_moment(p, 1);
  while (ph_cdf(p, hi) < q) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = ph_cdf(p, mid);
    if (std::abs(f - q) < 1e-12) return mid;
    if (f < q)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

double arrival_rate(const Map2& m) {
  const auto s = stationary_objects(m);
  return (s.pi * m.d1() * ones2()).value();
}

double lag1_correlation(const Map2& m) {
  const auto s = stationary_objects(m);
  const PhaseType2 ph{s.phi, m.d0()};
  const double m1 = ph_moment(ph, 1);
  const double m2 = ph_moment(ph, 2);
  const double var = m2 - m1 * m1;
  if (!(var > 1e-14 * m2)) throw Error(ErrorCode::DegenerateVariance, "inter-loss time variance vanishes");
  return s.gamma * (m2 / 2 - m1 * m1) / var;
}

double log_likelihood(const Map2& m, std::span<const double> times) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "trace is empty");
  for (double t : times)
    if (!(t >= 0)) throw Error(ErrorCode::NegativeDuration, "inter-loss durations must be >= 0");

  const auto s = stationary_objects(m);
  const MatrixExp2<double> exp_d0(m.d0());
  Row2 v = s.phi;
  double log_scale = 0.0;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  if (exp_d0.kind() == MatrixExp2<double>::Kind::RealDistinct) {
    // exp(D0 t) D1 = e^{l1 t} (P1 D1 + e^{(l2 - l1) t} P2 D1), l1 > l2.
    const Mat2 b1 = exp_d0.projector1() * m.d1();
    const Mat2 b2 = exp_d0.projector2() * m.d1();
    const double l1 = exp_d0.lambda1();
    const double gap = exp_d0.lambda2() - l1;
    for (double t : times) {
      const Row2 next = v * b1 + std::exp(gap * t) * (v * b2);
      const double sum = next.sum();
      if (!(sum > 0)) return kNegInf;
      log_scale += l1 * t + std::log(sum);
      v = next / sum;
    }
    return log_scale;
  }
  for (double t : times) {
    const Row2 next = v * exp_d0(t) * m.d1();
    const double sum = next.sum();
    if (!(sum > 0)) return kNegInf;
    log_scale += std::log(sum);
    v = next / sum;
  }
  return log_scale;
}

std::vector<double> simulate_map2(const Map2& m, std::size_t n_losses, std::uint64_t seed) {
  const auto s = stationary_objects(m);
  Rng rng(seed);
  std::exponential_distribution<double> unit_exp(1.0);
  const Mat2& d0 = m.d0();
  const Mat2& d1 = m.d1();
  const double rate[2] = {-d0(0, 0), -d0(1, 1)};

  int state = uniform_open(rng) < s.phi(0) ? 0 : 1;
  std::vector<double> times;
  times.reserve(n_losses);
  double elapsed = 0.0;
  while (times.size() < n_losses) {
    elapsed += unit_exp(rng) / rate[state];
    const int other = 1 - state;
    const double pick = uniform_open(rng) * rate[state];
    const double hidden = d0(state, other);
    if (pick < hidden) {
      state = other;
      continue;
    }
    state = (pick < hidden + d1(state, 0)) ? 0 : 1;
    times.push_back(elapsed);
    elapsed = 0.0;
  }
  return times;
}

}  // namespace opmap
