#pragma once

// Reference computations used by the tests. They avoid the library's
// closed forms: long-double series, ODE integration and brute simulation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "opmap/counting.hpp"
#include "opmap/error.hpp"
#include "opmap/map2.hpp"
#include "opmap/severity.hpp"

namespace oracle {

using LMat = Eigen::Matrix<long double, 2, 2>;
using LRow = Eigen::Matrix<long double, 1, 2>;

inline LMat widen(const opmap::Mat2& a) { return a.cast<long double>(); }

/// e^{at} by a 200-term Taylor series on a / 2^k, then k squarings.
inline opmap::Mat2 series_expm(const opmap::Mat2& a, double t, int terms = 200) {
  LMat x = widen(a) * static_cast<long double>(t);
  int k = 0;
  while (x.cwiseAbs().rowwise().sum().maxCoeff() > 0.5L) {
    x /= 2.0L;
    ++k;
  }
  LMat sum = LMat::Identity();
  LMat term = LMat::Identity();
  for (int n = 1; n < terms; ++n) {
    term = term * x / static_cast<long double>(n);
    sum += term;
  }
  for (int i = 0; i < k; ++i) sum = sum * sum;
  return sum.cast<double>();
}

inline LMat inverse(const LMat& a) {
  const long double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  LMat inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv / det;
}

/// Stationary law of the generator D = D0 + D1.
inline LRow stationary_pi(const opmap::Map2& m) {
  const LMat q = widen(m.d0() + m.d1());
  LRow pi;
  pi << q(1, 0), q(0, 1);
  return pi / pi.sum();
}

/// Phase law at loss epochs: proportional to pi D1.
inline LRow stationary_phi(const opmap::Map2& m) {
  LRow phi = stationary_pi(m) * widen(m.d1());
  return phi / phi.sum();
}

inline LMat p_star(const opmap::Map2& m) { return inverse(-widen(m.d0())) * widen(m.d1()); }

/// n! phi (-D0)^{-n} e.
inline double ph_moment(const opmap::Map2& m, int n) {
  const LMat inv = inverse(-widen(m.d0()));
  LRow v = stationary_phi(m);
  long double fact = 1.0L;
  for (int k = 1; k <= n; ++k) {
    v = v * inv;
    fact *= k;
  }
  return static_cast<double>(fact * v.sum());
}

/// P(N(tau) = n), n = 0..n_max, by RK4 on dp_n/dt = p_n D0 + p_{n-1} D1
/// started from pi.
inline std::vector<double> count_mass_ode(const opmap::Map2& m, double tau, std::size_t n_max, double h_scale = 0.02) {
  const LMat d0 = widen(m.d0());
  const LMat d1 = widen(m.d1());
  const long double rate = std::max(-d0(0, 0), -d0(1, 1));
  const auto steps = static_cast<std::size_t>(std::ceil(tau * rate / h_scale)) + 1;
  const long double h = static_cast<long double>(tau) / static_cast<long double>(steps);
  std::vector<LRow> p(n_max + 1, LRow::Zero());
  p[0] = stationary_pi(m);
  auto deriv = [&](const std::vector<LRow>& x) {
    std::vector<LRow> d(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) d[n] = x[n] * d0 + (n ? LRow(x[n - 1] * d1) : LRow(LRow::Zero()));
    return d;
  };
  auto axpy = [](const std::vector<LRow>& x, const std::vector<LRow>& y, long double a) {
    std::vector<LRow> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) out[n] = x[n] + a * y[n];
    return out;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    const auto k1 = deriv(p);
    const auto k2 = deriv(axpy(p, k1, h / 2));
    const auto k3 = deriv(axpy(p, k2, h / 2));
    const auto k4 = deriv(axpy(p, k3, h));
    for (std::size_t n = 0; n <= n_max; ++n) p[n] += h / 6 * (k1[n] + 2 * k2[n] + 2 * k3[n] + k4[n]);
  }
  std::vector<double> mass(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) mass[n] = static_cast<double>(p[n].sum());
  return mass;
}

/// Gillespie simulation of the phase process.
class MapSimulator {
 public:
  MapSimulator(const opmap::Map2& m, std::uint64_t seed) : m_(m), rng_(seed) {}

  void start_from(const LRow& law) { phase_ = std::bernoulli_distribution(static_cast<double>(law(1)))(rng_) ? 1 : 0; }

  /// Time to the next loss.
  double next_gap() {
    double t = 0.0;
    for (;;) {
      const double out_rate = -m_.d0()(phase_, phase_);
      t += std::exponential_distribution<double>(out_rate)(rng_);
      const int other = 1 - phase_;
      double u = std::uniform_real_distribution<double>(0.0, out_rate)(rng_);
      if (u < m_.d0()(phase_, other)) {
        phase_ = other;
        continue;
      }
      u -= m_.d0()(phase_, other);
      phase_ = u < m_.d1()(phase_, 0) ? 0 : 1;
      return t;
    }
  }

  /// Number of losses in [0, tau) from the current phase, leaving the
  /// process at time tau.
  std::uint32_t count(double tau) {
    std::uint32_t n = 0;
    double t = 0.0;
    for (;;) {
      const double out_rate = -m_.d0()(phase_, phase_);
      t += std::exponential_distribution<double>(out_rate)(rng_);
      if (t >= tau) return n;
      const int other = 1 - phase_;
      double u = std::uniform_real_distribution<double>(0.0, out_rate)(rng_);
      if (u < m_.d0()(phase_, other)) {
        phase_ = other;
        continue;
      }
      u -= m_.d0()(phase_, other);
      phase_ = u < m_.d1()(phase_, 0) ? 0 : 1;
      ++n;
    }
  }

 private:
  opmap::Map2 m_;
  std::mt19937_64 rng_;
  int phase_ = 0;
};

inline std::vector<double> simulate_gaps(const opmap::Map2& m, std::size_t n, std::uint64_t seed) {
  MapSimulator sim(m, seed);
  sim.start_from(stationary_phi(m));
  std::vector<double> out(n);
  for (auto& t : out) t = sim.next_gap();
  return out;
}

struct Estimate {
  double mean;
  double se;

  bool within(double target, double k = 3.0) const { return std::abs(mean - target) <= k * se; }
};

inline Estimate iid_mean(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += v;
  const double mean = s / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Mean with a standard error from non-overlapping batch means, for
/// dependent sequences.
inline Estimate batch_means(const std::vector<double>& x, std::size_t batches = 100) {
  const std::size_t len = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += x[i];
    means.push_back(s / static_cast<double>(len));
  }
  return iid_mean(means);
}

/// log(phi prod_i e^{D0 t_i} D1 e) without rescaling.
inline double direct_log_likelihood(const opmap::Map2& m, const std::vector<double>& times) {
  LRow v = stationary_phi(m);
  const LMat d1 = widen(m.d1());
  for (double t : times) v = v * widen(series_expm(m.d0(), t)) * d1;
  return static_cast<double>(std::log(v.sum()));
}

/// Valid random canonical models from the sweep law.
inline std::vector<opmap::Map2> random_models(std::size_t n, std::uint64_t seed) {
  std::vector<opmap::Map2> out;
  opmap::Rng rng(seed);
  while (out.size() < n) {
    try {
      opmap::Map2 m = opmap::expand_canonical(opmap::sample_sweep_canonical(rng));
      opmap::stationary_objects(m);
      out.push_back(m);
    } catch (const opmap::Error&) {
    }
  }
  return out;
}

}  // namespace oracle

namespace oracle {

/// Ratio of means sum(a) / sum(b) with a batch-means delta-method error.
inline Estimate ratio_estimate(const std::vector<double>& a, const std::vector<double>& b, std::size_t batches = 100) {
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double r = sa / sb;
  const double mb = sb / static_cast<double>(b.size());
  std::vector<double> lin(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) lin[i] = (a[i] - r * b[i]) / mb;
  return {r, batch_means(lin, batches).se};
}

/// Empirical persistence from a simulated trace with standard errors.
struct PersistenceEstimate {
  Estimate p01;
  Estimate p11;
  std::vector<Estimate> short_spell;  // P(S = n), n = 0, 1, 2
  std::vector<Estimate> long_spell;
};

inline PersistenceEstimate estimate_persistence(const std::vector<double>& t, double s) {
  const std::size_t n = t.size() - 1;
  std::vector<double> a01(n), b0(n), a11(n), b1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool now_short = t[i] < s;
    const bool next_long = t[i + 1] >= s;
    b0[i] = now_short;
    a01[i] = now_short && next_long;
    b1[i] = !now_short;
    a11[i] = !now_short && next_long;
  }
  PersistenceEstimate out{ratio_estimate(a01, b0), ratio_estimate(a11, b1), {}, {}};
  const std::size_t m = t.size() - 3;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> s_ind(m), l_ind(m);
    for (std::size_t i = 0; i < m; ++i) {
      bool srun = true;
      bool lrun = true;
      for (int j = 0; j < k; ++j) {
        srun = srun && t[i + j] < s;
        lrun = lrun && t[i + j] >= s;
      }
      s_ind[i] = srun && t[i + k] >= s;
      l_ind[i] = lrun && t[i + k] < s;
    }
    out.short_spell.push_back(batch_means(s_ind));
    out.long_spell.push_back(batch_means(l_ind));
  }
  return out;
}

}  // namespace oracle

namespace oracle {

/// Density of log X for dPlN by direct quadrature of the normal / skewed
/// Laplace convolution (composite Simpson on each side of w = 0).
inline double dpln_log_scale_density(const opmap::DplnParams& p, double y, int intervals = 20000) {
  const long double sigma = std::sqrt(static_cast<long double>(p.sigma2));
  const long double norm = static_cast<long double>(p.alpha) * p.beta / (p.alpha + p.beta);
  auto phi = [&](long double z) { return std::exp(-0.5L * z * z) / (sigma * std::sqrt(2.0L * 3.14159265358979323846L)); };
  auto side = [&](long double rate, long double sign) {
    const long double upper = std::min(60.0L / rate, 40.0L * sigma + std::abs(static_cast<long double>(y) - p.mu));
    const long double h = upper / intervals;
    long double acc = 0.0L;
    for (int i = 0; i <= intervals; ++i) {
      const long double w = i * h;
      const long double f = phi((y - p.mu - sign * w) / sigma) * std::exp(-rate * w);
      acc += f * (i == 0 || i == intervals ? 1 : (i % 2 ? 4 : 2));
    }
    return acc * h / 3;
  };
  return static_cast<double>(norm * (side(p.alpha, 1.0L) + side(p.beta, -1.0L)));
}

}  // namespace oracle
