#include "opmap/estimation.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "opmap/error.hpp"
#include "opmap/nelder_mead.hpp"
#include "opmap/random.hpp"

namespace opmap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double logit(double p) {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

void check_trace(std::span<const double> times) {
  if (times.size() < 4) throw Error(ErrorCode::TooShort, "need at least four inter-loss times");
  for (double t : times)
    if (!(t >= 0) || !std::isfinite(t)) throw Error(ErrorCode::NegativeDuration, "inter-loss times must be finite and >= 0");
}

/// Random start spread around the empirical time scale.
CanonicalCoordinates random_start(double log_rate, Rng& rng) {
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  CanonicalCoordinates z;
  z << log_rate + shift(rng), log_rate + shift(rng), shift(rng), shift(rng);
  return z;
}

double parameter_norm(const CanonicalMap2& c) { return std::hypot(std::hypot(c.x, c.y), std::hypot(c.u, c.v)); }

}  // namespace

EmpiricalSummary empirical_summary(std::span<const double> times) {
  check_trace(times);
  const double n = static_cast<double>(times.size());
  EmpiricalSummary s;
  s.n = times.size();
  for (double t : times) {
    s.m1 += t;
    s.m2 += t * t;
    s.m3 += t * t * t;
  }
  s.m1 /= n;
  s.m2 /= n;
  s.m3 /= n;
  double denom = 0.0;
  double numer = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = times[i] - s.m1;
    denom += d * d;
    if (i + 1 < times.size()) numer += d * (times[i + 1] - s.m1);
  }
  if (!(denom > 1e-14 * s.m2 * n)) throw Error(ErrorCode::DegenerateVariance, "trace has zero variance");
  s.rho = numer / denom;
  return s;
}

EmpiricalSummary model_summary(const Map2& m) {
  const auto st = stationary_objects(m);
  const PhaseType2 ph{st.phi, m.d0()};
  EmpiricalSummary s;
  s.m1 = ph_moment(ph, 1);
  s.m2 = ph_moment(ph, 2);
  s.m3 = ph_moment(ph, 3);
  const double var = s.m2 - s.m1 * s.m1;
  s.rho = var > 1e-14 * s.m2 ? st.gamma * (s.m2 / 2 - s.m1 * s.m1) / var : 0.0;
  return s;
}

double moment_distance(const EmpiricalSummary& model, const EmpiricalSummary& target) {
  const double r = model.rho - target.rho;
  const double a = (model.m1 - target.m1) / target.m1;
  const double b = (model.m2 - target.m2) / target.m2;
  const double c = (model.m3 - target.m3) / target.m3;
  return r * r + a * a + b * b + c * c;
}

CanonicalMap2 from_coordinates(const CanonicalCoordinates& z, CanonicalForm form) {
  CanonicalMap2 c;
  c.form = form;
  c.x = -std::exp(z(0));
  c.u = -std::exp(z(1));
  c.y = -c.x * sigmoid(z(2));
  c.v = -c.u * sigmoid(z(3));
  return c;
}

CanonicalCoordinates to_coordinates(const CanonicalMap2& c) {
  CanonicalCoordinates z;
  z << std::log(-c.x), std::log(-c.u), logit(c.y / -c.x), logit(c.v / -c.u);
  return z;
}

MomentsMatch moments_match(const EmpiricalSummary& summary, CanonicalForm form, int restarts, std::uint64_t seed) {
  if (!(summary.m1 > 0 && summary.m2 > 0 && summary.m3 > 0))
    throw Error(ErrorCode::InvalidArgument, "summary moments must be positive");
  auto objective = [&](const CanonicalCoordinates& z) {
    try {
      return moment_distance(model_summary(expand_canonical(from_coordinates(z, form))), summary);
    } catch (const Error&) {
      return kInf;
    }
  };

  const double log_rate = -std::log(summary.m1);
  std::vector<CanonicalCoordinates> starts;
  CanonicalCoordinates base;
  base << log_rate - 1.0, log_rate + 1.0, 0.0, 0.0;
  starts.push_back(base);
  Rng rng = make_stream(seed, {0x6d6d, static_cast<std::uint64_t>(form)});
  for (int i = 0; i < restarts; ++i) starts.push_back(random_start(log_rate, rng));

  NelderMeadOptions opts;
  opts.max_iterations = 3000;
  opts.tolerance = 1e-14;
  opts.initial_step = 1.0;
  MomentsMatch best{from_coordinates(base, form), kInf};
  for (const auto& start : starts) {
    auto r = nelder_mead<4>(objective, start, opts);
    NelderMeadOptions polish = opts;
    polish.initial_step = 0.1;
    r = nelder_mead<4>(objective, r.x, polish);
    if (r.value < best.delta) best = {from_coordinates(r.x, form), r.value};
  }
  if (!std::isfinite(best.delta)) throw Error(ErrorCode::NoFeasiblePoint, "moments matching found no evaluable model");
  return best;
}

namespace {

struct FormFit {
  CanonicalMap2 params;
  double loglik = -kInf;
  CanonicalMap2 warm_start;
  double warm_start_loglik = -kInf;
  double delta = kNaN;
  bool converged = false;
  int iterations = 0;
};

double safe_loglik(const CanonicalMap2& c, std::span<const double> times) {
  try {
    const double ll = log_likelihood(expand_canonical(c), times);
    return std::isfinite(ll) ? ll : -kInf;
  } catch (const Error&) {
    return -kInf;
  }
}

FormFit fit_form(std::span<const double> times, const EmpiricalSummary& summary, CanonicalForm form,
                 const FitOptions& options) {
  FormFit out;
  const auto warm = moments_match(summary, form, options.restarts, options.seed);
  out.warm_start = warm.params;
  out.delta = warm.delta;
  out.warm_start_loglik = safe_loglik(warm.params, times);

  const double n = static_cast<double>(times.size());
  auto objective = [&](const CanonicalCoordinates& z) { return -safe_loglik(from_coordinates(z, form), times) / n; };

  std::vector<CanonicalCoordinates> starts{to_coordinates(warm.params)};
  Rng rng = make_stream(options.seed, {0x6d6c65, static_cast<std::uint64_t>(form)});
  const double log_rate = -std::log(summary.m1);
  for (int i = 0; i < options.restarts; ++i) starts.push_back(random_start(log_rate, rng));

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.tolerance = options.tolerance;
  nm.initial_step = 0.5;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto r = nelder_mead<4>(objective, starts[i], nm);
    NelderMeadOptions polish = nm;
    polish.initial_step = 0.05;
    const auto refined = nelder_mead<4>(objective, r.x, polish);
    const int iterations = r.iterations + refined.iterations;
    const bool converged = r.converged && refined.converged;
    r = refined;
    out.iterations += iterations;
    if (!std::isfinite(r.value)) continue;
    const CanonicalMap2 candidate = from_coordinates(r.x, form);
    const double ll = -r.value * n;
    const bool better = ll > out.loglik ||
                        (ll == out.loglik && parameter_norm(candidate) < parameter_norm(out.params));
    if (better) {
      out.params = candidate;
      out.loglik = ll;
      out.converged = converged;
    }
  }
  // The warm start itself is always a candidate.
  if (out.warm_start_loglik > out.loglik) {
    out.params = out.warm_start;
    out.loglik = out.warm_start_loglik;
  }
  return out;
}

}  // namespace

FitResult fit_mle(std::span<const double> times, const FitOptions& options) {
  const EmpiricalSummary summary = empirical_summary(times);

  std::optional<FormFit> positive;
  std::optional<FormFit> nonpositive;
  if (options.form != FormChoice::GammaNonpositive)
    positive = fit_form(times, summary, CanonicalForm::GammaPositive, options);
  if (options.form != FormChoice::GammaPositive)
    nonpositive = fit_form(times, summary, CanonicalForm::GammaNonpositive, options);

  const FormFit* best = nullptr;
  for (const auto* f : {positive ? &*positive : nullptr, nonpositive ? &*nonpositive : nullptr}) {
    if (!f || !std::isfinite(f->loglik)) continue;
    if (!best || f->loglik > best->loglik ||
        (f->loglik == best->loglik && parameter_norm(f->params) < parameter_norm(best->params)))
      best = f;
  }
  if (!best) throw Error(ErrorCode::OptimizerFailed, "no start reached a finite log-likelihood");

  return FitResult{best->params,
                   expand_canonical(best->params),
                   best->loglik,
                   positive ? positive->loglik : kNaN,
                   nonpositive ? nonpositive->loglik : kNaN,
                   best->warm_start,
                   best->warm_start_loglik,
                   best->delta,
                   best->converged,
                   (positive ? positive->iterations : 0) + (nonpositive ? nonpositive->iterations : 0)};
}

}  // namespace opmap
