#include "opmap/aggregate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "opmap/error.hpp"

namespace opmap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label) {
  return splitmix64(master ^ splitmix64(label + 0x5eed));
}

FrequencyModel::FrequencyModel(CountingDist counts) : kind_(Kind::Map2Counting), payload_(std::move(counts)) {
  const auto& c = std::get<CountingDist>(payload_);
  if (c.mass.empty()) throw Error(ErrorCode::InvalidArgument, "count distribution is empty");
}

FrequencyModel::FrequencyModel(PoissonRate rate) : kind_(Kind::PoissonRate), payload_(rate) {
  if (!(rate.lambda > 0) || !std::isfinite(rate.lambda))
    throw Error(ErrorCode::InvalidArgument, "Poisson rate must be positive");
}

FrequencyModel FrequencyModel::from_map2(const Map2& m, double tau, double eps) {
  return FrequencyModel(count_distribution(m, tau, eps));
}

double FrequencyModel::mean() const {
  if (const auto* c = counts()) return c->mean();
  return std::get<PoissonRate>(payload_).lambda;
}

double FrequencyModel::variance() const {
  if (const auto* c = counts()) return c->variance();
  return std::get<PoissonRate>(payload_).lambda;
}

double FrequencyModel::probability_zero() const {
  if (const auto* c = counts()) return c->mass.front();
  return std::exp(-std::get<PoissonRate>(payload_).lambda);
}

FrequencyModel::Sampler::Sampler(const FrequencyModel& f)
    : poisson_(f.kind() == Kind::PoissonRate ? std::get<PoissonRate>(f.payload_).lambda : 1.0),
      use_table_(f.kind() == Kind::Map2Counting) {
  if (use_table_) {
    const auto& mass = f.counts()->mass;
    cumulative_.resize(mass.size());
    double acc = 0.0;
    for (std::size_t n = 0; n < mass.size(); ++n) cumulative_[n] = (acc += mass[n]);
  }
}

std::uint32_t FrequencyModel::Sampler::operator()(Rng& rng) {
  if (!use_table_) return poisson_(rng);
  // Draws landing in the truncated tail map to the last tabulated count.
  const double u = uniform_open(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
}

SeverityFactory dpln_severity(const DplnParams& p) {
  p.validate();
  return [p]() -> SeverityDraw {
    return [sampler = DplnSampler(p)](Rng& rng) mutable { return sampler(rng); };
  };
}

double AggregateSample::zero_fraction() const {
  if (losses.empty()) return 0.0;
  const auto zeros = std::count(losses.begin(), losses.end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(losses.size());
}

AggregateSample simulate_aggregate(const FrequencyModel& freq, const SeverityFactory& severity, std::size_t k,
                                   std::uint64_t seed, const SimulationOptions& options) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");
  const std::size_t chunk = std::max<std::size_t>(options.chunk, 1);
  AggregateSample out;
  out.k = k;
  out.seed = seed;
  out.frequency_kind = freq.tag();
  out.losses.resize(k);
  out.counts.resize(k);

  const std::size_t n_chunks = (k + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      // Fresh samplers per chunk: the standard distributions cache state.
      Rng rng = make_stream(seed, {c});
      FrequencyModel::Sampler count(freq);
      SeverityDraw draw = severity();
      const std::size_t end = std::min(k, (c + 1) * chunk);
      for (std::size_t i = c * chunk; i < end; ++i) {
        const std::uint32_t n = count(rng);
        double z = 0.0;
        for (std::uint32_t j = 0; j < n; ++j) z += draw(rng);
        out.counts[i] = n;
        out.losses[i] = z;
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

AggregateSample simulate_aggregate(const FrequencyModel& freq, const DplnParams& sev, std::size_t k,
                                   std::uint64_t seed, const SimulationOptions& options) {
  return simulate_aggregate(freq, dpln_severity(sev), k, seed, options);
}

CompoundMoments compound_moments(const FrequencyModel& freq, const DplnParams& sev) {
  const double en = freq.mean();
  const double ex = dpln_moment(sev, 1.0);
  CompoundMoments out{en * ex, std::nullopt};
  if (sev.alpha > 2.0) {
    const double vx = dpln_moment(sev, 2.0) - ex * ex;
    out.variance = en * vx + freq.variance() * ex * ex;
  }
  return out;
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample");
  if (!(p >= 0 && p < 1)) throw Error(ErrorCode::OutOfRangeQuantile, "p must lie in [0, 1)");
  const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(sorted.size()) + 1e-9));
  return sorted[std::min(idx, sorted.size() - 1)];
}

RiskReport risk_measures(const AggregateSample& sample, const std::vector<double>& ps,
                         std::optional<double> severity_alpha) {
  if (sample.losses.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample");
  std::vector<double> sorted = sample.losses;
  std::sort(sorted.begin(), sorted.end());
  const double k = static_cast<double>(sorted.size());

  RiskReport r;
  for (double p : ps) {
    const double var = empirical_quantile(sorted, p);
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), var);
    double tail = 0.0;
    for (auto it = first; it != sorted.end(); ++it) tail += *it;
    r.var[p] = var;
    r.es[p] = tail / static_cast<double>(sorted.end() - first);
    if ((1.0 - p) * k < 10.0)
      r.warnings.push_back("VaR at p=" + format_p(p) + " rests on fewer than 10 tail samples (K=" +
                           std::to_string(sorted.size()) + ")");
  }
  if (severity_alpha && *severity_alpha <= 2.0)
    r.warnings.push_back("severity variance is infinite (alpha <= 2); ES estimates have very high variance");

  double sum = 0.0;
  for (double z : sorted) sum += z;
  const double mean = sum / k;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double z : sorted) {
    const double d = z - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= k;
  m3 /= k;
  SummaryStats& s = r.summary;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = mean;
  s.sd = sorted.size() > 1 ? std::sqrt(m2 * k / (k - 1.0)) : 0.0;
  s.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  s.q025 = empirical_quantile(sorted, 0.025);
  s.q25 = empirical_quantile(sorted, 0.25);
  s.q50 = empirical_quantile(sorted, 0.50);
  s.q975 = empirical_quantile(sorted, 0.975);
  return r;
}

ConvergenceStudy convergence_study(const FrequencyModel& freq, const SeverityFactory& severity,
                                   const std::vector<std::size_t>& ks, std::size_t repeats, std::uint64_t seed,
                                   const SimulationOptions& options) {
  if (ks.empty()) throw Error(ErrorCode::InvalidArgument, "no replicate counts given");
  ConvergenceStudy out;
  for (std::size_t k : ks) {
    std::vector<double> estimates;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      const auto sample = simulate_aggregate(freq, severity, k, derive_seed(seed, (k << 20) ^ rep), options);
      std::vector<double> sorted = sample.losses;
      std::sort(sorted.begin(), sorted.end());
      const double v = empirical_quantile(sorted, 0.999);
      out.rows.push_back({k, rep, v});
      estimates.push_back(v);
    }
    std::sort(estimates.begin(), estimates.end());
    out.summary.push_back({k, empirical_quantile(estimates, 0.5), empirical_quantile(estimates, 0.25),
                           empirical_quantile(estimates, 0.75)});
  }
  return out;
}

FrequencyComparison compare_frequencies(const Map2& map2, double poisson_rate, const DplnParams& sev, std::size_t k,
                                        const std::vector<double>& ps, std::uint64_t seed,
                                        const SimulationOptions& options) {
  const FrequencyModel map2_freq = FrequencyModel::from_map2(map2, 365.0);
  const FrequencyModel poisson_freq = FrequencyModel::poisson(poisson_rate);
  const auto severity = dpln_severity(sev);
  FrequencyComparison out{simulate_aggregate(map2_freq, severity, k, derive_seed(seed, 1), options),
                          simulate_aggregate(poisson_freq, severity, k, derive_seed(seed, 2), options),
                          {},
                          {},
                          map2_freq.probability_zero(),
                          poisson_freq.probability_zero()};
  out.map2 = risk_measures(out.map2_sample, ps, sev.alpha);
  out.poisson = risk_measures(out.poisson_sample, ps, sev.alpha);
  return out;
}

}  // namespace opmap
