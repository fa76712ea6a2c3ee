#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "opmap/counting.hpp"
#include "opmap/random.hpp"
#include "opmap/severity.hpp"

namespace opmap {

struct PoissonRate {
  double lambda;  // losses per year
};

/// Annual loss-count law: the MAP count distribution at tau = 365 or a
/// Poisson baseline.
class FrequencyModel {
 public:
  enum class Kind { Map2Counting, PoissonRate };

  explicit FrequencyModel(CountingDist counts);
  explicit FrequencyModel(PoissonRate rate);

  static FrequencyModel from_map2(const Map2& m, double tau = 365.0, double eps = 1e-10);
  static FrequencyModel poisson(double lambda) { return FrequencyModel(PoissonRate{lambda}); }

  Kind kind() const { return kind_; }
  std::string tag() const { return kind_ == Kind::Map2Counting ? "map2" : "poisson"; }
  double mean() const;
  double variance() const;
  double probability_zero() const;
  const CountingDist* counts() const { return std::get_if<CountingDist>(&payload_); }

  /// Inverse-cdf sampler over the count mass, or a Poisson sampler.
  class Sampler {
   public:
    explicit Sampler(const FrequencyModel& f);
    std::uint32_t operator()(Rng& rng);

   private:
    std::vector<double> cumulative_;
    std::poisson_distribution<std::uint32_t> poisson_;
    bool use_table_;
  };

 private:
  Kind kind_;
  std::variant<CountingDist, PoissonRate> payload_;
};

/// Draws one severity.
using SeverityDraw = std::function<double(Rng&)>;
/// Builds an independent severity drawer (one per worker).
using SeverityFactory = std::function<SeverityDraw()>;

SeverityFactory dpln_severity(const DplnParams& p);

struct AggregateSample {
  std::size_t k = 0;
  std::vector<double> losses;
  std::vector<std::uint32_t> counts;
  std::uint64_t seed = 0;
  std::string frequency_kind;

  double zero_fraction() const;
};

struct SimulationOptions {
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Replicates per RNG stream. Streams are labelled by chunk index, so the
  /// output does not depend on the thread count.
  std::size_t chunk = 1 << 16;
};

AggregateSample simulate_aggregate(const FrequencyModel& freq, const SeverityFactory& severity, std::size_t k,
                                   std::uint64_t seed, const SimulationOptions& options = {});
AggregateSample simulate_aggregate(const FrequencyModel& freq, const DplnParams& sev, std::size_t k,
                                   std::uint64_t seed, const SimulationOptions& options = {});

struct CompoundMoments {
  double mean;
  /// Empty when the severity variance is infinite (alpha <= 2).
  std::optional<double> variance;
};

CompoundMoments compound_moments(const FrequencyModel& freq, const DplnParams& sev);

struct SummaryStats {
  double min, max, mean, sd, skewness;
  double q025, q25, q50, q975;
};

struct RiskReport {
  std::map<double, double> var;
  std::map<double, double> es;
  SummaryStats summary;
  std::vector<std::string> warnings;
};

/// Empirical VaR_p = Z_(floor(p K) + 1), the smallest sample whose empirical
/// cdf exceeds p; ES_p = mean of samples >= VaR_p.
double empirical_quantile(std::span<const double> sorted, double p);

RiskReport risk_measures(const AggregateSample& sample, const std::vector<double>& ps,
                         std::optional<double> severity_alpha = std::nullopt);

struct ConvergenceRow {
  std::size_t k;
  std::size_t repeat;
  double var_999;
};

struct ConvergenceSummary {
  std::size_t k;
  double median;
  double q25;
  double q75;
  double iqr() const { return q75 - q25; }
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummary> summary;
};

ConvergenceStudy convergence_study(const FrequencyModel& freq, const SeverityFactory& severity,
                                   const std::vector<std::size_t>& ks, std::size_t repeats, std::uint64_t seed,
                                   const SimulationOptions& options = {});

struct FrequencyComparison {
  AggregateSample map2_sample;
  AggregateSample poisson_sample;
  RiskReport map2;
  RiskReport poisson;
  double map2_p_zero;
  double poisson_p_zero;
};

FrequencyComparison compare_frequencies(const Map2& map2, double poisson_rate, const DplnParams& sev, std::size_t k,
                                        const std::vector<double>& ps, std::uint64_t seed,
                                        const SimulationOptions& options = {});

/// Per-pipeline master seeds derived from one seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label);

}  // namespace opmap
