#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opmap/aggregate.hpp"
#include "opmap/map2.hpp"

namespace opmap {

/// One compared quantity: pass when |value - target| <= tolerance.
struct Check {
  std::string name;
  double value;
  double target;
  double tolerance;

  bool pass() const;
};

struct CriterionResult {
  CriterionResult(int id, std::string title) : id(id), title(std::move(title)) {}

  int id = 0;
  std::string title;
  bool pass = true;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  void add(Check c);
  void require(const std::string& what, bool ok);
  /// "PASS|FAIL [id] title: name=value (target +-tol) ..."
  std::string line() const;
};

struct ReproduceOptions {
  std::uint64_t seed = 20240101;
  std::size_t k = 1'000'000;
  std::size_t ordering_seeds = 5;
  std::size_t sweep_models = 10'000;
  std::size_t fit_gaps = 100'000;
  int fit_restarts = 4;
  std::size_t random_models = 100;
  /// Also run the K = 10^7 MAP2 VaR check.
  bool long_run = false;
  unsigned threads = 0;
};

// Each check takes the model it evaluates, so the same code reports both the
// printed model and any other candidate.
CriterionResult check_moments(const Map2& m);
CriterionResult check_median(const Map2& m);
CriterionResult check_counting(const Map2& m);
CriterionResult check_persistence(const Map2& m);
CriterionResult check_spell_normalization(const Map2& m, std::size_t random_models, std::uint64_t seed);
CriterionResult check_compound_mean(const Map2& m, const DplnParams& sev, const AggregateSample& map2_sample);
CriterionResult check_zero_atom(const AggregateSample& map2_sample, const AggregateSample& poisson_sample,
                                double poisson_rate);
CriterionResult check_ordering(const std::vector<FrequencyComparison>& runs, const Map2& m, const DplnParams& sev,
                               const ReproduceOptions& options);
CriterionResult check_overdispersion(std::size_t n_models, std::uint64_t seed);
CriterionResult check_self_recovery(const Map2& m, const ReproduceOptions& options);

struct ReproduceReport {
  std::vector<CriterionResult> criteria;
  /// Informational rows (not scored).
  std::vector<CriterionResult> info;
  /// Synthetic 225-gap demo trace drawn from the published model.
  std::vector<double> demo_trace;

  bool all_pass() const;
};

/// Criteria 1-10 on the published model and severity parameters.
ReproduceReport reproduce_paper(const ReproduceOptions& options);

}  // namespace opmap
