#pragma once

#include <span>
#include <vector>

#include "opmap/map2.hpp"

namespace opmap {

// Gaps strictly below the threshold are "short"; gaps at or above it are
// "long". For continuous models the tie has probability zero; for day-count
// data it matters and is resolved in favour of "long".

struct PersistenceReport {
  double s = 0.0;
  /// P(next gap long | previous gap short).
  double p01 = 0.0;
  /// P(next gap long | previous gap long).
  double p11 = 0.0;
  /// Conditioning events behind each estimate (empirical reports only).
  std::size_t n_short = 0;
  std::size_t n_long = 0;
};

PersistenceReport transition_probs(const Map2& m, double s);

enum class SpellKind { Short, Long };

struct SpellDist {
  double s = 0.0;
  SpellKind kind = SpellKind::Short;
  std::vector<double> mass;
  double residual = 0.0;
  /// Number of spells behind an empirical estimate.
  std::size_t n_events = 0;
};

SpellDist spell_distribution(const Map2& m, double s, SpellKind kind, std::size_t n_max = 100);

/// Plug-in estimates over consecutive pairs. A side with no conditioning
/// events is NaN; InsufficientData is raised only when both sides are empty.
PersistenceReport empirical_persistence(std::span<const double> times, double s);
/// Single-sided versions that raise InsufficientData on an empty side.
double empirical_p01(std::span<const double> times, double s);
double empirical_p11(std::span<const double> times, double s);
SpellDist empirical_spells(std::span<const double> times, double s, SpellKind kind);

/// Nearest-rank percentile: the ceil(p n / 100)-th smallest observation.
double percentile_threshold(std::span<const double> times, double p);

}  // namespace opmap
