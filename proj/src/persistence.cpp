#include "opmap/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "opmap/error.hpp"

namespace opmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_short(double t, double s) { return t < s; }

void check_threshold(double s) {
  if (!(s > 0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "threshold s must be positive");
}

}  // namespace

PersistenceReport transition_probs(const Map2& m, double s) {
  check_threshold(s);
  const auto st = stationary_objects(m);
  const Mat2 e = expm2(m.d0(), s);
  const Mat2 id = Mat2::Identity();
  const Col2 ones = ones2();
  const double survival = (st.phi * e * ones).value();
  const double below = 1.0 - survival;
  if (below < 1e-14 || survival < 1e-14)
    throw Error(ErrorCode::DegenerateConditioning, "threshold leaves no mass on one side");
  const Col2 tail = e * st.p_star * ones;  // P(next gap > s | phase)
  PersistenceReport r;
  r.s = s;
  r.p01 = (st.phi * (id - e) * st.p_star * tail).value() / below;
  r.p11 = (st.phi * e * st.p_star * tail).value() / survival;
  return r;
}

SpellDist spell_distribution(const Map2& m, double s, SpellKind kind, std::size_t n_max) {
  check_threshold(s);
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  const auto st = stationary_objects(m);
  const Mat2 e = expm2(m.d0(), s);
  const Mat2 id = Mat2::Identity();
  const Col2 ones = ones2();

  // Short spells continue through (I - E) P* and end through E P*; long
  // spells the other way round.
  const Mat2 stay = kind == SpellKind::Short ? Mat2((id - e) * st.p_star) : Mat2(e * st.p_star);
  const Col2 stop = kind == SpellKind::Short ? Col2(e * st.p_star * ones) : Col2((id - e) * st.p_star * ones);
  const double survival = (st.phi * e * ones).value();

  SpellDist out;
  out.s = s;
  out.kind = kind;
  out.mass.reserve(n_max + 1);
  out.mass.push_back(kind == SpellKind::Short ? survival : 1.0 - survival);
  Row2 v = st.phi;
  for (std::size_t n = 1; n <= n_max; ++n) {
    v = v * stay;
    out.mass.push_back((v * stop).value());
  }
  double total = 0.0;
  for (double p : out.mass) total += p;
  out.residual = 1.0 - total;
  return out;
}

PersistenceReport empirical_persistence(std::span<const double> times, double s) {
  check_threshold(s);
  if (times.size() < 2) throw Error(ErrorCode::InsufficientData, "need at least two gaps");
  std::size_t short_then_long = 0;
  std::size_t long_then_long = 0;
  PersistenceReport r;
  r.s = s;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const bool next_long = !is_short(times[i + 1], s);
    if (is_short(times[i], s)) {
      ++r.n_short;
      short_then_long += next_long;
    } else {
      ++r.n_long;
      long_then_long += next_long;
    }
  }
  if (r.n_short == 0 && r.n_long == 0) throw Error(ErrorCode::InsufficientData, "no conditioning events");
  r.p01 = r.n_short ? static_cast<double>(short_then_long) / r.n_short : kNaN;
  r.p11 = r.n_long ? static_cast<double>(long_then_long) / r.n_long : kNaN;
  return r;
}

double empirical_p01(std::span<const double> times, double s) {
  const auto r = empirical_persistence(times, s);
  if (r.n_short == 0) throw Error(ErrorCode::InsufficientData, "no gap shorter than the threshold");
  return r.p01;
}

double empirical_p11(std::span<const double> times, double s) {
  const auto r = empirical_persistence(times, s);
  if (r.n_long == 0) throw Error(ErrorCode::InsufficientData, "no gap at or above the threshold");
  return r.p11;
}

SpellDist empirical_spells(std::span<const double> times, double s, SpellKind kind) {
  check_threshold(s);
  const std::size_t n = times.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "need at least two gaps");
  auto in_spell = [&](double t) { return kind == SpellKind::Short ? is_short(t, s) : !is_short(t, s); };

  // run[i]: length of the spell starting at gap i, or -1 when it reaches the
  // end of the trace unfinished.
  std::vector<long> run(n);
  long next = -1;
  for (std::size_t k = n; k-- > 0;) {
    if (!in_spell(times[k]))
      next = 0;
    else if (next >= 0)
      ++next;
    run[k] = in_spell(times[k]) ? next : 0;
  }
  SpellDist out;
  out.s = s;
  out.kind = kind;
  std::vector<std::size_t> counts;
  for (long len : run) {
    if (len < 0) continue;
    if (counts.size() <= static_cast<std::size_t>(len)) counts.resize(len + 1, 0);
    ++counts[len];
    ++out.n_events;
  }
  if (out.n_events == 0) throw Error(ErrorCode::InsufficientData, "no completed spells in the trace");
  for (std::size_t c : counts) out.mass.push_back(static_cast<double>(c) / out.n_events);
  out.residual = 0.0;
  return out;
}

double percentile_threshold(std::span<const double> times, double p) {
  if (times.empty()) throw Error(ErrorCode::EmptyTrace, "trace is empty");
  if (!(p > 0 && p < 100)) throw Error(ErrorCode::InvalidArgument, "percentile must lie in (0, 100)");
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * sorted.size()));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace opmap
