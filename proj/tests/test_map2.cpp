#include <cmath>
#include <random>

#include "doctest.h"
#include "opmap/error.hpp"
#include "opmap/estimation.hpp"
#include "opmap/map2.hpp"
#include "opmap/published.hpp"
#include "oracles.hpp"

using namespace opmap;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

double lag1(const std::vector<double>& x) {
  const auto s = oracle::iid_mean(x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - s.mean) * (x[i] - s.mean);
    if (i + 1 < x.size()) num += (x[i] - s.mean) * (x[i + 1] - s.mean);
  }
  return num / den;
}

}  // namespace

TEST_CASE("validate_map2 accepts generators and rejects bad input") {
  const Map2 p = poisson_embedding(2.0);
  CHECK(p.generator().rowwise().sum().cwiseAbs().maxCoeff() == 0.0);

  Mat2 d0;
  Mat2 d1;
  d0 << -1, 0, 0, -1;
  d1 << 1, 0, 0, 1;
  CHECK_NOTHROW(validate_map2(d0, d1));

  d0 << -0.0063, 0.0011, 0, -0.1036;
  d1 << 0.0052, 0, 0.0016, 0.1020;
  CHECK_NOTHROW(validate_map2(d0, d1));

  d1 << 0.0052, 0, -0.1, 0.2036;
  CHECK(code_of([&] { validate_map2(d0, d1); }) == ErrorCode::NegativeRate);

  d1 << 0.0052, 0, 0.0016, 0.1030;
  CHECK(code_of([&] { validate_map2(d0, d1); }) == ErrorCode::NotAGenerator);

  d0 << 0, 0, 0, -1;
  d1 << 0, 0, 0, 1;
  CHECK(code_of([&] { validate_map2(d0, d1); }) == ErrorCode::UnstableD0);
}

TEST_CASE("expand_canonical follows the two templates") {
  const Map2 m = published::fitted_model();
  Mat2 d0;
  Mat2 d1;
  d0 << -0.0063, 0.0011, 0, -0.1036;
  d1 << 0.0052, 0, 0.0016, 0.1020;
  CHECK((m.d0() - d0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((m.d1() - d1).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE(m.canonical());
  CHECK(m.canonical()->x == -0.0063);

  const Map2 decoupled = expand_canonical({CanonicalForm::GammaPositive, -1, 0, -1, 0});
  d0 << -1, 0, 0, -1;
  d1 << 1, 0, 0, 1;
  CHECK(decoupled.d0() == d0);
  CHECK(decoupled.d1() == d1);
  CHECK(code_of([&] { stationary_objects(decoupled); }) == ErrorCode::SingularSystem);

  const Map2 r3 = published::illustration_model(3);
  d0 << -0.6830, 0.0026, 0, -34.6904;
  d1 << 0, 0.6804, 34.5586, 0.1318;
  CHECK((r3.d0() - d0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r3.d1() - d1).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(code_of([] { expand_canonical({CanonicalForm::GammaPositive, -1, 2, -1, 0}); }) ==
        ErrorCode::ConstraintViolated);
}

TEST_CASE("stationary objects match the brute-force oracle") {
  const Map2 m = published::fitted_model();
  const auto s = stationary_objects(m);
  const auto phi = oracle::stationary_phi(m);
  CHECK(s.phi(0) == doctest::Approx(static_cast<double>(phi(0))).epsilon(1e-12));
  CHECK((s.phi * s.p_star - s.phi).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.pi * m.generator()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.p_star.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(s.gamma > 0);
  CHECK(stationary_objects(published::illustration_model(1)).gamma > 0);
  CHECK(stationary_objects(published::illustration_model(3)).gamma <= 0);

  const auto p = stationary_objects(poisson_embedding(3.0));
  CHECK(p.phi(0) == doctest::Approx(0.5));
  CHECK(p.pi(0) == doctest::Approx(0.5));

  Mat2 d0;
  Mat2 d1;
  d0 << -1, 0, 0, -1;
  d1 << 1, 0, 0, 1;
  CHECK(code_of([&] { stationary_objects(validate_map2(d0, d1)); }) == ErrorCode::SingularSystem);
}

TEST_CASE("P* formulas agree on random models") {
  for (const auto& m : oracle::random_models(1000, 3)) {
    const double theta = 1.01 * std::max(-m.d0()(0, 0), -m.d0()(1, 1));
    const oracle::LMat p0 = oracle::LMat::Identity() + oracle::widen(m.d0()) / theta;
    const oracle::LMat p1 = oracle::widen(m.d1()) / theta;
    const oracle::LMat via_jumps = oracle::inverse(oracle::LMat::Identity() - p0) * p1;
    const Mat2 lib = stationary_objects(m).p_star;
    CHECK((lib - via_jumps.cast<double>()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((stationary_objects(m).pi * m.generator()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("semi-Markov kernel") {
  const Map2 m = published::fitted_model();
  CHECK(semi_markov_kernel(m, 0.0).cwiseAbs().maxCoeff() == 0.0);
  const Mat2 p_star = stationary_objects(m).p_star;
  CHECK((semi_markov_kernel(m, 1e6) - p_star).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(semi_markov_kernel(m, INFINITY) == p_star);

  const Mat2 want = (Mat2::Identity() - oracle::series_expm(m.d0(), 8.0, 50)) *
                    oracle::p_star(m).cast<double>();
  CHECK((semi_markov_kernel(m, 8.0) - want).cwiseAbs().maxCoeff() < 1e-12);

  Mat2 prev = Mat2::Zero();
  for (double t = 0.5; t < 200; t *= 1.5) {
    const Mat2 q = semi_markov_kernel(m, t);
    CHECK((q - prev).minCoeff() >= -1e-15);
    prev = q;
  }
  CHECK(code_of([&] { semi_markov_kernel(m, -1.0); }) == ErrorCode::NegativeTime);
}

TEST_CASE("phase-type law") {
  const PhaseType2 expo{Row2(1.0, 0.0), (Mat2() << -2.0, 0.0, 0.0, -5.0).finished()};
  CHECK(ph_cdf(expo, 0.0) == 0.0);
  for (double t : {0.1, 1.0, 3.0}) {
    CHECK(ph_cdf(expo, t) == doctest::Approx(1 - std::exp(-2 * t)).epsilon(1e-14));
    CHECK(ph_pdf(expo, t) == doctest::Approx(2 * std::exp(-2 * t)).epsilon(1e-14));
  }

  const Map2 p = poisson_embedding(0.5);
  const auto ph = inter_loss_distribution(p);
  CHECK(ph_moment(ph, 1) == doctest::Approx(2.0));
  CHECK(ph_moment(ph, 2) == doctest::Approx(8.0));
  CHECK(ph_moment(ph, 3) == doctest::Approx(48.0));

  for (const auto& m : oracle::random_models(20, 5)) {
    const auto d = inter_loss_distribution(m);
    for (int n = 1; n <= 3; ++n)
      CHECK(ph_moment(d, n) == doctest::Approx(oracle::ph_moment(m, n)).epsilon(1e-10));
    for (double q : {0.1, 0.5, 0.9}) CHECK(ph_cdf(d, ph_quantile(d, q)) == doctest::Approx(q).epsilon(1e-10));
  }
  CHECK(arrival_rate(published::fitted_model()) * ph_moment(inter_loss_distribution(published::fitted_model()), 1) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("published model summary statistics") {
  // The printed parameters are rounded; the reconstruction reproduces the
  // quoted figures, the printed ones match the oracle.
  const Map2 printed = published::fitted_model();
  const auto ph = inter_loss_distribution(printed);
  CHECK(ph_moment(ph, 1) == doctest::Approx(oracle::ph_moment(printed, 1)).epsilon(1e-12));
  CHECK(ph_quantile(ph, 0.5) == doctest::Approx(7.52).epsilon(0.05 / 7.52));

  const Map2 m = published::fitted_model_unrounded();
  const auto u = inter_loss_distribution(m);
  const double m1 = ph_moment(u, 1);
  CHECK(std::abs(m1 - 22.0047) < 1e-3);
  CHECK(std::abs(std::sqrt(ph_moment(u, 2) - m1 * m1) / m1 - 2.8205) < 1e-3);
  CHECK(std::abs(lag1_correlation(m) - 0.3545) < 1e-3);
  CHECK(std::abs(ph_quantile(u, 0.5) - 7.52) < 0.05);
}

TEST_CASE("lag-1 correlation") {
  CHECK(lag1_correlation(poisson_embedding(1.0)) == doctest::Approx(0.0).epsilon(1e-15));
  const Map2 r2 = published::illustration_model(2);
  const auto trace = oracle::simulate_gaps(r2, 1'000'000, 21);
  CHECK(std::abs(lag1(trace) - lag1_correlation(r2)) < 0.01);
}

TEST_CASE("log-likelihood") {
  const double lambda = 0.7;
  const std::vector<double> times{0.5, 1.2, 0.1, 3.0};
  double want = 0.0;
  for (double t : times) want += std::log(lambda) - lambda * t;
  CHECK(log_likelihood(poisson_embedding(lambda), times) == doctest::Approx(want).epsilon(1e-13));

  const Map2 m = published::fitted_model();
  const auto s = stationary_objects(m);
  CHECK(log_likelihood(m, std::vector<double>{0.0}) ==
        doctest::Approx(std::log((s.phi * m.d1() * ones2()).value())).epsilon(1e-13));

  const auto trace = simulate_map2(m, 225, 7);
  const std::vector<double> prefix(trace.begin(), trace.begin() + 20);
  CHECK(std::abs(log_likelihood(m, prefix) - oracle::direct_log_likelihood(m, prefix)) < 1e-9);
  CHECK(std::isfinite(log_likelihood(m, trace)));

  for (const auto& r : oracle::random_models(10, 8)) {
    const auto t = oracle::simulate_gaps(r, 20, 9);
    CHECK(std::abs(log_likelihood(r, t) - oracle::direct_log_likelihood(r, t)) < 1e-9);
  }

  CHECK(code_of([&] { log_likelihood(m, std::vector<double>{1.0, -1.0}); }) == ErrorCode::NegativeDuration);
  CHECK(code_of([&] { log_likelihood(m, std::vector<double>{}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("likelihood is maximized at the generating model") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.5);
  int wins = 0;
  const auto models = oracle::random_models(100, 17);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const Map2& m = models[i];
    const auto trace = simulate_map2(m, 20'000, 1000 + i);
    const double ll = log_likelihood(m, trace);
    const CanonicalMap2 c = *m.canonical();
    bool best = true;
    for (int k = 0; k < 20 && best; ++k) {
      CanonicalCoordinates z = to_coordinates(c);
      for (int j = 0; j < 4; ++j) z(j) += noise(rng);
      try {
        best = log_likelihood(expand_canonical(from_coordinates(z, c.form)), trace) <= ll;
      } catch (const Error&) {
      }
    }
    wins += best;
  }
  CHECK(wins >= 95);
}

TEST_CASE("simulate_map2") {
  const auto expo = simulate_map2(poisson_embedding(1.0), 1'000'000, 1);
  CHECK(std::abs(oracle::iid_mean(expo).mean - 1.0) < 0.005);

  const Map2 m = published::fitted_model();
  const auto trace = simulate_map2(m, 1'000'000, 2);
  const double m1 = ph_moment(inter_loss_distribution(m), 1);
  CHECK(oracle::batch_means(trace).within(m1));
  CHECK(std::abs(lag1(trace) - lag1_correlation(m)) < 0.01);

  CHECK(simulate_map2(m, 100, 5) == simulate_map2(m, 100, 5));
}

TEST_CASE("moments and correlation agree with simulation") {
  const auto models = oracle::random_models(10, 31);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const Map2& m = models[i];
    const auto trace = simulate_map2(m, 200'000, 50 + i);
    const auto ph = inter_loss_distribution(m);
    std::vector<double> sq(trace.size());
    for (std::size_t j = 0; j < trace.size(); ++j) sq[j] = trace[j] * trace[j];
    CHECK(oracle::batch_means(trace).within(ph_moment(ph, 1)));
    CHECK(oracle::batch_means(sq).within(ph_moment(ph, 2)));
  }
}
