#include "doctest.h"

#include "hypervae/error.hpp"
#include "hypervae/metrics/metrics.hpp"
#include "hypervae/nn/rng.hpp"

#include <cmath>
#include <functional>

using namespace hypervae;
using namespace hypervae::metrics;

namespace {

using Vec = std::vector<double>;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

Vec scaled(const Vec& v, double c) {
  Vec out = v;
  for (double& x : out) x *= c;
  return out;
}

Vec random_positive(nn::Rng& rng, std::size_t n) {
  Vec v(n);
  for (double& x : v) x = std::pow(10.0, 4.0 * rng.uniform() - 2.0);
  return v;
}

}  // namespace

TEST_CASE("male examples") {
  const Vec m{0.5, 2.0, 7.0};
  CHECK(male(m, m) == 1.0);
  CHECK(male(Vec{10, 10}, Vec{1, 100}) == doctest::Approx(10.0).epsilon(1e-14));
  nn::Rng rng(1);
  const Vec e = random_positive(rng, 20), t = random_positive(rng, 20);
  CHECK(male(e, t) == male(t, e));
  CHECK(code_of([] { male(Vec{0.0}, Vec{1.0}); }) == ErrorCode::domain_error);
  CHECK(code_of([] { male(Vec{1.0}, Vec{1.0, 2.0}); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([] { male(Vec{}, Vec{}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("rmse examples") {
  CHECK(rmse(Vec{1, 2}, Vec{1, 2}) == 0.0);
  CHECK(rmse(Vec{3}, Vec{0}) == 3.0);
  CHECK(rmse(Vec{1, -1}, Vec{0, 0}) == 1.0);
  CHECK(code_of([] { rmse(Vec{1.0}, Vec{}); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("rmsle examples") {
  const Vec m{0.3, 4.0, 12.0};
  CHECK(rmsle(m, m) == 0.0);
  CHECK(rmsle(scaled(m, 10), m) == doctest::Approx(1.0).epsilon(1e-14));
  nn::Rng rng(2);
  const Vec e = random_positive(rng, 20), t = random_positive(rng, 20);
  CHECK(rmsle(e, t) == doctest::Approx(rmsle(t, e)).epsilon(1e-15));
  CHECK(code_of([] { rmsle(Vec{-1.0}, Vec{1.0}); }) == ErrorCode::domain_error);
}

TEST_CASE("log_bias examples") {
  const Vec m{0.3, 4.0, 12.0};
  CHECK(log_bias(m, m) == 1.0);
  CHECK(log_bias(scaled(m, 10), m) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(log_bias(scaled(m, 0.1), m) == doctest::Approx(0.1).epsilon(1e-14));
  nn::Rng rng(3);
  const Vec e = random_positive(rng, 20), t = random_positive(rng, 20);
  CHECK(log_bias(e, t) * log_bias(t, e) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("slope examples") {
  const Vec m{1, 2, 5, 9};
  CHECK(slope(m, m) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(slope(scaled(m, 2), m) == doctest::Approx(2.0).epsilon(1e-14));
  Vec shifted = scaled(m, 2);
  for (double& x : shifted) x += 7;
  CHECK(slope(shifted, m) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(code_of([] { slope(Vec{1, 2}, Vec{3, 3}); }) == ErrorCode::domain_error);
  CHECK(code_of([] { slope(Vec{1}, Vec{3}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("median helper") {
  CHECK(median(Vec{3, 1, 2}) == 2.0);
  CHECK(median(Vec{4, 1, 3, 2}) == 2.5);
}

TEST_CASE("median_metrics examples") {
  const Vec m{0.3, 4.0, 12.0, 0.05};
  const auto ideal = median_metrics(m, m);
  CHECK(ideal.mape == 0.0);
  CHECK(ideal.epsilon == 0.0);
  CHECK(ideal.beta == 0.0);
  const auto up = median_metrics(scaled(m, 10), m);
  CHECK(up.beta == doctest::Approx(900.0).epsilon(1e-12));
  CHECK(up.epsilon == doctest::Approx(900.0).epsilon(1e-12));
  CHECK(median_metrics(scaled(m, 0.1), m).beta == doctest::Approx(-900.0).epsilon(1e-12));
  CHECK(code_of([] { median_metrics(Vec{1.0}, Vec{0.0}); }) == ErrorCode::domain_error);
}

TEST_CASE("evaluate_all examples") {
  const Vec m{0.3, 4.0, 12.0};
  const auto r = evaluate_all(m, m);
  CHECK(r.male == 1.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.rmsle == 0.0);
  CHECK(r.log_bias == 1.0);
  CHECK(r.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.mape == 0.0);
  CHECK(r.epsilon == 0.0);
  CHECK(r.beta == 0.0);
  CHECK(r.n == 3);

  nn::Rng rng(4);
  const Vec e = random_positive(rng, 30), t = random_positive(rng, 30);
  const auto q = evaluate_all(e, t);
  CHECK(q.male == male(e, t));
  CHECK(q.rmse == rmse(e, t));
  CHECK(q.rmsle == rmsle(e, t));
  CHECK(q.log_bias == log_bias(e, t));
  CHECK(q.slope == slope(e, t));
  const auto md = median_metrics(e, t);
  CHECK(q.mape == md.mape);
  CHECK(q.epsilon == md.epsilon);
  CHECK(q.beta == md.beta);
  CHECK(q.n == 30);
  CHECK(q.to_json().find("\"male\"") != std::string::npos);
}

TEST_CASE("scale relation") {
  nn::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec e = random_positive(rng, 12), t = random_positive(rng, 12);
    const double c = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const auto a = evaluate_all(e, t);
    const auto b = evaluate_all(scaled(e, c), scaled(t, c));
    CHECK(b.male == doctest::Approx(a.male).epsilon(1e-9));
    CHECK(b.rmsle == doctest::Approx(a.rmsle).epsilon(1e-9));
    CHECK(b.log_bias == doctest::Approx(a.log_bias).epsilon(1e-9));
    CHECK(b.slope == doctest::Approx(a.slope).epsilon(1e-9));
    CHECK(b.mape == doctest::Approx(a.mape).epsilon(1e-9));
    CHECK(b.epsilon == doctest::Approx(a.epsilon).epsilon(1e-9));
    CHECK(b.beta == doctest::Approx(a.beta).epsilon(1e-9));
    CHECK(b.rmse == doctest::Approx(c * a.rmse).epsilon(1e-9));
  }
}

TEST_CASE("beta and log_bias agree in direction on uniformly biased inputs") {
  nn::Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec t = random_positive(rng, 9);
    const double c = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const auto r = evaluate_all(scaled(t, c), t);
    CHECK((r.log_bias > 1.0) == (r.beta > 0.0));
  }
}

TEST_CASE("sweep_per_band examples") {
  nn::Rng rng(7);
  const Eigen::Index n = 6, d = 141;
  nn::Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.01 + rng.uniform();
  std::vector<double> bands;
  for (Eigen::Index j = 0; j < d; ++j) bands.push_back(400.0 + 300.0 * double(j) / 140.0);
  const auto ideal = sweep_per_band(m, m, bands);
  CHECK(ideal.reports.size() == 141);
  for (const auto& r : ideal.reports) {
    CHECK(r.rmse == 0.0);
    CHECK(r.male == 1.0);
  }
  const std::string csv = ideal.to_csv();
  CHECK(csv.rfind("band_nm,n,male,rmse,rmsle,log_bias,slope,mape,epsilon,beta\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 142);

  nn::Matrix e = m;
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] *= 0.5 + rng.uniform();
  const auto base = sweep_per_band(e, m, bands);
  // permuting columns together with the grid permutes the reports
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) perm[static_cast<std::size_t>(j)] = d - 1 - j;
  nn::Matrix ep(n, d), mp(n, d);
  std::vector<double> bp(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    ep.col(j) = e.col(perm[static_cast<std::size_t>(j)]);
    mp.col(j) = m.col(perm[static_cast<std::size_t>(j)]);
    bp[static_cast<std::size_t>(j)] = bands[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
  }
  const auto permuted = sweep_per_band(ep, mp, bp);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& a = permuted.reports[static_cast<std::size_t>(j)];
    const auto& b = base.reports[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
    CHECK(a.male == b.male);
    CHECK(a.beta == b.beta);
  }
  CHECK(code_of([&] { sweep_per_band(m, m, std::vector<double>(10, 1.0)); }) ==
        ErrorCode::dimension_mismatch);
}
