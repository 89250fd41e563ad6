#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "inferno/common/hash.hpp"
#include "inferno/synthgen/generator.hpp"
#include "inferno/verify/ks.hpp"

using namespace inferno;
using namespace inferno::synthgen;

TEST_CASE("empty dataset") {
  auto ds = sample_signal(0, 1);
  CHECK(ds.size() == 0);
}

TEST_CASE("identical seeds give bit-identical datasets") {
  auto a = sample_background(5000, 42, 0.0, 3.0);
  auto b = sample_background(5000, 42, 0.0, 3.0);
  CHECK(a.x == b.x);
  auto c = sample_background(5000, 43, 0.0, 3.0);
  CHECK(a.x != c.x);
}

TEST_CASE("signal moments") {
  auto ds = sample_signal(1'000'000, 7);
  const double m0 = ds.x.col(0).mean();
  const double m1 = ds.x.col(1).mean();
  const double m2 = ds.x.col(2).mean();
  CHECK(std::abs(m0 - 1.0) < 0.01);
  CHECK(std::abs(m1 - 1.0) < 0.01);
  CHECK(std::abs(m2 - 0.5) < 0.005);
  const double v0 = (ds.x.col(0).array() - m0).square().mean();
  CHECK(std::abs(v0 - 1.0) < 0.01);
}

TEST_CASE("background moments and parameter response") {
  auto ds = sample_background(1'000'000, 7, 0.0, 3.0);
  CHECK(std::abs(ds.x.col(0).mean() - 2.0) < 0.02);
  CHECK(std::abs(ds.x.col(2).mean() - 1.0 / 3.0) < 0.003);

  auto shifted = sample_background(1'000'000, 8, 1.0, 3.0);
  CHECK(std::abs(shifted.x.col(0).mean() - 3.0) < 0.02);

  auto faster = sample_background(1'000'000, 9, 0.0, 2.0);
  CHECK(std::abs(faster.x.col(2).mean() - 0.5) < 0.005);

  CHECK_THROWS_AS(sample_background(10, 1, 0.0, -1.0), std::domain_error);
}

TEST_CASE("nuisance transform arithmetic") {
  LabeledDataset batch;
  batch.x.resize(1, 3);
  batch.x << 0.5, -1.0, 0.2;
  batch.labels = {kBackgroundLabel};
  batch.r0 = 0.0;
  batch.lambda0 = 3.0;
  apply_nuisance_transform(batch, 1.2, 2.0);
  CHECK(batch.x(0, 0) == doctest::Approx(1.7));
  CHECK(batch.x(0, 1) == doctest::Approx(-1.0));
  CHECK(batch.x(0, 2) == doctest::Approx(0.3));
}

TEST_CASE("transform at generation point is the identity") {
  auto ds = sample_background(1000, 3, 0.0, 3.0);
  auto copy = ds;
  apply_nuisance_transform(copy, 0.0, 3.0);
  CHECK(copy.x == ds.x);
}

TEST_CASE("transformed exponential matches target rate (KS)") {
  auto ds = sample_background(100'000, 5, 0.0, 3.0);
  apply_nuisance_transform(ds, 0.0, 2.0);
  std::vector<double> x2(static_cast<std::size_t>(ds.size()));
  for (Eigen::Index i = 0; i < ds.size(); ++i) x2[static_cast<std::size_t>(i)] = ds.x(i, 2);
  const double p =
      verify::ks_one_sample(x2, [](double x) { return 1.0 - std::exp(-2.0 * x); });
  CHECK(p > 0.01);
}

TEST_CASE("transform/generation equivalence per marginal (two-sample KS)") {
  auto gen = sample_background(100'000, 11, 0.4, 2.2);
  auto tra = sample_background(100'000, 12, 0.0, 3.0);
  apply_nuisance_transform(tra, 0.4, 2.2);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> a(100'000), b(100'000);
    for (Eigen::Index i = 0; i < gen.size(); ++i) {
      a[static_cast<std::size_t>(i)] = gen.x(i, c);
      b[static_cast<std::size_t>(i)] = tra.x(i, c);
    }
    INFO("marginal ", c);
    CHECK(verify::ks_two_sample(a, b) > 0.01);
  }
}

TEST_CASE("mixture: s=0 gives background only") {
  auto ds = mixture_sample(Eigen::Index{500}, 0.0, 1000.0, 0.0, 3.0, 2);
  CHECK(ds.signal_count() == 0);
}

TEST_CASE("mixture signal fraction") {
  auto ds = mixture_sample(Eigen::Index{1'000'000}, 50.0, 1000.0, 0.0, 3.0, 21);
  const double frac = static_cast<double>(ds.signal_count()) / static_cast<double>(ds.size());
  CHECK(std::abs(frac - 50.0 / 1050.0) < 0.001);
}

TEST_CASE("poisson mode mean count") {
  RandomStream rng(77, "poisson-test");
  double acc = 0.0;
  const int reps = 10'000;
  for (int i = 0; i < reps; ++i) acc += static_cast<double>(poisson_draw(rng, 1050.0));
  CHECK(std::abs(acc / reps - 1050.0) < 5.0);
}

TEST_CASE("csv and binary round-trips are bit-exact") {
  auto ds = sample_background(257, 19, 0.0, 3.0);
  ds.labels[3] = kSignalLabel;  // mixed labels through io

  write_csv("/tmp/inferno_t.csv", ds);
  auto back = read_csv("/tmp/inferno_t.csv");
  REQUIRE(back.size() == ds.size());
  CHECK(back.x == ds.x);
  CHECK(back.labels == ds.labels);
  write_csv("/tmp/inferno_t2.csv", back);
  CHECK(file_digest("/tmp/inferno_t.csv") == file_digest("/tmp/inferno_t2.csv"));

  write_binary("/tmp/inferno_t.bin", ds);
  auto bb = read_binary("/tmp/inferno_t.bin");
  CHECK(bb.x == ds.x);
  CHECK(bb.labels == ds.labels);
  std::remove("/tmp/inferno_t.csv");
  std::remove("/tmp/inferno_t2.csv");
  std::remove("/tmp/inferno_t.bin");
}
