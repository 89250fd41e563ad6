#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "inferno/common/rng.hpp"
#include "inferno/nn/mlp.hpp"
#include "inferno/statmodel/asimov.hpp"
#include "inferno/statmodel/benchmark.hpp"
#include "inferno/statmodel/summary.hpp"
#include "inferno/synthgen/generator.hpp"
#include "inferno/train/trainer.hpp"

using namespace inferno;
using namespace inferno::statmodel;
using autodiff::Jet2d;

namespace {

/// independent closed-form oracle: I_ab = sum_i dE_i/da dE_i/db / E_i for
/// E_i = s * f_sig_i + b * f_bkg_i with fixed fractions (no r/lambda response)
struct TwoBinOracle {
  Eigen::Matrix2d info;
  double cov_ss;

  TwoBinOracle(const Eigen::Vector2d& fs, const Eigen::Vector2d& fb, double s, double b) {
    const Eigen::Vector2d e = s * fs + b * fb;
    info.setZero();
    for (int i = 0; i < 2; ++i) {
      info(0, 0) += fs(i) * fs(i) / e(i);
      info(0, 1) += fs(i) * fb(i) / e(i);
      info(1, 1) += fb(i) * fb(i) / e(i);
    }
    info(1, 0) = info(0, 1);
    cov_ss = info(1, 1) / (info(0, 0) * info(1, 1) - info(0, 1) * info(0, 1));
  }
};

/// benchmark with free (s, b_rate) used by the two-bin fixture
BenchmarkSpec s_b_free() {
  BenchmarkSpec bench;
  bench.id = -1;
  bench.free = {true, false, false, true};
  return bench;
}

}  // namespace

TEST_CASE("hard summary: tie-break, separable case, brute force") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(7, 4);
  auto counts = hard_summary(z);
  CHECK(counts.counts(0) == 7.0);  // equal logits all land in bin 0

  Eigen::MatrixXd onehot(5, 3);
  onehot << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1;
  auto oc = hard_summary(onehot);
  CHECK(oc.counts(0) == 1.0);
  CHECK(oc.counts(1) == 2.0);
  CHECK(oc.counts(2) == 2.0);

  RandomStream rng(3, "hard");
  Eigen::MatrixXd r(1000, 6);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.uniform();
  auto hs = hard_summary(r);
  Eigen::VectorXd brute = Eigen::VectorXd::Zero(6);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    Eigen::Index arg;
    r.row(i).maxCoeff(&arg);
    brute(arg) += 1.0;
  }
  CHECK(hs.counts == brute);
  CHECK(hs.counts.sum() == 1000.0);
}

TEST_CASE("soft summary: uniform case, closed form, soft-to-hard bound") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Constant(30, 5, 0.7);
  auto sc = soft_summary(z, 0.3);
  CHECK((sc.counts.array() - 6.0).abs().maxCoeff() < 1e-12);
  CHECK(std::abs(sc.counts.sum() - 30.0) < 1e-9);

  Eigen::MatrixXd z1(1, 2);
  z1 << 1.0, 0.0;
  auto s1 = soft_summary(z1, 1.0);
  CHECK(s1.counts(0) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))));
  CHECK(s1.counts(1) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));

  // margin >= 1 logits at tau = 0.01: within 0.01 * n of the hard counts per bin
  RandomStream rng(4, "soft");
  const int n = 500, b = 8;
  Eigen::MatrixXd zm(n, b);
  for (Eigen::Index i = 0; i < zm.rows(); ++i) {
    for (int j = 0; j < b; ++j) zm(i, j) = 2.0 * rng.uniform();
    Eigen::Index arg;
    zm.row(i).maxCoeff(&arg);
    zm(i, arg) += 1.0;
  }
  auto soft = soft_summary(zm, 0.01);
  auto hard = hard_summary(zm);
  CHECK((soft.counts - hard.counts).cwiseAbs().maxCoeff() <= 0.01 * n);
  CHECK(std::abs(soft.counts.sum() - n) < 1e-9);
}

TEST_CASE("count conservation for random networks") {
  auto p = nn::MlpParams::init(9, {3, 20, 20, 10}, 0.1);
  auto ds = synthgen::sample_background(400, 5, 0.0, 3.0);
  for (double tau : {0.05, 0.5, 2.0}) {
    auto sc = soft_summary(nn::logits(p, ds.x), tau);
    CHECK(std::abs(sc.counts.sum() - 400.0) < 1e-9);
  }
}

TEST_CASE("poisson nll fixtures and stationarity") {
  // one bin, observed 0, expected 1 -> nll = 1 (dropped-constant convention)
  std::vector<Jet2d> e1{Jet2d::constant(1, 1.0)};
  std::vector<double> o1{0.0};
  CHECK(poisson_nll_jets<double>(e1, o1).v == doctest::Approx(1.0));

  std::vector<Jet2d> e2{Jet2d::constant(1, 2.0)};
  std::vector<double> o2{2.0};
  CHECK(poisson_nll_jets<double>(e2, o2).v == doctest::Approx(2.0 - 2.0 * std::log(2.0)));

  // stationary at observed == expected: d nll / d E_i = 1 - O/E = 0
  std::vector<Jet2d> ev{Jet2d::variable(1, 0, 3.7)};
  std::vector<double> ov{3.7};
  CHECK(std::abs(poisson_nll_jets<double>(ev, ov).g[0]) < 1e-14);

  std::vector<double> bad_o{1.0};
  std::vector<Jet2d> bad_e{Jet2d::constant(1, -0.5)};
  CHECK_THROWS_AS(poisson_nll_jets<double>(bad_e, bad_o), std::domain_error);
}

TEST_CASE("asimov nll equals poisson_nll(expected, expected) and is stationary") {
  auto p = nn::MlpParams::init(13, {3, 16, 12, 6}, 0.1);
  auto sig = synthgen::sample_signal(500, 6).x;
  auto bkg = synthgen::sample_background(500, 7, 0.0, 3.0).x;
  const ThetaPoint theta_s{};
  for (int id = 0; id <= 4; ++id) {
    auto bench = BenchmarkSpec::standard(id);
    const Jet2d nll = train::asimov_nll_jets(p, bench, theta_s, sig, bkg, 0.0, 3.0);
    for (int d = 0; d < bench.n_free(); ++d) {
      INFO("benchmark ", id, " direction ", d);
      CHECK(std::abs(nll.g[static_cast<std::size_t>(d)]) < 1e-6);
    }
  }
}

TEST_CASE("single-bin fisher: sigma = sqrt(1050)") {
  BenchmarkSpec bench;  // only s free
  bench.free = {true, false, false, false};
  const ThetaPoint at{};
  auto theta = make_theta_jets<double>(bench, at);
  std::vector<double> sig{1000.0};
  std::vector<Jet2d> bkgj{Jet2d::constant(0, 1000.0)};
  auto expected = expected_counts<double>(theta, sig, bkgj, 1000.0, 1000.0);
  CHECK(expected[0].v == doctest::Approx(1050.0));
  // one-bin curvature: d2 nll / ds2 = 1/(s+b)
  auto nll = asimov_nll<double>(expected);
  CHECK(nll.hess(0, 0) == doctest::Approx(1.0 / 1050.0).epsilon(1e-9));
  auto fisher = fisher_information(nll, bench);
  const double u = inferno_loss(fisher);
  CHECK(std::abs(std::sqrt(u) - std::sqrt(1050.0)) / std::sqrt(1050.0) < 1e-6);
}

TEST_CASE("two-bin fisher fixture against the closed-form oracle") {
  const Eigen::Vector2d fs(0.8, 0.2), fb(0.2, 0.8);
  const TwoBinOracle oracle(fs, fb, 50.0, 1000.0);

  auto bench = s_b_free();
  ThetaPoint at{};
  auto theta = make_theta_jets<double>(bench, at);
  std::vector<double> sig{0.8 * 700, 0.2 * 700};    // fractions via g_sig = 700
  std::vector<Jet2d> bkgj{Jet2d::constant(0, 0.2 * 900), Jet2d::constant(0, 0.8 * 900)};
  auto expected = expected_counts<double>(theta, sig, bkgj, 700.0, 900.0);
  auto nll = asimov_nll<double>(expected);
  auto fisher = fisher_information(nll, bench);

  CHECK(std::abs(fisher(0, 0) - oracle.info(0, 0)) / oracle.info(0, 0) < 1e-9);
  CHECK(std::abs(fisher(0, 1) - oracle.info(0, 1)) / oracle.info(0, 1) < 1e-9);
  CHECK(std::abs(fisher(1, 1) - oracle.info(1, 1)) / oracle.info(1, 1) < 1e-9);

  const double u = inferno_loss(fisher);
  CHECK(std::abs(u - oracle.cov_ss) / oracle.cov_ss < 1e-6);
  CHECK(u == doctest::Approx(516.67).epsilon(1e-4));
  CHECK(std::sqrt(u) == doctest::Approx(22.73).epsilon(1e-3));

  // spec fixture values for the information matrix itself
  CHECK(fisher(0, 0) == doctest::Approx(0.00271605).epsilon(1e-5));
  CHECK(fisher(0, 1) == doctest::Approx(0.000864198).epsilon(1e-5));
  CHECK(fisher(1, 1) == doctest::Approx(0.00095679).epsilon(1e-5));
}

TEST_CASE("constraints: fisher diagonal shifts and empty list identity") {
  auto bench = BenchmarkSpec::standard(3);  // N(r|0,0.4), N(lambda|3,1)
  ThetaPoint at{};
  auto theta = make_theta_jets<double>(bench, at);

  Jet2d nll = Jet2d::constant(bench.n_free(), 0.0);
  Jet2d with = add_constraints(nll, theta, bench);
  CHECK(with.hess(bench.dir_of(kR), bench.dir_of(kR)) == doctest::Approx(1.0 / 0.16));
  CHECK(with.hess(bench.dir_of(kLambda), bench.dir_of(kLambda)) == doctest::Approx(1.0));

  auto b4 = BenchmarkSpec::standard(4);
  auto theta4 = make_theta_jets<double>(b4, at);
  Jet2d with4 = add_constraints(Jet2d::constant(b4.n_free(), 0.0), theta4, b4);
  CHECK(with4.hess(b4.dir_of(kBRate), b4.dir_of(kBRate)) == doctest::Approx(1e-4));

  auto b2 = BenchmarkSpec::standard(2);  // no constraints
  auto theta2 = make_theta_jets<double>(b2, at);
  Jet2d same = add_constraints(Jet2d::constant(b2.n_free(), 1.23), theta2, b2);
  CHECK(same.v == 1.23);
  for (int i = 0; i < b2.n_free(); ++i)
    for (int j = 0; j <= i; ++j) CHECK(same.hess(i, j) == 0.0);
}

TEST_CASE("constraints never decrease fisher diagonals; tightening never increases U") {
  auto p = nn::MlpParams::init(15, {3, 16, 12, 8}, 0.1);
  auto sig = synthgen::sample_signal(800, 8).x;
  auto bkg = synthgen::sample_background(800, 9, 0.0, 3.0).x;
  const ThetaPoint theta_s{};

  auto b2 = BenchmarkSpec::standard(2);
  auto b3 = BenchmarkSpec::standard(3);  // same free set, with constraints
  const Jet2d nll2 = train::asimov_nll_jets(p, b2, theta_s, sig, bkg, 0.0, 3.0);
  const Jet2d nll3 = train::asimov_nll_jets(p, b3, theta_s, sig, bkg, 0.0, 3.0);
  auto f2 = fisher_information(nll2, b2);
  auto f3 = fisher_information(nll3, b3);
  for (int i = 0; i < f2.k; ++i) CHECK(f3(i, i) >= f2(i, i) - 1e-12);
  CHECK(inferno_loss(f3) <= inferno_loss(f2) + 1e-9);

  // tighter constraints than benchmark 3
  auto tight = b3;
  for (auto& c : tight.constraints) c.width *= 0.5;
  const Jet2d nllt = train::asimov_nll_jets(p, tight, theta_s, sig, bkg, 0.0, 3.0);
  CHECK(inferno_loss(fisher_information(nllt, tight)) <=
        inferno_loss(fisher_information(nll3, b3)) + 1e-9);
}

TEST_CASE("monotone information: freeing nuisances never reduces U") {
  auto p = nn::MlpParams::init(17, {3, 16, 12, 10}, 0.1);
  auto sig = synthgen::sample_signal(1000, 10).x;
  auto bkg = synthgen::sample_background(1000, 11, 0.0, 3.0).x;
  const ThetaPoint theta_s{};

  auto b4nc = BenchmarkSpec::standard(4);
  b4nc.constraints.clear();  // constraints-removed ordering
  const double u0 = train::inferno_loss_value(p, BenchmarkSpec::standard(0), theta_s, sig, bkg, 0.0, 3.0);
  const double u2 = train::inferno_loss_value(p, BenchmarkSpec::standard(2), theta_s, sig, bkg, 0.0, 3.0);
  const double u4 = train::inferno_loss_value(p, b4nc, theta_s, sig, bkg, 0.0, 3.0);
  CHECK(u0 <= u2 + 1e-9);
  CHECK(u2 <= u4 + 1e-9);
}

TEST_CASE("fisher is positive semidefinite on sampled inputs") {
  auto p = nn::MlpParams::init(19, {3, 14, 14, 10}, 0.1);
  auto sig = synthgen::sample_signal(600, 12).x;
  auto bkg = synthgen::sample_background(600, 13, 0.0, 3.0).x;
  auto bench = BenchmarkSpec::standard(4);
  const Jet2d nll = train::asimov_nll_jets(p, bench, ThetaPoint{}, sig, bkg, 0.0, 3.0);
  auto fisher = fisher_information(nll, bench);
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = fisher(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  CHECK(es.eigenvalues().minCoeff() > -1e-9);
}

TEST_CASE("diagonal fisher gives U = 1/I_kk") {
  BenchmarkSpec bench;
  bench.free = {true, false, false, false};
  Jet2d nll = Jet2d::constant(1, 0.0);
  nll.hess(0, 0) = 0.025;
  auto fisher = fisher_information(nll, bench);
  CHECK(inferno_loss(fisher) == doctest::Approx(40.0));
}
