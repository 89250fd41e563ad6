#include <cmath>

#include "doctest.h"
#include "inferno/autodiff/jet.hpp"
#include "inferno/autodiff/small_matrix.hpp"
#include "inferno/autodiff/tape.hpp"
#include "inferno/verify/gradcheck.hpp"

using namespace inferno;
using autodiff::Jet2d;
using autodiff::Jet2v;
using autodiff::Tape;
using autodiff::Var;

TEST_CASE("gradient of x^2 at 3") {
  Tape t;
  Var x = autodiff::make_leaf(t, 3.0);
  Var y = x * x;
  auto g = autodiff::gradient(y, std::array{x});
  CHECK(g[0] == doctest::Approx(6.0));
}

TEST_CASE("gradient of x*y at (2,5)") {
  Tape t;
  Var x = autodiff::make_leaf(t, 2.0);
  Var y = autodiff::make_leaf(t, 5.0);
  auto g = autodiff::gradient(x * y, std::array{x, y});
  CHECK(g[0] == doctest::Approx(5.0));
  CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("rosenbrock gradient matches central differences") {
  auto f = [](double x, double y) {
    return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
  };
  const double x0 = 0.5, y0 = 0.5, h = 1e-5;
  Tape t;
  Var x = autodiff::make_leaf(t, x0);
  Var y = autodiff::make_leaf(t, y0);
  Var one(1.0);
  Var r = (one - x) * (one - x) + Var(100.0) * (y - x * x) * (y - x * x);
  auto g = autodiff::gradient(r, std::array{x, y});
  const double gx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2 * h);
  const double gy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2 * h);
  CHECK(std::abs(g[0] - gx) / std::abs(gx) < 1e-6);
  CHECK(std::abs(g[1] - gy) / std::abs(gy) < 1e-6);
}

TEST_CASE("hessian of bilinear form") {
  auto t0 = Jet2d::variable(2, 0, 0.7);
  auto t1 = Jet2d::variable(2, 1, -1.3);
  auto f = t0 * t1;
  CHECK(f.hess(0, 0) == doctest::Approx(0.0));
  CHECK(f.hess(0, 1) == doctest::Approx(1.0));
  CHECK(f.hess(1, 0) == doctest::Approx(1.0));
  CHECK(f.hess(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("hessian of exp at origin") {
  auto t0 = Jet2d::variable(1, 0, 0.0);
  auto f = autodiff::exp(t0);
  CHECK(f.v == doctest::Approx(1.0));
  CHECK(f.g[0] == doctest::Approx(1.0));
  CHECK(f.hess(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("phi-differentiable hessian entry: f = phi * theta0^2") {
  Tape tape;
  Var phi = autodiff::make_leaf(tape, 1.7);
  auto th = Jet2v::variable(1, 0, Var(0.9));
  auto f = Jet2v::constant(1, phi) * th * th;
  CHECK(autodiff::value_of(f.hess(0, 0)) == doctest::Approx(2.0 * 1.7));
  auto g = autodiff::gradient(f.hess(0, 0), std::array{phi});
  CHECK(g[0] == doctest::Approx(2.0));
}

TEST_CASE("hessian symmetry is structural") {
  auto a = Jet2d::variable(4, 0, 0.3);
  auto b = Jet2d::variable(4, 3, -0.8);
  auto f = autodiff::exp(a * b) * a;
  CHECK(&f.hess(1, 3) == &f.hess(3, 1));
  CHECK(&f.hess(0, 2) == &f.hess(2, 0));
}

TEST_CASE("invert identity and diagonal") {
  const double id3[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  auto inv = autodiff::invert_small_matrix(3, id3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(inv(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

  const double d2[4] = {2, 0, 0, 4};
  auto inv2 = autodiff::invert_small_matrix(2, d2);
  CHECK(inv2(0, 0) == doctest::Approx(0.5));
  CHECK(inv2(1, 1) == doctest::Approx(0.25));
  CHECK(inv2(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("two-bin fisher fixture inverse") {
  // closed-form 2x2 inverse oracle: adj / det
  const double m[4] = {0.00271605, 0.000864198, 0.000864198, 0.00095679};
  const double det = m[0] * m[3] - m[1] * m[2];
  const double want = m[3] / det;
  auto inv = autodiff::invert_small_matrix(2, m);
  CHECK(std::abs(inv(0, 0) - want) / want < 1e-10);
  CHECK(want == doctest::Approx(516.67).epsilon(1e-3));
}

TEST_CASE("ridge flag on singular input") {
  const double m[4] = {1.0, 1.0, 1.0, 1.0};
  auto inv = autodiff::invert_small_matrix(2, m);
  CHECK(inv.ridged);
}

TEST_CASE("inverse entries differentiable: d(1/m) = -1/m^2") {
  Tape tape;
  Var m00 = autodiff::make_leaf(tape, 2.5);
  Var m[1] = {m00};
  auto inv = autodiff::invert_small_matrix(1, m);
  auto g = autodiff::gradient(inv(0, 0), std::array{m00});
  CHECK(g[0] == doctest::Approx(-1.0 / (2.5 * 2.5)));
}

TEST_CASE("fd sweeps over op kinds") {
  for (const auto& res : verify::gradient_fd_checks(11, 25)) {
    INFO(res.name, " max_rel_err=", res.max_rel_err);
    CHECK(res.pass);
  }
}

TEST_CASE("hessian fd sweep") {
  auto res = verify::hessian_fd_check(12, 25);
  INFO(res.max_rel_err);
  CHECK(res.pass);
}

TEST_CASE("nested phi-gradient-of-hessian fd sweep") {
  auto res = verify::nested_hessian_gradient_check(13, 25);
  INFO(res.max_rel_err);
  CHECK(res.pass);
}

TEST_CASE("inverse consistency sweep") {
  auto res = verify::inverse_consistency_check(14, 50);
  INFO(res.max_rel_err);
  CHECK(res.pass);
}

TEST_CASE("backward reports NaN with node kind") {
  Tape t;
  Var x = autodiff::make_leaf(t, -1.0);
  Var y = autodiff::log(x);  // NaN value
  Var z = y * y;
  CHECK_THROWS_WITH_AS(autodiff::gradient(z, std::array{x}), doctest::Contains("NaN"),
                       std::runtime_error);
}
