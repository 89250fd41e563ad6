#include "inferno/verify/gradcheck.hpp"

#include <cmath>
#include <functional>

#include "inferno/autodiff/jet.hpp"
#include "inferno/autodiff/small_matrix.hpp"
#include "inferno/autodiff/tape.hpp"
#include "inferno/common/rng.hpp"

namespace inferno::verify {

using autodiff::Jet2;
using autodiff::Jet2d;
using autodiff::Jet2v;
using autodiff::Tape;
using autodiff::Var;

namespace {

// relative above unit scale, absolute below: FD noise on exact-zero entries
// must not register as relative error
double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1.0);
}

/// central finite difference of a scalar function of n doubles
double central_fd(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<double> x, std::size_t i, double h) {
  x[i] += h;
  const double up = f(x);
  x[i] -= 2.0 * h;
  const double dn = f(x);
  return (up - dn) / (2.0 * h);
}

struct OpCase {
  const char* name;
  int arity;
  // evaluate in either scalar lane
  std::function<Var(const std::vector<Var>&)> fv;
  std::function<double(const std::vector<double>&)> fd;
  // draw inputs in the op's smooth domain, away from kinks/poles
  std::function<double(RandomStream&)> draw;
};

std::vector<OpCase> op_cases() {
  using autodiff::exp;
  using autodiff::log;
  using autodiff::relu;
  auto unit = [](RandomStream& r) { return r.uniform() * 4.0 - 2.0; };
  auto pos = [](RandomStream& r) { return 0.2 + r.uniform() * 3.0; };
  auto off_kink = [](RandomStream& r) {
    const double u = r.uniform() * 2.0 - 1.0;
    return u + (u >= 0.0 ? 0.1 : -0.1);
  };
  std::vector<OpCase> ops;
  ops.push_back({"add", 2, [](const std::vector<Var>& x) { return x[0] + x[1]; },
                 [](const std::vector<double>& x) { return x[0] + x[1]; }, unit});
  ops.push_back({"sub", 2, [](const std::vector<Var>& x) { return x[0] - x[1]; },
                 [](const std::vector<double>& x) { return x[0] - x[1]; }, unit});
  ops.push_back({"mul", 2, [](const std::vector<Var>& x) { return x[0] * x[1]; },
                 [](const std::vector<double>& x) { return x[0] * x[1]; }, unit});
  ops.push_back({"div", 2, [](const std::vector<Var>& x) { return x[0] / x[1]; },
                 [](const std::vector<double>& x) { return x[0] / x[1]; }, pos});
  ops.push_back({"neg", 1, [](const std::vector<Var>& x) { return -x[0]; },
                 [](const std::vector<double>& x) { return -x[0]; }, unit});
  ops.push_back({"exp", 1, [](const std::vector<Var>& x) { return exp(x[0]); },
                 [](const std::vector<double>& x) { return std::exp(x[0]); }, unit});
  ops.push_back({"log", 1, [](const std::vector<Var>& x) { return log(x[0]); },
                 [](const std::vector<double>& x) { return std::log(x[0]); }, pos});
  ops.push_back({"relu", 1, [](const std::vector<Var>& x) { return relu(x[0]); },
                 [](const std::vector<double>& x) { return x[0] > 0.0 ? x[0] : 0.0; }, off_kink});
  ops.push_back({"sum", 4,
                 [](const std::vector<Var>& x) { return autodiff::sum(x); },
                 [](const std::vector<double>& x) {
                   double s = 0.0;
                   for (double v : x) s += v;
                   return s;
                 },
                 unit});
  // a composed expression touching every kind at once
  ops.push_back({"composed", 3,
                 [](const std::vector<Var>& x) {
                   Var a = x[0] * x[1] + exp(x[2] * 0.3);
                   Var b = log(x[0] * x[0] + 1.5) - x[2] / (x[1] * x[1] + 2.0);
                   return relu(a + 0.2) * b - (-a);
                 },
                 [](const std::vector<double>& x) {
                   const double a = x[0] * x[1] + std::exp(x[2] * 0.3);
                   const double b =
                       std::log(x[0] * x[0] + 1.5) - x[2] / (x[1] * x[1] + 2.0);
                   return (a + 0.2 > 0.0 ? a + 0.2 : 0.0) * b + a;
                 },
                 unit});
  return ops;
}

}  // namespace

std::vector<CheckResult> gradient_fd_checks(std::uint64_t seed, int cases_per_op) {
  const double h = 1e-5, tol = 1e-5;
  std::vector<CheckResult> out;
  RandomStream rng(seed, "gradcheck");
  for (const OpCase& op : op_cases()) {
    CheckResult res{std::string("gradient/") + op.name, 0, 0.0, tol, false};
    for (int c = 0; c < cases_per_op; ++c) {
      std::vector<double> x0(static_cast<std::size_t>(op.arity));
      for (auto& x : x0) x = op.draw(rng);
      Tape tape;
      std::vector<Var> leaves;
      leaves.reserve(x0.size());
      for (double x : x0) leaves.push_back(autodiff::make_leaf(tape, x));
      const Var y = op.fv(leaves);
      const auto grad = autodiff::gradient(y, leaves);
      for (std::size_t i = 0; i < x0.size(); ++i) {
        const double fd = central_fd(op.fd, x0, i, h);
        res.max_rel_err = std::max(res.max_rel_err, rel_err(grad[i], fd));
      }
      ++res.cases;
    }
    res.pass = res.max_rel_err < tol;
    out.push_back(res);
  }
  return out;
}

namespace {

/// smooth 3-direction test function used for both Hessian checks; phi are
/// extra parameters the nested check differentiates through
template <class T>
T hess_test_fn(const std::array<Jet2<T>, 3>& th, const std::array<T, 2>& phi,
               Jet2<T>* out_jet = nullptr) {
  using autodiff::exp;
  using autodiff::log;
  using std::exp;
  using std::log;
  Jet2<T> a = th[0] * th[1] + Jet2<T>::constant(th[0].k, phi[0]) * th[0] * th[0];
  Jet2<T> b = exp(th[2] * 0.4) * (th[1] + 2.5);
  Jet2<T> c = log(th[0] * th[0] + th[2] * th[2] + 1.2);
  Jet2<T> f = a + b * c + Jet2<T>::constant(th[0].k, phi[1]) * th[1] * th[2];
  if (out_jet) *out_jet = f;
  return f.v;
}

double hess_value(const std::array<double, 3>& t, const std::array<double, 2>& phi) {
  std::array<Jet2d, 3> th;
  for (int i = 0; i < 3; ++i) th[i] = Jet2d::constant(3, t[i]);
  return hess_test_fn<double>(th, phi);
}

}  // namespace

CheckResult hessian_fd_check(std::uint64_t seed, int cases) {
  const double h = 1e-4, tol = 1e-4;
  CheckResult res{"hessian/nested-fd", 0, 0.0, tol, false};
  RandomStream rng(seed, "hesscheck");
  for (int c = 0; c < cases; ++c) {
    std::array<double, 3> t{};
    for (auto& v : t) v = rng.uniform() * 2.0 - 1.0;
    const std::array<double, 2> phi{rng.uniform() + 0.5, rng.uniform() * 2.0 - 1.0};

    std::array<Jet2d, 3> th;
    for (int i = 0; i < 3; ++i) th[i] = Jet2d::variable(3, i, t[i]);
    Jet2d f;
    hess_test_fn<double>(th, phi, &f);

    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) {
        auto t2 = t;
        t2[i] += h;
        t2[j] += h;
        const double fpp = hess_value(t2, phi);
        t2[j] -= 2.0 * h;
        const double fpm = hess_value(t2, phi);
        t2[i] -= 2.0 * h;
        const double fmm = hess_value(t2, phi);
        t2[j] += 2.0 * h;
        const double fmp = hess_value(t2, phi);
        const double fd = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        res.max_rel_err = std::max(res.max_rel_err, rel_err(f.hess(i, j), fd));
      }
    ++res.cases;
  }
  res.pass = res.max_rel_err < tol;
  return res;
}

CheckResult nested_hessian_gradient_check(std::uint64_t seed, int cases) {
  const double h = 1e-5, tol = 1e-4;
  CheckResult res{"hessian/phi-gradient", 0, 0.0, tol, false};
  RandomStream rng(seed, "nestedcheck");
  for (int c = 0; c < cases; ++c) {
    std::array<double, 3> t{};
    for (auto& v : t) v = rng.uniform() * 2.0 - 1.0;
    std::array<double, 2> phi0{rng.uniform() + 0.5, rng.uniform() * 2.0 - 1.0};

    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) {
        Tape tape;
        std::array<Var, 2> phi{autodiff::make_leaf(tape, phi0[0]),
                               autodiff::make_leaf(tape, phi0[1])};
        std::array<Jet2v, 3> th;
        for (int d = 0; d < 3; ++d) th[d] = Jet2v::variable(3, d, Var(t[d]));
        Jet2v f;
        hess_test_fn<Var>(th, phi, &f);
        const auto grad = autodiff::gradient(f.hess(i, j), phi);

        for (std::size_t p = 0; p < 2; ++p) {
          auto fd_entry = [&](double delta) {
            auto ph = phi0;
            ph[p] += delta;
            std::array<Jet2d, 3> thd;
            for (int d = 0; d < 3; ++d) thd[d] = Jet2d::variable(3, d, t[d]);
            Jet2d fj;
            hess_test_fn<double>(thd, ph, &fj);
            return fj.hess(i, j);
          };
          const double fd = (fd_entry(h) - fd_entry(-h)) / (2.0 * h);
          res.max_rel_err = std::max(res.max_rel_err, rel_err(grad[p], fd));
        }
      }
    ++res.cases;
  }
  res.pass = res.max_rel_err < tol;
  return res;
}

CheckResult inverse_consistency_check(std::uint64_t seed, int cases) {
  const double tol = 1e-10;
  CheckResult res{"inverse/identity-residual", 0, 0.0, tol, false};
  RandomStream rng(seed, "invcheck");
  for (int c = 0; c < cases; ++c) {
    const int k = 1 + static_cast<int>(rng.next_u64() % 4);
    // random SPD: A A^T + small diagonal
    std::array<double, 16> a{}, m{};
    for (int i = 0; i < k * k; ++i) a[i] = rng.uniform() * 2.0 - 1.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double s = (i == j) ? 0.5 : 0.0;
        for (int l = 0; l < k; ++l) s += a[i * k + l] * a[j * k + l];
        m[i * k + j] = s;
      }
    const auto inv = autodiff::invert_small_matrix(k, m.data());
    if (inv.ridged) continue;  // condition-limited draws are exercised elsewhere
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double s = 0.0;
        for (int l = 0; l < k; ++l) s += m[i * k + l] * inv(l, j);
        res.max_rel_err = std::max(res.max_rel_err, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    ++res.cases;
  }
  res.pass = res.max_rel_err < tol;
  return res;
}

}  // namespace inferno::verify
