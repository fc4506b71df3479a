#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "pdp/grad.hpp"

using namespace pdp;
using grad::Tape;

namespace {

// finite-difference gradient of a scalar tape program w.r.t. one parameter
// matrix, rebuilt per evaluation
template <typename Builder>
void check_op_gradient(Builder build, std::vector<double> p0, int rows, int cols,
                       double tol = 1e-5) {
  Tape t0;
  int id0 = t0.param(rows, cols, p0);
  int loss0 = build(t0, id0);
  t0.backward(loss0);
  std::vector<double> analytic(t0.gradient(id0).begin(), t0.gradient(id0).end());

  double step = 1e-6;
  for (size_t i = 0; i < p0.size(); ++i) {
    auto eval = [&](double v) {
      std::vector<double> p = p0;
      p[i] = v;
      Tape t;
      int id = t.param(rows, cols, p);
      return t.value(build(t, id))[0];
    };
    double fd = (eval(p0[i] + step) - eval(p0[i] - step)) / (2 * step);
    CHECK(std::abs(fd - analytic[i]) < tol * std::max(1.0, std::abs(fd)));
  }
}

std::vector<double> random_vec(size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("closed-form values") {
  Tape t;
  int x = t.input(1, 1, std::vector<double>{0.0});
  CHECK(t.value(t.sigmoid(x))[0] == doctest::Approx(0.5));
  CHECK(t.value(t.logsigmoid(x))[0] == doctest::Approx(-std::log(2.0)));

  std::vector<double> eye = {1, 0, 0, 1};
  std::vector<double> vec = {3.0, -2.0};
  int m = t.input(2, 2, eye);
  int v = t.input(1, 2, vec);
  auto out = t.value(t.matmul(v, m));
  CHECK(out[0] == 3.0);
  CHECK(out[1] == -2.0);
}

TEST_CASE("d/dx sigmoid at 0 is 0.25") {
  Tape t;
  int x = t.param(1, 1, std::vector<double>{0.0});
  t.backward(t.sigmoid(x));
  CHECK(t.gradient(x)[0] == doctest::Approx(0.25));
}

TEST_CASE("gradient of sum of squares is twice the vector") {
  Tape t;
  std::vector<double> v = {1.0, -2.0, 0.5, 3.0};
  int x = t.param(1, 4, v);
  t.backward(t.sum_all(t.mul(x, x)));
  for (int i = 0; i < 4; ++i) CHECK(t.gradient(x)[i] == doctest::Approx(2 * v[i]));
}

TEST_CASE("every op kind matches finite differences") {
  std::mt19937_64 rng(4);

  SUBCASE("matmul both sides") {
    auto b = random_vec(6, rng);
    check_op_gradient(
        [&](Tape& t, int a) { return t.sum_all(t.matmul(a, t.input(3, 2, b))); },
        random_vec(6, rng), 2, 3);
    auto a = random_vec(6, rng);
    check_op_gradient(
        [&](Tape& t, int p) { return t.sum_all(t.matmul(t.input(2, 3, a), p)); },
        random_vec(6, rng), 3, 2);
  }
  SUBCASE("elementwise add sub mul div") {
    auto other = random_vec(4, rng);
    for (double& v : other) v += 2.5;  // keep divisors away from zero
    check_op_gradient(
        [&](Tape& t, int a) {
          int o = t.input(2, 2, other);
          return t.sum_all(t.add(t.mul(t.sub(a, o), a), t.div(a, o)));
        },
        random_vec(4, rng), 2, 2);
  }
  SUBCASE("div denominator") {
    auto num = random_vec(4, rng);
    check_op_gradient(
        [&](Tape& t, int d) { return t.sum_all(t.div(t.input(2, 2, num), d)); },
        {1.5, -2.0, 0.7, 3.0}, 2, 2);
  }
  SUBCASE("add_row broadcast") {
    auto mat = random_vec(6, rng);
    check_op_gradient(
        [&](Tape& t, int b) { return t.sum_all(t.mul(t.add_row(t.input(2, 3, mat), b),
                                                     t.add_row(t.input(2, 3, mat), b))); },
        random_vec(3, rng), 1, 3);
  }
  SUBCASE("activations and affine") {
    check_op_gradient(
        [&](Tape& t, int a) {
          int s = t.sigmoid(a);
          int l = t.logsigmoid(a);
          int th = t.tanh_(a);
          int e = t.exp_(t.affine(a, 0.3, -0.1));
          return t.sum_all(t.add(t.add(s, l), t.add(th, e)));
        },
        random_vec(5, rng), 1, 5);
  }
  SUBCASE("log and pow clamps in the interior") {
    check_op_gradient(
        [&](Tape& t, int a) {
          int p = t.pow_clamp(a, 7.0, 1e-12, 1.0);
          int lg = t.log_clamp(a, 1e-20);
          return t.sum_all(t.add(p, lg));
        },
        {0.2, 0.5, 0.9, 0.35}, 1, 4);
  }
  SUBCASE("clamp_min passes gradient only above the floor") {
    Tape t;
    int a = t.param(1, 2, std::vector<double>{0.5, -0.5});
    t.backward(t.sum_all(t.clamp_min(a, 0.0)));
    CHECK(t.gradient(a)[0] == doctest::Approx(1.0));
    CHECK(t.gradient(a)[1] == doctest::Approx(0.0));
  }
  SUBCASE("seg_sum and gather") {
    auto ids = std::make_shared<std::vector<int>>(std::vector<int>{0, 1, 0, 1});
    check_op_gradient(
        [&](Tape& t, int a) {
          int s = t.seg_sum(a, ids, 2);
          int g = t.gather(s, ids);
          return t.sum_all(t.mul(g, a));
        },
        random_vec(8, rng), 4, 2);
  }
  SUBCASE("concat_cols") {
    auto other = random_vec(4, rng);
    check_op_gradient(
        [&](Tape& t, int a) {
          int c = t.concat_cols(a, t.input(2, 2, other));
          return t.sum_all(t.mul(c, c));
        },
        random_vec(6, rng), 2, 3);
  }
}

TEST_CASE("gradient is linear in the loss combination") {
  std::mt19937_64 rng(8);
  auto p = random_vec(6, rng);

  auto grads_for = [&](double a, double b) {
    Tape t;
    int x = t.param(2, 3, p);
    int l1 = t.sum_all(t.mul(x, x));
    int l2 = t.sum_all(t.sigmoid(x));
    int loss = t.add(t.affine(l1, a, 0.0), t.affine(l2, b, 0.0));
    t.backward(loss);
    return std::vector<double>(t.gradient(x).begin(), t.gradient(x).end());
  };

  auto g1 = grads_for(1.0, 0.0);
  auto g2 = grads_for(0.0, 1.0);
  auto combo = grads_for(2.5, -1.5);
  for (size_t i = 0; i < p.size(); ++i)
    CHECK(combo[i] == doctest::Approx(2.5 * g1[i] - 1.5 * g2[i]).epsilon(1e-12));
}

TEST_CASE("backward rejects non-scalar losses and params keep gradients") {
  Tape t;
  int x = t.param(2, 2, std::vector<double>{1, 2, 3, 4});
  int y = t.mul(x, x);
  CHECK_THROWS_AS(t.backward(y), std::invalid_argument);
  int s = t.sum_all(y);
  t.backward(s);
  CHECK(t.gradient(x).size() == 4);
}

TEST_CASE("shape errors are rejected") {
  Tape t;
  int a = t.input(2, 3, std::vector<double>(6, 1.0));
  int b = t.input(2, 2, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(t.matmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.input(2, 2, std::vector<double>(5, 0.0)), std::invalid_argument);
}

TEST_CASE("finite_difference_check reports a clean pass for an exact gradient") {
  std::vector<double> p = {0.4, -0.2, 0.9};
  auto loss = [](std::span<const double> q) {
    double s = 0;
    for (double v : q) s += v * v * v;
    return s;
  };
  std::vector<double> analytic = {3 * p[0] * p[0], 3 * p[1] * p[1], 3 * p[2] * p[2]};
  auto rep = grad::finite_difference_check(loss, p, analytic, 1e-5);
  CHECK(rep.checked == 3);
  CHECK(rep.pass(0.99));
  CHECK(rep.max_rel_err < 1e-5);

  // deliberately corrupt one coordinate: the report must notice
  analytic[1] += 0.5;
  auto bad = grad::finite_difference_check(loss, p, analytic, 1e-5);
  CHECK_FALSE(bad.pass(0.999));
}
