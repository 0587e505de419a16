#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hvmc/autodiff.hpp"
#include "hvmc/params.hpp"
#include "hvmc/rng.hpp"

#include <cmath>

using namespace hvmc;

namespace {

// Central finite difference of a scalar function of one coordinate.
template <class F>
double fd(F f, double x, double step = 1e-6) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

}  // namespace

TEST_CASE("square function gradient") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ad::Var x = tape.input(3.0);
  ad::Var y = x * x;
  const Eigen::VectorXd g = ad::grad_of(y, tape);
  CHECK(g.size() == 1);
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("chained primitives match finite differences") {
  auto f = [](double x) {
    return std::tanh(x) * std::exp(-x / 3.0) + std::log(1.0 + x * x) / std::sqrt(x + 2.0) +
           ad::sigmoid_value(x) + std::sinh(x / 5.0) - std::cosh(x / 7.0) +
           std::atanh(x / 4.0) + std::asinh(x) + std::acosh(x + 2.5) + std::abs(x);
  };
  for (double x0 : {0.3, 0.9, 1.7}) {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    ad::Var x = tape.input(x0);
    ad::Var y = ad::tanh(x) * ad::exp(-x / 3.0) + ad::log(1.0 + x * x) / ad::sqrt(x + 2.0) +
                ad::sigmoid(x) + ad::sinh(x / 5.0) - ad::cosh(x / 7.0) + ad::atanh(x / 4.0) +
                ad::asinh(x) + ad::acosh(x + 2.5) + ad::abs(x);
    CHECK(y.value() == doctest::Approx(f(x0)).epsilon(1e-12));
    const Eigen::VectorXd g = ad::grad_of(y, tape);
    CHECK(g[0] == doctest::Approx(fd(f, x0)).epsilon(1e-7));
  }
}

TEST_CASE("forward replay reproduces recorded values bit-for-bit") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  Rng rng(11);
  ad::Var acc = tape.input(rng.uniform(-1.0, 1.0));
  for (int i = 0; i < 200; ++i) {
    ad::Var x = tape.input(rng.uniform(-0.9, 0.9));
    acc = ad::tanh(acc * x + 0.1) + ad::sigmoid(acc - x) * ad::sqrt(x * x + 1.0);
    acc = acc / (1.5 + ad::abs(acc)) + ad::clamp_max(ad::clamp_min(x, -0.5), 0.5);
  }
  const auto replayed = tape.replay();
  REQUIRE(replayed.size() == tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) {
    CHECK(replayed[i] == tape.nodes()[i].val);  // exact, not approximate
  }
}

TEST_CASE("clamp subgradients: zero on the clamped branch, identity inside") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ad::Var a = tape.input(2.0);
  ad::Var b = tape.input(0.25);
  ad::Var ca = ad::clamp_max(a, 1.0);  // active clamp
  ad::Var cb = ad::clamp_max(b, 1.0);  // inactive
  CHECK(ca.value() == 1.0);
  CHECK(cb.value() == 0.25);
  const Eigen::VectorXd ga = ad::grad_of(ca, tape);
  CHECK(ga[0] == 0.0);
  CHECK(ga[1] == 0.0);
  const Eigen::VectorXd gb = ad::grad_of(cb, tape);
  CHECK(gb[0] == 0.0);
  CHECK(gb[1] == 1.0);
}

TEST_CASE("constant expressions stay off the tape") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ad::Var c = ad::Var(2.0) * ad::Var(3.0) + ad::tanh(ad::Var(1.0));
  CHECK_FALSE(c.tracked());
  CHECK(tape.size() == 0);
  CHECK_THROWS_AS((void)ad::grad_of(c, tape), std::invalid_argument);
}

TEST_CASE("multi-seed backward accumulates linearly") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ad::Var x = tape.input(0.7);
  ad::Var f1 = x * x;
  ad::Var f2 = ad::exp(x);
  const std::pair<std::int32_t, double> seeds[] = {{f1.index(), 2.0}, {f2.index(), -1.0}};
  const Eigen::VectorXd g = tape.input_gradient(tape.backward(seeds));
  CHECK(g[0] == doctest::Approx(2.0 * 2.0 * 0.7 - std::exp(0.7)).epsilon(1e-14));
}

TEST_CASE("gradients are deterministic for identical inputs") {
  auto run = [] {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Rng rng(99);
    ad::Var acc = tape.input(0.1);
    for (int i = 0; i < 50; ++i) {
      acc = ad::tanh(acc + tape.input(rng.uniform(-1.0, 1.0))) * 1.01;
    }
    return ad::grad_of(acc, tape);
  };
  const Eigen::VectorXd g1 = run();
  const Eigen::VectorXd g2 = run();
  REQUIRE(g1.size() == g2.size());
  for (Eigen::Index i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("division and max/min derivative rules") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ad::Var a = tape.input(1.5);
  ad::Var b = tape.input(-2.5);
  ad::Var q = a / b;
  Eigen::VectorXd g = ad::grad_of(q, tape);
  CHECK(g[0] == doctest::Approx(1.0 / -2.5).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(-(1.5 / -2.5) / -2.5).epsilon(1e-12));

  ad::Var m = ad::max(a, b);
  g = ad::grad_of(m, tape);
  CHECK(m.value() == 1.5);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);

  ad::Var mn = ad::min(a, b);
  g = ad::grad_of(mn, tape);
  CHECK(mn.value() == -2.5);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 1.0);
}

TEST_CASE("parameter counts match the published ansatz sizes") {
  CHECK(param_count(CellVariant::euclidean_rnn, 70) == 5394);
  CHECK(param_count(CellVariant::poincare_rnn, 70) == 5394);
  CHECK(param_count(CellVariant::lorentz_rnn, 70) == 5394);
  CHECK(param_count(CellVariant::euclidean_gru, 70) == 15614);
  CHECK(param_count(CellVariant::poincare_gru, 70) == 15614);
  CHECK(param_count(CellVariant::lorentz_gru, 70) == 15614);
  CHECK(param_count(CellVariant::euclidean_rnn, 80) == 6964);
  CHECK(param_count(CellVariant::lorentz_rnn, 80) == 6964);
}

TEST_CASE("parameter count closed forms") {
  for (int h : {1, 4, 16, 70, 80}) {
    const auto hh = static_cast<Eigen::Index>(h);
    CHECK(param_count(CellVariant::euclidean_rnn, h) ==
          hh * hh + 2 * hh + hh + 2 * (2 * hh + 2));
    CHECK(param_count(CellVariant::euclidean_gru, h) ==
          3 * (hh * hh + 2 * hh + hh) + 2 * (2 * hh + 2));
  }
}

TEST_CASE("segment table covers the parameter vector exactly") {
  for (CellVariant v : {CellVariant::euclidean_rnn, CellVariant::poincare_gru,
                        CellVariant::lorentz_gru}) {
    const ParamLayout layout = make_layout(v, 9);
    Eigen::Index expect = 0;
    for (const auto& seg : layout.segments) {
      CHECK(seg.offset == expect);  // contiguous and disjoint
      expect += seg.size();
    }
    CHECK(expect == layout.total);
  }
  const ParamLayout gru = make_layout(CellVariant::poincare_gru, 5);
  CHECK(gru.find("b_r").geometry == Geometry::poincare);
  CHECK(gru.find("b_r").role == SegmentRole::bias);
  CHECK(gru.find("W_h").geometry == Geometry::euclidean);
  CHECK(gru.find("amp_b").geometry == Geometry::euclidean);
  const ParamLayout lor = make_layout(CellVariant::lorentz_rnn, 5);
  CHECK(lor.find("b_h").geometry == Geometry::lorentz);
}
