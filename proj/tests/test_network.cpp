#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "probevo/irprop.hpp"
#include "probevo/network.hpp"

using namespace probevo;

TEST_CASE("weight counts") {
  CHECK(weight_count(LayerSizes::parse("2-8-1")) == 33);
  CHECK(weight_count(LayerSizes::parse("2-2-6-1")) == 31);
  CHECK(weight_count(LayerSizes::parse("2-5-2-1")) == 30);
  CHECK(weight_count(LayerSizes::parse("2-4-3-1")) == 31);
  // 6+9+6+2 connections plus 3+3+2+1 biases.
  CHECK(weight_count(LayerSizes::parse("2-3-3-2-1")) == 32);
  for (std::size_t n = 1; n <= 64; ++n) CHECK(weight_count(LayerSizes({2, n, 1})) == 4 * n + 1);
  CHECK(weight_count(LayerSizes::parse("2-1")) == 3);
}

TEST_CASE("layer sizes validation") {
  CHECK(LayerSizes::parse("2-4-3-1").label() == "2-4-3-1");
  CHECK_THROWS_AS(LayerSizes::parse("3-4-1"), std::invalid_argument);
  CHECK_THROWS_AS(LayerSizes::parse("2-4-2"), std::invalid_argument);
  CHECK_THROWS_AS(LayerSizes::parse("2"), std::invalid_argument);
  CHECK_THROWS_AS(LayerSizes::parse("2-0-1"), std::invalid_argument);
  CHECK_THROWS_AS(LayerSizes::parse("2--1"), std::invalid_argument);
  CHECK_THROWS_AS(LayerSizes::parse("2-x-1"), std::invalid_argument);
}

TEST_CASE("activation") {
  CHECK(activation(0.0) == 0.0);
  CHECK(activation(100.0) == doctest::Approx(1.7159).epsilon(1e-15));
  CHECK(activation(-100.0) == doctest::Approx(-1.7159).epsilon(1e-15));
  // 1.7159 * tanh(1), evaluated at 30 digits.
  CHECK(activation(1.5) == doctest::Approx(1.30681941220449697).epsilon(1e-15));
  for (double x : {-3.0, -0.7, 0.2, 1.9}) {
    CHECK(activation(-x) == -activation(x));
    const double fd = (activation(x + 1e-6) - activation(x - 1e-6)) / 2e-6;
    CHECK(activation_derivative(x) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("tanh kernel agrees with std::tanh") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double x = mant(rng) * std::pow(10.0, static_cast<double>(rng() % 16) - 14.0);
    const double want = std::tanh(x);
    const double got = tanh_kernel(x);
    worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-300));
  }
  CHECK(worst < 2e-15);
  CHECK(tanh_kernel(0.0) == 0.0);
  CHECK(tanh_kernel(1e6) == 1.0);
  CHECK(tanh_kernel(-1e6) == -1.0);
  CHECK(tanh_kernel(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(std::isnan(tanh_kernel(std::numeric_limits<double>::quiet_NaN())));
}

TEST_CASE("pixel coordinates span [-1, 1]") {
  const Dims d{5, 3};
  CHECK(pixel_coord(d, 0, 0).x == -1.0);
  CHECK(pixel_coord(d, 0, 0).y == -1.0);
  CHECK(pixel_coord(d, 4, 2).x == 1.0);
  CHECK(pixel_coord(d, 4, 2).y == 1.0);
  CHECK(pixel_coord(d, 2, 1).x == 0.0);
  CHECK(pixel_coord(Dims{1, 1}, 0, 0).x == 0.0);
}

TEST_CASE("forward pass") {
  Network zero(LayerSizes::parse("2-5-3-1"));
  CHECK(forward(zero, {0.3, -0.9}) == 0.0);

  Network one(LayerSizes::parse("2-1-1"));
  one.weight(1, 0, 0) = 0.3;
  one.weight(1, 1, 0) = -0.2;
  one.bias(1, 0) = 0.1;
  one.weight(2, 0, 0) = 0.8;
  one.bias(2, 0) = -0.05;
  CHECK(forward(one, {0.5, -1.0}) == doctest::Approx(0.393146878006056867).epsilon(1e-14));

  std::mt19937_64 rng(4);
  const Network net = Network::random(LayerSizes::parse("2-8-4-1"), rng, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double x = std::uniform_real_distribution<double>(-1, 1)(rng);
    const double y = std::uniform_real_distribution<double>(-1, 1)(rng);
    const double out = forward(net, {x, y});
    CHECK(std::abs(out) < kActivationScale);
    CHECK(out == doctest::Approx(oracle::output(net, x, y)).epsilon(1e-13));
    CHECK(std::abs(forward(net, {x + 1e-9, y}) - out) < 1e-6);
  }
}

TEST_CASE("evaluate") {
  // Output saturates at 0.9: single bias with a*tanh(b*z) = 0.9.
  Network net(LayerSizes::parse("2-1"));
  net.bias(1, 0) = std::atanh(0.9 / kActivationScale) / kActivationSlope;
  const auto ones = evaluate(net, BinaryImage(4, 4, 1));
  CHECK(ones.fraction_recognized == 1.0);
  CHECK(ones.mse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(evaluate(net, BinaryImage(4, 4, 0)).fraction_recognized == 0.0);

  // Exactly zero output is never a recognition.
  Network zero(LayerSizes::parse("2-3-1"));
  CHECK(evaluate(zero, BinaryImage(3, 3, 1)).fraction_recognized == 0.0);
  CHECK(evaluate(zero, BinaryImage(3, 3, 0)).fraction_recognized == 0.0);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Network n = Network::random(LayerSizes::parse("2-4-1"), rng, 2.0);
    const auto img = oracle::random_image(5, 5, rng);
    const auto got = evaluate(n, img);
    const auto want = oracle::evaluate(n, img);
    CHECK(got.mse == doctest::Approx(want.mse).epsilon(1e-13));
    CHECK(got.fraction_recognized == want.fraction);
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(77);
  const char* configs[] = {"2-1", "2-2-1", "2-4-1", "2-8-1", "2-3-3-2-1", "2-4-3-1"};
  for (int trial = 0; trial < 30; ++trial) {
    const auto sizes = LayerSizes::parse(configs[trial % 6]);
    const Network net = Network::random(sizes, rng, 1.0);
    const auto img = oracle::random_image(2 + rng() % 5, 2 + rng() % 5, rng);
    const auto lg = loss_and_gradient(net, img);
    const auto fd = oracle::fd_gradient(net, img);
    CHECK(lg.eval.mse == doctest::Approx(oracle::evaluate(net, img).mse).epsilon(1e-13));
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double scale = std::max(std::abs(fd[i]), 1e-6);
      CHECK(std::abs(lg.grad[i] - fd[i]) / scale < 1e-4);
    }
  }
}

TEST_CASE("gradient vanishes where outputs hit their targets") {
  // Output exactly +1 everywhere on an all-ones image.
  Network net(LayerSizes::parse("2-1"));
  net.bias(1, 0) = std::atanh(1.0 / kActivationScale) / kActivationSlope;
  const auto lg = loss_and_gradient(net, BinaryImage(3, 3, 1));
  CHECK(lg.eval.mse == doctest::Approx(0.0).epsilon(1e-30));
  for (double g : lg.grad) CHECK(std::abs(g) < 1e-15);
}

TEST_CASE("weights CSV round trip is exact") {
  std::mt19937_64 rng(9);
  const Network net = Network::random(LayerSizes::parse("2-4-3-1"), rng);
  std::stringstream buf;
  write_weights_csv(buf, net);
  CHECK(buf.str().rfind("layer,from,to,value\n1,0,0,", 0) == 0);
  CHECK(buf.str().find("\n1,-1,0,") != std::string::npos);
  CHECK(read_weights_csv(buf) == net);

  std::istringstream missing("layer,from,to,value\n1,0,0,0.5\n");
  CHECK_THROWS(read_weights_csv(missing));
  std::istringstream no_header("1,0,0,0.5\n");
  CHECK_THROWS(read_weights_csv(no_header));
}

TEST_CASE("iRprop+ step size adaptation") {
  std::vector<double> w{0.0};
  IRpropState st(1);
  const std::vector<double> g{1.0};
  irprop_plus_step(w, g, st, 1.0);
  CHECK(st.step[0] == doctest::Approx(0.1));
  CHECK(w[0] == doctest::Approx(-0.1));
  irprop_plus_step(w, g, st, 0.9);
  irprop_plus_step(w, g, st, 0.8);
  CHECK(st.step[0] == doctest::Approx(0.1 * 1.2 * 1.2));
  CHECK(w[0] == doctest::Approx(-0.1 - 0.12 - 0.144));

  IRpropState capped(1, {.delta_initial = 40.0});
  std::vector<double> v{0.0};
  for (int i = 0; i < 5; ++i) irprop_plus_step(v, g, capped, 1.0);
  CHECK(capped.step[0] == 50.0);
}

TEST_CASE("iRprop+ backtracks only when the error grew") {
  std::vector<double> w{1.0};
  IRpropState st(1);
  irprop_plus_step(w, std::vector<double>{1.0}, st, 1.0);
  const double before_flip = w[0];
  CHECK(before_flip == doctest::Approx(0.9));
  irprop_plus_step(w, std::vector<double>{-1.0}, st, 2.0);  // sign flip, error up
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(st.step[0] == doctest::Approx(0.05));
  CHECK(st.prev_grad[0] == 0.0);

  std::vector<double> u{1.0};
  IRpropState st2(1);
  irprop_plus_step(u, std::vector<double>{1.0}, st2, 1.0);
  irprop_plus_step(u, std::vector<double>{-1.0}, st2, 0.5);  // sign flip, error down
  CHECK(u[0] == doctest::Approx(0.9));
  // Next step after a flip moves with the shrunken step.
  irprop_plus_step(u, std::vector<double>{-1.0}, st2, 0.4);
  CHECK(u[0] == doctest::Approx(0.95));

  std::vector<double> z{2.0};
  IRpropState st3(1);
  irprop_plus_step(z, std::vector<double>{0.0}, st3, 1.0);
  CHECK(z[0] == 2.0);

  std::vector<double> bad{0.0, 0.0};
  CHECK_THROWS_AS(irprop_plus_step(bad, std::vector<double>{1.0}, st3, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(IRpropState(1, {.eta_plus = 0.9}), std::invalid_argument);
}

TEST_CASE("iRprop+ converges on a 1-D quadratic") {
  // E(w) = (w - 3)^2, replayed against a scalar reimplementation.
  std::vector<double> w{0.0};
  IRpropState st(1);
  double sw = 0.0, sstep = 0.1, sprev = 0.0, supd = 0.0, serr = 1e300;
  int steps = 0;
  for (; steps < 200 && std::abs(w[0] - 3.0) > 1e-6; ++steps) {
    const double e = (w[0] - 3.0) * (w[0] - 3.0);
    irprop_plus_step(w, std::vector<double>{2.0 * (w[0] - 3.0)}, st, e);

    double g = 2.0 * (sw - 3.0);
    const double se = (sw - 3.0) * (sw - 3.0);
    if (sprev * g > 0) {
      sstep = std::min(sstep * 1.2, 50.0);
      supd = g > 0 ? -sstep : sstep;
      sw += supd;
    } else if (sprev * g < 0) {
      sstep = std::max(sstep * 0.5, 1e-6);
      if (se > serr) {
        sw -= supd;
        supd = -supd;
      } else {
        supd = 0;
      }
      g = 0;
    } else {
      supd = g > 0 ? -sstep : (g < 0 ? sstep : 0.0);
      sw += supd;
    }
    sprev = g;
    serr = se;
    CHECK(w[0] == sw);
  }
  CHECK(steps <= 200);
  CHECK(std::abs(w[0] - 3.0) <= 1e-6);
}

TEST_CASE("iRprop+ step sizes stay within bounds") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise;
  std::vector<double> w(8, 0.0);
  IRpropState st(8);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> g(8);
    for (auto& v : g) v = noise(rng) * (k % 7 == 0 ? 0.0 : 1.0);
    irprop_plus_step(w, g, st, noise(rng));
    for (double d : st.step) {
      CHECK(d >= st.config.delta_min);
      CHECK(d <= st.config.delta_max);
    }
  }
}
