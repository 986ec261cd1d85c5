#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spectraldip/optim.hpp"
#include "spectraldip/tensor.hpp"

using namespace spectraldip;

TEST_CASE("conv2d identity with a 1x1 unit kernel") {
  Tensor x = oracle::random_tensor({1, 4, 4}, 1);
  Tensor w = Tensor::from_data({1, 1, 1, 1}, {1.0});
  Tensor y = conv2d(x, w, Tensor(), 1, 0);
  REQUIRE(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.data().size(); ++i)
    CHECK(y.data()[i] == doctest::Approx(x.data()[i]).epsilon(0));
}

TEST_CASE("conv2d box sum of a constant input") {
  Tensor x = Tensor::full({1, 5, 5}, 3.0);
  Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor y = conv2d(x, w, Tensor(), 1, 0);
  CHECK(y.dim(1) == 3);
  // interior of the 'valid' output: all taps covered
  CHECK(y.data()[4] == doctest::Approx(27.0));

  Tensor yp = conv2d(x, w, Tensor(), 1, 1);
  CHECK(yp.dim(1) == 5);
  CHECK(yp.data()[2 * 5 + 2] == doctest::Approx(27.0));  // 9c at the interior
  CHECK(yp.data()[0] == doctest::Approx(12.0));          // corner: 4 taps
}

TEST_CASE("conv2d output size with stride") {
  Tensor x = oracle::random_tensor({2, 8, 8}, 2);
  Tensor w = oracle::random_tensor({3, 2, 3, 3}, 3);
  Tensor b = Tensor::zeros({3});
  Tensor y = conv2d(x, w, b, 2, 1);
  CHECK(y.shape() == std::vector<int>{3, 4, 4});
}

TEST_CASE("conv2d rejects channel mismatch") {
  Tensor x = oracle::random_tensor({2, 4, 4}, 4);
  Tensor w = oracle::random_tensor({1, 3, 3, 3}, 5);
  CHECK_THROWS_AS(conv2d(x, w, Tensor(), 1, 1), std::invalid_argument);
}

TEST_CASE("conv2d gradients match finite differences") {
  Tensor x = oracle::random_tensor({1, 4, 4}, 10, true);
  Tensor w = oracle::random_tensor({2, 1, 3, 3}, 11, true);
  Tensor b = Tensor::zeros({2}, true);
  auto forward = [&]() { return conv2d(x, w, b, 1, 1); };
  auto loss = oracle::weighted_sum_loss(forward, 12);
  CHECK(oracle::fd_check(x, loss) < 1e-6);
  CHECK(oracle::fd_check(w, loss) < 1e-6);
  CHECK(oracle::fd_check(b, loss) < 1e-6);
}

TEST_CASE("conv2d stride-2 gradients match finite differences") {
  Tensor x = oracle::random_tensor({2, 6, 6}, 20, true);
  Tensor w = oracle::random_tensor({2, 2, 3, 3}, 21, true);
  Tensor b = oracle::random_tensor({2}, 22, true);
  auto forward = [&]() { return conv2d(x, w, b, 2, 1); };
  auto loss = oracle::weighted_sum_loss(forward, 23);
  CHECK(oracle::fd_check(x, loss) < 1e-6);
  CHECK(oracle::fd_check(w, loss) < 1e-6);
}

TEST_CASE("relu forward and subgradient convention") {
  Tensor x = Tensor::from_data({3}, {-1.0, 0.0, 2.0}, true);
  Tensor y = relu(x);
  CHECK(y.data() == std::vector<double>{0.0, 0.0, 2.0});

  Tensor s = sum(y);
  backward(s);
  CHECK(x.grad() == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("leaky_relu negative branch") {
  Tensor x = Tensor::from_data({1}, {-10.0});
  CHECK(leaky_relu(x, 0.1).data()[0] == doctest::Approx(-1.0));
}

TEST_CASE("relu gradient at [-1,2] is [0,1]") {
  Tensor x = Tensor::from_data({2}, {-1.0, 2.0}, true);
  backward(sum(relu(x)));
  CHECK(x.grad() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("channel_norm normalizes exactly at eps 0") {
  Tensor x = Tensor::from_data({1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor scale = Tensor::full({1}, 1.0);
  Tensor shift = Tensor::zeros({1});
  Tensor y = channel_norm(x, scale, shift, 0.0);
  double mean = 0.0, var = 0.0;
  for (double v : y.data()) mean += v;
  mean /= 4.0;
  for (double v : y.data()) var += (v - mean) * (v - mean);
  var /= 4.0;
  CHECK(std::abs(mean) < 1e-14);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("channel_norm constant channel absorbed by eps") {
  Tensor x = Tensor::full({1, 3, 3}, 5.0);
  Tensor scale = Tensor::full({1}, 1.0);
  Tensor shift = Tensor::zeros({1});
  Tensor y = channel_norm(x, scale, shift, 1e-5);
  for (double v : y.data()) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("channel_norm statistics invariant") {
  Tensor x = oracle::random_tensor({3, 5, 5}, 30);
  Tensor scale = Tensor::full({3}, 1.0);
  Tensor shift = Tensor::zeros({3});
  Tensor y = channel_norm(x, scale, shift, 1e-10);
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < 25; ++i) mean += y.data()[static_cast<std::size_t>(c) * 25 + i];
    mean /= 25.0;
    for (int i = 0; i < 25; ++i) {
      const double d = y.data()[static_cast<std::size_t>(c) * 25 + i] - mean;
      var += d * d;
    }
    var /= 25.0;
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("channel_norm gradients match finite differences") {
  Tensor x = oracle::random_tensor({1, 3, 3}, 40, true);
  Tensor scale = oracle::random_tensor({1}, 41, true, 0.5, 1.5);
  Tensor shift = oracle::random_tensor({1}, 42, true);
  auto forward = [&]() { return channel_norm(x, scale, shift, 1e-5); };
  auto loss = oracle::weighted_sum_loss(forward, 43);
  CHECK(oracle::fd_check(x, loss) < 1e-5);
  CHECK(oracle::fd_check(scale, loss) < 1e-5);
  CHECK(oracle::fd_check(shift, loss) < 1e-5);
}

TEST_CASE("concat_channels shapes and zero-channel identity") {
  Tensor a = oracle::random_tensor({1, 2, 2}, 50);
  Tensor b = oracle::random_tensor({2, 2, 2}, 51);
  CHECK(concat_channels(a, b).shape() == std::vector<int>{3, 2, 2});

  Tensor empty = Tensor::zeros({0, 2, 2});
  Tensor same = concat_channels(a, empty);
  CHECK(same.shape() == a.shape());
  CHECK(same.data() == a.data());

  Tensor c = oracle::random_tensor({1, 3, 2}, 52);
  CHECK_THROWS_AS(concat_channels(a, c), std::invalid_argument);
}

TEST_CASE("concat_channels routes gradients to both sources") {
  Tensor a = oracle::random_tensor({1, 2, 2}, 53, true);
  Tensor b = oracle::random_tensor({2, 2, 2}, 54, true);
  backward(sum(concat_channels(a, b)));
  for (double g : a.grad()) CHECK(g == 1.0);
  for (double g : b.grad()) CHECK(g == 1.0);
}

TEST_CASE("mse_loss values and gradient") {
  Tensor a = Tensor::from_data({2}, {0.0, 0.0});
  Tensor t = Tensor::from_data({2}, {2.0, 0.0});
  CHECK(mse_loss(a, t).item() == doctest::Approx(2.0));
  CHECK(mse_loss(t, t).item() == 0.0);

  Tensor p = oracle::random_tensor({1, 3, 3}, 60, true);
  Tensor target = oracle::random_tensor({1, 3, 3}, 61);
  auto loss = [&]() { return mse_loss(p, target); };
  CHECK(oracle::fd_check(p, loss) < 1e-8);
}

TEST_CASE("backward: linear exactness and unused parameters") {
  Tensor w = oracle::random_tensor({4}, 70, true);
  Tensor x = oracle::random_tensor({4}, 71);
  Tensor unused = Tensor::zeros({3}, true);
  backward(sum(mul(w, x)));
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(w.grad()[i] == doctest::Approx(x.data()[i]).epsilon(1e-15));
  for (double g : unused.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward twice without reset is a state error") {
  Tensor w = oracle::random_tensor({4}, 72, true);
  Tensor loss = sum(relu(w));
  backward(loss);
  CHECK_THROWS_AS(backward(loss), std::logic_error);
}

TEST_CASE("sigmoid gradient") {
  Tensor x = oracle::random_tensor({1, 2, 2}, 80, true);
  auto forward = [&]() { return sigmoid(x); };
  auto loss = oracle::weighted_sum_loss(forward, 81);
  CHECK(oracle::fd_check(x, loss) < 1e-6);
}

TEST_CASE("upsample_axis gradients incl. learnable kernel") {
  Tensor x = oracle::random_tensor({1, 3, 3}, 90, true);
  Tensor k = Tensor::from_data({3}, {0.5, 1.0, 0.5}, true);
  for (int axis : {1, 2}) {
    auto forward = [&, axis]() { return upsample_axis(x, k, 2, 1.0, axis); };
    auto loss = oracle::weighted_sum_loss(forward, 91 + axis);
    CHECK(oracle::fd_check(x, loss) < 1e-6);
    CHECK(oracle::fd_check(k, loss) < 1e-6);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p = {1.0, -2.0, 3.0};
  std::vector<double> g = {0.0, 0.0, 0.0};
  OptimizerState st(3);
  adam_step(p, g, st);
  CHECK(p == std::vector<double>{1.0, -2.0, 3.0});
  CHECK(st.step_count == 1);
}

TEST_CASE("adam: first step moves by about lr") {
  std::vector<double> p = {0.0};
  std::vector<double> g = {1.0};
  OptimizerState st(1);  // lr 0.01, eps 1e-8
  adam_step(p, g, st);
  // bias-corrected mhat/sqrt(vhat) = 1/(1+eps)
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("adam: rejects non-finite gradients") {
  std::vector<double> p = {0.0};
  std::vector<double> g = {std::nan("")};
  OptimizerState st(1);
  CHECK_THROWS_AS(adam_step(p, g, st), std::runtime_error);
}

TEST_CASE("adam: deterministic over 100 steps") {
  auto run = []() {
    Tensor w = oracle::random_tensor({8}, 100, true);
    Tensor x = oracle::random_tensor({8}, 101);
    Adam opt({w});
    for (int i = 0; i < 100; ++i) {
      opt.zero_grad();
      backward(mse_loss(mul(w, x), x));
      opt.step();
    }
    return w.data();
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);  // bitwise
}

TEST_CASE("per-op finite-difference property, 100 random trials") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t s = rng();
    const int h = 2 + static_cast<int>(rng() % 4);
    const int w = 2 + static_cast<int>(rng() % 4);
    const int c = 1 + static_cast<int>(rng() % 3);
    Tensor x = oracle::random_tensor({c, h, w}, s, true);
    // keep values away from activation kinks
    for (double& v : x.data())
      if (std::abs(v) < 0.05) v += v < 0 ? -0.1 : 0.1;

    switch (trial % 5) {
      case 0: {
        auto loss = oracle::weighted_sum_loss([&]() { return relu(x); }, s + 1);
        CHECK(oracle::fd_check(x, loss) < 1e-4);
        break;
      }
      case 1: {
        auto loss = oracle::weighted_sum_loss(
            [&]() { return leaky_relu(x, 0.1); }, s + 1);
        CHECK(oracle::fd_check(x, loss) < 1e-4);
        break;
      }
      case 2: {
        Tensor k = oracle::random_tensor({2, c, 3, 3}, s + 2, true);
        auto loss = oracle::weighted_sum_loss(
            [&]() { return conv2d(x, k, Tensor(), 1, 1); }, s + 3);
        CHECK(oracle::fd_check(x, loss) < 1e-4);
        CHECK(oracle::fd_check(k, loss) < 1e-4);
        break;
      }
      case 3: {
        Tensor scale = oracle::random_tensor({c}, s + 4, true, 0.5, 1.5);
        Tensor shift = oracle::random_tensor({c}, s + 5, true);
        auto loss = oracle::weighted_sum_loss(
            [&]() { return channel_norm(x, scale, shift, 1e-5); }, s + 6);
        CHECK(oracle::fd_check(x, loss) < 1e-4);
        break;
      }
      case 4: {
        Tensor k = Tensor::from_data({3}, {0.4, 1.1, 0.5}, true);
        auto loss = oracle::weighted_sum_loss(
            [&]() { return upsample_axis(x, k, 2, 1.0, 2); }, s + 7);
        CHECK(oracle::fd_check(x, loss) < 1e-4);
        CHECK(oracle::fd_check(k, loss) < 1e-4);
        break;
      }
    }
  }
}

TEST_CASE("forward passes are pure") {
  Tensor x = oracle::random_tensor({2, 4, 4}, 200);
  Tensor w = oracle::random_tensor({2, 2, 3, 3}, 201);
  Tensor y1 = conv2d(x, w, Tensor(), 1, 1);
  Tensor y2 = conv2d(x, w, Tensor(), 1, 1);
  CHECK(y1.data() == y2.data());  // bitwise
}
