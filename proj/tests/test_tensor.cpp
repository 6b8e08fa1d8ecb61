// Copyright 2026 The citrinet-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "citrinet/nn.hpp"
#include "citrinet/tensor.hpp"
#include "testing.hpp"

using citrinet::NoGradGuard;
using citrinet::Tensor;
namespace nn = citrinet::nn;
namespace testing = citrinet::testing;

namespace {

bool all_finite(const Tensor<double>& t) {
  for (const auto v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pointwise conv scales the input") {
  auto x = Tensor<double>::from({1, 4}, {1, 2, 3, 4});
  auto w = Tensor<double>::from({1, 1, 1}, {2});
  auto y = nn::conv1d(x, w, 1, 1);
  REQUIRE(y.shape() == std::vector<std::int64_t>({1, 4}));
  CHECK(y.at(0, 0) == doctest::Approx(2));
  CHECK(y.at(0, 1) == doctest::Approx(4));
  CHECK(y.at(0, 2) == doctest::Approx(6));
  CHECK(y.at(0, 3) == doctest::Approx(8));
}

TEST_CASE("strided box filter matches hand convolution") {
  auto x = Tensor<double>::from({1, 4}, {1, 2, 3, 4});
  auto w = Tensor<double>::from({1, 1, 3}, {1, 1, 1});
  auto y = nn::conv1d(x, w, 2, 1);
  REQUIRE(y.shape() == std::vector<std::int64_t>({1, 2}));
  CHECK(y.at(0, 0) == doctest::Approx(3));   // 0+1+2
  CHECK(y.at(0, 1) == doctest::Approx(9));   // 2+3+4
}

TEST_CASE("three stride-2 convs contract 1000 frames to 125") {
  auto w = Tensor<double>::from({1, 1, 3}, {1, 1, 1});
  auto x = Tensor<double>::zeros({1, 1000});
  std::vector<std::int64_t> lengths;
  for (int i = 0; i < 3; ++i) {
    x = nn::conv1d(x, w, 2, 1);
    lengths.push_back(x.dim(1));
  }
  CHECK(lengths == std::vector<std::int64_t>({500, 250, 125}));
}

TEST_CASE("conv output length is ceil(T/stride) across shapes") {
  std::mt19937 rng(7);
  for (std::int64_t t = 1; t <= 64; ++t) {
    for (std::int64_t k = 1; k <= 41; k += 2) {
      for (std::int64_t stride : {1, 2}) {
        auto x = testing::random_tensor({2, t}, rng, false);
        auto w = testing::random_tensor({2, 2, k}, rng, false);
        auto y = nn::conv1d(x, w, stride, 1);
        CHECK(y.dim(1) == (t + stride - 1) / stride);
      }
    }
  }
}

TEST_CASE("conv rejects even kernels and bad shapes") {
  auto x = Tensor<double>::zeros({2, 8});
  CHECK_THROWS_AS(nn::conv1d(x, Tensor<double>::zeros({2, 2, 4}), 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(nn::conv1d(x, Tensor<double>::zeros({2, 3, 3}), 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(nn::conv1d(x, Tensor<double>::zeros({2, 2, 3}), 1, 3),
                  std::invalid_argument);
}

TEST_CASE("separable vs full conv parameter counts") {
  const std::int64_t c = 16, c_out = 32, k = 11;
  auto depthwise = Tensor<double>::zeros({c, 1, k});
  auto pointwise = Tensor<double>::zeros({c_out, c, 1});
  auto full = Tensor<double>::zeros({c_out, c, k});
  CHECK(depthwise.numel() + pointwise.numel() == c * k + c * c_out);
  CHECK(full.numel() == c * c_out * k);
}

TEST_CASE("batchnorm normalizes a channel to hand-computed values") {
  auto x = Tensor<double>::from({1, 3}, {1, 2, 3});
  auto gamma = Tensor<double>::from({1}, {1});
  auto beta = Tensor<double>::from({1}, {0});
  auto rm = Tensor<double>::zeros({1});
  auto rv = Tensor<double>::full({1}, 1.0);
  auto y = nn::batchnorm1d(x, gamma, beta, rm, rv, true);
  CHECK(y.at(0, 0) == doctest::Approx(-1.2247).epsilon(1e-3));
  CHECK(y.at(0, 1) == doctest::Approx(0.0));
  CHECK(y.at(0, 2) == doctest::Approx(1.2247).epsilon(1e-3));
  // Running stats pick up 0.1 of the batch statistics.
  CHECK(rm.at(0) == doctest::Approx(0.2));
  CHECK(rv.at(0) == doctest::Approx(0.9 + 0.1 * 2.0 / 3.0));
}

TEST_CASE("batchnorm of a constant channel gives zeros before affine") {
  auto x = Tensor<double>::full({1, 5}, 3.25);
  auto gamma = Tensor<double>::from({1}, {1});
  auto beta = Tensor<double>::from({1}, {0});
  auto rm = Tensor<double>::zeros({1});
  auto rv = Tensor<double>::full({1}, 1.0);
  auto y = nn::batchnorm1d(x, gamma, beta, rm, rv, true);
  for (int i = 0; i < 5; ++i) CHECK(y.at(0, i) == doctest::Approx(0.0));
}

TEST_CASE("batchnorm is near-identity on standardized input") {
  std::mt19937 rng(3);
  auto x = testing::random_tensor({1, 64}, rng, false);
  double m = 0, v = 0;
  for (auto q : x.values()) m += q;
  m /= 64;
  for (auto q : x.values()) v += (q - m) * (q - m);
  v /= 64;
  for (auto& q : x.values()) q = (q - m) / std::sqrt(v);
  auto gamma = Tensor<double>::from({1}, {1});
  auto beta = Tensor<double>::from({1}, {0});
  auto rm = Tensor<double>::zeros({1});
  auto rv = Tensor<double>::full({1}, 1.0);
  auto y = nn::batchnorm1d(x, gamma, beta, rm, rv, true);
  for (int i = 0; i < 64; ++i) {
    CHECK(y.at(0, i) == doctest::Approx(x.at(0, i)).epsilon(1e-4));
  }
}

TEST_CASE("batchnorm rejects empty time axis") {
  auto x = Tensor<double>::zeros({1, 0});
  auto gamma = Tensor<double>::from({1}, {1});
  auto beta = Tensor<double>::from({1}, {0});
  auto rm = Tensor<double>::zeros({1});
  auto rv = Tensor<double>::full({1}, 1.0);
  CHECK_THROWS_AS(nn::batchnorm1d(x, gamma, beta, rm, rv, true),
                  std::invalid_argument);
}

TEST_CASE("elementwise basics") {
  auto zero = Tensor<double>::from({1}, {0});
  CHECK(nn::sigmoid(zero).at(0) == doctest::Approx(0.5));

  auto x = Tensor<double>::from({3}, {-1, 0, 2});
  auto y = nn::relu(x);
  CHECK(y.at(0) == 0);
  CHECK(y.at(1) == 0);
  CHECK(y.at(2) == 2);
}

TEST_CASE("dropout with p=0 is the identity in both modes") {
  std::mt19937 rng(1);
  auto x = Tensor<double>::from({4}, {1, -2, 3, -4});
  for (bool train : {true, false}) {
    auto y = nn::dropout(x, 0.0, train, rng);
    CHECK(std::memcmp(y.values().data(), x.values().data(),
                      sizeof(double) * 4) == 0);
  }
}

TEST_CASE("dropout in eval mode is bit-for-bit identity") {
  std::mt19937 rng(1);
  auto x = Tensor<double>::from({4}, {0.1, 0.2, 0.3, 0.4});
  auto y = nn::dropout(x, 0.5, false, rng);
  CHECK(y.values().data() == x.values().data());
}

TEST_CASE("dropout rejects p outside [0,1)") {
  std::mt19937 rng(1);
  auto x = Tensor<double>::zeros({2});
  CHECK_THROWS_AS(nn::dropout(x, 1.0, true, rng), std::invalid_argument);
  CHECK_THROWS_AS(nn::dropout(x, -0.1, true, rng), std::invalid_argument);
}

TEST_CASE("reduce_mean_time global and windowed") {
  auto x = Tensor<double>::from({1, 4}, {1, 2, 3, 4});
  auto global = nn::reduce_mean_time(x, 0);
  REQUIRE(global.shape() == std::vector<std::int64_t>({1, 1}));
  CHECK(global.at(0, 0) == doctest::Approx(2.5));

  auto windowed = nn::reduce_mean_time(x, 2);
  REQUIRE(windowed.shape() == std::vector<std::int64_t>({1, 2}));
  CHECK(windowed.at(0, 0) == doctest::Approx(1.5));
  CHECK(windowed.at(0, 1) == doctest::Approx(3.5));

  auto constant = Tensor<double>::full({1, 7}, 4.5);
  for (std::int64_t w : {0, 1, 2, 3, 7, 100}) {
    auto y = nn::reduce_mean_time(constant, w);
    for (std::int64_t i = 0; i < y.dim(1); ++i) {
      CHECK(y.at(0, i) == doctest::Approx(4.5));
    }
  }
}

TEST_CASE("short trailing window averages over its true length") {
  auto x = Tensor<double>::from({1, 5}, {1, 2, 3, 4, 10});
  auto y = nn::reduce_mean_time(x, 2);
  REQUIRE(y.dim(1) == 3);
  CHECK(y.at(0, 2) == doctest::Approx(10.0));
}

TEST_CASE("backward of w*x stores x in the grad") {
  auto w = Tensor<double>::from({1}, {2.0}, true);
  auto x = Tensor<double>::from({1}, {3.0});
  auto loss = nn::sum(nn::mul(w, x));
  loss.backward();
  CHECK(w.grad()[0] == doctest::Approx(3.0));
}

TEST_CASE("backward of sigmoid at zero is a quarter") {
  auto w = Tensor<double>::from({1}, {0.0}, true);
  auto loss = nn::sum(nn::sigmoid(w));
  loss.backward();
  CHECK(w.grad()[0] == doctest::Approx(0.25));
}

TEST_CASE("backward rejects non-scalar roots") {
  auto w = Tensor<double>::from({2}, {0.0, 1.0}, true);
  auto y = nn::relu(w);
  CHECK_THROWS_AS(y.backward(), std::invalid_argument);
}

TEST_CASE("unreachable parameters keep zero grads") {
  auto used = Tensor<double>::from({1}, {1.5}, true);
  auto unused = Tensor<double>::from({1}, {2.5}, true);
  auto loss = nn::sum(nn::mul(used, used));
  loss.backward();
  CHECK(used.grad()[0] == doctest::Approx(3.0));
  CHECK(unused.grad()[0] == 0.0);
}

TEST_CASE("composite graph gradient matches finite differences") {
  std::mt19937 rng(11);
  auto x = testing::random_tensor({3, 9}, rng, true);
  auto dw = testing::random_tensor({3, 1, 5}, rng, true, 0.5);
  auto pw = testing::random_tensor({4, 3, 1}, rng, true, 0.5);
  auto pb = testing::random_tensor({4}, rng, true, 0.1);
  auto gamma = Tensor<double>::full({4}, 1.0, true);
  auto beta = Tensor<double>::zeros({4}, true);
  auto probe = testing::random_tensor({4, 5}, rng, false);

  auto forward = [&]() {
    auto rm = Tensor<double>::zeros({4});
    auto rv = Tensor<double>::full({4}, 1.0);
    auto h = nn::conv1d(x, dw, 1, 3);
    h = nn::conv1d(h, pw, pb, 2, 1);
    h = nn::batchnorm1d(h, gamma, beta, rm, rv, true);
    h = nn::relu(h);
    h = nn::log_softmax_channels(h);
    return nn::sum(nn::mul(h, probe));
  };

  auto loss = forward();
  loss.backward();
  CHECK(all_finite(loss));

  auto loss_value = [&]() {
    NoGradGuard guard;
    return forward().at(0);
  };
  for (auto* leaf : {&x, &dw, &pw, &pb, &gamma, &beta}) {
    auto numeric = testing::finite_difference(*leaf, loss_value);
    CHECK(testing::max_rel_error(leaf->grad(), numeric) < 1e-4);
  }
}

TEST_CASE("gradients accumulate across fan-out") {
  std::mt19937 rng(5);
  auto x = testing::random_tensor({2, 6}, rng, true);
  auto probe = testing::random_tensor({2, 6}, rng, false);
  auto forward = [&]() {
    auto a = nn::relu(x);
    auto b = nn::sigmoid(x);
    return nn::sum(nn::mul(nn::add(a, b), probe));
  };
  auto loss = forward();
  loss.backward();
  auto value = [&]() {
    NoGradGuard guard;
    return forward().at(0);
  };
  auto numeric = testing::finite_difference(x, value);
  CHECK(testing::max_rel_error(x.grad(), numeric) < 1e-4);
}

TEST_CASE("per-op gradients match finite differences") {
  std::mt19937 rng(23);
  SUBCASE("grouped strided conv") {
    auto x = testing::random_tensor({4, 7}, rng, true);
    auto w = testing::random_tensor({6, 2, 3}, rng, true);
    auto b = testing::random_tensor({6}, rng, true);
    auto probe = testing::random_tensor({6, 4}, rng, false);
    auto forward = [&]() {
      return nn::sum(nn::mul(nn::conv1d(x, w, b, 2, 2), probe));
    };
    forward().backward();
    auto value = [&]() {
      NoGradGuard guard;
      return forward().at(0);
    };
    for (auto* leaf : {&x, &w, &b}) {
      CHECK(testing::max_rel_error(leaf->grad(),
                                   testing::finite_difference(*leaf, value)) <
            1e-4);
    }
  }
  SUBCASE("windowed mean and expansion") {
    auto x = testing::random_tensor({2, 7}, rng, true);
    auto probe = testing::random_tensor({2, 7}, rng, false);
    auto forward = [&]() {
      auto pooled = nn::reduce_mean_time(x, 3);
      auto spread = nn::expand_time(pooled, 3, 7);
      return nn::sum(nn::mul(spread, probe));
    };
    forward().backward();
    auto value = [&]() {
      NoGradGuard guard;
      return forward().at(0);
    };
    CHECK(testing::max_rel_error(
              x.grad(), testing::finite_difference(x, value)) < 1e-4);
  }
  SUBCASE("eval-mode batchnorm") {
    auto x = testing::random_tensor({3, 5}, rng, true);
    auto gamma = testing::random_tensor({3}, rng, true);
    auto beta = testing::random_tensor({3}, rng, true);
    auto rm = testing::random_tensor({3}, rng, false);
    auto rv = Tensor<double>::full({3}, 0.8);
    auto probe = testing::random_tensor({3, 5}, rng, false);
    auto forward = [&]() {
      return nn::sum(
          nn::mul(nn::batchnorm1d(x, gamma, beta, rm, rv, false), probe));
    };
    forward().backward();
    auto value = [&]() {
      NoGradGuard guard;
      return forward().at(0);
    };
    for (auto* leaf : {&x, &gamma, &beta}) {
      CHECK(testing::max_rel_error(leaf->grad(),
                                   testing::finite_difference(*leaf, value)) <
            1e-4);
    }
  }
  SUBCASE("dropout with a frozen mask") {
    auto x = testing::random_tensor({2, 8}, rng, true);
    auto probe = testing::random_tensor({2, 8}, rng, false);
    // Same seed every call so the mask is constant across FD evaluations.
    auto forward = [&]() {
      std::mt19937 mask_rng(99);
      return nn::sum(nn::mul(nn::dropout(x, 0.4, true, mask_rng), probe));
    };
    forward().backward();
    auto value = [&]() {
      NoGradGuard guard;
      return forward().at(0);
    };
    CHECK(testing::max_rel_error(
              x.grad(), testing::finite_difference(x, value)) < 1e-4);
  }
}

TEST_CASE("forward ops stay finite on finite inputs") {
  std::mt19937 rng(31);
  auto x = testing::random_tensor({4, 12}, rng, false, 10.0);
  auto w = testing::random_tensor({4, 4, 5}, rng, false, 10.0);
  CHECK(all_finite(nn::conv1d(x, w, 1, 1)));
  CHECK(all_finite(nn::sigmoid(x)));
  CHECK(all_finite(nn::log_softmax_channels(x)));
  CHECK(all_finite(nn::reduce_mean_time(x, 5)));
}
