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

#ifndef CITRINET_NN_HPP_
#define CITRINET_NN_HPP_

#include <random>

#include "citrinet/tensor.hpp"

namespace citrinet::nn {

// 1D convolution over [C_in x T] with weight [C_out x C_in/groups x K].
// K must be odd; the input is zero-padded by (K-1)/2 on both sides so the
// output length is exactly ceil(T / stride). groups=C_in with C_out=C_in is
// a depthwise convolution, K=1 with groups=1 a pointwise one.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight,
                 const Tensor<T>& bias, std::int64_t stride,
                 std::int64_t groups);
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight,
                 std::int64_t stride, std::int64_t groups);

// Batch normalization over the time axis of [C x T], one statistic per
// channel. Train mode uses biased batch variance and updates the running
// stats in place; eval mode normalizes with the running stats.
template <typename T>
Tensor<T> batchnorm1d(const Tensor<T>& input, const Tensor<T>& gamma,
                      const Tensor<T>& beta, Tensor<T>& running_mean,
                      Tensor<T>& running_var, bool train,
                      double momentum = 0.1, double eps = 1e-5);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input);

// Inverted dropout: train mode zeroes entries with probability p and scales
// survivors by 1/(1-p); eval mode returns the input unchanged.
template <typename T>
Tensor<T> dropout(const Tensor<T>& input, double p, bool train,
                  std::mt19937& rng);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

// Non-overlapping window means over the time axis of [C x T]; window 0
// means global (a single mean per channel). The last window may be short
// and is averaged over its true length.
template <typename T>
Tensor<T> reduce_mean_time(const Tensor<T>& input, std::int64_t window);

// Inverse of the windowing above: expands [C x W] to [C x frames] where
// frame t takes column min(t / window, W - 1).
template <typename T>
Tensor<T> expand_time(const Tensor<T>& input, std::int64_t window,
                      std::int64_t frames);

// Log-softmax across channels, independently per time frame of [C x T].
template <typename T>
Tensor<T> log_softmax_channels(const Tensor<T>& input);

template <typename T>
Tensor<T> sum(const Tensor<T>& input);

}  // namespace citrinet::nn

#endif  // CITRINET_NN_HPP_
