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

#include "citrinet/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace citrinet::dsp {

void fft(std::vector<std::complex<double>>& data) {
  const size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("fft: size must be a power of two");
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> w_len(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= w_len;
      }
    }
  }
}

std::vector<double> power_spectrum(const std::vector<double>& frame) {
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft(buf);
  std::vector<double> power(frame.size() / 2 + 1);
  for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace {
std::vector<double> mel_points(int num_filters, double f_low, double f_high) {
  const double mel_low = hz_to_mel(f_low);
  const double mel_high = hz_to_mel(f_high);
  std::vector<double> pts(static_cast<size_t>(num_filters) + 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    pts[i] = mel_to_hz(mel_low + (mel_high - mel_low) * static_cast<double>(i) /
                                     static_cast<double>(num_filters + 1));
  }
  return pts;
}
}  // namespace

std::vector<std::vector<double>> mel_filterbank(int num_filters, int fft_size,
                                                double sample_rate,
                                                double f_low, double f_high) {
  const auto pts = mel_points(num_filters, f_low, f_high);
  const int bins = fft_size / 2 + 1;
  std::vector<std::vector<double>> bank(
      static_cast<size_t>(num_filters),
      std::vector<double>(static_cast<size_t>(bins), 0.0));
  for (int m = 0; m < num_filters; ++m) {
    const double left = pts[static_cast<size_t>(m)];
    const double center = pts[static_cast<size_t>(m) + 1];
    const double right = pts[static_cast<size_t>(m) + 2];
    for (int k = 0; k < bins; ++k) {
      const double freq = sample_rate * static_cast<double>(k) /
                          static_cast<double>(fft_size);
      double w = 0.0;
      if (freq > left && freq < center) {
        w = (freq - left) / (center - left);
      } else if (freq >= center && freq < right) {
        w = (right - freq) / (right - center);
      }
      bank[static_cast<size_t>(m)][static_cast<size_t>(k)] = w;
    }
  }
  return bank;
}

std::vector<double> mel_filter_centers(int num_filters, double sample_rate,
                                       double f_low, double f_high) {
  (void)sample_rate;
  const auto pts = mel_points(num_filters, f_low, f_high);
  return {pts.begin() + 1, pts.end() - 1};
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) {
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(length));
  }
  return w;
}

}  // namespace citrinet::dsp
