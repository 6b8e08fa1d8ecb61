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

#ifndef CITRINET_DSP_HPP_
#define CITRINET_DSP_HPP_

#include <complex>
#include <vector>

namespace citrinet::dsp {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

// Power spectrum |X_k|^2 of a real signal, bins 0..N/2 (N power of two).
std::vector<double> power_spectrum(const std::vector<double>& frame);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank on HTK's mel scale. Returns num_filters rows of
// fft_size/2+1 weights covering [f_low, f_high].
std::vector<std::vector<double>> mel_filterbank(int num_filters, int fft_size,
                                                double sample_rate,
                                                double f_low, double f_high);

// Center frequencies (Hz) of the filters above; used to sanity-check peaks.
std::vector<double> mel_filter_centers(int num_filters, double sample_rate,
                                       double f_low, double f_high);

std::vector<double> hann_window(int length);

}  // namespace citrinet::dsp

#endif  // CITRINET_DSP_HPP_
