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

#ifndef CITRINET_WAV_HPP_
#define CITRINET_WAV_HPP_

#include <string>
#include <vector>

namespace citrinet::wav {

struct Audio {
  int sample_rate = 0;
  std::vector<double> samples;  // mono, in [-1, 1)
};

// RIFF PCM, 16-bit signed little-endian, mono. Samples are scaled to
// [-1, 1) by division by 32768.
Audio read(const std::string& path);
void write(const std::string& path, const Audio& audio);

}  // namespace citrinet::wav

#endif  // CITRINET_WAV_HPP_
