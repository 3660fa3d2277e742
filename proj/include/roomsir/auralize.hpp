// Copyright 2026 The roomsir Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roomsir/geometry.hpp"
#include "roomsir/path_set.hpp"

namespace roomsir {

inline constexpr double kDefaultSampleRate = 48000.0;

// Octave-band layout and noise parameters for IR synthesis. Band b owns the
// frequencies between the geometric means of neighbouring centers; the lowest
// band starts at 0 Hz and the highest runs to Nyquist.
struct BandConfig {
  std::vector<double> centers_hz = default_band_centers();
  double sample_rate = kDefaultSampleRate;
  std::uint64_t noise_seed = 0;
  double padding_s = 0.1;

  // B+1 split frequencies: 0, sqrt(c0*c1), ..., sample_rate/2.
  std::vector<double> split_edges() const;
  // Nominal upper edge of the top octave band, centers.back() * sqrt(2).
  double highest_band_edge() const;
  // Throws ConfigError unless the layout fits `band_count` bands at this rate.
  void validate(std::size_t band_count) const;
};

// Ambisonic impulse response, ACN channel order, SN3D normalization.
// Samples are channel-major: channel c occupies [c*length, (c+1)*length).
struct AmbisonicIR {
  int order = 0;
  double sample_rate = kDefaultSampleRate;
  std::size_t length = 0;
  std::vector<float> samples;

  std::size_t channels() const { return static_cast<std::size_t>((order + 1) * (order + 1)); }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(samples).subspan(c * length, length);
  }
  std::span<float> channel(std::size_t c) {
    return std::span<float>(samples).subspan(c * length, length);
  }
  static constexpr const char* kConvention = "ACN/SN3D";
};

// Arrival sample of a path: round(fs * distance / c).
std::size_t arrival_sample(double distance, double speed_of_sound, double sample_rate);

// The unit-power band noise signals w_b[n] (B rows of `length` samples)
// produced from one white-noise realization. Rows sum to the DC-free noise.
std::vector<std::vector<double>> band_noise(const BandConfig& config, std::size_t length);

// IR_c[n] = sum_b S_{c,b}[n] * w_b[n], where the sparse train S_{c,b} holds
// Y_c(direction_p) * sqrt(E_{p,b}) at each arrival sample.
AmbisonicIR synthesize_ir(const PathSet& paths, int order, const BandConfig& config,
                          std::uint32_t workers = 1);

// sum_n sum_b S_{c,b}[n]^2 for each channel c: the energy the IR carries in
// expectation over noise seeds.
std::vector<double> train_energy(const PathSet& paths, int order, const BandConfig& config);

// sum_n x[n]^2 per channel, accumulated in double.
std::vector<double> channel_energy(const AmbisonicIR& ir);

// Decay time from Schroeder backward integration of x^2: a least-squares
// line through the energy decay curve between -5 and -35 dB, extrapolated
// to -60 dB. Empty when the curve never reaches -35 dB.
std::optional<double> schroeder_rt60(std::span<const float> signal, double sample_rate);

// Eyring reverberation time 0.161 V / (-S ln(1 - alpha)).
double eyring_rt60(double volume, double surface_area, double mean_absorption);

// 32-bit float RIFF/WAVE (WAVE_FORMAT_EXTENSIBLE), one channel per ACN channel.
void write_wav(const AmbisonicIR& ir, const std::filesystem::path& file);
// Reads a file written by write_wav. The channel count must be (L+1)^2.
AmbisonicIR read_wav(const std::filesystem::path& file);

}  // namespace roomsir
