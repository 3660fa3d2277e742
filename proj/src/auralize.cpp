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


#include "roomsir/auralize.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "roomsir/error.hpp"
#include "roomsir/hash.hpp"
#include "roomsir/hoa.hpp"

namespace roomsir {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365212121ULL;

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Standard normal samples by Box-Muller on a 53-bit uniform, so the sequence
// depends only on the seed and not on the standard library.
std::vector<double> white_noise(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(mix_seed(seed, kNoiseStream));
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    out[i] = r * std::cos(phi);
    if (i + 1 < n) out[i + 1] = r * std::sin(phi);
  }
  return out;
}

}  // namespace

std::vector<double> BandConfig::split_edges() const {
  std::vector<double> e;
  e.push_back(0.0);
  for (std::size_t b = 1; b < centers_hz.size(); ++b) {
    e.push_back(std::sqrt(centers_hz[b - 1] * centers_hz[b]));
  }
  e.push_back(sample_rate / 2.0);
  return e;
}

double BandConfig::highest_band_edge() const {
  return centers_hz.empty() ? 0.0 : centers_hz.back() * std::numbers::sqrt2;
}

void BandConfig::validate(std::size_t band_count) const {
  if (centers_hz.size() != band_count) {
    throw ConfigError("band count mismatch: path set has " + std::to_string(band_count) +
                      " bands, band config has " + std::to_string(centers_hz.size()));
  }
  if (centers_hz.empty()) throw ConfigError("band config needs at least one band");
  for (std::size_t b = 0; b < centers_hz.size(); ++b) {
    if (!(centers_hz[b] > 0.0) || (b > 0 && !(centers_hz[b] > centers_hz[b - 1]))) {
      throw ConfigError("band centers must be positive and increasing");
    }
  }
  if (!(sample_rate > 2.0 * highest_band_edge())) {
    throw ConfigError("sample rate must exceed twice the highest band edge");
  }
  if (!(padding_s >= 0.0) || !std::isfinite(padding_s)) {
    throw ConfigError("IR padding must be non-negative");
  }
}

std::size_t arrival_sample(double distance, double speed_of_sound, double sample_rate) {
  const double n = std::round(sample_rate * distance / speed_of_sound);
  if (!(n >= 0.0) || n > 1e10) throw ConfigError("path arrival time out of range");
  return static_cast<std::size_t>(n);
}

std::vector<std::vector<double>> band_noise(const BandConfig& config, std::size_t length) {
  const std::size_t bands = config.centers_hz.size();
  std::vector<std::vector<double>> out(bands, std::vector<double>(length, 0.0));
  if (length == 0) return out;

  const std::vector<double> noise = white_noise(config.noise_seed, length);
  const std::size_t bins = length / 2 + 1;
  std::unique_ptr<double, FftwFree> time(fftw_alloc_real(length));
  std::unique_ptr<fftw_complex, FftwFree> spec(fftw_alloc_complex(bins));
  std::unique_ptr<fftw_complex, FftwFree> part(fftw_alloc_complex(bins));
  if (!time || !spec || !part) throw Error("out of memory allocating FFT buffers");
  const int n = static_cast<int>(length);
  fftw_plan forward, inverse;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(n, time.get(), spec.get(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(n, part.get(), time.get(), FFTW_ESTIMATE);
  }
  std::copy(noise.begin(), noise.end(), time.get());
  fftw_execute(forward);

  const std::vector<double> edges = config.split_edges();
  const double bin_hz = config.sample_rate / static_cast<double>(length);
  for (std::size_t b = 0; b < bands; ++b) {
    std::memset(part.get(), 0, sizeof(fftw_complex) * bins);
    for (std::size_t k = 1; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const bool last = b + 1 == bands;
      if (f >= edges[b] && (f < edges[b + 1] || last)) {
        part.get()[k][0] = spec.get()[k][0];
        part.get()[k][1] = spec.get()[k][1];
      }
    }
    fftw_execute(inverse);
    double power = 0.0;
    for (std::size_t i = 0; i < length; ++i) power += time.get()[i] * time.get()[i];
    power /= static_cast<double>(length);
    // FFTW's inverse is unnormalized; unit mean square absorbs that factor.
    const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 0.0;
    for (std::size_t i = 0; i < length; ++i) out[b][i] = time.get()[i] * scale;
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  return out;
}

namespace {

void check_inputs(const PathSet& paths, int order, const BandConfig& config) {
  if (order < 0 || order > kMaxShOrder) {
    throw ConfigError("ambisonic order must be in [0, 9], got " + std::to_string(order));
  }
  config.validate(paths.band_count());
  if (paths.empty()) throw ConfigError("cannot synthesize an impulse response from no paths");
}

std::vector<std::size_t> arrivals(const PathSet& paths, const BandConfig& config) {
  std::vector<std::size_t> n(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    n[p] = arrival_sample(paths.distance()[p], paths.speed_of_sound()[p], config.sample_rate);
  }
  return n;
}

// Accumulation order keyed on everything that feeds the IR, so permuting the
// rows of a path set (as filtering does) leaves the output bits unchanged.
std::vector<std::size_t> canonical_order(const PathSet& paths, const std::vector<std::size_t>& n) {
  auto key = [&](std::size_t p) {
    std::vector<std::uint32_t> k;
    k.reserve(4 + paths.band_count());
    auto push = [&](float v) { k.push_back(std::bit_cast<std::uint32_t>(v)); };
    push(paths.distance()[p]);
    for (std::size_t a = 0; a < 3; ++a) push(paths.listener_dir()[3 * p + a]);
    for (float e : paths.intensities(p)) push(e);
    return k;
  };
  std::vector<std::size_t> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (n[a] != n[b]) return n[a] < n[b];
    return key(a) < key(b);
  });
  return order;
}

}  // namespace

AmbisonicIR synthesize_ir(const PathSet& paths, int order, const BandConfig& config,
                          std::uint32_t workers) {
  check_inputs(paths, order, config);
  const std::size_t bands = paths.band_count();
  const std::size_t channels = sh_channels(order);
  const auto n = arrivals(paths, config);
  const auto rows = canonical_order(paths, n);
  const std::size_t last = n[rows.back()];
  const std::size_t length =
      last + 1 + static_cast<std::size_t>(std::ceil(config.padding_s * config.sample_rate));
  const auto noise = band_noise(config, length);

  // Linear in the trains, so each path adds Y_c * sum_b sqrt(E_b) w_b[n_p]
  // at its arrival sample; no dense per-band trains are needed.
  workers = std::max<std::uint32_t>(1, std::min<std::uint64_t>(workers, paths.size()));
  std::vector<std::vector<double>> partial(workers);
  auto accumulate = [&](std::uint32_t w) {
    std::vector<double>& acc = partial[w];
    acc.assign(channels * length, 0.0);
    std::vector<double> y(channels);
    const std::size_t begin = paths.size() * w / workers;
    const std::size_t end = paths.size() * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t p = rows[i];
      double gate = 0.0;
      const auto e = paths.intensities(p);
      for (std::size_t b = 0; b < bands; ++b) {
        gate += std::sqrt(static_cast<double>(e[b])) * noise[b][n[p]];
      }
      if (gate == 0.0) continue;
      sh_eval(paths.listener_direction(p), order, ShNorm::kSN3D, y);
      for (std::size_t c = 0; c < channels; ++c) acc[c * length + n[p]] += y[c] * gate;
    }
  };
  if (workers == 1) {
    accumulate(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(accumulate, w);
  }
  for (std::uint32_t w = 1; w < workers; ++w) {
    for (std::size_t i = 0; i < partial[0].size(); ++i) partial[0][i] += partial[w][i];
  }

  AmbisonicIR ir;
  ir.order = order;
  ir.sample_rate = config.sample_rate;
  ir.length = length;
  ir.samples.assign(partial[0].begin(), partial[0].end());
  return ir;
}

std::vector<double> train_energy(const PathSet& paths, int order, const BandConfig& config) {
  check_inputs(paths, order, config);
  const std::size_t bands = paths.band_count();
  const std::size_t channels = sh_channels(order);
  const auto n = arrivals(paths, config);
  std::vector<std::size_t> idx(paths.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return n[a] < n[b]; });

  std::vector<double> energy(channels, 0.0);
  std::vector<double> train(channels * bands);
  std::vector<double> y(channels);
  for (std::size_t g = 0; g < idx.size();) {
    std::fill(train.begin(), train.end(), 0.0);
    std::size_t h = g;
    for (; h < idx.size() && n[idx[h]] == n[idx[g]]; ++h) {
      const std::size_t p = idx[h];
      sh_eval(paths.listener_direction(p), order, ShNorm::kSN3D, y);
      const auto e = paths.intensities(p);
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t b = 0; b < bands; ++b) {
          train[c * bands + b] += y[c] * std::sqrt(static_cast<double>(e[b]));
        }
      }
    }
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t b = 0; b < bands; ++b) energy[c] += train[c * bands + b] * train[c * bands + b];
    }
    g = h;
  }
  return energy;
}

std::vector<double> channel_energy(const AmbisonicIR& ir) {
  std::vector<double> out(ir.channels(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    for (float v : ir.channel(c)) out[c] += static_cast<double>(v) * v;
  }
  return out;
}

std::optional<double> schroeder_rt60(std::span<const float> signal, double sample_rate) {
  std::vector<double> edc(signal.size());
  double tail = 0.0;
  for (std::size_t i = signal.size(); i-- > 0;) {
    tail += static_cast<double>(signal[i]) * signal[i];
    edc[i] = tail;
  }
  if (signal.empty() || !(tail > 0.0)) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  bool reached = false;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / tail);
    if (db <= -35.0) {
      reached = true;
      break;
    }
    if (db > -5.0) continue;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  if (!reached || count < 2) return std::nullopt;
  const double k = static_cast<double>(count);
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  if (!(slope < 0.0)) return std::nullopt;
  return -60.0 / slope;
}

double eyring_rt60(double volume, double surface_area, double mean_absorption) {
  if (!(mean_absorption > 0.0 && mean_absorption < 1.0)) {
    throw ConfigError("mean absorption must be in (0, 1)");
  }
  return 0.161 * volume / (-surface_area * std::log(1.0 - mean_absorption));
}

// --- WAV ---------------------------------------------------------------------

namespace {

constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr std::uint16_t kFormatFloat = 3;
// KSDATAFORMAT_SUBTYPE_IEEE_FLOAT after the two format bytes.
constexpr unsigned char kFloatGuidTail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                              0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint16_t get16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t get32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_wav(const AmbisonicIR& ir, const std::filesystem::path& file) {
  const std::size_t channels = ir.channels();
  if (channels > 65535) throw IoError("too many channels for a WAV file");
  if (ir.samples.size() != channels * ir.length) throw SchemaError("IR sample buffer has wrong size");
  const std::uint64_t data_bytes = 4ull * channels * ir.length;
  if (data_bytes > 0xFFFFFFFFull - 80) throw IoError("impulse response too long for a WAV file");
  const auto rate = static_cast<std::uint32_t>(std::lround(ir.sample_rate));

  std::string h;
  h += "RIFF";
  put32(h, static_cast<std::uint32_t>(4 + (8 + 40) + (8 + 4) + 8 + data_bytes));
  h += "WAVE";
  h += "fmt ";
  put32(h, 40);
  put16(h, kFormatExtensible);
  put16(h, static_cast<std::uint16_t>(channels));
  put32(h, rate);
  put32(h, static_cast<std::uint32_t>(rate * 4 * channels));
  put16(h, static_cast<std::uint16_t>(4 * channels));
  put16(h, 32);
  put16(h, 22);
  put16(h, 32);  // valid bits
  put32(h, 0);   // channel mask: no speaker assignment
  put16(h, kFormatFloat);
  h.append(reinterpret_cast<const char*>(kFloatGuidTail), sizeof kFloatGuidTail);
  h += "fact";
  put32(h, 4);
  put32(h, static_cast<std::uint32_t>(ir.length));
  h += "data";
  put32(h, static_cast<std::uint32_t>(data_bytes));

  std::string data;
  data.reserve(static_cast<std::size_t>(data_bytes));
  for (std::size_t i = 0; i < ir.length; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      std::uint32_t bits;
      const float v = ir.samples[c * ir.length + i];
      std::memcpy(&bits, &v, 4);
      put32(data, bits);
    }
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + file.string() + "'");
}

AmbisonicIR read_wav(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw SchemaError("not a RIFF/WAVE file");
  }
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;
  for (std::size_t pos = 12; pos + 8 <= bytes.size();) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = get32(p + pos + 4);
    if (size > bytes.size() - pos - 8) throw SchemaError("truncated WAV chunk '" + id + "'");
    const unsigned char* body = p + pos + 8;
    if (id == "fmt ") {
      if (size < 16) throw SchemaError("short fmt chunk");
      format = get16(body);
      channels = get16(body + 2);
      rate = get32(body + 4);
      bits = get16(body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw SchemaError("short extensible fmt chunk");
        format = get16(body + 24);
      }
    } else if (id == "data") {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (format != kFormatFloat || bits != 32) throw SchemaError("WAV file is not 32-bit float");
  if (data == nullptr || channels == 0) throw SchemaError("WAV file has no audio data");
  const int order = static_cast<int>(std::lround(std::sqrt(static_cast<double>(channels)))) - 1;
  if (order < 0 || static_cast<std::size_t>((order + 1) * (order + 1)) != channels) {
    throw SchemaError("channel count " + std::to_string(channels) + " is not an ambisonic layout");
  }
  AmbisonicIR ir;
  ir.order = order;
  ir.sample_rate = rate;
  ir.length = data_size / (4u * channels);
  ir.samples.resize(channels * ir.length);
  for (std::size_t i = 0; i < ir.length; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint32_t v = get32(data + 4 * (i * channels + c));
      std::memcpy(&ir.samples[c * ir.length + i], &v, 4);
    }
  }
  return ir;
}

}  // namespace roomsir
