// include/surt/audio.hpp
//
// Copyright 2026  The surt-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// WAV I/O, direct convolution and ITU-R BS.1770 integrated loudness.

#ifndef SURT_AUDIO_HPP_
#define SURT_AUDIO_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "surt/common.hpp"

namespace surt::audio {

struct WavData {
  int sample_rate = 0;
  // channels[c][i], samples scaled to [-1, 1).
  std::vector<std::vector<double>> channels;

  std::size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
};

enum class SampleFormat { kPcm16, kFloat32 };

namespace detail {

inline std::uint32_t ReadU32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t ReadU16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void PutU16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace detail

// Parses a RIFF/WAVE byte buffer. Supports 16-bit PCM and 32-bit IEEE float,
// plain or WAVE_FORMAT_EXTENSIBLE, any channel count.
inline WavData ParseWav(std::span<const unsigned char> bytes, const std::string &name = "<memory>") {
  auto bad = [&](const char *why) { Fail("wav '", name, "': ", why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) || std::memcmp(bytes.data() + 8, "WAVE", 4))
    bad("not a RIFF/WAVE file");
  int format = -1, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    std::uint32_t len = detail::ReadU32(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
    if (!std::memcmp(chunk, "fmt ", 4)) {
      if (avail < 16) bad("short fmt chunk");
      const unsigned char *f = bytes.data() + body;
      format = detail::ReadU16(f);
      channels = detail::ReadU16(f + 2);
      rate = detail::ReadU32(f + 4);
      bits = detail::ReadU16(f + 14);
      if (format == 0xfffe) {
        if (avail < 26) bad("short extensible fmt chunk");
        format = detail::ReadU16(f + 24);
      }
    } else if (!std::memcmp(chunk, "data", 4)) {
      data = bytes.data() + body;
      data_len = avail;
    }
    pos = body + len + (len & 1);
  }
  if (format < 0) bad("missing fmt chunk");
  if (!data) bad("missing data chunk");
  if (channels < 1) bad("zero channels");
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32) bad("only 16-bit PCM and 32-bit float are supported");

  WavData wav;
  wav.sample_rate = static_cast<int>(rate);
  const std::size_t frame = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t n = data_len / frame;
  wav.channels.assign(channels, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      const unsigned char *p = data + i * frame + c * (bits / 8);
      if (pcm16) {
        wav.channels[c][i] = static_cast<std::int16_t>(detail::ReadU16(p)) / 32768.0;
      } else {
        std::uint32_t raw = detail::ReadU32(p);
        float f;
        std::memcpy(&f, &raw, 4);
        wav.channels[c][i] = f;
      }
    }
  }
  return wav;
}

inline WavData ReadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseWav(bytes, path);
}

// Mono WAV bytes. PCM16 output is clipped to [-1, 1).
inline std::string EncodeWav(std::span<const double> samples, int sample_rate, SampleFormat format) {
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  detail::PutU32(out, 36 + data_len);
  out += "WAVEfmt ";
  detail::PutU32(out, 16);
  detail::PutU16(out, format == SampleFormat::kPcm16 ? 1 : 3);
  detail::PutU16(out, 1);
  detail::PutU32(out, static_cast<std::uint32_t>(sample_rate));
  detail::PutU32(out, static_cast<std::uint32_t>(sample_rate) * (bits / 8));
  detail::PutU16(out, bits / 8);
  detail::PutU16(out, bits);
  out += "data";
  detail::PutU32(out, data_len);
  for (double x : samples) {
    if (format == SampleFormat::kPcm16) {
      double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
      auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      detail::PutU16(out, static_cast<std::uint16_t>(v));
    } else {
      float f = static_cast<float>(x);
      std::uint32_t raw;
      std::memcpy(&raw, &f, 4);
      detail::PutU32(out, raw);
    }
  }
  return out;
}

inline void WriteWav(const std::string &path, std::span<const double> samples, int sample_rate,
                     SampleFormat format = SampleFormat::kFloat32) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write wav '" + path + "'");
  std::string bytes = EncodeWav(samples, sample_rate, format);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

// Full linear convolution, length |x| + |h| - 1. Direct time-domain sum.
inline std::vector<double> Convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    double *dst = &y[i];
    for (std::size_t k = 0; k < h.size(); ++k) dst[k] += xi * h[k];
  }
  return y;
}

// ---------------------------------------------------------------------------
// Loudness (BS.1770-4, mono). Filter design follows the RBJ cookbook biquads
// used by pyloudnorm's default meter, so results agree with it to rounding.

struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{};  // a[0] == 1

  std::vector<double> Apply(std::span<const double> x) const {
    std::vector<double> y(x.size());
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = b[0] * x[i] + b[1] * x1 + b[2] * x2 - a[1] * y1 - a[2] * y2;
      x2 = x1;
      x1 = x[i];
      y2 = y1;
      y1 = v;
      y[i] = v;
    }
    return y;
  }
};

inline std::array<Biquad, 2> KWeightingFilters(double rate) {
  auto normalize = [](std::array<double, 3> b, std::array<double, 3> a) {
    Biquad q;
    for (int i = 0; i < 3; ++i) {
      q.b[i] = b[i] / a[0];
      q.a[i] = a[i] / a[0];
    }
    return q;
  };
  Biquad shelf, highpass;
  {
    const double G = 4.0, Q = 1.0 / std::sqrt(2.0), fc = 1500.0;
    const double A = std::pow(10.0, G / 40.0);
    const double w0 = 2.0 * std::numbers::pi * (fc / rate);
    const double alpha = std::sin(w0) / (2.0 * Q);
    const double c = std::cos(w0), sa = 2 * std::sqrt(A) * alpha;
    shelf = normalize({A * ((A + 1) + (A - 1) * c + sa), -2 * A * ((A - 1) + (A + 1) * c),
                       A * ((A + 1) + (A - 1) * c - sa)},
                      {(A + 1) - (A - 1) * c + sa, 2 * ((A - 1) - (A + 1) * c), (A + 1) - (A - 1) * c - sa});
  }
  {
    const double Q = 0.5, fc = 38.0;
    const double w0 = 2.0 * std::numbers::pi * (fc / rate);
    const double alpha = std::sin(w0) / (2.0 * Q);
    const double c = std::cos(w0);
    highpass = normalize({(1 + c) / 2, -(1 + c), (1 + c) / 2}, {1 + alpha, -2 * c, 1 - alpha});
  }
  return {shelf, highpass};
}

/// Gated integrated loudness in LUFS of a mono signal; -inf for silence.
/// The signal must be at least one 400 ms gating block long.
inline double IntegratedLoudness(std::span<const double> samples, int sample_rate) {
  const double block = 0.400, step = 1.0 - 0.75, rate = sample_rate;
  if (static_cast<double>(samples.size()) < block * rate)
    Fail("loudness: signal shorter than one 400 ms gating block");
  auto filters = KWeightingFilters(rate);
  std::vector<double> y = filters[0].Apply(samples);
  y = filters[1].Apply(y);

  const double duration = static_cast<double>(samples.size()) / rate;
  const long num_blocks = static_cast<long>(std::nearbyint((duration - block) / (block * step))) + 1;
  std::vector<double> z(num_blocks), l(num_blocks);
  for (long j = 0; j < num_blocks; ++j) {
    auto lo = static_cast<std::size_t>(block * (static_cast<double>(j) * step) * rate);
    auto hi = static_cast<std::size_t>(block * (static_cast<double>(j) * step + 1) * rate);
    hi = std::min(hi, y.size());
    double sum = 0;
    for (std::size_t i = lo; i < hi; ++i) sum += y[i] * y[i];
    z[j] = sum / (block * rate);
    l[j] = -0.691 + 10.0 * std::log10(z[j]);
  }
  const double abs_gate = -70.0;
  auto gated_mean = [&](auto keep) {
    double sum = 0;
    long count = 0;
    for (long j = 0; j < num_blocks; ++j)
      if (keep(j)) {
        sum += z[j];
        ++count;
      }
    return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
  };
  double first = gated_mean([&](long j) { return l[j] >= abs_gate; });
  if (std::isnan(first)) return -std::numeric_limits<double>::infinity();
  const double rel_gate = -0.691 + 10.0 * std::log10(first) - 10.0;
  double second = gated_mean([&](long j) { return l[j] > rel_gate && l[j] > abs_gate; });
  if (std::isnan(second) || second <= 0) return -std::numeric_limits<double>::infinity();
  return -0.691 + 10.0 * std::log10(second);
}

inline double MeanPower(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double sum = 0;
  for (double v : x) sum += v * v;
  return sum / static_cast<double>(x.size());
}

}  // namespace surt::audio

#endif  // SURT_AUDIO_HPP_
