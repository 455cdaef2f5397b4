// include/surt/common.hpp
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

#ifndef SURT_COMMON_HPP_
#define SURT_COMMON_HPP_

#include <atomic>
#include <cstdint>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace surt {

inline constexpr const char *kVersion = "0.3.0";

// Bad input: malformed data, violated invariants, inconsistent shapes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
template <typename... Args>
std::string Concat(Args &&...args) {
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  return os.str();
}
}  // namespace detail

template <typename... Args>
[[noreturn]] void Fail(Args &&...args) {
  throw ValidationError(detail::Concat(std::forward<Args>(args)...));
}

// ---------------------------------------------------------------------------
// Logging. Messages go to stderr; the level is process-wide and set once by
// the command-line front end.

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

namespace detail {
inline std::atomic<int> &LogThreshold() {
  static std::atomic<int> level{static_cast<int>(LogLevel::kWarning)};
  return level;
}
inline std::mutex &LogMutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline void SetLogLevel(LogLevel level) {
  detail::LogThreshold().store(static_cast<int>(level));
}

inline LogLevel ParseLogLevel(std::string_view name) {
  if (name == "debug") return LogLevel::kDebug;
  if (name == "info") return LogLevel::kInfo;
  if (name == "warning" || name == "warn") return LogLevel::kWarning;
  if (name == "error") return LogLevel::kError;
  if (name == "off") return LogLevel::kOff;
  Fail("unknown log level '", name, "'");
}

template <typename... Args>
void Log(LogLevel level, Args &&...args) {
  if (static_cast<int>(level) < detail::LogThreshold().load()) return;
  static constexpr const char *kTags[] = {"DEBUG", "INFO", "WARNING", "ERROR", ""};
  std::string msg = detail::Concat(std::forward<Args>(args)...);
  std::lock_guard<std::mutex> lock(detail::LogMutex());
  std::cerr << kTags[static_cast<int>(level)] << ": " << msg << '\n';
}

template <typename... Args>
void Warn(Args &&...args) {
  Log(LogLevel::kWarning, std::forward<Args>(args)...);
}

// ---------------------------------------------------------------------------
// Counter-based random generator. The stream is a pure function of
// (key, counter): the n-th draw is mix(key + n * gamma), so a generator can be
// copied, split into independent child streams, and replayed exactly.

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(Mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return Mix(key_ + kGamma * ++counter_); }

  // Independent child stream; does not advance this generator.
  Rng Split(std::uint64_t stream) const {
    Rng child;
    child.key_ = Mix(key_ ^ Mix(stream + 0x3c6ef372fe94f82bULL));
    return child;
  }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n) {
    // Lemire's rejection method keeps the draw unbiased.
    std::uint64_t threshold = (0 - n) % n;
    while (true) {
      std::uint64_t x = (*this)();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates with the generator above (std::shuffle's draw pattern is not
// pinned by the standard, which would break cross-platform determinism).
template <typename Container>
void Shuffle(Container &items, Rng &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.Below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// 64-bit FNV-1a, used for input digests in provenance records.
inline std::uint64_t Fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace surt

#endif  // SURT_COMMON_HPP_
