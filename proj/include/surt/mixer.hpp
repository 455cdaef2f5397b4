// include/surt/mixer.hpp
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

// Conversation-style training mixtures: pause/overlap statistics are fitted
// on real meetings, then single-speaker segments are laid out with gaps drawn
// from those statistics and optionally rendered to audio.

#ifndef SURT_MIXER_HPP_
#define SURT_MIXER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "surt/audio.hpp"
#include "surt/common.hpp"
#include "surt/corpus.hpp"
#include "surt/heat.hpp"

namespace surt::mixer {

struct HistogramBin {
  double lo = 0.0;
  double count = 0.0;

  bool operator==(const HistogramBin &) const = default;
};

/// Fixed-width histogram over non-negative seconds, or a single point mass.
/// Samples are drawn uniformly within the chosen bin.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(double bin_width) : bin_width_(bin_width) {
    if (!(bin_width > 0)) Fail("histogram: bin width must be positive, got ", bin_width);
  }

  static Histogram Point(double value, double bin_width = 0.1) {
    if (!(value >= 0)) Fail("histogram: point value must be >= 0, got ", value);
    Histogram h(bin_width);
    h.point_ = value;
    return h;
  }

  void Add(double value, double count = 1.0) {
    if (point_) Fail("histogram: cannot add samples to a point mass");
    if (!(value >= 0)) Fail("histogram: negative value ", value);
    // The small bias keeps values such as 0.3 / 0.1 in their nominal bin.
    auto index = static_cast<std::int64_t>(std::floor(value / bin_width_ + 1e-9));
    counts_[index] += count;
  }

  void AddBin(double lo, double count) {
    if (!(count >= 0)) Fail("histogram: negative bin count");
    if (!(lo >= 0)) Fail("histogram: negative bin start ", lo);
    counts_[static_cast<std::int64_t>(std::llround(lo / bin_width_))] += count;
  }

  double bin_width() const { return bin_width_; }
  const std::optional<double> &point() const { return point_; }

  double total() const {
    if (point_) return 1.0;
    double t = 0;
    for (const auto &[idx, c] : counts_) t += c;
    return t;
  }

  bool empty() const { return !point_ && total() <= 0; }

  std::vector<HistogramBin> bins() const {
    std::vector<HistogramBin> out;
    for (const auto &[idx, c] : counts_) out.push_back({static_cast<double>(idx) * bin_width_, c});
    return out;
  }

  // Bin counts indexed by bin number; point masses fall in their bin.
  std::map<std::int64_t, double> indexed_counts() const {
    if (point_) return {{static_cast<std::int64_t>(std::floor(*point_ / bin_width_ + 1e-9)), 1.0}};
    return counts_;
  }

  double Sample(Rng &rng) const {
    if (point_) return *point_;
    const double total_mass = total();
    if (!(total_mass > 0)) Fail("histogram: cannot sample from an empty histogram");
    double u = rng.Uniform() * total_mass;
    auto chosen = counts_.begin();
    for (auto it = counts_.begin(); it != counts_.end(); ++it) {
      if (it->second <= 0) continue;
      chosen = it;
      if (u < it->second) break;
      u -= it->second;
    }
    return (static_cast<double>(chosen->first) + rng.Uniform()) * bin_width_;
  }

  bool operator==(const Histogram &) const = default;

 private:
  double bin_width_ = 0.1;
  std::map<std::int64_t, double> counts_;
  std::optional<double> point_;
};

// 1-D earth mover's distance between two histograms on the same bin grid, in
// seconds. Both are normalized to unit mass first.
inline double EarthMoversDistance(const Histogram &a, const Histogram &b) {
  if (std::abs(a.bin_width() - b.bin_width()) > 1e-12) Fail("emd: histograms use different bin widths");
  auto ca = a.indexed_counts(), cb = b.indexed_counts();
  double ta = a.total(), tb = b.total();
  if (!(ta > 0) || !(tb > 0)) Fail("emd: empty histogram");
  std::set<std::int64_t> keys;
  for (const auto &[k, v] : ca) keys.insert(k);
  for (const auto &[k, v] : cb) keys.insert(k);
  double cdf_a = 0, cdf_b = 0, emd = 0;
  std::int64_t prev = 0;
  bool first = true;
  for (std::int64_t k : keys) {
    if (!first) emd += std::abs(cdf_a - cdf_b) * static_cast<double>(k - prev);
    first = false;
    if (auto it = ca.find(k); it != ca.end()) cdf_a += it->second / ta;
    if (auto it = cb.find(k); it != cb.end()) cdf_b += it->second / tb;
    prev = k;
  }
  return emd * a.bin_width();
}

struct PauseStats {
  double bin_width = 0.1;
  Histogram same_spk{0.1};
  Histogram diff_spk{0.1};
  Histogram overlap{0.1};
  double p_ovl = 0.0;

  // Degenerate single-value statistics, e.g. a fixed 0.5 s pause.
  static PauseStats Fixed(double same, double diff, double ovl, double p_ovl, double bin_width = 0.1) {
    if (!(p_ovl >= 0 && p_ovl <= 1)) Fail("pause stats: p_ovl must be in [0, 1], got ", p_ovl);
    PauseStats s;
    s.bin_width = bin_width;
    s.same_spk = Histogram::Point(same, bin_width);
    s.diff_spk = Histogram::Point(diff, bin_width);
    s.overlap = Histogram::Point(ovl, bin_width);
    s.p_ovl = p_ovl;
    return s;
  }
};

/// Routes the gap between each pair of consecutive segments (in start order)
/// to the same-speaker, different-speaker or overlap histogram.
inline PauseStats FitStats(std::span<const Meeting> meetings, double bin_width) {
  if (!(bin_width > 0)) Fail("fit_stats: bin width must be positive, got ", bin_width);
  PauseStats stats;
  stats.bin_width = bin_width;
  stats.same_spk = Histogram(bin_width);
  stats.diff_spk = Histogram(bin_width);
  stats.overlap = Histogram(bin_width);
  std::size_t pairs = 0, diff_count = 0, ovl_count = 0, clamped = 0;
  for (const Meeting &m : meetings) {
    std::vector<Segment> segs = m.segments;
    std::stable_sort(segs.begin(), segs.end(), StartOrderLess);
    for (std::size_t i = 1; i < segs.size(); ++i) {
      ++pairs;
      const double gap = segs[i].start - segs[i - 1].end;
      if (segs[i].speaker == segs[i - 1].speaker) {
        if (gap < 0) ++clamped;
        stats.same_spk.Add(std::max(gap, 0.0));
      } else if (gap > 0) {
        stats.diff_spk.Add(gap);
        ++diff_count;
      } else {
        stats.overlap.Add(-gap);
        ++ovl_count;
      }
    }
  }
  if (pairs == 0) Fail("fit_stats: no meeting has two or more segments");
  if (clamped) Warn("fit_stats: ", clamped, " same-speaker overlaps counted as zero pauses");
  if (diff_count + ovl_count == 0) {
    Warn("fit_stats: no speaker changes observed; p_ovl set to 0");
    stats.p_ovl = 0.0;
  } else {
    stats.p_ovl = static_cast<double>(ovl_count) / static_cast<double>(diff_count + ovl_count);
  }
  return stats;
}

inline PauseStats FitStats(const std::vector<Meeting> &meetings, double bin_width) {
  return FitStats(std::span<const Meeting>(meetings), bin_width);
}

/// Signed offset of the next segment relative to the end of the previous
/// one; negative values are overlaps.
inline double SampleGap(const PauseStats &stats, const std::string &prev_speaker,
                        const std::string &next_speaker, Rng &rng) {
  if (prev_speaker == next_speaker) {
    if (stats.same_spk.empty()) Fail("sample_gap: same-speaker histogram is empty");
    return stats.same_spk.Sample(rng);
  }
  if (rng.Bernoulli(stats.p_ovl)) {
    if (stats.overlap.empty()) Fail("sample_gap: overlap histogram is empty");
    return -stats.overlap.Sample(rng);
  }
  if (stats.diff_spk.empty()) Fail("sample_gap: different-speaker histogram is empty");
  return stats.diff_spk.Sample(rng);
}

struct GenerationConfig {
  int max_speakers = 3;          // K
  double max_speaker_dur = 15.0;  // T, seconds
  int num_channels = 2;
  std::optional<std::string> rir_dir;
  std::optional<std::string> noise_dir;
  std::optional<std::pair<double, double>> loudness_db;
  double noise_snr_db = 10.0;
  std::uint64_t seed = 0;

  void Validate() const {
    if (max_speakers < 1) Fail("config: max speakers must be >= 1");
    if (!(max_speaker_dur > 0)) Fail("config: max speaker duration must be > 0");
    if (num_channels < 2) Fail("config: need at least 2 channels");
    if (loudness_db) {
      auto [lo, hi] = *loudness_db;
      if (!(lo <= hi)) Fail("config: loudness range min ", lo, " exceeds max ", hi);
      if (!(hi < 0)) Fail("config: loudness targets must be negative dB LUFS");
    }
  }
};

struct MixtureEntry {
  Segment segment;
  double offset = 0.0;

  bool operator==(const MixtureEntry &) const = default;
};

struct MixtureSpec {
  std::string id;
  std::vector<MixtureEntry> entries;  // ascending offset
  std::uint64_t seed = 0;

  bool operator==(const MixtureSpec &) const = default;
};

// Segments re-timed onto the mixture timeline, in start order.
inline std::vector<Segment> MixtureUtterances(const MixtureSpec &spec) {
  std::vector<Segment> out;
  out.reserve(spec.entries.size());
  for (const MixtureEntry &e : spec.entries) {
    Segment s = e.segment;
    const double shift = e.offset - s.start;
    s.start = e.offset;
    s.end = e.offset + e.segment.duration();
    if (s.words)
      for (Word &w : *s.words) {
        w.start += shift;
        w.end += shift;
      }
    s.audio.reset();
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), StartOrderLess);
  return out;
}

inline Meeting MixtureAsMeeting(const MixtureSpec &spec) {
  return Meeting{spec.id, MixtureUtterances(spec)};
}

/// Draws mixtures until every speaker bucket is used up.
///
/// Each round samples k in [1, K] speakers among those with segments left,
/// takes random segments from each while their total stays within T, shuffles
/// the union and lays it out: the first segment at 0, every next one at the
/// previous segment's end plus a sampled gap. A start is never moved before
/// the previous start (so start order equals draw order) nor before 0.
/// Segments longer than T can never fit and are skipped with a warning.
inline std::vector<MixtureSpec> GenerateMixtures(std::span<const Segment> segments,
                                                 const PauseStats &stats,
                                                 const GenerationConfig &config) {
  config.Validate();
  if (segments.empty()) Fail("generate_mixtures: no source segments");
  std::map<std::string, std::vector<const Segment *>> buckets;
  std::size_t too_long = 0;
  for (const Segment &s : segments) {
    if (s.duration() > config.max_speaker_dur) {
      ++too_long;
      continue;
    }
    buckets[s.speaker].push_back(&s);
  }
  if (too_long) Warn("generate_mixtures: skipped ", too_long, " segments longer than ", config.max_speaker_dur, " s");

  Rng rng(config.seed);
  std::vector<MixtureSpec> mixtures;
  std::vector<std::string> active;
  while (true) {
    active.clear();
    for (const auto &[spk, bucket] : buckets)
      if (!bucket.empty()) active.push_back(spk);
    if (active.empty()) break;

    std::size_t k = 1 + static_cast<std::size_t>(rng.Below(static_cast<std::uint64_t>(config.max_speakers)));
    k = std::min(k, active.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.Below(active.size() - i));
      std::swap(active[i], active[j]);
    }

    std::vector<const Segment *> chosen;
    for (std::size_t i = 0; i < k; ++i) {
      auto &bucket = buckets[active[i]];
      double budget = 0;
      while (!bucket.empty()) {
        std::size_t idx = static_cast<std::size_t>(rng.Below(bucket.size()));
        const Segment *seg = bucket[idx];
        if (budget + seg->duration() > config.max_speaker_dur) break;
        budget += seg->duration();
        chosen.push_back(seg);
        bucket[idx] = bucket.back();
        bucket.pop_back();
      }
    }
    Shuffle(chosen, rng);

    MixtureSpec spec;
    spec.seed = rng.Split(mixtures.size())();
    char id[32];
    std::snprintf(id, sizeof(id), "mix-%06zu", mixtures.size());
    spec.id = id;
    double prev_start = 0, prev_end = 0;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      double start = 0;
      if (i > 0) {
        double gap = SampleGap(stats, chosen[i - 1]->speaker, chosen[i]->speaker, rng);
        start = std::max({prev_end + gap, prev_start, 0.0});
      }
      spec.entries.push_back({*chosen[i], start});
      prev_start = start;
      prev_end = start + chosen[i]->duration();
    }
    mixtures.push_back(std::move(spec));
  }
  return mixtures;
}

inline std::vector<MixtureSpec> GenerateMixtures(const std::vector<Segment> &segments,
                                                 const PauseStats &stats,
                                                 const GenerationConfig &config) {
  return GenerateMixtures(std::span<const Segment>(segments), stats, config);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json HistogramToJson(const Histogram &h) {
  if (h.point()) return *h.point();
  nlohmann::json bins = nlohmann::json::array();
  for (const HistogramBin &b : h.bins()) bins.push_back({b.lo, b.count});
  return bins;
}

inline Histogram HistogramFromJson(const nlohmann::json &j, double bin_width) {
  if (j.is_number()) return Histogram::Point(j.get<double>(), bin_width);
  if (!j.is_array()) Fail("stats: histogram must be a number or a list of [lo, count] pairs");
  Histogram h(bin_width);
  for (const auto &b : j) {
    if (!b.is_array() || b.size() != 2) Fail("stats: histogram bins must be [lo, count] pairs");
    h.AddBin(b[0].get<double>(), b[1].get<double>());
  }
  return h;
}

inline nlohmann::json StatsToJson(const PauseStats &s) {
  return {{"bin_width", s.bin_width},
          {"same_spk", HistogramToJson(s.same_spk)},
          {"diff_spk", HistogramToJson(s.diff_spk)},
          {"overlap", HistogramToJson(s.overlap)},
          {"p_ovl", s.p_ovl}};
}

inline PauseStats StatsFromJson(const nlohmann::json &j) {
  try {
    PauseStats s;
    s.bin_width = j.at("bin_width").get<double>();
    if (!(s.bin_width > 0)) Fail("stats: bin_width must be positive");
    s.same_spk = HistogramFromJson(j.at("same_spk"), s.bin_width);
    s.diff_spk = HistogramFromJson(j.at("diff_spk"), s.bin_width);
    s.overlap = HistogramFromJson(j.at("overlap"), s.bin_width);
    s.p_ovl = j.at("p_ovl").get<double>();
    if (!(s.p_ovl >= 0 && s.p_ovl <= 1)) Fail("stats: p_ovl must be in [0, 1]");
    return s;
  } catch (const nlohmann::json::exception &e) {
    Fail("stats: ", e.what());
  }
}

inline nlohmann::json MixtureToJson(const MixtureSpec &spec) {
  nlohmann::json entries = nlohmann::json::array();
  for (const MixtureEntry &e : spec.entries)
    entries.push_back({{"offset", e.offset}, {"segment", SegmentToJson(e.segment)}});
  return {{"id", spec.id}, {"seed", spec.seed}, {"entries", std::move(entries)}};
}

inline MixtureSpec MixtureFromJson(const nlohmann::json &j) {
  try {
    MixtureSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto &e : j.at("entries")) {
      MixtureEntry entry{SegmentFromJson(e.at("segment")), e.at("offset").get<double>()};
      ValidateSegment(entry.segment);
      if (!(entry.offset >= 0)) Fail("mixture '", spec.id, "': negative offset");
      spec.entries.push_back(std::move(entry));
    }
    for (std::size_t i = 1; i < spec.entries.size(); ++i)
      if (spec.entries[i].offset < spec.entries[i - 1].offset)
        Fail("mixture '", spec.id, "': entries are not ordered by offset");
    return spec;
  } catch (const nlohmann::json::exception &e) {
    Fail("mixture: ", e.what());
  }
}

// ---------------------------------------------------------------------------
// Audio rendering.

/// Where render_audio finds waveforms. Loaded files are cached; the cache is
/// safe to share across threads.
class AudioLibrary {
 public:
  using Loader = std::function<audio::WavData(const std::string &)>;

  explicit AudioLibrary(Loader loader = audio::ReadWav) : loader_(std::move(loader)) {}

  // Lists *.wav files in a directory, sorted by path.
  static std::vector<std::string> ListWavs(const std::string &dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: '" + dir + "'");
    std::vector<std::string> out;
    for (const auto &entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".wav") out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw IoError("no .wav files in '" + dir + "'");
    return out;
  }

  static AudioLibrary FromConfig(const GenerationConfig &config) {
    AudioLibrary lib;
    if (config.rir_dir) lib.rirs = ListWavs(*config.rir_dir);
    if (config.noise_dir) lib.noises = ListWavs(*config.noise_dir);
    return lib;
  }

  std::shared_ptr<const audio::WavData> Load(const std::string &path) const {
    {
      std::lock_guard<std::mutex> lock(state_->mutex);
      if (auto it = state_->cache.find(path); it != state_->cache.end()) return it->second;
    }
    auto wav = std::make_shared<const audio::WavData>(loader_(path));
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->cache.emplace(path, std::move(wav)).first->second;
  }

  std::vector<std::string> rirs;
  std::vector<std::string> noises;

 private:
  struct State {
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<const audio::WavData>> cache;
  };
  Loader loader_;
  std::shared_ptr<State> state_ = std::make_shared<State>();
};

struct RenderedMixture {
  int sample_rate = 0;
  std::vector<double> mixture;
  // Clean (reverberant, noise-free) sum of the sources on each HEAT channel.
  std::vector<std::vector<double>> channel_sources;
  heat::ChannelAssignment assignment;
  std::optional<double> loudness_lufs;
};

/// Mixes the entries of `spec` at their offsets. Each speaker gets one RIR
/// (when the library has any), noise is added at `config.noise_snr_db`
/// relative to the speech power, and a loudness range rescales the final
/// mixture (and the channel sources with it) to a uniformly drawn target.
inline RenderedMixture RenderAudio(const MixtureSpec &spec, const GenerationConfig &config, Rng &rng,
                                   const AudioLibrary &library) {
  config.Validate();
  if (spec.entries.empty()) Fail("render: mixture '", spec.id, "' has no entries");
  RenderedMixture out;
  int rate = 0;
  auto check_rate = [&](int r, const std::string &what) {
    if (rate == 0) rate = r;
    if (r != rate) Fail("render: '", what, "' has sample rate ", r, ", expected ", rate);
  };

  std::vector<std::string> speakers;
  for (const MixtureEntry &e : spec.entries)
    if (std::find(speakers.begin(), speakers.end(), e.segment.speaker) == speakers.end())
      speakers.push_back(e.segment.speaker);
  std::map<std::string, std::shared_ptr<const audio::WavData>> rir_of;
  if (!library.rirs.empty())
    for (const std::string &spk : speakers)
      rir_of[spk] = library.Load(library.rirs[rng.Below(library.rirs.size())]);

  std::vector<Segment> utterances;
  std::vector<std::pair<std::size_t, std::vector<double>>> placed;  // (start sample, signal)
  std::size_t length = 0;
  for (const MixtureEntry &e : spec.entries) {
    const Segment &seg = e.segment;
    if (!seg.audio) Fail("render: segment '", seg.id, "' has no source audio");
    auto wav = library.Load(seg.audio->path);
    check_rate(wav->sample_rate, seg.audio->path);
    if (seg.audio->channel < 0 || seg.audio->channel >= static_cast<int>(wav->channels.size()))
      Fail("render: segment '", seg.id, "' refers to missing channel ", seg.audio->channel);
    const auto &src = wav->channels[seg.audio->channel];
    auto first = static_cast<std::size_t>(std::llround(seg.start * rate));
    auto last = static_cast<std::size_t>(std::llround(seg.end * rate));
    if (last > src.size()) Fail("render: segment '", seg.id, "' extends past the end of ", seg.audio->path);
    std::vector<double> signal(src.begin() + first, src.begin() + last);
    if (auto it = rir_of.find(seg.speaker); it != rir_of.end()) {
      check_rate(it->second->sample_rate, "rir");
      signal = audio::Convolve(signal, it->second->channels.at(0));
    }
    auto at = static_cast<std::size_t>(std::llround(e.offset * rate));
    length = std::max(length, at + signal.size());
    placed.emplace_back(at, std::move(signal));
    Segment u = seg;
    u.start = e.offset;
    u.end = e.offset + seg.duration();
    utterances.push_back(std::move(u));
  }

  // Entries are in offset order; HEAT needs the full start-order tie-break.
  std::vector<std::size_t> order(utterances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return StartOrderLess(utterances[a], utterances[b]); });
  std::vector<Segment> sorted;
  for (std::size_t i : order) sorted.push_back(utterances[i]);
  heat::ChannelAssignment sorted_assignment = heat::Assign(sorted, config.num_channels);
  out.assignment = sorted_assignment;

  out.sample_rate = rate;
  out.channel_sources.assign(config.num_channels, std::vector<double>(length, 0.0));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto &[at, signal] = placed[order[k]];
    auto &dst = out.channel_sources[sorted_assignment.channel_of[k]];
    for (std::size_t i = 0; i < signal.size(); ++i) dst[at + i] += signal[i];
  }
  out.mixture.assign(length, 0.0);
  for (const auto &ch : out.channel_sources)
    for (std::size_t i = 0; i < length; ++i) out.mixture[i] += ch[i];

  if (!library.noises.empty()) {
    auto noise = library.Load(library.noises[rng.Below(library.noises.size())]);
    check_rate(noise->sample_rate, "noise");
    const auto &n = noise->channels.at(0);
    const double speech_power = audio::MeanPower(out.mixture);
    const double noise_power = audio::MeanPower(n);
    if (noise_power > 0 && speech_power > 0) {
      const double gain = std::sqrt(speech_power / (noise_power * std::pow(10.0, config.noise_snr_db / 10.0)));
      std::size_t pos = static_cast<std::size_t>(rng.Below(n.size()));
      for (double &x : out.mixture) {
        x += gain * n[pos];
        if (++pos == n.size()) pos = 0;
      }
    }
  }

  if (config.loudness_db) {
    const double target = rng.Uniform(config.loudness_db->first, config.loudness_db->second);
    const double measured = audio::IntegratedLoudness(out.mixture, rate);
    if (!std::isfinite(measured)) Fail("render: mixture '", spec.id, "' is silent; cannot normalize loudness");
    const double gain = std::pow(10.0, (target - measured) / 20.0);
    for (double &x : out.mixture) x *= gain;
    for (auto &ch : out.channel_sources)
      for (double &x : ch) x *= gain;
    out.loudness_lufs = audio::IntegratedLoudness(out.mixture, rate);
  }
  return out;
}

}  // namespace surt::mixer

#endif  // SURT_MIXER_HPP_
