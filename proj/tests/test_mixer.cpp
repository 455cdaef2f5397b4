// tests/test_mixer.cpp
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


#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "surt/mixer.hpp"

namespace surt::mixer {
namespace {

Segment Seg(std::string id, std::string spk, double start, double end) {
  Segment s;
  s.id = std::move(id);
  s.speaker = std::move(spk);
  s.start = start;
  s.end = end;
  s.text = "w";
  return s;
}

Meeting MeetingOf(std::vector<Segment> segs) { return Meeting{"m", std::move(segs)}; }

TEST(Rng, DeterministicAndSplittable) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(Rng(42)(), c());
  Rng root(7);
  EXPECT_NE(root.Split(0)(), root.Split(1)());
  EXPECT_EQ(root.Split(5)(), Rng(7).Split(5)());
  Rng r(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto v = r.Below(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
    double u = r.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(FitStats, CountsEachPairOnce) {
  // same-speaker gap 1.0, different-speaker gap 0.5, different-speaker overlap 0.3
  auto m = MeetingOf({Seg("a", "A", 0, 2), Seg("b", "A", 3, 5), Seg("c", "B", 5.5, 7), Seg("d", "C", 6.7, 9)});
  auto s = FitStats(std::vector<Meeting>{m}, 0.1);
  EXPECT_DOUBLE_EQ(s.same_spk.total(), 1.0);
  EXPECT_DOUBLE_EQ(s.diff_spk.total(), 1.0);
  EXPECT_DOUBLE_EQ(s.overlap.total(), 1.0);
  EXPECT_DOUBLE_EQ(s.p_ovl, 0.5);
  EXPECT_EQ(s.same_spk.bins(), (std::vector<HistogramBin>{{1.0, 1.0}}));
  EXPECT_EQ(s.diff_spk.bins(), (std::vector<HistogramBin>{{0.5, 1.0}}));
  ASSERT_EQ(s.overlap.bins().size(), 1u);
  EXPECT_NEAR(s.overlap.bins()[0].lo, 0.3, 1e-12);
}

TEST(FitStats, ProbabilityCountingRule) {
  auto two = MeetingOf({Seg("a", "A", 0, 2), Seg("b", "B", 2.5, 4), Seg("c", "A", 3.5, 5)});
  EXPECT_DOUBLE_EQ(FitStats(std::vector<Meeting>{two}, 0.1).p_ovl, 0.5);
  auto no_overlap = MeetingOf({Seg("a", "A", 0, 2), Seg("b", "B", 2.5, 4)});
  EXPECT_DOUBLE_EQ(FitStats(std::vector<Meeting>{no_overlap}, 0.1).p_ovl, 0.0);
  auto same = MeetingOf({Seg("a", "A", 0, 2), Seg("b", "A", 2.5, 4)});
  auto s = FitStats(std::vector<Meeting>{same}, 0.1);
  EXPECT_DOUBLE_EQ(s.p_ovl, 0.0);
  EXPECT_TRUE(s.diff_spk.empty());
}

TEST(FitStats, Errors) {
  EXPECT_THROW(FitStats(std::vector<Meeting>{MeetingOf({Seg("a", "A", 0, 1)})}, 0.1), ValidationError);
  EXPECT_THROW(FitStats(std::vector<Meeting>{}, 0.1), ValidationError);
  auto m = MeetingOf({Seg("a", "A", 0, 2), Seg("b", "B", 2.5, 4)});
  EXPECT_THROW(FitStats(std::vector<Meeting>{m}, 0.0), ValidationError);
}

TEST(SampleGap, BranchesAndSupport) {
  PauseStats s;
  s.same_spk.Add(0.45);
  s.overlap.Add(0.25);
  s.diff_spk.Add(0.75);
  s.p_ovl = 1.0;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    double same = SampleGap(s, "A", "A", rng);
    EXPECT_GE(same, 0.4);
    EXPECT_LT(same, 0.5);
    double ovl = SampleGap(s, "A", "B", rng);
    EXPECT_GT(ovl, -0.3);
    EXPECT_LE(ovl, -0.2);
  }
  s.p_ovl = 0.0;
  for (int i = 0; i < 100; ++i) {
    double d = SampleGap(s, "A", "B", rng);
    EXPECT_GE(d, 0.7);
    EXPECT_LT(d, 0.8);
  }
}

TEST(SampleGap, DeterministicAndErrors) {
  auto s = PauseStats::Fixed(0.5, 0.5, 1.0, 0.8);
  Rng a(9), b(9);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(SampleGap(s, "A", "B", a), SampleGap(s, "A", "B", b));
  PauseStats empty;
  Rng r(1);
  EXPECT_THROW(SampleGap(empty, "A", "A", r), ValidationError);
  empty.p_ovl = 1.0;
  EXPECT_THROW(SampleGap(empty, "A", "B", r), ValidationError);
  EXPECT_THROW(PauseStats::Fixed(0.5, 0.5, 1.0, 1.5), ValidationError);
}

TEST(SampleGap, FixedStatsReproduceProbability) {
  auto s = PauseStats::Fixed(0.5, 0.5, 1.0, 0.8);
  Rng rng(5);
  int overlaps = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double g = SampleGap(s, "A", "B", rng);
    if (g < 0) {
      EXPECT_DOUBLE_EQ(g, -1.0);
      ++overlaps;
    } else {
      EXPECT_DOUBLE_EQ(g, 0.5);
    }
  }
  EXPECT_NEAR(overlaps / static_cast<double>(n), 0.8, 0.02);
}

std::vector<Segment> Pool(std::mt19937_64 &gen, int speakers, int per_speaker, double lo, double hi) {
  std::uniform_real_distribution<double> dur(lo, hi);
  std::vector<Segment> out;
  for (int s = 0; s < speakers; ++s)
    for (int i = 0; i < per_speaker; ++i)
      out.push_back(Seg("s" + std::to_string(s) + "_" + std::to_string(i), "spk" + std::to_string(s), 0.0, dur(gen)));
  return out;
}

void CheckBudgets(const std::vector<MixtureSpec> &mixes, const GenerationConfig &cfg) {
  for (const auto &m : mixes) {
    std::map<std::string, double> per_spk;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      per_spk[m.entries[i].segment.speaker] += m.entries[i].segment.duration();
      EXPECT_GE(m.entries[i].offset, 0.0);
      if (i) EXPECT_GE(m.entries[i].offset, m.entries[i - 1].offset);
    }
    EXPECT_LE(per_spk.size(), static_cast<std::size_t>(cfg.max_speakers));
    for (auto &[spk, d] : per_spk) EXPECT_LE(d, cfg.max_speaker_dur + 1e-12);
    EXPECT_FALSE(m.entries.empty());
    EXPECT_DOUBLE_EQ(m.entries.front().offset, 0.0);
  }
}

TEST(GenerateMixtures, SingleSpeakerPool) {
  std::mt19937_64 gen(1);
  auto pool = Pool(gen, 1, 20, 1.0, 4.0);
  GenerationConfig cfg;
  auto mixes = GenerateMixtures(pool, PauseStats::Fixed(0.5, 0.5, 1.0, 0.8), cfg);
  for (const auto &m : mixes)
    for (const auto &e : m.entries) EXPECT_EQ(e.segment.speaker, "spk0");
  CheckBudgets(mixes, cfg);
}

TEST(GenerateMixtures, BudgetsAndSegmentUse) {
  std::mt19937_64 gen(2);
  auto pool = Pool(gen, 7, 12, 0.5, 5.0);  // up to 60 s per speaker
  pool.push_back(Seg("long", "spk0", 0, 20));  // longer than T, skipped
  GenerationConfig cfg;
  cfg.seed = 11;
  auto mixes = GenerateMixtures(pool, PauseStats::Fixed(0.5, 0.5, 1.0, 0.8), cfg);
  CheckBudgets(mixes, cfg);
  std::multiset<std::string> used;
  for (const auto &m : mixes)
    for (const auto &e : m.entries) used.insert(e.segment.id);
  EXPECT_EQ(used.size(), pool.size() - 1);
  EXPECT_EQ(std::set<std::string>(used.begin(), used.end()).size(), used.size());
  EXPECT_EQ(used.count("long"), 0u);
  EXPECT_EQ(mixes, GenerateMixtures(pool, PauseStats::Fixed(0.5, 0.5, 1.0, 0.8), cfg));
  cfg.seed = 12;
  EXPECT_NE(mixes, GenerateMixtures(pool, PauseStats::Fixed(0.5, 0.5, 1.0, 0.8), cfg));
}

TEST(GenerateMixtures, ClampsAtSessionStart) {
  // Overlap longer than the first segment would push the second one before 0.
  std::vector<Segment> pool{Seg("a", "A", 0, 0.5), Seg("b", "B", 0, 0.5)};
  GenerationConfig cfg;
  cfg.max_speakers = 2;
  bool saw_pair = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    for (const auto &m : GenerateMixtures(pool, PauseStats::Fixed(0.5, 0.5, 3.0, 1.0), cfg)) {
      if (m.entries.size() == 2) {
        saw_pair = true;
        EXPECT_DOUBLE_EQ(m.entries[1].offset, 0.0);
      }
    }
  }
  EXPECT_TRUE(saw_pair);
}

TEST(GenerateMixtures, Errors) {
  GenerationConfig cfg;
  cfg.max_speakers = 0;
  std::vector<Segment> pool{Seg("a", "A", 0, 1)};
  EXPECT_THROW(GenerateMixtures(pool, PauseStats::Fixed(0.5, 0.5, 1.0, 0.8), cfg), ValidationError);
  EXPECT_THROW(GenerateMixtures(std::vector<Segment>{}, PauseStats::Fixed(0.5, 0.5, 1.0, 0.8), GenerationConfig{}),
               ValidationError);
  GenerationConfig loud;
  loud.loudness_db = std::make_pair(-20.0, -25.0);
  EXPECT_THROW(loud.Validate(), ValidationError);
}

TEST(GenerateMixtures, RefitRecoversStatistics) {
  PauseStats truth;
  truth.bin_width = 0.1;
  truth.same_spk = Histogram(0.1);
  truth.diff_spk = Histogram(0.1);
  truth.overlap = Histogram(0.1);
  for (auto [lo, c] : std::vector<std::pair<double, double>>{{0.1, 3}, {0.4, 5}, {0.9, 2}}) truth.same_spk.AddBin(lo, c);
  for (auto [lo, c] : std::vector<std::pair<double, double>>{{0.2, 4}, {0.5, 4}, {1.5, 1}}) truth.diff_spk.AddBin(lo, c);
  for (auto [lo, c] : std::vector<std::pair<double, double>>{{0.3, 2}, {1.0, 3}}) truth.overlap.AddBin(lo, c);
  truth.p_ovl = 0.35;
  std::mt19937_64 gen(4);
  auto pool = Pool(gen, 40, 60, 3.0, 6.0);
  GenerationConfig cfg;
  cfg.seed = 99;
  auto mixes = GenerateMixtures(pool, truth, cfg);
  std::vector<Meeting> meetings;
  for (const auto &m : mixes) meetings.push_back(MixtureAsMeeting(m));
  auto fit = FitStats(meetings, 0.1);
  EXPECT_NEAR(fit.p_ovl, truth.p_ovl, 0.05);
  EXPECT_LE(EarthMoversDistance(fit.same_spk, truth.same_spk), 0.2);
  EXPECT_LE(EarthMoversDistance(fit.diff_spk, truth.diff_spk), 0.2);
  EXPECT_LE(EarthMoversDistance(fit.overlap, truth.overlap), 0.2);
}

TEST(EarthMovers, Basics) {
  Histogram a(0.1), b(0.1);
  a.AddBin(0.2, 1);
  b.AddBin(0.2, 5);
  EXPECT_NEAR(EarthMoversDistance(a, b), 0.0, 1e-15);
  Histogram c(0.1);
  c.AddBin(0.5, 2);
  EXPECT_NEAR(EarthMoversDistance(a, c), 0.3, 1e-12);
  EXPECT_NEAR(EarthMoversDistance(Histogram::Point(0.25), a), 0.0, 1e-12);
}

TEST(Json, StatsAndMixturesRoundTrip) {
  auto fixed = PauseStats::Fixed(0.5, 0.5, 1.0, 0.8);
  auto back = StatsFromJson(StatsToJson(fixed));
  EXPECT_EQ(back.same_spk, fixed.same_spk);
  EXPECT_DOUBLE_EQ(back.p_ovl, 0.8);

  auto m = MeetingOf({Seg("a", "A", 0, 2), Seg("b", "A", 3, 5), Seg("c", "B", 5.5, 7), Seg("d", "C", 6.7, 9)});
  auto fit = FitStats(std::vector<Meeting>{m}, 0.1);
  auto fit_back = StatsFromJson(nlohmann::json::parse(StatsToJson(fit).dump()));
  EXPECT_EQ(fit_back.same_spk.indexed_counts(), fit.same_spk.indexed_counts());
  EXPECT_EQ(fit_back.overlap.indexed_counts(), fit.overlap.indexed_counts());

  std::mt19937_64 gen(5);
  auto pool = Pool(gen, 3, 5, 1.0, 3.0);
  GenerationConfig cfg;
  for (const auto &spec : GenerateMixtures(pool, fixed, cfg))
    EXPECT_EQ(MixtureFromJson(nlohmann::json::parse(MixtureToJson(spec).dump())), spec);

  EXPECT_THROW(StatsFromJson(nlohmann::json{{"bin_width", 0.1}}), ValidationError);
}

// ---------------------------------------------------------------------------
// Rendering with in-memory audio.

struct FakeAudio {
  std::map<std::string, audio::WavData> files;
  AudioLibrary Library() const {
    return AudioLibrary([this](const std::string &path) {
      auto it = files.find(path);
      if (it == files.end()) throw IoError("no such file " + path);
      return it->second;
    });
  }
};

audio::WavData Tone(double freq, double amp, int rate, double dur) {
  audio::WavData w;
  w.sample_rate = rate;
  w.channels.emplace_back(static_cast<std::size_t>(rate * dur));
  for (std::size_t i = 0; i < w.channels[0].size(); ++i)
    w.channels[0][i] = amp * std::sin(2 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  return w;
}

MixtureEntry Entry(std::string id, std::string spk, std::string path, double start, double end, double offset) {
  Segment s = Seg(std::move(id), std::move(spk), start, end);
  s.audio = AudioSource{std::move(path), 0};
  return {s, offset};
}

TEST(RenderAudio, SingleSegmentIsShiftedCopy) {
  FakeAudio fa;
  fa.files["a.wav"] = Tone(300, 0.3, 16000, 2.0);
  MixtureSpec spec{"m", {Entry("a", "A", "a.wav", 0.5, 1.5, 0.25)}, 1};
  Rng rng(1);
  auto r = RenderAudio(spec, GenerationConfig{}, rng, fa.Library());
  ASSERT_EQ(r.mixture.size(), 4000u + 16000u);
  for (std::size_t i = 0; i < 4000; ++i) EXPECT_EQ(r.mixture[i], 0.0);
  for (std::size_t i = 0; i < 16000; ++i) EXPECT_EQ(r.mixture[4000 + i], fa.files["a.wav"].channels[0][8000 + i]);
}

TEST(RenderAudio, DisjointSegmentsAndChannelSums) {
  FakeAudio fa;
  fa.files["a.wav"] = Tone(300, 0.3, 16000, 2.0);
  fa.files["b.wav"] = Tone(500, 0.2, 16000, 2.0);
  MixtureSpec spec{"m", {Entry("a", "A", "a.wav", 0.0, 1.0, 0.0), Entry("b", "B", "b.wav", 0.0, 1.0, 1.0)}, 1};
  Rng rng(1);
  auto r = RenderAudio(spec, GenerationConfig{}, rng, fa.Library());
  ASSERT_EQ(r.mixture.size(), 32000u);
  for (std::size_t i = 0; i < 16000; ++i) {
    EXPECT_EQ(r.mixture[i], fa.files["a.wav"].channels[0][i]);
    EXPECT_EQ(r.mixture[16000 + i], fa.files["b.wav"].channels[0][i]);
  }
  // Back-to-back segments share channel 0 under HEAT.
  EXPECT_EQ(r.assignment.channel_of, (std::vector<int>{0, 0}));
}

TEST(RenderAudio, LinearityAndEnergySplit) {
  FakeAudio fa;
  fa.files["a.wav"] = Tone(300, 0.3, 8000, 3.0);
  fa.files["b.wav"] = Tone(700, 0.2, 8000, 3.0);
  fa.files["rir.wav"] = audio::WavData{8000, {{1.0, 0.0, 0.5, 0.25}}};
  GenerationConfig cfg;
  cfg.rir_dir = "unused";
  AudioLibrary lib = fa.Library();
  lib.rirs = {"rir.wav"};
  auto ea = Entry("a", "A", "a.wav", 0.0, 1.0, 0.0), eb = Entry("b", "B", "b.wav", 0.5, 2.0, 0.4);
  Rng r1(1), r2(1), r3(1);
  auto both = RenderAudio(MixtureSpec{"ab", {ea, eb}, 0}, cfg, r1, lib);
  auto only_a = RenderAudio(MixtureSpec{"a", {ea}, 0}, cfg, r2, lib);
  auto only_b = RenderAudio(MixtureSpec{"b", {eb}, 0}, cfg, r3, lib);
  // Overlapping entries land on different channels.
  EXPECT_EQ(both.assignment.channel_of, (std::vector<int>{0, 1}));
  for (std::size_t i = 0; i < both.mixture.size(); ++i) {
    double expect = (i < only_a.mixture.size() ? only_a.mixture[i] : 0.0);
    if (i < only_b.mixture.size()) expect += only_b.mixture[i];
    EXPECT_NEAR(both.mixture[i], expect, 1e-12);
    EXPECT_NEAR(both.channel_sources[0][i] + both.channel_sources[1][i], both.mixture[i], 1e-12);
  }
}

TEST(RenderAudio, LoudnessTargetRange) {
  FakeAudio fa;
  fa.files["a.wav"] = Tone(300, 0.3, 16000, 3.0);
  fa.files["b.wav"] = Tone(1200, 0.05, 16000, 3.0);
  fa.files["n.wav"] = Tone(60, 0.01, 16000, 1.0);
  GenerationConfig cfg;
  cfg.loudness_db = std::make_pair(-25.0, -20.0);
  AudioLibrary lib = fa.Library();
  lib.noises = {"n.wav"};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    MixtureSpec spec{"m", {Entry("a", "A", "a.wav", 0.0, 2.0, 0.0), Entry("b", "B", "b.wav", 0.0, 2.5, 1.0)}, seed};
    auto r = RenderAudio(spec, cfg, rng, lib);
    ASSERT_TRUE(r.loudness_lufs);
    EXPECT_GE(*r.loudness_lufs, -25.0 - 1e-6);
    EXPECT_LE(*r.loudness_lufs, -20.0 + 1e-6);
    EXPECT_NEAR(audio::IntegratedLoudness(r.mixture, 16000), *r.loudness_lufs, 1e-9);
  }
}

TEST(RenderAudio, Errors) {
  FakeAudio fa;
  fa.files["a.wav"] = Tone(300, 0.3, 16000, 2.0);
  fa.files["b.wav"] = Tone(300, 0.3, 8000, 2.0);
  Rng rng(1);
  MixtureSpec missing{"m", {{Seg("x", "A", 0, 1), 0.0}}, 0};
  EXPECT_THROW(RenderAudio(missing, GenerationConfig{}, rng, fa.Library()), ValidationError);
  MixtureSpec mismatch{"m", {Entry("a", "A", "a.wav", 0, 1, 0), Entry("b", "B", "b.wav", 0, 1, 0.5)}, 0};
  EXPECT_THROW(RenderAudio(mismatch, GenerationConfig{}, rng, fa.Library()), ValidationError);
  MixtureSpec past_end{"m", {Entry("a", "A", "a.wav", 1.5, 2.5, 0)}, 0};
  EXPECT_THROW(RenderAudio(past_end, GenerationConfig{}, rng, fa.Library()), ValidationError);
  MixtureSpec no_file{"m", {Entry("z", "A", "z.wav", 0, 1, 0)}, 0};
  EXPECT_THROW(RenderAudio(no_file, GenerationConfig{}, rng, fa.Library()), IoError);
}

}  // namespace
}  // namespace surt::mixer
