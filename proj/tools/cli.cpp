// tools/cli.cpp
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

#include "cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "surt/audio.hpp"
#include "surt/common.hpp"
#include "surt/corpus.hpp"
#include "surt/heat.hpp"
#include "surt/lattice.hpp"
#include "surt/metrics.hpp"
#include "surt/mixer.hpp"

namespace surt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return ss.str();
}

std::string Digest(const std::string &path) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(Fnv1a64(ReadFile(path))));
  return buf;
}

// Parses every non-blank, non-provenance line of a JSONL file.
std::vector<json> ReadJsonLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      Fail(path, ":", line_no, ": parse error: ", e.what());
    }
    if (IsProvenanceLine(j)) continue;
    if (!j.is_object()) Fail(path, ":", line_no, ": expected a JSON object");
    out.push_back(std::move(j));
  }
  return out;
}

json ReadJsonFile(const std::string &path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::parse_error &e) {
    Fail(path, ": parse error: ", e.what());
  }
}

// Shared state for one invocation.
struct Context {
  std::string command;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::vector<std::string> inputs;

  json Provenance() const {
    json digests = json::object();
    for (const std::string &p : inputs) digests[p] = Digest(p);
    return {{"tool", "surt"},
            {"version", kVersion},
            {"command", command},
            {"seed", seed ? json(*seed) : json(nullptr)},
            {"inputs", std::move(digests)}};
  }
};

void RequireInput(Context &ctx, const std::string &path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError("input '" + path + "' does not exist or is not a file");
  ctx.inputs.push_back(path);
}

void RequireOutputDir(const std::string &path) {
  if (path.empty()) return;
  fs::path dir = fs::path(path).parent_path();
  std::error_code ec;
  if (!dir.empty() && !fs::is_directory(dir, ec))
    throw IoError("output directory '" + dir.string() + "' does not exist");
}

void Emit(const std::string &path, const std::string &content, std::ostream &out) {
  if (path.empty() || path == "-")
    out << content;
  else
    WriteFileAtomic(path, content);
}

std::string JsonlWithHeader(const Context &ctx, const std::vector<json> &lines) {
  std::string s = json{{"_provenance", ctx.Provenance()}}.dump() + "\n";
  for (const json &j : lines) s += j.dump() + "\n";
  return s;
}

json NumberOrNull(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------
// subsegment

struct SubsegmentArgs {
  std::string manifest, out;
  double tau = 0.2;
};

void RunSubsegment(Context &ctx, const SubsegmentArgs &a, std::ostream &out) {
  RequireInput(ctx, a.manifest);
  RequireOutputDir(a.out);
  if (!(a.tau >= 0)) Fail("subsegment: --tau must be >= 0");
  std::vector<Meeting> meetings = LoadManifest(a.manifest);
  auto pieces = ParallelMap<Meeting>(meetings.size(), ctx.jobs, [&](std::size_t i) {
    Meeting m{meetings[i].id, {}};
    for (const Segment &s : meetings[i].segments)
      for (Segment &p : Subsegment(s, a.tau)) m.segments.push_back(std::move(p));
    return NormalizeMeeting(std::move(m));
  });
  std::vector<json> lines;
  std::size_t before = 0, after = 0;
  double dur = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    before += meetings[i].segments.size();
    after += pieces[i].segments.size();
    for (const Segment &s : pieces[i].segments) dur += s.duration();
    lines.push_back(MeetingToJson(pieces[i]));
  }
  Log(LogLevel::kInfo, "subsegment: ", before, " segments -> ", after, " sub-segments, mean duration ",
      after ? dur / static_cast<double>(after) : 0.0, " s");
  Emit(a.out, JsonlWithHeader(ctx, lines), out);
}

// ---------------------------------------------------------------------------
// fit-stats

struct FitStatsArgs {
  std::string meetings, out;
  double bin_width = 0.1;
  std::vector<double> fixed;
};

void RunFitStats(Context &ctx, const FitStatsArgs &a, std::ostream &out) {
  RequireOutputDir(a.out);
  mixer::PauseStats stats;
  if (!a.fixed.empty()) {
    if (a.fixed.size() != 4) Fail("fit-stats: --fixed takes same,diff,overlap,p_ovl");
    stats = mixer::PauseStats::Fixed(a.fixed[0], a.fixed[1], a.fixed[2], a.fixed[3], a.bin_width);
  } else {
    if (a.meetings.empty()) Fail("fit-stats: need --meetings or --fixed");
    RequireInput(ctx, a.meetings);
    stats = mixer::FitStats(LoadManifest(a.meetings), a.bin_width);
  }
  json j = mixer::StatsToJson(stats);
  j["provenance"] = ctx.Provenance();
  Emit(a.out, j.dump(2) + "\n", out);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string segments, stats, out;
  int max_speakers = 3;
  double max_speaker_dur = 15.0;
  int channels = 2;
  bool audio = false;
  std::string audio_dir, rir_dir, noise_dir, loudness;
  double noise_snr = 10.0;
};

std::pair<double, double> ParseRange(const std::string &s) {
  auto colon = s.find(':', 1);
  if (colon == std::string::npos) Fail("expected MIN:MAX, got '", s, "'");
  try {
    std::size_t n1 = 0, n2 = 0;
    double lo = std::stod(s.substr(0, colon), &n1);
    double hi = std::stod(s.substr(colon + 1), &n2);
    if (n1 != colon || n2 != s.size() - colon - 1) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error &) {
    Fail("expected MIN:MAX, got '", s, "'");
  }
}

// Segment pool: manifest lines contribute their segments, bare segment lines
// contribute themselves, in file order.
std::vector<Segment> ReadSegmentPool(const std::string &path) {
  std::vector<Segment> pool;
  std::set<std::string> ids;
  for (const json &j : ReadJsonLines(path)) {
    std::vector<Segment> segs;
    if (j.contains("segments")) {
      for (const json &s : j.at("segments")) segs.push_back(SegmentFromJson(s));
    } else {
      segs.push_back(SegmentFromJson(j));
    }
    for (Segment &s : segs) {
      ValidateSegment(s);
      if (!ids.insert(s.id).second) Fail(path, ": duplicate segment id '", s.id, "'");
      pool.push_back(std::move(s));
    }
  }
  return pool;
}

void RunSimulate(Context &ctx, const SimulateArgs &a, std::ostream &out) {
  if (!ctx.seed) Fail("simulate: --seed is required");
  RequireInput(ctx, a.segments);
  RequireInput(ctx, a.stats);
  RequireOutputDir(a.out);

  mixer::GenerationConfig config;
  config.max_speakers = a.max_speakers;
  config.max_speaker_dur = a.max_speaker_dur;
  config.num_channels = a.channels;
  config.seed = *ctx.seed;
  config.noise_snr_db = a.noise_snr;
  if (!a.rir_dir.empty()) config.rir_dir = a.rir_dir;
  if (!a.noise_dir.empty()) config.noise_dir = a.noise_dir;
  if (!a.loudness.empty()) config.loudness_db = ParseRange(a.loudness);
  config.Validate();

  std::string audio_dir = a.audio_dir;
  if (a.audio && audio_dir.empty()) {
    if (a.out.empty()) Fail("simulate: --audio without --out needs --audio-dir");
    fs::path p(a.out);
    audio_dir = (p.parent_path() / (p.stem().string() + "_audio")).string();
  }
  mixer::AudioLibrary library;
  if (a.audio) {
    library = mixer::AudioLibrary::FromConfig(config);
    std::error_code ec;
    fs::create_directories(audio_dir, ec);
    if (ec) throw IoError("cannot create audio directory '" + audio_dir + "': " + ec.message());
  }

  const std::vector<Segment> pool = ReadSegmentPool(a.segments);
  const mixer::PauseStats stats = mixer::StatsFromJson(ReadJsonFile(a.stats));
  const std::vector<mixer::MixtureSpec> specs = mixer::GenerateMixtures(pool, stats, config);
  Log(LogLevel::kInfo, "simulate: ", specs.size(), " mixtures from ", pool.size(), " segments");

  auto lines = ParallelMap<json>(specs.size(), ctx.jobs, [&](std::size_t i) {
    const mixer::MixtureSpec &spec = specs[i];
    json j = mixer::MixtureToJson(spec);
    if (!a.audio) return j;
    Rng rng(spec.seed);
    mixer::RenderedMixture r = mixer::RenderAudio(spec, config, rng, library);
    const std::string mix_path = (fs::path(audio_dir) / (spec.id + ".wav")).string();
    WriteFileAtomic(mix_path, audio::EncodeWav(r.mixture, r.sample_rate, audio::SampleFormat::kFloat32));
    json channel_paths = json::array();
    for (std::size_t c = 0; c < r.channel_sources.size(); ++c) {
      const std::string p = (fs::path(audio_dir) / (spec.id + "_ch" + std::to_string(c) + ".wav")).string();
      WriteFileAtomic(p, audio::EncodeWav(r.channel_sources[c], r.sample_rate, audio::SampleFormat::kFloat32));
      channel_paths.push_back(p);
    }
    j["audio"] = {{"mixture", mix_path},
                  {"channels", std::move(channel_paths)},
                  {"sample_rate", r.sample_rate},
                  {"loudness_lufs", r.loudness_lufs ? NumberOrNull(*r.loudness_lufs) : json(nullptr)}};
    return j;
  });
  Emit(a.out, JsonlWithHeader(ctx, lines), out);
}

// ---------------------------------------------------------------------------
// heat

struct HeatArgs {
  std::string mixtures, out;
  int channels = 2;
};

void RunHeat(Context &ctx, const HeatArgs &a, std::ostream &out) {
  RequireInput(ctx, a.mixtures);
  RequireOutputDir(a.out);
  if (a.channels < 2) Fail("heat: --channels must be >= 2");
  const std::vector<Session> sessions = ReadSessions(a.mixtures);
  auto lines = ParallelMap<json>(sessions.size(), ctx.jobs, [&](std::size_t i) {
    const Session &s = sessions[i];
    heat::ChannelAssignment assignment = heat::Assign(s.utterances, a.channels);
    heat::ChannelReferences refs = heat::BuildReferences(s.utterances, assignment);
    if (!assignment.conflicts.empty())
      Warn("heat: session '", s.id, "' has ", assignment.conflicts.size(),
           " utterances overlapping every channel");
    return json{{"id", s.id},
                {"channels", refs.per_channel},
                {"assignment", assignment.channel_of},
                {"conflicts", assignment.conflicts}};
  });
  Emit(a.out, JsonlWithHeader(ctx, lines), out);
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string refs, hyps, out, metric = "orc";
  int ngram = 4;
  std::size_t max_states = metrics::OrcOptions{}.max_states;
};

struct SessionScore {
  metrics::EditStats stats;
  json assignment;
  std::optional<metrics::NGramDiagnostics> ngram;
};

json StatsJson(const metrics::EditStats &s) {
  return {{"wer", NumberOrNull(s.wer())},
          {"wer_infinite", s.wer_infinite()},
          {"errors", s.errors()},
          {"ins", s.ins},
          {"del", s.del},
          {"sub", s.sub},
          {"ref_len", s.ref_len}};
}

SessionScore ScoreSession(const Session &ref, const Hypothesis &hyp, const ScoreArgs &a) {
  std::vector<TokenSequence> utts;
  for (const Segment &s : ref.utterances) utts.push_back(Tokenize(s.text));
  SessionScore score;
  if (a.metric == "orc") {
    if (hyp.channels.empty()) Fail("score: session '", ref.id, "' has no hypothesis channels");
    metrics::OrcResult r = metrics::OrcWer(utts, hyp.channels, metrics::OrcOptions{a.max_states});
    score.stats = r.stats;
    score.assignment = r.assignment;
  } else if (a.metric == "cpwer") {
    std::map<std::string, TokenSequence> by_speaker;
    for (std::size_t n = 0; n < utts.size(); ++n) {
      TokenSequence &dst = by_speaker[ref.utterances[n].speaker];
      dst.insert(dst.end(), utts[n].begin(), utts[n].end());
    }
    if (by_speaker.empty()) by_speaker[""] = {};
    metrics::CpWerResult r = metrics::CpWer(by_speaker, hyp.channels);
    score.stats = r.stats;
    json m = json::object();
    for (std::size_t k = 0; k < r.speakers.size(); ++k) m[r.speakers[k]] = r.channel_of_speaker[k];
    score.assignment = std::move(m);
  } else {
    TokenSequence all_ref, all_hyp;
    for (const auto &u : utts) all_ref.insert(all_ref.end(), u.begin(), u.end());
    for (const auto &c : hyp.channels) all_hyp.insert(all_hyp.end(), c.begin(), c.end());
    score.stats = metrics::ComputeEditStats(all_ref, all_hyp);
  }
  if (a.ngram > 0)
    score.ngram = metrics::ComputeNGramDiagnostics(utts, hyp.channels, static_cast<std::size_t>(a.ngram));
  return score;
}

void RunScore(Context &ctx, const ScoreArgs &a, std::ostream &out) {
  RequireInput(ctx, a.refs);
  RequireInput(ctx, a.hyps);
  RequireOutputDir(a.out);
  if (a.metric != "orc" && a.metric != "cpwer" && a.metric != "wer")
    Fail("score: unknown metric '", a.metric, "'");
  if (a.ngram < 0) Fail("score: --ngram must be >= 0");

  const std::vector<Session> refs = ReadSessions(a.refs);
  const std::vector<Hypothesis> hyps = ReadHypotheses(a.hyps);
  std::map<std::string, const Hypothesis *> hyp_of;
  for (const Hypothesis &h : hyps) hyp_of[h.id] = &h;
  for (const Session &s : refs)
    if (!hyp_of.count(s.id)) Fail("score: no hypothesis for session '", s.id, "'");
  if (hyps.size() > refs.size()) Warn("score: ", hyps.size() - refs.size(), " hypotheses have no reference");

  auto scores = ParallelMap<SessionScore>(refs.size(), ctx.jobs, [&](std::size_t i) {
    return ScoreSession(refs[i], *hyp_of.at(refs[i].id), a);
  });

  const std::string leak_key = "leakage@" + std::to_string(a.ngram);
  const std::string omit_key = "omission@" + std::to_string(a.ngram);
  json sessions = json::array();
  metrics::EditStats total;
  std::size_t uniq = 0, none = 0, many = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const SessionScore &s = scores[i];
    json j = StatsJson(s.stats);
    j["id"] = refs[i].id;
    j["assignment"] = s.assignment;
    if (s.ngram) {
      j[leak_key] = s.ngram->leakage;
      j[omit_key] = s.ngram->omission;
      j["ngram_total"] = s.ngram->total_unique;
      uniq += s.ngram->total_unique;
      none += s.ngram->in_none;
      many += s.ngram->in_many;
    }
    total += s.stats;
    sessions.push_back(std::move(j));
  }
  json aggregate = StatsJson(total);
  aggregate["sessions"] = refs.size();
  aggregate["assignment"] = nullptr;
  if (a.ngram > 0) {
    aggregate[leak_key] = uniq ? static_cast<double>(many) / static_cast<double>(uniq) : 0.0;
    aggregate[omit_key] = uniq ? static_cast<double>(none) / static_cast<double>(uniq) : 0.0;
    aggregate["ngram_total"] = uniq;
  }
  json report = {{"provenance", ctx.Provenance()},
                 {"metric", a.metric},
                 {"ngram", a.ngram},
                 {"aggregate", std::move(aggregate)},
                 {"sessions", std::move(sessions)}};
  Emit(a.out, report.dump(2) + "\n", out);
}

// ---------------------------------------------------------------------------
// loss

struct LossArgs {
  std::string mode, input, occupancy, out;
  int window = 5;
  bool grad_check = false;
  int grad_check_limit = 2000;
};

std::vector<int> IntList(const json &j, const char *key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<int>>();
}

// Full joiner logits from either exchange form, plus the trivial input when
// one was given.
struct TransducerInput {
  lattice::LogitsTensor<double> logits;
  std::optional<lattice::TrivialJoinerInput<double>> trivial;
  std::vector<int> labels;
};

TransducerInput ParseTransducer(const json &j) {
  TransducerInput in;
  const int T = j.at("T").get<int>(), U = j.at("U").get<int>(), V = j.at("V").get<int>();
  const int blank = j.value("blank", 0);
  in.labels = IntList(j, "labels");
  if (j.contains("enc") || j.contains("pred")) {
    lattice::TrivialJoinerInput<double> t{T, U, V, blank, j.at("enc").get<std::vector<double>>(),
                                          j.at("pred").get<std::vector<double>>()};
    in.logits = lattice::TrivialJoin(t);
    in.trivial = std::move(t);
  }
  if (j.contains("logits")) {
    in.logits = lattice::LogitsTensor<double>(T, U, V, blank);
    in.logits.values = j.at("logits").get<std::vector<double>>();
  }
  if (!j.contains("logits") && !in.trivial) Fail("loss: input needs \"logits\" or \"enc\"/\"pred\"");
  in.logits.Validate();
  return in;
}

json OccupancyJson(const lattice::OccupancyGrid &g) {
  return {{"T", g.T}, {"U", g.U}, {"emit", g.emit}, {"blank", g.blank}, {"node", g.node}};
}

// Central differences on a random subset of coordinates.
json GradCheck(std::vector<double> x, const std::vector<double> &analytic,
               const std::function<double(const std::vector<double> &)> &f, int limit, std::uint64_t seed) {
  std::vector<std::size_t> coords(x.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  if (coords.size() > static_cast<std::size_t>(limit)) {
    Rng rng(seed);
    Shuffle(coords, rng);
    coords.resize(static_cast<std::size_t>(limit));
    std::sort(coords.begin(), coords.end());
  }
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double rel = std::abs(numeric - analytic[i]) / std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[i]) < 1e-10 ? 0.0 : rel);
  }
  const double tolerance = 1e-4;
  if (worst > tolerance) Warn("loss: gradient check max relative error ", worst);
  return {{"checked", coords.size()}, {"max_rel_error", worst}, {"passed", worst <= tolerance}};
}

void RunLoss(Context &ctx, const LossArgs &a, std::ostream &out) {
  RequireInput(ctx, a.input);
  RequireOutputDir(a.out);
  RequireOutputDir(a.occupancy);
  const json j = ReadJsonFile(a.input);
  const std::uint64_t check_seed = ctx.seed.value_or(0);
  json result = {{"mode", a.mode}};
  std::optional<lattice::OccupancyGrid> occupancy;

  try {
    if (a.mode == "rnnt") {
      TransducerInput in = ParseTransducer(j);
      auto r = lattice::RnntLoss(in.logits, std::span<const int>(in.labels));
      result["loss"] = NumberOrNull(r.loss);
      result["grad"] = r.grad;
      if (a.grad_check) {
        lattice::LogitsTensor<double> probe = in.logits;
        result["grad_check"] = GradCheck(in.logits.values, r.grad, [&](const std::vector<double> &x) {
          probe.values = x;
          return lattice::RnntLoss(probe, std::span<const int>(in.labels)).loss;
        }, a.grad_check_limit, check_seed);
      }
      if (!a.occupancy.empty()) occupancy = lattice::Occupancy(in.logits, std::span<const int>(in.labels));
    } else if (a.mode == "pruned") {
      TransducerInput in = ParseTransducer(j);
      const std::span<const int> labels(in.labels);
      lattice::OccupancyGrid occ = in.trivial ? lattice::Occupancy(*in.trivial, labels)
                                              : lattice::Occupancy(in.logits, labels);
      lattice::PruneBounds bounds = lattice::ComputePruneBoundsFromOccupancy(occ, a.window);
      auto r = lattice::PrunedRnntLoss(in.logits, bounds, labels);
      result["loss"] = NumberOrNull(r.loss);
      result["window"] = bounds.S;
      result["bounds"] = bounds.lo;
      result["grad"] = r.grad;
      if (a.grad_check) {
        // Only logits inside the windows influence the loss.
        std::vector<std::size_t> where;
        for (int t = 0; t < bounds.T; ++t)
          for (int s = 0; s < bounds.S; ++s)
            for (int v = 0; v < in.logits.V; ++v) where.push_back(in.logits.index(t, bounds.lo[t] + s, v));
        std::vector<double> x0;
        for (std::size_t i : where) x0.push_back(in.logits.values[i]);
        lattice::LogitsTensor<double> probe = in.logits;
        result["grad_check"] = GradCheck(x0, r.grad, [&](const std::vector<double> &x) {
          for (std::size_t k = 0; k < where.size(); ++k) probe.values[where[k]] = x[k];
          return lattice::PrunedRnntLoss(probe, bounds, labels).loss;
        }, a.grad_check_limit, check_seed);
      }
      if (!a.occupancy.empty()) occupancy = std::move(occ);
    } else if (a.mode == "ctc") {
      lattice::FrameLogits<double> logits(j.at("T").get<int>(), j.at("V").get<int>(), j.value("blank", 0));
      logits.values = j.at("logits").get<std::vector<double>>();
      const std::vector<int> labels = IntList(j, "labels");
      auto r = lattice::CtcLoss(logits, std::span<const int>(labels));
      result["loss"] = NumberOrNull(r.loss);
      result["feasible"] = r.feasible;
      result["grad"] = r.grad;
      if (a.grad_check && r.feasible) {
        lattice::FrameLogits<double> probe = logits;
        result["grad_check"] = GradCheck(logits.values, r.grad, [&](const std::vector<double> &x) {
          probe.values = x;
          return lattice::CtcLoss(probe, std::span<const int>(labels)).loss;
        }, a.grad_check_limit, check_seed);
      }
    } else if (a.mode == "mask") {
      auto read = [&](const char *key) {
        std::vector<lattice::FeatureMatrix<double>> ms;
        for (const json &m : j.at(key))
          ms.push_back({m.at("rows").get<int>(), m.at("cols").get<int>(), m.at("values").get<std::vector<double>>()});
        return ms;
      };
      const auto est = read("estimated"), tgt = read("targets");
      using Span = std::span<const lattice::FeatureMatrix<double>>;
      auto r = lattice::MaskLoss(Span(est), Span(tgt));
      result["loss"] = r.loss;
      result["grad"] = r.grad;
      if (a.grad_check) {
        std::vector<double> x0;
        for (const auto &m : est) x0.insert(x0.end(), m.values.begin(), m.values.end());
        auto probe = est;
        result["grad_check"] = GradCheck(x0, r.grad, [&](const std::vector<double> &x) {
          std::size_t k = 0;
          for (auto &m : probe)
            for (double &v : m.values) v = x[k++];
          return lattice::MaskLoss(Span(probe), Span(tgt)).loss;
        }, a.grad_check_limit, check_seed);
      }
    } else {
      Fail("loss: unknown mode '", a.mode, "'");
    }
  } catch (const json::exception &e) {
    Fail("loss: malformed input: ", e.what());
  }
  if (!a.occupancy.empty()) {
    if (!occupancy) Fail("loss: --occupancy needs mode rnnt or pruned");
    json o = OccupancyJson(*occupancy);
    o["provenance"] = ctx.Provenance();
    WriteFileAtomic(a.occupancy, o.dump() + "\n");
  }
  result["provenance"] = ctx.Provenance();
  Emit(a.out, result.dump() + "\n", out);
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Session> ReadSessions(const std::string &path) {
  std::vector<Session> sessions;
  std::set<std::string> ids;
  for (const json &j : ReadJsonLines(path)) {
    Session s;
    try {
      if (j.contains("entries")) {
        mixer::MixtureSpec spec = mixer::MixtureFromJson(j);
        s.id = spec.id;
        s.utterances = mixer::MixtureUtterances(spec);
      } else if (j.contains("segments")) {
        Meeting m;
        m.id = j.at("id").get<std::string>();
        for (const json &seg : j.at("segments")) m.segments.push_back(SegmentFromJson(seg));
        m = NormalizeMeeting(std::move(m));
        s.id = m.id;
        s.utterances = std::move(m.segments);
      } else {
        Fail(path, ": line has neither \"segments\" nor \"entries\"");
      }
    } catch (const json::exception &e) {
      Fail(path, ": ", e.what());
    }
    if (!ids.insert(s.id).second) Fail(path, ": duplicate session id '", s.id, "'");
    sessions.push_back(std::move(s));
  }
  return sessions;
}

std::vector<Hypothesis> ReadHypotheses(const std::string &path) {
  std::vector<Hypothesis> out;
  std::set<std::string> ids;
  for (const json &j : ReadJsonLines(path)) {
    Hypothesis h;
    try {
      h.id = j.at("id").get<std::string>();
      for (const json &c : j.at("channels")) {
        if (c.is_string())
          h.channels.push_back(Tokenize(c.get<std::string>()));
        else
          h.channels.push_back(c.get<TokenSequence>());
      }
    } catch (const json::exception &e) {
      Fail(path, ": hypothesis '", h.id, "': ", e.what());
    }
    if (!ids.insert(h.id).second) Fail(path, ": duplicate hypothesis id '", h.id, "'");
    out.push_back(std::move(h));
  }
  return out;
}

void WriteFileAtomic(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." +
                          std::to_string(std::hash<std::string>{}(content) & 0xffffff);
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("short write to '" + tmp + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

int DefaultJobs() {
  if (const char *env = std::getenv("SURT_JOBS")) {
    char *end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    Warn("ignoring SURT_JOBS='", env, "'");
  }
  return 1;
}

int Dispatch(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"surt: multi-talker ASR toolkit (corpus, HEAT, simulation, losses, scoring)", "surt"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  int jobs = DefaultJobs();
  std::optional<std::uint64_t> seed;
  std::string log_level = "warning";
  app.add_option("--jobs,-j", jobs, "Worker threads (default: $SURT_JOBS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed, recorded in every output");
  app.add_option("--log-level", log_level, "debug|info|warning|error|off");
  CLI::Option *config_opt = app.set_config("--config", "", "Read options from a TOML/INI file ([subcommand] sections)");

  SubsegmentArgs sub;
  auto *c_sub = app.add_subcommand("subsegment", "Split segments at long inter-word pauses");
  c_sub->add_option("--manifest", sub.manifest, "Input manifest (JSONL)")->required();
  c_sub->add_option("--tau", sub.tau, "Pause threshold in seconds");
  c_sub->add_option("--out", sub.out, "Output manifest (default: stdout)");

  FitStatsArgs fit;
  auto *c_fit = app.add_subcommand("fit-stats", "Estimate pause/overlap statistics from meetings");
  c_fit->add_option("--meetings", fit.meetings, "Meeting manifest (JSONL)");
  c_fit->add_option("--bin-width", fit.bin_width, "Histogram bin width in seconds");
  c_fit->add_option("--fixed", fit.fixed, "Point-mass stats: same,diff,overlap,p_ovl")->delimiter(',');
  c_fit->add_option("--out", fit.out, "Output JSON (default: stdout)");

  SimulateArgs sim;
  auto *c_sim = app.add_subcommand("simulate", "Generate meeting-style training mixtures");
  c_sim->add_option("--segments", sim.segments, "Source segments (manifest JSONL)")->required();
  c_sim->add_option("--stats", sim.stats, "Pause statistics from fit-stats")->required();
  c_sim->add_option("--max-speakers", sim.max_speakers, "Speakers per mixture, K");
  c_sim->add_option("--max-speaker-dur", sim.max_speaker_dur, "Speech per speaker in seconds, T");
  c_sim->add_option("--channels", sim.channels, "Output channels for rendered sources");
  c_sim->add_option("--out", sim.out, "Output mixture specs (default: stdout)");
  c_sim->add_flag("--audio", sim.audio, "Render waveforms");
  c_sim->add_option("--audio-dir", sim.audio_dir, "Where rendered waveforms go");
  c_sim->add_option("--rir-dir", sim.rir_dir, "Directory of RIR .wav files");
  c_sim->add_option("--noise-dir", sim.noise_dir, "Directory of noise .wav files");
  c_sim->add_option("--loudness", sim.loudness, "Target loudness range MIN:MAX in LUFS");
  c_sim->add_option("--noise-snr", sim.noise_snr, "Noise SNR in dB");

  HeatArgs heat_args;
  auto *c_heat = app.add_subcommand("heat", "Build per-channel HEAT references");
  c_heat->add_option("--mixtures", heat_args.mixtures, "Mixture specs or meetings (JSONL)")->required();
  c_heat->add_option("--channels", heat_args.channels, "Number of output channels");
  c_heat->add_option("--out", heat_args.out, "Output references (default: stdout)");

  ScoreArgs score;
  auto *c_score = app.add_subcommand("score", "Score multi-channel hypotheses");
  c_score->add_option("--refs", score.refs, "Reference meetings or mixtures (JSONL)")->required();
  c_score->add_option("--hyps", score.hyps, "Hypotheses {id, channels} (JSONL)")->required();
  c_score->add_option("--metric", score.metric, "orc|cpwer|wer")->check(CLI::IsMember({"orc", "cpwer", "wer"}));
  c_score->add_option("--ngram", score.ngram, "Order for leakage/omission (0 disables)");
  c_score->add_option("--max-states", score.max_states, "ORC dynamic-programming state limit");
  c_score->add_option("--out", score.out, "Output report (default: stdout)");

  LossArgs loss;
  auto *c_loss = app.add_subcommand("loss", "Evaluate a loss and its gradient");
  c_loss->add_option("--mode", loss.mode, "rnnt|pruned|ctc|mask")
      ->required()
      ->check(CLI::IsMember({"rnnt", "pruned", "ctc", "mask"}));
  c_loss->add_option("--input", loss.input, "Input tensors (JSON)")->required();
  c_loss->add_option("--window", loss.window, "Pruning window S");
  c_loss->add_flag("--grad-check", loss.grad_check, "Compare against central differences");
  c_loss->add_option("--grad-check-limit", loss.grad_check_limit, "Coordinates to check")->check(CLI::PositiveNumber);
  c_loss->add_option("--occupancy", loss.occupancy, "Write lattice occupancies here");
  c_loss->add_option("--out", loss.out, "Output JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError &e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << '\n' << app.help();
    return kUsage;
  }

  try {
    SetLogLevel(ParseLogLevel(log_level));
    Context ctx;
    ctx.seed = seed;
    ctx.jobs = jobs;
    CLI::App *cmd = app.get_subcommands().front();
    ctx.command = cmd->get_name();
    if (config_opt->count() > 0) ctx.inputs.push_back(config_opt->as<std::string>());
    if (cmd == c_sub) RunSubsegment(ctx, sub, out);
    else if (cmd == c_fit) RunFitStats(ctx, fit, out);
    else if (cmd == c_sim) RunSimulate(ctx, sim, out);
    else if (cmd == c_heat) RunHeat(ctx, heat_args, out);
    else if (cmd == c_score) RunScore(ctx, score, out);
    else if (cmd == c_loss) RunLoss(ctx, loss, out);
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const IoError &e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << '\n';
    return kValidationError;
  }
  return kOk;
}

}  // namespace surt::cli
