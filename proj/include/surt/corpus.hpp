// include/surt/corpus.hpp
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

#ifndef SURT_CORPUS_HPP_
#define SURT_CORPUS_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "surt/common.hpp"

namespace surt {

using TokenSequence = std::vector<std::string>;

namespace detail {

// Decodes one UTF-8 code point starting at text[pos]; advances pos. Malformed
// bytes decode as themselves so that tokenization never fails.
inline char32_t DecodeUtf8(std::string_view text, std::size_t &pos) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  unsigned char c = byte(pos);
  int extra = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xe ? 2 : (c >> 3) == 0x1e ? 3 : -1;
  if (extra <= 0 || pos + extra >= text.size()) {
    ++pos;
    return c;
  }
  char32_t cp = c & (0x3f >> extra);
  for (int i = 1; i <= extra; ++i) {
    unsigned char cc = byte(pos + i);
    if ((cc & 0xc0) != 0x80) {
      ++pos;
      return c;
    }
    cp = (cp << 6) | (cc & 0x3f);
  }
  pos += extra + 1;
  return cp;
}

inline bool IsUnicodeSpace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
    case 0x85: case 0xa0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

}  // namespace detail

// Splits on Unicode whitespace. Case and punctuation are preserved; this is
// the only normalization applied anywhere in scoring.
inline TokenSequence Tokenize(std::string_view text) {
  TokenSequence tokens;
  std::size_t pos = 0, token_start = std::string_view::npos;
  while (pos < text.size()) {
    std::size_t here = pos;
    bool space = detail::IsUnicodeSpace(detail::DecodeUtf8(text, pos));
    if (space) {
      if (token_start != std::string_view::npos) {
        tokens.emplace_back(text.substr(token_start, here - token_start));
        token_start = std::string_view::npos;
      }
    } else if (token_start == std::string_view::npos) {
      token_start = here;
    }
  }
  if (token_start != std::string_view::npos) tokens.emplace_back(text.substr(token_start));
  return tokens;
}

inline std::string JoinTokens(const TokenSequence &tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

struct Word {
  std::string token;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const Word &) const = default;
};

struct AudioSource {
  std::string path;
  int channel = 0;

  bool operator==(const AudioSource &) const = default;
};

/// One supervised speech region. Times are in seconds; when the segment
/// carries source audio, start/end are positions inside that recording.
struct Segment {
  std::string id;
  std::string speaker;
  double start = 0.0;
  double end = 0.0;
  std::string text;
  std::optional<std::vector<Word>> words;
  std::optional<AudioSource> audio;

  double duration() const { return end - start; }

  bool operator==(const Segment &) const = default;
};

struct Meeting {
  std::string id;
  std::vector<Segment> segments;

  bool operator==(const Meeting &) const = default;
};

// Throws ValidationError naming the segment when an invariant is violated.
inline void ValidateSegment(const Segment &seg) {
  if (seg.id.empty()) Fail("segment with empty id");
  if (!std::isfinite(seg.start) || !std::isfinite(seg.end))
    Fail("segment '", seg.id, "': non-finite times");
  if (seg.start < 0.0) Fail("segment '", seg.id, "': negative start ", seg.start);
  if (!(seg.end > seg.start))
    Fail("segment '", seg.id, "': end ", seg.end, " is not after start ", seg.start);
  if (seg.words) {
    double prev_end = seg.start;
    TokenSequence tokens;
    for (const Word &w : *seg.words) {
      if (Tokenize(w.token) != TokenSequence{w.token})
        Fail("segment '", seg.id, "': word token '", w.token, "' is not a single token");
      if (!(w.start >= prev_end) || !(w.end >= w.start) || w.end > seg.end)
        Fail("segment '", seg.id, "': word '", w.token, "' [", w.start, ", ", w.end,
             "] is out of order or outside the segment");
      prev_end = w.end;
      tokens.push_back(w.token);
    }
    if (tokens != Tokenize(seg.text))
      Fail("segment '", seg.id, "': word tokens do not reproduce the text");
  }
}

// Sort key shared by every consumer that needs start-time order.
inline bool StartOrderLess(const Segment &a, const Segment &b) {
  return std::tie(a.start, a.end, a.id) < std::tie(b.start, b.end, b.id);
}

// ---------------------------------------------------------------------------
// JSON mapping for the manifest schema.

inline nlohmann::json SegmentToJson(const Segment &seg) {
  nlohmann::json j = nlohmann::json::object();
  j["id"] = seg.id;
  j["speaker"] = seg.speaker;
  j["start"] = seg.start;
  j["end"] = seg.end;
  j["text"] = seg.text;
  if (seg.words) {
    nlohmann::json words = nlohmann::json::array();
    for (const Word &w : *seg.words) words.push_back({w.token, w.start, w.end});
    j["words"] = std::move(words);
  }
  if (seg.audio) j["audio"] = {{"path", seg.audio->path}, {"channel", seg.audio->channel}};
  return j;
}

inline Segment SegmentFromJson(const nlohmann::json &j) {
  if (!j.is_object()) Fail("segment is not a JSON object");
  Segment seg;
  try {
    seg.id = j.at("id").get<std::string>();
    seg.speaker = j.at("speaker").get<std::string>();
    seg.start = j.at("start").get<double>();
    seg.end = j.at("end").get<double>();
    seg.text = j.at("text").get<std::string>();
    if (auto it = j.find("words"); it != j.end() && !it->is_null()) {
      std::vector<Word> words;
      for (const auto &w : *it) {
        if (!w.is_array() || w.size() != 3) Fail("segment '", seg.id, "': malformed word entry");
        words.push_back({w[0].get<std::string>(), w[1].get<double>(), w[2].get<double>()});
      }
      seg.words = std::move(words);
    }
    if (auto it = j.find("audio"); it != j.end() && !it->is_null())
      seg.audio = AudioSource{it->at("path").get<std::string>(), it->value("channel", 0)};
  } catch (const nlohmann::json::exception &e) {
    Fail("segment '", seg.id, "': ", e.what());
  }
  return seg;
}

inline nlohmann::json MeetingToJson(const Meeting &m) {
  nlohmann::json segs = nlohmann::json::array();
  for (const Segment &s : m.segments) segs.push_back(SegmentToJson(s));
  return {{"id", m.id}, {"segments", std::move(segs)}};
}

// Lines carrying only a provenance record are skipped by every reader.
inline bool IsProvenanceLine(const nlohmann::json &j) {
  return j.is_object() && j.contains("_provenance");
}

// Normalizes one meeting: validates segments, sorts by start, drops exact
// duplicate segments and rejects conflicting ones sharing an id.
inline Meeting NormalizeMeeting(Meeting m) {
  for (const Segment &s : m.segments) ValidateSegment(s);
  std::stable_sort(m.segments.begin(), m.segments.end(), StartOrderLess);
  std::vector<Segment> unique;
  std::set<std::string> seen;
  for (Segment &s : m.segments) {
    if (!seen.insert(s.id).second) {
      auto prev = std::find_if(unique.begin(), unique.end(),
                               [&](const Segment &u) { return u.id == s.id; });
      if (*prev == s) {
        Warn("meeting '", m.id, "': dropping duplicate segment '", s.id, "'");
        continue;
      }
      Fail("meeting '", m.id, "': segment id '", s.id, "' is used by two different segments");
    }
    unique.push_back(std::move(s));
  }
  m.segments = std::move(unique);
  return m;
}

/// Lines sharing a meeting id are merged into one meeting, in order of first
/// appearance.
inline std::vector<Meeting> ReadManifest(std::istream &in) {
  std::vector<Meeting> meetings;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      Fail("manifest line ", line_no, ": parse error: ", e.what());
    }
    if (IsProvenanceLine(j)) continue;
    try {
      const std::string id = j.at("id").get<std::string>();
      auto [it, added] = index.emplace(id, meetings.size());
      if (added) {
        meetings.push_back(Meeting{id, {}});
        first_line.push_back(line_no);
      }
      for (const auto &s : j.at("segments")) {
        Segment seg = SegmentFromJson(s);
        ValidateSegment(seg);
        meetings[it->second].segments.push_back(std::move(seg));
      }
    } catch (const nlohmann::json::exception &e) {
      Fail("manifest line ", line_no, ": ", e.what());
    } catch (const ValidationError &e) {
      Fail("manifest line ", line_no, ": ", e.what());
    }
  }
  for (std::size_t i = 0; i < meetings.size(); ++i) {
    try {
      meetings[i] = NormalizeMeeting(std::move(meetings[i]));
    } catch (const ValidationError &e) {
      Fail("manifest line ", first_line[i], ": ", e.what());
    }
  }
  return meetings;
}

inline std::vector<Meeting> LoadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  return ReadManifest(in);
}

inline void WriteManifest(std::ostream &out, const std::vector<Meeting> &meetings) {
  for (const Meeting &m : meetings) out << MeetingToJson(m).dump() << '\n';
}

// ---------------------------------------------------------------------------

/// Splits a segment at every inter-word pause strictly longer than `tau`.
/// Pieces get tight bounds (first word start, last word end) and ids
/// "<id>-<k>"; if nothing splits, the input is returned unchanged.
inline std::vector<Segment> Subsegment(const Segment &segment, double tau) {
  if (!segment.words) Fail("segment '", segment.id, "': subsegment needs word alignments");
  if (!(tau >= 0.0)) Fail("subsegment: tau must be >= 0, got ", tau);
  const std::vector<Word> &words = *segment.words;
  if (words.empty()) return {segment};

  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last)
  std::size_t first = 0;
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (words[i].start - words[i - 1].end > tau) {
      runs.emplace_back(first, i);
      first = i;
    }
  }
  runs.emplace_back(first, words.size());
  if (runs.size() == 1) return {segment};

  std::vector<Segment> pieces;
  pieces.reserve(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    auto [b, e] = runs[k];
    Segment piece;
    piece.id = segment.id + "-" + std::to_string(k);
    piece.speaker = segment.speaker;
    piece.start = words[b].start;
    piece.end = words[e - 1].end;
    piece.words = std::vector<Word>(words.begin() + b, words.begin() + e);
    TokenSequence tokens;
    for (const Word &w : *piece.words) tokens.push_back(w.token);
    piece.text = JoinTokens(tokens);
    piece.audio = segment.audio;
    if (!(piece.end > piece.start)) {
      // Zero-length word runs cannot form a valid segment.
      Warn("segment '", segment.id, "': dropping zero-duration piece ", k);
      continue;
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

}  // namespace surt

#endif  // SURT_CORPUS_HPP_
