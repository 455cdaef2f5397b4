// tests/test_corpus.cpp
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

#include <random>
#include <sstream>

#include "surt/corpus.hpp"

namespace surt {
namespace {

Segment WithWords(std::string id, std::vector<Word> words, std::string speaker = "A") {
  Segment s;
  s.id = std::move(id);
  s.speaker = std::move(speaker);
  s.start = words.front().start;
  s.end = words.back().end;
  TokenSequence toks;
  for (const Word &w : words) toks.push_back(w.token);
  s.text = JoinTokens(toks);
  s.words = std::move(words);
  return s;
}

TEST(Tokenize, SplitsOnWhitespace) {
  EXPECT_EQ(Tokenize("a b  c"), (TokenSequence{"a", "b", "c"}));
  EXPECT_EQ(Tokenize(""), TokenSequence{});
  EXPECT_EQ(Tokenize(" Hello world "), (TokenSequence{"Hello", "world"}));
}

TEST(Tokenize, UnicodeWhitespaceAndCase) {
  // U+3000 ideographic space, U+00A0 no-break space, U+2003 em space.
  EXPECT_EQ(Tokenize("Gr\xc3\xbc\xc3\x9f" "e\xe3\x80\x80Welt\xc2\xa0x\xe2\x80\x83Y\t\nz"),
            (TokenSequence{"Gr\xc3\xbc\xc3\x9f" "e", "Welt", "x", "Y", "z"}));
  EXPECT_EQ(Tokenize("\xe3\x80\x80"), TokenSequence{});
}

TEST(Subsegment, SplitsAtLongPauses) {
  Segment s = WithWords("utt", {{"a", 0.0, 0.5}, {"b", 0.6, 1.0}, {"c", 1.5, 2.0}});
  auto pieces = Subsegment(s, 0.2);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_DOUBLE_EQ(pieces[0].start, 0.0);
  EXPECT_DOUBLE_EQ(pieces[0].end, 1.0);
  EXPECT_DOUBLE_EQ(pieces[1].start, 1.5);
  EXPECT_DOUBLE_EQ(pieces[1].end, 2.0);
  EXPECT_EQ(pieces[0].text, "a b");
  EXPECT_EQ(pieces[1].text, "c");
  EXPECT_EQ(pieces[0].speaker, "A");
  EXPECT_EQ(pieces[0].id, "utt-0");
  EXPECT_EQ(pieces[1].id, "utt-1");
  for (const Segment &p : pieces) EXPECT_NO_THROW(ValidateSegment(p));
}

TEST(Subsegment, InfiniteTauIsIdentity) {
  Segment s = WithWords("utt", {{"a", 0.0, 0.5}, {"b", 0.6, 1.0}, {"c", 1.5, 2.0}});
  s.start = 0.0;
  s.end = 2.5;
  auto pieces = Subsegment(s, std::numeric_limits<double>::infinity());
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_EQ(pieces[0], s);
}

TEST(Subsegment, GapEqualToTauDoesNotSplit) {
  Segment s = WithWords("utt", {{"a", 0.0, 0.5}, {"b", 0.75, 1.0}});
  EXPECT_EQ(Subsegment(s, 0.25).size(), 1u);
  EXPECT_EQ(Subsegment(s, 0.2499).size(), 2u);
}

TEST(Subsegment, Errors) {
  Segment s;
  s.id = "x";
  s.speaker = "A";
  s.end = 1.0;
  s.text = "a";
  EXPECT_THROW(Subsegment(s, 0.2), ValidationError);
  Segment w = WithWords("w", {{"a", 0.0, 0.5}});
  EXPECT_THROW(Subsegment(w, -1.0), ValidationError);
}

TEST(Subsegment, PartitionsWordsAndIsMonotoneInTau) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> gap(0.0, 0.6), len(0.05, 0.5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Word> words;
    double t = 0.0;
    int n = 1 + static_cast<int>(gen() % 12);
    for (int i = 0; i < n; ++i) {
      double s = t + (i ? gap(gen) : 0.0);
      double e = s + len(gen);
      words.push_back({"w" + std::to_string(i), s, e});
      t = e;
    }
    Segment seg = WithWords("s", words);
    std::size_t prev_count = std::numeric_limits<std::size_t>::max();
    for (double tau : {0.0, 0.1, 0.2, 0.3, 0.5, 1.0}) {
      auto pieces = Subsegment(seg, tau);
      std::vector<Word> joined;
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        joined.insert(joined.end(), pieces[k].words->begin(), pieces[k].words->end());
        if (k) { EXPECT_LT(pieces[k - 1].end, pieces[k].start); }
      }
      EXPECT_EQ(joined, words);
      EXPECT_LE(pieces.size(), prev_count);
      prev_count = pieces.size();
    }
  }
}

TEST(Manifest, TwoLinesOfOneMeetingAreMergedAndSorted) {
  std::istringstream in(
      R"({"id":"m","segments":[{"id":"b","speaker":"B","start":2.0,"end":3.0,"text":"y"}]})"
      "\n"
      R"({"id":"m","segments":[{"id":"a","speaker":"A","start":0.5,"end":1.0,"text":"x"}]})"
      "\n");
  auto meetings = ReadManifest(in);
  ASSERT_EQ(meetings.size(), 1u);
  ASSERT_EQ(meetings[0].segments.size(), 2u);
  EXPECT_EQ(meetings[0].segments[0].id, "a");
  EXPECT_EQ(meetings[0].segments[1].id, "b");
}

TEST(Manifest, EmptyFileGivesNoMeetings) {
  std::istringstream in("");
  EXPECT_TRUE(ReadManifest(in).empty());
}

TEST(Manifest, EndBeforeStartNamesSegment) {
  std::istringstream in(
      R"({"id":"m","segments":[{"id":"bad-seg","speaker":"A","start":2.0,"end":1.0,"text":"x"}]})");
  try {
    ReadManifest(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("bad-seg"), std::string::npos);
  }
}

TEST(Manifest, ParseErrorReportsLine) {
  std::istringstream in("{\"id\":\"m\",\"segments\":[]}\n{not json\n");
  try {
    ReadManifest(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Manifest, DuplicatesDroppedConflictsRejected) {
  const std::string seg = R"({"id":"a","speaker":"A","start":0.0,"end":1.0,"text":"x"})";
  std::istringstream dup("{\"id\":\"m\",\"segments\":[" + seg + "," + seg + "]}");
  EXPECT_EQ(ReadManifest(dup)[0].segments.size(), 1u);
  std::istringstream conflict(
      "{\"id\":\"m\",\"segments\":[" + seg +
      R"(,{"id":"a","speaker":"A","start":0.0,"end":2.0,"text":"x"}]})");
  EXPECT_THROW(ReadManifest(conflict), ValidationError);
}

TEST(Manifest, WordsMustReproduceText) {
  std::istringstream in(
      R"({"id":"m","segments":[{"id":"a","speaker":"A","start":0,"end":1,"text":"x y","words":[["x",0,0.5]]}]})");
  EXPECT_THROW(ReadManifest(in), ValidationError);
}

TEST(Manifest, RoundTripIsIdentity) {
  Meeting m;
  m.id = "meet";
  m.segments.push_back(WithWords("s1", {{"hello", 0.125, 0.5}, {"there", 0.6, 1.1}}));
  m.segments.push_back(WithWords("s2", {{"x", 0.3, 2.0}}, "B"));
  m.segments[1].audio = AudioSource{"/data/a.wav", 1};
  Segment plain;
  plain.id = "s3";
  plain.speaker = "C";
  plain.start = 1.0 / 3.0;
  plain.end = 7.1;
  plain.text = "no words here";
  m.segments.push_back(plain);
  m = NormalizeMeeting(m);
  std::ostringstream out;
  WriteManifest(out, {m});
  std::istringstream in(out.str());
  auto back = ReadManifest(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], m);
  std::ostringstream again;
  WriteManifest(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Manifest, ProvenanceLineIsSkipped) {
  std::istringstream in(
      R"({"_provenance":{"tool":"surt"}})"
      "\n"
      R"({"id":"m","segments":[]})");
  EXPECT_EQ(ReadManifest(in).size(), 1u);
}

TEST(Manifest, MissingFileIsIoError) {
  EXPECT_THROW(LoadManifest("/nonexistent/manifest.jsonl"), IoError);
}

}  // namespace
}  // namespace surt
