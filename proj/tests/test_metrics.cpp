// tests/test_metrics.cpp
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

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "surt/metrics.hpp"

namespace surt::metrics {
namespace {

using Seq = std::vector<std::string>;
using Seqs = std::vector<Seq>;

Seq S(const std::string &text) { return Tokenize(text); }

TEST(EditStats, Examples) {
  auto same = ComputeEditStats(S("a b c"), S("a b c"));
  EXPECT_EQ(same.errors(), 0u);
  EXPECT_DOUBLE_EQ(same.wer(), 0.0);

  auto del = ComputeEditStats(S("a b c"), S("a c"));
  EXPECT_EQ(del.del, 1u);
  EXPECT_EQ(del.ins + del.sub, 0u);
  EXPECT_DOUBLE_EQ(del.wer(), 1.0 / 3.0);

  auto ins = ComputeEditStats(Seq{}, S("x"));
  EXPECT_EQ(ins.ins, 1u);
  EXPECT_TRUE(ins.wer_infinite());
  EXPECT_TRUE(std::isinf(ins.wer()));

  auto empty = ComputeEditStats(Seq{}, Seq{});
  EXPECT_FALSE(empty.wer_infinite());
  EXPECT_DOUBLE_EQ(empty.wer(), 0.0);
}

TEST(EditStats, PrefersSubstitution) {
  auto s = ComputeEditStats(S("a b"), S("a c"));
  EXPECT_EQ(s.sub, 1u);
  EXPECT_EQ(s.ins + s.del, 0u);
  auto w = ComputeEditStats(S("a b c d"), S("x y"));
  EXPECT_EQ(w.sub, 2u);
  EXPECT_EQ(w.del, 2u);
  EXPECT_EQ(w.ins, 0u);
}

TEST(EditStats, MatchesOracleDistance) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 2000; ++trial) {
    Seq a = oracle::RandomTokens(gen, 8, 4), b = oracle::RandomTokens(gen, 8, 4);
    auto s = ComputeEditStats(a, b);
    EXPECT_EQ(s.errors(), oracle::Levenshtein(a, b));
    EXPECT_EQ(s.errors(), LevenshteinDistance(a, b));
    EXPECT_EQ(s.ref_len, a.size());
    // Alignment consistency: hyp length = ref - del + ins.
    EXPECT_EQ(b.size() + s.del, a.size() + s.ins);
  }
}

TEST(OrcWer, Examples) {
  auto r1 = OrcWer(Seqs{S("a b"), S("c d")}, Seqs{S("a b c d"), Seq{}});
  EXPECT_EQ(r1.stats.errors(), 0u);
  EXPECT_EQ(r1.assignment, (std::vector<int>{0, 0}));

  auto r2 = OrcWer(Seqs{S("a"), S("b")}, Seqs{S("b"), S("a")});
  EXPECT_EQ(r2.stats.errors(), 0u);
  EXPECT_EQ(r2.assignment, (std::vector<int>{1, 0}));

  auto r3 = OrcWer(Seqs{S("a b c")}, Seqs{S("a c"), Seq{}});
  EXPECT_EQ(r3.stats.del, 1u);
  EXPECT_EQ(r3.stats.errors(), 1u);
  EXPECT_DOUBLE_EQ(r3.stats.wer(), 1.0 / 3.0);
}

TEST(OrcWer, EdgeCases) {
  auto none = OrcWer(Seqs{}, Seqs{S("x y"), Seq{}});
  EXPECT_EQ(none.stats.ins, 2u);
  EXPECT_TRUE(none.stats.wer_infinite());
  auto empty_hyps = OrcWer(Seqs{S("a b"), S("c")}, Seqs{Seq{}, Seq{}});
  EXPECT_EQ(empty_hyps.stats.del, 3u);
  EXPECT_THROW(OrcWer(Seqs{S("a")}, Seqs{}), ValidationError);
  OrcOptions tiny;
  tiny.max_states = 4;
  EXPECT_THROW(OrcWer(Seqs{S("a b")}, Seqs{S("a b c"), S("a b")}, tiny), ValidationError);
}

TEST(OrcWer, EqualsBruteForceAndOracle) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 3000; ++trial) {
    const int N = static_cast<int>(gen() % 7), C = 2 + static_cast<int>(gen() % 2);
    Seqs refs, hyps;
    for (int n = 0; n < N; ++n) refs.push_back(oracle::RandomTokens(gen, 4, 5, 1));
    for (int c = 0; c < C; ++c) hyps.push_back(oracle::RandomTokens(gen, 7, 5));
    auto dp = OrcWer(refs, hyps);
    auto bf = OrcWerBruteForce(refs, hyps);
    ASSERT_EQ(dp.stats.errors(), bf.stats.errors());
    ASSERT_EQ(dp.stats.errors(), oracle::OrcDistance(refs, hyps));
    // The returned assignment realizes the optimum.
    EXPECT_EQ(StatsForAssignment<std::string>(refs, hyps, dp.assignment).errors(), dp.stats.errors());
  }
}

TEST(OrcWer, BruteForceBound) {
  Seqs refs(9, S("a"));
  EXPECT_THROW(OrcWerBruteForce(refs, Seqs{Seq{}, Seq{}}), ValidationError);
  // Unused channels still count as insertions: 1 + 1 + 1.
  auto one = OrcWerBruteForce(Seqs{S("a b")}, Seqs{S("a"), S("a b x"), S("b")});
  EXPECT_EQ(one.stats.errors(), 3u);
  EXPECT_EQ(one.assignment, (std::vector<int>{1}));
}

TEST(OrcWer, SingleChannelIsPlainEditDistance) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 500; ++trial) {
    Seqs refs;
    Seq concat;
    for (int n = 0, N = static_cast<int>(gen() % 6); n < N; ++n) {
      refs.push_back(oracle::RandomTokens(gen, 4, 4));
      concat.insert(concat.end(), refs.back().begin(), refs.back().end());
    }
    Seqs hyps{oracle::RandomTokens(gen, 10, 4)};
    EXPECT_EQ(OrcWer(refs, hyps).stats, ComputeEditStats(concat, hyps[0]));
  }
}

TEST(OrcWer, ChannelPermutationSymmetry) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 500; ++trial) {
    Seqs refs, hyps;
    for (int n = 0, N = 1 + static_cast<int>(gen() % 5); n < N; ++n) refs.push_back(oracle::RandomTokens(gen, 4, 4, 1));
    for (int c = 0; c < 3; ++c) hyps.push_back(oracle::RandomTokens(gen, 6, 4));
    std::vector<int> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), gen);
    Seqs permuted(3);
    for (int c = 0; c < 3; ++c) permuted[perm[c]] = hyps[c];
    auto a = OrcWer(refs, hyps), b = OrcWer(refs, permuted);
    EXPECT_EQ(a.stats.errors(), b.stats.errors());
    std::vector<int> mapped;
    for (int c : a.assignment) mapped.push_back(perm[c]);
    EXPECT_EQ(StatsForAssignment<std::string>(refs, permuted, mapped).errors(), b.stats.errors());
  }
}

TEST(OrcWer, AppendingMatchedUtteranceNeverIncreasesWer) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 500; ++trial) {
    Seqs refs, hyps{Seq{}, Seq{}};
    for (int n = 0, N = 1 + static_cast<int>(gen() % 4); n < N; ++n) refs.push_back(oracle::RandomTokens(gen, 4, 4, 1));
    hyps[0] = oracle::RandomTokens(gen, 8, 4);
    const double before = OrcWer(refs, hyps).stats.wer();
    Seq extra = oracle::RandomTokens(gen, 4, 4, 1);
    refs.push_back(extra);
    hyps[1].insert(hyps[1].end(), extra.begin(), extra.end());
    EXPECT_LE(OrcWer(refs, hyps).stats.wer(), before + 1e-15);
  }
}

TEST(CpWer, Examples) {
  std::map<std::string, Seq> one{{"A", S("a b c")}};
  EXPECT_EQ(CpWer(one, Seqs{Seq{}, S("a b c")}).stats.errors(), 0u);

  std::map<std::string, Seq> two{{"A", S("a b")}, {"B", S("c d")}};
  auto r = CpWer(two, Seqs{S("c d"), S("a b")});
  EXPECT_EQ(r.stats.errors(), 0u);
  EXPECT_EQ(r.speakers, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(r.channel_of_speaker, (std::vector<int>{1, 0}));

  auto padded = CpWer(two, Seqs{S("a b")});
  EXPECT_EQ(padded.stats.del, 2u);
  EXPECT_EQ(padded.channel_of_speaker, (std::vector<int>{0, -1}));
  EXPECT_EQ(padded.stats.ref_len, 4u);
}

TEST(CpWer, MatchesPermutationOracleIncludingHungarian) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int K = 1 + static_cast<int>(gen() % 10), C = 1 + static_cast<int>(gen() % 10);
    std::map<std::string, Seq> by_spk;
    Seqs spk_list;
    for (int k = 0; k < K; ++k) {
      by_spk["s" + std::to_string(k)] = oracle::RandomTokens(gen, 5, 6);
    }
    for (auto &[_, s] : by_spk) spk_list.push_back(s);
    Seqs hyps;
    for (int c = 0; c < C; ++c) hyps.push_back(oracle::RandomTokens(gen, 5, 6));
    auto r = CpWer(by_spk, hyps);
    if (std::max(K, C) <= 9) { EXPECT_EQ(r.stats.errors(), oracle::CpDistance(spk_list, hyps)); }
    // Channels used at most once.
    std::vector<int> used;
    for (int c : r.channel_of_speaker)
      if (c >= 0) used.push_back(c);
    std::sort(used.begin(), used.end());
    EXPECT_EQ(std::adjacent_find(used.begin(), used.end()), used.end());
  }
}

TEST(MinCostAssignment, MatchesExhaustive) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 7);
    std::vector<std::vector<long long>> cost(n, std::vector<long long>(n));
    for (auto &row : cost)
      for (auto &x : row) x = static_cast<long long>(gen() % 20);
    auto perm = MinCostAssignment(cost);
    long long got = 0;
    for (int i = 0; i < n; ++i) got += cost[i][perm[i]];
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    long long best = std::numeric_limits<long long>::max();
    do {
      long long t = 0;
      for (int i = 0; i < n; ++i) t += cost[i][p[i]];
      best = std::min(best, t);
    } while (std::next_permutation(p.begin(), p.end()));
    EXPECT_EQ(got, best);
  }
}

TEST(CpWer, OrcIsALowerBound) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 500; ++trial) {
    Seqs refs;
    std::map<std::string, Seq> by_spk;
    for (int n = 0, N = 1 + static_cast<int>(gen() % 6); n < N; ++n) {
      refs.push_back(oracle::RandomTokens(gen, 4, 5, 1));
      Seq &dst = by_spk["s" + std::to_string(gen() % 3)];
      dst.insert(dst.end(), refs.back().begin(), refs.back().end());
    }
    Seqs hyps{oracle::RandomTokens(gen, 8, 5), oracle::RandomTokens(gen, 8, 5)};
    EXPECT_LE(OrcWer(refs, hyps).stats.wer(), CpWer(by_spk, hyps).stats.wer());
  }
}

TEST(NGram, Examples) {
  auto both = ComputeNGramDiagnostics(Seqs{S("a b c d")}, Seqs{S("a b c d"), S("a b c d")}, 4);
  EXPECT_DOUBLE_EQ(both.leakage, 1.0);
  EXPECT_DOUBLE_EQ(both.omission, 0.0);
  EXPECT_EQ(both.total_unique, 1u);

  auto empty = ComputeNGramDiagnostics(Seqs{S("a b c d e")}, Seqs{Seq{}, Seq{}}, 4);
  EXPECT_DOUBLE_EQ(empty.omission, 1.0);
  EXPECT_DOUBLE_EQ(empty.leakage, 0.0);

  auto exact = ComputeNGramDiagnostics(Seqs{S("a b c d e")}, Seqs{S("a b c d e"), Seq{}}, 4);
  EXPECT_DOUBLE_EQ(exact.leakage, 0.0);
  EXPECT_DOUBLE_EQ(exact.omission, 0.0);
}

TEST(NGram, NoCrossUtteranceGramsAndUniqueCounting) {
  // "b c" spans the utterance boundary and must not count.
  auto d = ComputeNGramDiagnostics(Seqs{S("a b"), S("c d"), S("a b")}, Seqs{S("a b c d")}, 2);
  EXPECT_EQ(d.total_unique, 2u);
  EXPECT_EQ(d.in_one, 2u);
  auto none = ComputeNGramDiagnostics(Seqs{S("a b")}, Seqs{S("a b")}, 3);
  EXPECT_TRUE(none.empty);
  EXPECT_DOUBLE_EQ(none.leakage + none.omission, 0.0);
  EXPECT_THROW(ComputeNGramDiagnostics(Seqs{}, Seqs{}, 0), ValidationError);
}

TEST(NGram, PartitionIdentity) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 1000; ++trial) {
    Seqs refs, hyps;
    for (int n = 0, N = 1 + static_cast<int>(gen() % 5); n < N; ++n) refs.push_back(oracle::RandomTokens(gen, 8, 3, 2));
    for (int c = 0; c < 2; ++c) hyps.push_back(oracle::RandomTokens(gen, 12, 3));
    auto d = ComputeNGramDiagnostics(refs, hyps, 2);
    ASSERT_FALSE(d.empty);
    EXPECT_EQ(d.in_none + d.in_one + d.in_many, d.total_unique);
    const double one = static_cast<double>(d.in_one) / static_cast<double>(d.total_unique);
    EXPECT_NEAR(d.leakage + one + d.omission, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace surt::metrics
