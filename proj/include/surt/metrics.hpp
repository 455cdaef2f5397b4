// include/surt/metrics.hpp
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

// Word error rate family for speaker-agnostic multi-channel output:
//  - EditStats / ComputeEditStats: plain Levenshtein with error breakdown.
//  - OrcWer: optimal reference combination, solved as a multi-dimensional
//    Levenshtein distance over all hypothesis channels at once.
//  - OrcWerBruteForce: the C^N enumeration, kept as a test oracle.
//  - CpWer: concatenated minimum-permutation WER over speakers.
//  - NGramDiagnostics: leakage@n / omission@n.

#ifndef SURT_METRICS_HPP_
#define SURT_METRICS_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "surt/common.hpp"
#include "surt/corpus.hpp"

namespace surt::metrics {

struct EditStats {
  std::size_t ins = 0;
  std::size_t del = 0;
  std::size_t sub = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const { return ins + del + sub; }

  // True when there is no reference but the hypothesis is not empty.
  bool wer_infinite() const { return ref_len == 0 && errors() > 0; }

  double wer() const {
    if (ref_len == 0) return errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(errors()) / static_cast<double>(ref_len);
  }

  EditStats &operator+=(const EditStats &o) {
    ins += o.ins;
    del += o.del;
    sub += o.sub;
    ref_len += o.ref_len;
    return *this;
  }

  bool operator==(const EditStats &) const = default;
};

template <typename Token>
std::size_t LevenshteinDistance(std::span<const Token> ref, std::span<const Token> hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

template <typename Token>
std::size_t LevenshteinDistance(const std::vector<Token> &ref, const std::vector<Token> &hyp) {
  return LevenshteinDistance(std::span<const Token>(ref), std::span<const Token>(hyp));
}

// Minimum-cost alignment with unit costs. On ties the backtrace prefers a
// match or substitution, then a deletion, then an insertion.
template <typename Token>
EditStats ComputeEditStats(std::span<const Token> ref, std::span<const Token> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1,
                           at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});

  EditStats stats;
  stats.ref_len = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++stats.sub;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++stats.del;
      --i;
    } else {
      ++stats.ins;
      --j;
    }
  }
  return stats;
}

template <typename Token>
EditStats ComputeEditStats(const std::vector<Token> &ref, const std::vector<Token> &hyp) {
  return ComputeEditStats(std::span<const Token>(ref), std::span<const Token>(hyp));
}

template <typename Token>
std::vector<Token> Concatenate(std::span<const std::vector<Token>> pieces) {
  std::vector<Token> out;
  for (const auto &p : pieces) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// ---------------------------------------------------------------------------
// ORC-WER

struct OrcResult {
  EditStats stats;
  // channel_of[n] is the hypothesis channel that reference utterance n is
  // scored against. Utterances keep their relative order within a channel.
  std::vector<int> assignment;
};

struct OrcOptions {
  // Upper bound on (N + 1) * prod_c (L_c + 1) DP cells kept for backtrace.
  std::size_t max_states = std::size_t{1} << 27;
};

// Per-channel stats for a fixed assignment.
template <typename Token>
EditStats StatsForAssignment(std::span<const std::vector<Token>> refs,
                             std::span<const std::vector<Token>> hyps,
                             std::span<const int> assignment) {
  std::vector<std::vector<Token>> channel_refs(hyps.size());
  for (std::size_t n = 0; n < refs.size(); ++n) {
    auto &dst = channel_refs[assignment[n]];
    dst.insert(dst.end(), refs[n].begin(), refs[n].end());
  }
  EditStats total;
  for (std::size_t c = 0; c < hyps.size(); ++c)
    total += ComputeEditStats(std::span<const Token>(channel_refs[c]),
                              std::span<const Token>(hyps[c]));
  return total;
}

namespace detail {

// Levenshtein of `ref` against hyp[j:k] for every start j <= end k, where
// starting at j costs start_cost[j]. rows has (|ref|+1) x (L+1) entries.
template <typename Token>
void MultiStartAlign(std::span<const Token> ref, std::span<const Token> hyp,
                     std::span<const std::uint32_t> start_cost, std::vector<std::uint32_t> &rows) {
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;
  const std::size_t width = hyp.size() + 1;
  rows.assign((ref.size() + 1) * width, kInf);
  rows[0] = start_cost[0];
  for (std::size_t k = 1; k < width; ++k) rows[k] = std::min(start_cost[k], rows[k - 1] + 1);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::uint32_t *row = &rows[i * width];
    const std::uint32_t *prev = &rows[(i - 1) * width];
    row[0] = prev[0] + 1;
    for (std::size_t k = 1; k < width; ++k)
      row[k] = std::min({prev[k] + 1, row[k - 1] + 1,
                         prev[k - 1] + (ref[i - 1] == hyp[k - 1] ? 0u : 1u)});
  }
}

}  // namespace detail

/// ORC-WER by dynamic programming over (utterance, position in each channel).
///
/// Utterance n may be scored against any channel; each channel's reference is
/// the concatenation of its utterances in input order. Between utterances the
/// DP state is the vector of hypothesis positions already consumed per
/// channel; one utterance advances exactly one coordinate. Cost is
/// O(N * C * L_ref * prod_c (L_c + 1)) time. All N + 1 layers are kept to
/// recover the assignment; `options.max_states` bounds that memory.
template <typename Token>
OrcResult OrcWer(std::span<const std::vector<Token>> refs,
                 std::span<const std::vector<Token>> hyps, const OrcOptions &options = {}) {
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;
  const std::size_t N = refs.size(), C = hyps.size();
  if (C == 0) Fail("orc_wer: need at least one hypothesis channel");

  std::vector<std::size_t> stride(C);
  std::size_t num_states = 1;
  for (std::size_t c = 0; c < C; ++c) {
    stride[c] = num_states;
    std::size_t dim = hyps[c].size() + 1;
    if (num_states > options.max_states / dim)
      Fail("orc_wer: state space exceeds the configured limit of ", options.max_states);
    num_states *= dim;
  }
  if (num_states > options.max_states / (N + 1))
    Fail("orc_wer: ", N + 1, " x ", num_states, " DP cells exceed the configured limit of ",
         options.max_states);

  auto coord = [&](std::size_t state, std::size_t c) {
    return (state / stride[c]) % (hyps[c].size() + 1);
  };

  std::vector<std::vector<std::uint32_t>> layer(N + 1, std::vector<std::uint32_t>(num_states, kInf));
  std::vector<std::vector<std::uint8_t>> choice(N, std::vector<std::uint8_t>(num_states, 0));
  layer[0][0] = 0;

  std::vector<std::uint32_t> start_cost, rows;
  for (std::size_t n = 0; n < N; ++n) {
    std::span<const Token> ref(refs[n]);
    const auto &cur = layer[n];
    auto &next = layer[n + 1];
    for (std::size_t c = 0; c < C; ++c) {
      std::span<const Token> hyp(hyps[c]);
      const std::size_t width = hyp.size() + 1, step = stride[c];
      start_cost.resize(width);
      for (std::size_t base = 0; base < num_states; ++base) {
        if (coord(base, c) != 0) continue;
        bool reachable = false;
        for (std::size_t k = 0; k < width; ++k) {
          start_cost[k] = cur[base + k * step];
          reachable |= start_cost[k] < kInf;
        }
        if (!reachable) continue;
        detail::MultiStartAlign(ref, hyp, std::span<const std::uint32_t>(start_cost), rows);
        const std::uint32_t *last = &rows[ref.size() * width];
        for (std::size_t k = 0; k < width; ++k) {
          std::size_t s = base + k * step;
          if (last[k] < next[s]) {
            next[s] = last[k];
            choice[n][s] = static_cast<std::uint8_t>(c);
          }
        }
      }
    }
  }

  // Hypothesis tokens never consumed are insertions.
  std::size_t best_state = 0;
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t s = 0; s < num_states; ++s) {
    if (layer[N][s] >= kInf) continue;
    std::uint64_t total = layer[N][s];
    for (std::size_t c = 0; c < C; ++c) total += hyps[c].size() - coord(s, c);
    if (total < best) {
      best = total;
      best_state = s;
    }
  }

  OrcResult result;
  result.assignment.assign(N, 0);
  std::size_t state = best_state;
  for (std::size_t n = N; n-- > 0;) {
    const std::size_t c = choice[n][state];
    result.assignment[n] = static_cast<int>(c);
    std::span<const Token> ref(refs[n]);
    std::span<const Token> hyp(hyps[c]);
    const std::size_t width = hyp.size() + 1, step = stride[c];
    std::size_t k = coord(state, c);
    const std::size_t base = state - k * step;
    start_cost.resize(width);
    for (std::size_t q = 0; q < width; ++q) start_cost[q] = layer[n][base + q * step];
    detail::MultiStartAlign(ref, hyp, std::span<const std::uint32_t>(start_cost), rows);
    auto at = [&](std::size_t i, std::size_t q) { return rows[i * width + q]; };
    std::size_t i = ref.size();
    while (i > 0) {
      if (k > 0 && at(i, k) == at(i - 1, k - 1) + (ref[i - 1] == hyp[k - 1] ? 0u : 1u)) {
        --i, --k;
      } else if (at(i, k) == at(i - 1, k) + 1) {
        --i;
      } else {
        --k;
      }
    }
    while (at(0, k) != start_cost[k]) --k;
    state = base + k * step;
  }

  result.stats = StatsForAssignment<Token>(refs, hyps, result.assignment);
  if (result.stats.errors() != best)
    throw std::logic_error("orc_wer: backtrace disagrees with the DP optimum");
  return result;
}

template <typename Token>
OrcResult OrcWer(const std::vector<std::vector<Token>> &refs,
                 const std::vector<std::vector<Token>> &hyps, const OrcOptions &options = {}) {
  return OrcWer<Token>(std::span<const std::vector<Token>>(refs),
                       std::span<const std::vector<Token>>(hyps), options);
}

/// Exhaustive search over all C^N assignments. The first assignment in
/// lexicographic order wins ties.
template <typename Token>
OrcResult OrcWerBruteForce(std::span<const std::vector<Token>> refs,
                           std::span<const std::vector<Token>> hyps,
                           std::size_t max_utterances = 8) {
  const std::size_t N = refs.size(), C = hyps.size();
  if (C == 0) Fail("orc_wer_bruteforce: need at least one hypothesis channel");
  if (N > max_utterances)
    Fail("orc_wer_bruteforce: ", N, " utterances exceed the bound of ", max_utterances);

  std::vector<int> assignment(N, 0), best_assignment(N, 0);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<Token>> channel_refs(C);
  while (true) {
    for (auto &r : channel_refs) r.clear();
    for (std::size_t n = 0; n < N; ++n)
      channel_refs[assignment[n]].insert(channel_refs[assignment[n]].end(), refs[n].begin(),
                                         refs[n].end());
    std::size_t total = 0;
    for (std::size_t c = 0; c < C; ++c) total += LevenshteinDistance(channel_refs[c], hyps[c]);
    if (total < best) {
      best = total;
      best_assignment = assignment;
    }
    // Odometer increment; the last position turns fastest.
    bool wrapped = true;
    for (std::size_t pos = N; pos-- > 0;) {
      if (++assignment[pos] < static_cast<int>(C)) {
        wrapped = false;
        break;
      }
      assignment[pos] = 0;
    }
    if (wrapped) break;
  }
  OrcResult result;
  result.assignment = best_assignment;
  result.stats = StatsForAssignment<Token>(refs, hyps, result.assignment);
  return result;
}

template <typename Token>
OrcResult OrcWerBruteForce(const std::vector<std::vector<Token>> &refs,
                           const std::vector<std::vector<Token>> &hyps,
                           std::size_t max_utterances = 8) {
  return OrcWerBruteForce<Token>(std::span<const std::vector<Token>>(refs),
                                 std::span<const std::vector<Token>>(hyps), max_utterances);
}

// ---------------------------------------------------------------------------
// cpWER

// Square min-cost assignment (Hungarian / Kuhn-Munkres, O(n^3)).
// Returns column_of_row.
inline std::vector<int> MinCostAssignment(const std::vector<std::vector<long long>> &cost) {
  const int n = static_cast<int>(cost.size());
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0), way_min(n + 1);
  std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::fill(way_min.begin(), way_min.end(), kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = row_of_col[j0], j1 = 0;
      long long delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < way_min[j]) {
          way_min[j] = cur;
          way[j] = j0;
        }
        if (way_min[j] < delta) {
          delta = way_min[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          way_min[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> column_of_row(n, -1);
  for (int j = 1; j <= n; ++j)
    if (row_of_col[j] > 0) column_of_row[row_of_col[j] - 1] = j - 1;
  return column_of_row;
}

struct CpWerResult {
  EditStats stats;
  std::vector<std::string> speakers;  // sorted speaker labels
  // channel_of_speaker[s] is a hypothesis channel, or -1 when the speaker was
  // matched to a padding (empty) channel.
  std::vector<int> channel_of_speaker;
};

/// Concatenated minimum-permutation WER. Speakers and channels are padded
/// with empty streams to a square problem; up to 8 streams are permuted
/// exhaustively, larger problems use the Hungarian method.
template <typename Token>
CpWerResult CpWer(const std::map<std::string, std::vector<Token>> &ref_by_speaker,
                  std::span<const std::vector<Token>> hyps) {
  if (ref_by_speaker.empty() || hyps.empty())
    Fail("cp_wer: need at least one speaker and one channel");
  const std::size_t K = ref_by_speaker.size(), C = hyps.size(), n = std::max(K, C);
  std::vector<const std::vector<Token> *> refs;
  CpWerResult result;
  for (const auto &[spk, tokens] : ref_by_speaker) {
    result.speakers.push_back(spk);
    refs.push_back(&tokens);
  }
  const std::vector<Token> empty;
  std::vector<std::vector<long long>> cost(n, std::vector<long long>(n));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t c = 0; c < n; ++c)
      cost[s][c] = static_cast<long long>(
          LevenshteinDistance(s < K ? *refs[s] : empty, c < C ? hyps[c] : empty));

  std::vector<int> perm(n);
  if (n <= 8) {
    std::vector<int> trial(n);
    std::iota(trial.begin(), trial.end(), 0);
    long long best = std::numeric_limits<long long>::max();
    do {
      long long total = 0;
      for (std::size_t s = 0; s < n; ++s) total += cost[s][trial[s]];
      if (total < best) {
        best = total;
        perm = trial;
      }
    } while (std::next_permutation(trial.begin(), trial.end()));
  } else {
    perm = MinCostAssignment(cost);
  }

  for (std::size_t s = 0; s < n; ++s) {
    const auto &ref = s < K ? *refs[s] : empty;
    const auto &hyp = static_cast<std::size_t>(perm[s]) < C ? hyps[perm[s]] : empty;
    result.stats += ComputeEditStats(ref, hyp);
  }
  for (std::size_t s = 0; s < K; ++s)
    result.channel_of_speaker.push_back(static_cast<std::size_t>(perm[s]) < C ? perm[s] : -1);
  return result;
}

template <typename Token>
CpWerResult CpWer(const std::map<std::string, std::vector<Token>> &ref_by_speaker,
                  const std::vector<std::vector<Token>> &hyps) {
  return CpWer<Token>(ref_by_speaker, std::span<const std::vector<Token>>(hyps));
}

// ---------------------------------------------------------------------------
// leakage@n / omission@n

struct NGramDiagnostics {
  std::size_t n = 0;
  double leakage = 0.0;   // fraction of unique reference n-grams in >= 2 channels
  double omission = 0.0;  // fraction found in no channel
  std::size_t total_unique = 0;
  std::size_t in_none = 0;
  std::size_t in_one = 0;
  std::size_t in_many = 0;
  bool empty = false;  // no reference n-grams; both ratios reported as 0
};

/// N-grams are taken within each reference utterance only. A reference
/// n-gram is present in a channel if it occurs as a contiguous run anywhere
/// in that channel's hypothesis.
template <typename Token>
NGramDiagnostics ComputeNGramDiagnostics(std::span<const std::vector<Token>> refs,
                                         std::span<const std::vector<Token>> hyps,
                                         std::size_t n) {
  if (n < 1) Fail("ngram_diagnostics: order must be >= 1");
  using NGram = std::vector<Token>;
  std::set<NGram> unique;
  for (const auto &utt : refs)
    for (std::size_t i = 0; i + n <= utt.size(); ++i)
      unique.emplace(utt.begin() + i, utt.begin() + i + n);

  std::vector<std::set<NGram>> channel_grams(hyps.size());
  for (std::size_t c = 0; c < hyps.size(); ++c)
    for (std::size_t i = 0; i + n <= hyps[c].size(); ++i)
      channel_grams[c].emplace(hyps[c].begin() + i, hyps[c].begin() + i + n);

  NGramDiagnostics d;
  d.n = n;
  d.total_unique = unique.size();
  for (const NGram &g : unique) {
    std::size_t hits = 0;
    for (const auto &grams : channel_grams) hits += grams.count(g);
    if (hits == 0)
      ++d.in_none;
    else if (hits == 1)
      ++d.in_one;
    else
      ++d.in_many;
  }
  if (d.total_unique == 0) {
    d.empty = true;
    return d;
  }
  d.leakage = static_cast<double>(d.in_many) / static_cast<double>(d.total_unique);
  d.omission = static_cast<double>(d.in_none) / static_cast<double>(d.total_unique);
  return d;
}

template <typename Token>
NGramDiagnostics ComputeNGramDiagnostics(const std::vector<std::vector<Token>> &refs,
                                         const std::vector<std::vector<Token>> &hyps,
                                         std::size_t n) {
  return ComputeNGramDiagnostics<Token>(std::span<const std::vector<Token>>(refs),
                                        std::span<const std::vector<Token>>(hyps), n);
}

}  // namespace surt::metrics

#endif  // SURT_METRICS_HPP_
