// samples/orc_wer_sample.cpp
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


// Scores a two-channel hypothesis against a three-utterance session with
// ORC-WER, cpWER and the n-gram diagnostics.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "surt/corpus.hpp"
#include "surt/metrics.hpp"

int main() {
  using surt::Tokenize;
  using surt::TokenSequence;
  // Utterances in start order with their speakers.
  const std::vector<std::pair<std::string, std::string>> session = {
      {"A", "hello how are you"}, {"B", "fine thanks"}, {"A", "good to hear"}};
  const std::vector<TokenSequence> hyps = {Tokenize("hello how are you good to hear"), Tokenize("fine thanks you")};

  std::vector<TokenSequence> refs;
  std::map<std::string, TokenSequence> by_speaker;
  for (const auto &[spk, text] : session) {
    refs.push_back(Tokenize(text));
    by_speaker[spk].insert(by_speaker[spk].end(), refs.back().begin(), refs.back().end());
  }

  const auto orc = surt::metrics::OrcWer(refs, hyps);
  std::printf("ORC-WER %.3f  (ins %zu, del %zu, sub %zu over %zu words)\n", orc.stats.wer(), orc.stats.ins,
              orc.stats.del, orc.stats.sub, orc.stats.ref_len);
  std::printf("assignment:");
  for (int c : orc.assignment) std::printf(" %d", c);
  std::printf("\n");

  const auto cp = surt::metrics::CpWer(by_speaker, hyps);
  std::printf("cpWER   %.3f\n", cp.stats.wer());

  const auto ng = surt::metrics::ComputeNGramDiagnostics(refs, hyps, 2);
  std::printf("leakage@2 %.3f  omission@2 %.3f  (%zu unique bigrams)\n", ng.leakage, ng.omission, ng.total_unique);
  return 0;
}
