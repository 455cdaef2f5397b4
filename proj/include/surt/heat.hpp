// include/surt/heat.hpp
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

// Heuristic error assignment: utterances are placed, in start-time order, on
// the first output channel whose previous utterances have all ended.

#ifndef SURT_HEAT_HPP_
#define SURT_HEAT_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "surt/common.hpp"
#include "surt/corpus.hpp"

namespace surt::heat {

/// Channel indices are 0-based.
struct ChannelAssignment {
  std::vector<int> channel_of;
  int num_channels = 2;
  // Utterances that overlapped every channel and were forced onto the
  // channel that frees up first.
  std::vector<std::size_t> conflicts;
};

struct Constituent {
  std::size_t utterance;     // index into the utterance list
  std::size_t token_offset;  // where its tokens begin in the channel reference
};

struct ChannelReferences {
  std::vector<TokenSequence> per_channel;
  std::vector<std::vector<Constituent>> boundaries;
};

// An utterance starting exactly when the channel's last one ends does not
// count as overlapping it.
inline ChannelAssignment Assign(std::span<const Segment> utterances, int num_channels) {
  if (num_channels < 2) Fail("heat: need at least 2 channels, got ", num_channels);
  for (std::size_t n = 1; n < utterances.size(); ++n)
    if (StartOrderLess(utterances[n], utterances[n - 1]))
      Fail("heat: utterance '", utterances[n].id, "' is out of start-time order");

  ChannelAssignment result;
  result.num_channels = num_channels;
  result.channel_of.reserve(utterances.size());
  std::vector<double> channel_end(num_channels, -std::numeric_limits<double>::infinity());

  for (std::size_t n = 0; n < utterances.size(); ++n) {
    const Segment &u = utterances[n];
    int chosen = -1;
    for (int c = 0; c < num_channels; ++c) {
      if (u.start >= channel_end[c]) {
        chosen = c;
        break;
      }
    }
    if (chosen < 0) {
      chosen = 0;
      for (int c = 1; c < num_channels; ++c)
        if (channel_end[c] < channel_end[chosen]) chosen = c;
      result.conflicts.push_back(n);
    }
    result.channel_of.push_back(chosen);
    channel_end[chosen] = std::max(channel_end[chosen], u.end);
  }
  return result;
}

inline ChannelReferences BuildReferences(std::span<const Segment> utterances,
                                         const ChannelAssignment &assignment) {
  if (assignment.channel_of.size() != utterances.size())
    Fail("heat: assignment covers ", assignment.channel_of.size(), " utterances, expected ",
         utterances.size());
  ChannelReferences refs;
  refs.per_channel.resize(assignment.num_channels);
  refs.boundaries.resize(assignment.num_channels);
  for (std::size_t n = 0; n < utterances.size(); ++n) {
    int c = assignment.channel_of[n];
    if (c < 0 || c >= assignment.num_channels) Fail("heat: channel index ", c, " out of range");
    TokenSequence &ref = refs.per_channel[c];
    refs.boundaries[c].push_back({n, ref.size()});
    for (std::string &tok : Tokenize(utterances[n].text)) ref.push_back(std::move(tok));
  }
  return refs;
}

}  // namespace surt::heat

#endif  // SURT_HEAT_HPP_
