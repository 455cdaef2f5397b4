// samples/lattice_sample.cpp
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


// Full-sum and pruned transducer losses on a small random lattice, with the
// pruning windows taken from the trivial joiner's occupancies.

#include <cstdio>
#include <random>
#include <vector>

#include "surt/lattice.hpp"

int main() {
  using namespace surt::lattice;
  const int T = 12, U = 5, V = 8;
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal(0.0, 1.0);

  TrivialJoinerInput<double> trivial{T, U, V, 0, std::vector<double>(T * V), std::vector<double>((U + 1) * V)};
  for (double &x : trivial.enc) x = normal(gen);
  for (double &x : trivial.pred) x = normal(gen);
  LogitsTensor<double> logits(T, U, V);
  for (double &x : logits.values) x = normal(gen);
  const std::vector<int> labels = {3, 1, 4, 1, 5};

  const double full = RnntLoss(logits, std::span<const int>(labels)).loss;
  std::printf("full-sum loss      %.6f\n", full);

  const OccupancyGrid occ = Occupancy(trivial, std::span<const int>(labels));
  for (int S = MinimumWindow(T, U); S <= U + 1; ++S) {
    const PruneBounds bounds = ComputePruneBoundsFromOccupancy(occ, S);
    const double pruned = PrunedRnntLoss(logits, bounds, std::span<const int>(labels)).loss;
    std::printf("pruned loss (S=%d)  %.6f   lo =", S, pruned);
    for (int lo : bounds.lo) std::printf(" %d", lo);
    std::printf("\n");
  }

  FrameLogits<double> frames(T, V);
  for (double &x : frames.values) x = normal(gen);
  std::printf("CTC loss           %.6f\n", CtcLoss(frames, std::span<const int>(labels)).loss);
  return 0;
}
