// include/surt/lattice.hpp
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

// Loss lattices for transducer and CTC training, all evaluated in log space.
//
// Transducer lattice conventions (T frames, U labels):
//   node (t, u), 0 <= t < T, 0 <= u <= U, starts at (0, 0);
//   blank arc  (t, u) -> (t + 1, u)  with log-prob z[t][u][blank];
//   emit arc   (t, u) -> (t, u + 1)  with log-prob z[t][u][labels[u]];
//   a final blank out of (T - 1, U) terminates every path.
// Every path therefore carries exactly T blanks and U emissions.
//
// Gradients are always taken with respect to the pre-softmax logits: inputs
// are log-softmaxed internally, which is the identity on inputs that are
// already normalized.

#ifndef SURT_LATTICE_HPP_
#define SURT_LATTICE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "surt/common.hpp"

namespace surt::lattice {

template <typename Real>
inline constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

template <typename Real>
Real LogAdd(Real a, Real b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf<Real>) return a;
  return a + std::log1p(std::exp(b - a));
}

template <typename Real>
Real LogSumExp(std::span<const Real> xs) {
  Real m = kNegInf<Real>;
  for (Real x : xs) m = std::max(m, x);
  if (m == kNegInf<Real>) return m;
  Real s = 0;
  for (Real x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// In-place log-softmax of consecutive rows of length `width`.
template <typename Real>
void LogSoftmaxRows(std::span<Real> values, std::size_t width) {
  for (std::size_t off = 0; off < values.size(); off += width) {
    std::span<Real> row = values.subspan(off, width);
    Real norm = LogSumExp<Real>(row);
    for (Real &x : row) x -= norm;
  }
}

template <typename Real>
void RequireFinite(std::span<const Real> values, const char *what) {
  for (Real x : values)
    if (!std::isfinite(x)) Fail(what, ": non-finite input value");
}

/// Joiner output for one utterance: T x (U + 1) x V, row-major.
template <typename Real = double>
struct LogitsTensor {
  int T = 0;
  int U = 0;
  int V = 0;
  int blank = 0;
  std::vector<Real> values;

  LogitsTensor() = default;
  LogitsTensor(int T_, int U_, int V_, int blank_ = 0)
      : T(T_), U(U_), V(V_), blank(blank_),
        values(static_cast<std::size_t>(T_) * (U_ + 1) * V_, Real(0)) {}

  std::size_t index(int t, int u, int v = 0) const {
    return (static_cast<std::size_t>(t) * (U + 1) + u) * V + v;
  }
  Real &at(int t, int u, int v) { return values[index(t, u, v)]; }
  Real at(int t, int u, int v) const { return values[index(t, u, v)]; }
  std::span<const Real> node(int t, int u) const {
    return std::span<const Real>(values).subspan(index(t, u), V);
  }

  void Validate() const {
    if (T < 1 || U < 0 || V < 2) Fail("logits: need T >= 1, U >= 0, V >= 2 (got T=", T, ", U=", U, ", V=", V, ")");
    if (blank < 0 || blank >= V) Fail("logits: blank id ", blank, " outside vocabulary of ", V);
    if (values.size() != static_cast<std::size_t>(T) * (U + 1) * V)
      Fail("logits: expected ", static_cast<std::size_t>(T) * (U + 1) * V, " values, got ", values.size());
    RequireFinite<Real>(values, "logits");
  }

  // Whether every node already sums to one in probability space.
  bool IsNormalized(Real tol = Real(1e-9)) const {
    for (int t = 0; t < T; ++t)
      for (int u = 0; u <= U; ++u)
        if (std::abs(LogSumExp<Real>(node(t, u))) > tol) return false;
    return true;
  }
};

/// Projected encoder (T x V) and predictor (U + 1 x V) outputs for the
/// additive joiner used to find pruning bounds.
template <typename Real = double>
struct TrivialJoinerInput {
  int T = 0;
  int U = 0;
  int V = 0;
  int blank = 0;
  std::vector<Real> enc;
  std::vector<Real> pred;
};

template <typename Real = double>
struct LossResult {
  Real loss = 0;
  std::vector<Real> grad;  // same layout as the input logits
};

// Log-probabilities of the two arcs leaving each transducer node.
template <typename Real>
struct ArcLogProbs {
  int T = 0;
  int U = 0;
  std::vector<Real> blank;  // T x (U + 1)
  std::vector<Real> emit;   // T x U

  ArcLogProbs(int T_, int U_)
      : T(T_), U(U_),
        blank(static_cast<std::size_t>(T_) * (U_ + 1), kNegInf<Real>),
        emit(static_cast<std::size_t>(T_) * U_, kNegInf<Real>) {}

  Real &b(int t, int u) { return blank[static_cast<std::size_t>(t) * (U + 1) + u]; }
  Real b(int t, int u) const { return blank[static_cast<std::size_t>(t) * (U + 1) + u]; }
  Real &e(int t, int u) { return emit[static_cast<std::size_t>(t) * U + u]; }
  Real e(int t, int u) const { return emit[static_cast<std::size_t>(t) * U + u]; }
};

template <typename Real>
struct ForwardBackward {
  int T = 0;
  int U = 0;
  std::vector<Real> alpha;  // T x (U + 1)
  std::vector<Real> beta;   // T x (U + 1), includes the final blank
  Real log_like = 0;

  Real a(int t, int u) const { return alpha[static_cast<std::size_t>(t) * (U + 1) + u]; }
  Real b(int t, int u) const { return beta[static_cast<std::size_t>(t) * (U + 1) + u]; }
};

template <typename Real>
ForwardBackward<Real> RunForwardBackward(const ArcLogProbs<Real> &arcs) {
  const int T = arcs.T, U = arcs.U;
  ForwardBackward<Real> fb;
  fb.T = T;
  fb.U = U;
  fb.alpha.assign(static_cast<std::size_t>(T) * (U + 1), kNegInf<Real>);
  fb.beta.assign(static_cast<std::size_t>(T) * (U + 1), kNegInf<Real>);
  auto A = [&](int t, int u) -> Real & { return fb.alpha[static_cast<std::size_t>(t) * (U + 1) + u]; };
  auto B = [&](int t, int u) -> Real & { return fb.beta[static_cast<std::size_t>(t) * (U + 1) + u]; };

  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) {
        A(0, 0) = 0;
        continue;
      }
      Real from_blank = t > 0 ? A(t - 1, u) + arcs.b(t - 1, u) : kNegInf<Real>;
      Real from_emit = u > 0 ? A(t, u - 1) + arcs.e(t, u - 1) : kNegInf<Real>;
      A(t, u) = LogAdd(from_blank, from_emit);
    }
  }
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (t == T - 1 && u == U) {
        B(t, u) = arcs.b(t, u);
        continue;
      }
      Real via_blank = t < T - 1 ? B(t + 1, u) + arcs.b(t, u) : kNegInf<Real>;
      Real via_emit = u < U ? B(t, u + 1) + arcs.e(t, u) : kNegInf<Real>;
      B(t, u) = LogAdd(via_blank, via_emit);
    }
  }
  fb.log_like = A(T - 1, U) + arcs.b(T - 1, U);
  return fb;
}

/// Posterior visit probabilities of lattice nodes and arcs.
struct OccupancyGrid {
  int T = 0;
  int U = 0;
  std::vector<double> emit;   // T x U
  std::vector<double> blank;  // T x (U + 1); blank(T-1, U) is the final arc
  std::vector<double> node;   // T x (U + 1)

  double emit_at(int t, int u) const { return emit[static_cast<std::size_t>(t) * U + u]; }
  double blank_at(int t, int u) const { return blank[static_cast<std::size_t>(t) * (U + 1) + u]; }
  double node_at(int t, int u) const { return node[static_cast<std::size_t>(t) * (U + 1) + u]; }
};

template <typename Real>
OccupancyGrid ComputeOccupancy(const ArcLogProbs<Real> &arcs, const ForwardBackward<Real> &fb) {
  const int T = arcs.T, U = arcs.U;
  OccupancyGrid g;
  g.T = T;
  g.U = U;
  g.emit.assign(static_cast<std::size_t>(T) * U, 0.0);
  g.blank.assign(static_cast<std::size_t>(T) * (U + 1), 0.0);
  g.node.assign(static_cast<std::size_t>(T) * (U + 1), 0.0);
  const Real ll = fb.log_like;
  if (!std::isfinite(ll)) return g;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const std::size_t i = static_cast<std::size_t>(t) * (U + 1) + u;
      g.node[i] = static_cast<double>(std::exp(fb.a(t, u) + fb.b(t, u) - ll));
      Real next_beta = t < T - 1 ? fb.b(t + 1, u) : (u == U ? Real(0) : kNegInf<Real>);
      g.blank[i] = static_cast<double>(std::exp(fb.a(t, u) + arcs.b(t, u) + next_beta - ll));
      if (u < U)
        g.emit[static_cast<std::size_t>(t) * U + u] =
            static_cast<double>(std::exp(fb.a(t, u) + arcs.e(t, u) + fb.b(t, u + 1) - ll));
    }
  }
  return g;
}

namespace detail {

inline void ValidateLabels(std::span<const int> labels, int U, int V, int blank) {
  if (static_cast<int>(labels.size()) != U)
    Fail("labels: expected ", U, " labels, got ", labels.size());
  for (int y : labels) {
    if (y < 0 || y >= V) Fail("labels: id ", y, " outside vocabulary of ", V);
    if (y == blank) Fail("labels: blank id ", blank, " cannot appear as a label");
  }
}

template <typename Real>
ArcLogProbs<Real> ArcsFromLogProbs(const LogitsTensor<Real> &logp, std::span<const int> labels) {
  ArcLogProbs<Real> arcs(logp.T, logp.U);
  for (int t = 0; t < logp.T; ++t)
    for (int u = 0; u <= logp.U; ++u) {
      arcs.b(t, u) = logp.at(t, u, logp.blank);
      if (u < logp.U) arcs.e(t, u) = logp.at(t, u, labels[u]);
    }
  // No blank can leave the last frame except from the final node.
  for (int u = 0; u < logp.U; ++u) arcs.b(logp.T - 1, u) = kNegInf<Real>;
  return arcs;
}

template <typename Real>
LogitsTensor<Real> Normalized(const LogitsTensor<Real> &logits) {
  LogitsTensor<Real> out = logits;
  LogSoftmaxRows<Real>(out.values, static_cast<std::size_t>(out.V));
  return out;
}

}  // namespace detail

/// Full-sum transducer loss -log P(y | x) and its gradient.
template <typename Real>
LossResult<Real> RnntLoss(const LogitsTensor<Real> &logits, std::span<const int> labels) {
  logits.Validate();
  detail::ValidateLabels(labels, logits.U, logits.V, logits.blank);
  const LogitsTensor<Real> logp = detail::Normalized(logits);
  const ArcLogProbs<Real> arcs = detail::ArcsFromLogProbs(logp, labels);
  const ForwardBackward<Real> fb = RunForwardBackward(arcs);
  const OccupancyGrid occ = ComputeOccupancy(arcs, fb);

  LossResult<Real> result;
  result.loss = -fb.log_like;
  result.grad.assign(logits.values.size(), Real(0));
  for (int t = 0; t < logits.T; ++t) {
    for (int u = 0; u <= logits.U; ++u) {
      const Real node = static_cast<Real>(occ.node_at(t, u));
      const std::size_t base = logits.index(t, u);
      for (int v = 0; v < logits.V; ++v)
        result.grad[base + v] = node * std::exp(logp.values[base + v]);
      result.grad[base + logits.blank] -= static_cast<Real>(occ.blank_at(t, u));
      if (u < logits.U) result.grad[base + labels[u]] -= static_cast<Real>(occ.emit_at(t, u));
    }
  }
  return result;
}

template <typename Real>
OccupancyGrid Occupancy(const LogitsTensor<Real> &logits, std::span<const int> labels) {
  logits.Validate();
  detail::ValidateLabels(labels, logits.U, logits.V, logits.blank);
  const LogitsTensor<Real> logp = detail::Normalized(logits);
  const ArcLogProbs<Real> arcs = detail::ArcsFromLogProbs(logp, labels);
  return ComputeOccupancy(arcs, RunForwardBackward(arcs));
}

// ---------------------------------------------------------------------------
// Additive ("trivial") joiner: z[t][u] = log_softmax(enc[t] + pred[u]).

template <typename Real>
LogitsTensor<Real> TrivialJoin(const TrivialJoinerInput<Real> &in) {
  if (in.T < 1 || in.U < 0 || in.V < 2) Fail("trivial joiner: bad shape");
  if (in.enc.size() != static_cast<std::size_t>(in.T) * in.V)
    Fail("trivial joiner: enc has ", in.enc.size(), " values, expected ", in.T * in.V);
  if (in.pred.size() != static_cast<std::size_t>(in.U + 1) * in.V)
    Fail("trivial joiner: pred has ", in.pred.size(), " values, expected ", (in.U + 1) * in.V);
  RequireFinite<Real>(in.enc, "trivial joiner enc");
  RequireFinite<Real>(in.pred, "trivial joiner pred");

  LogitsTensor<Real> out(in.T, in.U, in.V, in.blank);
  for (int t = 0; t < in.T; ++t) {
    const Real *f = &in.enc[static_cast<std::size_t>(t) * in.V];
    for (int u = 0; u <= in.U; ++u) {
      const Real *g = &in.pred[static_cast<std::size_t>(u) * in.V];
      Real *z = &out.values[out.index(t, u)];
      for (int v = 0; v < in.V; ++v) z[v] = f[v] + g[v];
      Real norm = LogSumExp<Real>(std::span<const Real>(z, in.V));
      for (int v = 0; v < in.V; ++v) z[v] -= norm;
    }
  }
  return out;
}

template <typename Real>
OccupancyGrid Occupancy(const TrivialJoinerInput<Real> &in, std::span<const int> labels) {
  return Occupancy(TrivialJoin(in), labels);
}

// ---------------------------------------------------------------------------
// Pruning bounds.

/// Per-frame label windows [lo[t], lo[t] + S).
struct PruneBounds {
  int T = 0;
  int U = 0;
  int S = 1;
  std::vector<int> lo;

  int hi(int t) const { return lo[t] + S; }
  bool contains(int t, int u) const { return u >= lo[t] && u < lo[t] + S; }
};

// Throws ValidationError if the windows do not admit a path from (0, 0) to
// (T - 1, U) or break monotonicity.
inline void ValidateBounds(const PruneBounds &b) {
  if (b.T < 1 || b.U < 0) Fail("prune bounds: bad shape");
  if (b.S < 1 || b.S > b.U + 1) Fail("prune bounds: window ", b.S, " outside [1, ", b.U + 1, "]");
  if (static_cast<int>(b.lo.size()) != b.T) Fail("prune bounds: expected ", b.T, " frames");
  if (b.lo.front() != 0) Fail("prune bounds: first frame must start at label 0");
  if (b.lo.back() + b.S != b.U + 1) Fail("prune bounds: last frame must end at label ", b.U);
  for (int t = 0; t < b.T; ++t) {
    if (b.lo[t] < 0 || b.lo[t] + b.S > b.U + 1) Fail("prune bounds: frame ", t, " out of range");
    if (t > 0) {
      int step = b.lo[t] - b.lo[t - 1];
      if (step < 0) Fail("prune bounds: lower bound decreases at frame ", t);
      if (step > b.S - 1) Fail("prune bounds: frames ", t - 1, " and ", t, " are disconnected");
    }
  }
}

// Smallest window that can connect (0, 0) to (T - 1, U): each frame can
// climb at most S - 1 labels inside its window.
inline int MinimumWindow(int T, int U) {
  if (U == 0) return 1;
  return (U + T - 1) / T + 1;
}

/// Locally optimal pruning bounds from the occupancy of the trivial joiner.
///
/// The smallest connectable window picks, per frame, the placement with the
/// most node occupancy, and is then repaired: a forward sweep clamps each
/// lower bound to [lo[t-1], lo[t-1] + S - 1], and a backward sweep pulls
/// frames up so the last window reaches label U. Larger windows are grown
/// one label at a time from the previous size: each frame extends either
/// downwards or upwards, chosen by a two-state Viterbi pass that maximizes
/// the added occupancy while keeping the bounds monotone. Windows of
/// different sizes are therefore nested.
///
/// A window larger than U + 1 is clipped to U + 1, and one too small to
/// connect the lattice is raised to MinimumWindow(T, U); both with a warning.
inline PruneBounds ComputePruneBoundsFromOccupancy(const OccupancyGrid &occ, int window) {
  const int T = occ.T, U = occ.U;
  if (window < 1) Fail("prune bounds: window must be >= 1, got ", window);
  int S = window;
  if (S > U + 1) {
    Warn("prune bounds: window ", S, " exceeds U + 1 = ", U + 1, "; clipped");
    S = U + 1;
  }
  const int s_min = MinimumWindow(T, U);
  if (S < s_min) {
    Warn("prune bounds: window ", S, " cannot connect ", T, " frames to ", U, " labels; raised to ", s_min);
    S = s_min;
  }

  PruneBounds b;
  b.T = T;
  b.U = U;
  b.S = s_min;
  b.lo.assign(T, 0);

  // Base: the narrowest connectable window.
  if (s_min < U + 1) {
    const int w = s_min, max_lo = U + 1 - w;
    for (int t = 0; t < T; ++t) {
      double sum = 0, best = -1;
      for (int u = 0; u < w; ++u) sum += occ.node_at(t, u);
      for (int lo = 0; lo <= max_lo; ++lo) {
        if (lo > 0) sum += occ.node_at(t, lo + w - 1) - occ.node_at(t, lo - 1);
        if (sum > best + 1e-15) {
          best = sum;
          b.lo[t] = lo;
        }
      }
    }
    b.lo[0] = 0;
    for (int t = 1; t < T; ++t) b.lo[t] = std::clamp(b.lo[t], b.lo[t - 1], b.lo[t - 1] + w - 1);
    b.lo[T - 1] = max_lo;
    for (int t = T - 2; t >= 0; --t) b.lo[t] = std::max(b.lo[t], b.lo[t + 1] - (w - 1));
  }

  // Growth: S -> S + 1, each frame extends down (1) or up (0).
  std::vector<double> score(2 * T);
  std::vector<int> from(2 * T);
  while (b.S < S) {
    const int w = b.S;
    auto allowed = [&](int t, int e) { return e == 0 ? b.lo[t] + w <= U : b.lo[t] >= 1; };
    auto gain = [&](int t, int e) {
      return e == 0 ? occ.node_at(t, b.lo[t] + w) : occ.node_at(t, b.lo[t] - 1);
    };
    constexpr double kNone = -1.0;
    for (int e = 0; e < 2; ++e) score[e] = (e == 0 && allowed(0, 0)) ? gain(0, 0) : kNone;
    for (int t = 1; t < T; ++t) {
      const int step = b.lo[t] - b.lo[t - 1];
      for (int e = 0; e < 2; ++e) {
        double best = kNone;
        int arg = 0;
        if (allowed(t, e)) {
          for (int p = 0; p < 2; ++p) {
            if (score[2 * (t - 1) + p] == kNone) continue;
            if (step == 0 && p == 0 && e == 1) continue;  // lo would decrease
            if (score[2 * (t - 1) + p] > best) {
              best = score[2 * (t - 1) + p];
              arg = p;
            }
          }
          if (best != kNone) best += gain(t, e);
        }
        score[2 * t + e] = best;
        from[2 * t + e] = arg;
      }
    }
    if (score[2 * (T - 1) + 1] == kNone)
      throw std::logic_error("prune bounds: no monotone extension exists");
    int e = 1;
    for (int t = T - 1; t >= 0; --t) {
      b.lo[t] -= e;
      if (t > 0) e = from[2 * t + e];
    }
    ++b.S;
  }
  ValidateBounds(b);
  return b;
}

template <typename Real>
PruneBounds ComputePruneBounds(const TrivialJoinerInput<Real> &in, std::span<const int> labels,
                               int window) {
  return ComputePruneBoundsFromOccupancy(Occupancy(in, labels), window);
}

template <typename Real = double>
struct PrunedLossResult {
  Real loss = 0;
  PruneBounds bounds;
  std::vector<Real> grad;  // T x S x V; entry (t, s) is label u = lo[t] + s
};

/// Full-sum transducer loss restricted to the windows in `bounds`.
///
/// `joiner(t, u)` returns the V pre-softmax logits of node (t, u) as
/// something convertible to std::span<const Real>; it is only called for
/// nodes inside the windows. Arcs leaving the windows carry probability 0.
template <typename Real, typename Joiner>
PrunedLossResult<Real> PrunedRnntLoss(Joiner &&joiner, const PruneBounds &bounds,
                                      std::span<const int> labels, int V, int blank) {
  ValidateBounds(bounds);
  const int T = bounds.T, U = bounds.U, S = bounds.S;
  detail::ValidateLabels(labels, U, V, blank);

  std::vector<Real> logp(static_cast<std::size_t>(T) * S * V);
  auto win = [&](int t, int s) { return &logp[(static_cast<std::size_t>(t) * S + s) * V]; };
  ArcLogProbs<Real> arcs(T, U);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const int u = bounds.lo[t] + s;
      std::span<const Real> z = joiner(t, u);
      if (static_cast<int>(z.size()) != V) Fail("pruned loss: joiner returned ", z.size(), " logits, expected ", V);
      RequireFinite<Real>(z, "pruned loss joiner output");
      Real *dst = win(t, s);
      std::copy(z.begin(), z.end(), dst);
      LogSoftmaxRows<Real>(std::span<Real>(dst, V), V);
      if (t < T - 1 || u == U) arcs.b(t, u) = dst[blank];
      // Emission stays inside the frame; it exists only if u + 1 is in the window.
      if (u < U && s + 1 < S) arcs.e(t, u) = dst[labels[u]];
    }
  }
  const ForwardBackward<Real> fb = RunForwardBackward(arcs);
  const OccupancyGrid occ = ComputeOccupancy(arcs, fb);

  PrunedLossResult<Real> result;
  result.bounds = bounds;
  result.loss = -fb.log_like;
  result.grad.assign(logp.size(), Real(0));
  if (!std::isfinite(fb.log_like)) return result;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const int u = bounds.lo[t] + s;
      const Real node = static_cast<Real>(occ.node_at(t, u));
      Real *g = &result.grad[(static_cast<std::size_t>(t) * S + s) * V];
      const Real *lp = win(t, s);
      for (int v = 0; v < V; ++v) g[v] = node * std::exp(lp[v]);
      g[blank] -= static_cast<Real>(occ.blank_at(t, u));
      if (u < U) g[labels[u]] -= static_cast<Real>(occ.emit_at(t, u));
    }
  }
  return result;
}

// Pruned loss reading window logits out of a full joiner tensor.
template <typename Real>
PrunedLossResult<Real> PrunedRnntLoss(const LogitsTensor<Real> &logits, const PruneBounds &bounds,
                                      std::span<const int> labels) {
  logits.Validate();
  if (bounds.T != logits.T || bounds.U != logits.U) Fail("pruned loss: bounds do not match logits shape");
  return PrunedRnntLoss<Real>([&](int t, int u) { return logits.node(t, u); }, bounds, labels,
                              logits.V, logits.blank);
}

// ---------------------------------------------------------------------------
// CTC

/// Per-frame logits, T x V row-major.
template <typename Real = double>
struct FrameLogits {
  int T = 0;
  int V = 0;
  int blank = 0;
  std::vector<Real> values;

  FrameLogits() = default;
  FrameLogits(int T_, int V_, int blank_ = 0)
      : T(T_), V(V_), blank(blank_), values(static_cast<std::size_t>(T_) * V_, Real(0)) {}

  Real &at(int t, int v) { return values[static_cast<std::size_t>(t) * V + v]; }
  Real at(int t, int v) const { return values[static_cast<std::size_t>(t) * V + v]; }
};

template <typename Real = double>
struct CtcResult {
  Real loss = 0;
  std::vector<Real> grad;  // T x V
  bool feasible = true;    // false when T is too short for the labels
};

// Frames needed to emit `labels`: one per label plus a blank between repeats.
inline int CtcMinFrames(std::span<const int> labels) {
  int need = static_cast<int>(labels.size());
  for (std::size_t i = 1; i < labels.size(); ++i) need += labels[i] == labels[i - 1];
  return need;
}

template <typename Real>
CtcResult<Real> CtcLoss(const FrameLogits<Real> &logits, std::span<const int> labels) {
  const int T = logits.T, V = logits.V, blank = logits.blank;
  if (T < 1 || V < 2) Fail("ctc: need T >= 1 and V >= 2");
  if (blank < 0 || blank >= V) Fail("ctc: blank id ", blank, " outside vocabulary of ", V);
  if (logits.values.size() != static_cast<std::size_t>(T) * V)
    Fail("ctc: expected ", static_cast<std::size_t>(T) * V, " values, got ", logits.values.size());
  RequireFinite<Real>(logits.values, "ctc logits");
  detail::ValidateLabels(labels, static_cast<int>(labels.size()), V, blank);

  CtcResult<Real> result;
  result.grad.assign(logits.values.size(), Real(0));
  if (CtcMinFrames(labels) > T) {
    result.loss = std::numeric_limits<Real>::infinity();
    result.feasible = false;
    return result;
  }

  std::vector<Real> logp = logits.values;
  LogSoftmaxRows<Real>(logp, static_cast<std::size_t>(V));
  auto lp = [&](int t, int v) { return logp[static_cast<std::size_t>(t) * V + v]; };

  // Extended labels: blank, y1, blank, y2, ..., yU, blank.
  const int L = 2 * static_cast<int>(labels.size()) + 1;
  std::vector<int> ext(L, blank);
  for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]; };

  std::vector<Real> alpha(static_cast<std::size_t>(T) * L, kNegInf<Real>);
  std::vector<Real> beta(static_cast<std::size_t>(T) * L, kNegInf<Real>);
  auto A = [&](int t, int s) -> Real & { return alpha[static_cast<std::size_t>(t) * L + s]; };
  auto B = [&](int t, int s) -> Real & { return beta[static_cast<std::size_t>(t) * L + s]; };

  // alpha includes the emission at t; beta covers frames after t.
  A(0, 0) = lp(0, ext[0]);
  if (L > 1) A(0, 1) = lp(0, ext[1]);
  for (int t = 1; t < T; ++t)
    for (int s = 0; s < L; ++s) {
      Real acc = A(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, A(t - 1, s - 1));
      if (can_skip(s)) acc = LogAdd(acc, A(t - 1, s - 2));
      A(t, s) = acc == kNegInf<Real> ? acc : acc + lp(t, ext[s]);
    }
  B(T - 1, L - 1) = 0;
  if (L > 1) B(T - 1, L - 2) = 0;
  for (int t = T - 2; t >= 0; --t)
    for (int s = 0; s < L; ++s) {
      Real acc = B(t + 1, s) + lp(t + 1, ext[s]);
      if (s + 1 < L) acc = LogAdd(acc, B(t + 1, s + 1) + lp(t + 1, ext[s + 1]));
      if (s + 2 < L && can_skip(s + 2)) acc = LogAdd(acc, B(t + 1, s + 2) + lp(t + 1, ext[s + 2]));
      B(t, s) = acc;
    }

  Real log_like = A(T - 1, L - 1);
  if (L > 1) log_like = LogAdd(log_like, A(T - 1, L - 2));
  result.loss = -log_like;

  for (int t = 0; t < T; ++t) {
    Real *g = &result.grad[static_cast<std::size_t>(t) * V];
    for (int v = 0; v < V; ++v) g[v] = std::exp(lp(t, v));
    for (int s = 0; s < L; ++s) {
      Real post = A(t, s) + B(t, s) - log_like;
      if (post > kNegInf<Real>) g[ext[s]] -= std::exp(post);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Mask regression loss.

template <typename Real = double>
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Real> values;
};

/// Sum over channels of the per-channel mean squared error.
template <typename Real>
LossResult<Real> MaskLoss(std::span<const FeatureMatrix<Real>> estimated,
                          std::span<const FeatureMatrix<Real>> targets) {
  if (estimated.size() != targets.size())
    Fail("mask loss: ", estimated.size(), " estimates for ", targets.size(), " targets");
  LossResult<Real> result;
  for (std::size_t c = 0; c < estimated.size(); ++c) {
    const auto &h = estimated[c];
    const auto &x = targets[c];
    if (h.rows != x.rows || h.cols != x.cols || h.values.size() != x.values.size() ||
        h.values.size() != static_cast<std::size_t>(h.rows) * h.cols)
      Fail("mask loss: shape mismatch on channel ", c);
    const std::size_t n = h.values.size();
    Real sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Real d = h.values[i] - x.values[i];
      sum += d * d;
      result.grad.push_back(n ? Real(2) * d / static_cast<Real>(n) : Real(0));
    }
    if (n) result.loss += sum / static_cast<Real>(n);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Combinations.

template <typename Real = double>
struct ChannelInput {
  LogitsTensor<Real> logits;
  std::vector<int> labels;
};

template <typename Real = double>
struct HeatLossResult {
  Real loss = 0;
  std::vector<Real> per_channel;
  std::vector<std::vector<Real>> grads;
};

/// Sum of per-channel transducer losses against the HEAT references.
template <typename Real>
HeatLossResult<Real> HeatLoss(std::span<const ChannelInput<Real>> channels) {
  if (channels.empty()) Fail("heat loss: need at least one channel");
  HeatLossResult<Real> result;
  for (const auto &ch : channels) {
    LossResult<Real> r = RnntLoss(ch.logits, std::span<const int>(ch.labels));
    result.loss += r.loss;
    result.per_channel.push_back(r.loss);
    result.grads.push_back(std::move(r.grad));
  }
  return result;
}

struct LossWeights {
  double ctc = 0.2;
  double mask = 0.2;
};

inline double TotalLoss(double heat, double ctc, double mask, const LossWeights &w = {}) {
  if (w.ctc < 0 || w.mask < 0) Fail("total loss: weights must be non-negative");
  return heat + w.ctc * ctc + w.mask * mask;
}

enum class Reduction { kSum, kMean };

template <typename Real>
Real Reduce(std::span<const Real> losses, Reduction r) {
  Real total = 0;
  for (Real x : losses) total += x;
  if (r == Reduction::kMean && !losses.empty()) total /= static_cast<Real>(losses.size());
  return total;
}

}  // namespace surt::lattice

#endif  // SURT_LATTICE_HPP_
