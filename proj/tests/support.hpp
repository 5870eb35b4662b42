#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gccd/graph.hpp"
#include "gccd/piecewise.hpp"

namespace gccd::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Random piecewise quadratic on [lo, hi]: continuous between feasible pieces,
// with occasional constant and +inf pieces. Origins tag each piece with `tag`.
inline PiecewiseQuad random_function(Rng& rng, double lo, double hi, int tag) {
  const int n = uniform_int(rng, 1, 6);
  std::vector<double> cuts{lo, hi};
  for (int k = 1; k < n; ++k) cuts.push_back(uniform(rng, lo, hi));
  std::sort(cuts.begin(), cuts.end());
  std::vector<Piece> pieces;
  bool have_value = false;
  double value_at_lo = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] - cuts[k] > 1e-6)) continue;
    Piece p;
    p.lo = pieces.empty() ? lo : pieces.back().hi;
    p.hi = cuts[k + 1];
    p.origin = Origin::change(tag, static_cast<std::size_t>(k) + 1);
    const double roll = uniform(rng, 0.0, 1.0);
    if (roll < 0.12) {
      p.f = Quad::infinite();
      have_value = false;
    } else {
      const double a = roll < 0.25 ? 0.0 : uniform(rng, 0.05, 3.0);
      const double x0 = uniform(rng, lo - 1.0, hi + 1.0);
      if (!have_value) value_at_lo = uniform(rng, 0.0, 5.0);
      const double d = p.lo - x0;
      p.f = Quad::vertex(a, x0, value_at_lo - a * d * d);
      value_at_lo = p.f(p.hi);
      have_value = true;
    }
    pieces.push_back(p);
  }
  pieces.back().hi = hi;
  return PiecewiseQuad(normalize(std::move(pieces)));
}

// Random graph on up to `max_states` states with up/down edges, gaps on a
// 0.01 lattice in [0, 3] and penalties in [0, 5]. Start/end sets are all
// states; every state has at least one outgoing edge.
inline ConstraintGraph random_graph(Rng& rng, int max_states) {
  ConstraintGraph g;
  const int n = uniform_int(rng, 1, max_states);
  for (int v = 0; v < n; ++v) g.vertices.push_back({v, "S" + std::to_string(v)});
  auto add_edge = [&](int s, int t, Direction d) {
    for (const Edge& e : g.edges) {
      if (e.source == s && e.target == t && e.direction == d) return;
    }
    Edge e;
    e.id = static_cast<int>(g.edges.size()) + 1;
    e.source = s;
    e.target = t;
    e.direction = d;
    e.gap = uniform_int(rng, 0, 300) * 0.01;
    e.penalty = uniform(rng, 0.0, 5.0);
    g.edges.push_back(e);
  };
  for (int v = 0; v < n; ++v) {
    add_edge(v, uniform_int(rng, 0, n - 1), uniform_int(rng, 0, 1) ? Direction::up : Direction::down);
  }
  const int extra = uniform_int(rng, 0, n);
  for (int k = 0; k < extra; ++k) {
    add_edge(uniform_int(rng, 0, n - 1), uniform_int(rng, 0, n - 1),
             uniform_int(rng, 0, 1) ? Direction::up : Direction::down);
  }
  for (int v = 0; v < n; ++v) {
    g.start_states.push_back(v);
    g.end_states.push_back(v);
  }
  return g;
}

// min of f over [a, b]: every feasible piece is minimised at one of its
// clipped endpoints or its vertex, plus a dense sweep through evaluate().
inline double brute_min(const PiecewiseQuad& f, double a, double b) {
  double best = kInf;
  for (const Piece& p : f.pieces()) {
    if (!p.feasible()) continue;
    const double l = std::max(a, p.lo);
    const double h = std::min(b, p.hi);
    if (l > h) continue;
    best = std::min({best, p.f(l), p.f(h)});
    const double x0 = p.f.center();
    if (p.f.curvature() > 0.0 && x0 > l && x0 < h) best = std::min(best, p.f(x0));
  }
  constexpr int kGrid = 2000;
  for (int k = 0; k <= kGrid; ++k) best = std::min(best, f(std::min(b, a + (b - a) * k / kGrid)));
  return best;
}

inline std::vector<double> random_signal(Rng& rng, std::size_t n, double lo = 0.0, double hi = 10.0) {
  std::vector<double> y(n);
  for (double& v : y) v = uniform(rng, lo, hi);
  return y;
}

}  // namespace gccd::testing
