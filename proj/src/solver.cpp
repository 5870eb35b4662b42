#include "gccd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gccd/error.hpp"
#include "gccd/piecewise.hpp"

namespace gccd {

namespace {

// Backpointer for a maximal run of pieces sharing one origin. Edge 0 is "no
// change", -1 marks an infeasible run.
struct TraceRun {
  double hi;
  double prev_mean;
  double shift;
  int edge;
  bool owns_lo;  // the boundary with the previous run belongs to this run

  bool same_origin(const TraceRun& o) const {
    const bool same_mean = (std::isnan(prev_mean) && std::isnan(o.prev_mean)) || prev_mean == o.prev_mean;
    return edge == o.edge && (edge <= 0 || (same_mean && shift == o.shift));
  }
};

class TraceTable {
 public:
  explicit TraceTable(std::size_t slots) { offsets_.reserve(slots + 1); offsets_.push_back(0); }

  void push(const PiecewiseQuad& f) {
    const auto pieces = f.pieces();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const Piece& p = pieces[k];
      const int edge = p.feasible() ? p.origin.edge : -1;
      const bool owns_lo = k > 0 && right_owns_boundary(pieces[k - 1], p);
      const TraceRun run{p.hi, p.origin.prev_mean, p.origin.shift, edge, owns_lo};
      if (runs_.size() > offsets_.back() && runs_.back().same_origin(run)) {
        runs_.back().hi = p.hi;
      } else {
        runs_.push_back(run);
      }
    }
    offsets_.push_back(runs_.size());
  }

  const TraceRun& find(std::size_t slot, double m) const {
    const auto first = runs_.begin() + static_cast<std::ptrdiff_t>(offsets_[slot]);
    const auto last = runs_.begin() + static_cast<std::ptrdiff_t>(offsets_[slot + 1]);
    auto it = std::lower_bound(first, last, m, [](const TraceRun& r, double x) { return r.hi < x; });
    if (it == last) --it;
    if (it + 1 != last && m == it->hi && (it + 1)->owns_lo) ++it;
    return *it;
  }

  std::size_t size() const { return runs_.size(); }

 private:
  std::vector<TraceRun> runs_;
  std::vector<std::size_t> offsets_;
};

}  // namespace

MeanDomain mean_domain(std::span<const double> signal, const ConstraintGraph& g) {
  const auto [lo_it, hi_it] = std::minmax_element(signal.begin(), signal.end());
  const double range = *hi_it - *lo_it;
  const double eps = range > 0.0 ? 1e-6 * range : 1e-9;
  const double reach = static_cast<double>(signal.size() - 1) * g.max_gap();
  return {*lo_it - reach - eps, *hi_it + reach + eps};
}

Segmentation solve(std::span<const double> signal, const ConstraintGraph& g, SolveStats* stats) {
  if (signal.empty()) throw std::invalid_argument("cannot segment an empty signal");
  for (double y : signal) {
    if (!std::isfinite(y)) throw std::invalid_argument("signal contains a non-finite sample");
  }
  require_valid(g);

  const std::size_t n = signal.size();
  const std::size_t nv = g.num_vertices();
  const auto [lo, hi] = mean_domain(signal, g);

  std::vector<std::vector<const Edge*>> incoming(nv);
  for (const Edge& e : g.edges) incoming[static_cast<std::size_t>(e.target)].push_back(&e);
  for (auto& in : incoming) {
    std::sort(in.begin(), in.end(), [](const Edge* a, const Edge* b) { return a->id < b->id; });
  }

  const PiecewiseQuad nowhere = PiecewiseQuad::single(lo, hi, Quad::infinite());
  std::vector<PiecewiseQuad> cost(nv, nowhere);
  for (int s : g.start_states) {
    cost[static_cast<std::size_t>(s)] = PiecewiseQuad::single(lo, hi, Quad::vertex(1.0, signal[0], 0.0));
  }

  TraceTable trace((n - 1) * nv);
  std::size_t max_pieces = 1;
  double piece_total = 0.0;
  auto feasible_anywhere = [](const PiecewiseQuad& f) {
    return std::any_of(f.pieces().begin(), f.pieces().end(), [](const Piece& p) { return p.feasible(); });
  };

  std::vector<PiecewiseQuad> next(nv);
  for (std::size_t t = 2; t <= n; ++t) {
    for (std::size_t v = 0; v < nv; ++v) {
      PiecewiseQuad best = cost[v].with_origin(Origin::stay());
      for (const Edge* e : incoming[v]) {
        const PiecewiseQuad& from = cost[static_cast<std::size_t>(e->source)];
        if (!feasible_anywhere(from)) continue;
        best = point_min(best, min_transform(from, e->direction, e->gap)
                                   .with_change(e->id, t - 1)
                                   .add_constant(e->penalty));
      }
      next[v] = best.add_point_loss(signal[t - 1]);
      trace.push(next[v]);
      max_pieces = std::max(max_pieces, next[v].size());
      piece_total += static_cast<double>(next[v].size());
    }
    std::swap(cost, next);
  }

  int state = -1;
  Minimum end{kInf, 0.0, {}};
  std::vector<int> ends = g.end_states;
  std::sort(ends.begin(), ends.end());
  for (int v : ends) {
    const PiecewiseQuad& f = cost[static_cast<std::size_t>(v)];
    if (!feasible_anywhere(f)) continue;
    const Minimum m = f.global_min();
    if (m.cost < end.cost) {
      end = m;
      state = v;
    }
  }
  if (state < 0) throw InfeasibleError("no segmentation satisfies the constraint graph");

  Segmentation seg;
  seg.total_cost = end.cost;
  double mean = end.mean;
  std::size_t seg_end = n;
  for (std::size_t t = n; t >= 2; --t) {
    const TraceRun& run = trace.find((t - 2) * nv + static_cast<std::size_t>(state), mean);
    if (run.edge == 0) continue;
    if (run.edge < 0) throw std::logic_error("decoding reached an infeasible region");
    const Edge& e = g.edge(run.edge);
    seg.segments.push_back({t, seg_end, state, mean});
    seg.changes.push_back({t - 1, e.id});
    mean = std::isnan(run.prev_mean) ? mean - run.shift : run.prev_mean;
    state = e.source;
    seg_end = t - 1;
  }
  seg.segments.push_back({1, seg_end, state, mean});
  std::reverse(seg.segments.begin(), seg.segments.end());
  std::reverse(seg.changes.begin(), seg.changes.end());

  if (stats != nullptr) {
    stats->max_pieces = max_pieces;
    stats->mean_pieces = n > 1 ? piece_total / static_cast<double>((n - 1) * nv) : 1.0;
    stats->trace_records = trace.size();
  }
  return seg;
}

}  // namespace gccd
