#include "gccd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "gccd/error.hpp"

namespace gccd {

namespace {

constexpr double kNone = std::numeric_limits<double>::infinity();

struct Grid {
  long first = 0;  // grid index of the lowest mean
  std::size_t size = 0;
  double step = 0.0;

  double value(std::size_t k) const { return static_cast<double>(first + static_cast<long>(k)) * step; }
};

Grid make_grid(std::span<const double> signal, const ConstraintGraph& g, const OracleConfig& cfg) {
  if (signal.empty()) throw std::invalid_argument("oracle needs a non-empty signal");
  if (!(cfg.mean_grid_step > 0.0)) throw std::invalid_argument("oracle grid step must be > 0");
  if (signal.size() > cfg.max_n) throw std::invalid_argument("oracle signal longer than max_n");
  if (g.num_vertices() > cfg.max_states) throw std::invalid_argument("oracle graph has more than max_states states");
  require_valid(g);
  for (const Edge& e : g.edges) {
    const double r = e.gap / cfg.mean_grid_step;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r)) {
      throw std::invalid_argument("oracle needs every gap to be a multiple of the grid step");
    }
  }
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  const double reach = static_cast<double>(signal.size() - 1) * g.max_gap();
  Grid grid;
  grid.step = cfg.mean_grid_step;
  grid.first = static_cast<long>(std::floor((*lo - reach) / grid.step)) - 1;
  const long last = static_cast<long>(std::ceil((*hi + reach) / grid.step)) + 1;
  grid.size = static_cast<std::size_t>(last - grid.first + 1);
  return grid;
}

long gap_steps(const Edge& e, double step) { return std::lround(e.gap / step); }

bool allowed(const std::vector<int>& set, int v) { return std::find(set.begin(), set.end(), v) != set.end(); }

double grid_bound(std::size_t n, double step, double cost) {
  const double nd = static_cast<double>(n);
  return nd * step * step + 2.0 * step * std::sqrt(nd * std::max(cost, 0.0));
}

// Running minimum of `f` from the left (up) or right (down), remembering where
// each minimum sits.
void running_min(const std::vector<double>& f, Direction dir, std::vector<double>& val, std::vector<std::size_t>& at) {
  const std::size_t n = f.size();
  val.assign(n, kNone);
  at.assign(n, 0);
  if (dir == Direction::up) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && val[k - 1] <= f[k]) {
        val[k] = val[k - 1];
        at[k] = at[k - 1];
      } else {
        val[k] = f[k];
        at[k] = k;
      }
    }
  } else {
    for (std::size_t k = n; k-- > 0;) {
      if (k + 1 < n && val[k + 1] < f[k]) {
        val[k] = val[k + 1];
        at[k] = at[k + 1];
      } else {
        val[k] = f[k];
        at[k] = k;
      }
    }
  }
}

// Index of the best predecessor mean for a change along `e` into grid index
// k, or nullopt when none fits in the grid.
std::optional<std::size_t> source_index(const Edge& e, std::size_t k, std::size_t size, double step) {
  const long g = gap_steps(e, step);
  const long kk = e.direction == Direction::up ? static_cast<long>(k) - g : static_cast<long>(k) + g;
  if (kk < 0 || kk >= static_cast<long>(size)) return std::nullopt;
  return static_cast<std::size_t>(kk);
}

}  // namespace

OracleResult oracle_solve(std::span<const double> signal, const ConstraintGraph& g, const OracleConfig& cfg) {
  const Grid grid = make_grid(signal, g, cfg);
  const std::size_t n = signal.size();
  const std::size_t nv = g.num_vertices();
  const std::size_t G = grid.size;

  std::vector<std::vector<double>> cost(nv, std::vector<double>(G, kNone));
  for (int s : g.start_states) {
    for (std::size_t k = 0; k < G; ++k) {
      const double r = signal[0] - grid.value(k);
      cost[static_cast<std::size_t>(s)][k] = r * r;
    }
  }

  // back_edge[t][v][k]: 0 = same segment, otherwise the edge taken into (t, v, k).
  std::vector<std::vector<std::vector<int>>> back_edge(n, std::vector<std::vector<int>>(nv, std::vector<int>(G, 0)));
  std::vector<std::vector<std::vector<std::size_t>>> back_k(
      n, std::vector<std::vector<std::size_t>>(nv, std::vector<std::size_t>(G, 0)));

  std::vector<const Edge*> edges;
  for (const Edge& e : g.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [](const Edge* a, const Edge* b) { return a->id < b->id; });

  std::vector<double> up_val, down_val;
  std::vector<std::size_t> up_at, down_at;
  for (std::size_t t = 1; t < n; ++t) {
    std::vector<std::vector<double>> next = cost;
    for (const Edge* e : edges) {
      const auto& from = cost[static_cast<std::size_t>(e->source)];
      auto& into = next[static_cast<std::size_t>(e->target)];
      auto& val = e->direction == Direction::up ? up_val : down_val;
      auto& at = e->direction == Direction::up ? up_at : down_at;
      running_min(from, e->direction, val, at);
      for (std::size_t k = 0; k < G; ++k) {
        const auto kk = source_index(*e, k, G, grid.step);
        if (!kk || val[*kk] == kNone) continue;
        const double c = val[*kk] + e->penalty;
        if (c < into[k]) {
          into[k] = c;
          back_edge[t][static_cast<std::size_t>(e->target)][k] = e->id;
          back_k[t][static_cast<std::size_t>(e->target)][k] = at[*kk];
        }
      }
    }
    for (auto& f : next) {
      for (std::size_t k = 0; k < G; ++k) {
        if (f[k] == kNone) continue;
        const double r = signal[t] - grid.value(k);
        f[k] += r * r;
      }
    }
    cost = std::move(next);
  }

  double best = kNone;
  int state = -1;
  std::size_t at = 0;
  for (int v = 0; v < static_cast<int>(nv); ++v) {
    if (!allowed(g.end_states, v)) continue;
    for (std::size_t k = 0; k < G; ++k) {
      if (cost[static_cast<std::size_t>(v)][k] < best) {
        best = cost[static_cast<std::size_t>(v)][k];
        state = v;
        at = k;
      }
    }
  }
  if (state < 0) throw InfeasibleError("oracle: no segmentation satisfies the constraint graph");

  OracleResult out;
  out.cost = best;
  out.grid_bound = grid_bound(n, grid.step, best);
  Segmentation& seg = out.segmentation;
  seg.total_cost = best;
  std::size_t seg_end = n;
  for (std::size_t t = n - 1; t >= 1; --t) {
    const int e = back_edge[t][static_cast<std::size_t>(state)][at];
    if (e == 0) continue;
    seg.segments.push_back({t + 1, seg_end, state, grid.value(at)});
    seg.changes.push_back({t, e});
    at = back_k[t][static_cast<std::size_t>(state)][at];
    state = g.edge(e).source;
    seg_end = t;
  }
  seg.segments.push_back({1, seg_end, state, grid.value(at)});
  std::reverse(seg.segments.begin(), seg.segments.end());
  std::reverse(seg.changes.begin(), seg.changes.end());
  return out;
}

namespace {

struct Enumerator {
  std::span<const double> signal;
  const ConstraintGraph& g;
  Grid grid;
  double best = kNone;
  Segmentation best_seg;

  std::vector<int> states;  // per segment
  std::vector<Change> changes;

  void run() {
    for (int s : g.start_states) {
      states.assign(1, s);
      changes.clear();
      extend(1);
    }
  }

  // Decide c_i for position i (between samples i and i + 1).
  void extend(std::size_t i) {
    if (i == signal.size()) {
      if (allowed(g.end_states, states.back())) fit();
      return;
    }
    extend(i + 1);
    for (const Edge& e : g.edges) {
      if (e.source != states.back()) continue;
      states.push_back(e.target);
      changes.push_back({i, e.id});
      extend(i + 1);
      states.pop_back();
      changes.pop_back();
    }
  }

  // Best grid means for the current (states, changes), by a chain recursion
  // over segments.
  void fit() {
    const std::size_t G = grid.size;
    const std::size_t segs = states.size();
    std::vector<std::vector<double>> table(segs, std::vector<double>(G, kNone));
    std::vector<std::vector<std::size_t>> from(segs, std::vector<std::size_t>(G, 0));
    std::vector<double> val;
    std::vector<std::size_t> at;
    double penalties = 0.0;
    for (std::size_t j = 0; j < segs; ++j) {
      const std::size_t start = j == 0 ? 1 : changes[j - 1].position + 1;
      const std::size_t end = j + 1 < segs ? changes[j].position : signal.size();
      const Edge* e = j == 0 ? nullptr : &g.edge(changes[j - 1].edge);
      if (e != nullptr) {
        penalties += e->penalty;
        running_min(table[j - 1], e->direction, val, at);
      }
      for (std::size_t k = 0; k < G; ++k) {
        double prior = 0.0;
        if (e != nullptr) {
          const auto kk = source_index(*e, k, G, grid.step);
          if (!kk || val[*kk] == kNone) continue;
          prior = val[*kk];
          from[j][k] = at[*kk];
        }
        double fit = 0.0;
        for (std::size_t i = start; i <= end; ++i) {
          const double r = signal[i - 1] - grid.value(k);
          fit += r * r;
        }
        table[j][k] = prior + fit;
      }
    }
    std::size_t k = 0;
    for (std::size_t c = 1; c < G; ++c) {
      if (table[segs - 1][c] < table[segs - 1][k]) k = c;
    }
    const double total = table[segs - 1][k] + penalties;
    if (!(total < best)) return;
    best = total;
    best_seg = Segmentation{};
    best_seg.total_cost = total;
    best_seg.changes = changes;
    best_seg.segments.resize(segs);
    for (std::size_t j = segs; j-- > 0;) {
      const std::size_t start = j == 0 ? 1 : changes[j - 1].position + 1;
      const std::size_t end = j + 1 < segs ? changes[j].position : signal.size();
      best_seg.segments[j] = {start, end, states[j], grid.value(k)};
      k = from[j][k];
    }
  }
};

}  // namespace

OracleResult oracle_enumerate(std::span<const double> signal, const ConstraintGraph& g, const OracleConfig& cfg) {
  Enumerator en{signal, g, make_grid(signal, g, cfg), kNone, {}, {}, {}};
  en.run();
  if (en.best == kNone) throw InfeasibleError("oracle: no segmentation satisfies the constraint graph");
  OracleResult out;
  out.cost = en.best;
  out.grid_bound = grid_bound(signal.size(), cfg.mean_grid_step, en.best);
  out.segmentation = std::move(en.best_seg);
  return out;
}

}  // namespace gccd
