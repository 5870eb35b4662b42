#include "gccd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>
#include <tuple>

#include "gccd/error.hpp"
#include "text.hpp"

namespace gccd {

std::optional<int> ConstraintGraph::find(std::string_view name) const {
  for (const Vertex& v : vertices) {
    if (v.name == name) return v.id;
  }
  return std::nullopt;
}

const Edge& ConstraintGraph::edge(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > edges.size() ||
      edges[static_cast<std::size_t>(id - 1)].id != id) {
    auto it = std::find_if(edges.begin(), edges.end(), [id](const Edge& e) { return e.id == id; });
    if (it == edges.end()) throw std::out_of_range("no edge with id " + std::to_string(id));
    return *it;
  }
  return edges[static_cast<std::size_t>(id - 1)];
}

double ConstraintGraph::max_gap() const {
  double g = 0.0;
  for (const Edge& e : edges) g = std::max(g, e.gap);
  return g;
}

std::vector<Diagnostic> validate(const ConstraintGraph& g) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Severity::error, std::move(m)}); };
  auto warning = [&](std::string m) { out.push_back({Severity::warning, std::move(m)}); };

  const int n = static_cast<int>(g.vertices.size());
  if (n == 0) {
    error("graph has no states");
    return out;
  }
  std::set<std::string> names;
  for (int k = 0; k < n; ++k) {
    const Vertex& v = g.vertices[static_cast<std::size_t>(k)];
    if (v.id != k) error("state '" + v.name + "' has id " + std::to_string(v.id) + ", expected " + std::to_string(k));
    if (v.name.empty()) error("state " + std::to_string(k) + " has an empty name");
    if (!names.insert(v.name).second) error("duplicate state name '" + v.name + "'");
  }
  auto valid_vertex = [n](int v) { return v >= 0 && v < n; };

  std::set<int> ids;
  for (const Edge& e : g.edges) {
    const std::string tag = "edge " + std::to_string(e.id);
    if (e.id == 0) error(tag + ": id 0 is reserved for no change");
    if (e.id < 0) error(tag + ": negative id");
    if (!ids.insert(e.id).second) error(tag + ": duplicate id");
    if (!valid_vertex(e.source)) error(tag + ": source " + std::to_string(e.source) + " is not a state");
    if (!valid_vertex(e.target)) error(tag + ": target " + std::to_string(e.target) + " is not a state");
    if (!(e.gap >= 0.0) || !std::isfinite(e.gap)) error(tag + ": gap must be finite and >= 0");
    if (!(e.penalty >= 0.0) || !std::isfinite(e.penalty)) error(tag + ": penalty must be finite and >= 0");
  }
  auto check_set = [&](const std::vector<int>& set, const char* what) {
    if (set.empty()) error(std::string(what) + " states are empty");
    for (int v : set) {
      if (!valid_vertex(v)) error(std::string(what) + " state " + std::to_string(v) + " does not exist");
    }
  };
  check_set(g.start_states, "start");
  check_set(g.end_states, "end");
  if (has_errors(out)) return out;

  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<int> queue;
  for (int s : g.start_states) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const Edge& e : g.edges) {
      if (e.source == v && !seen[static_cast<std::size_t>(e.target)]) {
        seen[static_cast<std::size_t>(e.target)] = true;
        queue.push_back(e.target);
      }
    }
  }
  for (const Vertex& v : g.vertices) {
    if (!seen[static_cast<std::size_t>(v.id)]) warning("state '" + v.name + "' is unreachable from every start state");
    const bool leaves = std::any_of(g.edges.begin(), g.edges.end(),
                                    [&](const Edge& e) { return e.source == v.id && e.target != v.id; });
    if (!leaves) warning("state '" + v.name + "' has no outgoing edge");
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

void require_valid(const ConstraintGraph& g) {
  for (const Diagnostic& d : validate(g)) {
    if (d.severity == Severity::error) throw std::invalid_argument("invalid graph: " + d.message);
  }
}

namespace {

double parse_field(std::string_view token, std::string_view key, std::size_t line) {
  const std::string prefix = std::string(key) + "=";
  if (token.substr(0, prefix.size()) != prefix) {
    throw ParseError(line, "expected " + prefix + "<number>, got '" + std::string(token) + "'");
  }
  const auto value = text::parse_number<double>(token.substr(prefix.size()));
  if (!value || !std::isfinite(*value)) {
    throw ParseError(line, "bad number in '" + std::string(token) + "'");
  }
  if (*value < 0.0) throw ParseError(line, std::string(key) + " must be >= 0");
  return *value;
}

}  // namespace

ConstraintGraph parse_graph(std::string_view source) {
  ConstraintGraph g;
  std::optional<std::vector<int>> start;
  std::optional<std::vector<int>> end;
  std::set<std::tuple<int, int, Direction>> seen_edges;

  const auto all_lines = text::lines(source);
  for (std::size_t k = 0; k < all_lines.size(); ++k) {
    const std::size_t line = k + 1;
    const auto tokens = text::split(text::strip_comment(all_lines[k]), " \t\r");
    if (tokens.empty()) continue;

    auto vertex = [&](std::string_view name) {
      auto id = g.find(name);
      if (!id) throw ParseError(line, "unknown state '" + std::string(name) + "'");
      return *id;
    };

    const std::string_view keyword = tokens[0];
    if (keyword == "state") {
      if (tokens.size() != 2) throw ParseError(line, "expected: state <NAME>");
      if (g.find(tokens[1])) throw ParseError(line, "duplicate state '" + std::string(tokens[1]) + "'");
      g.vertices.push_back({static_cast<int>(g.vertices.size()), std::string(tokens[1])});
    } else if (keyword == "edge") {
      if (tokens.size() != 6) throw ParseError(line, "expected: edge <SRC> <DST> <up|down> gap=<x> penalty=<x>");
      Edge e;
      e.id = static_cast<int>(g.edges.size()) + 1;
      e.source = vertex(tokens[1]);
      e.target = vertex(tokens[2]);
      if (tokens[3] == "up") {
        e.direction = Direction::up;
      } else if (tokens[3] == "down") {
        e.direction = Direction::down;
      } else {
        throw ParseError(line, "direction must be up or down, got '" + std::string(tokens[3]) + "'");
      }
      e.gap = parse_field(tokens[4], "gap", line);
      e.penalty = parse_field(tokens[5], "penalty", line);
      if (!seen_edges.insert({e.source, e.target, e.direction}).second) {
        throw ParseError(line, "duplicate edge " + std::string(tokens[1]) + " -> " + std::string(tokens[2]));
      }
      g.edges.push_back(e);
    } else if (keyword == "start" || keyword == "end") {
      auto& target = keyword == "start" ? start : end;
      if (target) throw ParseError(line, "repeated '" + std::string(keyword) + "' line");
      if (tokens.size() < 2) throw ParseError(line, "expected at least one state after '" + std::string(keyword) + "'");
      std::vector<int> ids;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        const int id = vertex(tokens[t]);
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
      }
      target = std::move(ids);
    } else {
      throw ParseError(line, "unknown keyword '" + std::string(keyword) + "'");
    }
  }
  if (g.vertices.empty()) throw ParseError(std::max<std::size_t>(all_lines.size(), 1), "graph declares no states");

  std::vector<int> all(g.vertices.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
  g.start_states = start.value_or(all);
  g.end_states = end.value_or(all);

  for (const Diagnostic& d : validate(g)) {
    if (d.severity == Severity::error) throw ParseError(0, d.message);
  }
  return g;
}

ConstraintGraph load_graph(const std::string& path) { return parse_graph(text::read_file(path)); }

std::string serialize(const ConstraintGraph& g) {
  std::string out;
  for (const Vertex& v : g.vertices) out += "state " + v.name + "\n";
  for (const Edge& e : g.edges) {
    out += "edge " + g.name(e.source) + " " + g.name(e.target) + " " +
           (e.direction == Direction::up ? "up" : "down") + " gap=" + text::format_double(e.gap) +
           " penalty=" + text::format_double(e.penalty) + "\n";
  }
  auto list = [&](const char* keyword, const std::vector<int>& ids) {
    out += keyword;
    for (int id : ids) out += " " + g.name(id);
    out += "\n";
  };
  list("start", g.start_states);
  list("end", g.end_states);
  return out;
}

double TemplateGaps::at(const std::string& source, const std::string& target) const {
  auto it = by_edge.find(source + "->" + target);
  return it == by_edge.end() ? fallback : it->second;
}

namespace {

const char* wave_name(Wave w) {
  switch (w) {
    case Wave::P: return "P";
    case Wave::Q: return "Q";
    case Wave::R: return "R";
    case Wave::S: return "S";
    case Wave::T: return "T";
  }
  return "?";
}

bool positive(Wave w) { return w == Wave::P || w == Wave::R || w == Wave::T; }

}  // namespace

std::vector<Wave> parse_waves(std::string_view text) {
  std::vector<Wave> waves;
  for (char ch : text) {
    switch (ch) {
      case 'P': case 'p': waves.push_back(Wave::P); break;
      case 'Q': case 'q': waves.push_back(Wave::Q); break;
      case 'R': case 'r': waves.push_back(Wave::R); break;
      case 'S': case 's': waves.push_back(Wave::S); break;
      case 'T': case 't': waves.push_back(Wave::T); break;
      case ',': case ' ': break;
      default: throw std::invalid_argument(std::string("unknown wave '") + ch + "'");
    }
  }
  return waves;
}

ConstraintGraph ecg_template(const std::vector<Wave>& waves, const TemplateGaps& gaps, double penalty) {
  const std::set<Wave> set(waves.begin(), waves.end());
  if (!set.contains(Wave::R)) throw std::invalid_argument("ECG template needs an R wave");
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw std::invalid_argument("penalty must be finite and >= 0");

  // Each entry is either a wave or a baseline (nullopt).
  std::vector<std::optional<Wave>> cycle{std::nullopt};
  if (set.contains(Wave::P)) {
    cycle.push_back(Wave::P);
    cycle.push_back(std::nullopt);
  }
  if (set.contains(Wave::Q)) cycle.push_back(Wave::Q);
  cycle.push_back(Wave::R);
  if (set.contains(Wave::S)) cycle.push_back(Wave::S);
  if (set.contains(Wave::T)) {
    cycle.push_back(std::nullopt);
    cycle.push_back(Wave::T);
  }

  const auto baselines = std::count(cycle.begin(), cycle.end(), std::nullopt);
  ConstraintGraph g;
  int next_baseline = 1;
  for (const auto& slot : cycle) {
    std::string name = slot ? wave_name(*slot)
                            : (baselines == 1 ? "B" : "B" + std::to_string(next_baseline++));
    g.vertices.push_back({static_cast<int>(g.vertices.size()), std::move(name)});
  }
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const std::size_t next = (k + 1) % cycle.size();
    Edge e;
    e.id = static_cast<int>(k) + 1;
    e.source = static_cast<int>(k);
    e.target = static_cast<int>(next);
    const auto& to = cycle[next];
    if (to) {
      e.direction = positive(*to) ? Direction::up : Direction::down;
      e.penalty = penalty;
    } else {
      e.direction = positive(*cycle[k]) ? Direction::down : Direction::up;
      e.penalty = 0.0;
    }
    e.gap = gaps.at(g.vertices[k].name, g.vertices[next].name);
    if (!(e.gap >= 0.0) || !std::isfinite(e.gap) || (to && e.gap == 0.0)) {
      throw std::invalid_argument("gap for " + g.vertices[k].name + "->" + g.vertices[next].name +
                                  " must be positive");
    }
    g.edges.push_back(e);
  }
  for (const Vertex& v : g.vertices) {
    g.start_states.push_back(v.id);
    g.end_states.push_back(v.id);
  }
  return g;
}

}  // namespace gccd
