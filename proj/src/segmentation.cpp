#include "gccd/segmentation.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "gccd/error.hpp"

namespace gccd {

namespace {

void require_tiling(const Segmentation& seg, std::size_t n) {
  if (seg.segments.empty()) throw std::invalid_argument("segmentation has no segments");
  std::size_t next = 1;
  for (const Segment& s : seg.segments) {
    if (s.start != next || s.end < s.start || s.end > n) {
      throw std::invalid_argument("segment [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                                  "] does not continue the tiling of [1, " + std::to_string(n) + "]");
    }
    next = s.end + 1;
  }
  if (next != n + 1) throw std::invalid_argument("segments end before sample " + std::to_string(n));
  if (seg.changes.size() + 1 != seg.segments.size()) {
    throw std::invalid_argument("expected one change between each pair of segments");
  }
  for (std::size_t k = 0; k < seg.changes.size(); ++k) {
    if (seg.changes[k].position != seg.segments[k].end) {
      throw std::invalid_argument("change " + std::to_string(k) + " is not at the end of its segment");
    }
  }
}

bool contains(const std::vector<int>& set, int v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace

CostCheck cost_of(const Segmentation& seg, std::span<const double> signal, const ConstraintGraph& g) {
  require_tiling(seg, signal.size());
  CostCheck out{0.0, true};
  for (const Segment& s : seg.segments) {
    for (std::size_t i = s.start; i <= s.end; ++i) {
      const double r = signal[i - 1] - s.mean;
      out.cost += r * r;
    }
    if (s.state < 0 || static_cast<std::size_t>(s.state) >= g.num_vertices()) out.feasible = false;
  }
  for (std::size_t k = 0; k < seg.changes.size(); ++k) {
    const Change& c = seg.changes[k];
    const auto it = std::find_if(g.edges.begin(), g.edges.end(), [&](const Edge& e) { return e.id == c.edge; });
    if (c.edge == 0 || it == g.edges.end()) {
      out.feasible = false;
      continue;
    }
    const Segment& before = seg.segments[k];
    const Segment& after = seg.segments[k + 1];
    out.cost += it->penalty;
    if (before.state != it->source || after.state != it->target) out.feasible = false;
    if (it->constraint(before.mean, after.mean) > kConstraintTolerance) out.feasible = false;
  }
  if (!contains(g.start_states, seg.segments.front().state)) out.feasible = false;
  if (!contains(g.end_states, seg.segments.back().state)) out.feasible = false;
  return out;
}

std::vector<int> decode_states(const Segmentation& seg, std::size_t n) {
  require_tiling(seg, n);
  std::vector<int> states(n);
  for (const Segment& s : seg.segments) {
    std::fill(states.begin() + static_cast<std::ptrdiff_t>(s.start - 1),
              states.begin() + static_cast<std::ptrdiff_t>(s.end), s.state);
  }
  return states;
}

std::string segmentation_to_json(const Segmentation& seg, const ConstraintGraph& g) {
  nlohmann::ordered_json doc;
  doc["segments"] = nlohmann::ordered_json::array();
  for (const Segment& s : seg.segments) {
    doc["segments"].push_back({{"start", s.start}, {"end", s.end}, {"state", g.name(s.state)}, {"mean", s.mean}});
  }
  doc["changes"] = nlohmann::ordered_json::array();
  for (const Change& c : seg.changes) {
    doc["changes"].push_back({{"position", c.position}, {"edge", c.edge}});
  }
  doc["total_cost"] = seg.total_cost;
  return doc.dump(2) + "\n";
}

Segmentation segmentation_from_json(std::string_view json, const ConstraintGraph& g) {
  try {
    const auto doc = nlohmann::json::parse(json);
    Segmentation seg;
    for (const auto& s : doc.at("segments")) {
      const auto name = s.at("state").get<std::string>();
      const auto state = g.find(name);
      if (!state) throw ParseError(0, "unknown state '" + name + "' in segmentation");
      seg.segments.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(), *state,
                              s.at("mean").get<double>()});
    }
    for (const auto& c : doc.at("changes")) {
      seg.changes.push_back({c.at("position").get<std::size_t>(), c.at("edge").get<int>()});
    }
    seg.total_cost = doc.at("total_cost").get<double>();
    return seg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed segmentation document: ") + e.what());
  }
}

}  // namespace gccd
