#include "gccd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "gccd/error.hpp"
#include "text.hpp"

namespace gccd {

namespace {

void require_increasing(const RPeakList& peaks, const char* what) {
  for (std::size_t k = 1; k < peaks.indices.size(); ++k) {
    if (peaks.indices[k] <= peaks.indices[k - 1]) {
      throw std::invalid_argument(std::string(what) + " peaks are not strictly increasing");
    }
  }
}

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

MatchResult match_greedy(const std::vector<std::size_t>& det, const std::vector<std::size_t>& ref, std::size_t tol) {
  MatchResult m;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < det.size() && j < ref.size()) {
    const std::size_t d = det[i];
    const std::size_t r = ref[j];
    if (d + tol < r) {
      ++m.fp;
      ++i;
    } else if (r + tol < d) {
      ++m.fn;
      ++j;
    } else if (i + 1 < det.size() && distance(det[i + 1], r) < distance(d, r)) {
      ++m.fp;
      ++i;
    } else if (j + 1 < ref.size() && distance(ref[j + 1], d) < distance(d, r)) {
      ++m.fn;
      ++j;
    } else {
      m.pairs.emplace_back(d, r);
      ++i;
      ++j;
    }
  }
  m.fp += det.size() - i;
  m.fn += ref.size() - j;
  m.tp = m.pairs.size();
  return m;
}

// Pairs can only form inside runs of the merged, sorted lists whose
// consecutive elements are within tol, so each run is matched on its own.
void match_cluster(std::span<const std::size_t> det, std::span<const std::size_t> ref, std::size_t tol,
                   MatchResult& out) {
  const std::size_t nd = det.size();
  const std::size_t nr = ref.size();
  struct Score {
    std::size_t pairs = 0;
    std::size_t offset = 0;
    bool better(const Score& o) const { return pairs != o.pairs ? pairs > o.pairs : offset < o.offset; }
  };
  // best[i][j]: optimum over det[i..] and ref[j..].
  std::vector<std::vector<Score>> best(nd + 1, std::vector<Score>(nr + 1));
  for (std::size_t i = nd + 1; i-- > 0;) {
    for (std::size_t j = nr + 1; j-- > 0;) {
      if (i == nd || j == nr) continue;
      Score s = best[i + 1][j];
      if (best[i][j + 1].better(s)) s = best[i][j + 1];
      if (distance(det[i], ref[j]) <= tol) {
        Score take = best[i + 1][j + 1];
        take.pairs += 1;
        take.offset += distance(det[i], ref[j]);
        if (!s.better(take)) s = take;
      }
      best[i][j] = s;
    }
  }
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < nd && j < nr) {
    const Score& here = best[i][j];
    if (distance(det[i], ref[j]) <= tol) {
      Score take = best[i + 1][j + 1];
      take.pairs += 1;
      take.offset += distance(det[i], ref[j]);
      if (take.pairs == here.pairs && take.offset == here.offset) {
        out.pairs.emplace_back(det[i], ref[j]);
        ++i;
        ++j;
        continue;
      }
    }
    const Score& skip_det = best[i + 1][j];
    if (skip_det.pairs == here.pairs && skip_det.offset == here.offset) {
      ++i;
    } else {
      ++j;
    }
  }
}

MatchResult match_optimal(const std::vector<std::size_t>& det, const std::vector<std::size_t>& ref, std::size_t tol) {
  MatchResult m;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < det.size() || j < ref.size()) {
    const std::size_t i0 = i;
    const std::size_t j0 = j;
    std::size_t last = 0;
    bool first = true;
    // Grow the run while the next element (from either list) is within tol of the previous one.
    while (i < det.size() || j < ref.size()) {
      const bool take_det = j == ref.size() || (i < det.size() && det[i] <= ref[j]);
      const std::size_t v = take_det ? det[i] : ref[j];
      if (!first && v > last + tol) break;
      first = false;
      last = v;
      (take_det ? i : j)++;
    }
    match_cluster(std::span(det).subspan(i0, i - i0), std::span(ref).subspan(j0, j - j0), tol, m);
  }
  m.tp = m.pairs.size();
  m.fp = det.size() - m.tp;
  m.fn = ref.size() - m.tp;
  return m;
}

std::optional<double> percent(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MatchResult match_peaks(const RPeakList& detected, const RPeakList& reference, std::size_t tol, MatchRule rule) {
  require_increasing(detected, "detected");
  require_increasing(reference, "reference");
  return rule == MatchRule::greedy ? match_greedy(detected.indices, reference.indices, tol)
                                   : match_optimal(detected.indices, reference.indices, tol);
}

std::size_t tolerance_samples(double tol_ms, double fs) {
  if (!(tol_ms >= 0.0) || !std::isfinite(tol_ms)) throw std::invalid_argument("tolerance must be >= 0");
  return static_cast<std::size_t>(std::floor(tol_ms * fs / 1000.0 + 1e-9));
}

std::optional<double> sensitivity(std::size_t tp, std::size_t fn) { return percent(tp, tp + fn); }
std::optional<double> ppr(std::size_t tp, std::size_t fp) { return percent(tp, tp + fp); }
std::optional<double> der(std::size_t tp, std::size_t fp, std::size_t fn) { return percent(fp + fn, tp + fn); }

MetricsRow make_row(std::string record_id, std::size_t total_beats, std::size_t tp, std::size_t fp, std::size_t fn) {
  return {std::move(record_id), total_beats, tp, fp, fn, sensitivity(tp, fn), ppr(tp, fp), der(tp, fp, fn)};
}

MetricsRow make_row(std::string record_id, const MatchResult& m) {
  return make_row(std::move(record_id), m.tp + m.fn, m.tp, m.fp, m.fn);
}

MetricsRow aggregate(std::span<const MetricsRow> rows, std::string record_id) {
  if (rows.empty()) throw std::invalid_argument("nothing to aggregate");
  std::size_t beats = 0, tp = 0, fp = 0, fn = 0;
  for (const MetricsRow& r : rows) {
    beats += r.total_beats;
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
  }
  return make_row(std::move(record_id), beats, tp, fp, fn);
}

std::optional<std::string> format_percent(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  const auto hundredths = static_cast<unsigned long long>(num) * 10000ULL / den;
  if (hundredths % 100 == 0) return std::to_string(hundredths / 100);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%llu.%02llu", hundredths / 100, hundredths % 100);
  return std::string(buf);
}

std::string text_report(std::span<const MetricsRow> rows, const MetricsRow& total) {
  static const char* const kDash = "—";
  auto cell = [](const std::optional<std::string>& s) { return s.value_or(kDash); };
  std::string out;
  char buf[256];
  auto line = [&](const MetricsRow& r) {
    std::snprintf(buf, sizeof buf, "%-10s %12zu %10zu %8zu %8zu %9s %9s %9s\n", r.record_id.c_str(), r.total_beats,
                  r.tp, r.fp, r.fn, cell(format_percent(r.tp, r.tp + r.fn)).c_str(),
                  cell(format_percent(r.tp, r.tp + r.fp)).c_str(),
                  cell(format_percent(r.fp + r.fn, r.tp + r.fn)).c_str());
    out += buf;
  };
  std::snprintf(buf, sizeof buf, "%-10s %12s %10s %8s %8s %9s %9s %9s\n", "Record", "Total beats", "TP", "FP", "FN",
                "Sen (%)", "PPR (%)", "DER (%)");
  out += buf;
  for (const MetricsRow& r : rows) line(r);
  out += std::string(82, '-') + "\n";
  line(total);
  return out;
}

std::string json_report(std::span<const MetricsRow> rows, const MetricsRow& total) {
  auto row = [](const MetricsRow& r) {
    nlohmann::ordered_json j;
    j["record"] = r.record_id;
    j["total_beats"] = r.total_beats;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    auto metric = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    j["sen"] = metric(r.sen);
    j["ppr"] = metric(r.ppr);
    j["der"] = metric(r.der);
    return j;
  };
  nlohmann::ordered_json doc;
  doc["records"] = nlohmann::ordered_json::array();
  for (const MetricsRow& r : rows) doc["records"].push_back(row(r));
  doc["total"] = row(total);
  return doc.dump(2) + "\n";
}

RPeakList parse_annotations(std::string_view source) {
  RPeakList peaks;
  const auto rows = text::lines(source);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto row = text::trim(rows[k]);
    if (row.empty()) continue;
    const auto v = text::parse_number<std::size_t>(row);
    if (!v) throw ParseError(k + 1, "not a sample index: '" + std::string(row) + "'");
    if (*v == 0) throw ParseError(k + 1, "sample indices are 1-based");
    if (!peaks.indices.empty() && *v <= peaks.indices.back()) {
      throw ParseError(k + 1, "annotations must be strictly increasing");
    }
    peaks.indices.push_back(*v);
  }
  return peaks;
}

RPeakList load_annotations(const std::string& path) { return parse_annotations(text::read_file(path)); }

std::string format_peaks(const RPeakList& peaks) {
  std::string out;
  for (std::size_t i : peaks.indices) out += std::to_string(i) + "\n";
  return out;
}

}  // namespace gccd
