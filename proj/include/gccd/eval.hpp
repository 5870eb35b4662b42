#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gccd/ecg.hpp"

namespace gccd {

constexpr double kDefaultToleranceMs = 150.0;

enum class MatchRule {
  // Walk both lists; a candidate pair is skipped when the next detection (or
  // reference) is strictly closer. Cheap, but not always maximal.
  greedy,
  // Maximum number of pairs, then minimum total |offset|.
  optimal,
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (detected, reference)
};

// One-to-one matching of detections to references within `tol` samples.
// Throws std::invalid_argument unless both lists are strictly increasing.
MatchResult match_peaks(const RPeakList& detected, const RPeakList& reference, std::size_t tol,
                        MatchRule rule = MatchRule::optimal);

std::size_t tolerance_samples(double tol_ms, double fs);

// Percentages; nullopt where the denominator is zero.
std::optional<double> sensitivity(std::size_t tp, std::size_t fn);
std::optional<double> ppr(std::size_t tp, std::size_t fp);
std::optional<double> der(std::size_t tp, std::size_t fp, std::size_t fn);

struct MetricsRow {
  std::string record_id;
  std::size_t total_beats = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::optional<double> sen;
  std::optional<double> ppr;
  std::optional<double> der;
};

MetricsRow make_row(std::string record_id, std::size_t total_beats, std::size_t tp, std::size_t fp, std::size_t fn);
// total_beats is the reference count.
MetricsRow make_row(std::string record_id, const MatchResult& m);
// Sums the counts and recomputes the percentages from the sums.
MetricsRow aggregate(std::span<const MetricsRow> rows, std::string record_id = "Total");

// 100 * num / den truncated (not rounded) to two decimals, e.g. "99.88",
// "0.50"; whole numbers print bare ("100", "0"). nullopt when den == 0.
std::optional<std::string> format_percent(std::size_t num, std::size_t den);

// Fixed-width table with a Total row; undefined metrics print as an em dash.
std::string text_report(std::span<const MetricsRow> rows, const MetricsRow& total);
// Full-precision JSON: {"records": [...], "total": {...}}; undefined metrics are null.
std::string json_report(std::span<const MetricsRow> rows, const MetricsRow& total);

// One 1-based sample index per line, strictly increasing. Empty input is an
// empty list. Throws ParseError on anything else.
RPeakList parse_annotations(std::string_view text);
RPeakList load_annotations(const std::string& path);
std::string format_peaks(const RPeakList& peaks);

}  // namespace gccd
