#include "gccd/ecg.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>

#include "gccd/error.hpp"
#include "gccd/solver.hpp"
#include "text.hpp"

namespace gccd {

SignalFormat guess_format(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? SignalFormat::csv : SignalFormat::plain;
}

namespace {

double parse_sample(std::string_view token, std::size_t line) {
  const auto v = text::parse_number<double>(token);
  if (!v || !std::isfinite(*v)) {
    throw ParseError(line, "not a finite number: '" + std::string(text::trim(token)) + "'");
  }
  return *v;
}

}  // namespace

EcgSignal parse_signal(std::string_view source, SignalFormat format, double fs, std::string record_id) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("sampling rate must be > 0");
  EcgSignal sig;
  sig.fs = fs;
  sig.record_id = std::move(record_id);

  const auto rows = text::lines(source);
  bool header = format == SignalFormat::csv;
  std::optional<double> last_idx;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t line = k + 1;
    const auto row = text::trim(rows[k]);
    if (row.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    if (format == SignalFormat::plain) {
      sig.samples.push_back(parse_sample(row, line));
      continue;
    }
    const auto fields = text::split(row, ",");
    if (fields.size() < 2) throw ParseError(line, "expected idx,value");
    const double idx = parse_sample(fields[0], line);
    if (last_idx && !(idx > *last_idx)) throw ParseError(line, "idx column must be strictly increasing");
    last_idx = idx;
    sig.samples.push_back(parse_sample(fields[1], line));
  }
  if (sig.samples.empty()) throw std::invalid_argument("signal has no samples");
  return sig;
}

EcgSignal load_signal(const std::string& path, SignalFormat format, double fs) {
  return parse_signal(text::read_file(path), format, fs, std::filesystem::path(path).stem().string());
}

RPeakList rpeaks_from_segmentation(const EcgSignal& signal, const Segmentation& seg, const ConstraintGraph& g) {
  const auto r = g.find("R");
  if (!r) throw std::invalid_argument("constraint graph has no state named R");
  const std::vector<int> states = decode_states(seg, signal.samples.size());
  RPeakList peaks;
  std::size_t i = 0;
  while (i < states.size()) {
    if (states[i] != *r) {
      ++i;
      continue;
    }
    std::size_t best = i;
    for (; i < states.size() && states[i] == *r; ++i) {
      if (signal.samples[i] > signal.samples[best]) best = i;
    }
    peaks.indices.push_back(best + 1);
  }
  return peaks;
}

Detection detect(const EcgSignal& signal, const ConstraintGraph& g) {
  if (!g.find("R")) throw std::invalid_argument("constraint graph has no state named R");
  Detection d;
  d.segmentation = solve(signal.samples, g);
  d.peaks = rpeaks_from_segmentation(signal, d.segmentation, g);
  return d;
}

RPeakList detect_rpeaks(const EcgSignal& signal, const ConstraintGraph& g) { return detect(signal, g).peaks; }

namespace {

struct Plateau {
  double seconds;
  double level;
};

}  // namespace

SynthResult synth_ecg(std::size_t n_beats, double fs, const SynthAmplitudes& amp, double noise_sd,
                      std::uint64_t seed) {
  if (n_beats == 0) throw std::invalid_argument("need at least one beat");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be > 0");

  const Plateau beat[] = {{0.20, 0.0}, {0.08, amp.p}, {0.06, 0.0},  {0.03, amp.q}, {0.04, amp.r},
                          {0.03, amp.s}, {0.10, 0.0}, {0.12, amp.t}, {0.14, 0.0}};
  constexpr std::size_t kRIndex = 4;

  SynthResult out;
  out.signal.fs = fs;
  out.signal.record_id = "synthetic";
  auto& y = out.signal.samples;
  for (std::size_t b = 0; b < n_beats; ++b) {
    for (std::size_t k = 0; k < std::size(beat); ++k) {
      const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(beat[k].seconds * fs)));
      if (k != kRIndex) {
        y.insert(y.end(), len, beat[k].level);
        continue;
      }
      const std::size_t apex = len / 2;
      const double half = std::max(1.0, static_cast<double>(len) / 2.0);
      for (std::size_t i = 0; i < len; ++i) {
        const double dist = std::abs(static_cast<double>(i) - static_cast<double>(apex));
        y.push_back(beat[k].level * (1.0 - 0.1 * dist / half));
      }
      out.truth.indices.push_back(y.size() - len + apex + 1);
    }
  }
  if (noise_sd > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (double& v : y) v += noise(rng);
  }
  return out;
}

ConstraintGraph synth_graph(const SynthAmplitudes& amp, double penalty) {
  TemplateGaps gaps;
  const double r_level = 0.95 * amp.r;
  gaps.by_edge = {
      {"B1->P", 0.5 * std::abs(amp.p)},          {"P->B2", 0.5 * std::abs(amp.p)},
      {"B2->Q", 0.5 * std::abs(amp.q)},          {"Q->R", 0.5 * (r_level - amp.q)},
      {"R->S", 0.5 * (r_level - amp.s)},         {"S->B3", 0.5 * std::abs(amp.s)},
      {"B3->T", 0.5 * std::abs(amp.t)},          {"T->B1", 0.5 * std::abs(amp.t)},
  };
  return ecg_template({Wave::P, Wave::Q, Wave::R, Wave::S, Wave::T}, gaps, penalty);
}

}  // namespace gccd
