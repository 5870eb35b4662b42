#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gccd/graph.hpp"
#include "gccd/segmentation.hpp"

namespace gccd {

constexpr double kDefaultFs = 360.0;

// Raw single-lead samples, in the units of the input file (typically mV).
struct EcgSignal {
  std::vector<double> samples;
  double fs = kDefaultFs;
  std::string record_id;
};

// Strictly increasing 1-based sample indices.
struct RPeakList {
  std::vector<std::size_t> indices;
  friend bool operator==(const RPeakList&, const RPeakList&) = default;
};

enum class SignalFormat { plain, csv };

// ".csv" files are csv, anything else plain.
SignalFormat guess_format(const std::string& path);

// plain: one amplitude per line.
// csv:   a header line, then "idx,value" rows with strictly increasing idx.
// Values are returned exactly as written; nothing is filtered or rescaled.
EcgSignal parse_signal(std::string_view text, SignalFormat format, double fs, std::string record_id = {});
EcgSignal load_signal(const std::string& path, SignalFormat format, double fs = kDefaultFs);

struct Detection {
  Segmentation segmentation;
  RPeakList peaks;
};

// One peak per maximal run of samples decoded as state "R": the position of
// the largest raw sample in the run, leftmost on ties.
RPeakList rpeaks_from_segmentation(const EcgSignal& signal, const Segmentation& seg, const ConstraintGraph& g);

// Segments the raw signal with `g` and extracts R peaks. Throws
// std::invalid_argument when g has no state named "R".
Detection detect(const EcgSignal& signal, const ConstraintGraph& g);
RPeakList detect_rpeaks(const EcgSignal& signal, const ConstraintGraph& g);

// Plateau levels of the synthetic beat, relative to a zero baseline.
struct SynthAmplitudes {
  double p = 0.15;
  double q = -0.15;
  double r = 1.0;
  double s = -0.3;
  double t = 0.3;
};

struct SynthResult {
  EcgSignal signal;
  RPeakList truth;  // R apex of every beat
};

// Piecewise-constant beats (baseline, P, baseline, Q, R, S, baseline, T,
// baseline) of 0.8 s each plus Gaussian noise. The R plateau has a shallow
// triangular apex so each beat has a unique true peak. Deterministic per seed.
SynthResult synth_ecg(std::size_t n_beats, double fs, const SynthAmplitudes& amplitudes, double noise_sd,
                      std::uint64_t seed);

// The full PQRST template with each gap set to half the plateau step it guards.
ConstraintGraph synth_graph(const SynthAmplitudes& amplitudes, double penalty);

}  // namespace gccd
