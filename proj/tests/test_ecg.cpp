#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gccd/ecg.hpp"
#include "gccd/error.hpp"
#include "gccd/solver.hpp"

using namespace gccd;

namespace {

ConstraintGraph two_state(double gap, double penalty) {
  return ecg_template({Wave::R}, TemplateGaps{gap, {}}, penalty);
}

std::size_t parse_error_line(std::string_view text, SignalFormat format) {
  try {
    parse_signal(text, format, 360.0);
  } catch (const ParseError& e) {
    return e.line();
  }
  FAIL("expected a parse error");
  return 0;
}

EcgSignal pulses(std::initializer_list<std::size_t> apexes, std::size_t n) {
  EcgSignal s;
  s.samples.assign(n, 0.0);
  for (std::size_t apex : apexes) {
    const double shape[] = {9.5, 9.8, 10.0, 9.8, 9.5};
    for (std::size_t k = 0; k < 5; ++k) s.samples[apex - 3 + k] = shape[k];  // 1-based apex
  }
  return s;
}

}  // namespace

TEST_CASE("parse plain and csv signals") {
  const EcgSignal a = parse_signal("0.1\n0.2\n0.3", SignalFormat::plain, 360.0, "x");
  CHECK(a.samples == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(a.fs == 360.0);
  CHECK(a.record_id == "x");

  const EcgSignal b = parse_signal("idx,mV\n1,0.1\n2,0.2\n", SignalFormat::csv, 250.0);
  CHECK(b.samples == std::vector<double>{0.1, 0.2});
  CHECK(b.fs == 250.0);

  // Values come back bit-exact; no scaling or detrending.
  const EcgSignal c = parse_signal("-1024.125\n3e-5\n\n7\r\n", SignalFormat::plain, 360.0);
  CHECK(c.samples == std::vector<double>{-1024.125, 3e-5, 7.0});
}

TEST_CASE("signal parse errors") {
  CHECK(parse_error_line("0.1\nabc\n0.3", SignalFormat::plain) == 2);
  CHECK(parse_error_line("0.1\n0.2x\n", SignalFormat::plain) == 2);
  CHECK(parse_error_line("0.1\nnan\n", SignalFormat::plain) == 2);
  CHECK(parse_error_line("idx,mV\n1,0.1\n1,0.2\n", SignalFormat::csv) == 3);
  CHECK(parse_error_line("idx,mV\n1,0.1\n2\n", SignalFormat::csv) == 3);
  CHECK(parse_error_line("idx,mV\n1,zz\n", SignalFormat::csv) == 2);
  CHECK_THROWS_AS(parse_signal("", SignalFormat::plain, 360.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_signal("idx,mV\n", SignalFormat::csv, 360.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_signal("1\n", SignalFormat::plain, 0.0), std::invalid_argument);
}

TEST_CASE("load_signal from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "gccd_test_ecg";
  std::filesystem::create_directories(dir);
  const auto path = dir / "rec7.csv";
  std::ofstream(path) << "idx,mV\n1,0.5\n2,0.25\n";
  CHECK(guess_format(path.string()) == SignalFormat::csv);
  CHECK(guess_format("a.TXT") == SignalFormat::plain);
  const EcgSignal s = load_signal(path.string(), SignalFormat::csv);
  CHECK(s.record_id == "rec7");
  CHECK(s.samples.size() == 2);
  CHECK_THROWS_AS(load_signal((dir / "absent.txt").string(), SignalFormat::plain), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("one pulse gives one peak at its apex") {
  const EcgSignal s = pulses({12}, 25);
  const Detection d = detect(s, two_state(5.0, 1.0));
  CHECK(d.peaks.indices == std::vector<std::size_t>{12});
  const auto states = decode_states(d.segmentation, s.samples.size());
  CHECK(states[11] == 1);
}

TEST_CASE("two pulses give two increasing peaks") {
  const EcgSignal s = pulses({12, 40}, 60);
  CHECK(detect_rpeaks(s, two_state(5.0, 1.0)).indices == std::vector<std::size_t>{12, 40});
}

TEST_CASE("a gap wider than the signal range yields no peaks") {
  EcgSignal s;
  s.samples = {0.0, 0.05, 0.1, 0.02, 0.08, 0.0, 0.03, 0.09, 0.01, 0.04};
  CHECK(detect_rpeaks(s, two_state(1.0, 1.0)).indices.empty());
}

TEST_CASE("peaks lie inside R-labelled samples, leftmost on ties") {
  EcgSignal s;
  s.samples = {0, 0, 0, 5, 7, 7, 5, 0, 0, 0};
  const ConstraintGraph g = two_state(2.0, 1.0);
  const Detection d = detect(s, g);
  REQUIRE(d.peaks.indices.size() == 1);
  CHECK(d.peaks.indices[0] == 5);
  const auto states = decode_states(d.segmentation, s.samples.size());
  for (std::size_t p : d.peaks.indices) CHECK(states[p - 1] == *g.find("R"));
}

TEST_CASE("graphs without R are rejected") {
  ConstraintGraph g;
  g.vertices = {{0, "B"}, {1, "Q"}};
  g.edges = {{1, 0, 1, Direction::down, 1.0, 1.0}, {2, 1, 0, Direction::up, 1.0, 0.0}};
  g.start_states = {0, 1};
  g.end_states = {0, 1};
  EcgSignal s;
  s.samples = {0.0, 1.0};
  CHECK_THROWS_AS(detect_rpeaks(s, g), std::invalid_argument);
}

TEST_CASE("synthetic generator") {
  const SynthAmplitudes amp;
  const SynthResult a = synth_ecg(3, 360.0, amp, 0.0, 1);
  REQUIRE(a.truth.indices.size() == 3);
  const std::size_t period = a.truth.indices[1] - a.truth.indices[0];
  CHECK(a.truth.indices[2] - a.truth.indices[1] == period);
  CHECK(a.signal.samples.size() == 3 * period);
  for (std::size_t p : a.truth.indices) CHECK(a.signal.samples[p - 1] == amp.r);

  const SynthResult b = synth_ecg(3, 360.0, amp, 0.05, 9);
  const SynthResult c = synth_ecg(3, 360.0, amp, 0.05, 9);
  CHECK(b.signal.samples == c.signal.samples);
  CHECK(b.truth == a.truth);
  CHECK(synth_ecg(3, 360.0, amp, 0.05, 10).signal.samples != b.signal.samples);

  CHECK_THROWS_AS(synth_ecg(0, 360.0, amp, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_ecg(1, 360.0, amp, -1.0, 1), std::invalid_argument);
}

TEST_CASE("noiseless synthetic beats are recovered exactly") {
  const SynthAmplitudes amp;
  const ConstraintGraph g = synth_graph(amp, 0.1);
  CHECK(g.num_vertices() == 8);
  for (double fs : {250.0, 360.0, 500.0}) {
    CAPTURE(fs);
    const SynthResult s = synth_ecg(3, fs, amp, 0.0, 0);
    CHECK(detect_rpeaks(s.signal, g) == s.truth);
  }
}
