#include "gccd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gccd/ecg.hpp"
#include "gccd/error.hpp"
#include "gccd/eval.hpp"
#include "gccd/graph.hpp"
#include "gccd/oracle.hpp"
#include "gccd/solver.hpp"
#include "text.hpp"

namespace gccd {

namespace {

namespace fs = std::filesystem;

// Template gap when none is given: a fraction of the signal's peak-to-peak range.
constexpr double kTemplateGapFraction = 0.3;

struct GraphOptions {
  std::string graph_path;
  std::string waves;
  std::string manifest_path;
  std::optional<double> gap;
  std::optional<double> penalty;
};

struct InputOptions {
  double fs = kDefaultFs;
  std::string input_format = "auto";
};

void add_graph_options(CLI::App* cmd, GraphOptions& g) {
  cmd->add_option("--graph", g.graph_path, "Constraint graph file");
  cmd->add_option("--template", g.waves, "Build an ECG template graph from waves, e.g. R or PQRST");
  cmd->add_option("--manifest", g.manifest_path, "File mapping record ids to graph files");
  cmd->add_option("--gap", g.gap, "Gap for every edge (template default: 0.3 x peak-to-peak)");
  cmd->add_option("--penalty", g.penalty, "Penalty for every penalized edge (template default: 1)");
}

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--fs", in.fs, "Sampling rate in Hz")->capture_default_str();
  cmd->add_option("--input-format", in.input_format, "plain, csv or auto (by extension)")
      ->check(CLI::IsMember({"auto", "plain", "csv"}))
      ->capture_default_str();
}

EcgSignal read_signal(const std::string& path, const InputOptions& in) {
  const SignalFormat format = in.input_format == "auto"  ? guess_format(path)
                              : in.input_format == "csv" ? SignalFormat::csv
                                                         : SignalFormat::plain;
  return load_signal(path, format, in.fs);
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::map<std::string, std::string> out;
  const std::string body = text::read_file(path);
  const fs::path base = fs::path(path).parent_path();
  const auto rows = text::lines(body);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto tokens = text::split(text::strip_comment(rows[k]), " \t\r");
    if (tokens.empty()) continue;
    if (tokens.size() != 2) throw ParseError(k + 1, "manifest: expected <record> <graph file>");
    fs::path graph(tokens[1]);
    if (graph.is_relative()) graph = base / graph;
    if (!out.emplace(std::string(tokens[0]), graph.string()).second) {
      throw ParseError(k + 1, "manifest: duplicate record '" + std::string(tokens[0]) + "'");
    }
  }
  return out;
}

void check_override(const std::optional<double>& v, const char* what) {
  if (v && (!(*v >= 0.0) || !std::isfinite(*v))) {
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

class GraphSource {
 public:
  explicit GraphSource(const GraphOptions& opt) : opt_(opt) {
    const int given = !opt.graph_path.empty() + !opt.waves.empty() + !opt.manifest_path.empty();
    if (given != 1) throw std::invalid_argument("give exactly one of --graph, --template, --manifest");
    check_override(opt.gap, "--gap");
    check_override(opt.penalty, "--penalty");
    if (!opt.manifest_path.empty()) manifest_ = read_manifest(opt.manifest_path);
    if (!opt.graph_path.empty()) fixed_ = with_overrides(load_graph(opt.graph_path));
  }

  ConstraintGraph for_signal(const EcgSignal& sig) const {
    if (fixed_) return *fixed_;
    if (!opt_.waves.empty()) {
      TemplateGaps gaps;
      if (opt_.gap) {
        gaps.fallback = *opt_.gap;
      } else {
        const auto [lo, hi] = std::minmax_element(sig.samples.begin(), sig.samples.end());
        gaps.fallback = kTemplateGapFraction * (*hi - *lo);
      }
      return ecg_template(parse_waves(opt_.waves), gaps, opt_.penalty.value_or(1.0));
    }
    const auto it = manifest_.find(sig.record_id);
    if (it == manifest_.end()) throw ParseError(0, "record '" + sig.record_id + "' is not in the manifest");
    return with_overrides(load_graph(it->second));
  }

 private:
  ConstraintGraph with_overrides(ConstraintGraph g) const {
    for (Edge& e : g.edges) {
      if (opt_.gap) e.gap = *opt_.gap;
      if (opt_.penalty && e.penalty > 0.0) e.penalty = *opt_.penalty;
    }
    return g;
  }

  GraphOptions opt_;
  std::map<std::string, std::string> manifest_;
  std::optional<ConstraintGraph> fixed_;
};

void emit(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << body;
  } else {
    text::write_file_atomic(path, body);
  }
}

std::string segments_text(const Segmentation& seg, const ConstraintGraph& g) {
  std::string s = "start\tend\tstate\tmean\n";
  for (const Segment& x : seg.segments) {
    s += std::to_string(x.start) + "\t" + std::to_string(x.end) + "\t" + g.name(x.state) + "\t" +
         text::format_double(x.mean) + "\n";
  }
  s += "# total_cost\t" + text::format_double(seg.total_cost) + "\n";
  return s;
}

std::string fitted_text(const Segmentation& seg, const ConstraintGraph& g) {
  std::string s = "index\tstate\tmean\n";
  for (const Segment& x : seg.segments) {
    const std::string tail = "\t" + g.name(x.state) + "\t" + text::format_double(x.mean) + "\n";
    for (std::size_t i = x.start; i <= x.end; ++i) s += std::to_string(i) + tail;
  }
  return s;
}

struct SegmentCmd {
  std::string signal;
  GraphOptions graph;
  InputOptions input;
  std::string out;
  std::string format = "json";
  std::string fitted;

  int run(std::ostream& out_stream) const {
    const EcgSignal sig = read_signal(signal, input);
    const ConstraintGraph g = GraphSource(graph).for_signal(sig);
    const Segmentation seg = solve(sig.samples, g);
    emit(out, format == "json" ? segmentation_to_json(seg, g) : segments_text(seg, g), out_stream);
    if (!fitted.empty()) text::write_file_atomic(fitted, fitted_text(seg, g));
    return kExitOk;
  }
};

struct DetectCmd {
  std::vector<std::string> signals;
  GraphOptions graph;
  InputOptions input;
  std::string out;

  int run() const {
    const GraphSource source(graph);
    const bool batch = signals.size() > 1 || !graph.manifest_path.empty();
    if (batch) {
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) throw IoError("cannot create output directory " + out);
    }
    for (const std::string& path : signals) {
      const EcgSignal sig = read_signal(path, input);
      const ConstraintGraph g = source.for_signal(sig);
      const Detection d = detect(sig, g);
      const std::string peaks_path = batch ? (fs::path(out) / (sig.record_id + ".peaks")).string() : out;
      text::write_file_atomic(peaks_path, format_peaks(d.peaks));
      text::write_file_atomic(peaks_path + ".segments.json", segmentation_to_json(d.segmentation, g));
    }
    return kExitOk;
  }
};

struct EvalCmd {
  std::vector<std::string> detected;
  std::vector<std::string> reference;
  double tol_ms = kDefaultToleranceMs;
  double fs = kDefaultFs;
  std::string match = "optimal";
  std::string format = "text";
  std::string out;
  std::string json_out;

  int run(std::ostream& out_stream) const {
    if (detected.size() != reference.size()) {
      throw ParseError(0, "got " + std::to_string(detected.size()) + " detection files but " +
                              std::to_string(reference.size()) + " reference files");
    }
    const std::size_t tol = tolerance_samples(tol_ms, fs);
    const MatchRule rule = match == "greedy" ? MatchRule::greedy : MatchRule::optimal;
    std::vector<MetricsRow> rows;
    for (std::size_t k = 0; k < detected.size(); ++k) {
      const std::string id = fs::path(detected[k]).stem().string();
      const std::string ref_id = fs::path(reference[k]).stem().string();
      if (id != ref_id) throw ParseError(0, "record lists do not line up: '" + id + "' vs '" + ref_id + "'");
      rows.push_back(make_row(id, match_peaks(load_annotations(detected[k]), load_annotations(reference[k]), tol, rule)));
    }
    const MetricsRow total = aggregate(rows);
    emit(out, format == "json" ? json_report(rows, total) : text_report(rows, total), out_stream);
    if (!json_out.empty()) text::write_file_atomic(json_out, json_report(rows, total));
    return kExitOk;
  }
};

struct SynthCmd {
  std::size_t beats = 10;
  double fs = kDefaultFs;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string out = "synthetic";
  std::string graph_out;
  double penalty = 0.1;

  int run() const {
    if (beats == 0) throw std::invalid_argument("--beats must be >= 1");
    const SynthAmplitudes amp;
    const SynthResult s = synth_ecg(beats, fs, amp, noise, seed);
    std::string body;
    for (double v : s.signal.samples) body += text::format_double(v) + "\n";
    text::write_file_atomic(out + ".txt", body);
    text::write_file_atomic(out + ".peaks", format_peaks(s.truth));
    if (!graph_out.empty()) text::write_file_atomic(graph_out, serialize(synth_graph(amp, penalty)));
    return kExitOk;
  }
};

struct GraphValidateCmd {
  std::string path;

  int run(std::ostream& out) const {
    // parse_graph rejects structural errors itself; what remains are warnings.
    const ConstraintGraph g = load_graph(path);
    const auto diagnostics = validate(g);
    for (const Diagnostic& d : diagnostics) {
      out << (d.severity == Severity::error ? "error: " : "warning: ") << d.message << "\n";
    }
    out << g.num_vertices() << " states, " << g.edges.size() << " edges\n";
    return has_errors(diagnostics) ? kExitParse : kExitOk;
  }
};

struct GraphTemplateCmd {
  std::string waves = "R";
  double gap = 0.5;
  double penalty = 1.0;
  std::string out;

  int run(std::ostream& out_stream) const {
    emit(out, serialize(ecg_template(parse_waves(waves), TemplateGaps{gap, {}}, penalty)), out_stream);
    return kExitOk;
  }
};

struct OracleCmd {
  std::string signal;
  std::string graph;
  InputOptions input;
  double step = 0.01;

  int run(std::ostream& out) const {
    const EcgSignal sig = read_signal(signal, input);
    const ConstraintGraph g = load_graph(graph);
    OracleConfig cfg;
    cfg.mean_grid_step = step;
    const OracleResult r = oracle_solve(sig.samples, g, cfg);
    nlohmann::ordered_json doc;
    doc["cost"] = r.cost;
    doc["grid_bound"] = r.grid_bound;
    doc["segmentation"] = nlohmann::ordered_json::parse(segmentation_to_json(r.segmentation, g));
    out << doc.dump(2) << "\n";
    return kExitOk;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-constrained changepoint detection and R-peak evaluation", "gccd"};
  app.require_subcommand(1);

  SegmentCmd segment;
  auto* seg_cmd = app.add_subcommand("segment", "Segment a signal, write the optimal segmentation");
  seg_cmd->add_option("signal", segment.signal, "Signal file")->required();
  add_graph_options(seg_cmd, segment.graph);
  add_input_options(seg_cmd, segment.input);
  seg_cmd->add_option("--out", segment.out, "Output path (default stdout)");
  seg_cmd->add_option("--format", segment.format, "json or text")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  seg_cmd->add_option("--fitted", segment.fitted, "Also write per-sample state and mean");

  DetectCmd detect_cmd;
  auto* det = app.add_subcommand("detect", "Detect R peaks (one index per line) plus a segmentation sidecar");
  det->add_option("signals", detect_cmd.signals, "Signal files")->required();
  add_graph_options(det, detect_cmd.graph);
  add_input_options(det, detect_cmd.input);
  det->add_option("--out", detect_cmd.out, "Peak file, or a directory for several records")->required();

  EvalCmd eval;
  auto* ev = app.add_subcommand("eval", "Score detections against reference annotations");
  ev->add_option("--detected", eval.detected, "Detected peak files")->required();
  ev->add_option("--reference", eval.reference, "Reference annotation files, same order")->required();
  ev->add_option("--tol-ms", eval.tol_ms, "Matching window in ms")->capture_default_str();
  ev->add_option("--fs", eval.fs, "Sampling rate in Hz")->capture_default_str();
  ev->add_option("--match", eval.match, "optimal or greedy")
      ->check(CLI::IsMember({"optimal", "greedy"}))
      ->capture_default_str();
  ev->add_option("--format", eval.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  ev->add_option("--out", eval.out, "Output path (default stdout)");
  ev->add_option("--json-out", eval.json_out, "Also write the JSON report here");

  SynthCmd synth;
  auto* syn = app.add_subcommand("synth", "Write a synthetic ECG (<out>.txt) and its true R peaks (<out>.peaks)");
  syn->add_option("--beats", synth.beats, "Number of beats")->capture_default_str();
  syn->add_option("--fs", synth.fs, "Sampling rate in Hz")->capture_default_str();
  syn->add_option("--noise", synth.noise, "Gaussian noise sd (signal units)")->capture_default_str();
  syn->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  syn->add_option("--out", synth.out, "Output prefix")->capture_default_str();
  syn->add_option("--graph-out", synth.graph_out, "Also write the matching PQRST graph");
  syn->add_option("--penalty", synth.penalty, "Penalty used in --graph-out")->capture_default_str();

  auto* graph = app.add_subcommand("graph", "Constraint graph utilities");
  graph->require_subcommand(1);
  GraphValidateCmd validate_cmd;
  auto* val = graph->add_subcommand("validate", "Check a graph file");
  val->add_option("file", validate_cmd.path, "Graph file")->required();
  GraphTemplateCmd template_cmd;
  auto* tpl = graph->add_subcommand("template", "Print an ECG template graph");
  tpl->add_option("--waves", template_cmd.waves, "Waves, e.g. R or PQRST")->capture_default_str();
  tpl->add_option("--gap", template_cmd.gap, "Gap for every edge")->capture_default_str();
  tpl->add_option("--penalty", template_cmd.penalty, "Penalty on wave-entry edges")->capture_default_str();
  tpl->add_option("--out", template_cmd.out, "Output path (default stdout)");

  OracleCmd oracle;
  auto* orc = app.add_subcommand("oracle", "Brute-force grid solver for tiny inputs");
  orc->group("");
  orc->add_option("signal", oracle.signal, "Signal file")->required();
  orc->add_option("--graph", oracle.graph, "Constraint graph file")->required();
  orc->add_option("--step", oracle.step, "Mean grid step")->capture_default_str();
  add_input_options(orc, oracle.input);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*seg_cmd) return segment.run(out);
    if (*det) return detect_cmd.run();
    if (*ev) return eval.run(out);
    if (*syn) return synth.run();
    if (*val) return validate_cmd.run(out);
    if (*tpl) return template_cmd.run(out);
    if (*orc) return oracle.run(out);
  } catch (const ParseError& e) {
    err << "gccd: " << e.what() << "\n";
    return kExitParse;
  } catch (const InfeasibleError& e) {
    err << "gccd: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "gccd: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "gccd: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}

}  // namespace gccd
