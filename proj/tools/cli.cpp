#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyncal/calibrator.hpp"
#include "dyncal/diversity.hpp"
#include "dyncal/error.hpp"
#include "dyncal/estimator.hpp"
#include "dyncal/io.hpp"
#include "dyncal/kernels.hpp"
#include "dyncal/schedule.hpp"
#include "dyncal/synth.hpp"
#include "dyncal/weights.hpp"

namespace dyncal::cli {

namespace {

constexpr const char* kMotionHelp =
    "motion source: gen:<active|calm|static> or file:<path.jsonl> (a bare path is a file)";

constexpr const char* kScheduleHelp =
    "drift schedule: 'identity' or ';'-separated terms\n"
    "  const:sensor=S,param=P,x=DEG,y=DEG,z=DEG\n"
    "  step:sensor=S,param=P,frame=F,axis=A,deg=DEG\n"
    "  ramp:sensor=S,param=P,axis=A,rate=DEG_PER_S[,start=F][,end=F]\n"
    "S: index|all|nonroot (default nonroot), P: drift|offset (default drift), A: x|y|z";

// Samples drawn from one generated motion segment in `synth`.
constexpr int kSamplesPerMotion = 8;

std::uint64_t default_seed() {
  const char* env = std::getenv("TIC_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("TIC_SEED is not an integer: ") + env);
  return v;
}

struct MotionSource {
  std::string text = "gen:active";
  double duration_s = 60.0;
  double rate_hz = 30.0;
};

MotionSequence load_source(const MotionSource& src, std::uint64_t seed) {
  const std::string& s = src.text;
  if (s.rfind("gen:", 0) == 0) {
    MotionSpec spec = MotionSpec::preset(s.substr(4));
    spec.duration_s = src.duration_s;
    spec.rate_hz = src.rate_hz;
    return gen_motion(spec, seed);
  }
  const std::string path = s.rfind("file:", 0) == 0 ? s.substr(5) : s;
  return load_motion(path, src.rate_hz);
}

void add_motion_options(CLI::App* cmd, MotionSource& src) {
  cmd->add_option("--motion", src.text, kMotionHelp)->capture_default_str();
  cmd->add_option("--duration", src.duration_s, "seconds of generated motion")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rate", src.rate_hz, "sampling rate in Hz")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  return f;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::size_t count = 100;
  MotionSource motion{"gen:active", 20.0, 30.0};
  std::uint64_t seed = 0;
  int window = kDefaultWindowLength;
  bool no_leakage = false;
  double offset_deg = 45.0;
  double drift_tilt_deg = 20.0;
  double drift_yaw_deg = 60.0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  ParamDistribution dist;
  dist.offset = AxisBounds::symmetric(a.offset_deg, a.offset_deg, a.offset_deg);
  dist.drift_root = AxisBounds::symmetric(a.drift_tilt_deg, 0.0, a.drift_tilt_deg);
  dist.drift_nonroot = AxisBounds::symmetric(a.drift_tilt_deg, a.drift_yaw_deg, a.drift_tilt_deg);
  dist.validate();

  const bool generated = a.motion.text.rfind("gen:", 0) == 0;
  MotionSequence motion;
  if (!generated) motion = load_source(a.motion, a.seed);

  std::vector<TrainingSample> samples;
  samples.reserve(a.count);
  std::size_t sensors = generated ? kDefaultSensorCount : motion.sensor_count();
  for (std::size_t i = 0; i < a.count; ++i) {
    if (generated && i % kSamplesPerMotion == 0)
      motion = load_source(a.motion, mix_seed(a.seed, 0x100000000ULL + i / kSamplesPerMotion));
    if (motion.size() < static_cast<std::size_t>(a.window))
      throw DataError("motion has " + std::to_string(motion.size()) + " frames, shorter than the window");
    sensors = motion.sensor_count();
    std::mt19937_64 rng(mix_seed(a.seed, 0x200000000ULL + i));
    const std::size_t start = rng() % (motion.size() - a.window + 1);
    samples.push_back(make_sample(motion, start, dist, mix_seed(a.seed, i), !a.no_leakage,
                                  kDefaultRootIndex, a.window));
  }
  write_dataset(samples, static_cast<std::uint32_t>(sensors), static_cast<std::uint32_t>(a.window),
                a.out);

  out << "samples: " << samples.size() << "\n";
  if (samples.empty()) return kExitOk;
  out << "sensor,rd_min,rd_median,rd_max\n";
  std::vector<Rotation> seq(a.window);
  for (std::size_t s = 0; s < sensors; ++s) {
    std::vector<int> rds;
    rds.reserve(samples.size());
    for (const TrainingSample& smp : samples) {
      for (int t = 0; t < a.window; ++t) seq[t] = smp.window[t].sensors[s].orientation;
      rds.push_back(rotation_diversity(seq));
    }
    std::sort(rds.begin(), rds.end());
    out << sensor_name(static_cast<int>(s)) << ',' << rds.front() << ',' << rds[rds.size() / 2]
        << ',' << rds.back() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  MotionSource motion;
  std::uint64_t seed = 0;
  std::string schedule = "identity";
  std::string estimator = "oracle";
  std::string weights;
  int n = 256;
  double t_interval = 1.0;
  std::vector<int> thresholds;
  bool no_trigger = false;
  std::string buffer = "clear";
  bool no_leakage = false;
  bool gravity_refinement = false;
  std::string out;
  std::string calibrated_out;
};

std::shared_ptr<const Estimator> make_estimator(const SimulateArgs& a) {
  if (a.estimator == "oracle") return std::make_shared<OracleEstimator>();
  if (a.estimator == "procrustes") {
    ProcrustesOptions opts;
    opts.gravity_refinement = a.gravity_refinement;
    return std::make_shared<ProcrustesEstimator>(opts);
  }
  if (a.weights.empty()) throw ConfigError("--estimator tic needs --weights");
  auto net = std::make_shared<const TicNetwork>(load_weights(a.weights));
  return std::make_shared<TicEstimator>(std::move(net));
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const DriftSchedule schedule = DriftSchedule::parse(a.schedule);
  auto estimator = make_estimator(a);
  const MotionSequence motion = load_source(a.motion, a.seed);
  if (motion.frames.empty()) throw DataError("no frames");

  CalibratorConfig cfg;
  cfg.n = a.n;
  cfg.t_interval = a.t_interval;
  cfg.rate_hz = motion.rate_hz;
  cfg.buffer_policy = a.buffer == "sliding" ? BufferPolicy::kSliding : BufferPolicy::kClear;
  if (a.no_trigger) cfg.trigger = TriggerConfig::disabled(motion.sensor_count());
  else if (!a.thresholds.empty()) cfg.trigger.thresholds = a.thresholds;

  SimulationOptions opts;
  opts.leakage = !a.no_leakage;
  MotionSequence calibrated;
  calibrated.rate_hz = motion.rate_hz;
  if (!a.calibrated_out.empty()) opts.calibrated = &calibrated.frames;
  const MetricsReport report = run_simulation(motion, schedule, cfg, estimator, opts);

  if (a.out.empty() || a.out == "-") {
    write_metrics_csv(report, out);
  } else {
    std::ofstream f = open_out(a.out);
    write_metrics_csv(report, f);
  }
  if (!a.calibrated_out.empty()) save_motion(calibrated, a.calibrated_out);

  int updates = 0, failures = 0;
  for (const TriggerEvent& ev : report.events) {
    failures += ev.failed;
    for (bool u : ev.updated) updates += u;
  }
  err << "frames: " << report.frames << ", passes: " << report.events.size()
      << ", sensor updates: " << updates << ", failed passes: " << failures
      << ", mean OME: " << fmt(report.mean_ome()) << " deg\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RdArgs {
  MotionSource motion;
  std::uint64_t seed = 0;
  int window = kDefaultWindowLength;
  std::string format = "table";
};

int cmd_rd(const RdArgs& a, std::ostream& out) {
  const MotionSequence motion = load_source(a.motion, a.seed);
  const std::size_t sensors = motion.sensor_count();
  const std::size_t windows = motion.size() / a.window;
  const bool csv = a.format == "csv";
  const int w = 8;

  out << (csv ? "window,start" : "window   start");
  for (std::size_t s = 0; s < sensors; ++s) {
    const std::string name(sensor_name(static_cast<int>(s)));
    if (csv) out << ',' << name;
    else out << ' ' << std::setw(16) << name;
  }
  out << "\n";
  std::vector<Rotation> seq(a.window);
  for (std::size_t k = 0; k < windows; ++k) {
    const std::size_t start = k * a.window;
    if (csv) out << k << ',' << start;
    else out << std::left << std::setw(w) << k << ' ' << std::setw(w - 2) << start << std::right;
    for (std::size_t s = 0; s < sensors; ++s) {
      for (int t = 0; t < a.window; ++t) seq[t] = motion.frames[start + t].sensors[s].orientation;
      const int rd = rotation_diversity(seq);
      if (csv) out << ',' << rd;
      else out << ' ' << std::setw(16) << rd;
    }
    out << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string calibrated;
  std::string truth;
  int root = kDefaultRootIndex;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const MotionSequence cal = load_motion(a.calibrated);
  const MotionSequence gt = load_motion(a.truth);
  const EvalSummary sum = evaluate_streams(cal.frames, gt.frames, a.root);
  out << "sensor,ome_deg,ame_ms2\n";
  for (std::size_t s = 0; s < sum.sensors.size(); ++s) {
    out << sensor_name(static_cast<int>(s)) << ',' << fmt(sum.sensors[s].mean_ome_deg) << ','
        << fmt(sum.sensors[s].mean_ame_ms2) << "\n";
  }
  out << "average," << fmt(sum.average.mean_ome_deg) << ',' << fmt(sum.average.mean_ame_ms2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::string flag_names(std::uint8_t flags) {
  std::string s;
  auto add = [&](const char* n) { s += s.empty() ? n : std::string(", ") + n; };
  if (flags & kFlagPositionalEncoding) add("positional-encoding");
  add(flags & kFlagPreNorm ? "pre-norm" : "post-norm");
  add(flags & kFlagGeluTanh ? "gelu-tanh" : "gelu-erf");
  return s;
}

int cmd_weights_inspect(const std::string& path, std::ostream& out) {
  const WeightBundle w = load_weights(path);
  const TicDims d = validate_weights(w);
  std::uint64_t params = 0;
  for (const NamedTensor& t : w.tensors()) params += t.tensor.numel();
  out << "flags: 0x" << std::hex << std::setw(2) << std::setfill('0') << int(w.flags) << std::dec
      << std::setfill(' ') << " (" << flag_names(w.flags) << ")\n"
      << "sensors: " << d.sensors << "\nd_model: " << d.d_model << "\nffn: " << d.ffn
      << "\nheads: " << d.heads << "\nencoder_blocks: " << d.encoder_blocks
      << "\ntensors: " << w.tensors().size() << "\nparameters: " << params << "\n";
  for (const NamedTensor& t : w.tensors()) {
    out << "  " << t.name << " [";
    for (std::size_t i = 0; i < t.tensor.shape.size(); ++i) out << (i ? ", " : "") << t.tensor.shape[i];
    out << "]\n";
  }
  out << "kernels: " << to_string(kernels().isa) << "\n";
  return kExitOk;
}

struct WeightsInitArgs {
  std::string out;
  std::uint32_t seed = 42;
  std::uint32_t sensors = kDefaultSensorCount;
  int flags = kDefaultFlags;
};

int cmd_weights_init(const WeightsInitArgs& a, std::ostream& out) {
  TicDims dims;
  dims.sensors = a.sensors;
  const WeightBundle w = seeded_weights(dims, a.seed, static_cast<std::uint8_t>(a.flags));
  save_weights(w, a.out);
  out << "wrote " << w.tensors().size() << " tensors to " << a.out << "\n";
  return kExitOk;
}

struct GenMotionArgs {
  std::string out;
  std::string preset = "active";
  double duration_s = 60.0;
  double rate_hz = 30.0;
  std::uint64_t seed = 0;
};

int cmd_gen_motion(const GenMotionArgs& a, std::ostream& out) {
  MotionSpec spec = MotionSpec::preset(a.preset);
  spec.duration_s = a.duration_s;
  spec.rate_hz = a.rate_hz;
  const MotionSequence m = gen_motion(spec, a.seed);
  save_motion(m, a.out);
  out << "wrote " << m.size() << " frames to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"Dynamic IMU drift/offset calibration toolkit", "dyncal"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every command");

  SynthArgs synth;
  synth.seed = seed;
  auto* c_synth = app.add_subcommand("synth", "write a TICD training dataset");
  c_synth->add_option("--out", synth.out, "output .ticd path")->required();
  c_synth->add_option("--count", synth.count, "number of samples")->capture_default_str();
  add_motion_options(c_synth, synth.motion);
  c_synth->add_option("--seed", synth.seed, "seed (default $TIC_SEED or 0)")->capture_default_str();
  c_synth->add_option("--window", synth.window, "frames per sample")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  c_synth->add_flag("--no-leakage", synth.no_leakage, "omit gravity leakage");
  c_synth->add_option("--offset-deg", synth.offset_deg, "offset bound on every axis")
      ->capture_default_str();
  c_synth->add_option("--drift-tilt-deg", synth.drift_tilt_deg, "drift bound on x and z")
      ->capture_default_str();
  c_synth->add_option("--drift-yaw-deg", synth.drift_yaw_deg, "non-root drift bound on y")
      ->capture_default_str();

  SimulateArgs sim;
  sim.seed = seed;
  auto* c_sim = app.add_subcommand("simulate", "stream a motion through the calibration loop");
  add_motion_options(c_sim, sim.motion);
  c_sim->add_option("--seed", sim.seed, "motion seed (default $TIC_SEED or 0)")->capture_default_str();
  c_sim->add_option("--schedule", sim.schedule, kScheduleHelp)->capture_default_str();
  c_sim->add_option("--estimator", sim.estimator, "oracle, procrustes or tic")
      ->capture_default_str()
      ->check(CLI::IsMember({"oracle", "procrustes", "tic"}));
  c_sim->add_option("--weights", sim.weights, "TICW file for the tic estimator");
  c_sim->add_option("--n", sim.n, "buffer length in frames")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  c_sim->add_option("--t-interval", sim.t_interval, "seconds between estimator runs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_sim->add_option("--thresholds", sim.thresholds, "per-sensor RD thresholds T_R")->delimiter(',');
  c_sim->add_flag("--no-trigger", sim.no_trigger, "disable every update");
  c_sim->add_option("--buffer", sim.buffer, "clear: empty after each pass; sliding: keep the newest n")
      ->capture_default_str()
      ->check(CLI::IsMember({"clear", "sliding"}));
  c_sim->add_flag("--no-leakage", sim.no_leakage, "omit gravity leakage");
  c_sim->add_flag("--gravity-refinement", sim.gravity_refinement,
                  "procrustes: refine drift tilt from gravity leakage");
  c_sim->add_option("--out", sim.out, "metrics CSV path (default stdout)");
  c_sim->add_option("--calibrated-out", sim.calibrated_out, "write the calibrated stream as JSONL");

  RdArgs rd;
  rd.seed = seed;
  auto* c_rd = app.add_subcommand("rd", "rotation diversity per sensor per window");
  add_motion_options(c_rd, rd.motion);
  c_rd->add_option("--seed", rd.seed, "seed for generated motion")->capture_default_str();
  c_rd->add_option("--window", rd.window, "window length in frames")
      ->capture_default_str()
      ->check(CLI::Range(1, 1 << 20));
  c_rd->add_option("--format", rd.format, "table or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "csv"}));

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "OME/AME of a calibrated stream against ground truth");
  c_eval->add_option("--calibrated", ev.calibrated, "calibrated JSONL stream")->required();
  c_eval->add_option("--truth", ev.truth, "ground-truth JSONL stream")->required();
  c_eval->add_option("--root", ev.root, "root sensor index")->capture_default_str();

  std::string inspect_path;
  auto* c_inspect = app.add_subcommand("weights-inspect", "describe a TICW weight file");
  c_inspect->add_option("path", inspect_path, "TICW file")->required();

  WeightsInitArgs winit;
  auto* c_winit = app.add_subcommand("weights-init", "write seeded untrained TICW weights");
  c_winit->add_option("--out", winit.out, "output .ticw path")->required();
  c_winit->add_option("--seed", winit.seed, "PRNG seed")->capture_default_str();
  c_winit->add_option("--sensors", winit.sensors, "sensor count")->capture_default_str()->check(CLI::PositiveNumber);
  c_winit->add_option("--flags", winit.flags, "header flags (bit0 PE, bit1 pre-norm, bit2 tanh GELU)")
      ->capture_default_str()
      ->check(CLI::Range(0, int(kKnownFlags)));

  GenMotionArgs gm;
  gm.seed = seed;
  auto* c_gm = app.add_subcommand("gen-motion", "write a generated ground-truth motion as JSONL");
  c_gm->add_option("--out", gm.out, "output .jsonl path")->required();
  c_gm->add_option("--preset", gm.preset, "active, calm or static")
      ->capture_default_str()
      ->check(CLI::IsMember({"active", "calm", "static"}));
  c_gm->add_option("--duration", gm.duration_s, "seconds")->capture_default_str()->check(CLI::PositiveNumber);
  c_gm->add_option("--rate", gm.rate_hz, "Hz")->capture_default_str()->check(CLI::PositiveNumber);
  c_gm->add_option("--seed", gm.seed, "seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth, out);
    if (c_sim->parsed()) return cmd_simulate(sim, out, err);
    if (c_rd->parsed()) return cmd_rd(rd, out);
    if (c_eval->parsed()) return cmd_eval(ev, out);
    if (c_inspect->parsed()) return cmd_weights_inspect(inspect_path, out);
    if (c_winit->parsed()) return cmd_weights_init(winit, out);
    if (c_gm->parsed()) return cmd_gen_motion(gm, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace dyncal::cli
