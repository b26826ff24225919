// Copyright 2026 The sqkd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end.
//
//   sqkd run        sample one scenario (single-run JSON or batch CSV/JSON)
//   sqkd sweep      sweep one parameter axis, one aggregated CSV row each
//   sqkd oracle     exact enumeration: atom tables, joints, robustness scan
//   sqkd qsdc-demo  annotated direct-communication run against the forger
//
// Exit codes: 0 ok, 2 bad configuration or usage, 3 scan finding
// (information gain without disturbance), 4 internal invariant violation.

#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "sqkd/sqkd.hpp"

namespace {

using namespace sqkd;

struct Scenario {
  std::string protocol = "p1";
  int n = 336;
  std::optional<int> rounds;
  int trials = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string attack = "none";
  std::string noise = "ideal";
  double delta = 0.25;
  double ctrl_threshold = 0.05;
  double test_threshold = 0.05;
  double sift_prob = 0.5;
  int security_margin = 32;
  double est_fraction = 0.25;
  std::string message;
  bool disable_ctrl_check = false;
  bool flip_noise_order = false;
};

// Accepts a plain bit string or 0x-prefixed hex (expanded MSB first).
Bits parse_message(const std::string& s) {
  if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) {
    Bits v;
    for (std::size_t i = 2; i < s.size(); ++i) {
      int nibble;
      const char c = s[i];
      if (c >= '0' && c <= '9')
        nibble = c - '0';
      else if (c >= 'a' && c <= 'f')
        nibble = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F')
        nibble = c - 'A' + 10;
      else
        throw ConfigError("bad hex digit in message");
      for (int b = 3; b >= 0; --b)
        v.push_back(static_cast<std::uint8_t>((nibble >> b) & 1));
    }
    if (v.empty()) throw ConfigError("empty message");
    return v;
  }
  Bits v = bits_from_string(s);
  if (v.empty()) throw ConfigError("empty message");
  return v;
}

void add_scenario_options(CLI::App* cmd, Scenario& sc) {
  cmd->add_option("--protocol", sc.protocol, "p1 | p2 | qsdc")
      ->capture_default_str();
  cmd->add_option("--n", sc.n,
                  "target key length; 0 runs the rounds-only diagnostic")
      ->capture_default_str();
  cmd->add_option("--rounds", sc.rounds,
                  "override the derived quantum round count");
  cmd->add_option("--trials", sc.trials, "independent runs in the batch")
      ->capture_default_str();
  cmd->add_option("--seed", sc.seed, "master seed; trial t uses stream t")
      ->capture_default_str();
  cmd->add_option("--threads", sc.threads,
                  "worker threads (output is thread-count invariant)")
      ->capture_default_str();
  cmd->add_option("--attack", sc.attack,
                  "none | ir:<z|x>:<fwd|ret|both> | probe:<angle>:<leg> | "
                  "phase:<angle>:<leg> | mitm")
      ->capture_default_str();
  cmd->add_option("--noise", sc.noise,
                  "ideal | bitflip:<p> | depolarizing:<p>")
      ->capture_default_str();
  cmd->add_option("--delta", sc.delta, "round-count safety factor")
      ->capture_default_str();
  cmd->add_option("--ctrl-threshold", sc.ctrl_threshold,
                  "abort above this ctrl error rate")
      ->capture_default_str();
  cmd->add_option("--test-threshold", sc.test_threshold,
                  "abort above this test-bit error rate")
      ->capture_default_str();
  cmd->add_option("--sift-prob", sc.sift_prob,
                  "probability that Bob sifts a round")
      ->capture_default_str();
  cmd->add_option("--security-margin", sc.security_margin,
                  "extra bits removed by privacy amplification")
      ->capture_default_str();
  cmd->add_option("--est-fraction", sc.est_fraction,
                  "direct runs: filler fraction used for error estimation")
      ->capture_default_str();
  cmd->add_option("--message", sc.message,
                  "payload bits (or 0x hex); direct runs and rounds-only");
  cmd->add_flag("--disable-ctrl-check", sc.disable_ctrl_check,
                "direct runs: skip the reflection checks (demo only)");
  cmd->add_flag("--flip-noise-order", sc.flip_noise_order,
                "apply forward-leg noise after the eavesdropper");
}

TrialBatch to_batch(const Scenario& sc) {
  TrialBatch b;
  b.config.protocol = parse_protocol(sc.protocol);
  b.config.n = sc.n;
  b.config.explicit_rounds = sc.rounds;
  b.config.delta = sc.delta;
  b.config.p_ctrl_threshold = sc.ctrl_threshold;
  b.config.p_test_threshold = sc.test_threshold;
  b.config.bob_sift_prob = sc.sift_prob;
  b.config.security_margin_s = sc.security_margin;
  b.config.qsdc_est_fraction = sc.est_fraction;
  b.config.qsdc_disable_ctrl_check = sc.disable_ctrl_check;
  b.config.noise = NoiseModel::parse(sc.noise);
  b.config.noise_order_flipped = sc.flip_noise_order;
  b.config.seed = sc.seed;
  b.attack = sc.attack;
  b.trials = sc.trials;
  b.master_seed = sc.seed;
  b.threads = sc.threads;
  if (!sc.message.empty()) b.message = parse_message(sc.message);
  return b;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + path);
  os << text;
}

int cmd_run(const Scenario& sc, const std::string& format,
            const std::string& out, bool records) {
  TrialBatch batch = to_batch(sc);
  if (records && batch.trials != 1)
    throw ConfigError("--records needs --trials 1");

  if (batch.trials == 1 && format == "json") {
    PhiloxSource src(batch.master_seed, 0);
    auto eve = make_strategy(batch.attack);
    ordered_json j;
    if (batch.config.n == 0) {
      j = run_result_json(run_rounds_only(batch.config, *eve, src,
                                          batch.message),
                          records);
    } else if (batch.config.protocol == Protocol::QSDC) {
      if (!batch.message)
        throw ConfigError("direct runs need --message");
      j = qsdc_result_json(run_qsdc(batch.config, *eve, src, *batch.message),
                           records);
    } else {
      j = run_result_json(run_qkd(batch.config, *eve, src), records);
    }
    write_output(out, j.dump(2) + "\n");
    return 0;
  }

  BatchReport rep = run_batch(batch);
  if (format == "csv")
    write_output(out, batch_csv(rep));
  else if (format == "json")
    write_output(out, batch_stats_json(rep).dump(2) + "\n");
  else
    throw ConfigError("unknown format: " + format);
  return 0;
}

int cmd_sweep(const Scenario& sc, const std::string& axis,
              const std::vector<double>& values, const std::string& out) {
  TrialBatch batch = to_batch(sc);
  std::string csv = sweep_csv(batch, SweepSpec{axis, values});
  write_output(out, csv);
  return 0;
}

int cmd_oracle(const Scenario& sc, const std::string& scan_family,
               double grid_start, std::optional<double> grid_stop,
               int grid_points, int scan_rounds, const std::string& leg,
               double scan_eps, std::optional<int> qsdc_bit,
               const std::string& out) {
  ProtocolConfig cfg = to_batch(sc).config;
  cfg.n = 0;

  if (!scan_family.empty()) {
    ProbeFamily family;
    if (scan_family == "rotation")
      family = ProbeFamily::Rotation;
    else if (scan_family == "phase")
      family = ProbeFamily::Phase;
    else
      throw ConfigError("unknown scan family: " + scan_family);
    if (grid_points < 2) throw ConfigError("scan needs at least 2 points");
    const double stop = grid_stop ? *grid_stop
                        : family == ProbeFamily::Rotation
                            ? std::numbers::pi / 2
                            : std::numbers::pi;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i)
      grid.push_back(grid_start +
                     (stop - grid_start) * i / (grid_points - 1));
    auto points = robustness_scan(cfg.protocol, family, grid, scan_rounds,
                                  leg == "ret");
    write_output(out, scan_csv(points, cfg.protocol, family));
    if (scan_has_finding(points, scan_eps)) {
      std::cerr << "FINDING: information gain without disturbance\n";
      return 3;
    }
    return 0;
  }

  if (cfg.protocol == Protocol::QSDC && !sc.message.empty()) {
    Bits message = parse_message(sc.message);
    JointPmf pmf = exact_error_joint(cfg, sc.attack, message);
    ordered_json rows = ordered_json::array();
    double exhausted = 0.0;
    for (const auto& [key, p] : pmf) {
      rows.push_back({{"exhausted", key[0]},
                      {"z_ctrl_errors", key[1]},
                      {"x_ctrl_errors", key[2]},
                      {"ctrl_x_errors", key[3]},
                      {"sift_errors", key[4]},
                      {"p", p}});
      if (key[0]) exhausted += p;
    }
    ordered_json j;
    j["protocol"] = protocol_name(cfg.protocol);
    j["attack"] = sc.attack;
    j["message_bits"] = message.size();
    j["rounds"] = cfg.explicit_rounds
                      ? *cfg.explicit_rounds
                      : cfg.qsdc_rounds(static_cast<int>(message.size()));
    j["exhausted_probability"] = exhausted;
    j["detection_probability"] =
        joint_detection_probability(cfg.protocol, pmf);
    j["joint"] = std::move(rows);
    write_output(out, j.dump(2) + "\n");
    return 0;
  }

  auto atoms = enumerate_round(cfg, sc.attack, qsdc_bit);
  ordered_json j;
  j["protocol"] = protocol_name(cfg.protocol);
  j["attack"] = sc.attack;
  j["noise"] = cfg.noise.to_string();
  j["atoms"] = atoms_json(atoms);
  const double q = round_detection_mass(cfg.protocol, atoms);
  j["round_alarm_mass"] = q;
  j["detection_probability"] =
      1.0 - std::pow(1.0 - q, std::max(1, scan_rounds));
  j["detection_rounds"] = std::max(1, scan_rounds);
  if (cfg.protocol != Protocol::QSDC)
    j["eve_info"] = exact_eve_info(cfg, sc.attack);
  write_output(out, j.dump(2) + "\n");
  return 0;
}

int cmd_qsdc_demo(const Scenario& sc, bool as_json, const std::string& out) {
  Scenario demo = sc;
  demo.protocol = "qsdc";
  if (demo.message.empty()) throw ConfigError("the demo needs --message");
  TrialBatch batch = to_batch(demo);

  PhiloxSource src(batch.master_seed, 0);
  auto eve = make_strategy(batch.attack);
  QsdcResult res = run_qsdc(batch.config, *eve, src, *batch.message);

  if (as_json) {
    write_output(out, qsdc_result_json(res).dump(2) + "\n");
    return 0;
  }

  const RunStats& st = res.run.stats;
  std::ostringstream os;
  os << "direct transmission demo\n"
     << "  attack            : " << eve->name() << "\n"
     << "  payload           : " << bits_to_string(*batch.message) << " ("
     << batch.message->size() << " bits)\n"
     << "  encoded stream    : " << res.layout.encoded_len << " bits ("
     << res.layout.code_len << " code + " << res.layout.est_len
     << " estimation)\n"
     << "  quantum rounds    : " << st.rounds << "\n";
  os << "  reflection checks : z-ctrl " << st.errors(RoundClass::ZCtrl) << "/"
     << st.count(RoundClass::ZCtrl) << " errors, x-ctrl "
     << st.errors(RoundClass::XCtrl) << "/" << st.count(RoundClass::XCtrl)
     << " errors\n";
  if (st.test_count > 0)
    os << "  estimation bits   : " << st.test_errors << "/" << st.test_count
       << " errors\n";
  if (res.run.completed) {
    os << "  coding seed       : announced\n";
    os << "  delivered payload : "
       << (res.delivered ? bits_to_string(*res.delivered) : "(none)");
    if (res.delivered && *res.delivered == *batch.message)
      os << " (intact)";
    os << "\n";
  } else {
    os << "  outcome           : aborted ("
       << abort_reason_name(*res.run.abort_reason) << ")\n";
    os << "  coding seed       : "
       << (res.eve_detected ? "withheld" : "never reached") << "\n";
  }
  if (res.run.eve_report.payload_guess)
    os << "  eavesdropper      : reconstructed "
       << bits_to_string(*res.run.eve_report.payload_guess)
       << " (overlap " << res.eve_payload_info << ")\n";
  else
    os << "  eavesdropper      : no payload guess\n";
  os << "  disturbance flag  : " << (res.run.detected ? "raised" : "clear")
     << "\n";
  write_output(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "exact-simulation harness for semi-quantum key distribution and "
      "direct communication"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.set_version_flag("--version", "sqkd 1.0.0");

  Scenario sc;
  std::string format = "json";
  std::string out;
  bool records = false;

  CLI::App* run = app.add_subcommand("run", "sample a scenario");
  add_scenario_options(run, sc);
  run->add_option("--format", format, "json | csv")->capture_default_str();
  run->add_option("--out", out, "output file (default stdout)");
  run->add_flag("--records", records,
                "include per-round records and the transcript (trials 1)");

  std::string axis;
  std::vector<double> values;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one parameter axis");
  add_scenario_options(sweep, sc);
  sweep->add_option("--axis", axis,
                    "noise-p | theta | ctrl-threshold | test-threshold | "
                    "sift-prob")
      ->required();
  sweep->add_option("--values", values, "axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out, "output file (default stdout)");

  std::string scan_family;
  double grid_start = 0.0;
  std::optional<double> grid_stop;
  int grid_points = 21;
  int scan_rounds = 4;
  std::string leg = "ret";
  double scan_eps = kScanEps;
  std::optional<int> qsdc_bit;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact enumeration oracle (no sampling)");
  add_scenario_options(oracle, sc);
  oracle->add_option("--scan", scan_family,
                     "robustness scan over a probe family: rotation | phase");
  oracle->add_option("--grid-start", grid_start, "scan grid start angle")
      ->capture_default_str();
  oracle->add_option("--grid-stop", grid_stop,
                     "scan grid stop angle (default: family limit)");
  oracle->add_option("--grid-points", grid_points, "scan grid size")
      ->capture_default_str();
  oracle->add_option("--detection-rounds", scan_rounds,
                     "rounds folded into the detection probability")
      ->capture_default_str();
  oracle->add_option("--leg", leg, "probe leg for scans: fwd | ret")
      ->capture_default_str();
  oracle->add_option("--scan-eps", scan_eps,
                     "resolution threshold for the finding predicate")
      ->capture_default_str();
  oracle->add_option("--qsdc-bit", qsdc_bit,
                     "enumerate a direct round carrying this message bit");
  oracle->add_option("--out", out, "output file (default stdout)");

  bool demo_json = false;
  CLI::App* demo = app.add_subcommand(
      "qsdc-demo", "annotated direct-communication run");
  add_scenario_options(demo, sc);
  demo->add_flag("--json", demo_json, "machine-readable output");
  demo->add_option("--out", out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(sc, format, out, records);
    if (sweep->parsed()) return cmd_sweep(sc, axis, values, out);
    if (oracle->parsed())
      return cmd_oracle(sc, scan_family, grid_start, grid_stop, grid_points,
                        scan_rounds, leg, scan_eps, qsdc_bit, out);
    if (demo->parsed()) return cmd_qsdc_demo(sc, demo_json, out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
