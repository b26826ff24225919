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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sqkd/oracle.hpp"
#include "sqkd/protocol.hpp"

namespace sqkd {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

inline Interval wilson_interval(std::int64_t successes, std::int64_t n,
                                double z = kZ95) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// A batch of independent trials of one scenario. Each trial t runs on its
// own Philox stream (master_seed, t), so the batch is reproducible and
// embarrassingly parallel without any shared generator state.
//
// `message` doubles as the payload of full direct runs and as the raw
// per-round bit stream of rounds-only diagnostics. n == 0 selects the
// rounds-only mode (quantum phase and classification only, no aborts).
struct TrialBatch {
  ProtocolConfig config;
  std::string attack = "none";
  int trials = 1;
  std::uint64_t master_seed = 1;
  std::optional<Bits> message;
  int threads = 1;
};

struct TrialSummary {
  int trial = 0;
  bool completed = false;
  std::optional<AbortReason> abort_reason;
  bool detected = false;
  RunStats stats;
  std::optional<bool> keys_equal;
  double eve_accuracy = 0.0;
  bool eve_scored = false;
  std::optional<bool> withheld;      // direct runs: coding seed kept back
  std::optional<bool> delivered_ok;  // direct runs: payload arrived intact
  std::optional<double> eve_payload_info;
};

struct BatchStats {
  int trials = 0;
  int completed = 0;
  int detected = 0;
  std::map<std::string, int> aborts;
  std::array<std::int64_t, 5> class_counts{};
  std::array<std::int64_t, 5> class_errors{};
  std::int64_t test_count = 0;
  std::int64_t test_errors = 0;
  std::int64_t sift_sum = 0;
  double sift_sumsq = 0.0;
  int sift_min = 0;
  int sift_max = 0;
  std::int64_t key_sum = 0;
  int key_min = 0;
  int key_max = 0;
  int keyed = 0;  // completed key runs contributing to key_* aggregates
  int keys_equal_true = 0;
  int keys_equal_false = 0;
  int eve_scored = 0;
  double eve_acc_sum = 0.0;
  double eve_acc_sumsq = 0.0;
  int withheld_count = 0;
  int delivered_total = 0;
  int delivered_ok = 0;
  int payload_info_n = 0;
  double payload_info_sum = 0.0;

  void add(const TrialSummary& s) {
    if (s.completed)
      ++completed;
    else
      ++aborts[s.abort_reason ? abort_reason_name(*s.abort_reason)
                              : "unspecified"];
    if (s.detected) ++detected;
    for (std::size_t c = 0; c < 5; ++c) {
      class_counts[c] += s.stats.class_counts[c];
      class_errors[c] += s.stats.class_errors[c];
    }
    test_count += s.stats.test_count;
    test_errors += s.stats.test_errors;
    const int sift = s.stats.sift_count();
    if (trials == 0) {
      sift_min = sift_max = sift;
    } else {
      sift_min = std::min(sift_min, sift);
      sift_max = std::max(sift_max, sift);
    }
    sift_sum += sift;
    sift_sumsq += static_cast<double>(sift) * sift;
    if (s.completed && s.stats.key_length > 0) {
      if (keyed == 0) {
        key_min = key_max = s.stats.key_length;
      } else {
        key_min = std::min(key_min, s.stats.key_length);
        key_max = std::max(key_max, s.stats.key_length);
      }
      key_sum += s.stats.key_length;
      ++keyed;
    }
    if (s.keys_equal) ++(*s.keys_equal ? keys_equal_true : keys_equal_false);
    if (s.eve_scored) {
      ++eve_scored;
      eve_acc_sum += s.eve_accuracy;
      eve_acc_sumsq += s.eve_accuracy * s.eve_accuracy;
    }
    if (s.withheld && *s.withheld) ++withheld_count;
    if (s.delivered_ok) {
      ++delivered_total;
      if (*s.delivered_ok) ++delivered_ok;
    }
    if (s.eve_payload_info) {
      ++payload_info_n;
      payload_info_sum += *s.eve_payload_info;
    }
    ++trials;
  }

  double completion_rate() const {
    return trials ? static_cast<double>(completed) / trials : 0.0;
  }
  double detection_rate() const {
    return trials ? static_cast<double>(detected) / trials : 0.0;
  }
  std::optional<double> class_rate(RoundClass c) const {
    const auto i = static_cast<std::size_t>(c);
    if (class_counts[i] == 0) return std::nullopt;
    return static_cast<double>(class_errors[i]) / class_counts[i];
  }
  Interval class_interval(RoundClass c, double z = kZ95) const {
    const auto i = static_cast<std::size_t>(c);
    return wilson_interval(class_errors[i], class_counts[i], z);
  }
  std::optional<double> test_rate() const {
    if (test_count == 0) return std::nullopt;
    return static_cast<double>(test_errors) / test_count;
  }
  double sift_mean() const {
    return trials ? static_cast<double>(sift_sum) / trials : 0.0;
  }
  double sift_stddev() const {
    if (trials < 2) return 0.0;
    const double m = sift_mean();
    const double var =
        (sift_sumsq - trials * m * m) / static_cast<double>(trials - 1);
    return std::sqrt(std::max(0.0, var));
  }
  double key_mean() const {
    return keyed ? static_cast<double>(key_sum) / keyed : 0.0;
  }
  double eve_accuracy_mean() const {
    return eve_scored ? eve_acc_sum / eve_scored : 0.0;
  }
  double eve_accuracy_stddev() const {
    if (eve_scored < 2) return 0.0;
    const double m = eve_accuracy_mean();
    const double var = (eve_acc_sumsq - eve_scored * m * m) /
                       static_cast<double>(eve_scored - 1);
    return std::sqrt(std::max(0.0, var));
  }
};

struct BatchReport {
  TrialBatch batch;
  std::vector<TrialSummary> trials;
  BatchStats stats;
};

inline TrialSummary run_trial(const TrialBatch& batch, int trial) {
  PhiloxSource src(batch.master_seed, static_cast<std::uint64_t>(trial));
  auto eve = make_strategy(batch.attack);

  TrialSummary s;
  s.trial = trial;
  if (batch.config.n == 0) {
    RunResult res = run_rounds_only(batch.config, *eve, src, batch.message);
    s.completed = res.completed;
    s.detected = res.detected;
    s.stats = res.stats;
    s.eve_accuracy = res.eve_sift_accuracy;
    s.eve_scored = res.eve_scored;
  } else if (batch.config.protocol == Protocol::QSDC) {
    if (!batch.message)
      throw ConfigError("direct-communication batches need a payload");
    QsdcResult q = run_qsdc(batch.config, *eve, src, *batch.message);
    s.completed = q.run.completed;
    s.abort_reason = q.run.abort_reason;
    s.detected = q.run.detected;
    s.stats = q.run.stats;
    s.eve_accuracy = q.run.eve_sift_accuracy;
    s.eve_scored = q.run.eve_scored;
    s.withheld = q.eve_detected;
    s.delivered_ok =
        q.delivered.has_value() && *q.delivered == *batch.message;
    s.eve_payload_info = q.eve_payload_info;
  } else {
    RunResult res = run_qkd(batch.config, *eve, src);
    s.completed = res.completed;
    s.abort_reason = res.abort_reason;
    s.detected = res.detected;
    s.stats = res.stats;
    s.eve_accuracy = res.eve_sift_accuracy;
    s.eve_scored = res.eve_scored;
    if (res.completed && !res.alice_key.empty())
      s.keys_equal = res.alice_key == res.bob_key;
  }
  return s;
}

// Trials are handed out through an atomic cursor, but every summary lands
// in its own slot and aggregation runs afterwards in trial order, so the
// report is byte-identical for any thread count.
inline BatchReport run_batch(const TrialBatch& batch) {
  if (batch.trials < 1) throw ConfigError("batch needs at least one trial");
  if (batch.threads < 1) throw ConfigError("batch needs at least one thread");
  batch.config.validate();
  make_strategy(batch.attack);  // surface descriptor typos before spawning

  BatchReport report;
  report.batch = batch;
  report.trials.resize(static_cast<std::size_t>(batch.trials));

  std::atomic<int> next{0};
  std::atomic<bool> dead{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= batch.trials || dead.load()) return;
      try {
        report.trials[static_cast<std::size_t>(t)] = run_trial(batch, t);
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!error) error = std::current_exception();
        dead.store(true);
        return;
      }
    }
  };

  if (batch.threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(batch.threads));
    for (int i = 0; i < batch.threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  for (const TrialSummary& s : report.trials) report.stats.add(s);
  return report;
}

// ---------------------------------------------------------------------------
// Stable text emitters. Formatting is locale-free and thread-agnostic.

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline std::string fmt(std::optional<double> v) {
  return v ? fmt(*v) : std::string();
}

}  // namespace detail

inline std::string batch_csv(const BatchReport& report) {
  std::ostringstream os;
  os << "trial,outcome,abort_reason,detected,rounds,sifted,z_ctrl_errors,"
        "x_ctrl_errors,ctrl_x_errors,sift_errors,test_count,test_errors,"
        "leak,key_length,keys_equal,eve_accuracy,eve_scored\n";
  for (const TrialSummary& s : report.trials) {
    os << s.trial << ',' << (s.completed ? "completed" : "aborted") << ','
       << (s.abort_reason ? abort_reason_name(*s.abort_reason) : "") << ','
       << (s.detected ? 1 : 0) << ',' << s.stats.rounds << ','
       << s.stats.sift_count() << ',' << s.stats.errors(RoundClass::ZCtrl)
       << ',' << s.stats.errors(RoundClass::XCtrl) << ','
       << s.stats.errors(RoundClass::CtrlX) << ','
       << s.stats.errors(RoundClass::SiftKey) << ',' << s.stats.test_count
       << ',' << s.stats.test_errors << ',' << s.stats.leak << ','
       << s.stats.key_length << ','
       << (s.keys_equal ? (*s.keys_equal ? "true" : "false") : "") << ','
       << (s.eve_scored ? detail::fmt(s.eve_accuracy) : "") << ','
       << (s.eve_scored ? 1 : 0) << '\n';
  }
  return os.str();
}

inline ordered_json batch_stats_json(const BatchReport& report) {
  const BatchStats& st = report.stats;
  ordered_json j;
  j["protocol"] = protocol_name(report.batch.config.protocol);
  j["attack"] = report.batch.attack;
  j["trials"] = st.trials;
  j["master_seed"] = report.batch.master_seed;
  j["noise"] = report.batch.config.noise.to_string();
  j["n"] = report.batch.config.n;
  j["completed"] = st.completed;
  j["completion_rate"] = st.completion_rate();
  j["detected"] = st.detected;
  j["detection_rate"] = st.detection_rate();
  j["aborts"] = st.aborts;

  ordered_json classes;
  for (RoundClass c : {RoundClass::SiftKey, RoundClass::ZCtrl,
                       RoundClass::XCtrl, RoundClass::CtrlX}) {
    const auto i = static_cast<std::size_t>(c);
    ordered_json row;
    row["count"] = st.class_counts[i];
    row["errors"] = st.class_errors[i];
    auto rate = st.class_rate(c);
    row["rate"] = rate ? ordered_json(*rate) : ordered_json(nullptr);
    Interval iv = st.class_interval(c);
    row["wilson95"] = ordered_json::array({iv.lo, iv.hi});
    classes[round_class_name(c)] = std::move(row);
  }
  j["classes"] = std::move(classes);

  j["test"] = {{"count", st.test_count},
               {"errors", st.test_errors},
               {"rate", st.test_rate() ? ordered_json(*st.test_rate())
                                       : ordered_json(nullptr)}};
  j["sifted"] = {{"mean", st.sift_mean()},
                 {"stddev", st.sift_stddev()},
                 {"min", st.sift_min},
                 {"max", st.sift_max}};
  j["key_length"] = {{"runs", st.keyed},
                     {"mean", st.key_mean()},
                     {"min", st.key_min},
                     {"max", st.key_max}};
  j["keys_equal"] = {{"true", st.keys_equal_true},
                     {"false", st.keys_equal_false}};
  j["eve"] = {{"scored_trials", st.eve_scored},
              {"accuracy_mean", st.eve_accuracy_mean()},
              {"accuracy_stddev", st.eve_accuracy_stddev()}};
  if (st.delivered_total > 0 || st.withheld_count > 0) {
    j["direct"] = {{"delivered_ok", st.delivered_ok},
                   {"delivered_total", st.delivered_total},
                   {"withheld", st.withheld_count},
                   {"payload_info_mean",
                    st.payload_info_n
                        ? ordered_json(st.payload_info_sum /
                                       st.payload_info_n)
                        : ordered_json(nullptr)}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// One-axis parameter sweeps.

struct SweepSpec {
  std::string axis;  // noise-p | theta | ctrl-threshold | test-threshold |
                     // sift-prob
  std::vector<double> values;
};

inline void apply_axis(TrialBatch& batch, const std::string& axis,
                       double value) {
  if (axis == "noise-p") {
    if (batch.config.noise.kind == NoiseModel::Kind::Ideal)
      throw ConfigError("noise-p sweeps need a non-ideal noise kind");
    batch.config.noise.p = value;
  } else if (axis == "theta") {
    // Rewrite the probe descriptor's angle in place.
    auto first = batch.attack.find(':');
    auto last = batch.attack.rfind(':');
    if (first == std::string::npos || last == first)
      throw ConfigError("theta sweeps need a probe attack descriptor");
    std::ostringstream os;
    os << batch.attack.substr(0, first + 1) << std::setprecision(17) << value
       << batch.attack.substr(last);
    batch.attack = os.str();
  } else if (axis == "ctrl-threshold") {
    batch.config.p_ctrl_threshold = value;
  } else if (axis == "test-threshold") {
    batch.config.p_test_threshold = value;
  } else if (axis == "sift-prob") {
    batch.config.bob_sift_prob = value;
  } else {
    throw ConfigError("unknown sweep axis: " + axis);
  }
}

inline std::string sweep_csv(const TrialBatch& base, const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  std::ostringstream os;
  os << "axis,value,trials,completed,detected,completion_rate,"
        "detection_rate,z_ctrl_rate,x_ctrl_rate,ctrl_x_rate,"
        "sift_error_rate,test_rate,mean_key_length,eve_accuracy\n";
  for (double v : spec.values) {
    TrialBatch batch = base;
    apply_axis(batch, spec.axis, v);
    BatchReport rep = run_batch(batch);
    const BatchStats& st = rep.stats;
    os << spec.axis << ',' << detail::fmt(v) << ',' << st.trials << ','
       << st.completed << ',' << st.detected << ','
       << detail::fmt(st.completion_rate()) << ','
       << detail::fmt(st.detection_rate()) << ','
       << detail::fmt(st.class_rate(RoundClass::ZCtrl)) << ','
       << detail::fmt(st.class_rate(RoundClass::XCtrl)) << ','
       << detail::fmt(st.class_rate(RoundClass::CtrlX)) << ','
       << detail::fmt(st.class_rate(RoundClass::SiftKey)) << ','
       << detail::fmt(st.test_rate()) << ',' << detail::fmt(st.key_mean())
       << ','
       << (st.eve_scored ? detail::fmt(st.eve_accuracy_mean())
                         : std::string())
       << '\n';
  }
  return os.str();
}

}  // namespace sqkd
