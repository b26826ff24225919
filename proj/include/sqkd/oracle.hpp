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

#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "sqkd/protocol.hpp"
#include "sqkd/strategies.hpp"

namespace sqkd {

// Branch weights at or below this are treated as impossible outcomes and
// never enumerated (they are renormalization dust, not physics).
inline constexpr double kEnumZeroTol = 1e-12;

// Depth-first exhaustive walk over every random choice a run makes. The
// protocol code draws through the same RandomSource interface as in Monte
// Carlo mode; here each draw becomes a branch point. A path replays its
// recorded prefix, extends it with first-nonzero choices, and `advance`
// bumps the deepest branch that still has untried outcomes (odometer
// order), so the full tree is visited exactly once.
class EnumerationSource final : public RandomSource {
 public:
  std::size_t choose(std::span<const double> weights) override {
    PhiloxSource::check_weights(weights);
    if (cursor_ < path_.size()) {
      const Node& node = path_[cursor_];
      // The same choice prefix must reproduce the same weights, or the
      // protocol code is not a deterministic function of its draws.
      if (node.weights.size() != weights.size())
        throw InvariantError("enumeration replay diverged (branch arity)");
      for (std::size_t i = 0; i < weights.size(); ++i)
        if (std::abs(node.weights[i] - weights[i]) > kAlgebraTol)
          throw InvariantError("enumeration replay diverged (weights)");
      return path_[cursor_++].choice;
    }
    Node node;
    node.weights.assign(weights.begin(), weights.end());
    node.choice = node.weights.size();
    for (std::size_t i = 0; i < node.weights.size(); ++i)
      if (node.weights[i] > kEnumZeroTol) {
        node.choice = i;
        break;
      }
    if (node.choice == node.weights.size())
      throw InvariantError("no outcome has positive probability");
    path_.push_back(std::move(node));
    ++cursor_;
    return path_.back().choice;
  }

  void begin_path() { cursor_ = 0; }

  double path_probability() const {
    double p = 1.0;
    for (const Node& n : path_) p *= n.weights[n.choice];
    return p;
  }

  // Moves to the next untried leaf; false once the tree is exhausted.
  bool advance() {
    while (!path_.empty()) {
      Node& last = path_.back();
      for (std::size_t c = last.choice + 1; c < last.weights.size(); ++c)
        if (last.weights[c] > kEnumZeroTol) {
          last.choice = c;
          return true;
        }
      path_.pop_back();
    }
    return false;
  }

  std::size_t depth() const { return path_.size(); }

 private:
  struct Node {
    std::vector<double> weights;
    std::size_t choice = 0;
  };
  std::vector<Node> path_;
  std::size_t cursor_ = 0;
};

// One exhaustively enumerated protocol round: its probability, the full
// classical record, and Eve's side information, exact rather than sampled.
// Her classical part is the tag; her quantum part is the reduced state over
// the slots she holds (strategies skip their end-of-round measurements in
// oracle mode precisely so this stays quantum).
struct RoundAtom {
  double prob = 0.0;
  RoundRecord record;
  bool consumed = false;  // carried a message bit (direct runs)
  std::optional<int> eve_tag;
  std::optional<DensityMatrix> eve_state;
};

using StrategyFactory = std::function<std::unique_ptr<AttackStrategy>()>;

inline std::vector<RoundAtom> enumerate_round(
    const ProtocolConfig& cfg, const StrategyFactory& factory,
    std::optional<int> qsdc_bit = std::nullopt,
    std::size_t max_atoms = std::size_t{1} << 20) {
  cfg.validate();
  std::vector<RoundAtom> atoms;
  EnumerationSource src;
  double mass = 0.0;
  do {
    src.begin_path();
    auto eve = factory();
    eve->oracle_mode = true;
    QuantumChannel channel(cfg.noise, *eve, cfg.noise_order_flipped);
    MeasurementAudit audit;
    RoundOutcome out = run_round(cfg, 0, channel, *eve, src, audit, qsdc_bit,
                                 /*measure_now=*/true, /*retained=*/false);
    RoundAtom atom;
    atom.prob = src.path_probability();
    atom.record = out.record;
    atom.consumed = out.consumed;
    atom.eve_tag = eve->classical_record(0);
    std::vector<int> hers = out.state.slots(SlotRole::EveProbe);
    for (int s : out.state.slots(SlotRole::EveStore)) hers.push_back(s);
    if (!hers.empty())
      atom.eve_state = partial_trace(out.state.joint(), hers);
    mass += atom.prob;
    atoms.push_back(std::move(atom));
    if (atoms.size() > max_atoms)
      throw InvariantError("round enumeration exceeded the atom budget");
  } while (src.advance());
  if (std::abs(mass - 1.0) > kAlgebraTol)
    throw InvariantError("round atoms do not sum to unit probability");
  return atoms;
}

inline std::vector<RoundAtom> enumerate_round(
    const ProtocolConfig& cfg, const std::string& attack,
    std::optional<int> qsdc_bit = std::nullopt) {
  return enumerate_round(cfg, [&] { return make_strategy(attack); }, qsdc_bit);
}

// A mismatch only triggers the alarm when it lands in the protocol's check
// classes; sift errors surface later (testing / reconciliation), not here.
inline bool counts_as_detection(Protocol p, const RoundRecord& rec) {
  if (!rec.mismatch()) return false;
  if (p == Protocol::P2) return rec.cls == RoundClass::CtrlX;
  return rec.cls == RoundClass::ZCtrl || rec.cls == RoundClass::XCtrl;
}

inline double round_detection_mass(Protocol p,
                                   const std::vector<RoundAtom>& atoms) {
  double q = 0.0;
  for (const auto& a : atoms)
    if (counts_as_detection(p, a.record)) q += a.prob;
  return q;
}

inline std::optional<double> conditional_class_error(
    const std::vector<RoundAtom>& atoms, RoundClass cls) {
  double w = 0.0, e = 0.0;
  for (const auto& a : atoms)
    if (a.record.cls == cls) {
      w += a.prob;
      if (a.record.mismatch()) e += a.prob;
    }
  if (w <= 0.0) return std::nullopt;
  return e / w;
}

// Exact probability that N independent rounds raise the alarm. Rounds of
// the key protocols are iid, so this is one minus the clean-round mass to
// the Nth power.
inline double exact_detection_probability(const ProtocolConfig& cfg,
                                          const StrategyFactory& factory,
                                          std::optional<int> rounds =
                                              std::nullopt) {
  if (cfg.protocol == Protocol::QSDC)
    throw InvariantError(
        "direct-communication detection goes through exact_error_joint");
  auto atoms = enumerate_round(cfg, factory);
  double q = round_detection_mass(cfg.protocol, atoms);
  int n = rounds ? *rounds : cfg.rounds();
  return 1.0 - std::pow(1.0 - q, n);
}

inline double exact_detection_probability(const ProtocolConfig& cfg,
                                          const std::string& attack,
                                          std::optional<int> rounds =
                                              std::nullopt) {
  return exact_detection_probability(
      cfg, [&] { return make_strategy(attack); }, rounds);
}

// Joint distribution of the error counters over a whole quantum phase.
// Key: {exhausted, z_ctrl errors, x_ctrl errors, ctrl_x errors, sift errors}.
// Key protocols fold N iid copies of one atom table; direct runs walk a
// table per message-bit value plus a forced-reflect table once the message
// ran out, tracking how much of it got consumed.
using JointKey = std::array<int, 5>;
using JointPmf = std::map<JointKey, double>;

inline JointPmf exact_error_joint(const ProtocolConfig& cfg,
                                  const StrategyFactory& factory,
                                  const std::optional<Bits>& message =
                                      std::nullopt,
                                  std::size_t work_budget = 20'000'000) {
  const bool direct = cfg.protocol == Protocol::QSDC;
  if (direct && !message)
    throw ConfigError("direct-communication joints need the encoded message");

  int rounds;
  if (cfg.explicit_rounds)
    rounds = *cfg.explicit_rounds;
  else if (direct)
    rounds = cfg.qsdc_rounds(static_cast<int>(message->size()));
  else
    rounds = cfg.rounds();

  std::vector<RoundAtom> plain, forced;
  std::array<std::vector<RoundAtom>, 2> by_bit;
  if (direct) {
    std::array<bool, 2> need{false, false};
    for (auto b : *message) need[b & 1] = true;
    for (int b = 0; b < 2; ++b)
      if (need[static_cast<std::size_t>(b)])
        by_bit[static_cast<std::size_t>(b)] =
            enumerate_round(cfg, factory, b);
    forced = enumerate_round(cfg, factory, std::nullopt);
  } else {
    plain = enumerate_round(cfg, factory, std::nullopt);
  }

  // State: {consumed, ez, ex, ecx, esift} -> probability.
  std::map<std::array<int, 5>, double> cur;
  cur[{0, 0, 0, 0, 0}] = 1.0;
  std::size_t work = 0;
  for (int r = 0; r < rounds; ++r) {
    std::map<std::array<int, 5>, double> next;
    for (const auto& [state, p] : cur) {
      const std::vector<RoundAtom>* table = &plain;
      if (direct) {
        int consumed = state[0];
        table = consumed < static_cast<int>(message->size())
                    ? &by_bit[(*message)[static_cast<std::size_t>(consumed)] & 1]
                    : &forced;
      }
      for (const RoundAtom& atom : *table) {
        if (++work > work_budget)
          throw InvariantError("joint enumeration exceeded the work budget");
        std::array<int, 5> key = state;
        if (atom.consumed) ++key[0];
        if (atom.record.mismatch()) {
          switch (atom.record.cls) {
            case RoundClass::ZCtrl: ++key[1]; break;
            case RoundClass::XCtrl: ++key[2]; break;
            case RoundClass::CtrlX: ++key[3]; break;
            case RoundClass::SiftKey: ++key[4]; break;
            case RoundClass::Discard: break;
          }
        }
        next[key] += p * atom.prob;
      }
    }
    cur = std::move(next);
  }

  JointPmf out;
  for (const auto& [state, p] : cur) {
    int exhausted =
        direct && state[0] < static_cast<int>(message->size()) ? 1 : 0;
    out[{exhausted, state[1], state[2], state[3], state[4]}] += p;
  }
  return out;
}

inline JointPmf exact_error_joint(const ProtocolConfig& cfg,
                                  const std::string& attack,
                                  const std::optional<Bits>& message =
                                      std::nullopt) {
  return exact_error_joint(cfg, [&] { return make_strategy(attack); },
                           message);
}

// Alarm mass of a joint: runs that reached the checks and tripped them.
inline double joint_detection_probability(Protocol p, const JointPmf& pmf) {
  double d = 0.0;
  for (const auto& [key, mass] : pmf) {
    if (key[0]) continue;  // exhausted runs die before any check
    bool det = p == Protocol::P2 ? key[3] > 0 : key[1] + key[2] > 0;
    if (det) d += mass;
  }
  return d;
}

// Eve's exact per-round information gain about a key bit, as her best
// achievable guessing advantage over 1/2. Both her classical record (tag)
// and her unmeasured quantum slots enter: conditioned on Bob's fresh bit b
// the ensemble is block-diagonal over tags, and the optimal discrimination
// bias is the trace distance between the two conditional ensembles, halved.
// One round suffices: everything outside the round is independent of its
// bit and cancels from the trace distance.
inline double exact_eve_info(const ProtocolConfig& cfg,
                             const StrategyFactory& factory) {
  if (cfg.protocol == Protocol::QSDC)
    throw InvariantError(
        "per-round information gain targets the key protocols");
  auto atoms = enumerate_round(cfg, factory);

  std::map<int, std::array<Eigen::MatrixXcd, 2>> blocks;
  std::array<double, 2> w{0.0, 0.0};
  for (const auto& atom : atoms) {
    if (atom.record.cls != RoundClass::SiftKey) continue;
    const int b = atom.record.bob_fresh_bit;
    Eigen::MatrixXcd state = atom.eve_state
                                 ? atom.eve_state->matrix()
                                 : Eigen::MatrixXcd::Ones(1, 1);
    const int tag = atom.eve_tag.value_or(-1);
    auto it = blocks.find(tag);
    if (it == blocks.end()) {
      Eigen::MatrixXcd zero =
          Eigen::MatrixXcd::Zero(state.rows(), state.cols());
      it = blocks.emplace(tag, std::array<Eigen::MatrixXcd, 2>{zero, zero})
               .first;
    }
    if (it->second[0].rows() != state.rows())
      throw InvariantError("eve state dimension varies within a tag block");
    it->second[static_cast<std::size_t>(b)] += atom.prob * state;
    w[static_cast<std::size_t>(b)] += atom.prob;
  }
  if (w[0] <= 0.0 || w[1] <= 0.0) return 0.0;

  double td = 0.0;
  for (const auto& [tag, ms] : blocks)
    td += trace_distance(Eigen::MatrixXcd(ms[0] / w[0]),
                         Eigen::MatrixXcd(ms[1] / w[1]));
  return td / 2.0;
}

inline double exact_eve_info(const ProtocolConfig& cfg,
                             const std::string& attack) {
  return exact_eve_info(cfg, [&] { return make_strategy(attack); });
}

// ---------------------------------------------------------------------------
// Robustness scan: sweep a probe family's coupling angle and demand that any
// point with nonzero information gain also shows nonzero exact detection
// probability. A silent-but-informative point would be a security finding.

inline constexpr double kScanEps = 1e-9;

struct ScanPoint {
  double theta = 0.0;
  double info = 0.0;         // exact per-round guessing advantage
  double disturbance = 0.0;  // exact detection probability over the scan rounds
  int atoms = 0;
};

inline std::vector<ScanPoint> robustness_scan(Protocol protocol,
                                              ProbeFamily family,
                                              const std::vector<double>& grid,
                                              int rounds = 4,
                                              bool return_leg = true) {
  if (protocol == Protocol::QSDC)
    throw InvariantError("the scan targets the key protocols");
  ProtocolConfig cfg;
  cfg.protocol = protocol;
  cfg.n = 0;
  std::vector<ScanPoint> out;
  out.reserve(grid.size());
  for (double theta : grid) {
    StrategyFactory factory = [family, theta, return_leg] {
      return std::unique_ptr<AttackStrategy>(
          new EntangleProbe(family, theta, return_leg));
    };
    auto atoms = enumerate_round(cfg, factory);
    ScanPoint pt;
    pt.theta = theta;
    pt.info = exact_eve_info(cfg, factory);
    pt.disturbance =
        1.0 - std::pow(1.0 - round_detection_mass(protocol, atoms), rounds);
    pt.atoms = static_cast<int>(atoms.size());
    out.push_back(pt);
  }
  return out;
}

inline bool scan_has_finding(const std::vector<ScanPoint>& points,
                             double eps = kScanEps) {
  for (const auto& p : points)
    if (p.info > eps && p.disturbance <= eps) return true;
  return false;
}

inline std::string scan_csv(const std::vector<ScanPoint>& points,
                            Protocol protocol, ProbeFamily family) {
  std::ostringstream os;
  os << "theta,info,disturbance,atoms,protocol,family\n";
  os << std::setprecision(12);
  for (const auto& p : points)
    os << p.theta << ',' << p.info << ',' << p.disturbance << ',' << p.atoms
       << ',' << protocol_name(protocol) << ','
       << probe_family_name(family) << '\n';
  return os.str();
}

inline std::string atom_label(const RoundAtom& a) {
  std::ostringstream os;
  os << basis_name(a.record.alice_basis) << a.record.alice_bit
     << (a.record.bob_action == BobAction::Sift ? " sift" : " ctrl");
  if (a.record.bob_fresh_bit >= 0) os << " fresh=" << a.record.bob_fresh_bit;
  if (a.record.measured())
    os << " meas " << basis_name(a.record.alice_meas_basis) << "="
       << a.record.alice_meas_bit;
  os << " [" << round_class_name(a.record.cls)
     << (a.record.mismatch() ? " !" : "") << "]";
  if (a.eve_tag) os << " tag=" << *a.eve_tag;
  return os.str();
}

inline ordered_json atoms_json(const std::vector<RoundAtom>& atoms) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : atoms) {
    ordered_json j;
    j["prob"] = a.prob;
    j["label"] = atom_label(a);
    j["class"] = round_class_name(a.record.cls);
    j["mismatch"] = a.record.mismatch();
    j["eve_tag"] = a.eve_tag ? ordered_json(*a.eve_tag) : ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace sqkd
