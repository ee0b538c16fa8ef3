#pragma once

// Eavesdroppers on the two quantum channels and Monte-Carlo detection studies.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cqsc/protocol.hpp"

namespace cqsc {

enum class AttackKind { None, InterceptResend, MeasureResend, EntangleMeasure };
enum class AttackPhase { Distribution, EncodedReturn, Both };

struct AttackStrategy {
  AttackKind kind = AttackKind::None;
  AttackPhase phase = AttackPhase::Distribution;

  bool on_distribution() const { return kind != AttackKind::None && phase != AttackPhase::EncodedReturn; }
  bool on_return() const { return kind != AttackKind::None && phase != AttackPhase::Distribution; }
};

constexpr std::string_view name(AttackKind k) {
  switch (k) {
    case AttackKind::None: return "none";
    case AttackKind::InterceptResend: return "intercept";
    case AttackKind::MeasureResend: return "measure";
    case AttackKind::EntangleMeasure: return "entangle";
  }
  return "?";
}

constexpr std::string_view name(AttackPhase p) {
  switch (p) {
    case AttackPhase::Distribution: return "distribution";
    case AttackPhase::EncodedReturn: return "return";
    case AttackPhase::Both: return "both";
  }
  return "?";
}

inline std::optional<AttackKind> attack_kind_from_name(std::string_view s) {
  for (auto k : {AttackKind::None, AttackKind::InterceptResend, AttackKind::MeasureResend, AttackKind::EntangleMeasure}) {
    if (name(k) == s) return k;
  }
  return std::nullopt;
}

inline std::optional<AttackPhase> attack_phase_from_name(std::string_view s) {
  for (auto p : {AttackPhase::Distribution, AttackPhase::EncodedReturn, AttackPhase::Both}) {
    if (name(p) == s) return p;
  }
  return std::nullopt;
}

// Eve.  One instance per run.
//
// Her knowledge of each message pair is a belief state on labels ("a", "b")
// for the pair just before Bob's scramble:
//   intercept-resend  her own triple's third qubit, measured in Z;
//   measure-resend    the product state she collapsed a and b into;
//   entangle-measure  the Bell kind of her ancillas (x, y), single controller.
class EveTap : public ChannelTap {
 public:
  explicit EveTap(AttackStrategy s, int n_controllers = 1) : strategy_(s), n_controllers_(n_controllers) {}

  static std::string ancilla_x(std::size_t i) { return "eve:x[" + std::to_string(i) + "]"; }
  static std::string ancilla_y(std::size_t i) { return "eve:y[" + std::to_string(i) + "]"; }

  void on_distribution(Ensemble& e, const std::string& to_alice, const std::string& to_bob, std::size_t instance,
                       Rng& rng) override {
    if (!strategy_.on_distribution()) return;
    switch (strategy_.kind) {
      case AttackKind::InterceptResend: {
        e.rename(to_alice, "eve:a[" + std::to_string(instance) + "]");
        e.rename(to_bob, "eve:b[" + std::to_string(instance) + "]");
        e.add(prepare_ghz_circuit(to_alice, to_bob, third(instance)));
        break;
      }
      case AttackKind::MeasureResend: {
        const unsigned ma = e.measure(MeasureBasis::z(to_alice), rng);
        const unsigned mb = e.measure(MeasureBasis::z(to_bob), rng);
        e.add(ma ? PureState::one(to_alice) : PureState::zero(to_alice));
        e.add(mb ? PureState::one(to_bob) : PureState::zero(to_bob));
        beliefs_[instance] = PureState::basis({"a", "b"}, ma << 1 | mb);
        break;
      }
      case AttackKind::EntangleMeasure: {
        e.add(PureState::zero(ancilla_x(instance)));
        e.add(PureState::zero(ancilla_y(instance)));
        e.apply(Gate::cnot(to_alice, ancilla_x(instance)));
        e.apply(Gate::cnot(to_bob, ancilla_y(instance)));
        break;
      }
      case AttackKind::None: break;
    }
  }

  void on_transmission(Ensemble& e, const std::string& qubit, Rng& rng) override {
    if (!strategy_.on_return()) return;
    switch (strategy_.kind) {
      case AttackKind::InterceptResend: {
        const bool x_basis = rng.bit() != 0;
        const unsigned o = e.measure(x_basis ? MeasureBasis::x(qubit) : MeasureBasis::z(qubit), rng);
        if (x_basis) {
          e.add(o ? PureState::minus(qubit) : PureState::plus(qubit));
        } else {
          e.add(o ? PureState::one(qubit) : PureState::zero(qubit));
        }
        break;
      }
      case AttackKind::MeasureResend: {
        const unsigned o = e.measure(MeasureBasis::z(qubit), rng);
        e.add(o ? PureState::one(qubit) : PureState::zero(qubit));
        break;
      }
      case AttackKind::EntangleMeasure: {
        const auto anc = "eve:r[" + std::to_string(returned_++) + "]";
        e.add(PureState::zero(anc));
        e.apply(Gate::cnot(qubit, anc));
        break;
      }
      case AttackKind::None: break;
    }
  }

  // Eve's last chance to measure what she kept, after the encoded sequence
  // has gone by.
  void after_transmission(Ensemble& e, std::span<const std::size_t> message_instances, Rng& rng) override {
    if (!strategy_.on_distribution()) return;
    for (std::size_t inst : message_instances) {
      switch (strategy_.kind) {
        case AttackKind::InterceptResend: {
          const unsigned z = e.measure(MeasureBasis::z(third(inst)), rng);
          beliefs_[inst] = bell(pair_for_charlie_bit(z), "a", "b");
          break;
        }
        case AttackKind::EntangleMeasure: {
          if (n_controllers_ != 1) break;
          const unsigned s = e.measure(MeasureBasis::bell(ancilla_x(inst), ancilla_y(inst)), rng);
          beliefs_[inst] = bell(bell_from_code(s), "a", "b");
          break;
        }
        default: break;
      }
    }
  }

  const AttackStrategy& strategy() const { return strategy_; }
  const PureState* belief(std::size_t instance) const {
    auto it = beliefs_.find(instance);
    return it == beliefs_.end() ? nullptr : &it->second;
  }

 private:
  static std::string third(std::size_t i) { return "eve:z[" + std::to_string(i) + "]"; }

  AttackStrategy strategy_;
  int n_controllers_;
  std::size_t returned_ = 0;
  std::map<std::size_t, PureState> beliefs_;
};

// Maximum-likelihood chunk given a belief about the pre-scramble pair and
// Bob's Bell outcome.  With `scrambled` the scramble is averaged uniformly.
// Ties are broken uniformly at random.
inline unsigned eve_guess_chunk(const PureState* belief, BellKind observed, bool scrambled, Rng& rng) {
  if (!belief) return static_cast<unsigned>(rng.below(4));
  const PureState target = bell(observed, "a", "b");
  std::array<double, 4> like{};
  for (auto enc : kAllPaulis) {
    for (auto scr : kAllPaulis) {
      if (!scrambled && scr != PauliOp::I) continue;
      PureState s = apply_gate(*belief, Gate{gate_kind(scr), "b", {}});
      apply_in_place(s, Gate{gate_kind(enc), "a", {}});
      like[message_bits(enc)] += std::norm(inner_product(target, s)) * (scrambled ? 0.25 : 1.0);
    }
  }
  const double best = *std::max_element(like.begin(), like.end());
  std::vector<unsigned> ties;
  for (unsigned m = 0; m < 4; ++m) {
    if (like[m] >= best - 1e-12) ties.push_back(m);
  }
  return ties[rng.below(ties.size())];
}

// ---------------------------------------------------------------------------
// Detection studies

struct StudyConfig {
  ProtocolConfig protocol;
  // Fixed message; when absent each trial draws `message_bits` random bits.
  std::optional<std::string> message;
  std::size_t message_bits = 8;
  std::size_t trials = 1;
  unsigned threads = 1;
};

// Smallest resource-set count whose first check samples at least `checks`
// sets and still leaves `pairs` sets for the message.
inline std::size_t resource_sets_for_checks(const ProtocolConfig& c, std::size_t checks, std::size_t pairs) {
  std::size_t k = std::max<std::size_t>(1, checks);
  while (check_count(c, k) < checks || k - check_count(c, k) < pairs) ++k;
  return k;
}

struct TrialOutcome {
  std::optional<Phase> aborted_at;
  bool completed = false;
  bool decoded_ok = false;
  CheckTally first_check;
  std::optional<DecoyTally> decoy;
  std::size_t eve_bits = 0;
  std::size_t eve_correct = 0;
};

inline TrialOutcome run_trial(const AttackStrategy& strategy, const StudyConfig& study, std::uint64_t index) {
  Rng rng = Rng::substream(study.protocol.seed, index);
  std::string msg;
  if (study.message) {
    msg = *study.message;
  } else {
    for (std::size_t i = 0; i < study.message_bits; ++i) msg.push_back(rng.bit() ? '1' : '0');
  }
  EveTap eve(strategy, study.protocol.n_controllers);
  const auto tr = run_cqsc(study.protocol, msg, strategy.kind == AttackKind::None ? nullptr : &eve, rng);
  TrialOutcome out;
  out.aborted_at = tr.aborted_at;
  if (tr.first_check) out.first_check = tr.first_check->tally;
  out.decoy = tr.decoy;
  out.completed = tr.completed();
  if (!out.completed) return out;
  out.decoded_ok = *tr.decoded_message == msg;
  if (strategy.kind == AttackKind::None) return out;
  // Bob's Bell outcomes are handed to Eve as a worst case.
  for (std::size_t k = 0; k < tr.message_instances.size(); ++k) {
    const unsigned g = eve_guess_chunk(eve.belief(tr.message_instances[k]), (*tr.bell_results)[k],
                                       study.protocol.bob_scrambles, rng);
    const unsigned truth = static_cast<unsigned>(msg[2 * k] - '0') << 1 | static_cast<unsigned>(msg[2 * k + 1] - '0');
    out.eve_bits += 2;
    out.eve_correct += ((g >> 1) == (truth >> 1)) + ((g & 1u) == (truth & 1u));
  }
  return out;
}

// Trial i always uses substream (seed, i), so the split across threads does
// not change any result.
inline std::vector<TrialOutcome> run_trials(const AttackStrategy& strategy, const StudyConfig& study) {
  std::vector<TrialOutcome> out(study.trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(study.threads, static_cast<unsigned>(study.trials)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::size_t i; (i = next++) < study.trials;) {
      try {
        out[i] = run_trial(strategy, study, i);
      } catch (...) {
        std::lock_guard g(failure_lock);
        if (!failure) failure = std::current_exception();
        next = study.trials;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct RateEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

inline RateEstimate binomial_estimate(double successes, std::size_t n) {
  RateEstimate r;
  r.samples = n;
  if (n == 0) return r;
  r.mean = successes / static_cast<double>(n);
  r.stderr_ = std::sqrt(r.mean * (1.0 - r.mean) / static_cast<double>(n));
  return r;
}

struct DetectionReport {
  AttackStrategy strategy;
  std::size_t trials = 0;
  std::size_t aborted = 0;
  std::size_t aborted_first_check = 0;
  std::size_t aborted_decoy_check = 0;
  double detection_probability = 0.0;
  RateEstimate detection;
  // Pooled over every check sample of every trial.
  RateEstimate first_check_error;
  RateEstimate z_check_error;
  RateEstimate x_check_error;
  // X samples whose three outcomes were not all equal.
  RateEstimate x_strict_violation;
  RateEstimate decoy_error;
  // Per-bit accuracy of Eve's guess over completed (undetected) trials.
  std::optional<RateEstimate> eve_information;
  std::size_t undetected = 0;
  std::size_t decode_failures = 0;
};

inline DetectionReport summarize(const AttackStrategy& strategy, const std::vector<TrialOutcome>& trials) {
  DetectionReport r;
  r.strategy = strategy;
  r.trials = trials.size();
  CheckTally pooled;
  DecoyTally decoys;
  std::size_t eve_bits = 0, eve_correct = 0;
  for (const auto& t : trials) {
    pooled += t.first_check;
    if (t.decoy) {
      decoys.decoys += t.decoy->decoys;
      decoys.mismatches += t.decoy->mismatches;
    }
    if (t.aborted_at) {
      ++r.aborted;
      if (*t.aborted_at == Phase::FirstCheck) ++r.aborted_first_check;
      if (*t.aborted_at == Phase::DecoyCheck) ++r.aborted_decoy_check;
    }
    if (t.completed) {
      ++r.undetected;
      if (!t.decoded_ok) ++r.decode_failures;
    }
    eve_bits += t.eve_bits;
    eve_correct += t.eve_correct;
  }
  r.detection_probability = r.trials ? static_cast<double>(r.aborted) / static_cast<double>(r.trials) : 0.0;
  r.detection = binomial_estimate(static_cast<double>(r.aborted), r.trials);
  r.first_check_error = binomial_estimate(pooled.errors, pooled.samples);
  r.z_check_error = binomial_estimate(pooled.z_errors, pooled.z_samples);
  r.x_check_error = binomial_estimate(pooled.x_errors, pooled.x_samples);
  r.x_strict_violation = binomial_estimate(static_cast<double>(pooled.x_strict_violations), pooled.x_samples);
  r.decoy_error = binomial_estimate(static_cast<double>(decoys.mismatches), decoys.decoys);
  if (strategy.kind != AttackKind::None && eve_bits) {
    r.eve_information = binomial_estimate(static_cast<double>(eve_correct), eve_bits);
  }
  return r;
}

inline DetectionReport detection_stats(const AttackStrategy& strategy, const StudyConfig& study) {
  if (study.trials < 1) throw InputError("at least one trial is required");
  return summarize(strategy, run_trials(strategy, study));
}

}  // namespace cqsc
