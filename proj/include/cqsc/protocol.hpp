#pragma once

// Controlled secure communication over GHZ-like triples.
//
// One run: the controller side prepares the resources and hands a to Alice
// and b to Bob; a sampled subset is sacrificed for the first eavesdrop check;
// the controllers measure their remaining particles so that each (a, b)
// collapses to a Bell pair known to Bob alone; Bob applies a secret random
// Pauli to b; Alice dense-codes two message bits per pair onto a and sends the
// a qubits to Bob mixed with decoys; the decoys are checked once Bob confirms
// receipt; Bob Bell-measures each pair and strips both his own Pauli and the
// controllers' pair from the result.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqsc/multictrl.hpp"
#include "cqsc/party.hpp"
#include "cqsc/qsim.hpp"
#include "cqsc/rng.hpp"
#include "cqsc/states.hpp"

namespace cqsc {

// Dense-coding unitaries; the enumerator value is the two-bit message.
enum class PauliOp : unsigned { I = 0b00, X = 0b01, Z = 0b10, iY = 0b11 };

inline constexpr std::array<PauliOp, 4> kAllPaulis = {PauliOp::I, PauliOp::X, PauliOp::Z, PauliOp::iY};

constexpr unsigned message_bits(PauliOp op) { return static_cast<unsigned>(op); }

inline PauliOp pauli_for_message(unsigned bits) {
  if (bits > 3) throw InputError("a Pauli encodes exactly two bits");
  return static_cast<PauliOp>(bits);
}

constexpr GateKind gate_kind(PauliOp op) {
  switch (op) {
    case PauliOp::I: return GateKind::I;
    case PauliOp::X: return GateKind::X;
    case PauliOp::Z: return GateKind::Z;
    case PauliOp::iY: return GateKind::iY;
  }
  return GateKind::I;
}

constexpr std::string_view name(PauliOp op) {
  switch (op) {
    case PauliOp::I: return "I";
    case PauliOp::X: return "X";
    case PauliOp::Z: return "Z";
    case PauliOp::iY: return "iY";
  }
  return "?";
}

struct ProtocolConfig {
  int n_controllers = 1;
  // Number of resource sets; each set is one triple for a single controller
  // and a full distribution plan otherwise.  Zero asks for the smallest count
  // that leaves enough sets for the message after the first check.
  std::size_t n_triples = 0;
  double check_fraction = 0.5;
  std::size_t n_decoys = 8;
  double error_threshold = 0.05;
  std::uint64_t seed = 0;
  // Bob's secret Pauli on b before encoding.
  bool bob_scrambles = true;
};

inline std::size_t check_count(const ProtocolConfig& c, std::size_t n_triples) {
  if (n_triples == 0) return 0;
  const auto k = static_cast<long long>(std::llround(c.check_fraction * static_cast<double>(n_triples)));
  return static_cast<std::size_t>(std::clamp<long long>(k, 1, static_cast<long long>(n_triples)));
}

// Parses a string of '0'/'1' characters.  Odd length is rejected.
inline std::vector<unsigned> parse_message(std::string_view bits) {
  std::vector<unsigned> out;
  for (char c : bits) {
    if (c != '0' && c != '1') throw InputError("message must contain only 0 and 1");
    out.push_back(static_cast<unsigned>(c - '0'));
  }
  if (out.size() % 2) throw InputError("message length must be even");
  return out;
}

// Fills in n_triples when zero and checks every invariant against `message`.
inline ProtocolConfig resolve_config(ProtocolConfig c, std::string_view message) {
  if (c.n_controllers < 1) throw InputError("at least one controller is required");
  if (!(c.check_fraction > 0.0 && c.check_fraction < 1.0)) throw InputError("check fraction must lie in (0, 1)");
  if (!(c.error_threshold >= 0.0 && c.error_threshold <= 1.0)) throw InputError("error threshold must lie in [0, 1]");
  const std::size_t pairs = parse_message(message).size() / 2;
  if (c.n_triples == 0) {
    std::size_t k = std::max<std::size_t>(1, pairs);
    while (k - check_count(c, k) < pairs) ++k;
    c.n_triples = k;
  }
  if (c.n_triples - check_count(c, c.n_triples) < pairs) {
    throw InputError("not enough triples survive the first check to carry the message");
  }
  return c;
}

enum class Phase { Distribution, FirstCheck, Release, Scramble, Encode, DecoyCheck, Decode };

constexpr std::string_view name(Phase p) {
  switch (p) {
    case Phase::Distribution: return "distribution";
    case Phase::FirstCheck: return "first_check";
    case Phase::Release: return "release";
    case Phase::Scramble: return "scramble";
    case Phase::Encode: return "encode";
    case Phase::DecoyCheck: return "decoy_check";
    case Phase::Decode: return "decode";
  }
  return "?";
}

// Classical traffic.  `to` is Party::everyone() for public announcements.
struct ClassicalMessage {
  Party from;
  Party to;
  std::string topic;
  std::string payload;
};

class Distribution;

// Hook for an eavesdropper on the quantum channels.  Implementations may
// rename, add, entangle or replace qubits, but must leave a qubit under each
// forwarded label.
class ChannelTap {
 public:
  virtual ~ChannelTap() = default;
  // Particles travelling from the preparing controller to the users.
  virtual void on_distribution(Ensemble&, const std::string& /*to_alice*/, const std::string& /*to_bob*/,
                               std::size_t /*instance*/, Rng&) {}
  // Each qubit of Alice's outgoing sequence, decoys included, in order.
  virtual void on_transmission(Ensemble&, const std::string& /*qubit*/, Rng&) {}
  // After the whole sequence has passed.
  virtual void after_transmission(Ensemble&, std::span<const std::size_t> /*message_instances*/, Rng&) {}
};

// The shared quantum resources of one run.
class Distribution {
 public:
  Distribution(DistributionPlan plan, std::size_t instances) : plan_(std::move(plan)), instances_(instances) {
    for (std::size_t i = 0; i < instances_; ++i) {
      for (const auto& tri : plan_.triples) {
        ensemble_.add(prepare_ghz_circuit(label(tri[0], i), label(tri[1], i), label(tri[2], i)));
      }
    }
  }

  const DistributionPlan& plan() const { return plan_; }
  std::size_t instances() const { return instances_; }
  Ensemble& ensemble() { return ensemble_; }
  const Ensemble& ensemble() const { return ensemble_; }

  std::string label(const ParticleTag& t, std::size_t instance) const {
    return plan_.label(t) + "[" + std::to_string(instance) + "]";
  }
  std::string alice_qubit(std::size_t i) const { return label(ParticleTag::user(UserRole::Alice), i); }
  std::string bob_qubit(std::size_t i) const { return label(ParticleTag::user(UserRole::Bob), i); }

  // Labels held by `party`, in instance order.
  std::vector<std::string> sequence(const Party& party) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < instances_; ++i) {
      for (const auto& tri : plan_.triples) {
        for (const auto& t : tri) {
          if (plan_.holder(t) == party) out.push_back(label(t, i));
        }
      }
    }
    return out;
  }

 private:
  DistributionPlan plan_;
  std::size_t instances_;
  Ensemble ensemble_;
};

inline Distribution distribute(const ProtocolConfig& config, ChannelTap* tap, Rng& rng) {
  if (config.n_triples < 1) throw InputError("at least one triple is required");
  Distribution d(distribution_plan(config.n_controllers), config.n_triples);
  if (tap) {
    for (std::size_t i = 0; i < d.instances(); ++i) tap->on_distribution(d.ensemble(), d.alice_qubit(i), d.bob_qubit(i), i, rng);
  }
  return d;
}

// ---------------------------------------------------------------------------
// First eavesdrop check

// Per-triple samples.  In the Z basis (first xor second) must equal the
// third outcome.  In the X basis all three outcomes agree; a sample scores
// the fraction of the two user-versus-controller relations it breaks.
struct CheckTally {
  std::size_t samples = 0;
  double errors = 0.0;
  std::size_t z_samples = 0;
  double z_errors = 0.0;
  std::size_t x_samples = 0;
  double x_errors = 0.0;
  // X samples whose three outcomes were not all equal.
  std::size_t x_strict_violations = 0;

  double error_rate() const { return samples ? errors / static_cast<double>(samples) : 0.0; }
  double z_error_rate() const { return z_samples ? z_errors / static_cast<double>(z_samples) : 0.0; }
  double x_error_rate() const { return x_samples ? x_errors / static_cast<double>(x_samples) : 0.0; }

  CheckTally& operator+=(const CheckTally& o) {
    samples += o.samples;
    errors += o.errors;
    z_samples += o.z_samples;
    z_errors += o.z_errors;
    x_samples += o.x_samples;
    x_errors += o.x_errors;
    x_strict_violations += o.x_strict_violations;
    return *this;
  }
};

struct FirstCheck {
  CheckTally tally;
  std::vector<std::size_t> sampled;
  std::vector<std::size_t> surviving;
};

namespace detail {

inline std::string join_bits(const std::vector<unsigned>& bits) {
  std::string s;
  for (auto b : bits) s.push_back(static_cast<char>('0' + b));
  return s;
}

inline std::string join_indices(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace detail

inline FirstCheck first_eavesdrop_check(Distribution& d, const ProtocolConfig& config, Rng& rng,
                                        std::vector<ClassicalMessage>& events) {
  FirstCheck out;
  out.sampled = rng.sample_indices(d.instances(), check_count(config, d.instances()));
  for (std::size_t i = 0, s = 0; i < d.instances(); ++i) {
    if (s < out.sampled.size() && out.sampled[s] == i) {
      ++s;
    } else {
      out.surviving.push_back(i);
    }
  }
  const auto& plan = d.plan();
  const Party checker = Party::controller(1);
  std::map<Party, std::vector<unsigned>> reported;
  std::map<Party, std::string> bases;
  for (std::size_t inst : out.sampled) {
    for (const auto& tri : plan.triples) {
      const bool x_basis = rng.bit() != 0;
      const auto pick = [&](const ParticleTag& t) {
        const auto l = d.label(t, inst);
        return x_basis ? MeasureBasis::x(l) : MeasureBasis::z(l);
      };
      const unsigned third = d.ensemble().measure(pick(tri[2]), rng);
      const unsigned first = d.ensemble().measure(pick(tri[0]), rng);
      const unsigned second = d.ensemble().measure(pick(tri[1]), rng);
      bases[plan.holder(tri[2])].push_back(x_basis ? 'X' : 'Z');
      reported[plan.holder(tri[0])].push_back(first);
      reported[plan.holder(tri[1])].push_back(second);
      reported[plan.holder(tri[2])].push_back(third);
      auto& t = out.tally;
      ++t.samples;
      if (x_basis) {
        const double e = ((first != third) + (second != third)) / 2.0;
        ++t.x_samples;
        t.x_errors += e;
        t.errors += e;
        if (first != third || second != third) ++t.x_strict_violations;
      } else {
        const double e = (first ^ second) != third ? 1.0 : 0.0;
        ++t.z_samples;
        t.z_errors += e;
        t.errors += e;
      }
    }
  }
  for (const auto& [party, b] : bases) {
    events.push_back({party, Party::everyone(), "check_bases", detail::join_indices(out.sampled) + ";" + b});
  }
  for (const auto& [party, bits] : reported) {
    if (party == checker) continue;
    events.push_back({party, checker, "check_results", detail::join_bits(bits)});
  }
  events.push_back({checker, Party::everyone(), "check_verdict", std::to_string(out.tally.error_rate())});
  return out;
}

// ---------------------------------------------------------------------------
// Controller release

struct Release {
  std::vector<SwapOutcomes> outcomes;  // per surviving instance
  std::vector<BellKind> pairs;         // resolved (a, b) pair per surviving instance
  // Single controller: Charlie's Z bits, one per surviving triple.
  std::vector<unsigned> charlie_bits() const {
    std::vector<unsigned> bits;
    for (const auto& o : outcomes) bits.insert(bits.end(), o.z_bits.begin(), o.z_bits.end());
    return bits;
  }
};

inline BellKind pair_for_charlie_bit(unsigned bit) { return bit ? BellKind::PsiPlus : BellKind::PhiPlus; }

// Controllers measure every remaining particle; Bob alone learns the
// outcomes he needs to infer each (a, b) pair.
inline Release controller_release(Distribution& d, std::span<const std::size_t> instances, const OutcomeChooser& choose,
                                  std::vector<ClassicalMessage>& events) {
  const auto& plan = d.plan();
  const auto schedule = swap_schedule(plan);
  Release r;
  for (std::size_t inst : instances) {
    const auto label_of = [&](const ParticleTag& t) { return d.label(t, inst); };
    r.outcomes.push_back(execute_swaps(d.ensemble(), schedule, label_of, choose));
    r.pairs.push_back(shared_pair_from_outcomes(plan, r.outcomes.back()));
  }
  if (plan.n_controllers == 1) {
    events.push_back({Party::controller(1), Party::bob(), "release", detail::join_bits(r.charlie_bits())});
    return r;
  }
  // Z results are public; Bell outcomes go to Bob only.
  for (std::size_t k = 0; k < schedule.z_measurers.size(); ++k) {
    std::vector<unsigned> bits;
    for (const auto& o : r.outcomes) bits.push_back(o.z_bits[k]);
    events.push_back({schedule.z_measurers[k].controller, Party::everyone(), "z_results", detail::join_bits(bits)});
  }
  for (std::size_t k = 0; k < schedule.bell_measurers.size(); ++k) {
    std::string payload;
    for (const auto& o : r.outcomes) payload += code_bits(o.bell[k]);
    events.push_back({schedule.bell_measurers[k].controller, Party::bob(), "release", payload});
  }
  return r;
}

inline Release controller_release(Distribution& d, std::span<const std::size_t> instances, Rng& rng,
                                  std::vector<ClassicalMessage>& events) {
  return controller_release(d, instances, sample_with(rng), events);
}

// ---------------------------------------------------------------------------
// Scramble, encode, transmit

inline void apply_pauli(Ensemble& e, const std::string& qubit, PauliOp op) { e.apply(Gate{gate_kind(op), qubit, {}}); }

inline std::vector<PauliOp> bob_scramble(Distribution& d, std::span<const std::size_t> instances,
                                         std::span<const PauliOp> ops) {
  if (ops.size() != instances.size()) throw InputError("one scramble op per pair is required");
  for (std::size_t k = 0; k < instances.size(); ++k) apply_pauli(d.ensemble(), d.bob_qubit(instances[k]), ops[k]);
  return {ops.begin(), ops.end()};
}

inline std::vector<PauliOp> bob_scramble(Distribution& d, std::span<const std::size_t> instances, Rng& rng) {
  std::vector<PauliOp> ops;
  for (std::size_t k = 0; k < instances.size(); ++k) ops.push_back(pauli_for_message(static_cast<unsigned>(rng.below(4))));
  return bob_scramble(d, instances, ops);
}

struct DecoyPhoton {
  std::size_t position = 0;
  unsigned bit = 0;  // 1 = |1> or |->
  BasisKind basis = BasisKind::Z;
  std::string qubit;
};

inline PureState decoy_state(const DecoyPhoton& d) {
  if (d.basis == BasisKind::Z) return d.bit ? PureState::one(d.qubit) : PureState::zero(d.qubit);
  return d.bit ? PureState::minus(d.qubit) : PureState::plus(d.qubit);
}

// What Alice announces after Bob confirms receipt: positions and bases only.
struct DecoyDisclosure {
  std::vector<std::size_t> positions;
  std::vector<BasisKind> bases;
};

struct Transmission {
  std::vector<std::string> sequence;  // qubit labels in channel order
  std::vector<PauliOp> encode_ops;
  std::vector<DecoyPhoton> decoys;  // Alice's private record
  DecoyDisclosure disclosure() const {
    DecoyDisclosure d;
    for (const auto& p : decoys) {
      d.positions.push_back(p.position);
      d.bases.push_back(p.basis);
    }
    return d;
  }
};

inline Transmission alice_encode(std::string_view message, Distribution& d, std::span<const std::size_t> instances,
                                 const ProtocolConfig& config, Rng& rng) {
  const auto bits = parse_message(message);
  if (bits.size() / 2 > instances.size()) throw InputError("message needs more pairs than available");
  Transmission t;
  const std::size_t pairs = bits.size() / 2;
  for (std::size_t k = 0; k < pairs; ++k) {
    const PauliOp op = pauli_for_message(bits[2 * k] << 1 | bits[2 * k + 1]);
    apply_pauli(d.ensemble(), d.alice_qubit(instances[k]), op);
    t.encode_ops.push_back(op);
  }
  const std::size_t total = pairs + config.n_decoys;
  const auto positions = rng.sample_indices(total, config.n_decoys);
  std::size_t next_pair = 0;
  for (std::size_t pos = 0, j = 0; pos < total; ++pos) {
    if (j < positions.size() && positions[j] == pos) {
      DecoyPhoton p;
      p.position = pos;
      p.basis = rng.bit() ? BasisKind::X : BasisKind::Z;
      p.bit = rng.bit();
      p.qubit = "d[" + std::to_string(j) + "]";
      d.ensemble().add(decoy_state(p));
      t.sequence.push_back(p.qubit);
      t.decoys.push_back(std::move(p));
      ++j;
    } else {
      t.sequence.push_back(d.alice_qubit(instances[next_pair++]));
    }
  }
  return t;
}

inline void transmit(Distribution& d, const Transmission& t, std::span<const std::size_t> message_instances,
                     ChannelTap* tap, Rng& rng) {
  if (!tap) return;
  for (const auto& q : t.sequence) tap->on_transmission(d.ensemble(), q, rng);
  tap->after_transmission(d.ensemble(), message_instances, rng);
}

// ---------------------------------------------------------------------------
// Decoy check and decode

struct DecoyTally {
  std::size_t decoys = 0;
  std::size_t mismatches = 0;
  double error_rate() const { return decoys ? static_cast<double>(mismatches) / static_cast<double>(decoys) : 0.0; }
};

class ProtocolStall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bob measures each disclosed decoy in its basis; Alice compares against her
// record.  Without a disclosure the check cannot start.
inline DecoyTally decoy_check(Distribution& d, const Transmission& t, const std::optional<DecoyDisclosure>& disclosure,
                              Rng& rng, std::vector<ClassicalMessage>& events) {
  if (!disclosure) throw ProtocolStall("decoy positions and bases were never disclosed");
  if (disclosure->positions.size() != t.decoys.size()) throw TranscriptError("disclosure does not match decoy record");
  std::vector<unsigned> bob_results;
  for (std::size_t j = 0; j < disclosure->positions.size(); ++j) {
    const auto& qubit = t.sequence.at(disclosure->positions[j]);
    const auto basis = disclosure->bases[j] == BasisKind::X ? MeasureBasis::x(qubit) : MeasureBasis::z(qubit);
    bob_results.push_back(d.ensemble().measure(basis, rng));
  }
  events.push_back({Party::bob(), Party::alice(), "decoy_results", detail::join_bits(bob_results)});
  DecoyTally tally;
  tally.decoys = t.decoys.size();
  for (std::size_t j = 0; j < t.decoys.size(); ++j) tally.mismatches += bob_results[j] != t.decoys[j].bit;
  events.push_back({Party::alice(), Party::everyone(), "decoy_verdict", std::to_string(tally.error_rate())});
  return tally;
}

inline std::vector<BellKind> bell_measure_pairs(Distribution& d, std::span<const std::size_t> instances, Rng& rng) {
  std::vector<BellKind> out;
  for (std::size_t inst : instances) {
    out.push_back(bell_from_code(d.ensemble().measure(MeasureBasis::bell(d.alice_qubit(inst), d.bob_qubit(inst)), rng)));
  }
  return out;
}

// Message chunk = Bell code of the result xor code of the pre-encode pair,
// where the pre-encode pair is the released pair composed with Bob's Pauli.
inline std::string bob_decode(std::span<const BellKind> bell_results, std::span<const BellKind> released_pairs,
                              std::span<const PauliOp> scramble_ops) {
  if (bell_results.size() > released_pairs.size() || bell_results.size() > scramble_ops.size()) {
    throw TranscriptError("decode bookkeeping lengths disagree");
  }
  std::string out;
  for (std::size_t k = 0; k < bell_results.size(); ++k) {
    const BellKind before = compose(released_pairs[k], message_bits(scramble_ops[k]));
    const unsigned chunk = code(bell_results[k]) ^ code(before);
    out.push_back(static_cast<char>('0' + (chunk >> 1)));
    out.push_back(static_cast<char>('0' + (chunk & 1u)));
  }
  return out;
}

inline std::vector<BellKind> pairs_from_charlie_bits(std::span<const unsigned> bits) {
  std::vector<BellKind> out;
  for (auto b : bits) out.push_back(pair_for_charlie_bit(b));
  return out;
}

// Classical bits conveyed over quantum plus classical resources spent.
inline double efficiency(std::size_t c_bits, std::size_t q_qubits, std::size_t b_classical) {
  if (q_qubits + b_classical == 0) throw InputError("efficiency needs a nonzero resource count");
  return static_cast<double>(c_bits) / static_cast<double>(q_qubits + b_classical);
}

// ---------------------------------------------------------------------------
// Full run

struct RunOverrides {
  // Flattened per-instance outcomes for the release measurements.
  std::optional<std::vector<unsigned>> release_outcomes;
  std::optional<std::vector<PauliOp>> scramble_ops;
  bool withhold_disclosure = false;
};

struct RunTranscript {
  ProtocolConfig config;
  std::string message;

  std::optional<FirstCheck> first_check;
  std::optional<Release> release;
  std::optional<std::vector<PauliOp>> bob_scramble_ops;
  std::optional<std::vector<PauliOp>> alice_encode_ops;
  std::optional<DecoyTally> decoy;
  std::optional<std::vector<BellKind>> bell_results;
  std::optional<std::string> decoded_message;

  std::vector<std::size_t> message_instances;
  std::optional<Phase> aborted_at;
  bool stalled = false;
  std::vector<ClassicalMessage> events;

  bool completed() const { return decoded_message.has_value(); }
  double first_check_error_rate() const { return first_check ? first_check->tally.error_rate() : 0.0; }
  std::optional<double> decoy_error_rate() const {
    if (!decoy) return std::nullopt;
    return decoy->error_rate();
  }
};

inline RunTranscript run_cqsc(const ProtocolConfig& requested, std::string_view message, ChannelTap* tap, Rng& rng,
                              const RunOverrides& overrides = {}) {
  RunTranscript tr;
  tr.config = resolve_config(requested, message);
  tr.message = std::string(message);
  const auto& config = tr.config;
  const std::size_t pairs = message.size() / 2;

  Distribution d = distribute(config, tap, rng);

  tr.first_check = first_eavesdrop_check(d, config, rng, tr.events);
  if (tr.first_check->tally.error_rate() > config.error_threshold) {
    tr.aborted_at = Phase::FirstCheck;
    return tr;
  }
  const auto& surviving = tr.first_check->surviving;
  tr.message_instances.assign(surviving.begin(), surviving.begin() + static_cast<std::ptrdiff_t>(pairs));

  tr.release = overrides.release_outcomes ? controller_release(d, surviving, replay(*overrides.release_outcomes), tr.events)
                                          : controller_release(d, surviving, rng, tr.events);

  if (overrides.scramble_ops) {
    tr.bob_scramble_ops = bob_scramble(d, surviving, *overrides.scramble_ops);
  } else if (config.bob_scrambles) {
    tr.bob_scramble_ops = bob_scramble(d, surviving, rng);
  } else {
    tr.bob_scramble_ops = bob_scramble(d, surviving, std::vector<PauliOp>(surviving.size(), PauliOp::I));
  }
  tr.events.push_back({Party::bob(), Party::alice(), "ready", ""});

  const Transmission t = alice_encode(message, d, tr.message_instances, config, rng);
  tr.alice_encode_ops = t.encode_ops;
  transmit(d, t, tr.message_instances, tap, rng);

  tr.events.push_back({Party::bob(), Party::alice(), "receipt_confirmation", ""});
  std::optional<DecoyDisclosure> disclosure;
  if (!overrides.withhold_disclosure) {
    disclosure = t.disclosure();
    std::string payload;
    for (std::size_t j = 0; j < disclosure->positions.size(); ++j) {
      if (j) payload += ',';
      payload += std::to_string(disclosure->positions[j]) + (disclosure->bases[j] == BasisKind::X ? "X" : "Z");
    }
    tr.events.push_back({Party::alice(), Party::everyone(), "decoy_disclosure", payload});
  }
  try {
    tr.decoy = decoy_check(d, t, disclosure, rng, tr.events);
  } catch (const ProtocolStall&) {
    tr.aborted_at = Phase::DecoyCheck;
    tr.stalled = true;
    return tr;
  }
  if (tr.decoy->error_rate() > config.error_threshold) {
    tr.aborted_at = Phase::DecoyCheck;
    return tr;
  }

  tr.bell_results = bell_measure_pairs(d, tr.message_instances, rng);
  tr.decoded_message = bob_decode(*tr.bell_results, tr.release->pairs, *tr.bob_scramble_ops);
  return tr;
}

}  // namespace cqsc
