#pragma once

// Pure-state simulator over registers of labeled qubits.
//
// Basis index bit k, counted from the most significant end, belongs to
// labels()[k], so the amplitude of |abc> with a=1, b=0, c=1 sits at index
// 0b101 of a register labeled (a, b, c).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqsc/errors.hpp"
#include "cqsc/rng.hpp"

namespace cqsc {

using Complex = std::complex<double>;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kAmplitudeTolerance = 1e-9;
inline constexpr double kSameStateFidelity = 1.0 - 1e-9;
// Forced outcomes below this Born weight are rejected.
inline constexpr double kMinBranchProbability = 1e-12;

class PureState {
 public:
  // Zero-qubit register (the scalar 1).
  PureState() : amplitudes_{Complex{1.0, 0.0}} {}

  PureState(std::vector<std::string> labels, std::vector<Complex> amplitudes)
      : labels_(std::move(labels)), amplitudes_(std::move(amplitudes)) {
    check_labels(labels_);
    if (labels_.size() > 24) throw InputError("register too large");
    if (amplitudes_.size() != (std::size_t{1} << labels_.size())) {
      throw InputError("amplitude count does not match 2^qubits");
    }
    if (std::abs(norm_squared() - 1.0) > kNormTolerance) {
      throw InputError("state is not normalized");
    }
  }

  static PureState basis(std::vector<std::string> labels, std::uint64_t index) {
    std::vector<Complex> amps(std::size_t{1} << labels.size());
    if (index >= amps.size()) throw InputError("basis index out of range");
    amps[index] = 1.0;
    return PureState(std::move(labels), std::move(amps));
  }

  static PureState zero(std::string label) { return basis({std::move(label)}, 0); }
  static PureState one(std::string label) { return basis({std::move(label)}, 1); }
  static PureState plus(std::string label) {
    return PureState({std::move(label)}, {kInvSqrt2, kInvSqrt2});
  }
  static PureState minus(std::string label) {
    return PureState({std::move(label)}, {kInvSqrt2, -kInvSqrt2});
  }

  std::size_t qubit_count() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex amplitude(std::uint64_t index) const { return amplitudes_.at(index); }

  bool has(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::size_t ordinal(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw LabelError("unknown qubit label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  // Bit mask selecting `label` inside a basis index.
  std::uint64_t mask(const std::string& label) const {
    return std::uint64_t{1} << (labels_.size() - 1 - ordinal(label));
  }

  double norm_squared() const {
    double sum = 0.0;
    for (const auto& a : amplitudes_) sum += std::norm(a);
    return sum;
  }

  // Same physical state with qubits listed in `order` (a permutation of labels()).
  PureState reordered(const std::vector<std::string>& order) const {
    if (order.size() != labels_.size()) throw LabelError("reorder needs the same label set");
    std::vector<std::uint64_t> masks;
    masks.reserve(order.size());
    for (const auto& l : order) masks.push_back(mask(l));
    check_labels(order);
    std::vector<Complex> out(amplitudes_.size());
    const std::size_t n = order.size();
    for (std::uint64_t j = 0; j < out.size(); ++j) {
      std::uint64_t src = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (j & (std::uint64_t{1} << (n - 1 - k))) src |= masks[k];
      }
      out[j] = amplitudes_[src];
    }
    return from_raw(order, std::move(out));
  }

  PureState relabeled(const std::string& from, const std::string& to) const {
    auto labels = labels_;
    labels[ordinal(from)] = to;
    check_labels(labels);
    return from_raw(std::move(labels), amplitudes_);
  }

  // Unchecked construction for internal use; callers guarantee the invariants.
  static PureState from_raw(std::vector<std::string> labels, std::vector<Complex> amps) {
    PureState s;
    s.labels_ = std::move(labels);
    s.amplitudes_ = std::move(amps);
    return s;
  }

  std::vector<Complex>& mutable_amplitudes() { return amplitudes_; }

  static void check_labels(const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        if (labels[i] == labels[j]) throw LabelError("duplicate qubit label '" + labels[i] + "'");
      }
    }
  }

 private:
  std::vector<std::string> labels_;
  std::vector<Complex> amplitudes_;
};

// ---------------------------------------------------------------------------
// Gates

enum class GateKind { I, X, Z, iY, H, CNOT };

struct Gate {
  GateKind kind = GateKind::I;
  std::string target;
  std::string control;  // CNOT only

  static Gate identity(std::string t) { return {GateKind::I, std::move(t), {}}; }
  static Gate x(std::string t) { return {GateKind::X, std::move(t), {}}; }
  static Gate z(std::string t) { return {GateKind::Z, std::move(t), {}}; }
  static Gate iy(std::string t) { return {GateKind::iY, std::move(t), {}}; }
  static Gate h(std::string t) { return {GateKind::H, std::move(t), {}}; }
  static Gate cnot(std::string c, std::string t) {
    return {GateKind::CNOT, std::move(t), std::move(c)};
  }
};

// Row-major 2x2 matrix {m00, m01, m10, m11}.
using Matrix2 = std::array<Complex, 4>;

// iY is taken as Z*X = [[0,1],[-1,0]].
inline Matrix2 gate_matrix(GateKind kind) {
  switch (kind) {
    case GateKind::I: return {1.0, 0.0, 0.0, 1.0};
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::iY: return {0.0, 1.0, -1.0, 0.0};
    case GateKind::H: return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
    case GateKind::CNOT: break;
  }
  throw InputError("CNOT has no single-qubit matrix");
}

inline void apply_in_place(PureState& state, const Gate& gate) {
  auto& amps = state.mutable_amplitudes();
  if (gate.kind == GateKind::CNOT) {
    if (gate.control == gate.target) throw LabelError("CNOT control equals target");
    const auto c = state.mask(gate.control);
    const auto t = state.mask(gate.target);
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
      if ((i & c) && !(i & t)) std::swap(amps[i], amps[i | t]);
    }
    return;
  }
  const auto t = state.mask(gate.target);
  const Matrix2 m = gate_matrix(gate.kind);
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (i & t) continue;
    const Complex lo = amps[i];
    const Complex hi = amps[i | t];
    amps[i] = m[0] * lo + m[1] * hi;
    amps[i | t] = m[2] * lo + m[3] * hi;
  }
}

inline PureState apply_gate(PureState state, const Gate& gate) {
  apply_in_place(state, gate);
  return state;
}

// ---------------------------------------------------------------------------
// Composition and comparison

inline PureState tensor(const PureState& a, const PureState& b) {
  std::vector<std::string> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  PureState::check_labels(labels);
  const auto ra = a.amplitudes();
  const auto rb = b.amplitudes();
  std::vector<Complex> amps(ra.size() * rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    for (std::size_t j = 0; j < rb.size(); ++j) amps[i * rb.size() + j] = ra[i] * rb[j];
  }
  return PureState::from_raw(std::move(labels), std::move(amps));
}

inline Complex inner_product(const PureState& a, const PureState& b) {
  const PureState aligned = b.reordered(a.labels());
  Complex sum = 0.0;
  const auto ra = a.amplitudes();
  const auto rb = aligned.amplitudes();
  for (std::size_t i = 0; i < ra.size(); ++i) sum += std::conj(ra[i]) * rb[i];
  return sum;
}

// |<a|b>|^2; qubit order may differ between the two registers.
inline double fidelity(const PureState& a, const PureState& b) {
  if (a.qubit_count() != b.qubit_count()) throw LabelError("fidelity needs equal label sets");
  for (const auto& l : a.labels()) {
    if (!b.has(l)) throw LabelError("fidelity needs equal label sets; missing '" + l + "'");
  }
  return std::norm(inner_product(a, b));
}

inline bool same_state(const PureState& a, const PureState& b) {
  return fidelity(a, b) > kSameStateFidelity;
}

// ---------------------------------------------------------------------------
// Measurement

enum class BasisKind { Z, X, Bell };

struct MeasureBasis {
  BasisKind kind = BasisKind::Z;
  std::vector<std::string> targets;

  static MeasureBasis z(std::string l) { return {BasisKind::Z, {std::move(l)}}; }
  static MeasureBasis x(std::string l) { return {BasisKind::X, {std::move(l)}}; }
  static MeasureBasis bell(std::string l1, std::string l2) {
    return {BasisKind::Bell, {std::move(l1), std::move(l2)}};
  }
};

// For Z and X the outcome is the bit (1 = |1> or |->).  For Bell it is the
// two-bit code phi+ = 00, psi+ = 01, phi- = 10, psi- = 11, i.e. (phase, parity).
struct Measurement {
  unsigned outcome = 0;
  double probability = 0.0;
  PureState post;
};

// Picks a branch index given the Born probabilities of every branch.
using OutcomeChooser = std::function<unsigned(std::span<const double>)>;

inline OutcomeChooser sample_with(Rng& rng) {
  return [&rng](std::span<const double> probs) {
    const double u = rng.uniform();
    double acc = 0.0;
    unsigned last_nonzero = 0;
    for (unsigned k = 0; k < probs.size(); ++k) {
      if (probs[k] <= 0.0) continue;
      acc += probs[k];
      last_nonzero = k;
      if (u < acc) return k;
    }
    return last_nonzero;
  };
}

inline OutcomeChooser force_outcome(unsigned outcome) {
  return [outcome](std::span<const double> probs) {
    if (outcome >= probs.size()) throw ProjectionError("forced outcome out of range");
    if (probs[outcome] < kMinBranchProbability) {
      throw ProjectionError("forced outcome has zero probability");
    }
    return outcome;
  };
}

namespace detail {

// Eigenvectors of each basis, indexed by outcome, over the target qubits in
// the order they are listed.
inline std::vector<std::vector<Complex>> basis_vectors(BasisKind kind) {
  const double r = kInvSqrt2;
  switch (kind) {
    case BasisKind::Z: return {{1.0, 0.0}, {0.0, 1.0}};
    case BasisKind::X: return {{r, r}, {r, -r}};
    case BasisKind::Bell:
      return {{r, 0.0, 0.0, r}, {0.0, r, r, 0.0}, {r, 0.0, 0.0, -r}, {0.0, r, -r, 0.0}};
  }
  return {};
}

// <v|_targets applied to the state: the unnormalized remainder register.
inline std::vector<Complex> contract(const PureState& state, const std::vector<std::uint64_t>& target_masks,
                                     const std::vector<std::uint64_t>& rest_masks,
                                     const std::vector<Complex>& v) {
  const std::size_t k = target_masks.size();
  const std::size_t m = rest_masks.size();
  std::vector<Complex> out(std::size_t{1} << m);
  const auto amps = state.amplitudes();
  for (std::uint64_t r = 0; r < out.size(); ++r) {
    std::uint64_t base = 0;
    for (std::size_t q = 0; q < m; ++q) {
      if (r & (std::uint64_t{1} << (m - 1 - q))) base |= rest_masks[q];
    }
    Complex sum = 0.0;
    for (std::uint64_t j = 0; j < v.size(); ++j) {
      if (v[j] == Complex{0.0, 0.0}) continue;
      std::uint64_t idx = base;
      for (std::size_t q = 0; q < k; ++q) {
        if (j & (std::uint64_t{1} << (k - 1 - q))) idx |= target_masks[q];
      }
      sum += std::conj(v[j]) * amps[idx];
    }
    out[r] = sum;
  }
  return out;
}

}  // namespace detail

// Born probabilities of every outcome of `basis` on `state`.
inline std::vector<double> outcome_probabilities(const PureState& state, const MeasureBasis& basis) {
  const std::size_t want = basis.kind == BasisKind::Bell ? 2 : 1;
  if (basis.targets.size() != want) throw LabelError("wrong number of measurement targets");
  std::vector<std::uint64_t> target_masks;
  for (const auto& t : basis.targets) target_masks.push_back(state.mask(t));
  PureState::check_labels(basis.targets);
  std::vector<std::uint64_t> rest_masks;
  for (const auto& l : state.labels()) {
    if (std::find(basis.targets.begin(), basis.targets.end(), l) == basis.targets.end()) {
      rest_masks.push_back(state.mask(l));
    }
  }
  std::vector<double> probs;
  for (const auto& v : detail::basis_vectors(basis.kind)) {
    double p = 0.0;
    for (const auto& a : detail::contract(state, target_masks, rest_masks, v)) p += std::norm(a);
    probs.push_back(p);
  }
  return probs;
}

// Projective measurement.  The measured qubits are removed from the register
// and the remainder is renormalized.
inline Measurement measure(const PureState& state, const MeasureBasis& basis, const OutcomeChooser& choose) {
  const auto probs = outcome_probabilities(state, basis);
  const unsigned outcome = choose(probs);
  std::vector<std::uint64_t> target_masks;
  for (const auto& t : basis.targets) target_masks.push_back(state.mask(t));
  std::vector<std::uint64_t> rest_masks;
  std::vector<std::string> rest_labels;
  for (const auto& l : state.labels()) {
    if (std::find(basis.targets.begin(), basis.targets.end(), l) == basis.targets.end()) {
      rest_masks.push_back(state.mask(l));
      rest_labels.push_back(l);
    }
  }
  auto post = detail::contract(state, target_masks, rest_masks, detail::basis_vectors(basis.kind)[outcome]);
  const double p = probs[outcome];
  if (p < kMinBranchProbability) throw ProjectionError("selected branch has zero probability");
  const double scale = 1.0 / std::sqrt(p);
  for (auto& a : post) a *= scale;
  return {outcome, p, PureState::from_raw(std::move(rest_labels), std::move(post))};
}

inline Measurement measure(const PureState& state, const MeasureBasis& basis, Rng& rng) {
  return measure(state, basis, sample_with(rng));
}

inline Measurement measure_forced(const PureState& state, const MeasureBasis& basis, unsigned outcome) {
  return measure(state, basis, force_outcome(outcome));
}

// ---------------------------------------------------------------------------
// Ensemble: a set of independent registers addressed by qubit label.  Gates
// that straddle two registers merge them; measurements shrink them.  Keeps a
// run over many unentangled triples at O(2^3) memory per triple.

class Ensemble {
 public:
  void add(PureState state) {
    for (const auto& l : state.labels()) {
      if (where_.count(l)) throw LabelError("qubit label '" + l + "' already in use");
    }
    const std::size_t slot = registers_.size();
    for (const auto& l : state.labels()) where_[l] = slot;
    registers_.push_back(std::move(state));
  }

  bool contains(const std::string& label) const { return where_.count(label) != 0; }

  std::size_t qubit_count() const { return where_.size(); }

  const PureState& register_of(const std::string& label) const { return *registers_[slot_of(label)]; }

  // Merges the registers holding `labels` and returns the merged register.
  const PureState& joint(const std::vector<std::string>& labels) {
    if (labels.empty()) throw LabelError("joint needs at least one label");
    std::size_t slot = slot_of(labels.front());
    for (const auto& l : labels) slot = merge(slot, slot_of(l));
    return *registers_[slot];
  }

  void apply(const Gate& gate) {
    std::size_t slot = slot_of(gate.target);
    if (gate.kind == GateKind::CNOT) slot = merge(slot_of(gate.control), slot);
    apply_in_place(*registers_[slot], gate);
  }

  // Returns the outcome; the measured qubits leave the ensemble.
  unsigned measure(const MeasureBasis& basis, const OutcomeChooser& choose) {
    if (basis.targets.empty()) throw LabelError("measurement without targets");
    std::size_t slot = slot_of(basis.targets.front());
    for (const auto& t : basis.targets) slot = merge(slot, slot_of(t));
    Measurement m = cqsc::measure(*registers_[slot], basis, choose);
    for (const auto& t : basis.targets) where_.erase(t);
    if (m.post.qubit_count() == 0) {
      registers_[slot].reset();
    } else {
      registers_[slot] = std::move(m.post);
    }
    return m.outcome;
  }

  unsigned measure(const MeasureBasis& basis, Rng& rng) { return measure(basis, sample_with(rng)); }

  void rename(const std::string& from, const std::string& to) {
    if (where_.count(to)) throw LabelError("qubit label '" + to + "' already in use");
    const std::size_t slot = slot_of(from);
    registers_[slot] = registers_[slot]->relabeled(from, to);
    where_.erase(from);
    where_[to] = slot;
  }

 private:
  std::size_t slot_of(const std::string& label) const {
    auto it = where_.find(label);
    if (it == where_.end()) throw LabelError("unknown qubit label '" + label + "'");
    return it->second;
  }

  std::size_t merge(std::size_t into, std::size_t from) {
    if (into == from) return into;
    registers_[into] = tensor(*registers_[into], *registers_[from]);
    for (const auto& l : registers_[from]->labels()) where_[l] = into;
    registers_[from].reset();
    return into;
  }

  std::vector<std::optional<PureState>> registers_;
  std::map<std::string, std::size_t> where_;
};

}  // namespace cqsc
