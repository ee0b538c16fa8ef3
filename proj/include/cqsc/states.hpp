#pragma once

// Bell states, the eight GHZ-like states zeta_xyz, and their preparation.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "cqsc/qsim.hpp"

namespace cqsc {

// Enumerator value is the two-bit Bell code (phase bit, parity bit).
enum class BellKind : unsigned { PhiPlus = 0b00, PsiPlus = 0b01, PhiMinus = 0b10, PsiMinus = 0b11 };

inline constexpr std::array<BellKind, 4> kAllBellKinds = {BellKind::PhiPlus, BellKind::PsiPlus,
                                                          BellKind::PhiMinus, BellKind::PsiMinus};

constexpr unsigned code(BellKind kind) { return static_cast<unsigned>(kind); }

inline BellKind bell_from_code(unsigned c) {
  if (c > 3) throw InputError("Bell code out of range");
  return static_cast<BellKind>(c);
}

// Frame composition: applying a Pauli with code p to either qubit of a Bell
// pair of kind k yields the kind with code k ^ p (up to global phase).
constexpr BellKind compose(BellKind kind, unsigned pauli_code) {
  return static_cast<BellKind>(code(kind) ^ (pauli_code & 3u));
}

constexpr std::string_view name(BellKind kind) {
  switch (kind) {
    case BellKind::PhiPlus: return "phi+";
    case BellKind::PsiPlus: return "psi+";
    case BellKind::PhiMinus: return "phi-";
    case BellKind::PsiMinus: return "psi-";
  }
  return "?";
}

inline std::optional<BellKind> bell_from_name(std::string_view s) {
  for (auto k : kAllBellKinds) {
    if (name(k) == s) return k;
  }
  return std::nullopt;
}

inline std::string code_bits(BellKind kind) {
  return {static_cast<char>('0' + (code(kind) >> 1)), static_cast<char>('0' + (code(kind) & 1u))};
}

inline PureState bell(BellKind kind, std::string first, std::string second) {
  const double r = kInvSqrt2;
  std::vector<Complex> amps(4);
  switch (kind) {
    case BellKind::PhiPlus: amps = {r, 0.0, 0.0, r}; break;
    case BellKind::PsiPlus: amps = {0.0, r, r, 0.0}; break;
    case BellKind::PhiMinus: amps = {r, 0.0, 0.0, -r}; break;
    case BellKind::PsiMinus: amps = {0.0, r, -r, 0.0}; break;
  }
  return PureState({std::move(first), std::move(second)}, std::move(amps));
}

// Index xyz of one of the eight GHZ-like states.
class GhzLabel {
 public:
  constexpr GhzLabel() = default;
  explicit GhzLabel(unsigned bits) : bits_(bits) {
    if (bits > 7) throw InputError("GHZ-like label must be a 3-bit value");
  }
  constexpr unsigned bits() const { return bits_; }
  constexpr unsigned x() const { return (bits_ >> 2) & 1u; }
  constexpr unsigned y() const { return (bits_ >> 1) & 1u; }
  constexpr unsigned z() const { return bits_ & 1u; }
  friend constexpr bool operator==(GhzLabel, GhzLabel) = default;

 private:
  unsigned bits_ = 0;
};

// zeta_xyz = (|B_x+>|z> + (-1)^y |B_x->|1-z>) / sqrt2 over (first, second, third),
// where B_x+ is phi+ (x=0) or phi- (x=1) and B_x- the matching psi state.
inline PureState ghz_like(GhzLabel label, std::string first, std::string second, std::string third) {
  const BellKind phi = label.x() ? BellKind::PhiMinus : BellKind::PhiPlus;
  const BellKind psi = label.x() ? BellKind::PsiMinus : BellKind::PsiPlus;
  const PureState phi_pair = bell(phi, first, second);
  const PureState psi_pair = bell(psi, first, second);
  const double sign = label.y() ? -1.0 : 1.0;
  std::vector<Complex> amps(8);
  for (unsigned pair = 0; pair < 4; ++pair) {
    amps[(pair << 1) | label.z()] += kInvSqrt2 * phi_pair.amplitude(pair);
    amps[(pair << 1) | (1u - label.z())] += sign * kInvSqrt2 * psi_pair.amplitude(pair);
  }
  return PureState({std::move(first), std::move(second), std::move(third)}, std::move(amps));
}

// |+>_first (x) phi+_(second,third), then CNOT(first -> second).  Lands on zeta_000.
inline PureState prepare_ghz_circuit(std::string first, std::string second, std::string third) {
  PureState s = tensor(PureState::plus(first), bell(BellKind::PhiPlus, second, third));
  apply_in_place(s, Gate::cnot(first, second));
  return s;
}

// The Bell kind matching a two-qubit state up to global phase, if any.
inline std::optional<BellKind> classify_bell(const PureState& state) {
  if (state.qubit_count() != 2) return std::nullopt;
  const auto& l = state.labels();
  for (auto k : kAllBellKinds) {
    if (fidelity(bell(k, l[0], l[1]), state) > kSameStateFidelity) return k;
  }
  return std::nullopt;
}

}  // namespace cqsc
