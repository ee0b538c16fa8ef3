#pragma once

// N-controller layouts: which GHZ-like triples are prepared, who holds each
// particle, the order of Z and Bell measurements that swaps entanglement onto
// (a, b), and a Pauli-frame resolver that predicts the resulting Bell pair
// from the announced outcomes alone.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cqsc/party.hpp"
#include "cqsc/qsim.hpp"
#include "cqsc/states.hpp"

namespace cqsc {

enum class UserRole { Alice, Bob };

// p_k, p'_k, or a user particle.  The generator emits p'_0 and p'_-1 and then
// substitutes them with Alice's a and Bob's b.
struct ParticleTag {
  bool primed = false;
  int index = 0;
  std::optional<UserRole> role;

  static ParticleTag p(int k) { return {false, k, std::nullopt}; }
  static ParticleTag p_prime(int k) { return {true, k, std::nullopt}; }
  static ParticleTag user(UserRole r) { return {false, 0, r}; }

  bool is_user() const { return role.has_value(); }
  friend bool operator==(const ParticleTag&, const ParticleTag&) = default;
};

inline std::string to_string(const ParticleTag& t) {
  if (t.role) return *t.role == UserRole::Alice ? "a" : "b";
  return std::string(t.primed ? "p'" : "p") + std::to_string(t.index);
}

struct DistributionPlan {
  int n_controllers = 1;
  std::vector<std::array<ParticleTag, 3>> triples;

  Party holder(const ParticleTag& t) const {
    if (t.role) return *t.role == UserRole::Alice ? Party::alice() : Party::bob();
    return Party::controller(t.index);
  }

  // Every particle with its holder, in triple order.
  std::vector<std::pair<ParticleTag, Party>> holders() const {
    std::vector<std::pair<ParticleTag, Party>> out;
    for (const auto& tri : triples) {
      for (const auto& t : tri) out.emplace_back(t, holder(t));
    }
    return out;
  }

  // Qubit label used in simulation.  The single-controller layout keeps the
  // conventional name c for Charlie's particle.
  std::string label(const ParticleTag& t) const {
    if (n_controllers == 1 && !t.is_user()) return "c";
    return to_string(t);
  }
};

inline std::size_t plan_triple_count(int n_controllers) {
  return n_controllers % 2 ? static_cast<std::size_t>((n_controllers + 1) / 2)
                           : static_cast<std::size_t>((n_controllers + 2) / 2);
}

inline DistributionPlan distribution_plan(int n) {
  if (n < 1) throw InputError("at least one controller is required");
  using T = ParticleTag;
  DistributionPlan plan;
  plan.n_controllers = n;
  if (n % 2) {
    plan.triples.push_back({T::p_prime((n - 1) / 2), T::p_prime((n - 3) / 2), T::p((n + 1) / 2)});
    for (int m = 0; m <= (n - 3) / 2 && n >= 3; ++m) {
      plan.triples.push_back({T::p((n - (2 * m + 1)) / 2), T::p_prime((n - (2 * m + 5)) / 2),
                              T::p((n + (2 * m + 3)) / 2)});
    }
  } else {
    plan.triples.push_back({T::p_prime(n / 2), T::p_prime((n - 2) / 2), T::p_prime((n + 2) / 2)});
    for (int m = 0; m <= (n - 2) / 2; ++m) {
      plan.triples.push_back({T::p((n - 2 * m) / 2), T::p_prime((n - (2 * m + 4)) / 2),
                              T::p((n + (2 * m + 2)) / 2)});
    }
  }
  for (auto& tri : plan.triples) {
    for (auto& t : tri) {
      if (t.primed && t.index == 0) t = T::user(UserRole::Alice);
      if (t.primed && t.index == -1) t = T::user(UserRole::Bob);
    }
  }
  return plan;
}

struct ZStep {
  Party controller;
  ParticleTag tag;
  std::size_t triple = 0;
};

struct BellStep {
  Party controller;
  ParticleTag first;
  ParticleTag second;
};

struct SwapSchedule {
  std::vector<ZStep> z_measurers;
  std::vector<BellStep> bell_measurers;
};

// Third particles are Z-measured; controllers C_top .. C_1 then Bell-measure
// the two particles they still hold, top = (N-1)/2 (odd N) or N/2 (even N).
inline SwapSchedule swap_schedule(const DistributionPlan& plan) {
  SwapSchedule s;
  for (std::size_t i = 0; i < plan.triples.size(); ++i) {
    const auto& third = plan.triples[i][2];
    if (third.is_user()) throw PlanError("a user particle cannot be Z-measured");
    s.z_measurers.push_back({plan.holder(third), third, i});
  }
  const int n = plan.n_controllers;
  const int top = n % 2 ? (n - 1) / 2 : n / 2;
  std::map<int, std::vector<std::pair<ParticleTag, bool>>> remaining;  // controller -> (tag, is first)
  for (const auto& tri : plan.triples) {
    for (int pos = 0; pos < 2; ++pos) {
      if (!tri[pos].is_user()) remaining[tri[pos].index].emplace_back(tri[pos], pos == 0);
    }
  }
  for (int k = top; k >= 1; --k) {
    auto held = remaining[k];
    if (held.size() != 2) {
      throw PlanError("controller C" + std::to_string(k) + " holds " + std::to_string(held.size()) +
                      " unmeasured particles, expected 2");
    }
    if (!held[0].second && held[1].second) std::swap(held[0], held[1]);
    s.bell_measurers.push_back({Party::controller(k), held[0].first, held[1].first});
    remaining.erase(k);
  }
  for (const auto& [k, held] : remaining) {
    if (!held.empty()) throw PlanError("controller C" + std::to_string(k) + " has particles outside the schedule");
  }
  return s;
}

// Announced outcomes: one Z bit per triple (schedule order) and one Bell
// outcome per Bell step (schedule order).
struct SwapOutcomes {
  std::vector<unsigned> z_bits;
  std::vector<BellKind> bell;
};

// Chooser that replays `outcomes` in order, one per measurement.
inline OutcomeChooser replay(std::vector<unsigned> outcomes) {
  auto next = std::make_shared<std::size_t>(0);
  return [outcomes = std::move(outcomes), next](std::span<const double> probs) {
    if (*next >= outcomes.size()) throw InputError("ran out of forced outcomes");
    return force_outcome(outcomes[(*next)++])(probs);
  };
}

inline std::vector<unsigned> flatten(const SwapOutcomes& o) {
  std::vector<unsigned> flat(o.z_bits.begin(), o.z_bits.end());
  for (auto k : o.bell) flat.push_back(code(k));
  return flat;
}

// Runs the schedule on qubits already present in `ensemble`, named by
// `label_of`.  Leaves only the user particles behind.
template <class LabelFn>
SwapOutcomes execute_swaps(Ensemble& ensemble, const SwapSchedule& schedule, const LabelFn& label_of,
                           const OutcomeChooser& choose) {
  SwapOutcomes out;
  for (const auto& z : schedule.z_measurers) {
    out.z_bits.push_back(ensemble.measure(MeasureBasis::z(label_of(z.tag)), choose));
  }
  for (const auto& b : schedule.bell_measurers) {
    out.bell.push_back(bell_from_code(
        ensemble.measure(MeasureBasis::bell(label_of(b.first), label_of(b.second)), choose)));
  }
  return out;
}

struct SwapRun {
  BellKind shared = BellKind::PhiPlus;
  SwapOutcomes outcomes;
  PureState final_pair;
};

inline SwapRun run_swapping(const DistributionPlan& plan, const OutcomeChooser& choose) {
  Ensemble e;
  const auto label_of = [&plan](const ParticleTag& t) { return plan.label(t); };
  for (const auto& tri : plan.triples) {
    e.add(ghz_like(GhzLabel(0), label_of(tri[0]), label_of(tri[1]), label_of(tri[2])));
  }
  SwapRun run;
  run.outcomes = execute_swaps(e, swap_schedule(plan), label_of, choose);
  run.final_pair = e.joint({"a", "b"}).reordered({"a", "b"});
  if (e.qubit_count() != 2) throw PlanError("particles other than a and b survived the swap chain");
  const auto kind = classify_bell(run.final_pair);
  if (!kind) throw PlanError("swap chain did not leave (a, b) in a Bell state");
  run.shared = *kind;
  return run;
}

inline SwapRun run_swapping(const DistributionPlan& plan, Rng& rng) { return run_swapping(plan, sample_with(rng)); }

inline SwapRun run_swapping_forced(const DistributionPlan& plan, const SwapOutcomes& outcomes) {
  return run_swapping(plan, replay(flatten(outcomes)));
}

// Pauli-frame resolution.  A Z outcome z on a triple's third particle leaves
// the other two in the pair with code z (phi+ or psi+).  A Bell outcome w on
// (q, r), with q paired to q' under code u and r to r' under code v, leaves
// (q', r') under code u ^ v ^ w.
inline BellKind shared_pair_from_outcomes(const DistributionPlan& plan, const SwapOutcomes& outcomes) {
  const auto schedule = swap_schedule(plan);
  if (outcomes.z_bits.size() != schedule.z_measurers.size() ||
      outcomes.bell.size() != schedule.bell_measurers.size()) {
    throw InputError("incomplete outcome record");
  }
  struct Link {
    std::string partner;
    unsigned code;
  };
  std::map<std::string, Link> frame;
  for (std::size_t i = 0; i < plan.triples.size(); ++i) {
    const unsigned z = outcomes.z_bits[i];
    if (z > 1) throw InputError("Z outcome must be 0 or 1");
    const auto q0 = plan.label(plan.triples[i][0]);
    const auto q1 = plan.label(plan.triples[i][1]);
    frame[q0] = {q1, z};
    frame[q1] = {q0, z};
  }
  for (std::size_t s = 0; s < schedule.bell_measurers.size(); ++s) {
    const auto q = plan.label(schedule.bell_measurers[s].first);
    const auto r = plan.label(schedule.bell_measurers[s].second);
    const Link lq = frame.at(q);
    const Link lr = frame.at(r);
    if (lq.partner == r) throw PlanError("Bell step measures both halves of one pair");
    const unsigned c = lq.code ^ lr.code ^ code(outcomes.bell[s]);
    frame.erase(q);
    frame.erase(r);
    frame[lq.partner] = {lr.partner, c};
    frame[lr.partner] = {lq.partner, c};
  }
  const auto it = frame.find("a");
  if (it == frame.end() || it->second.partner != "b") throw PlanError("frame does not end on (a, b)");
  return bell_from_code(it->second.code);
}

}  // namespace cqsc
