#pragma once

// Published outcome tables for the two- and three-controller layouts, and a
// checker that replays each row through the simulator and the frame resolver.

#include <string>
#include <utility>
#include <vector>

#include "cqsc/multictrl.hpp"

namespace cqsc {

struct OutcomeRow {
  // Z bits keyed by the measured particle, in the table's column order.
  std::vector<std::pair<ParticleTag, unsigned>> z_bits;
  BellKind c1_outcome = BellKind::PhiPlus;
  BellKind shared = BellKind::PhiPlus;
};

namespace detail {

inline std::vector<OutcomeRow> expand_blocks(const std::vector<ParticleTag>& columns,
                                             const std::vector<std::pair<std::vector<unsigned>, std::array<BellKind, 4>>>& blocks) {
  std::vector<OutcomeRow> rows;
  for (const auto& [bits, shared] : blocks) {
    for (unsigned c1 = 0; c1 < 4; ++c1) {
      OutcomeRow row;
      for (std::size_t i = 0; i < columns.size(); ++i) row.z_bits.emplace_back(columns[i], bits[i]);
      row.c1_outcome = bell_from_code(c1);
      row.shared = shared[c1];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace detail

// Two controllers: columns C2 (p'2 p2), C1 (p'1 p1), shared pair.
inline std::vector<OutcomeRow> two_controller_table() {
  using B = BellKind;
  return detail::expand_blocks(
      {ParticleTag::p_prime(2), ParticleTag::p(2)},
      {{{0, 0}, {B::PhiPlus, B::PsiPlus, B::PhiMinus, B::PsiMinus}},
       {{0, 1}, {B::PsiPlus, B::PhiPlus, B::PsiMinus, B::PhiMinus}},
       {{1, 0}, {B::PsiPlus, B::PhiPlus, B::PsiMinus, B::PhiMinus}},
       {{1, 1}, {B::PhiPlus, B::PsiPlus, B::PhiMinus, B::PsiMinus}}});
}

// Three controllers: columns C3 (p3), C2 (p2), C1 (p'1 p1), shared pair.
inline std::vector<OutcomeRow> three_controller_table() {
  using B = BellKind;
  return detail::expand_blocks(
      {ParticleTag::p(3), ParticleTag::p(2)},
      {{{0, 0}, {B::PhiPlus, B::PsiPlus, B::PhiMinus, B::PsiMinus}},
       {{0, 1}, {B::PsiPlus, B::PhiPlus, B::PsiMinus, B::PhiMinus}},
       {{1, 0}, {B::PsiPlus, B::PhiPlus, B::PsiMinus, B::PhiMinus}},
       {{1, 1}, {B::PhiPlus, B::PsiPlus, B::PhiMinus, B::PsiMinus}}});
}

// Reorders a row's Z bits into schedule order.
inline SwapOutcomes row_outcomes(const DistributionPlan& plan, const OutcomeRow& row) {
  SwapOutcomes o;
  for (const auto& z : swap_schedule(plan).z_measurers) {
    bool found = false;
    for (const auto& [tag, bit] : row.z_bits) {
      if (tag == z.tag) {
        o.z_bits.push_back(bit);
        found = true;
      }
    }
    if (!found) throw InputError("table row lacks a Z bit for " + to_string(z.tag));
  }
  o.bell.push_back(row.c1_outcome);
  return o;
}

struct RowCheck {
  OutcomeRow row;
  BellKind simulated = BellKind::PhiPlus;
  BellKind resolved = BellKind::PhiPlus;
  bool pass() const { return simulated == row.shared && resolved == row.shared; }
};

inline std::vector<RowCheck> verify_table(int n_controllers, const std::vector<OutcomeRow>& rows) {
  const auto plan = distribution_plan(n_controllers);
  std::vector<RowCheck> checks;
  for (const auto& row : rows) {
    const auto outcomes = row_outcomes(plan, row);
    RowCheck c;
    c.row = row;
    c.simulated = run_swapping_forced(plan, outcomes).shared;
    c.resolved = shared_pair_from_outcomes(plan, outcomes);
    checks.push_back(std::move(c));
  }
  return checks;
}

}  // namespace cqsc
