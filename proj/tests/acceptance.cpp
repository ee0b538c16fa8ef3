// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance <path to cqsc>

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "cqsc/adversary.hpp"
#include "cqsc/tables.hpp"

using namespace cqsc;

namespace {

constexpr double kChi2Df3At4Sigma = 22.0613;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double chi2_uniform(const std::array<int, 4>& counts) {
  double total = 0;
  for (int c : counts) total += c;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - total / 4) * (c - total / 4) / (total / 4);
  return chi2;
}

BellKind pair_kind(Distribution& d, std::size_t i) {
  const auto a = d.alice_qubit(i), b = d.bob_qubit(i);
  return classify_bell(d.ensemble().joint({a, b}).reordered({a, b})).value();
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void state_construction(Verdict& v) {
  const auto z = ghz_like(GhzLabel(0), "1", "2", "3");
  double worst = 0;
  for (std::uint64_t i = 0; i < 8; ++i) {
    const bool listed = i == 0b000 || i == 0b011 || i == 0b110 || i == 0b101;
    worst = std::max(worst, std::abs(z.amplitude(i) - Complex(listed ? 0.5 : 0.0)));
  }
  double gram = 0;
  for (unsigned x = 0; x < 8; ++x) {
    for (unsigned y = 0; y < 8; ++y) {
      const auto ip = inner_product(ghz_like(GhzLabel(x), "1", "2", "3"), ghz_like(GhzLabel(y), "1", "2", "3"));
      gram = std::max(gram, std::abs(ip - Complex(x == y ? 1.0 : 0.0)));
    }
  }
  v.require(worst <= 1e-12, "amplitudes");
  v.require(gram <= 1e-12, "orthonormality");
  v.detail << "max amplitude deviation " << worst << ", max Gram deviation " << gram;
}

void collapse_rule(Verdict& v) {
  double worst = 1;
  for (unsigned o : {0u, 1u}) {
    const auto m = measure_forced(ghz_like(GhzLabel(0), "a", "b", "c"), MeasureBasis::z("c"), o);
    const double f = fidelity(m.post, bell(o ? BellKind::PsiPlus : BellKind::PhiPlus, "a", "b"));
    worst = std::min(worst, f);
    v.require(std::abs(m.probability - 0.5) < 1e-12, "branch probability");
  }
  v.require(worst > 1 - 1e-9, "fidelity");
  v.detail << "min fidelity " << worst;
}

void round_trip(Verdict& v) {
  int ok = 0;
  for (unsigned bit : {0u, 1u}) {
    for (auto scr : kAllPaulis) {
      for (auto enc : kAllPaulis) {
        ProtocolConfig c;
        c.n_triples = 1;
        c.n_decoys = 0;
        Rng rng(ok + 1);
        auto d = distribute(c, nullptr, rng);
        const std::vector<std::size_t> inst{0};
        std::vector<ClassicalMessage> ev;
        const auto rel = controller_release(d, inst, force_outcome(bit), ev);
        const std::vector<PauliOp> ops{scr};
        bob_scramble(d, inst, ops);
        const unsigned m = message_bits(enc);
        const std::string msg{static_cast<char>('0' + (m >> 1)), static_cast<char>('0' + (m & 1))};
        alice_encode(msg, d, inst, c, rng);
        ok += bob_decode(bell_measure_pairs(d, inst, rng), rel.pairs, ops) == msg;
      }
    }
  }
  v.require(ok == 32, "32 cases");

  ProtocolConfig c;
  c.n_triples = 3;
  c.n_decoys = 0;
  Rng rng(77);
  auto d = distribute(c, nullptr, rng);
  const auto inst = iota(3);
  std::vector<ClassicalMessage> ev;
  const auto rel = controller_release(d, inst, replay({0, 1, 0}), ev);
  const std::vector<PauliOp> scr{PauliOp::X, PauliOp::I, PauliOp::Z};
  bob_scramble(d, inst, scr);
  const std::vector<BellKind> before{pair_kind(d, 0), pair_kind(d, 1), pair_kind(d, 2)};
  alice_encode("100101", d, inst, c, rng);
  const std::vector<BellKind> after{pair_kind(d, 0), pair_kind(d, 1), pair_kind(d, 2)};
  const auto results = bell_measure_pairs(d, inst, rng);
  std::string code;
  for (auto k : results) code += code_bits(k);
  const auto decoded = bob_decode(results, rel.pairs, scr);
  v.require(before == std::vector<BellKind>{BellKind::PsiPlus, BellKind::PsiPlus, BellKind::PhiMinus}, "pre-encode pairs");
  v.require(after == std::vector<BellKind>{BellKind::PsiMinus, BellKind::PhiPlus, BellKind::PsiMinus}, "encoded pairs");
  v.require(code == "110011", "Bell code");
  v.require(decoded == "100101", "decode");
  v.detail << ok << "/32 cases; example pairs " << name(before[0]) << "," << name(before[1]) << "," << name(before[2])
           << " -> " << name(after[0]) << "," << name(after[1]) << "," << name(after[2]) << ", code " << code
           << ", decoded " << decoded;
}

void outcome_tables(Verdict& v) {
  std::size_t pass2 = 0, pass3 = 0;
  for (const auto& c : verify_table(2, two_controller_table())) pass2 += c.pass();
  for (const auto& c : verify_table(3, three_controller_table())) pass3 += c.pass();
  v.require(pass2 == 16 && pass3 == 16, "rows");
  v.detail << "two controllers " << pass2 << "/16, three controllers " << pass3 << "/16";
}

void generalization(Verdict& v) {
  bool counts = true;
  for (int n = 1; n <= 32; ++n) {
    const std::size_t expect = n % 2 ? (n + 1) / 2 : (n + 2) / 2;
    counts = counts && distribution_plan(n).triples.size() == expect;
  }
  v.require(counts, "plan counts");
  std::size_t runs = 0, bell_ok = 0, agree = 0;
  for (int n = 1; n <= 8; ++n) {
    const auto plan = distribution_plan(n);
    for (int s = 0; s < 1000; ++s) {
      Rng rng = Rng::substream(500 + n, s);
      const auto run = run_swapping(plan, rng);
      ++runs;
      bell_ok += fidelity(run.final_pair, bell(run.shared, "a", "b")) > 1 - 1e-9;
      agree += shared_pair_from_outcomes(plan, run.outcomes) == run.shared;
    }
  }
  v.require(bell_ok == runs, "Bell state");
  v.require(agree == runs, "frame agreement");
  v.detail << "plan counts N=1..32 " << (counts ? "ok" : "wrong") << "; " << bell_ok << "/" << runs
           << " runs in a Bell state, frame agreement " << agree << "/" << runs;
}

StudyConfig study(std::size_t triples, std::size_t trials, std::uint64_t seed) {
  StudyConfig s;
  s.protocol.n_triples = triples;
  s.protocol.seed = seed;
  s.trials = trials;
  return s;
}

void attack_statistics(Verdict& v) {
  const AttackStrategy mr{AttackKind::MeasureResend, AttackPhase::Distribution};
  const AttackStrategy ir{AttackKind::InterceptResend, AttackPhase::Distribution};
  const AttackStrategy em{AttackKind::EntangleMeasure, AttackPhase::Distribution};
  const auto m = detection_stats(mr, study(4000, 5, 601));
  const auto i = detection_stats(ir, study(4000, 5, 602));
  const auto e = detection_stats(em, study(4000, 5, 603));
  v.require(m.first_check_error.samples >= 10000 && i.first_check_error.samples >= 10000 &&
                e.first_check_error.samples >= 10000,
            "sample count");
  v.require(m.z_check_error.mean == 0.0, "measure-resend Z");
  v.require(std::abs(m.x_check_error.mean - 0.5) <= 0.02, "measure-resend X");
  v.require(std::abs(m.first_check_error.mean - 0.25) <= 0.02, "measure-resend overall");
  v.require(std::abs(i.first_check_error.mean - 0.5) <= 0.02, "intercept-resend overall");
  v.require(std::abs(e.x_check_error.mean - 0.5) <= 0.02, "entangle-measure X");

  Ensemble ens;
  ens.add(ghz_like(GhzLabel(0), "a", "b", "c"));
  Rng rng(604);
  EveTap eve(em);
  eve.on_distribution(ens, "a", "b", 0, rng);
  const std::vector<std::string> order{"a", "b", "c", EveTap::ancilla_x(0), EveTap::ancilla_y(0)};
  std::vector<Complex> amps(32, 0.0);
  for (unsigned idx : {0b00000u, 0b01101u, 0b11011u, 0b10110u}) amps[idx] = 0.5;
  const double f = fidelity(ens.joint(order), PureState(order, amps));
  v.require(f > 1 - 1e-9, "entangle-measure expansion");

  auto ret = study(8, 4, 605);
  ret.protocol.n_decoys = 1000;
  const auto d = detection_stats({AttackKind::InterceptResend, AttackPhase::EncodedReturn}, ret);
  v.require(std::abs(d.decoy_error.mean - 0.25) <= 0.04, "decoy vs intercept-resend");

  v.detail << "measure-resend Z " << m.z_check_error.mean << " X " << m.x_check_error.mean << " overall "
           << m.first_check_error.mean << "; intercept-resend overall " << i.first_check_error.mean
           << "; entangle-measure fidelity " << f << " X " << e.x_check_error.mean << " overall "
           << e.first_check_error.mean << "; decoys vs intercept-resend " << d.decoy_error.mean << " over "
           << d.decoy_error.samples;
}

void security_properties(Verdict& v) {
  double blind_worst = 0;
  for (unsigned bit : {0u, 1u}) {
    ProtocolConfig c;
    c.n_triples = 10000;
    Rng rng(700 + bit);
    auto d = distribute(c, nullptr, rng);
    const auto inst = iota(c.n_triples);
    std::vector<ClassicalMessage> ev;
    controller_release(d, inst, force_outcome(bit), ev);
    bob_scramble(d, inst, rng);
    std::array<int, 4> counts{};
    for (auto i : inst) ++counts[code(pair_kind(d, i))];
    blind_worst = std::max(blind_worst, chi2_uniform(counts));
  }
  double encode_worst = 0;
  for (auto op : kAllPaulis) {
    const unsigned m = message_bits(op);
    std::string msg;
    for (int i = 0; i < 10000; ++i) msg += {static_cast<char>('0' + (m >> 1)), static_cast<char>('0' + (m & 1))};
    ProtocolConfig c;
    c.n_triples = 10000;
    c.n_decoys = 0;
    Rng rng(710 + m);
    auto d = distribute(c, nullptr, rng);
    const auto inst = iota(c.n_triples);
    std::vector<ClassicalMessage> ev;
    controller_release(d, inst, rng, ev);
    bob_scramble(d, inst, rng);
    alice_encode(msg, d, inst, c, rng);
    std::array<int, 4> counts{};
    for (auto i : inst) ++counts[code(pair_kind(d, i))];
    encode_worst = std::max(encode_worst, chi2_uniform(counts));
  }
  auto s = study(16, 2500, 720);
  s.protocol.error_threshold = 1.0;
  const auto r = detection_stats({AttackKind::EntangleMeasure, AttackPhase::Distribution}, s);
  const double info = r.eve_information ? r.eve_information->mean : -1;
  v.require(blind_worst < kChi2Df3At4Sigma, "controller blindness");
  v.require(encode_worst < kChi2Df3At4Sigma, "encode uniformity");
  v.require(r.eve_information && r.eve_information->samples >= 10000 && std::abs(info - 0.5) <= 0.02,
            "Eve guess accuracy");
  v.detail << "blindness chi2 max " << blind_worst << ", encode chi2 max " << encode_worst << " (limit "
           << kChi2Df3At4Sigma << "); undetected Eve accuracy " << info << " over "
           << (r.eve_information ? r.eve_information->samples : 0) << " bits";
}

void efficiency_value(Verdict& v) {
  const double e = efficiency(2, 3, 1);
  v.require(e == 0.5, "value");
  v.detail << "efficiency(2, 3, 1) = " << e;
}

struct Captured {
  int code = -1;
  std::string out;
};

Captured capture(const std::string& cmd) {
  Captured c;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return c;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) c.out.append(buf, n);
  const int status = pclose(p);
  c.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return c;
}

void determinism(Verdict& v, const std::string& cli) {
  const std::vector<std::string> cmds = {
      "simulate --controllers 1 --message 100101 --seed 7 --format json --no-timing",
      "simulate --controllers 4 --message 0xC3 --seed 8 --format json --no-timing",
      "simulate --attack measure --triples 100 --message 10 --seed 9 --format json --no-timing",
      "attack --attack intercept --trials 1 --seed 10 --format json --no-timing",
      "attack --attack entangle --trials 50 --threads 3 --seed 11 --format csv --sweep 10,50",
      "plan --controllers 7 --format json",
      "tables --format json",
  };
  std::size_t same = 0;
  for (const auto& c : cmds) {
    const auto a = capture("'" + cli + "' " + c);
    const auto b = capture("'" + cli + "' " + c);
    const bool ok = a.code == b.code && a.out == b.out && !a.out.empty();
    same += ok;
    v.require(ok, c);
  }
  v.detail << same << "/" << cmds.size() << " commands byte-identical on repeat";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to cqsc>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"state construction", state_construction},
      {"collapse rule", collapse_rule},
      {"dense-coding round trip", round_trip},
      {"two- and three-controller tables", outcome_tables},
      {"N-controller generalization", generalization},
      {"attack statistics", attack_statistics},
      {"security properties", security_properties},
      {"efficiency", efficiency_value},
      {"determinism", [&](Verdict& v) { determinism(v, cli); }},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    passed += v.pass;
    std::printf("%s  %zu. %s: %s (%.2fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.str().c_str(), secs);
  }
  std::printf("%d/%zu criteria pass\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
