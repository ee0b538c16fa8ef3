// cqsc: run protocol simulations, attack studies, plan listings and table checks.
//
// Exit codes: 0 success, 1 usage error, 2 protocol abort or decode mismatch
// (and, for `tables`, any failing row).

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "cqsc/records.hpp"

namespace {

using namespace cqsc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bit string, or hex with a 0x / hex: prefix.
std::string message_bits_from_arg(const std::string& s) {
  std::size_t prefix = 0;
  if (s.rfind("0x", 0) == 0) prefix = 2;
  if (s.rfind("hex:", 0) == 0) prefix = 4;
  if (prefix == 0) {
    for (char c : s) {
      if (c != '0' && c != '1') throw UsageError("message must be a bit string or 0x-prefixed hex: " + s);
    }
    if (s.size() % 2) throw UsageError("message length must be even");
    return s;
  }
  std::string bits;
  for (char c : std::string_view(s).substr(prefix)) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      v = c - 'A' + 10;
    } else {
      throw UsageError("bad hex digit in message: " + s);
    }
    for (int b = 3; b >= 0; --b) bits.push_back(static_cast<char>('0' + ((v >> b) & 1)));
  }
  return bits;
}

struct Settings {
  int controllers = 1;
  std::size_t triples = 0;
  double check_fraction = 0.5;
  std::size_t decoys = 8;
  double threshold = 0.05;
  std::uint64_t seed = 0;
  bool no_scramble = false;
  std::string message;
  std::string format = "text";
  bool no_timing = false;
  bool transcript = false;
  std::string config_path;

  std::string attack = "none";
  std::string phase = "distribution";
  std::size_t trials = 100;
  unsigned threads = 1;
  std::size_t message_bits = 8;
  std::vector<std::size_t> sweep;

  ProtocolConfig protocol() const {
    ProtocolConfig c;
    c.n_controllers = controllers;
    c.n_triples = triples;
    c.check_fraction = check_fraction;
    c.n_decoys = decoys;
    c.error_threshold = threshold;
    c.seed = seed;
    c.bob_scrambles = !no_scramble;
    return c;
  }
};

// Options that a config file may also set; flags win over file values.
using Flags = std::map<std::string, CLI::Option*>;

void add_protocol_flags(CLI::App* cmd, Settings& s, Flags& f) {
  f["controllers"] = cmd->add_option("--controllers", s.controllers, "number of controllers");
  f["message"] = cmd->add_option("--message", s.message, "message bits (or 0x-prefixed hex)");
  f["triples"] = cmd->add_option("--triples", s.triples, "resource sets to prepare (0 = just enough)");
  f["check_fraction"] = cmd->add_option("--check-fraction", s.check_fraction, "fraction sacrificed to the first check");
  f["decoys"] = cmd->add_option("--decoys", s.decoys, "decoy photons mixed into Alice's sequence");
  f["threshold"] = cmd->add_option("--threshold", s.threshold, "abort when a check's error rate exceeds this");
  f["seed"] = cmd->add_option("--seed", s.seed, "random seed");
  f["scramble"] = cmd->add_flag("--no-scramble", s.no_scramble, "skip Bob's random Pauli before encoding");
  f["format"] = cmd->add_option("--format", s.format, "output format")->check(CLI::IsMember({"text", "json", "csv"}));
  cmd->add_flag("--no-timing", s.no_timing, "zero all timing fields");
  cmd->add_option("--config", s.config_path, "JSON file with default values");
}

void apply_config_file(Settings& s, const Flags& flags) {
  if (s.config_path.empty()) return;
  std::ifstream in(s.config_path);
  if (!in) throw UsageError("cannot open config file " + s.config_path);
  json file;
  try {
    file = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!file.is_object()) throw UsageError("config file must hold a JSON object");
  const std::map<std::string, std::function<void(const json&)>> setters = {
      {"controllers", [&](const json& v) { s.controllers = v.get<int>(); }},
      {"message", [&](const json& v) { s.message = v.get<std::string>(); }},
      {"triples", [&](const json& v) { s.triples = v.get<std::size_t>(); }},
      {"check_fraction", [&](const json& v) { s.check_fraction = v.get<double>(); }},
      {"decoys", [&](const json& v) { s.decoys = v.get<std::size_t>(); }},
      {"threshold", [&](const json& v) { s.threshold = v.get<double>(); }},
      {"seed", [&](const json& v) { s.seed = v.get<std::uint64_t>(); }},
      {"scramble", [&](const json& v) { s.no_scramble = !v.get<bool>(); }},
      {"format", [&](const json& v) { s.format = v.get<std::string>(); }},
      {"attack", [&](const json& v) { s.attack = v.get<std::string>(); }},
      {"phase", [&](const json& v) { s.phase = v.get<std::string>(); }},
      {"trials", [&](const json& v) { s.trials = v.get<std::size_t>(); }},
      {"threads", [&](const json& v) { s.threads = v.get<unsigned>(); }},
      {"message_bits", [&](const json& v) { s.message_bits = v.get<std::size_t>(); }},
  };
  for (const auto& [key, value] : file.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("unknown config key: " + key);
    auto flag = flags.find(key);
    if (flag == flags.end()) throw UsageError("config key " + key + " does not apply to this command");
    if (flag->second->count() > 0) continue;
    try {
      it->second(value);
    } catch (const json::exception&) {
      throw UsageError("config key " + key + " has the wrong type");
    }
  }
  if (s.format != "text" && s.format != "json" && s.format != "csv") throw UsageError("unknown format " + s.format);
}

double elapsed_ms(std::chrono::steady_clock::time_point start, bool enabled) {
  if (!enabled) return 0.0;
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

int cmd_simulate(const Settings& s) {
  const std::string message = message_bits_from_arg(s.message);
  const auto start = std::chrono::steady_clock::now();
  const auto kind = attack_kind_from_name(s.attack);
  if (!kind) throw UsageError("unknown attack " + s.attack);
  const auto phase = attack_phase_from_name(s.phase);
  if (!phase) throw UsageError("unknown phase " + s.phase);
  EveTap eve({*kind, *phase}, s.controllers);
  Rng rng(s.seed);
  const auto tr = run_cqsc(s.protocol(), message, *kind == AttackKind::None ? nullptr : &eve, rng);
  const double ms = elapsed_ms(start, !s.no_timing);
  if (s.format == "json") {
    std::cout << run_record(tr, ms).dump() << "\n";
  } else if (s.format == "csv") {
    std::cout << run_csv_header() << "\n" << run_csv_row(tr) << "\n";
  } else {
    std::cout << run_text(tr);
    if (s.transcript) {
      for (const auto& line : transcript_lines(tr)) std::cout << "  " << line << "\n";
    }
  }
  if (tr.aborted_at) {
    std::cerr << "cqsc: run aborted at " << name(*tr.aborted_at) << (tr.stalled ? " (decoys never disclosed)" : "")
              << "\n";
    return kExitAbort;
  }
  if (*tr.decoded_message != message) {
    std::cerr << "cqsc: decoded message differs from the one sent\n";
    return kExitAbort;
  }
  return kExitOk;
}

int cmd_attack(const Settings& s) {
  const auto kind = attack_kind_from_name(s.attack);
  if (!kind) throw UsageError("unknown attack " + s.attack);
  const auto phase = attack_phase_from_name(s.phase);
  if (!phase) throw UsageError("unknown phase " + s.phase);
  if (s.trials < 1) throw UsageError("--trials must be at least 1");
  const AttackStrategy strategy{*kind, *phase};

  StudyConfig study;
  study.protocol = s.protocol();
  study.trials = s.trials;
  study.threads = std::max(1u, s.threads);
  study.message_bits = s.message_bits;
  if (!s.message.empty()) study.message = message_bits_from_arg(s.message);
  if (study.message_bits % 2) throw UsageError("--message-bits must be even");
  const std::size_t pairs = (study.message ? study.message->size() : study.message_bits) / 2;
  // Validate once up front so a bad config is a usage error, not a crash mid-study.
  resolve_config(study.protocol, std::string(pairs * 2, '0'));

  std::vector<std::size_t> points = s.sweep;
  const bool sweeping = !points.empty();
  if (!sweeping) points.push_back(0);
  if (s.format == "csv") std::cout << detection_csv_header() << "\n";
  for (std::size_t checks : points) {
    StudyConfig point = study;
    if (sweeping) point.protocol.n_triples = resource_sets_for_checks(point.protocol, checks, pairs);
    std::cerr << "cqsc: " << name(kind.value()) << " attack, " << point.trials << " trials"
              << (sweeping ? ", " + std::to_string(checks) + " checked sets" : "") << "\n";
    const auto start = std::chrono::steady_clock::now();
    const auto report = detection_stats(strategy, point);
    const double ms = elapsed_ms(start, !s.no_timing);
    if (s.format == "json") {
      std::cout << detection_record(report, point, ms).dump() << "\n";
    } else if (s.format == "csv") {
      const auto sets = point.protocol.n_triples ? check_count(point.protocol, point.protocol.n_triples) : 0;
      std::cout << detection_csv_row(report, sets) << "\n";
    } else {
      if (sweeping) std::cout << "checked sets     " << checks << "\n";
      std::cout << detection_text(report);
    }
  }
  return kExitOk;
}

int cmd_plan(int controllers, const std::string& format) {
  if (controllers < 1) throw UsageError("--controllers must be at least 1");
  const auto plan = distribution_plan(controllers);
  if (format == "json") {
    std::cout << plan_record(plan).dump() << "\n";
    return kExitOk;
  }
  std::cout << "controllers " << controllers << ", GHZ-like states " << plan.triples.size() << "\n";
  for (std::size_t i = 0; i < plan.triples.size(); ++i) {
    std::cout << "  triple " << i + 1 << ":";
    for (const auto& t : plan.triples[i]) std::cout << "  " << to_string(t) << " (" << to_string(plan.holder(t)) << ")";
    std::cout << "\n";
  }
  const auto sched = swap_schedule(plan);
  std::cout << "  Z measurements:";
  for (const auto& z : sched.z_measurers) std::cout << "  " << to_string(z.controller) << " on " << to_string(z.tag);
  std::cout << "\n  Bell measurements:";
  if (sched.bell_measurers.empty()) std::cout << "  none";
  for (const auto& b : sched.bell_measurers) {
    std::cout << "  " << to_string(b.controller) << " on (" << to_string(b.first) << ", " << to_string(b.second) << ")";
  }
  std::cout << "\n";
  return kExitOk;
}

int cmd_tables(const std::string& format) {
  bool all_pass = true;
  for (int n : {2, 3}) {
    const auto checks = verify_table(n, n == 2 ? two_controller_table() : three_controller_table());
    std::size_t passed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const auto& c = checks[i];
      passed += c.pass();
      if (format == "json") {
        std::cout << table_row_record(n, i, c).dump() << "\n";
        continue;
      }
      std::cout << "N=" << n << " row " << (i + 1 < 10 ? " " : "") << i + 1 << ":";
      for (const auto& [tag, bit] : c.row.z_bits) std::cout << " " << to_string(tag) << "=" << bit;
      std::cout << " C1=" << name(c.row.c1_outcome) << " -> " << name(c.row.shared) << "  simulated "
                << name(c.simulated) << ", resolved " << name(c.resolved) << "  " << (c.pass() ? "PASS" : "FAIL")
                << "\n";
    }
    all_pass = all_pass && passed == checks.size();
    if (format == "json") {
      std::cout << table_summary_record(n, checks).dump() << "\n";
    } else {
      std::cout << "N=" << n << ": " << passed << "/" << checks.size() << " rows pass\n";
    }
  }
  if (format == "json") {
    std::cout << encoding_record().dump() << "\n";
  } else {
    std::cout << "encoding:";
    for (auto op : kAllPaulis) {
      const unsigned m = message_bits(op);
      std::cout << " " << (m >> 1) << (m & 1) << "->" << name(op);
    }
    std::cout << "\nefficiency(2, 3, 1) = " << efficiency(2, 3, 1) << "\n";
  }
  return all_pass ? kExitOk : kExitAbort;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled secure communication over GHZ-like states"};
  app.require_subcommand(1);

  Settings sim;
  Flags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "run the protocol once");
  add_protocol_flags(simulate, sim, sim_flags);
  simulate->add_flag("--transcript", sim.transcript, "print the classical transcript (text format)");
  sim_flags["attack"] = simulate->add_option("--attack", sim.attack, "attach an eavesdropper to this run");
  sim_flags["phase"] = simulate->add_option("--phase", sim.phase, "distribution, return or both");

  Settings atk;
  Flags atk_flags;
  auto* attack = app.add_subcommand("attack", "estimate detection rates for an eavesdropper");
  add_protocol_flags(attack, atk, atk_flags);
  atk_flags["attack"] = attack->add_option("--attack", atk.attack, "intercept, measure, entangle or none");
  atk_flags["phase"] = attack->add_option("--phase", atk.phase, "distribution, return or both");
  atk_flags["trials"] = attack->add_option("--trials", atk.trials, "independent protocol runs");
  atk_flags["threads"] = attack->add_option("--threads", atk.threads, "worker threads (results do not depend on it)");
  atk_flags["message_bits"] =
      attack->add_option("--message-bits", atk.message_bits, "random message length when --message is absent");
  attack->add_option("--sweep", atk.sweep, "checked-set counts to sweep, e.g. 10,50,200")->delimiter(',');

  int plan_controllers = 1;
  std::string plan_format = "text";
  auto* plan = app.add_subcommand("plan", "list the distribution plan and swap schedule");
  plan->add_option("--controllers", plan_controllers, "number of controllers")->required();
  plan->add_option("--format", plan_format, "output format")->check(CLI::IsMember({"text", "json"}));

  std::string tables_format = "text";
  auto* tables = app.add_subcommand("tables", "check the two- and three-controller outcome tables");
  tables->add_option("--format", tables_format, "output format")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      apply_config_file(sim, sim_flags);
      return cmd_simulate(sim);
    }
    if (attack->parsed()) {
      apply_config_file(atk, atk_flags);
      return cmd_attack(atk);
    }
    if (plan->parsed()) return cmd_plan(plan_controllers, plan_format);
    if (tables->parsed()) return cmd_tables(tables_format);
  } catch (const UsageError& e) {
    std::cerr << "cqsc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "cqsc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cqsc: internal error: " << e.what() << "\n";
    return kExitAbort;
  }
  return kExitUsage;
}
