#pragma once

// Machine-readable records (line-delimited JSON, schema_version 1), CSV rows
// for detection sweeps, and plain-text renderings for humans.

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqsc/adversary.hpp"
#include "cqsc/protocol.hpp"
#include "cqsc/tables.hpp"

namespace cqsc {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json ops_json(const std::optional<std::vector<PauliOp>>& ops) {
  if (!ops) return nullptr;
  json a = json::array();
  for (auto op : *ops) a.push_back(std::string(name(op)));
  return a;
}

inline json kinds_json(const std::vector<BellKind>& kinds) {
  json a = json::array();
  for (auto k : kinds) a.push_back(std::string(name(k)));
  return a;
}

inline json estimate_json(const RateEstimate& r) {
  return {{"mean", r.mean}, {"stderr", r.stderr_}, {"samples", r.samples}};
}

}  // namespace detail

inline json config_json(const ProtocolConfig& c) {
  return {{"n_controllers", c.n_controllers}, {"n_triples", c.n_triples},       {"check_fraction", c.check_fraction},
          {"n_decoys", c.n_decoys},           {"error_threshold", c.error_threshold}, {"bob_scrambles", c.bob_scrambles}};
}

inline json check_json(const CheckTally& t) {
  return {{"samples", t.samples},       {"error_rate", t.error_rate()},     {"z_samples", t.z_samples},
          {"z_error_rate", t.z_error_rate()}, {"x_samples", t.x_samples}, {"x_error_rate", t.x_error_rate()},
          {"x_strict_violations", t.x_strict_violations}};
}

inline json run_record(const RunTranscript& tr, double elapsed_ms) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["record"] = "run";
  r["seed"] = tr.config.seed;
  r["config"] = config_json(tr.config);
  r["message"] = tr.message;
  r["completed"] = tr.completed();
  r["aborted_at"] = tr.aborted_at ? json(std::string(name(*tr.aborted_at))) : json(nullptr);
  r["stalled"] = tr.stalled;
  r["decoded_message"] = tr.decoded_message ? json(*tr.decoded_message) : json(nullptr);
  r["decoded_matches"] = tr.decoded_message && *tr.decoded_message == tr.message;
  r["first_check"] = tr.first_check ? check_json(tr.first_check->tally) : json(nullptr);
  r["decoy_error_rate"] = detail::nullable(tr.decoy_error_rate());
  r["decoys_checked"] = tr.decoy ? json(tr.decoy->decoys) : json(nullptr);
  if (tr.release) {
    json rel = json::array();
    for (const auto& o : tr.release->outcomes) {
      json bits = json::array();
      for (auto b : o.z_bits) bits.push_back(b);
      rel.push_back({{"z_bits", bits}, {"bell", detail::kinds_json(o.bell)}});
    }
    r["release"] = rel;
    r["shared_pairs"] = detail::kinds_json(tr.release->pairs);
  } else {
    r["release"] = nullptr;
    r["shared_pairs"] = nullptr;
  }
  r["bob_scramble_ops"] = detail::ops_json(tr.bob_scramble_ops);
  r["alice_encode_ops"] = detail::ops_json(tr.alice_encode_ops);
  r["bell_results"] = tr.bell_results ? detail::kinds_json(*tr.bell_results) : json(nullptr);
  r["timing_ms"] = elapsed_ms;
  return r;
}

inline json detection_record(const DetectionReport& rep, const StudyConfig& s, double elapsed_ms) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["record"] = "detection";
  r["seed"] = s.protocol.seed;
  r["config"] = config_json(s.protocol);
  r["attack"] = std::string(name(rep.strategy.kind));
  r["phase"] = std::string(name(rep.strategy.phase));
  r["message"] = s.message ? json(*s.message) : json(nullptr);
  r["message_bits"] = s.message ? s.message->size() : s.message_bits;
  r["check_sets"] = s.protocol.n_triples ? json(check_count(s.protocol, s.protocol.n_triples)) : json(nullptr);
  r["trials"] = rep.trials;
  r["aborted"] = rep.aborted;
  r["aborted_first_check"] = rep.aborted_first_check;
  r["aborted_decoy_check"] = rep.aborted_decoy_check;
  r["detection_probability"] = rep.detection_probability;
  r["detection_stderr"] = rep.detection.stderr_;
  r["first_check_error_rate"] = detail::estimate_json(rep.first_check_error);
  r["per_basis_error"] = {{"z", detail::estimate_json(rep.z_check_error)},
                          {"x", detail::estimate_json(rep.x_check_error)}};
  r["x_strict_violation_rate"] = detail::estimate_json(rep.x_strict_violation);
  r["decoy_error_rate"] = detail::estimate_json(rep.decoy_error);
  r["eve_information"] = rep.eve_information ? detail::estimate_json(*rep.eve_information) : json(nullptr);
  r["undetected"] = rep.undetected;
  r["decode_failures"] = rep.decode_failures;
  r["timing_ms"] = elapsed_ms;
  return r;
}

inline json plan_record(const DistributionPlan& plan) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["record"] = "plan";
  r["n_controllers"] = plan.n_controllers;
  r["ghz_states"] = plan.triples.size();
  json triples = json::array();
  for (const auto& tri : plan.triples) {
    json t = json::array();
    for (const auto& tag : tri) t.push_back({{"tag", to_string(tag)}, {"holder", to_string(plan.holder(tag))}});
    triples.push_back(t);
  }
  r["triples"] = triples;
  const auto sched = swap_schedule(plan);
  json z = json::array();
  for (const auto& s : sched.z_measurers) z.push_back({{"controller", to_string(s.controller)}, {"tag", to_string(s.tag)}});
  json b = json::array();
  for (const auto& s : sched.bell_measurers) {
    b.push_back({{"controller", to_string(s.controller)}, {"tags", {to_string(s.first), to_string(s.second)}}});
  }
  r["z_measurers"] = z;
  r["bell_measurers"] = b;
  return r;
}

inline json table_row_record(int n_controllers, std::size_t index, const RowCheck& c) {
  json z = json::object();
  for (const auto& [tag, bit] : c.row.z_bits) z[to_string(tag)] = bit;
  return {{"schema_version", kSchemaVersion},
          {"record", "table_row"},
          {"n_controllers", n_controllers},
          {"row", index},
          {"z_bits", z},
          {"c1_outcome", std::string(name(c.row.c1_outcome))},
          {"expected", std::string(name(c.row.shared))},
          {"simulated", std::string(name(c.simulated))},
          {"resolved", std::string(name(c.resolved))},
          {"pass", c.pass()}};
}

inline json table_summary_record(int n_controllers, const std::vector<RowCheck>& checks) {
  std::size_t passed = 0;
  for (const auto& c : checks) passed += c.pass();
  return {{"schema_version", kSchemaVersion}, {"record", "table_summary"}, {"n_controllers", n_controllers},
          {"rows", checks.size()},         {"passed", passed}};
}

inline json encoding_record() {
  json map = json::object();
  for (auto op : kAllPaulis) {
    const unsigned m = message_bits(op);
    map[std::string{static_cast<char>('0' + (m >> 1)), static_cast<char>('0' + (m & 1))}] = std::string(name(op));
  }
  return {{"schema_version", kSchemaVersion}, {"record", "encoding"}, {"map", map}, {"efficiency", efficiency(2, 3, 1)}};
}

// ---------------------------------------------------------------------------
// Schema check: returns one message per problem, empty when valid.

inline std::vector<std::string> validate_record(const json& r) {
  std::vector<std::string> errs;
  auto need = [&](const char* key, auto pred, const char* what) {
    if (!r.contains(key)) {
      errs.push_back(std::string("missing ") + key);
    } else if (!pred(r[key])) {
      errs.push_back(std::string(key) + " is not " + what);
    }
  };
  const auto is_num = [](const json& j) { return j.is_number(); };
  const auto is_uint = [](const json& j) { return j.is_number_unsigned() || (j.is_number_integer() && j >= 0); };
  const auto is_str = [](const json& j) { return j.is_string(); };
  const auto is_bool = [](const json& j) { return j.is_boolean(); };
  const auto is_arr = [](const json& j) { return j.is_array(); };
  const auto is_obj = [](const json& j) { return j.is_object(); };
  const auto opt = [](auto pred) { return [pred](const json& j) { return j.is_null() || pred(j); }; };
  const auto rate = [](const json& j) { return j.is_number() && j >= 0.0 && j <= 1.0; };
  const auto estimate = [&](const json& j) {
    return j.is_object() && j.contains("mean") && rate(j["mean"]) && j.contains("stderr") && j["stderr"].is_number() &&
           j.contains("samples") && j["samples"].is_number_unsigned();
  };

  if (!r.is_object()) return {"record is not an object"};
  if (!r.contains("schema_version") || r["schema_version"] != kSchemaVersion) errs.push_back("schema_version must be 1");
  need("record", is_str, "a string");
  if (!errs.empty()) return errs;
  const auto kind = r["record"].get<std::string>();
  if (kind == "run" || kind == "detection") {
    need("seed", is_uint, "an unsigned integer");
    need("config", is_obj, "an object");
    need("timing_ms", is_num, "a number");
  }
  if (kind == "run") {
    need("message", is_str, "a string");
    need("completed", is_bool, "a boolean");
    need("aborted_at", opt(is_str), "a phase or null");
    need("stalled", is_bool, "a boolean");
    need("decoded_message", opt(is_str), "a string or null");
    need("decoded_matches", is_bool, "a boolean");
    need("first_check", opt(is_obj), "an object or null");
    need("decoy_error_rate", opt(rate), "a rate or null");
    need("release", opt(is_arr), "an array or null");
    need("shared_pairs", opt(is_arr), "an array or null");
    need("bob_scramble_ops", opt(is_arr), "an array or null");
    need("alice_encode_ops", opt(is_arr), "an array or null");
    need("bell_results", opt(is_arr), "an array or null");
    if (errs.empty() && r["completed"] == r["aborted_at"].is_string()) errs.push_back("completed contradicts aborted_at");
    if (errs.empty() && r["aborted_at"].is_string() && !r["decoded_message"].is_null()) {
      errs.push_back("aborted run carries a decoded message");
    }
  } else if (kind == "detection") {
    need("attack", is_str, "a string");
    need("phase", is_str, "a string");
    need("trials", is_uint, "an unsigned integer");
    need("aborted", is_uint, "an unsigned integer");
    need("detection_probability", rate, "a rate");
    need("first_check_error_rate", estimate, "an estimate");
    need("per_basis_error", is_obj, "an object");
    need("decoy_error_rate", estimate, "an estimate");
    need("eve_information", opt(estimate), "an estimate or null");
    if (errs.empty()) {
      const auto& pb = r["per_basis_error"];
      if (!pb.contains("z") || !estimate(pb["z"]) || !pb.contains("x") || !estimate(pb["x"])) {
        errs.push_back("per_basis_error needs z and x estimates");
      }
      if (r["aborted"].get<std::size_t>() > r["trials"].get<std::size_t>()) errs.push_back("aborted exceeds trials");
    }
  } else if (kind == "plan") {
    need("n_controllers", is_uint, "an unsigned integer");
    need("ghz_states", is_uint, "an unsigned integer");
    need("triples", is_arr, "an array");
    need("z_measurers", is_arr, "an array");
    need("bell_measurers", is_arr, "an array");
    if (errs.empty() && r["triples"].size() != r["ghz_states"].get<std::size_t>()) {
      errs.push_back("ghz_states disagrees with triples");
    }
  } else if (kind == "table_row") {
    need("n_controllers", is_uint, "an unsigned integer");
    need("row", is_uint, "an unsigned integer");
    need("z_bits", is_obj, "an object");
    need("expected", is_str, "a string");
    need("simulated", is_str, "a string");
    need("resolved", is_str, "a string");
    need("pass", is_bool, "a boolean");
  } else if (kind == "encoding") {
    need("map", is_obj, "an object");
    need("efficiency", is_num, "a number");
  } else if (kind == "table_summary") {
    need("n_controllers", is_uint, "an unsigned integer");
    need("rows", is_uint, "an unsigned integer");
    need("passed", is_uint, "an unsigned integer");
  } else {
    errs.push_back("unknown record type " + kind);
  }
  return errs;
}

// ---------------------------------------------------------------------------
// Text and CSV

inline std::vector<std::string> transcript_lines(const RunTranscript& tr) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    const auto& e = tr.events[i];
    out.push_back(std::to_string(i) + " " + to_string(e.from) + " -> " + to_string(e.to) + " " + e.topic +
                  (e.payload.empty() ? "" : " " + e.payload));
  }
  return out;
}

inline std::string run_text(const RunTranscript& tr) {
  std::ostringstream os;
  os << "controllers      " << tr.config.n_controllers << "\n";
  os << "resource sets    " << tr.config.n_triples << "\n";
  os << "message          " << (tr.message.empty() ? "(empty)" : tr.message) << "\n";
  if (tr.first_check) {
    const auto& t = tr.first_check->tally;
    os << "first check      " << t.samples << " samples, error " << t.error_rate() << " (Z " << t.z_error_rate()
       << ", X " << t.x_error_rate() << ")\n";
  }
  if (tr.release) {
    os << "shared pairs    ";
    for (auto k : tr.release->pairs) os << ' ' << name(k);
    os << "\n";
  }
  if (tr.decoy) os << "decoy check      " << tr.decoy->decoys << " decoys, error " << tr.decoy->error_rate() << "\n";
  if (tr.bell_results) {
    os << "bell results    ";
    for (auto k : *tr.bell_results) os << ' ' << code_bits(k);
    os << "\n";
  }
  if (tr.aborted_at) {
    os << "aborted at       " << name(*tr.aborted_at) << (tr.stalled ? " (stalled)" : "") << "\n";
  } else {
    os << "decoded          " << (tr.decoded_message->empty() ? "(empty)" : *tr.decoded_message)
       << (*tr.decoded_message == tr.message ? "" : "  MISMATCH") << "\n";
  }
  return os.str();
}

inline std::string detection_text(const DetectionReport& r) {
  std::ostringstream os;
  const auto est = [&](const RateEstimate& e) {
    std::ostringstream s;
    s << e.mean << " +/- " << e.stderr_ << " (" << e.samples << ")";
    return s.str();
  };
  os << "attack           " << name(r.strategy.kind) << " on " << name(r.strategy.phase) << "\n";
  os << "trials           " << r.trials << "\n";
  os << "detection        " << r.detection_probability << " (" << r.aborted << " aborted)\n";
  os << "first check      " << est(r.first_check_error) << "\n";
  os << "  Z checks       " << est(r.z_check_error) << "\n";
  os << "  X checks       " << est(r.x_check_error) << "\n";
  os << "decoy check      " << est(r.decoy_error) << "\n";
  if (r.eve_information) os << "eve information  " << est(*r.eve_information) << "\n";
  return os.str();
}

inline std::string detection_csv_header() {
  return "attack,phase,check_sets,trials,detection_probability,detection_stderr,first_check_error,"
         "z_check_error,x_check_error,decoy_error,eve_information";
}

inline std::string detection_csv_row(const DetectionReport& r, std::size_t check_sets) {
  std::ostringstream os;
  os.precision(17);
  os << name(r.strategy.kind) << ',' << name(r.strategy.phase) << ',' << check_sets << ',' << r.trials << ','
     << r.detection_probability << ',' << r.detection.stderr_ << ',' << r.first_check_error.mean << ','
     << r.z_check_error.mean << ',' << r.x_check_error.mean << ',' << r.decoy_error.mean << ',';
  if (r.eve_information) os << r.eve_information->mean;
  return os.str();
}

inline std::string run_csv_header() {
  return "seed,n_controllers,n_triples,message,completed,aborted_at,first_check_error,decoy_error,decoded_message";
}

inline std::string run_csv_row(const RunTranscript& tr) {
  std::ostringstream os;
  os.precision(17);
  os << tr.config.seed << ',' << tr.config.n_controllers << ',' << tr.config.n_triples << ',' << tr.message << ','
     << (tr.completed() ? "true" : "false") << ',' << (tr.aborted_at ? name(*tr.aborted_at) : "") << ','
     << tr.first_check_error_rate() << ',';
  if (tr.decoy) os << tr.decoy->error_rate();
  os << ',' << tr.decoded_message.value_or("");
  return os.str();
}

}  // namespace cqsc
