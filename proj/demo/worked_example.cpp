// Walks the single-controller protocol through a fixed example: Alice sends
// 100101, Charlie's three Z outcomes are 0, 1, 0 and Bob scrambles with
// X, I, Z.  Prints the Bell pairs after every step.

#include <iostream>

#include "cqsc/protocol.hpp"

using namespace cqsc;

namespace {

void show_pairs(Distribution& d, const std::vector<std::size_t>& inst, const char* label) {
  std::cout << label;
  for (auto i : inst) {
    const auto a = d.alice_qubit(i);
    const auto b = d.bob_qubit(i);
    const auto k = classify_bell(d.ensemble().joint({a, b}).reordered({a, b}));
    std::cout << "  " << (k ? name(*k) : "?");
  }
  std::cout << "\n";
}

}  // namespace

int main() {
  ProtocolConfig config;
  config.n_triples = 3;
  config.n_decoys = 4;
  Rng rng(2024);

  auto d = distribute(config, nullptr, rng);
  const std::vector<std::size_t> inst{0, 1, 2};
  std::vector<ClassicalMessage> events;

  const auto release = controller_release(d, inst, replay({0, 1, 0}), events);
  std::cout << "Charlie's Z outcomes:";
  for (auto b : release.charlie_bits()) std::cout << ' ' << b;
  std::cout << "\n";
  show_pairs(d, inst, "after release:    ");

  const std::vector<PauliOp> scramble{PauliOp::X, PauliOp::I, PauliOp::Z};
  bob_scramble(d, inst, scramble);
  show_pairs(d, inst, "after scramble:   ");

  const std::string message = "100101";
  const auto t = alice_encode(message, d, inst, config, rng);
  std::cout << "Alice encodes " << message << " with";
  for (auto op : t.encode_ops) std::cout << ' ' << name(op);
  std::cout << "\n";
  show_pairs(d, inst, "after encode:     ");

  events.push_back({Party::bob(), Party::alice(), "receipt_confirmation", ""});
  const auto decoys = decoy_check(d, t, t.disclosure(), rng, events);
  std::cout << "decoy check: " << decoys.mismatches << " of " << decoys.decoys << " wrong\n";

  const auto results = bell_measure_pairs(d, inst, rng);
  std::cout << "Bob's Bell results:";
  for (auto k : results) std::cout << ' ' << code_bits(k);
  std::cout << "\n";
  const auto decoded = bob_decode(results, release.pairs, scramble);
  std::cout << "decoded: " << decoded << "\n";
  return decoded == message ? 0 : 1;
}
