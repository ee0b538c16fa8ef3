#pragma once

#include <compare>
#include <string>

namespace cqsc {

// A protocol participant.  Controllers are numbered from 1; with a single
// controller C1 plays the role of Charlie.
struct Party {
  enum class Kind { Alice, Bob, Controller, Eve, Public };
  Kind kind = Kind::Public;
  int index = 0;

  static constexpr Party alice() { return {Kind::Alice, 0}; }
  static constexpr Party bob() { return {Kind::Bob, 0}; }
  static constexpr Party controller(int k) { return {Kind::Controller, k}; }
  static constexpr Party eve() { return {Kind::Eve, 0}; }
  static constexpr Party everyone() { return {Kind::Public, 0}; }

  friend constexpr auto operator<=>(const Party&, const Party&) = default;
};

inline std::string to_string(const Party& p) {
  switch (p.kind) {
    case Party::Kind::Alice: return "Alice";
    case Party::Kind::Bob: return "Bob";
    case Party::Kind::Controller: return "C" + std::to_string(p.index);
    case Party::Kind::Eve: return "Eve";
    case Party::Kind::Public: return "public";
  }
  return "?";
}

}  // namespace cqsc
