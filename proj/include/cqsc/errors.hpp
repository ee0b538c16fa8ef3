#pragma once

#include <stdexcept>
#include <string>

namespace cqsc {

// Unknown, duplicate or mismatched qubit labels.
class LabelError : public std::invalid_argument {
 public:
  explicit LabelError(const std::string& what) : std::invalid_argument(what) {}
};

// A forced measurement outcome selected a branch of (numerically) zero weight.
class ProjectionError : public std::runtime_error {
 public:
  explicit ProjectionError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed caller input: odd-length messages, bad counts, zero denominators.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Inconsistent classical bookkeeping inside a protocol run.
class TranscriptError : public std::logic_error {
 public:
  explicit TranscriptError(const std::string& what) : std::logic_error(what) {}
};

// A distribution plan whose swap schedule cannot be executed.
class PlanError : public std::logic_error {
 public:
  explicit PlanError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace cqsc
