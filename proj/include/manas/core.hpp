#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace manas {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Action/vector does not fit the declared topology.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// A binary architecture vector violates the one-choice-per-agent constraint.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// A sampling probability passed to an importance-weighted update is invalid.
class ImportanceWeightError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise malformed numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

// Requested architecture is absent from a tabular benchmark.
class LookupError : public Error {
 public:
  using Error::Error;
};

// A metric was requested that the environment cannot support.
class UnsupportedMetricError : public Error {
 public:
  using Error::Error;
};

// An exhaustive computation would exceed its size guard.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration; carries the offending field path for diagnostics.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Factored search space: N agents, each choosing one of K operations.
struct Topology {
  int num_agents = 1;   // N
  int num_actions = 1;  // K

  Topology(int agents, int actions);

  // Search spaces derived from stacked cells carry 14 agent slots per cell.
  static Topology from_cells(int cells, int actions);

  // K*N, the length of the flat one-hot encoding.
  int flat_size() const { return num_agents * num_actions; }

  // K^N, or nullopt when it does not fit in 64 bits. Never wraps silently.
  std::optional<std::uint64_t> joint_space_size() const;

  bool operator==(const Topology& other) const = default;
};

// One operation index per agent; together they select one architecture.
struct JointAction {
  std::vector<int> actions;

  bool operator==(const JointAction& other) const = default;
};

bool is_valid(const JointAction& joint, const Topology& topo);
void require_valid(const JointAction& joint, const Topology& topo);

// Flat one-hot encoding of a JointAction, agent-major: agent i owns
// slots [i*K, (i+1)*K) and has exactly one bit set.
struct ArchitectureVector {
  std::vector<std::uint8_t> bits;

  bool operator==(const ArchitectureVector& other) const = default;
};

ArchitectureVector encode(const JointAction& joint, const Topology& topo);
JointAction decode(const ArchitectureVector& vec, const Topology& topo);

}  // namespace manas
