#include "manas/core.hpp"

#include <limits>

namespace manas {

Topology::Topology(int agents, int actions) : num_agents(agents), num_actions(actions) {
  if (agents < 1) throw TopologyError("num_agents must be >= 1");
  if (actions < 1) throw TopologyError("num_actions must be >= 1");
  // flat_size must stay addressable with int indices.
  long long flat = static_cast<long long>(agents) * actions;
  if (flat > std::numeric_limits<int>::max())
    throw TopologyError("num_agents * num_actions too large");
}

Topology Topology::from_cells(int cells, int actions) {
  if (cells < 1) throw TopologyError("cells must be >= 1");
  if (cells > std::numeric_limits<int>::max() / 14)
    throw TopologyError("cells too large");
  return Topology(14 * cells, actions);
}

std::optional<std::uint64_t> Topology::joint_space_size() const {
  std::uint64_t size = 1;
  for (int i = 0; i < num_agents; ++i) {
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(size, static_cast<std::uint64_t>(num_actions), &next))
      return std::nullopt;
    size = next;
  }
  return size;
}

bool is_valid(const JointAction& joint, const Topology& topo) {
  if (joint.actions.size() != static_cast<std::size_t>(topo.num_agents)) return false;
  for (int a : joint.actions)
    if (a < 0 || a >= topo.num_actions) return false;
  return true;
}

void require_valid(const JointAction& joint, const Topology& topo) {
  if (joint.actions.size() != static_cast<std::size_t>(topo.num_agents))
    throw TopologyError("joint action has " + std::to_string(joint.actions.size()) +
                        " entries, topology has " + std::to_string(topo.num_agents) + " agents");
  for (std::size_t i = 0; i < joint.actions.size(); ++i) {
    int a = joint.actions[i];
    if (a < 0 || a >= topo.num_actions)
      throw TopologyError("agent " + std::to_string(i) + " action " + std::to_string(a) +
                          " outside [0, " + std::to_string(topo.num_actions) + ")");
  }
}

ArchitectureVector encode(const JointAction& joint, const Topology& topo) {
  require_valid(joint, topo);
  ArchitectureVector vec;
  vec.bits.assign(static_cast<std::size_t>(topo.flat_size()), 0);
  for (int i = 0; i < topo.num_agents; ++i)
    vec.bits[static_cast<std::size_t>(i) * topo.num_actions + joint.actions[i]] = 1;
  return vec;
}

JointAction decode(const ArchitectureVector& vec, const Topology& topo) {
  if (vec.bits.size() != static_cast<std::size_t>(topo.flat_size()))
    throw TopologyError("architecture vector has " + std::to_string(vec.bits.size()) +
                        " bits, topology needs " + std::to_string(topo.flat_size()));
  JointAction joint;
  joint.actions.resize(topo.num_agents);
  for (int i = 0; i < topo.num_agents; ++i) {
    int found = -1;
    for (int k = 0; k < topo.num_actions; ++k) {
      std::uint8_t bit = vec.bits[static_cast<std::size_t>(i) * topo.num_actions + k];
      if (bit == 0) continue;
      if (bit != 1) throw FeasibilityError("non-binary entry in agent block " + std::to_string(i));
      if (found >= 0)
        throw FeasibilityError("agent block " + std::to_string(i) + " has multiple set bits");
      found = k;
    }
    if (found < 0) throw FeasibilityError("agent block " + std::to_string(i) + " has no set bit");
    joint.actions[i] = found;
  }
  return joint;
}

}  // namespace manas
