#include <doctest.h>

#include <random>

#include "manas/core.hpp"

using namespace manas;

TEST_SUITE("core") {

TEST_CASE("encode lays bits out agent-major") {
  Topology topo(2, 2);
  ArchitectureVector v = encode(JointAction{{0, 1}}, topo);
  CHECK(v.bits == std::vector<std::uint8_t>{1, 0, 0, 1});

  ArchitectureVector single = encode(JointAction{{0}}, Topology(1, 1));
  CHECK(single.bits == std::vector<std::uint8_t>{1});

  ArchitectureVector wide = encode(JointAction{{3, 0, 2}}, Topology(3, 4));
  std::vector<std::uint8_t> expected(12, 0);
  expected[3] = expected[4] = expected[10] = 1;
  CHECK(wide.bits == expected);
}

TEST_CASE("decode inverts encode and rejects malformed blocks") {
  Topology topo(2, 2);
  CHECK(decode(ArchitectureVector{{0, 1, 1, 0}}, topo) == JointAction{{1, 0}});
  CHECK(decode(ArchitectureVector{{1}}, Topology(1, 1)) == JointAction{{0}});

  CHECK_THROWS_AS(decode(ArchitectureVector{{1, 1}}, Topology(1, 2)), FeasibilityError);
  CHECK_THROWS_AS(decode(ArchitectureVector{{0, 0}}, Topology(1, 2)), FeasibilityError);
  CHECK_THROWS_AS(decode(ArchitectureVector{{1, 0, 1}}, Topology(1, 2)), TopologyError);
}

TEST_CASE("encode rejects actions that do not fit the topology") {
  Topology topo(2, 3);
  CHECK_THROWS_AS(encode(JointAction{{0, 3}}, topo), TopologyError);
  CHECK_THROWS_AS(encode(JointAction{{0}}, topo), TopologyError);
  CHECK_THROWS_AS(encode(JointAction{{-1, 0}}, topo), TopologyError);
}

TEST_CASE("round trip holds for random joint actions") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 8);
    int k = 1 + static_cast<int>(rng() % 6);
    Topology topo(n, k);
    JointAction joint;
    joint.actions.resize(n);
    for (int i = 0; i < n; ++i) joint.actions[i] = static_cast<int>(rng() % k);

    ArchitectureVector v = encode(joint, topo);
    CHECK(decode(v, topo) == joint);

    int weight = 0;
    for (auto b : v.bits) weight += b;
    CHECK(weight == n);
  }
}

TEST_CASE("topology validates and counts the joint space") {
  CHECK_THROWS_AS(Topology(0, 2), TopologyError);
  CHECK_THROWS_AS(Topology(2, 0), TopologyError);

  CHECK(Topology(3, 4).joint_space_size() == 64);
  CHECK(Topology(1, 1).joint_space_size() == 1);
  // 8^112 overflows 64 bits; the size must report that instead of wrapping.
  CHECK_FALSE(Topology(112, 8).joint_space_size().has_value());
  CHECK(Topology(63, 2).joint_space_size() == (std::uint64_t{1} << 63));
}

TEST_CASE("cell helper allocates 14 agents per cell") {
  CHECK(Topology::from_cells(8, 8).num_agents == 112);
  CHECK(Topology::from_cells(20, 8).num_agents == 280);
  CHECK(Topology::from_cells(1, 3).num_actions == 3);
  CHECK_THROWS_AS(Topology::from_cells(0, 2), TopologyError);
}

}  // TEST_SUITE
