#include <doctest.h>

#include <set>

#include "dqs/error.hpp"
#include "dqs/scheduler.hpp"
#include "oracle.hpp"

using namespace dqs;

namespace {

QubitRef slot(const std::string& node, int i) { return QubitRef{node, i}; }

// Minimal width-w program: prepare and measure every qubit.
Program trivial_program(int w) {
  Program p;
  for (int i = 0; i < w; ++i) p.circuit.append(Gate::prepare(QubitRef::abstract(i)));
  for (int i = 0; i < w; ++i)
    p.circuit.append(Gate::measure(QubitRef::abstract(i), "b" + std::to_string(i)));
  for (int i = 0; i < w; ++i) p.output.bits.push_back("b" + std::to_string(i));
  return p;
}

Topology two_tens() { return Topology{{{"QPU_0", 10, {}}, {"QPU_1", 10, {}}}}; }

}  // namespace

TEST_SUITE("scheduler") {
  TEST_CASE("greedy allocation fills QPUs in order and spills") {
    FreeSlots free = FreeSlots::full(two_tens());
    std::vector<Allocation> allocs;
    for (int i = 0; i < 5; ++i) {
      auto a = allocate_greedy(free, 4);
      REQUIRE(a.has_value());
      allocs.push_back(*a);
    }
    // Programs 1-2 sit on QPU_0, 3 spans the boundary, 4-5 sit on QPU_1.
    CHECK(allocs[0].slots == std::vector<QubitRef>{slot("QPU_0", 0), slot("QPU_0", 1),
                                                   slot("QPU_0", 2), slot("QPU_0", 3)});
    CHECK(allocs[1].slots == std::vector<QubitRef>{slot("QPU_0", 4), slot("QPU_0", 5),
                                                   slot("QPU_0", 6), slot("QPU_0", 7)});
    CHECK(allocs[2].slots == std::vector<QubitRef>{slot("QPU_0", 8), slot("QPU_0", 9),
                                                   slot("QPU_1", 0), slot("QPU_1", 1)});
    CHECK(allocs[3].slots == std::vector<QubitRef>{slot("QPU_1", 2), slot("QPU_1", 3),
                                                   slot("QPU_1", 4), slot("QPU_1", 5)});
    CHECK(allocs[4].slots == std::vector<QubitRef>{slot("QPU_1", 6), slot("QPU_1", 7),
                                                   slot("QPU_1", 8), slot("QPU_1", 9)});
    CHECK_FALSE(allocs[0].distributed());
    CHECK(allocs[2].distributed());
  }

  TEST_CASE("greedy returns none when capacity runs out") {
    Topology small{{{"QPU_0", 3, {}}}};
    FreeSlots free = FreeSlots::full(small);
    CHECK_FALSE(allocate_greedy(free, 4).has_value());
    // The failed attempt must not consume slots.
    CHECK(free.total_free() == 3);
  }

  TEST_CASE("greedy forced unique fill") {
    Topology t{{{"QPU_0", 2, {}}, {"QPU_1", 2, {}}}};
    FreeSlots free = FreeSlots::full(t);
    auto a = allocate_greedy(free, 4);
    REQUIRE(a.has_value());
    CHECK(a->slots == std::vector<QubitRef>{slot("QPU_0", 0), slot("QPU_0", 1), slot("QPU_1", 0),
                                            slot("QPU_1", 1)});
  }

  TEST_CASE("random allocation is valid, complete and seed-deterministic") {
    Topology t{{{"QPU_0", 4, {}}, {"QPU_1", 4, {}}}};
    SplitMix64 r1(99), r2(99);
    FreeSlots f1 = FreeSlots::full(t), f2 = FreeSlots::full(t);
    auto a1 = allocate_random(f1, 5, r1);
    auto a2 = allocate_random(f2, 5, r2);
    REQUIRE(a1.has_value());
    REQUIRE(a2.has_value());
    CHECK(a1->slots == a2->slots);

    std::set<QubitRef> distinct(a1->slots.begin(), a1->slots.end());
    CHECK(distinct.size() == 5);
    for (const QubitRef& s : a1->slots) {
      CHECK((s.node == "QPU_0" || s.node == "QPU_1"));
      CHECK(s.index >= 0);
      CHECK(s.index < 4);
    }
    CHECK(f1.total_free() == 3);

    FreeSlots tight = FreeSlots::full(Topology{{{"QPU_0", 1, {}}, {"QPU_1", 1, {}}}});
    SplitMix64 r3(7);
    auto a3 = allocate_random(tight, 2, r3);
    REQUIRE(a3.has_value());
    std::set<QubitRef> both(a3->slots.begin(), a3->slots.end());
    CHECK(both == std::set<QubitRef>{slot("QPU_0", 0), slot("QPU_1", 0)});

    SplitMix64 r4(7);
    FreeSlots empty = FreeSlots::full(Topology{{{"QPU_0", 1, {}}}});
    CHECK_FALSE(allocate_random(empty, 2, r4).has_value());
  }

  TEST_CASE("ten width-4 programs on two 10-qubit QPUs pack like Example 1") {
    std::vector<Program> programs(10, trivial_program(4));
    ParallelProgram pp =
        build_parallel_program(two_tens(), programs, greedy_allocator(), IdentityMerge{});

    REQUIRE(pp.schedule.round_count() == 2);
    REQUIRE(pp.schedule.rounds[0].size() == 2);
    // 0-based internally; reports print these 1-based.
    CHECK(pp.schedule.rounds[0][0] == std::set<int>{0, 1, 2});
    CHECK(pp.schedule.rounds[0][1] == std::set<int>{2, 3, 4});
    CHECK(pp.schedule.rounds[1][0] == std::set<int>{5, 6, 7});
    CHECK(pp.schedule.rounds[1][1] == std::set<int>{7, 8, 9});

    for (int i = 0; i < 10; ++i) CHECK(pp.allocations[i].distributed() == (i == 2 || i == 7));
  }

  TEST_CASE("one narrow program occupies a single set") {
    std::vector<Program> programs{trivial_program(3)};
    ParallelProgram pp =
        build_parallel_program(two_tens(), programs, greedy_allocator(), IdentityMerge{});
    REQUIRE(pp.schedule.round_count() == 1);
    CHECK(pp.schedule.rounds[0][0] == std::set<int>{0});
    CHECK(pp.schedule.rounds[0][1].empty());
    CHECK_FALSE(pp.allocations[0].distributed());
  }

  TEST_CASE("a program wider than the cluster is unschedulable") {
    std::vector<Program> programs{trivial_program(21)};
    CHECK_THROWS_WITH_AS(
        build_parallel_program(two_tens(), programs, greedy_allocator(), IdentityMerge{}),
        doctest::Contains("unschedulable"), Error);
  }

  TEST_CASE("schedule properties hold over random workloads") {
    SplitMix64 gen(321);
    for (int trial = 0; trial < 25; ++trial) {
      const int k = 2 + static_cast<int>(gen.next_below(3));
      Topology topo;
      int total = 0;
      for (int i = 0; i < k; ++i) {
        const int cap = 3 + static_cast<int>(gen.next_below(8));
        topo.qpus.push_back({"QPU_" + std::to_string(i), cap, {}});
        total += cap;
      }
      const int n = 1 + static_cast<int>(gen.next_below(20));
      std::vector<Program> programs;
      std::vector<int> widths;
      for (int i = 0; i < n; ++i) {
        const int w = 1 + static_cast<int>(gen.next_below(6));
        if (w > total) {
          widths.push_back(1);
          programs.push_back(trivial_program(1));
        } else {
          widths.push_back(w);
          programs.push_back(trivial_program(w));
        }
      }
      const bool use_random = gen.next_below(2) == 0;
      const Allocator alloc = use_random ? random_allocator(gen.next()) : greedy_allocator();

      ParallelProgram pp = build_parallel_program(topo, programs, alloc, IdentityMerge{});

      // Coverage and uniqueness: every program lands in exactly one round.
      std::vector<int> seen(n, 0);
      for (const auto& round : pp.schedule.rounds) {
        REQUIRE(round.size() == static_cast<size_t>(k));
        std::set<int> in_round;
        for (const auto& s : round) in_round.insert(s.begin(), s.end());
        for (int pi : in_round) ++seen[pi];
      }
      for (int i = 0; i < n; ++i) CHECK(seen[i] == 1);

      // Round capacity: widths packed per round never exceed the cluster.
      for (const auto& round : pp.schedule.rounds) {
        std::set<int> in_round;
        for (const auto& s : round) in_round.insert(s.begin(), s.end());
        int used = 0;
        for (int pi : in_round) used += widths[pi];
        CHECK(used <= total);
      }

      // Membership soundness: within its round, program i sits in set k
      // iff its allocation touches QPU k; >= 2 sets iff distributed.
      for (int i = 0; i < n; ++i) {
        const auto* home = [&]() -> const std::vector<std::set<int>>* {
          for (const auto& round : pp.schedule.rounds)
            for (const auto& s : round)
              if (s.count(i)) return &round;
          return nullptr;
        }();
        REQUIRE(home != nullptr);
        int sets = 0;
        for (int kk = 0; kk < k; ++kk) {
          bool touches = false;
          for (const QubitRef& s : pp.allocations[i].slots)
            if (s.node == topo.qpus[kk].id) touches = true;
          CHECK(((*home)[kk].count(i) > 0) == touches);
          if (touches) ++sets;
        }
        CHECK((sets >= 2) == pp.allocations[i].distributed());
        CHECK(static_cast<int>(pp.allocations[i].slots.size()) == widths[i]);
      }

      // Determinism: rebuilding yields the identical schedule.
      if (!use_random) {
        ParallelProgram again = build_parallel_program(topo, programs, greedy_allocator(),
                                                       IdentityMerge{});
        CHECK(again.schedule.rounds == pp.schedule.rounds);
        for (int i = 0; i < n; ++i) CHECK(again.allocations[i].slots == pp.allocations[i].slots);
      }
    }
  }

  TEST_CASE("mixed widths pack in arrival order") {
    Topology t{{{"QPU_0", 4, {}}}};
    std::vector<Program> programs{trivial_program(3), trivial_program(2), trivial_program(1)};
    ParallelProgram pp = build_parallel_program(t, programs, greedy_allocator(), IdentityMerge{});
    // 3 fits round 0, 2 does not fit next to it, so round 1 holds {2, 1}.
    REQUIRE(pp.schedule.round_count() == 2);
    CHECK(pp.schedule.rounds[0][0] == std::set<int>{0});
    CHECK(pp.schedule.rounds[1][0] == std::set<int>{1, 2});
  }
}
