#include "nsdt/symbolic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "nsdt/gridworld.hpp"
#include "nsdt/rng.hpp"
#include "oracles.hpp"

using namespace nsdt;

TEST(Abstract, InitialStateIsJustAt) {
  EnvConfig cfg = case1_default();
  SymbolicState phi = abstract_state(initial_state(cfg), cfg);
  ASSERT_EQ(phi.props().size(), 1u);
  EXPECT_EQ(phi.props()[0], Proposition::at(cfg.layout.agent_start));
}

TEST(Abstract, FlagsLiftToPropositions) {
  EnvConfig cfg = case1_default();
  EnvState s = initial_state(cfg);
  s.row = cfg.layout.goal.row;
  s.col = cfg.layout.goal.col;
  s.flags[kHasKey] = 1;
  s.flags[kDoorOpen] = 1;
  SymbolicState phi = abstract_state(s, cfg);
  EXPECT_TRUE(phi.contains(Proposition::at(cfg.layout.goal)));
  EXPECT_TRUE(phi.contains(Proposition::flag(Pred::HasKey)));
  EXPECT_TRUE(phi.contains(Proposition::flag(Pred::DoorOpen)));
  EXPECT_EQ(phi.props().size(), 3u);
}

TEST(Abstract, RandomWalkAlwaysHasExactlyOneAt) {
  EnvConfig cfg = case2_default();
  cfg.fail_prob = 0.2;
  cfg.max_steps = 1000;
  Env env(cfg);
  Rng r = Rng::keyed(11, 0);
  env.reset(0);
  EXPECT_EQ(abstract_state(env.state(), cfg).count_at(), 1u);
  for (int i = 0; i < 1000 && !env.done(); ++i) {
    env.step(Action(r.next_below(5)));
    ASSERT_EQ(abstract_state(env.state(), cfg).count_at(), 1u);
  }
}

TEST(GroundOperators, MoveCountMatchesEnumeration) {
  EnvConfig cfg = case1_default();
  auto ops = ground_operators(cfg);
  // Enumeration oracle: ordered adjacent in-grid cell pairs.
  int adjacent = 0;
  for (int r = 0; r < cfg.height; ++r)
    for (int c = 0; c < cfg.width; ++c)
      for (auto [dr, dc] : std::vector<std::pair<int, int>>{{-1, 0}, {1, 0}, {0, -1}, {0, 1}})
        if (cfg.in_grid({r + dr, c + dc})) ++adjacent;
  int moves = 0;
  for (const auto& op : ops) moves += op.name.starts_with("Move(");
  EXPECT_EQ(moves, adjacent);
  EXPECT_EQ(int(ops.size()), adjacent + 2);  // + PickKey + OpenDoor
}

TEST(GroundOperators, OpenDoorRequiresKey) {
  auto ops = ground_operators(case1_default());
  auto it = std::find_if(ops.begin(), ops.end(),
                         [](const Operator& o) { return o.name == "OpenDoor"; });
  ASSERT_NE(it, ops.end());
  bool has_key_pre = false;
  for (const auto& p : it->pre) has_key_pre |= (p == Proposition::flag(Pred::HasKey));
  EXPECT_TRUE(has_key_pre);
}

TEST(GroundOperators, AddAndDeleteAreDisjoint) {
  for (const auto& cfg : {case1_default(), case2_default()}) {
    for (const auto& op : ground_operators(cfg)) {
      for (const auto& a : op.add)
        for (const auto& d : op.del) ASSERT_FALSE(a == d) << op.name;
      ASSERT_GE(op.cost, 0.0);
    }
  }
}

TEST(GroundOperators, MovesOutOfDoorCellsAreGated) {
  EnvConfig cfg = case2_default();
  auto ops = ground_operators(cfg);
  for (const auto& op : ops) {
    if (!op.name.starts_with("Move(")) continue;
    Proposition from;
    for (const auto& p : op.del)
      if (p.pred == Pred::At) from = p;
    if (from.cell == cfg.layout.door1)
      EXPECT_TRUE(std::find(op.pre.begin(), op.pre.end(), Proposition::flag(Pred::Door1Open)) !=
                  op.pre.end());
    if (from.cell == cfg.layout.door2)
      EXPECT_TRUE(std::find(op.pre.begin(), op.pre.end(), Proposition::flag(Pred::Door2Open)) !=
                  op.pre.end());
  }
}

TEST(Plan, GoalAlreadySatisfied) {
  EnvConfig cfg = case1_default();
  EnvState s = initial_state(cfg);
  s.row = cfg.layout.goal.row;
  s.col = cfg.layout.goal.col;
  s.flags[kDoorOpen] = 1;
  PlanResult r = plan(abstract_state(s, cfg), goal_for(cfg), ground_operators(cfg));
  ASSERT_FALSE(is_unsolvable(r));
  EXPECT_TRUE(get_plan(r).ops.empty());
  EXPECT_DOUBLE_EQ(get_plan(r).total_cost, 0.0);
}

TEST(Plan, Case1CostMatchesDijkstraOracle) {
  EnvConfig cfg = case1_default();
  auto ops = ground_operators(cfg);
  SymbolicState init = abstract_state(initial_state(cfg), cfg);
  PlanResult r = plan(init, goal_for(cfg), ops);
  ASSERT_FALSE(is_unsolvable(r));
  auto oracle_cost = oracle::dijkstra_plan_cost(init, goal_for(cfg), ops);
  ASSERT_TRUE(oracle_cost.has_value());
  EXPECT_DOUBLE_EQ(get_plan(r).total_cost, *oracle_cost);
}

TEST(Plan, Case2OrdersKey2AfterDoor1) {
  EnvConfig cfg = case2_default();
  PlanResult r = plan(abstract_state(initial_state(cfg), cfg), goal_for(cfg),
                      ground_operators(cfg));
  ASSERT_FALSE(is_unsolvable(r));
  const Plan& p = get_plan(r);
  int pick_key2 = -1, open_door1 = -1;
  for (int i = 0; i < int(p.ops.size()); ++i) {
    if (p.ops[size_t(i)].name == "PickKey2") pick_key2 = i;
    if (p.ops[size_t(i)].name == "OpenDoor1") open_door1 = i;
  }
  ASSERT_GE(pick_key2, 0);
  ASSERT_GE(open_door1, 0);
  EXPECT_GT(pick_key2, open_door1);
}

TEST(Plan, UnreachableGoalIsUnsolvable) {
  EnvConfig cfg = case1_default();
  GoalSpec goal;
  goal.goal_props.push_back(Proposition::flag(Pred::HasKey2));  // no operator adds it
  PlanResult r = plan(abstract_state(initial_state(cfg), cfg), goal, ground_operators(cfg));
  EXPECT_TRUE(is_unsolvable(r));

  PlanResult empty_ops = plan(abstract_state(initial_state(cfg), cfg), goal_for(cfg), {});
  EXPECT_TRUE(is_unsolvable(empty_ops));
}

TEST(Apply, MoveSwapsAt) {
  Operator mv;
  mv.name = move_op_name({1, 1}, {1, 2});
  mv.pre = {Proposition::at({1, 1})};
  mv.add = {Proposition::at({1, 2})};
  mv.del = {Proposition::at({1, 1})};
  SymbolicState s({Proposition::at({1, 1})});
  SymbolicState next = apply_operator(s, mv);
  EXPECT_EQ(next.props().size(), 1u);
  EXPECT_TRUE(next.contains(Proposition::at({1, 2})));
}

TEST(Apply, PickKeyAddsFlag) {
  EnvConfig cfg = case1_default();
  auto ops = ground_operators(cfg);
  auto it = std::find_if(ops.begin(), ops.end(),
                         [](const Operator& o) { return o.name == "PickKey"; });
  ASSERT_NE(it, ops.end());
  SymbolicState s({Proposition::at(cfg.layout.key1)});
  SymbolicState next = apply_operator(s, *it);
  EXPECT_TRUE(next.contains(Proposition::flag(Pred::HasKey)));
  EXPECT_TRUE(next.contains(Proposition::at(cfg.layout.key1)));
}

TEST(Apply, PreconditionViolationThrows) {
  EnvConfig cfg = case1_default();
  auto ops = ground_operators(cfg);
  auto it = std::find_if(ops.begin(), ops.end(),
                         [](const Operator& o) { return o.name == "OpenDoor"; });
  SymbolicState s({Proposition::at(cfg.layout.door1)});  // no key
  EXPECT_THROW(apply_operator(s, *it), UsageError);
}

TEST(Apply, FullPlanReplayReachesGoal) {
  for (const auto& cfg : {case1_default(), case2_default()}) {
    auto ops = ground_operators(cfg);
    SymbolicState s = abstract_state(initial_state(cfg), cfg);
    GoalSpec goal = goal_for(cfg);
    PlanResult r = plan(s, goal, ops);
    ASSERT_FALSE(is_unsolvable(r));
    for (const auto& op : get_plan(r).ops) s = apply_operator(s, op);
    EXPECT_TRUE(s.contains_all(goal.goal_props));
    EXPECT_EQ(s.count_at(), 1u);
  }
}

TEST(Properties, RandomLayoutOptimalitySoundnessCompleteness) {
  Rng rng = Rng::keyed(12, 0);
  for (int trial = 0; trial < 40; ++trial) {
    EnvConfig cfg = random_layout(CaseId::Single, 5, 5, rng);
    auto ops = ground_operators(cfg);
    SymbolicState init = abstract_state(initial_state(cfg), cfg);
    GoalSpec goal = goal_for(cfg);
    PlanResult r = plan(init, goal, ops);
    auto oracle_cost = oracle::dijkstra_plan_cost(init, goal, ops);
    ASSERT_TRUE(oracle_cost.has_value());  // layouts without walls are solvable
    ASSERT_FALSE(is_unsolvable(r));
    EXPECT_DOUBLE_EQ(get_plan(r).total_cost, *oracle_cost);
    // Soundness: the plan replays and reaches the goal.
    SymbolicState s = init;
    for (const auto& op : get_plan(r).ops) s = apply_operator(s, op);
    EXPECT_TRUE(s.contains_all(goal.goal_props));
  }
}

TEST(Properties, PlanIsDeterministic) {
  EnvConfig cfg = case2_default();
  auto ops = ground_operators(cfg);
  SymbolicState init = abstract_state(initial_state(cfg), cfg);
  PlanResult a = plan(init, goal_for(cfg), ops);
  PlanResult b = plan(init, goal_for(cfg), ops);
  ASSERT_FALSE(is_unsolvable(a));
  ASSERT_FALSE(is_unsolvable(b));
  ASSERT_EQ(get_plan(a).ops.size(), get_plan(b).ops.size());
  for (size_t i = 0; i < get_plan(a).ops.size(); ++i)
    EXPECT_EQ(get_plan(a).ops[i].name, get_plan(b).ops[i].name);
}

TEST(Json, PlanSerializesToNamedOperators) {
  EnvConfig cfg = case1_default();
  PlanResult r = plan(abstract_state(initial_state(cfg), cfg), goal_for(cfg),
                      ground_operators(cfg));
  nlohmann::json j = get_plan(r);
  EXPECT_TRUE(j.contains("ops"));
  EXPECT_TRUE(j.contains("total_cost"));
  EXPECT_EQ(j["ops"].size(), get_plan(r).ops.size());
}
