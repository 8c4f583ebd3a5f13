#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nsdt/common.hpp"
#include "nsdt/gridworld.hpp"

namespace nsdt {

enum class Pred : int {
  At = 0,
  HasKey,
  HasKey1,
  HasKey2,
  DoorOpen,
  Door1Open,
  Door2Open,
  HasItem1,
  HasItem2,
};

inline const char* pred_name(Pred p) {
  switch (p) {
    case Pred::At: return "At";
    case Pred::HasKey: return "HasKey";
    case Pred::HasKey1: return "HasKey1";
    case Pred::HasKey2: return "HasKey2";
    case Pred::DoorOpen: return "DoorOpen";
    case Pred::Door1Open: return "Door1Open";
    case Pred::Door2Open: return "Door2Open";
    case Pred::HasItem1: return "HasItem1";
    case Pred::HasItem2: return "HasItem2";
  }
  return "?";
}

// A grounded proposition. Only At carries a cell argument.
struct Proposition {
  Pred pred = Pred::At;
  Cell cell{};  // meaningful iff pred == At

  static Proposition at(Cell c) { return {Pred::At, c}; }
  static Proposition flag(Pred p) { return {p, {0, 0}}; }

  friend bool operator==(const Proposition& a, const Proposition& b) {
    if (a.pred != b.pred) return false;
    return a.pred != Pred::At || a.cell == b.cell;
  }
  friend auto operator<=>(const Proposition& a, const Proposition& b) {
    if (auto c = a.pred <=> b.pred; c != 0) return c;
    if (a.pred != Pred::At) return std::strong_ordering::equal;
    return a.cell <=> b.cell;
  }

  std::string str() const {
    if (pred == Pred::At)
      return "At(" + std::to_string(cell.row) + "," + std::to_string(cell.col) + ")";
    return pred_name(pred);
  }
};

// A set of propositions in canonical (sorted, deduplicated) order.
class SymbolicState {
 public:
  SymbolicState() = default;
  explicit SymbolicState(std::vector<Proposition> props) : props_(std::move(props)) {
    canonicalize();
  }

  const std::vector<Proposition>& props() const { return props_; }
  bool contains(const Proposition& p) const {
    return std::binary_search(props_.begin(), props_.end(), p);
  }
  bool contains_all(const std::vector<Proposition>& ps) const {
    for (const auto& p : ps)
      if (!contains(p)) return false;
    return true;
  }
  std::optional<Cell> at_cell() const {
    for (const auto& p : props_)
      if (p.pred == Pred::At) return p.cell;
    return std::nullopt;
  }
  size_t count_at() const {
    size_t n = 0;
    for (const auto& p : props_) n += (p.pred == Pred::At);
    return n;
  }

  // Canonical serialization; doubles as the hash key for search.
  std::string key() const {
    std::string k;
    for (const auto& p : props_) {
      k += p.str();
      k += ';';
    }
    return k;
  }

  friend bool operator==(const SymbolicState&, const SymbolicState&) = default;

 private:
  void canonicalize() {
    std::sort(props_.begin(), props_.end());
    props_.erase(std::unique(props_.begin(), props_.end()), props_.end());
  }
  std::vector<Proposition> props_;
};

struct Operator {
  std::string name;
  std::vector<Proposition> pre;
  std::vector<Proposition> add;
  std::vector<Proposition> del;
  double cost = 1.0;
};

struct GoalSpec {
  std::vector<Proposition> goal_props;
};

struct Plan {
  std::vector<Operator> ops;
  double total_cost = 0.0;
};

struct Unsolvable {};

using PlanResult = std::variant<Plan, Unsolvable>;

inline bool is_unsolvable(const PlanResult& r) { return std::holds_alternative<Unsolvable>(r); }
inline const Plan& get_plan(const PlanResult& r) { return std::get<Plan>(r); }

// phi: lifts a low-level state to the set of propositions true in it.
inline SymbolicState abstract_state(const EnvState& s, const EnvConfig& cfg) {
  std::vector<Proposition> props;
  props.push_back(Proposition::at(s.cell()));
  if (cfg.case_id == CaseId::Single) {
    if (s.flag(kHasKey)) props.push_back(Proposition::flag(Pred::HasKey));
    if (s.flag(kDoorOpen)) props.push_back(Proposition::flag(Pred::DoorOpen));
  } else {
    if (s.flag(kHasK1)) props.push_back(Proposition::flag(Pred::HasKey1));
    if (s.flag(kHasK2)) props.push_back(Proposition::flag(Pred::HasKey2));
    if (s.flag(kDoor1Open)) props.push_back(Proposition::flag(Pred::Door1Open));
    if (s.flag(kDoor2Open)) props.push_back(Proposition::flag(Pred::Door2Open));
    if (s.flag(kItem1)) props.push_back(Proposition::flag(Pred::HasItem1));
    if (s.flag(kItem2)) props.push_back(Proposition::flag(Pred::HasItem2));
  }
  return SymbolicState(std::move(props));
}

inline std::string move_op_name(Cell from, Cell to) {
  return "Move(" + std::to_string(from.row) + "," + std::to_string(from.col) + "->" +
         std::to_string(to.row) + "," + std::to_string(to.col) + ")";
}

// Grounds the operator set for a layout: one Move per ordered adjacent cell
// pair (gated by DoorOpen when leaving a door cell), plus the pick/open
// operators. All costs are 1.
inline std::vector<Operator> ground_operators(const EnvConfig& cfg) {
  validate_config(cfg);
  std::vector<Operator> ops;
  const Layout& L = cfg.layout;

  auto door_gate = [&](Cell from) -> std::vector<Proposition> {
    std::vector<Proposition> gates;
    if (cfg.case_id == CaseId::Single) {
      if (from == L.door1) gates.push_back(Proposition::flag(Pred::DoorOpen));
    } else {
      if (from == L.door1) gates.push_back(Proposition::flag(Pred::Door1Open));
      if (from == L.door2) gates.push_back(Proposition::flag(Pred::Door2Open));
    }
    return gates;
  };

  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      Cell from{r, c};
      for (auto [dr, dc] : detail::kMoveDelta) {
        Cell to{r + dr, c + dc};
        if (!cfg.in_grid(to)) continue;
        Operator op;
        op.name = move_op_name(from, to);
        op.pre.push_back(Proposition::at(from));
        for (auto& g : door_gate(from)) op.pre.push_back(g);
        if (cfg.door_blocks_entry)
          for (auto& g : door_gate(to)) op.pre.push_back(g);
        op.add.push_back(Proposition::at(to));
        op.del.push_back(Proposition::at(from));
        ops.push_back(std::move(op));
      }
    }
  }

  auto interact = [&](std::string name, Cell where, std::vector<Pred> need, Pred gain) {
    Operator op;
    op.name = std::move(name);
    op.pre.push_back(Proposition::at(where));
    for (Pred p : need) op.pre.push_back(Proposition::flag(p));
    op.add.push_back(Proposition::flag(gain));
    ops.push_back(std::move(op));
  };

  if (cfg.case_id == CaseId::Single) {
    interact("PickKey", L.key1, {}, Pred::HasKey);
    interact("OpenDoor", L.door1, {Pred::HasKey}, Pred::DoorOpen);
  } else {
    interact("PickKey1", L.key1, {}, Pred::HasKey1);
    interact("PickKey2", L.key2, {}, Pred::HasKey2);
    interact("OpenDoor1", L.door1, {Pred::HasKey1}, Pred::Door1Open);
    interact("OpenDoor2", L.door2, {Pred::HasKey2}, Pred::Door2Open);
    interact("PickItem1", L.item1, {}, Pred::HasItem1);
    interact("PickItem2", L.item2, {}, Pred::HasItem2);
  }

  // Fixed expansion order keeps planning deterministic.
  std::sort(ops.begin(), ops.end(), [](const Operator& a, const Operator& b) {
    return a.name < b.name;
  });
  return ops;
}

// Goal propositions the planner targets for each case study. The multi-goal
// chain requires every key, door and item before reaching the exit.
inline GoalSpec goal_for(const EnvConfig& cfg) {
  GoalSpec g;
  g.goal_props.push_back(Proposition::at(cfg.layout.goal));
  if (cfg.case_id == CaseId::Single) {
    g.goal_props.push_back(Proposition::flag(Pred::DoorOpen));
  } else {
    g.goal_props.push_back(Proposition::flag(Pred::HasKey1));
    g.goal_props.push_back(Proposition::flag(Pred::HasKey2));
    g.goal_props.push_back(Proposition::flag(Pred::Door1Open));
    g.goal_props.push_back(Proposition::flag(Pred::Door2Open));
    g.goal_props.push_back(Proposition::flag(Pred::HasItem1));
    g.goal_props.push_back(Proposition::flag(Pred::HasItem2));
  }
  return g;
}

// Successor rule: (props \ del) U add. Preconditions must hold.
inline SymbolicState apply_operator(const SymbolicState& s, const Operator& op) {
  if (!s.contains_all(op.pre))
    throw UsageError("operator " + op.name + " is not applicable in state " + s.key());
  std::vector<Proposition> next;
  next.reserve(s.props().size() + op.add.size());
  for (const auto& p : s.props()) {
    bool deleted = false;
    for (const auto& d : op.del) deleted |= (p == d);
    if (!deleted) next.push_back(p);
  }
  for (const auto& a : op.add) next.push_back(a);
  return SymbolicState(std::move(next));
}

// Uniform-cost breadth-first search over canonically hashed proposition sets.
// Expansion follows the (sorted) operator order, so equal-cost plans resolve
// deterministically.
inline PlanResult plan(const SymbolicState& initial, const GoalSpec& goal,
                       const std::vector<Operator>& ops) {
  if (initial.count_at() != 1) throw UsageError("initial symbolic state needs exactly one At");

  if (initial.contains_all(goal.goal_props)) return Plan{};

  struct Node {
    SymbolicState state;
    int parent = -1;
    int via_op = -1;
  };
  std::vector<Node> nodes;
  std::unordered_map<std::string, int> seen;
  std::deque<int> frontier;

  nodes.push_back({initial, -1, -1});
  seen.emplace(initial.key(), 0);
  frontier.push_back(0);

  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    for (size_t oi = 0; oi < ops.size(); ++oi) {
      const Operator& op = ops[oi];
      if (!nodes[size_t(cur)].state.contains_all(op.pre)) continue;
      SymbolicState next = apply_operator(nodes[size_t(cur)].state, op);
      std::string k = next.key();
      if (seen.contains(k)) continue;
      int id = int(nodes.size());
      nodes.push_back({std::move(next), cur, int(oi)});
      seen.emplace(std::move(k), id);
      if (nodes.back().state.contains_all(goal.goal_props)) {
        Plan p;
        for (int at = id; nodes[size_t(at)].parent >= 0; at = nodes[size_t(at)].parent)
          p.ops.push_back(ops[size_t(nodes[size_t(at)].via_op)]);
        std::reverse(p.ops.begin(), p.ops.end());
        for (const auto& o : p.ops) p.total_cost += o.cost;
        return p;
      }
      frontier.push_back(id);
    }
  }
  return Unsolvable{};
}

// ---- JSON ----

inline void to_json(nlohmann::json& j, const Proposition& p) {
  j = nlohmann::json{{"pred", pred_name(p.pred)}};
  if (p.pred == Pred::At) j["cell"] = p.cell;
}

inline void to_json(nlohmann::json& j, const Operator& op) {
  j = nlohmann::json{{"name", op.name}, {"cost", op.cost}};
}

inline void to_json(nlohmann::json& j, const Plan& p) {
  j = nlohmann::json{{"total_cost", p.total_cost}, {"ops", nlohmann::json::array()}};
  for (const auto& op : p.ops) j["ops"].push_back(op.name);
}

}  // namespace nsdt
