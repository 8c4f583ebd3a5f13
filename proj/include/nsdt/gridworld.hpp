#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsdt/common.hpp"
#include "nsdt/rng.hpp"

namespace nsdt {

enum class Action : int { Up = 0, Right = 1, Down = 2, Left = 3, PickOpen = 4 };

constexpr int kActionCount = 5;

inline const char* action_name(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Right: return "right";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::PickOpen: return "pick_open";
  }
  return "?";
}

enum class CaseId { Single, MultiGoal };

inline const char* case_name(CaseId c) { return c == CaseId::Single ? "single" : "multi_goal"; }

// Case 1 flag order: [hasKey, doorOpen].
// Case 2 flag order: [hasK1, hasK2, door1Open, door2Open, item1Collected, item2Collected].
struct EnvState {
  int row = 0;
  int col = 0;
  std::vector<uint8_t> flags;

  Cell cell() const { return {row, col}; }
  bool flag(int i) const { return flags[size_t(i)] != 0; }

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct Layout {
  Cell agent_start{};
  Cell key1{};
  Cell door1{};
  Cell goal{};
  // Multi-goal case only:
  Cell key2{};
  Cell door2{};
  Cell item1{};
  Cell item2{};
};

struct EnvConfig {
  CaseId case_id = CaseId::Single;
  int width = 5;
  int height = 5;
  double fail_prob = 0.1;
  double step_penalty = -0.1;
  double success_reward = 1.0;
  Layout layout{};
  int max_steps = 100;
  uint64_t seed = 0;
  // The source model blocks movement *out of* a closed door cell; entry stays
  // legal. Setting this also blocks entry (the common grid convention).
  bool door_blocks_entry = false;

  int flag_count() const { return case_id == CaseId::Single ? 2 : 6; }

  std::vector<Cell> entity_cells() const {
    if (case_id == CaseId::Single)
      return {layout.agent_start, layout.key1, layout.door1, layout.goal};
    return {layout.agent_start, layout.key1, layout.door1, layout.goal,
            layout.key2,        layout.door2, layout.item1, layout.item2};
  }

  bool in_grid(const Cell& c) const {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  }
};

// Case 1 flag indices.
constexpr int kHasKey = 0;
constexpr int kDoorOpen = 1;
// Case 2 flag indices.
constexpr int kHasK1 = 0;
constexpr int kHasK2 = 1;
constexpr int kDoor1Open = 2;
constexpr int kDoor2Open = 3;
constexpr int kItem1 = 4;
constexpr int kItem2 = 5;

inline std::vector<std::string> flag_names(const EnvConfig& cfg) {
  if (cfg.case_id == CaseId::Single) return {"has_key", "door_open"};
  return {"has_key1", "has_key2", "door1_open", "door2_open", "item1_collected", "item2_collected"};
}

enum class StepInfo {
  Moved,
  MoveFailed,
  MoveBlocked,
  Picked,
  Opened,
  Collected,
  NoOp,
  GoalReached,
  TimeOut,
};

inline const char* step_info_name(StepInfo i) {
  switch (i) {
    case StepInfo::Moved: return "moved";
    case StepInfo::MoveFailed: return "move_failed";
    case StepInfo::MoveBlocked: return "move_blocked";
    case StepInfo::Picked: return "picked";
    case StepInfo::Opened: return "opened";
    case StepInfo::Collected: return "collected";
    case StepInfo::NoOp: return "no_op";
    case StepInfo::GoalReached: return "goal_reached";
    case StepInfo::TimeOut: return "time_out";
  }
  return "?";
}

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  StepInfo info = StepInfo::NoOp;
};

inline void validate_config(const EnvConfig& cfg) {
  if (cfg.width < 2 || cfg.height < 2) throw ConfigError("grid must be at least 2x2");
  if (!(cfg.fail_prob >= 0.0 && cfg.fail_prob <= 1.0))
    throw ConfigError("fail_prob must lie in [0,1]");
  if (cfg.max_steps < 1) throw ConfigError("max_steps must be positive");
  auto cells = cfg.entity_cells();
  for (const auto& c : cells)
    if (!cfg.in_grid(c)) throw ConfigError("layout cell outside grid");
  for (size_t i = 0; i < cells.size(); ++i)
    for (size_t j = i + 1; j < cells.size(); ++j)
      if (cells[i] == cells[j]) throw ConfigError("layout cells must be pairwise distinct");
}

inline bool success_condition(const EnvState& s, const EnvConfig& cfg) {
  if (s.cell() != cfg.layout.goal) return false;
  if (cfg.case_id == CaseId::Single) return s.flag(kDoorOpen);
  return s.flag(kItem1) && s.flag(kItem2);
}

inline EnvState initial_state(const EnvConfig& cfg) {
  EnvState s;
  s.row = cfg.layout.agent_start.row;
  s.col = cfg.layout.agent_start.col;
  s.flags.assign(size_t(cfg.flag_count()), 0);
  return s;
}

namespace detail {

constexpr std::array<std::pair<int, int>, 4> kMoveDelta = {{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};

// The door index (0 or 1) whose closed state pins the agent to `c`, if any.
inline std::optional<int> closed_door_at(const Cell& c, const EnvState& s, const EnvConfig& cfg) {
  if (cfg.case_id == CaseId::Single) {
    if (c == cfg.layout.door1 && !s.flag(kDoorOpen)) return 0;
    return std::nullopt;
  }
  if (c == cfg.layout.door1 && !s.flag(kDoor1Open)) return 0;
  if (c == cfg.layout.door2 && !s.flag(kDoor2Open)) return 1;
  return std::nullopt;
}

}  // namespace detail

// One-step dynamics as a pure function of (state, action, uniform draw).
// Movement consumes the draw; pick/open is deterministic and ignores it.
inline StepResult transition(const EnvState& s, Action a, double draw, const EnvConfig& cfg) {
  StepResult r;
  r.next_state = s;
  r.reward = cfg.step_penalty;

  if (a != Action::PickOpen) {
    if (draw < cfg.fail_prob) {
      r.info = StepInfo::MoveFailed;
    } else {
      auto [dr, dc] = detail::kMoveDelta[size_t(a)];
      Cell target{s.row + dr, s.col + dc};
      if (!cfg.in_grid(target)) {
        r.info = StepInfo::MoveBlocked;
      } else if (detail::closed_door_at(s.cell(), s, cfg)) {
        r.info = StepInfo::MoveBlocked;
      } else if (cfg.door_blocks_entry && detail::closed_door_at(target, s, cfg)) {
        r.info = StepInfo::MoveBlocked;
      } else {
        r.next_state.row = target.row;
        r.next_state.col = target.col;
        r.info = StepInfo::Moved;
      }
    }
  } else {
    const Cell here = s.cell();
    const Layout& L = cfg.layout;
    r.info = StepInfo::NoOp;
    if (cfg.case_id == CaseId::Single) {
      if (here == L.key1 && !s.flag(kHasKey)) {
        r.next_state.flags[kHasKey] = 1;
        r.info = StepInfo::Picked;
      } else if (here == L.door1 && s.flag(kHasKey) && !s.flag(kDoorOpen)) {
        r.next_state.flags[kDoorOpen] = 1;
        r.info = StepInfo::Opened;
      }
    } else {
      if (here == L.key1 && !s.flag(kHasK1)) {
        r.next_state.flags[kHasK1] = 1;
        r.info = StepInfo::Picked;
      } else if (here == L.key2 && !s.flag(kHasK2)) {
        r.next_state.flags[kHasK2] = 1;
        r.info = StepInfo::Picked;
      } else if (here == L.door1 && s.flag(kHasK1) && !s.flag(kDoor1Open)) {
        r.next_state.flags[kDoor1Open] = 1;
        r.info = StepInfo::Opened;
      } else if (here == L.door2 && s.flag(kHasK2) && !s.flag(kDoor2Open)) {
        r.next_state.flags[kDoor2Open] = 1;
        r.info = StepInfo::Opened;
      } else if (here == L.item1 && !s.flag(kItem1)) {
        r.next_state.flags[kItem1] = 1;
        r.info = StepInfo::Collected;
      } else if (here == L.item2 && !s.flag(kItem2)) {
        r.next_state.flags[kItem2] = 1;
        r.info = StepInfo::Collected;
      }
    }
  }

  if (success_condition(r.next_state, cfg)) {
    r.reward += cfg.success_reward;
    r.done = true;
    r.info = StepInfo::GoalReached;
  }
  return r;
}

// Stateful episode wrapper. Each episode owns a counter-based stream keyed by
// (config.seed, episode index), so identical (seed, action sequence) pairs
// replay bit-identically and episodes can run on any thread schedule.
class Env {
 public:
  explicit Env(const EnvConfig& cfg) : cfg_(cfg), rng_(0) { validate_config(cfg_); }

  const EnvConfig& config() const { return cfg_; }

  EnvState reset() { return reset(next_episode_++); }

  EnvState reset(uint64_t episode_index) {
    next_episode_ = episode_index + 1;
    rng_ = Rng::keyed(cfg_.seed, episode_index);
    state_ = initial_state(cfg_);
    steps_ = 0;
    done_ = false;
    return state_;
  }

  StepResult step(Action a) {
    if (done_) throw UsageError("step() called on a finished episode");
    double draw = (a != Action::PickOpen) ? rng_.next_uniform() : 0.0;
    StepResult r = transition(state_, a, draw, cfg_);
    ++steps_;
    if (!r.done && steps_ >= cfg_.max_steps) {
      r.done = true;
      r.info = StepInfo::TimeOut;
    }
    state_ = r.next_state;
    done_ = r.done;
    return r;
  }

  const EnvState& state() const { return state_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }

 private:
  EnvConfig cfg_;
  Rng rng_;
  EnvState state_;
  uint64_t next_episode_ = 0;
  int steps_ = 0;
  bool done_ = false;
};

// ---- canonical presets ----

inline EnvConfig case1_default() {
  EnvConfig cfg;
  cfg.case_id = CaseId::Single;
  cfg.width = 5;
  cfg.height = 5;
  cfg.layout.agent_start = {0, 0};
  cfg.layout.key1 = {4, 0};
  cfg.layout.door1 = {2, 2};
  cfg.layout.goal = {4, 4};
  cfg.max_steps = 100;
  return cfg;
}

// The multi-goal chain sits on the border ring with equal spacing, so the
// cost-optimal plan visits key1 -> door1 -> key2 -> door2 -> item1 -> item2
// -> exit in that order.
inline EnvConfig case2_default() {
  EnvConfig cfg;
  cfg.case_id = CaseId::MultiGoal;
  cfg.width = 7;
  cfg.height = 7;
  cfg.layout.agent_start = {0, 0};
  cfg.layout.key1 = {3, 0};
  cfg.layout.door1 = {6, 0};
  cfg.layout.key2 = {6, 3};
  cfg.layout.door2 = {6, 6};
  cfg.layout.item1 = {3, 6};
  cfg.layout.item2 = {0, 6};
  cfg.layout.goal = {0, 3};
  cfg.max_steps = 400;
  return cfg;
}

inline EnvConfig preset_by_name(const std::string& name) {
  if (name == "case1_default") return case1_default();
  if (name == "case2_default") return case2_default();
  throw ConfigError("unknown preset: " + name);
}

// Random layout with pairwise-distinct entity cells; every such layout is
// solvable (the grid has no walls).
inline EnvConfig random_layout(CaseId case_id, int width, int height, Rng& rng) {
  EnvConfig cfg = (case_id == CaseId::Single) ? case1_default() : case2_default();
  cfg.width = width;
  cfg.height = height;
  int n = (case_id == CaseId::Single) ? 4 : 8;
  std::vector<int> picks;
  while (int(picks.size()) < n) {
    int c = int(rng.next_below(uint64_t(width) * uint64_t(height)));
    bool dup = false;
    for (int p : picks) dup |= (p == c);
    if (!dup) picks.push_back(c);
  }
  auto cell = [&](int i) { return Cell{picks[size_t(i)] / width, picks[size_t(i)] % width}; };
  cfg.layout.agent_start = cell(0);
  cfg.layout.key1 = cell(1);
  cfg.layout.door1 = cell(2);
  cfg.layout.goal = cell(3);
  if (case_id == CaseId::MultiGoal) {
    cfg.layout.key2 = cell(4);
    cfg.layout.door2 = cell(5);
    cfg.layout.item1 = cell(6);
    cfg.layout.item2 = cell(7);
  }
  return cfg;
}

// ---- JSON ----

inline void to_json(nlohmann::json& j, const Cell& c) { j = nlohmann::json::array({c.row, c.col}); }
inline void from_json(const nlohmann::json& j, Cell& c) {
  c.row = j.at(0).get<int>();
  c.col = j.at(1).get<int>();
}

inline void to_json(nlohmann::json& j, const EnvConfig& cfg) {
  j = nlohmann::json{
      {"schema_version", 1},
      {"case_id", case_name(cfg.case_id)},
      {"width", cfg.width},
      {"height", cfg.height},
      {"fail_prob", cfg.fail_prob},
      {"step_penalty", cfg.step_penalty},
      {"success_reward", cfg.success_reward},
      {"max_steps", cfg.max_steps},
      {"seed", cfg.seed},
      {"door_blocks_entry", cfg.door_blocks_entry},
  };
  nlohmann::json layout;
  layout["agent_start"] = cfg.layout.agent_start;
  layout["key1"] = cfg.layout.key1;
  layout["door1"] = cfg.layout.door1;
  layout["goal"] = cfg.layout.goal;
  if (cfg.case_id == CaseId::MultiGoal) {
    layout["key2"] = cfg.layout.key2;
    layout["door2"] = cfg.layout.door2;
    layout["item1"] = cfg.layout.item1;
    layout["item2"] = cfg.layout.item2;
  }
  j["layout"] = layout;
}

inline void from_json(const nlohmann::json& j, EnvConfig& cfg) {
  std::string cid = j.at("case_id").get<std::string>();
  if (cid == "single")
    cfg.case_id = CaseId::Single;
  else if (cid == "multi_goal")
    cfg.case_id = CaseId::MultiGoal;
  else
    throw ConfigError("unknown case_id: " + cid);
  cfg.width = j.at("width").get<int>();
  cfg.height = j.at("height").get<int>();
  cfg.fail_prob = j.at("fail_prob").get<double>();
  cfg.step_penalty = j.at("step_penalty").get<double>();
  cfg.success_reward = j.at("success_reward").get<double>();
  cfg.max_steps = j.at("max_steps").get<int>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.door_blocks_entry = j.value("door_blocks_entry", false);
  const auto& layout = j.at("layout");
  cfg.layout.agent_start = layout.at("agent_start").get<Cell>();
  cfg.layout.key1 = layout.at("key1").get<Cell>();
  cfg.layout.door1 = layout.at("door1").get<Cell>();
  cfg.layout.goal = layout.at("goal").get<Cell>();
  if (cfg.case_id == CaseId::MultiGoal) {
    cfg.layout.key2 = layout.at("key2").get<Cell>();
    cfg.layout.door2 = layout.at("door2").get<Cell>();
    cfg.layout.item1 = layout.at("item1").get<Cell>();
    cfg.layout.item2 = layout.at("item2").get<Cell>();
  }
  validate_config(cfg);
}

// Textual grid dump for the CLI.
inline std::string render(const EnvConfig& cfg, const EnvState& s) {
  std::vector<std::string> grid(size_t(cfg.height), std::string(size_t(cfg.width), '.'));
  auto put = [&](const Cell& c, char ch) { grid[size_t(c.row)][size_t(c.col)] = ch; };
  const Layout& L = cfg.layout;
  if (cfg.case_id == CaseId::Single) {
    if (!s.flag(kHasKey)) put(L.key1, 'k');
    put(L.door1, s.flag(kDoorOpen) ? 'o' : 'D');
  } else {
    if (!s.flag(kHasK1)) put(L.key1, 'k');
    if (!s.flag(kHasK2)) put(L.key2, 'K');
    put(L.door1, s.flag(kDoor1Open) ? 'o' : 'D');
    put(L.door2, s.flag(kDoor2Open) ? 'O' : 'E');
    if (!s.flag(kItem1)) put(L.item1, 'i');
    if (!s.flag(kItem2)) put(L.item2, 'I');
  }
  put(L.goal, 'G');
  put(s.cell(), 'A');
  std::string out;
  for (auto& row : grid) {
    out += row;
    out += '\n';
  }
  return out;
}

}  // namespace nsdt
