#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace canonimanip {

enum class Action { Grasp, Place, Push, Pull, Rotate, Pour };

inline std::string_view action_name(Action a) {
  switch (a) {
    case Action::Grasp: return "grasp";
    case Action::Place: return "place";
    case Action::Push: return "push";
    case Action::Pull: return "pull";
    case Action::Rotate: return "rotate";
    case Action::Pour: return "pour";
  }
  return "unknown";
}

inline std::optional<Action> parse_action(std::string_view s) {
  for (Action a : {Action::Grasp, Action::Place, Action::Push, Action::Pull, Action::Rotate, Action::Pour}) {
    if (action_name(a) == s) return a;
  }
  return std::nullopt;
}

}  // namespace canonimanip
