#pragma once

#include <span>
#include <string_view>

namespace wristnet {

enum class Task;

// Activity-type flags of one activity. Regular activities have exactly one
// flag set; the four starred activities (stretching/yoga and the strength
// exercises) have none and are used for energy expenditure only.
struct ClassFlags {
  bool sedentary = false;
  bool locomotion = false;
  bool lifestyle = false;

  int count() const { return int{sedentary} + int{locomotion} + int{lifestyle}; }
  bool for_task(Task task) const;
  friend bool operator==(const ClassFlags&, const ClassFlags&) = default;
};

struct ActivityInfo {
  std::string_view name;
  ClassFlags flags;

  // Excluded from activity-type recognition.
  bool energy_only() const { return flags.count() == 0; }
};

// The 33 laboratory activities: 29 typed activities plus 4 energy-only ones.
std::span<const ActivityInfo> activity_catalog();

// Null when `name` is not in the catalog.
const ActivityInfo* find_activity(std::string_view name);

}  // namespace wristnet
