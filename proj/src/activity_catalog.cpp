#include "wristnet/activity_catalog.hpp"

#include <array>

#include "wristnet/network.hpp"

namespace wristnet {

namespace {

constexpr ClassFlags kSed{true, false, false};
constexpr ClassFlags kLoc{false, true, false};
constexpr ClassFlags kLife{false, false, true};
constexpr ClassFlags kNone{false, false, false};

constexpr std::array<ActivityInfo, 33> kCatalog{{
    {"LEISURE WALK", kLoc},
    {"RAPID WALK", kLoc},
    {"LIGHT GARDENING", kLife},
    {"YARD WORK", kLife},
    {"PREPARE SERVE MEAL", kLife},
    {"DIGGING", kLife},
    {"STRAIGHTENING UP DUSTING", kLife},
    {"WASHING DISHES", kLife},
    {"UNLOADING STORING DISHES", kLife},
    {"WALKING AT RPE 1", kLoc},
    {"PERSONAL CARE", kLife},
    {"DRESSING", kLife},
    {"WALKING AT RPE 5", kLoc},
    {"SWEEPING", kLife},
    {"VACUUMING", kLife},
    {"STAIR DESCENT", kLoc},
    {"STAIR ASCENT", kLoc},
    {"TRASH REMOVAL", kLife},
    {"REPLACING SHEETS ON A BED", kLife},
    {"STRETCHING YOGA", kNone},
    {"MOPPING", kLife},
    {"LIGHT HOME MAINTENANCE", kLife},
    {"COMPUTER WORK", kSed},
    {"HEAVY LIFTING", kLife},
    {"SHOPPING", kLife},
    {"IRONING", kLife},
    {"LAUNDRY WASHING", kLife},
    {"STRENGTH EXERCISE LEG CURL", kNone},
    {"STRENGTH EXERCISE CHEST PRESS", kNone},
    {"STRENGTH EXERCISE LEG EXTENSION", kNone},
    {"TV WATCHING", kSed},
    {"STANDING STILL", kSed},
    {"WASHING WINDOWS", kLife},
}};

}  // namespace

bool ClassFlags::for_task(Task task) const {
  switch (task) {
    case Task::Sedentary: return sedentary;
    case Task::Locomotion: return locomotion;
    case Task::Lifestyle: return lifestyle;
    case Task::MetRegression: return false;
  }
  return false;
}

std::span<const ActivityInfo> activity_catalog() { return kCatalog; }

const ActivityInfo* find_activity(std::string_view name) {
  // Accept the starred spelling used in printed activity tables.
  if (!name.empty() && name.back() == '*') name.remove_suffix(1);
  for (const auto& a : kCatalog) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

}  // namespace wristnet
