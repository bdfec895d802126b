#pragma once

#include <span>
#include <variant>
#include <vector>

#include "smdp/model.hpp"

namespace smdp {

/// Action a for n <= t, b for n > t (t = 0: always b; t = B-1: always a).
struct SingleThreshold {
  int t = 0;
  bool operator==(const SingleThreshold&) const = default;
};

/// Occupancies n after which the action changes, for non-threshold slices.
struct SwitchList {
  std::vector<int> indices;
  bool operator==(const SwitchList&) const = default;
};

using ThresholdDescriptor = std::variant<SingleThreshold, SwitchList>;

struct Policy {
  std::vector<Action> action_of;            // by state index; idle at n = 0
  std::vector<ThresholdDescriptor> slices;  // by h * K + k
};

/// Actions of one (h, k) slice for n = 1..B-1.
std::vector<Action> slice_actions(const Policy& policy, const ValidatedModel& model, int h, int k);

/// Builds a policy from per-state actions and fills in the descriptors.
Policy make_policy(const ValidatedModel& model, std::vector<Action> actions);

}  // namespace smdp
