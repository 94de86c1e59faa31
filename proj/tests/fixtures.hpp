#pragma once

#include <vector>

#include "causalpsm/action_log.hpp"

namespace fixture {

inline std::vector<causalpsm::ActionRecord> l1_records() {
  return {{"A", "m1", 1}, {"B", "m1", 2}, {"C", "m1", 3}, {"A", "m2", 4},
          {"C", "m2", 5}, {"B", "m3", 6}, {"D", "m3", 7}};
}

inline causalpsm::ActionLog l1() { return causalpsm::ActionLog::from_records(l1_records()); }

}  // namespace fixture
