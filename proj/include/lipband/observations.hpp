#pragma once
// Per-variant observation payloads.  Each policy's step function accepts
// exactly one of these, so feeding a policy information its variant does
// not grant is a type error rather than a runtime surprise.
//
//   A: everyone sees the same reward draw
//   B: everyone sees the realized joint action plus a private reward
//   C: a private reward only

#include <vector>

namespace lipband {

struct SharedRewardObs {
    double reward = 0.0;
};

struct JointActionObs {
    std::vector<double> joint;  // the full joint action actually played
    double own_reward = 0.0;
};

struct PrivateRewardObs {
    double own_reward = 0.0;
};

} // namespace lipband
