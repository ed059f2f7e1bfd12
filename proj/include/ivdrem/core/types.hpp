#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace ivdrem {

// Upper bounds for the fixed-capacity Eigen storage used in the stepping loops.
// Sizes stay runtime values; only the buffers are bounded so nothing allocates
// per step.
inline constexpr int kMaxModelOrder = 16;
inline constexpr int kMaxPlantOrder = 6;
inline constexpr int kMaxRegressorDim = 2 * kMaxPlantOrder;
inline constexpr int kMaxLoopStates = 96;

using ModelMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxModelOrder, kMaxModelOrder>;
using ModelVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxModelOrder, 1>;

using RegVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxRegressorDim, 1>;
using RegMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRegressorDim, kMaxRegressorDim>;

using LoopState = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxLoopStates, 1>;

using StepIndex = std::int64_t;
inline constexpr StepIndex kNoStep = -1;

}  // namespace ivdrem
