/**
 * @file yaw_consistency.hpp
 * @brief Heading from multi-contact geometry and gain-scheduled yaw correction.
 */

#pragma once

#include <legodom/common.hpp>

#include <optional>
#include <span>
#include <vector>

namespace legodom
{

inline constexpr double kDefaultMinBaseline = 0.02;
inline constexpr double kDegenerateMeanTolerance = 1e-12;

/**
 * Yaw implied by every unordered pair (i < j) of stance legs: the bearing of the
 * world baseline minus the bearing of the tilt-compensated body baseline
 * Ry(pitch) Rx(roll) (p_j - p_i), wrapped to (-pi, pi].
 *
 * Pairs whose planar world or body baseline is shorter than @p min_baseline are
 * skipped. Throws InsufficientContacts for fewer than two legs.
 */
std::vector<double> pairwiseYaw(std::span<const Vector3d> anchors,
                                std::span<const Vector3d> feet_body,
                                double roll,
                                double pitch,
                                double min_baseline = kDefaultMinBaseline);

/// atan2(sum sin, sum cos), wrapped to (-pi, pi]. Throws DegenerateMean on cancellation.
double circularMean(std::span<const double> angles);

struct YawCorrection
{
    double yaw{0.0};
    std::optional<double> full_support_since;
    double alpha{0.0};
    double error{0.0};
};

/**
 * Pulls @p yaw toward @p yaw_kin by alpha * wrap(yaw_kin - yaw). Below full
 * support the timer resets and alpha = alpha0; at full support alpha ramps
 * linearly from alpha0 to 1 over @p ramp_time.
 */
YawCorrection applyYawCorrection(double yaw,
                                 double yaw_kin,
                                 std::size_t n_contacts,
                                 std::size_t n_full_support,
                                 double now,
                                 std::optional<double> full_support_since,
                                 double alpha0,
                                 double ramp_time);

} // namespace legodom
