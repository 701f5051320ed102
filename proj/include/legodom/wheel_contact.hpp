/**
 * @file wheel_contact.hpp
 * @brief Effective rolling angle and planar propagation of wheel contact anchors.
 */

#pragma once

#include <legodom/common.hpp>

#include <optional>

namespace legodom
{

struct WheelReading
{
    double psi{0.0};   ///< encoder angle, interpreted modulo 2*pi
    double dpsi{0.0};
};

inline constexpr double kHeadingEpsilon = 1e-9;

/**
 * Encoder increment with the shank-pitch-induced part removed:
 * wrap(psi_k - psi_km1) - (beta_k - beta_km1), beta = pitch + q2 + q3.
 */
double effectiveRollIncrement(double psi_k,
                              double psi_km1,
                              double pitch_k,
                              double pitch_km1,
                              double q2_k,
                              double q3_k,
                              double q2_km1,
                              double q3_km1);

/// Normalized horizontal projection of the body x-axis; nullopt when near vertical.
std::optional<Vector3d> headingDirection(const Matrix3d& body_rot, double eps = kHeadingEpsilon);

/// anchor + r_w * dpsi_eff * heading. A missing heading leaves the anchor unchanged.
Vector3d propagateContact(const Vector3d& anchor,
                          double dpsi_eff,
                          double wheel_radius,
                          const std::optional<Vector3d>& heading);

/// r_w * (dpsi - dq2 - dq3) * heading; body pitch rate is deliberately excluded.
Vector3d rollingVelocity(double dpsi,
                         double dq2,
                         double dq3,
                         double wheel_radius,
                         const std::optional<Vector3d>& heading);

} // namespace legodom
