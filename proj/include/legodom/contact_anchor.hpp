/**
 * @file contact_anchor.hpp
 * @brief Stance gating, touchdown detection and contact-anchored body observations.
 *
 * Supporting contacts produce a negative vertical force in the world frame.
 */

#pragma once

#include <legodom/common.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace legodom
{

struct FootfallRecord
{
    std::size_t leg_id{0};
    Vector3d anchor{Vector3d::Zero()};
    bool in_contact{false};
    double touchdown_time{0.0};
};

/// Sorted set of leg indices currently in stance.
struct ContactSet
{
    std::vector<std::size_t> members;

    bool contains(std::size_t leg) const;
    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
};

/// True iff the world vertical force is at or below the threshold.
bool gateContact(double f_world_z, double f_th);

bool detectTouchdown(bool prev_contact, bool curr_contact);

/// World-frame foot position at touchdown: p + R * foot_body.
Vector3d recordFootfall(const Vector3d& body_pos, const Matrix3d& body_rot, const Vector3d& foot_body);

/// Trunk position implied by a stationary anchor: anchor - R * foot_body.
Vector3d anchoredPositionObs(const Vector3d& anchor, const Matrix3d& body_rot, const Vector3d& foot_body);

/// Trunk velocity implied by a stationary anchor: -R (omega x p + dp).
Vector3d anchoredVelocityObs(const Matrix3d& body_rot,
                             const Vector3d& omega_body,
                             const Vector3d& foot_body,
                             const Vector3d& foot_vel_body);

struct FusedObservation
{
    Vector3d position{Vector3d::Zero()};
    Vector3d velocity{Vector3d::Zero()};
};

/**
 * Unweighted mean of the per-leg observations. Throws EmptyContactSet on empty
 * input and std::invalid_argument when the lists differ in length.
 */
FusedObservation fuseObservations(std::span<const Vector3d> per_leg_pos,
                                  std::span<const Vector3d> per_leg_vel);

} // namespace legodom
