/**
 * @file leg_kinematics.hpp
 * @brief Closed-form 3-DoF leg kinematics, Jacobian, torque-to-force mapping
 * and the rounded-foot rolling bias.
 *
 * Joint order is (ab/adduction, hip pitch, knee). Vectors are hip-to-end-effector
 * in the body frame (x forward, y left, z up). Point feet absorb their radius in
 * calf_len and use wheel_radius = 0.
 */

#pragma once

#include <legodom/common.hpp>

namespace legodom
{

struct LegGeometry
{
    double hip_offset_len{0.08};
    double thigh_len{0.213};
    double calf_len{0.213};
    double wheel_radius{0.0};
    int side_sign{1};
    Vector3d hip_mount{Vector3d::Zero()};

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    /// Same leg with wheel_radius = 0, i.e. a rigid serial chain.
    LegGeometry rigidChain() const;
};

struct JointReading
{
    Vector3d q{Vector3d::Zero()};
    Vector3d dq{Vector3d::Zero()};
    Vector3d tau{Vector3d::Zero()};
};

inline constexpr double kDefaultSigmaMin = 1e-6;

Vector3d fkPosition(const Vector3d& q, const LegGeometry& geom);

/**
 * Relative end-effector velocity, evaluated row by row from the explicit
 * derivative (not through legJacobian).
 */
Vector3d fkVelocity(const Vector3d& q, const Vector3d& dq, const LegGeometry& geom);

Matrix3d legJacobian(const Vector3d& q, const LegGeometry& geom);

/// Smallest singular value of the leg Jacobian.
double smallestSingularValue(const Matrix3d& J);

/**
 * End-effector force in the body frame from joint torques, f = (J J^T)^-1 J tau.
 * Throws SingularConfiguration when the smallest singular value of J is below
 * sigma_min.
 */
Vector3d footForceBody(const Vector3d& q,
                       const Vector3d& tau,
                       const LegGeometry& geom,
                       double sigma_min = kDefaultSigmaMin);

struct RollingBias
{
    double dx{0.0};
    double dz{0.0};
};

/**
 * Displacement bias of the shank-extension model against no-slip hemispherical
 * rolling, for foot radius @p radius and shank pitch a1 (touchdown) / a2 (lift-off).
 */
RollingBias rollingBias(double radius, double a1, double a2);

} // namespace legodom
