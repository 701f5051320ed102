/**
 * @file common.hpp
 * @brief Shared linear-algebra aliases, angle helpers and error types.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace legodom
{

using Eigen::Matrix3d;
using Eigen::Quaterniond;
using Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SingularConfiguration : public Error
{
public:
    using Error::Error;
};

class EmptyContactSet : public Error
{
public:
    using Error::Error;
};

class Unreachable : public Error
{
public:
    using Error::Error;
};

class CholeskyFailure : public Error
{
public:
    using Error::Error;
};

class InsufficientContacts : public Error
{
public:
    using Error::Error;
};

class DegenerateMean : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

/**
 * Maps an angle to (-pi, pi].
 */
inline double wrapAngle(double angle)
{
    double wrapped = std::remainder(angle, 2.0 * kPi);
    if (wrapped <= -kPi)
    {
        wrapped += 2.0 * kPi;
    }
    return wrapped;
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline Matrix3d rotX(double a)
{
    return Eigen::AngleAxisd(a, Vector3d::UnitX()).toRotationMatrix();
}

inline Matrix3d rotY(double a)
{
    return Eigen::AngleAxisd(a, Vector3d::UnitY()).toRotationMatrix();
}

inline Matrix3d rotZ(double a)
{
    return Eigen::AngleAxisd(a, Vector3d::UnitZ()).toRotationMatrix();
}

/// R_WB = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Matrix3d rpyToRotation(double roll, double pitch, double yaw)
{
    return rotZ(yaw) * rotY(pitch) * rotX(roll);
}

/// Inverse of rpyToRotation (ZYX convention). Pitch is clamped to [-pi/2, pi/2].
inline Vector3d rotationToRpy(const Matrix3d& R)
{
    const double sp = std::clamp(-R(2, 0), -1.0, 1.0);
    return {std::atan2(R(2, 1), R(2, 2)), std::asin(sp), std::atan2(R(1, 0), R(0, 0))};
}

inline bool allFinite(const Vector3d& v) { return v.allFinite(); }

} // namespace legodom
