/**
 * @file ikvel_ckf.hpp
 * @brief Per-leg constant-velocity cubature filter over the hip-to-foot vector,
 * observed through analytic inverse kinematics and differential IK.
 *
 * The filter state uses the same body-frame convention as fkPosition. The
 * inverse kinematics runs on the rigid chain, so wheel legs are tracked at the
 * wheel axis.
 */

#pragma once

#include <legodom/cubature.hpp>
#include <legodom/leg_kinematics.hpp>

#include <optional>
#include <span>
#include <vector>

namespace legodom
{

inline constexpr double kIkRadicalEpsilon = 1e-12;
inline constexpr double kIkDomainTolerance = 1e-9;

/**
 * Joint angles reaching the hip-to-foot vector @p r. With @p clamp false,
 * throws Unreachable when an arcsin/arccos argument leaves [-1, 1] by more than
 * kIkDomainTolerance; with @p clamp true the arguments saturate instead.
 */
Vector3d ikAngles(const Vector3d& r, const LegGeometry& geom, bool clamp = false);

/**
 * Jacobian of the inverse-kinematics model. Its first row is expressed for a
 * backward-positive x axis, i.e. it equals diag(-1, 1, 1) * legJacobian of the
 * rigid chain.
 */
Matrix3d ikJacobian(const Vector3d& theta, const LegGeometry& geom);

struct IkMeasurement
{
    Vector6d z{Vector6d::Zero()};  ///< (theta1..3, dtheta1..3)
    bool rates_valid{true};        ///< false when the Jacobian was singular and rates were zeroed
};

IkMeasurement ikMeasurement(const Vector6d& x,
                            const LegGeometry& geom,
                            bool clamp = false,
                            double sigma_min = kDefaultSigmaMin);

struct CkfLegState
{
    Vector6d x{Vector6d::Zero()};
    Matrix6d P{Matrix6d::Identity()};
    double t{0.0};
    bool reset{false};  ///< the step that produced this state had to reset P
};

struct CkfNoise
{
    Matrix6d Q{Matrix6d::Identity()};       ///< process covariance per second
    Matrix6d R_meas{Matrix6d::Identity()};  ///< measurement covariance
};

struct IkVelSettings
{
    bool enabled{false};
    double q_pos{1e-6};
    double q_vel{1e-2};
    double r_angle{2.5e-7};
    double r_rate{1e-2};
    double dt_max{0.1};
    double init_pos_var{1e-4};
    double init_vel_var{1e-1};

    void validate() const;
    CkfNoise noise() const;
    Matrix6d initialCovariance() const;
};

/// Measurement covariance inflation applied to the rate block when rates are not observable.
inline constexpr double kRateInflation = 1e6;

CkfLegState initialLegState(const Vector3d& q, const LegGeometry& geom, double t, const IkVelSettings& settings = {});

/**
 * One predict/update cycle. |dt| > dt_max (or a negative dt) is truncated to 0.
 * The side constraint y <- s|y| is applied to the posterior mean. A Cholesky
 * failure resets P to @p reset_cov (the mean is kept) and the cycle is retried.
 */
CkfLegState ckfStep(const CkfLegState& state,
                    const Vector6d& z,
                    double t_now,
                    const CkfNoise& noise,
                    const LegGeometry& geom,
                    double dt_max,
                    const Matrix6d& reset_cov = IkVelSettings{}.initialCovariance());

/**
 * Filters hip-to-foot velocities for every leg with one filter instance whose
 * state is swapped in and out of a per-leg cache.
 */
class IkVelFilter
{
public:
    IkVelFilter(std::vector<LegGeometry> legs, IkVelSettings settings);

    /// Filtered velocity of one leg; raw FK velocity when the filter is disabled.
    Vector3d filterLeg(std::size_t leg, const JointReading& reading, double stamp);

    std::vector<Vector3d> filter(std::span<const JointReading> legs, double stamp);

    const std::optional<CkfLegState>& cached(std::size_t leg) const { return m_cache.at(leg); }
    const IkVelSettings& settings() const { return m_settings; }

    /// Number of Cholesky recoveries since construction.
    std::size_t recoveries() const { return m_recoveries; }

private:
    std::vector<LegGeometry> m_legs;
    IkVelSettings m_settings;
    CkfNoise m_noise;
    CkfLegState m_active;
    std::vector<std::optional<CkfLegState>> m_cache;
    std::size_t m_recoveries{0};
};

} // namespace legodom
