/**
 * @file estimator.hpp
 * @brief Per-sample contact-anchored odometry loop.
 *
 * Each step consumes one SensorFrame and runs, in order:
 *  1. attitude intake (IMU roll/pitch; yaw from IMU increments or held),
 *  2. per-leg kinematics, force estimation and stance gating,
 *  3. wheel anchor propagation for legs that stay in stance,
 *  4. position observation from already anchored stance legs,
 *  5. touchdown recording with support-plane height correction,
 *  6. fused position/velocity blend over all stance legs (prediction only when none),
 *  7. multi-contact yaw correction.
 */

#pragma once

#include <legodom/contact_anchor.hpp>
#include <legodom/height_correction.hpp>
#include <legodom/ikvel_ckf.hpp>
#include <legodom/leg_kinematics.hpp>
#include <legodom/wheel_contact.hpp>
#include <legodom/yaw_consistency.hpp>

#include <json.hpp>

#include <optional>
#include <vector>

namespace legodom
{

struct BodyState
{
    Vector3d position{Vector3d::Zero()};
    double roll{0.0};
    double pitch{0.0};
    double yaw{0.0};
    Vector3d velocity{Vector3d::Zero()};
    double stamp{0.0};

    Matrix3d rotation() const { return rpyToRotation(roll, pitch, yaw); }
};

struct SensorFrame
{
    double stamp{0.0};
    Quaterniond imu_attitude{Quaterniond::Identity()};
    Vector3d imu_gyro{Vector3d::Zero()};
    std::vector<JointReading> legs;
    /// Empty, or one optional reading per leg.
    std::vector<std::optional<WheelReading>> wheels;
};

struct YawSettings
{
    bool enabled{true};
    bool imu_yaw_enabled{true};
    double alpha0{0.02};
    double ramp_time{3.0};
    double min_baseline{kDefaultMinBaseline};

    void validate() const;
};

struct FusionSettings
{
    double k_p{1.0};
    double k_v{0.8};

    void validate() const;
};

struct EstimatorConfig
{
    std::vector<LegGeometry> legs;
    double f_th{-20.0};
    double sigma_min{kDefaultSigmaMin};
    bool height_enabled{true};
    HeightParams height;
    YawSettings yaw;
    IkVelSettings ikvel;
    FusionSettings fusion;
    double heading_eps{kHeadingEpsilon};
    Vector3d initial_position{Vector3d::Zero()};

    /// Throws ConfigError when any documented range is violated.
    void validate() const;

    /// Four-leg point-foot layout used throughout the tests and presets.
    static EstimatorConfig quadruped();
};

/// Position advanced by velocity*dt, velocity held, attitude advanced by the gyro.
BodyState predictOnly(const BodyState& state, double dt, const Vector3d& imu_gyro);

class Estimator
{
public:
    explicit Estimator(EstimatorConfig config);

    /**
     * Processes one frame. Throws std::invalid_argument when the stamp does not
     * increase or the leg count differs from the configuration.
     */
    const BodyState& step(const SensorFrame& frame);

    const BodyState& state() const { return m_state; }
    bool initialized() const { return m_initialized; }
    const EstimatorConfig& config() const { return m_config; }
    const std::vector<FootfallRecord>& footfalls() const { return m_footfalls; }
    const std::vector<SupportPlane>& planes() const { return m_planes.planes(); }
    const ContactSet& contacts() const { return m_contacts; }

    /// Diagnostics record of the last step (contacts, anchors, planes, yaw terms).
    nlohmann::json diagnostics() const;

private:
    struct LegCache
    {
        bool contact{false};
        Vector3d q{Vector3d::Zero()};
        double pitch{0.0};
        std::optional<WheelReading> wheel;
    };

    struct YawDiagnostics
    {
        std::optional<double> yaw_kin;
        double alpha{0.0};
        double error{0.0};
        std::size_t pairs{0};
    };

    void correctYaw(const std::vector<Vector3d>& feet_body, double now);

    EstimatorConfig m_config;
    BodyState m_state;
    bool m_initialized{false};
    double m_prev_imu_yaw{0.0};
    std::vector<FootfallRecord> m_footfalls;
    std::vector<LegCache> m_cache;
    ContactSet m_contacts;
    SupportPlaneMap m_planes;
    IkVelFilter m_ikvel;
    std::optional<double> m_full_support_since;
    YawDiagnostics m_yaw_diag;
    std::vector<double> m_force_z;
};

} // namespace legodom
