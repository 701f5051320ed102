/**
 * @file gait_sim.hpp
 * @brief Synthetic ground-truth streams for closed-loop evaluation.
 *
 * A plan prescribes a body path (min-jerk or constant-rate segments), a
 * periodic footstep schedule and optional terrain steps. Joint streams come
 * from analytic IK, torques from an equal load split over stance legs, IMU
 * channels from the true attitude. Stance feet never move in the world frame.
 *
 * Plan files use the config syntax (`key = value`, `#` comments). Segment keys
 * may repeat and run in file order:
 *
 *     walk = x y        face the target, then move to it
 *     back = x y        move to the target facing away from it
 *     turn = deg        turn in place, counter-clockwise positive
 *     stand = seconds   hold the pose
 *     step = x0 x1 h    terrain block of height h over x in [x0, x1)
 */

#pragma once

#include <legodom/estimator.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace legodom
{

class InfeasiblePlan : public Error
{
public:
    InfeasiblePlan(double stamp, const std::string& what)
        : Error("infeasible plan at t=" + std::to_string(stamp) + ": " + what)
        , m_stamp(stamp)
    {
    }

    double stamp() const { return m_stamp; }

private:
    double m_stamp;
};

struct Imperfections
{
    double encoder_quantum{0.0};
    double spike_prob{0.0};
    double spike_gain{1.0};
    double yaw_drift{0.0};
    double wheel_slip{0.0};

    /// Throws ConfigError on negative or non-finite parameters.
    void validate() const;
};

enum class GaitType
{
    Trot,
    Walk,
    Stand
};

enum class SpeedProfile
{
    MinJerk,
    Constant
};

struct PlanSegment
{
    enum class Kind
    {
        Walk,
        Back,
        Turn,
        Stand
    };

    Kind kind{Kind::Stand};
    double x{0.0};
    double y{0.0};
    /// Turn angle (rad) or stand duration (s).
    double value{0.0};
};

struct TerrainStep
{
    double x_min{0.0};
    double x_max{0.0};
    double height{0.0};
};

struct GaitPlan
{
    std::string name{"custom"};
    std::vector<LegGeometry> legs{EstimatorConfig::quadruped().legs};
    double rate_hz{500.0};
    double mass{15.0};
    double gravity{9.81};
    GaitType gait{GaitType::Trot};
    double period{0.5};
    double duty{0.6};
    double swing_height{0.08};
    double body_height{0.30};
    double speed{0.5};
    double turn_rate{0.8};
    SpeedProfile profile{SpeedProfile::MinJerk};
    double settle{1.0};
    /// Roll/pitch oscillation amplitude (rad) and frequency (Hz).
    double tilt_amplitude{0.0};
    double tilt_frequency{0.5};
    double start_x{0.0};
    double start_y{0.0};
    double start_yaw{0.0};
    /// Horizontal width over which the body height follows a terrain edge.
    double terrain_blend{0.8};
    /// Half-width of the uniform vertical offset injected at each touchdown sample.
    double touchdown_noise{0.0};
    /// Wheel radius for a wheeled plan; legs stay fixed and the body rolls.
    double wheel_radius{0.0};
    /// Smallest Jacobian singular value accepted along the plan.
    double min_sigma{1e-3};
    std::vector<PlanSegment> segments;
    std::vector<TerrainStep> terrain;
    Imperfections imperfections;

    void validate() const;
};

struct GaitRun
{
    std::vector<SensorFrame> frames;
    std::vector<BodyState> truth;
    /// World position of each leg's end effector per frame.
    std::vector<std::vector<Vector3d>> feet_world;
    std::vector<std::vector<bool>> stance;
};

GaitPlan parsePlan(std::string_view text);
GaitPlan loadPlan(const std::filesystem::path& path);

std::vector<std::string> presetNames();
/// Plan text of a built-in preset; throws ConfigError for unknown names.
std::string presetPlanText(std::string_view name);
GaitPlan presetPlan(std::string_view name);

/**
 * Clean streams; throws InfeasiblePlan with the first violating stamp.
 * @p seed drives the touchdown height noise only.
 */
GaitRun generateGait(const GaitPlan& plan, std::uint64_t seed = 0);

/// Applies sensor imperfections. All-zero parameters return the input unchanged.
std::vector<SensorFrame> degrade(std::vector<SensorFrame> frames, const Imperfections& imperfections,
                                 std::uint64_t seed);

/// Estimator configuration matching the plan's robot, started at the true initial position.
EstimatorConfig estimatorConfigFor(const GaitPlan& plan, const GaitRun& run);

/// Ground terrain height under x.
double terrainHeight(const std::vector<TerrainStep>& terrain, double x);

} // namespace legodom
