#include <legodom/estimator.hpp>
#include <legodom/yaw_consistency.hpp>

#include <Eigen/Geometry>

#include <array>
#include <cmath>

namespace legodom
{

void YawSettings::validate() const
{
    if (!(alpha0 > 0.0 && alpha0 <= 1.0))
    {
        throw ConfigError("yaw.alpha0 must lie in (0, 1]");
    }
    if (!(ramp_time > 0.0))
    {
        throw ConfigError("yaw.ramp_time must be positive");
    }
    if (!(min_baseline >= 0.0))
    {
        throw ConfigError("yaw.min_baseline must be non-negative");
    }
}

void FusionSettings::validate() const
{
    if (!(k_p >= 0.0 && k_p <= 1.0) || !(k_v >= 0.0 && k_v <= 1.0))
    {
        throw ConfigError("fusion gains must lie in [0, 1]");
    }
}

void EstimatorConfig::validate() const
{
    if (legs.empty())
    {
        throw ConfigError("at least one leg must be configured");
    }
    for (const LegGeometry& leg : legs)
    {
        leg.validate();
    }
    if (!std::isfinite(f_th))
    {
        throw ConfigError("contact.f_th must be finite");
    }
    if (!(sigma_min > 0.0))
    {
        throw ConfigError("kinematics.sigma_min must be positive");
    }
    if (!(heading_eps > 0.0))
    {
        throw ConfigError("wheel.heading_eps must be positive");
    }
    if (!initial_position.allFinite())
    {
        throw ConfigError("initial position must be finite");
    }
    height.validate();
    yaw.validate();
    ikvel.validate();
    fusion.validate();
}

EstimatorConfig EstimatorConfig::quadruped()
{
    EstimatorConfig config;
    // Order: front-left, front-right, rear-left, rear-right.
    const double hx = 0.1934;
    const double hy = 0.0465;
    const std::array<Vector3d, 4> mounts{Vector3d(hx, hy, 0.0), Vector3d(hx, -hy, 0.0),
                                         Vector3d(-hx, hy, 0.0), Vector3d(-hx, -hy, 0.0)};
    const std::array<int, 4> sides{1, -1, 1, -1};
    for (std::size_t i = 0; i < 4; ++i)
    {
        LegGeometry leg;
        leg.hip_offset_len = 0.08;
        leg.thigh_len = 0.213;
        leg.calf_len = 0.213;
        leg.wheel_radius = 0.0;
        leg.side_sign = sides[i];
        leg.hip_mount = mounts[i];
        config.legs.push_back(leg);
    }
    return config;
}

BodyState predictOnly(const BodyState& state, double dt, const Vector3d& imu_gyro)
{
    if (!(dt > 0.0))
    {
        throw std::invalid_argument("predictOnly: dt must be positive");
    }
    BodyState out = state;
    out.position += state.velocity * dt;

    const double angle = imu_gyro.norm() * dt;
    if (angle > 0.0)
    {
        const Matrix3d R = state.rotation() * Eigen::AngleAxisd(angle, imu_gyro.normalized()).toRotationMatrix();
        const Vector3d rpy = rotationToRpy(R);
        out.roll = rpy[0];
        out.pitch = rpy[1];
        out.yaw = rpy[2];
    }
    out.stamp = state.stamp + dt;
    return out;
}

Estimator::Estimator(EstimatorConfig config)
    : m_config((config.validate(), std::move(config)))
    , m_planes(m_config.height)
    , m_ikvel(m_config.legs, m_config.ikvel)
{
    const std::size_t n = m_config.legs.size();
    m_footfalls.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        m_footfalls[i].leg_id = i;
    }
    m_cache.resize(n);
    m_force_z.assign(n, 0.0);
}

const BodyState& Estimator::step(const SensorFrame& frame)
{
    const std::size_t n_legs = m_config.legs.size();
    if (frame.legs.size() != n_legs)
    {
        throw std::invalid_argument("frame leg count does not match the configuration");
    }
    if (!frame.wheels.empty() && frame.wheels.size() != n_legs)
    {
        throw std::invalid_argument("frame wheel list must be empty or one entry per leg");
    }
    if (m_initialized && !(frame.stamp > m_state.stamp))
    {
        throw std::invalid_argument("frame stamps must be strictly increasing");
    }

    // (1) Attitude intake.
    const Vector3d imu_rpy = rotationToRpy(frame.imu_attitude.normalized().toRotationMatrix());
    BodyState prior;
    if (!m_initialized)
    {
        prior.position = m_config.initial_position;
        prior.velocity.setZero();
        prior.yaw = imu_rpy[2];
    }
    else
    {
        prior = predictOnly(m_state, frame.stamp - m_state.stamp, frame.imu_gyro);
        prior.yaw = m_config.yaw.imu_yaw_enabled ? wrapAngle(m_state.yaw + wrapAngle(imu_rpy[2] - m_prev_imu_yaw))
                                                 : m_state.yaw;
    }
    prior.roll = imu_rpy[0];
    prior.pitch = imu_rpy[1];
    prior.stamp = frame.stamp;
    const Matrix3d R = prior.rotation();
    const std::optional<Vector3d> heading = headingDirection(R, m_config.heading_eps);

    // (2) Kinematics, force estimation and gating.
    std::vector<Vector3d> feet_body(n_legs);
    std::vector<Vector3d> feet_vel(n_legs);
    std::vector<bool> contact(n_legs, false);
    for (std::size_t i = 0; i < n_legs; ++i)
    {
        const LegGeometry& geom = m_config.legs[i];
        const JointReading& reading = frame.legs[i];
        feet_body[i] = geom.hip_mount + fkPosition(reading.q, geom);
        feet_vel[i] = m_ikvel.filterLeg(i, reading, frame.stamp);
        try
        {
            const Vector3d f_world = R * footForceBody(reading.q, reading.tau, geom, m_config.sigma_min);
            m_force_z[i] = f_world.z();
            contact[i] = gateContact(f_world.z(), m_config.f_th);
        }
        catch (const SingularConfiguration&)
        {
            // Not gateable this cycle: keep the previous decision.
            contact[i] = m_cache[i].contact;
        }
    }

    const auto wheelOf = [&](std::size_t i) -> std::optional<WheelReading> {
        if (frame.wheels.empty() || !(m_config.legs[i].wheel_radius > 0.0))
        {
            return std::nullopt;
        }
        return frame.wheels[i];
    };

    // (3) Wheel propagation and (4) observations from persisting stance legs.
    std::vector<Vector3d> roll_vel(n_legs, Vector3d::Zero());
    std::vector<Vector3d> persisting_pos;
    for (std::size_t i = 0; i < n_legs; ++i)
    {
        if (!contact[i])
        {
            continue;
        }
        const JointReading& reading = frame.legs[i];
        const std::optional<WheelReading> wheel = wheelOf(i);
        if (wheel)
        {
            roll_vel[i] = rollingVelocity(wheel->dpsi, reading.dq[1], reading.dq[2],
                                          m_config.legs[i].wheel_radius, heading);
        }
        if (!m_cache[i].contact)
        {
            continue;
        }
        if (wheel && m_cache[i].wheel)
        {
            const LegCache& prev = m_cache[i];
            const double dpsi_eff = effectiveRollIncrement(wheel->psi, prev.wheel->psi, prior.pitch, prev.pitch,
                                                           reading.q[1], reading.q[2], prev.q[1], prev.q[2]);
            m_footfalls[i].anchor = propagateContact(m_footfalls[i].anchor, dpsi_eff,
                                                     m_config.legs[i].wheel_radius, heading);
        }
        persisting_pos.push_back(anchoredPositionObs(m_footfalls[i].anchor, R, feet_body[i]));
    }

    Vector3d anchor_origin = prior.position;
    if (!persisting_pos.empty())
    {
        Vector3d mean = Vector3d::Zero();
        for (const Vector3d& p : persisting_pos)
        {
            mean += p;
        }
        mean /= static_cast<double>(persisting_pos.size());
        anchor_origin = (1.0 - m_config.fusion.k_p) * prior.position + m_config.fusion.k_p * mean;
    }

    // (5) Touchdowns and lift-offs.
    for (std::size_t i = 0; i < n_legs; ++i)
    {
        FootfallRecord& rec = m_footfalls[i];
        if (detectTouchdown(m_cache[i].contact, contact[i]))
        {
            Vector3d anchor = recordFootfall(anchor_origin, R, feet_body[i]);
            if (m_config.height_enabled)
            {
                anchor.z() = m_planes.correct(anchor.z(), frame.stamp);
            }
            rec.anchor = anchor;
            rec.touchdown_time = frame.stamp;
        }
        rec.in_contact = contact[i];
    }

    // (6) Fusion over the full contact set.
    m_contacts.members.clear();
    std::vector<Vector3d> pos_obs;
    std::vector<Vector3d> vel_obs;
    for (std::size_t i = 0; i < n_legs; ++i)
    {
        if (!contact[i])
        {
            continue;
        }
        m_contacts.members.push_back(i);
        pos_obs.push_back(anchoredPositionObs(m_footfalls[i].anchor, R, feet_body[i]));
        vel_obs.push_back(anchoredVelocityObs(R, frame.imu_gyro, feet_body[i], feet_vel[i]) + roll_vel[i]);
    }

    m_state = prior;
    if (!m_contacts.empty())
    {
        const FusedObservation fused = fuseObservations(pos_obs, vel_obs);
        const double kp = m_config.fusion.k_p;
        const double kv = m_config.fusion.k_v;
        m_state.position = (1.0 - kp) * prior.position + kp * fused.position;
        m_state.velocity = (1.0 - kv) * prior.velocity + kv * fused.velocity;
    }

    // (7) Yaw correction.
    correctYaw(feet_body, frame.stamp);

    for (std::size_t i = 0; i < n_legs; ++i)
    {
        m_cache[i].contact = contact[i];
        m_cache[i].q = frame.legs[i].q;
        m_cache[i].pitch = prior.pitch;
        m_cache[i].wheel = wheelOf(i);
    }
    m_prev_imu_yaw = imu_rpy[2];
    m_initialized = true;
    return m_state;
}

void Estimator::correctYaw(const std::vector<Vector3d>& feet_body, double now)
{
    m_yaw_diag = {};
    if (!m_config.yaw.enabled)
    {
        return;
    }
    const std::size_t n_contacts = m_contacts.size();
    if (n_contacts < 2)
    {
        m_full_support_since.reset();
        return;
    }

    std::vector<Vector3d> anchors;
    std::vector<Vector3d> feet;
    for (std::size_t i : m_contacts.members)
    {
        anchors.push_back(m_footfalls[i].anchor);
        feet.push_back(feet_body[i]);
    }

    const std::vector<double> yaws =
        pairwiseYaw(anchors, feet, m_state.roll, m_state.pitch, m_config.yaw.min_baseline);
    m_yaw_diag.pairs = yaws.size();
    if (yaws.empty())
    {
        return;
    }

    double yaw_kin = 0.0;
    try
    {
        yaw_kin = circularMean(yaws);
    }
    catch (const DegenerateMean&)
    {
        return;
    }

    const YawCorrection corr = applyYawCorrection(m_state.yaw, yaw_kin, n_contacts, m_config.legs.size(), now,
                                                  m_full_support_since, m_config.yaw.alpha0, m_config.yaw.ramp_time);
    m_state.yaw = corr.yaw;
    m_full_support_since = corr.full_support_since;
    m_yaw_diag.yaw_kin = yaw_kin;
    m_yaw_diag.alpha = corr.alpha;
    m_yaw_diag.error = corr.error;
}

nlohmann::json Estimator::diagnostics() const
{
    using nlohmann::json;
    json anchors = json::array();
    for (const FootfallRecord& rec : m_footfalls)
    {
        anchors.push_back({{"leg", rec.leg_id},
                           {"anchor", {rec.anchor.x(), rec.anchor.y(), rec.anchor.z()}},
                           {"in_contact", rec.in_contact},
                           {"touchdown_time", rec.touchdown_time}});
    }
    json planes = json::array();
    for (const SupportPlane& p : m_planes.planes())
    {
        planes.push_back({{"height", p.height}, {"weight", p.weight}, {"last_update", p.last_update}});
    }
    json yaw = {{"alpha", m_yaw_diag.alpha}, {"error", m_yaw_diag.error}, {"pairs", m_yaw_diag.pairs}};
    yaw["yaw_kin"] = m_yaw_diag.yaw_kin ? json(*m_yaw_diag.yaw_kin) : json(nullptr);

    return {{"t", m_state.stamp},
            {"contacts", m_contacts.members},
            {"force_z", m_force_z},
            {"anchors", anchors},
            {"planes", planes},
            {"yaw", yaw}};
}

} // namespace legodom
