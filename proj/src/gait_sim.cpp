#include <legodom/gait_sim.hpp>
#include <legodom/ikvel_ckf.hpp>

#include "text_util.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace legodom
{

namespace
{

// ---------------------------------------------------------------------------
// Built-in plans

const std::map<std::string, std::string, std::less<>>& presets()
{
    static const std::map<std::string, std::string, std::less<>> table{
        {"flat_loop",
         "# Trot around a 6 m x 4 m rectangle and return to the start heading.\n"
         "name = flat_loop\n"
         "gait = trot\n"
         "speed = 0.5\n"
         "walk = 6 0\n"
         "walk = 6 4\n"
         "walk = 0 4\n"
         "walk = 0 0\n"
         "turn = 90\n"},
        {"stair_loop",
         "# Five up/down cycles over a 0.1 m platform, noisy touchdown heights.\n"
         "name = stair_loop\n"
         "gait = trot\n"
         "speed = 0.4\n"
         "step = 0.7 3.0 0.1\n"
         "touchdown_noise = 0.02\n"
         "walk = 1.5 0\nback = 0 0\n"
         "walk = 1.5 0\nback = 0 0\n"
         "walk = 1.5 0\nback = 0 0\n"
         "walk = 1.5 0\nback = 0 0\n"
         "walk = 1.5 0\nback = 0 0\n"},
        {"standing_drift",
         "# Four-leg stance with a drifting IMU yaw channel.\n"
         "name = standing_drift\n"
         "gait = stand\n"
         "settle = 0\n"
         "stand = 12\n"
         "yaw_drift_deg = 0.5\n"},
        {"wheel_roll",
         "# Fixed legs rolling straight ahead at 0.5 m/s for 10 s.\n"
         "name = wheel_roll\n"
         "gait = stand\n"
         "wheel_radius = 0.05\n"
         "profile = constant\n"
         "speed = 0.5\n"
         "walk = 5 0\n"},
        {"quantized_walk",
         "# Out-and-back trot with 1e-3 rad encoder quantization.\n"
         "name = quantized_walk\n"
         "gait = trot\n"
         "speed = 0.4\n"
         "walk = 3 0\n"
         "turn = 180\n"
         "walk = 0 0\n"
         "quantum = 1e-3\n"},
    };
    return table;
}

// ---------------------------------------------------------------------------
// Plan parsing

double planNumber(std::string_view key, std::string_view value)
{
    const std::optional<double> v = detail::toDouble(value);
    if (!v || !std::isfinite(*v))
    {
        throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(value) + "'");
    }
    return *v;
}

std::vector<double> planNumbers(std::string_view key, std::string_view value, std::size_t count)
{
    const std::vector<std::string_view> parts = detail::splitWhitespace(value);
    if (parts.size() != count)
    {
        throw ConfigError("expected " + std::to_string(count) + " numbers for " + std::string(key));
    }
    std::vector<double> out;
    for (std::string_view p : parts)
    {
        out.push_back(planNumber(key, p));
    }
    return out;
}

void applyPlanValue(GaitPlan& plan, std::string_view key, std::string_view value)
{
    using Kind = PlanSegment::Kind;
    if (key == "name")
    {
        plan.name = std::string(value);
    }
    else if (key == "gait")
    {
        if (value == "trot")
        {
            plan.gait = GaitType::Trot;
        }
        else if (value == "walk")
        {
            plan.gait = GaitType::Walk;
        }
        else if (value == "stand")
        {
            plan.gait = GaitType::Stand;
        }
        else
        {
            throw ConfigError("unknown gait '" + std::string(value) + "'");
        }
    }
    else if (key == "profile")
    {
        if (value == "smooth")
        {
            plan.profile = SpeedProfile::MinJerk;
        }
        else if (value == "constant")
        {
            plan.profile = SpeedProfile::Constant;
        }
        else
        {
            throw ConfigError("unknown profile '" + std::string(value) + "'");
        }
    }
    else if (key == "rate")
    {
        plan.rate_hz = planNumber(key, value);
    }
    else if (key == "mass")
    {
        plan.mass = planNumber(key, value);
    }
    else if (key == "period")
    {
        plan.period = planNumber(key, value);
    }
    else if (key == "duty")
    {
        plan.duty = planNumber(key, value);
    }
    else if (key == "swing_height")
    {
        plan.swing_height = planNumber(key, value);
    }
    else if (key == "body_height")
    {
        plan.body_height = planNumber(key, value);
    }
    else if (key == "speed")
    {
        plan.speed = planNumber(key, value);
    }
    else if (key == "turn_rate")
    {
        plan.turn_rate = planNumber(key, value);
    }
    else if (key == "settle")
    {
        plan.settle = planNumber(key, value);
    }
    else if (key == "tilt")
    {
        const std::vector<double> v = planNumbers(key, value, 2);
        plan.tilt_amplitude = deg2rad(v[0]);
        plan.tilt_frequency = v[1];
    }
    else if (key == "start")
    {
        const std::vector<double> v = planNumbers(key, value, 3);
        plan.start_x = v[0];
        plan.start_y = v[1];
        plan.start_yaw = deg2rad(v[2]);
    }
    else if (key == "terrain_blend")
    {
        plan.terrain_blend = planNumber(key, value);
    }
    else if (key == "touchdown_noise")
    {
        plan.touchdown_noise = planNumber(key, value);
    }
    else if (key == "wheel_radius")
    {
        plan.wheel_radius = planNumber(key, value);
    }
    else if (key == "min_sigma")
    {
        plan.min_sigma = planNumber(key, value);
    }
    else if (key == "quantum")
    {
        plan.imperfections.encoder_quantum = planNumber(key, value);
    }
    else if (key == "spike")
    {
        const std::vector<double> v = planNumbers(key, value, 2);
        plan.imperfections.spike_prob = v[0];
        plan.imperfections.spike_gain = v[1];
    }
    else if (key == "yaw_drift")
    {
        plan.imperfections.yaw_drift = planNumber(key, value);
    }
    else if (key == "yaw_drift_deg")
    {
        plan.imperfections.yaw_drift = deg2rad(planNumber(key, value));
    }
    else if (key == "slip")
    {
        plan.imperfections.wheel_slip = planNumber(key, value);
    }
    else if (key == "step")
    {
        const std::vector<double> v = planNumbers(key, value, 3);
        plan.terrain.push_back({v[0], v[1], v[2]});
    }
    else if (key == "walk" || key == "back")
    {
        const std::vector<double> v = planNumbers(key, value, 2);
        plan.segments.push_back({key == "walk" ? Kind::Walk : Kind::Back, v[0], v[1], 0.0});
    }
    else if (key == "turn")
    {
        plan.segments.push_back({Kind::Turn, 0.0, 0.0, deg2rad(planNumber(key, value))});
    }
    else if (key == "stand")
    {
        plan.segments.push_back({Kind::Stand, 0.0, 0.0, planNumber(key, value)});
    }
    else
    {
        throw ConfigError("unknown plan key: " + std::string(key));
    }
}

// ---------------------------------------------------------------------------
// Body path

double minJerk(double u)
{
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double minJerkRate(double u)
{
    if (u <= 0.0 || u >= 1.0)
    {
        return 0.0;
    }
    const double a = u * (1.0 - u);
    return 30.0 * a * a;
}

/// Clearance bump with zero value and slope at both ends, peak 1 at u = 0.5.
double bump(double u)
{
    const double a = u * (1.0 - u);
    return 64.0 * a * a * a;
}

double bumpRate(double u)
{
    const double a = u * (1.0 - u);
    return 192.0 * a * a * (1.0 - 2.0 * u);
}

struct Planar
{
    double x{0.0};
    double y{0.0};
    double yaw{0.0};
    /// Signed distance rolled along the heading (wheeled plans).
    double along{0.0};
};

struct Piece
{
    double t0{0.0};
    double t1{0.0};
    Planar from;
    Planar to;
};

struct PathSample
{
    Planar pose;
    Planar rate;
};

class BodyPath
{
public:
    BodyPath(const GaitPlan& plan)
        : m_plan(plan)
    {
        Planar cur{plan.start_x, plan.start_y, plan.start_yaw, 0.0};
        double t = plan.settle;
        const bool wheeled = plan.wheel_radius > 0.0;
        const bool smooth = plan.profile == SpeedProfile::MinJerk;
        const double stretch = smooth ? 1.875 : 1.0;

        const auto push = [&](const Planar& to, double duration) {
            m_pieces.push_back({t, t + duration, cur, to});
            t += duration;
            cur = to;
        };
        const auto turnTo = [&](double yaw) {
            const double delta = wrapAngle(yaw - cur.yaw);
            if (std::abs(delta) <= 1e-12)
            {
                return;
            }
            if (wheeled)
            {
                throw InfeasiblePlan(t, "wheeled plans cannot turn in place");
            }
            Planar to = cur;
            to.yaw = cur.yaw + delta;
            push(to, stretch * std::abs(delta) / plan.turn_rate);
        };

        for (const PlanSegment& seg : plan.segments)
        {
            switch (seg.kind)
            {
            case PlanSegment::Kind::Walk:
            case PlanSegment::Kind::Back:
            {
                const double dx = seg.x - cur.x;
                const double dy = seg.y - cur.y;
                const double dist = std::hypot(dx, dy);
                if (dist <= 1e-12)
                {
                    break;
                }
                double dir = std::atan2(dy, dx);
                double sign = 1.0;
                if (seg.kind == PlanSegment::Kind::Back)
                {
                    dir += kPi;
                    sign = -1.0;
                }
                if (wheeled && std::abs(wrapAngle(dir - cur.yaw)) > 1e-9)
                {
                    // A wheeled body may also roll backwards along its heading.
                    if (std::abs(wrapAngle(dir + kPi - cur.yaw)) > 1e-9)
                    {
                        throw InfeasiblePlan(t, "wheeled plans move along the heading only");
                    }
                    sign = -sign;
                    dir = cur.yaw;
                }
                turnTo(dir);
                Planar to = cur;
                to.x = seg.x;
                to.y = seg.y;
                to.along = cur.along + sign * dist;
                push(to, stretch * dist / plan.speed);
                break;
            }
            case PlanSegment::Kind::Turn:
                turnTo(cur.yaw + seg.value);
                break;
            case PlanSegment::Kind::Stand:
                if (seg.value > 0.0)
                {
                    push(cur, seg.value);
                }
                break;
            }
        }
        m_end_pose = cur;
        m_end_time = t;
    }

    double endTime() const { return m_end_time; }

    PathSample sample(double t) const
    {
        PathSample s;
        if (m_pieces.empty() || t < m_pieces.front().t0)
        {
            s.pose = m_pieces.empty() ? m_end_pose : m_pieces.front().from;
        }
        else if (t >= m_pieces.back().t1)
        {
            s.pose = m_end_pose;
        }
        else
        {
            const auto it = std::upper_bound(m_pieces.begin(), m_pieces.end(), t,
                                             [](double v, const Piece& p) { return v < p.t0; });
            const Piece& p = *std::prev(it);
            const double T = p.t1 - p.t0;
            const double u = (t - p.t0) / T;
            double f = u;
            double df = 1.0 / T;
            if (m_plan.profile == SpeedProfile::MinJerk)
            {
                f = minJerk(u);
                df = minJerkRate(u) / T;
            }
            const auto lerp = [&](double a, double b) { return a + f * (b - a); };
            s.pose = {lerp(p.from.x, p.to.x), lerp(p.from.y, p.to.y), lerp(p.from.yaw, p.to.yaw),
                      lerp(p.from.along, p.to.along)};
            s.rate = {df * (p.to.x - p.from.x), df * (p.to.y - p.from.y), df * (p.to.yaw - p.from.yaw),
                      df * (p.to.along - p.from.along)};
        }
        return s;
    }

private:
    const GaitPlan& m_plan;
    std::vector<Piece> m_pieces;
    Planar m_end_pose;
    double m_end_time{0.0};
};

struct BodyPose
{
    Vector3d position;
    Vector3d velocity;
    Vector3d rpy;
    Vector3d rpy_rate;
    double along{0.0};
    double along_rate{0.0};
};

/// Smoothed terrain height followed by the body, and its x-derivative.
std::pair<double, double> bodyTerrain(const GaitPlan& plan, double x)
{
    double h = 0.0;
    double dh = 0.0;
    const double w = plan.terrain_blend;
    for (const TerrainStep& step : plan.terrain)
    {
        const double u0 = (x - step.x_min) / w + 0.5;
        const double u1 = (x - step.x_max) / w + 0.5;
        h += step.height * (minJerk(u0) - minJerk(u1));
        dh += step.height * (minJerkRate(u0) - minJerkRate(u1)) / w;
    }
    return {h, dh};
}

BodyPose bodyPose(const GaitPlan& plan, const BodyPath& path, double t)
{
    const PathSample s = path.sample(t);
    const auto [h, dh] = bodyTerrain(plan, s.pose.x);
    BodyPose b;
    b.position = {s.pose.x, s.pose.y, plan.body_height + h};
    b.velocity = {s.rate.x, s.rate.y, dh * s.rate.x};
    const double w = 2.0 * kPi * plan.tilt_frequency;
    const double A = plan.tilt_amplitude;
    b.rpy = {A * std::sin(w * t), A * std::sin(w * t + 0.25 * kPi), s.pose.yaw};
    b.rpy_rate = {A * w * std::cos(w * t), A * w * std::cos(w * t + 0.25 * kPi), s.rate.yaw};
    b.along = s.pose.along;
    b.along_rate = s.rate.along;
    return b;
}

/// Body-frame angular velocity for Z-Y-X Euler angles and their rates.
Vector3d bodyRate(const Vector3d& rpy, const Vector3d& rate)
{
    const double sr = std::sin(rpy[0]);
    const double cr = std::cos(rpy[0]);
    const double sp = std::sin(rpy[1]);
    const double cp = std::cos(rpy[1]);
    return {rate[0] - sp * rate[2], cr * rate[1] + sr * cp * rate[2], -sr * rate[1] + cr * cp * rate[2]};
}

// ---------------------------------------------------------------------------
// Footstep schedule

struct Swing
{
    double lift{0.0};
    double touch{0.0};
    Vector3d from;
    Vector3d to;
    double noise{0.0};
};

std::vector<double> phaseOffsets(const GaitPlan& plan)
{
    if (plan.legs.size() != 4)
    {
        throw ConfigError("stepping gaits need exactly four legs");
    }
    // Legs ordered front-left, front-right, rear-left, rear-right.
    if (plan.gait == GaitType::Trot)
    {
        return {0.0, 0.5, 0.5, 0.0};
    }
    return {0.25, 0.75, 0.0, 0.5};
}

Vector3d nominalFoothold(const GaitPlan& plan, const BodyPath& path, const LegGeometry& leg, double t)
{
    const BodyPose b = bodyPose(plan, path, t);
    const Vector3d local(leg.hip_mount.x(), leg.hip_mount.y() + leg.side_sign * leg.hip_offset_len, 0.0);
    Vector3d p = b.position + rotZ(b.rpy[2]) * local;
    p.z() = terrainHeight(plan.terrain, p.x());
    return p;
}

std::vector<std::vector<Swing>> schedule(const GaitPlan& plan, const BodyPath& path, std::uint64_t seed,
                                         std::vector<Vector3d>& initial_feet)
{
    const std::size_t n = plan.legs.size();
    std::vector<std::vector<Swing>> swings(n);
    initial_feet.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        initial_feet[i] = nominalFoothold(plan, path, plan.legs[i], 0.0);
    }
    if (plan.gait == GaitType::Stand)
    {
        return swings;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-plan.touchdown_noise, plan.touchdown_noise);
    const std::vector<double> offsets = phaseOffsets(plan);
    const double T = plan.period;
    const double t_gait = plan.settle;
    for (std::size_t i = 0; i < n; ++i)
    {
        Vector3d foot = initial_feet[i];
        for (int k = 0;; ++k)
        {
            const double lift = t_gait + (k + offsets[i] + plan.duty) * T;
            if (lift >= path.endTime())
            {
                break;
            }
            const double touch = t_gait + (k + 1 + offsets[i]) * T;
            const Vector3d target = nominalFoothold(plan, path, plan.legs[i], touch + 0.5 * plan.duty * T);
            const double delta = plan.touchdown_noise > 0.0 ? noise(rng) : 0.0;
            swings[i].push_back({lift, touch, foot, target, delta});
            foot = target;
        }
    }
    return swings;
}

Matrix3d checkedJacobian(const Vector3d& q, const LegGeometry& geom, double min_sigma, double t)
{
    const Matrix3d J = legJacobian(q, geom);
    if (smallestSingularValue(J) < min_sigma)
    {
        throw InfeasiblePlan(t, "leg Jacobian near singular");
    }
    return J;
}

Vector3d solveIk(const Vector3d& r, const LegGeometry& geom, double t)
{
    Vector3d q;
    try
    {
        q = ikAngles(r, geom.rigidChain());
    }
    catch (const Unreachable& e)
    {
        throw InfeasiblePlan(t, e.what());
    }
    // The closed form carries the regularizing epsilon; polish to machine precision.
    const LegGeometry rigid = geom.rigidChain();
    for (int iter = 0; iter < 3; ++iter)
    {
        q += legJacobian(q, rigid).partialPivLu().solve(r - fkPosition(q, rigid));
    }
    if ((fkPosition(q, rigid) - r).norm() > 1e-9)
    {
        throw InfeasiblePlan(t, "foothold outside the inverse-kinematics branch");
    }
    return q;
}

} // namespace

void Imperfections::validate() const
{
    const auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0)
        {
            throw ConfigError(std::string(name) + " must be finite and non-negative");
        }
    };
    check(encoder_quantum, "encoder quantum");
    check(spike_prob, "spike probability");
    check(spike_gain, "spike gain");
    check(yaw_drift, "yaw drift");
    check(wheel_slip, "wheel slip");
    if (spike_prob > 1.0)
    {
        throw ConfigError("spike probability must not exceed 1");
    }
}

void GaitPlan::validate() const
{
    const auto positive = [](double v, const char* name) {
        if (!std::isfinite(v) || !(v > 0.0))
        {
            throw ConfigError(std::string(name) + " must be positive");
        }
    };
    positive(rate_hz, "rate");
    positive(mass, "mass");
    positive(gravity, "gravity");
    positive(period, "period");
    positive(body_height, "body_height");
    positive(speed, "speed");
    positive(turn_rate, "turn_rate");
    positive(terrain_blend, "terrain_blend");
    positive(min_sigma, "min_sigma");
    if (legs.empty())
    {
        throw ConfigError("a plan needs at least one leg");
    }
    for (const LegGeometry& leg : legs)
    {
        leg.validate();
    }
    if (gait == GaitType::Trot && !(duty > 0.5 && duty < 1.0))
    {
        throw ConfigError("trot duty factor must lie in (0.5, 1)");
    }
    if (gait == GaitType::Walk && !(duty >= 0.75 && duty < 1.0))
    {
        throw ConfigError("walk duty factor must lie in [0.75, 1)");
    }
    if (!(settle >= 0.0) || !(swing_height >= 0.0) || !(touchdown_noise >= 0.0) || !(wheel_radius >= 0.0) ||
        !(tilt_amplitude >= 0.0) || !(tilt_frequency >= 0.0))
    {
        throw ConfigError("plan parameters must be non-negative");
    }
    if (wheel_radius > 0.0 && gait != GaitType::Stand)
    {
        throw ConfigError("wheeled plans keep all legs in stance (gait = stand)");
    }
    for (const TerrainStep& step : terrain)
    {
        if (!(step.x_max > step.x_min))
        {
            throw ConfigError("terrain steps need x_max > x_min");
        }
    }
    imperfections.validate();
}

GaitPlan parsePlan(std::string_view text)
{
    GaitPlan plan;
    std::size_t line_no = 0;
    for (std::string_view line : detail::splitLines(text))
    {
        ++line_no;
        const std::string_view content = detail::trim(detail::stripComment(line));
        if (content.empty())
        {
            continue;
        }
        const std::size_t eq = content.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError("plan line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try
        {
            applyPlanValue(plan, detail::trim(content.substr(0, eq)), detail::trim(content.substr(eq + 1)));
        }
        catch (const ConfigError& e)
        {
            throw ConfigError("plan line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    plan.validate();
    return plan;
}

GaitPlan loadPlan(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open plan file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parsePlan(buffer.str());
}

std::vector<std::string> presetNames()
{
    std::vector<std::string> names;
    for (const auto& [name, text] : presets())
    {
        names.push_back(name);
    }
    return names;
}

std::string presetPlanText(std::string_view name)
{
    const auto it = presets().find(name);
    if (it == presets().end())
    {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    return it->second;
}

GaitPlan presetPlan(std::string_view name)
{
    return parsePlan(presetPlanText(name));
}

double terrainHeight(const std::vector<TerrainStep>& terrain, double x)
{
    double h = 0.0;
    for (const TerrainStep& step : terrain)
    {
        if (x >= step.x_min && x < step.x_max)
        {
            h += step.height;
        }
    }
    return h;
}

GaitRun generateGait(const GaitPlan& plan_in, std::uint64_t seed)
{
    plan_in.validate();
    GaitPlan plan = plan_in;
    const bool wheeled = plan.wheel_radius > 0.0;
    for (LegGeometry& leg : plan.legs)
    {
        leg.wheel_radius = wheeled ? plan.wheel_radius : 0.0;
    }

    const BodyPath path(plan);
    std::vector<Vector3d> initial_feet;
    const std::vector<std::vector<Swing>> swings = schedule(plan, path, seed, initial_feet);

    double t_end = path.endTime();
    for (const auto& leg_swings : swings)
    {
        if (!leg_swings.empty())
        {
            t_end = std::max(t_end, leg_swings.back().touch);
        }
    }
    t_end += plan.settle;
    const auto n_samples = static_cast<std::size_t>(std::llround(t_end * plan.rate_hz)) + 1;
    const std::size_t n_legs = plan.legs.size();

    // Wheeled legs hold one configuration; the wheel axis sits at the rigid-chain tip.
    std::vector<Vector3d> fixed_q(n_legs);
    if (wheeled)
    {
        for (std::size_t i = 0; i < n_legs; ++i)
        {
            const LegGeometry& leg = plan.legs[i];
            fixed_q[i] = solveIk(Vector3d(0.0, leg.side_sign * leg.hip_offset_len, -plan.body_height), leg, 0.0);
        }
    }

    GaitRun run;
    run.frames.reserve(n_samples);
    run.truth.reserve(n_samples);
    run.feet_world.reserve(n_samples);
    run.stance.reserve(n_samples);

    std::vector<std::size_t> next_swing(n_legs, 0);
    std::vector<double> pending_noise(n_legs, 0.0);
    std::vector<Vector3d> foot_pos(n_legs);
    std::vector<Vector3d> foot_vel(n_legs);
    std::vector<bool> stance(n_legs);

    for (std::size_t k = 0; k < n_samples; ++k)
    {
        const double t = static_cast<double>(k) / plan.rate_hz;
        const BodyPose body = bodyPose(plan, path, t);
        const Matrix3d R = rpyToRotation(body.rpy[0], body.rpy[1], body.rpy[2]);
        const Vector3d omega = bodyRate(body.rpy, body.rpy_rate);

        // Contact schedule and world-frame foot motion.
        for (std::size_t i = 0; i < n_legs; ++i)
        {
            const std::vector<Swing>& legs_swings = swings[i];
            std::size_t& j = next_swing[i];
            while (j < legs_swings.size() && legs_swings[j].touch <= t)
            {
                pending_noise[i] = legs_swings[j].noise;
                ++j;
            }
            foot_vel[i].setZero();
            if (j < legs_swings.size() && legs_swings[j].lift <= t)
            {
                const Swing& s = legs_swings[j];
                const double T = s.touch - s.lift;
                const double u = (t - s.lift) / T;
                const Vector3d d = s.to - s.from;
                foot_pos[i] = s.from + minJerk(u) * d + Vector3d(0.0, 0.0, plan.swing_height * bump(u));
                foot_vel[i] = (minJerkRate(u) * d + Vector3d(0.0, 0.0, plan.swing_height * bumpRate(u))) / T;
                stance[i] = false;
                pending_noise[i] = 0.0;
            }
            else
            {
                foot_pos[i] = j > 0 ? legs_swings[j - 1].to : initial_feet[i];
                stance[i] = true;
            }
        }

        std::size_t n_stance = 0;
        for (std::size_t i = 0; i < n_legs; ++i)
        {
            n_stance += stance[i] ? 1 : 0;
        }
        const Vector3d load_body =
            n_stance > 0 ? Vector3d(R.transpose() * Vector3d(0.0, 0.0, -plan.mass * plan.gravity / n_stance))
                         : Vector3d::Zero();

        SensorFrame frame;
        frame.stamp = t;
        frame.imu_attitude = Quaterniond(R).normalized();
        frame.imu_gyro = omega;
        frame.legs.resize(n_legs);
        if (wheeled)
        {
            frame.wheels.resize(n_legs);
        }
        std::vector<Vector3d> feet_world(n_legs);

        for (std::size_t i = 0; i < n_legs; ++i)
        {
            const LegGeometry& leg = plan.legs[i];
            JointReading& reading = frame.legs[i];
            if (wheeled)
            {
                reading.q = fixed_q[i];
                reading.dq.setZero();
                const Matrix3d J = checkedJacobian(reading.q, leg, plan.min_sigma, t);
                reading.tau = J.transpose() * load_body;
                const double beta = body.rpy[1] + reading.q[1] + reading.q[2];
                frame.wheels[i] = WheelReading{wrapAngle(body.along / plan.wheel_radius + beta),
                                               body.along_rate / plan.wheel_radius + body.rpy_rate[1]};
                feet_world[i] = body.position + R * (leg.hip_mount + fkPosition(reading.q, leg));
                continue;
            }

            const Vector3d rel = R.transpose() * (foot_pos[i] - body.position);
            Vector3d r = rel - leg.hip_mount;
            if (stance[i] && pending_noise[i] != 0.0)
            {
                r += R.transpose() * Vector3d(0.0, 0.0, pending_noise[i]);
            }
            pending_noise[i] = 0.0;

            reading.q = solveIk(r, leg, t);
            const Matrix3d J = checkedJacobian(reading.q, leg, plan.min_sigma, t);
            const Vector3d r_dot = R.transpose() * (foot_vel[i] - body.velocity) - omega.cross(rel);
            reading.dq = J.partialPivLu().solve(r_dot);
            reading.tau = stance[i] ? Vector3d(J.transpose() * load_body) : Vector3d::Zero();
            feet_world[i] = foot_pos[i];
        }

        BodyState truth;
        truth.stamp = t;
        truth.position = body.position;
        truth.velocity = body.velocity;
        truth.roll = body.rpy[0];
        truth.pitch = body.rpy[1];
        truth.yaw = wrapAngle(body.rpy[2]);

        run.frames.push_back(std::move(frame));
        run.truth.push_back(truth);
        run.feet_world.push_back(std::move(feet_world));
        run.stance.push_back(stance);
    }
    return run;
}

std::vector<SensorFrame> degrade(std::vector<SensorFrame> frames, const Imperfections& imp, std::uint64_t seed)
{
    imp.validate();
    if (frames.empty())
    {
        return frames;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (imp.encoder_quantum > 0.0)
    {
        const double quantum = imp.encoder_quantum;
        for (SensorFrame& f : frames)
        {
            for (JointReading& leg : f.legs)
            {
                leg.q = (leg.q / quantum).array().floor().matrix() * quantum;
            }
        }
        // Differentiate the quantized angles: backward differences, forward at the first sample.
        for (std::size_t k = 0; k < frames.size(); ++k)
        {
            const std::size_t a = k == 0 ? 0 : k - 1;
            const std::size_t b = k == 0 ? std::min<std::size_t>(1, frames.size() - 1) : k;
            const double dt = frames[b].stamp - frames[a].stamp;
            for (std::size_t i = 0; i < frames[k].legs.size(); ++i)
            {
                frames[k].legs[i].dq =
                    dt > 0.0 ? Vector3d((frames[b].legs[i].q - frames[a].legs[i].q) / dt) : Vector3d::Zero();
            }
        }
    }

    if (imp.spike_prob > 0.0)
    {
        for (SensorFrame& f : frames)
        {
            for (JointReading& leg : f.legs)
            {
                for (Eigen::Index j = 0; j < 3; ++j)
                {
                    if (unit(rng) < imp.spike_prob)
                    {
                        leg.dq[j] *= imp.spike_gain;
                    }
                }
            }
        }
    }

    if (imp.yaw_drift > 0.0)
    {
        const double t0 = frames.front().stamp;
        for (SensorFrame& f : frames)
        {
            const Matrix3d R = f.imu_attitude.normalized().toRotationMatrix();
            const Matrix3d drifted = rotZ(imp.yaw_drift * (f.stamp - t0)) * R;
            f.imu_attitude = Quaterniond(drifted).normalized();
            f.imu_gyro += drifted.transpose() * Vector3d(0.0, 0.0, imp.yaw_drift);
        }
    }

    if (imp.wheel_slip > 0.0)
    {
        const double gain = 1.0 + imp.wheel_slip;
        std::vector<std::optional<WheelReading>> prev_raw;
        std::vector<std::optional<WheelReading>> prev_out;
        for (SensorFrame& f : frames)
        {
            const std::vector<std::optional<WheelReading>> raw = f.wheels;
            for (std::size_t i = 0; i < f.wheels.size(); ++i)
            {
                if (!f.wheels[i])
                {
                    continue;
                }
                f.wheels[i]->dpsi *= gain;
                if (i < prev_raw.size() && prev_raw[i] && prev_out[i])
                {
                    // Scale the encoder increment on top of the already slipped previous output.
                    const double increment = wrapAngle(raw[i]->psi - prev_raw[i]->psi);
                    f.wheels[i]->psi = wrapAngle(prev_out[i]->psi + gain * increment);
                }
            }
            prev_raw = raw;
            prev_out = f.wheels;
        }
    }
    return frames;
}

EstimatorConfig estimatorConfigFor(const GaitPlan& plan, const GaitRun& run)
{
    EstimatorConfig config = EstimatorConfig::quadruped();
    config.legs = plan.legs;
    for (LegGeometry& leg : config.legs)
    {
        leg.wheel_radius = plan.wheel_radius;
    }
    if (!run.truth.empty())
    {
        config.initial_position = run.truth.front().position;
    }
    return config;
}

} // namespace legodom
