#include <legodom/ikvel_ckf.hpp>

#include <Eigen/LU>

namespace legodom
{

namespace
{

double checkedDomain(double arg, bool clamp, const char* what)
{
    if (!std::isfinite(arg))
    {
        throw Unreachable(std::string("inverse kinematics: non-finite ") + what + " argument");
    }
    if (!clamp && std::abs(arg) > 1.0 + kIkDomainTolerance)
    {
        throw Unreachable(std::string("inverse kinematics: ") + what + " argument outside [-1, 1]");
    }
    return std::clamp(arg, -1.0, 1.0);
}

} // namespace

Vector3d ikAngles(const Vector3d& r, const LegGeometry& geom, bool clamp)
{
    const double Lh = geom.hip_offset_len;
    const double Lt = geom.thigh_len;
    const double L2 = geom.calf_len;
    const double s = geom.side_sign;

    // The closed form below is written for a backward-positive x axis.
    const double x = -r.x();
    const double y = r.y();
    const double z = r.z();

    const double rho2 = z * z + y * y;
    if (!(rho2 > 0.0))
    {
        throw Unreachable("inverse kinematics: foot on the ab/adduction axis");
    }
    double radical = kIkRadicalEpsilon + 4.0 * Lh * Lh * z * z - 4.0 * rho2 * (Lh * Lh - y * y);
    if (radical < 0.0)
    {
        if (!clamp)
        {
            throw Unreachable("inverse kinematics: foot inside the hip offset radius");
        }
        radical = 0.0;
    }
    const double sin1 = checkedDomain((2.0 * Lh * z + std::sqrt(radical)) / (2.0 * rho2), clamp, "arcsin");
    const double theta1 = s * std::asin(sin1);

    const double zbar = z - s * Lh * std::sin(theta1);
    const double ybar = y - s * Lh * std::cos(theta1);
    const double rbar = std::sqrt(ybar * ybar + zbar * zbar);
    const double reach2 = rbar * rbar + x * x;
    const double reach = std::sqrt(reach2);
    if (!(reach > 0.0))
    {
        throw Unreachable("inverse kinematics: foot at the hip pitch axis");
    }

    const double knee = checkedDomain((Lt * Lt + L2 * L2 - reach2) / (2.0 * Lt * L2), clamp, "knee arccos");
    const double hip = checkedDomain((reach2 + Lt * Lt - L2 * L2) / (2.0 * reach * Lt), clamp, "hip arccos");

    const double theta3 = -kPi + std::acos(knee);
    const double theta2 = std::atan2(x, rbar) + std::acos(hip);
    return {theta1, theta2, theta3};
}

Matrix3d ikJacobian(const Vector3d& theta, const LegGeometry& geom)
{
    const double Lh = geom.hip_offset_len;
    const double Lt = geom.thigh_len;
    const double L2 = geom.calf_len;
    const double s = geom.side_sign;
    const double c1 = std::cos(theta[0]);
    const double s1 = std::sin(theta[0]);
    const double c2 = std::cos(theta[1]);
    const double s2 = std::sin(theta[1]);
    const double c23 = std::cos(theta[1] + theta[2]);
    const double s23 = std::sin(theta[1] + theta[2]);

    Matrix3d J;
    J << 0.0, L2 * c23 + Lt * c2, L2 * c23,
        -s * Lh * s1 + L2 * c1 * c23 + Lt * c2 * c1, -L2 * s1 * s23 - Lt * s1 * s2, -L2 * s1 * s23,
        s * Lh * c1 + L2 * s1 * c23 + Lt * c2 * s1, L2 * c1 * s23 + Lt * c1 * s2, L2 * c1 * s23;
    return J;
}

IkMeasurement ikMeasurement(const Vector6d& x, const LegGeometry& geom, bool clamp, double sigma_min)
{
    IkMeasurement out;
    const Vector3d theta = ikAngles(x.head<3>(), geom, clamp);
    out.z.head<3>() = theta;

    const Matrix3d J = ikJacobian(theta, geom);
    if (smallestSingularValue(J) < sigma_min)
    {
        out.z.tail<3>().setZero();
        out.rates_valid = false;
        return out;
    }
    const Vector3d v(-x[3], x[4], x[5]);
    out.z.tail<3>() = J.partialPivLu().solve(v);
    return out;
}

void IkVelSettings::validate() const
{
    if (!(q_pos >= 0.0) || !(q_vel >= 0.0))
    {
        throw ConfigError("ikvel.q_pos and ikvel.q_vel must be non-negative");
    }
    if (!(r_angle > 0.0) || !(r_rate > 0.0))
    {
        throw ConfigError("ikvel.r_angle and ikvel.r_rate must be positive");
    }
    if (!(dt_max > 0.0))
    {
        throw ConfigError("ikvel.dt_max must be positive");
    }
    if (!(init_pos_var > 0.0) || !(init_vel_var > 0.0))
    {
        throw ConfigError("ikvel initial variances must be positive");
    }
}

CkfNoise IkVelSettings::noise() const
{
    CkfNoise n;
    n.Q.setZero();
    n.Q.diagonal() << q_pos, q_pos, q_pos, q_vel, q_vel, q_vel;
    n.R_meas.setZero();
    n.R_meas.diagonal() << r_angle, r_angle, r_angle, r_rate, r_rate, r_rate;
    return n;
}

Matrix6d IkVelSettings::initialCovariance() const
{
    Matrix6d P = Matrix6d::Zero();
    P.diagonal() << init_pos_var, init_pos_var, init_pos_var, init_vel_var, init_vel_var, init_vel_var;
    return P;
}

CkfLegState initialLegState(const Vector3d& q, const LegGeometry& geom, double t, const IkVelSettings& settings)
{
    CkfLegState state;
    state.x.head<3>() = fkPosition(q, geom.rigidChain());
    state.x.tail<3>().setZero();
    state.P = settings.initialCovariance();
    state.t = t;
    return state;
}

namespace
{

GaussianEstimate<6> ckfCycle(const GaussianEstimate<6>& prior,
                             const Vector6d& z,
                             double dt,
                             const CkfNoise& noise,
                             const LegGeometry& geom)
{
    const auto process = [dt](const Vector6d& x) {
        Vector6d out = x;
        out.head<3>() += dt * x.tail<3>();
        return out;
    };
    const GaussianEstimate<6> pred = cubaturePredict<6>(prior, process, noise.Q * dt);

    const CubaturePoints<6> xpts = cubaturePoints(pred);
    std::array<Vector6d, 12> zpts;
    bool rates_valid = true;
    for (std::size_t m = 0; m < xpts.size(); ++m)
    {
        const IkMeasurement meas = ikMeasurement(xpts[m], geom, /*clamp=*/true);
        zpts[m] = meas.z;
        rates_valid = rates_valid && meas.rates_valid;
    }

    Matrix6d R = noise.R_meas;
    if (!rates_valid)
    {
        R.bottomRightCorner<3, 3>() *= kRateInflation;
    }
    return cubatureUpdateFromPoints<6, 6>(pred, xpts, zpts, z, R);
}

} // namespace

CkfLegState ckfStep(const CkfLegState& state,
                    const Vector6d& z,
                    double t_now,
                    const CkfNoise& noise,
                    const LegGeometry& geom,
                    double dt_max,
                    const Matrix6d& reset_cov)
{
    double dt = t_now - state.t;
    if (!(std::abs(dt) <= dt_max) || dt < 0.0)
    {
        dt = 0.0;
    }

    const LegGeometry rigid = geom.rigidChain();
    GaussianEstimate<6> prior{state.x, state.P};
    CkfLegState out;
    out.t = t_now;

    GaussianEstimate<6> post;
    try
    {
        post = ckfCycle(prior, z, dt, noise, rigid);
    }
    catch (const CholeskyFailure&)
    {
        prior.cov = reset_cov;
        out.reset = true;
        try
        {
            post = ckfCycle(prior, z, dt, noise, rigid);
        }
        catch (const CholeskyFailure&)
        {
            post = prior;
        }
    }

    out.x = post.mean;
    out.x[1] = geom.side_sign * std::abs(out.x[1]);
    out.P = post.cov;
    return out;
}

IkVelFilter::IkVelFilter(std::vector<LegGeometry> legs, IkVelSettings settings)
    : m_legs(std::move(legs))
    , m_settings(settings)
    , m_noise(settings.noise())
    , m_cache(m_legs.size())
{
    m_settings.validate();
}

Vector3d IkVelFilter::filterLeg(std::size_t leg, const JointReading& reading, double stamp)
{
    const LegGeometry& geom = m_legs.at(leg);
    if (!m_settings.enabled)
    {
        return fkVelocity(reading.q, reading.dq, geom);
    }

    std::optional<CkfLegState>& slot = m_cache[leg];
    if (!slot)
    {
        slot = initialLegState(reading.q, geom, stamp, m_settings);
    }

    Vector6d z;
    z << reading.q, reading.dq;

    m_active = *slot;
    m_active = ckfStep(m_active, z, stamp, m_noise, geom, m_settings.dt_max, m_settings.initialCovariance());
    if (m_active.reset)
    {
        ++m_recoveries;
    }
    slot = m_active;
    return m_active.x.tail<3>();
}

std::vector<Vector3d> IkVelFilter::filter(std::span<const JointReading> legs, double stamp)
{
    std::vector<Vector3d> out;
    out.reserve(legs.size());
    for (std::size_t i = 0; i < legs.size(); ++i)
    {
        out.push_back(filterLeg(i, legs[i], stamp));
    }
    return out;
}

} // namespace legodom
