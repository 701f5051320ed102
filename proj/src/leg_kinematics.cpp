#include <legodom/leg_kinematics.hpp>

#include <Eigen/SVD>

namespace legodom
{

void LegGeometry::validate() const
{
    if (!(thigh_len > 0.0) || !(calf_len > 0.0))
    {
        throw ConfigError("leg geometry: thigh and calf lengths must be positive");
    }
    if (!(wheel_radius >= 0.0))
    {
        throw ConfigError("leg geometry: wheel radius must be non-negative");
    }
    if (side_sign != 1 && side_sign != -1)
    {
        throw ConfigError("leg geometry: side sign must be +1 or -1");
    }
    if (!std::isfinite(hip_offset_len) || !hip_mount.allFinite())
    {
        throw ConfigError("leg geometry: non-finite hip parameters");
    }
}

LegGeometry LegGeometry::rigidChain() const
{
    LegGeometry rigid = *this;
    rigid.wheel_radius = 0.0;
    return rigid;
}

namespace
{

struct Trig
{
    double c1, s1, c2, s2, c23, s23;

    explicit Trig(const Vector3d& q)
        : c1(std::cos(q[0]))
        , s1(std::sin(q[0]))
        , c2(std::cos(q[1]))
        , s2(std::sin(q[1]))
        , c23(std::cos(q[1] + q[2]))
        , s23(std::sin(q[1] + q[2]))
    {
    }
};

} // namespace

Vector3d fkPosition(const Vector3d& q, const LegGeometry& geom)
{
    const Trig t(q);
    const double Lh = geom.hip_offset_len;
    const double Lt = geom.thigh_len;
    const double Lc = geom.calf_len;
    const double rw = geom.wheel_radius;
    const double s = geom.side_sign;

    return {-(Lc * t.s23 + Lt * t.s2),
            s * Lh * t.c1 + (Lc + rw) * t.s1 * t.c23 + Lt * t.c2 * t.s1,
            s * Lh * t.s1 - Lc * t.c1 * t.c23 - Lt * t.c1 * t.c2 + rw};
}

Vector3d fkVelocity(const Vector3d& q, const Vector3d& dq, const LegGeometry& geom)
{
    const Trig t(q);
    const double Lh = geom.hip_offset_len;
    const double Lt = geom.thigh_len;
    const double Lc = geom.calf_len;
    const double Lcw = geom.calf_len + geom.wheel_radius;
    const double s = geom.side_sign;

    // The x row carries no wheel term while y and z use it as written.
    const double vx = -((Lc * t.c23 + Lt * t.c2) * dq[1] + (Lc * t.c23) * dq[2]);
    const double vy = (Lcw * t.c1 * t.c23 + Lt * t.c1 * t.c2 - s * Lh * t.s1) * dq[0]
                      + (-Lcw * t.s1 * t.s23 - Lt * t.s1 * t.s2) * dq[1]
                      + (-Lcw * t.s1 * t.s23) * dq[2];
    const double vz = (Lc * t.s1 * t.c23 + Lt * t.c2 * t.s1 + s * Lh * t.c1) * dq[0]
                      + (Lc * t.c1 * t.s23 + Lt * t.c1 * t.s2) * dq[1]
                      + (Lc * t.c1 * t.s23) * dq[2];
    return {vx, vy, vz};
}

Matrix3d legJacobian(const Vector3d& q, const LegGeometry& geom)
{
    const Trig t(q);
    const double Lh = geom.hip_offset_len;
    const double Lt = geom.thigh_len;
    const double Lc = geom.calf_len;
    const double Lcw = geom.calf_len + geom.wheel_radius;
    const double s = geom.side_sign;

    Matrix3d J;
    J << 0.0, -(Lc * t.c23 + Lt * t.c2), -(Lc * t.c23),
        Lcw * t.c1 * t.c23 + Lt * t.c1 * t.c2 - s * Lh * t.s1,
        -Lcw * t.s1 * t.s23 - Lt * t.s1 * t.s2, -Lcw * t.s1 * t.s23,
        Lc * t.s1 * t.c23 + Lt * t.c2 * t.s1 + s * Lh * t.c1,
        Lc * t.c1 * t.s23 + Lt * t.c1 * t.s2, Lc * t.c1 * t.s23;
    return J;
}

double smallestSingularValue(const Matrix3d& J)
{
    Eigen::JacobiSVD<Matrix3d> svd(J);
    return svd.singularValues()(2);
}

Vector3d footForceBody(const Vector3d& q,
                       const Vector3d& tau,
                       const LegGeometry& geom,
                       double sigma_min)
{
    const Matrix3d J = legJacobian(q, geom);
    if (smallestSingularValue(J) < sigma_min)
    {
        throw SingularConfiguration("leg Jacobian is singular; force is not observable");
    }
    const Matrix3d JJt = J * J.transpose();
    return JJt.inverse() * (J * tau);
}

RollingBias rollingBias(double radius, double a1, double a2)
{
    return {radius * (std::cos(a1) - std::cos(a2) - (a2 - a1)),
            radius * (-std::sin(a1) + std::sin(a2))};
}

} // namespace legodom
