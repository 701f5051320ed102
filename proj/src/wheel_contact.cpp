#include <legodom/wheel_contact.hpp>

namespace legodom
{

double effectiveRollIncrement(double psi_k,
                              double psi_km1,
                              double pitch_k,
                              double pitch_km1,
                              double q2_k,
                              double q3_k,
                              double q2_km1,
                              double q3_km1)
{
    const double dpsi = wrapAngle(psi_k - psi_km1);
    const double dbeta = (pitch_k + q2_k + q3_k) - (pitch_km1 + q2_km1 + q3_km1);
    return dpsi - dbeta;
}

std::optional<Vector3d> headingDirection(const Matrix3d& body_rot, double eps)
{
    const Vector3d h = body_rot.col(0);
    const double planar = std::hypot(h.x(), h.y());
    if (!(planar > eps))
    {
        return std::nullopt;
    }
    return Vector3d(h.x() / planar, h.y() / planar, 0.0);
}

Vector3d propagateContact(const Vector3d& anchor,
                          double dpsi_eff,
                          double wheel_radius,
                          const std::optional<Vector3d>& heading)
{
    if (!heading)
    {
        return anchor;
    }
    Vector3d out = anchor;
    out.x() += wheel_radius * dpsi_eff * heading->x();
    out.y() += wheel_radius * dpsi_eff * heading->y();
    return out;
}

Vector3d rollingVelocity(double dpsi,
                         double dq2,
                         double dq3,
                         double wheel_radius,
                         const std::optional<Vector3d>& heading)
{
    if (!heading)
    {
        return Vector3d::Zero();
    }
    return wheel_radius * (dpsi - dq2 - dq3) * (*heading);
}

} // namespace legodom
