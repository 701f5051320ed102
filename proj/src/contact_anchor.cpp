#include <legodom/contact_anchor.hpp>

#include <algorithm>

namespace legodom
{

bool ContactSet::contains(std::size_t leg) const
{
    return std::binary_search(members.begin(), members.end(), leg);
}

bool gateContact(double f_world_z, double f_th)
{
    return f_world_z <= f_th;
}

bool detectTouchdown(bool prev_contact, bool curr_contact)
{
    return curr_contact && !prev_contact;
}

Vector3d recordFootfall(const Vector3d& body_pos, const Matrix3d& body_rot, const Vector3d& foot_body)
{
    return body_pos + body_rot * foot_body;
}

Vector3d anchoredPositionObs(const Vector3d& anchor, const Matrix3d& body_rot, const Vector3d& foot_body)
{
    return anchor - body_rot * foot_body;
}

Vector3d anchoredVelocityObs(const Matrix3d& body_rot,
                             const Vector3d& omega_body,
                             const Vector3d& foot_body,
                             const Vector3d& foot_vel_body)
{
    return -(body_rot * (omega_body.cross(foot_body) + foot_vel_body));
}

FusedObservation fuseObservations(std::span<const Vector3d> per_leg_pos,
                                  std::span<const Vector3d> per_leg_vel)
{
    if (per_leg_pos.size() != per_leg_vel.size())
    {
        throw std::invalid_argument("fuseObservations: position and velocity lists differ in length");
    }
    if (per_leg_pos.empty())
    {
        throw EmptyContactSet("no contacting legs; prediction only");
    }

    FusedObservation fused;
    for (std::size_t i = 0; i < per_leg_pos.size(); ++i)
    {
        fused.position += per_leg_pos[i];
        fused.velocity += per_leg_vel[i];
    }
    const double n = static_cast<double>(per_leg_pos.size());
    fused.position /= n;
    fused.velocity /= n;
    return fused;
}

} // namespace legodom
