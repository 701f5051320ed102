#include <legodom/yaw_consistency.hpp>

namespace legodom
{

std::vector<double> pairwiseYaw(std::span<const Vector3d> anchors,
                                std::span<const Vector3d> feet_body,
                                double roll,
                                double pitch,
                                double min_baseline)
{
    if (anchors.size() != feet_body.size())
    {
        throw std::invalid_argument("pairwiseYaw: anchor and foot lists differ in length");
    }
    if (anchors.size() < 2)
    {
        throw InsufficientContacts("yaw constraint needs at least two stance legs");
    }

    const Matrix3d tilt = rotY(pitch) * rotX(roll);
    std::vector<double> yaws;
    for (std::size_t i = 0; i < anchors.size(); ++i)
    {
        for (std::size_t j = i + 1; j < anchors.size(); ++j)
        {
            const Vector3d world = anchors[j] - anchors[i];
            const Vector3d body = tilt * (feet_body[j] - feet_body[i]);
            if (std::hypot(world.x(), world.y()) < min_baseline
                || std::hypot(body.x(), body.y()) < min_baseline)
            {
                continue;
            }
            yaws.push_back(wrapAngle(std::atan2(world.y(), world.x()) - std::atan2(body.y(), body.x())));
        }
    }
    return yaws;
}

double circularMean(std::span<const double> angles)
{
    if (angles.empty())
    {
        throw DegenerateMean("circular mean of an empty set");
    }
    double sum_sin = 0.0;
    double sum_cos = 0.0;
    for (double a : angles)
    {
        sum_sin += std::sin(a);
        sum_cos += std::cos(a);
    }
    if (std::abs(sum_sin) <= kDegenerateMeanTolerance && std::abs(sum_cos) <= kDegenerateMeanTolerance)
    {
        throw DegenerateMean("angles cancel; no mean direction");
    }
    return wrapAngle(std::atan2(sum_sin, sum_cos));
}

YawCorrection applyYawCorrection(double yaw,
                                 double yaw_kin,
                                 std::size_t n_contacts,
                                 std::size_t n_full_support,
                                 double now,
                                 std::optional<double> full_support_since,
                                 double alpha0,
                                 double ramp_time)
{
    YawCorrection out;
    out.error = wrapAngle(yaw_kin - yaw);

    if (n_contacts < n_full_support)
    {
        out.full_support_since = std::nullopt;
        out.alpha = alpha0;
    }
    else
    {
        const double t0 = full_support_since.value_or(now);
        out.full_support_since = t0;
        out.alpha = std::clamp(alpha0 + (now - t0) / ramp_time * (1.0 - alpha0), 0.0, 1.0);
    }

    out.yaw = out.alpha == 1.0 ? wrapAngle(yaw_kin) : wrapAngle(yaw + out.alpha * out.error);
    return out;
}

} // namespace legodom
