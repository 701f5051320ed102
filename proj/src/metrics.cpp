#include <legodom/metrics.hpp>

#include <cmath>
#include <stdexcept>

namespace legodom
{

double planarClosure(double dx, double dy)
{
    return std::hypot(dx, dy);
}

TrajectoryMetrics computeMetrics(const std::vector<BodyState>& trajectory, const std::vector<BodyState>* ground_truth)
{
    if (trajectory.empty())
    {
        throw std::invalid_argument("metrics need a non-empty trajectory");
    }
    TrajectoryMetrics m;
    const Vector3d d = trajectory.back().position - trajectory.front().position;
    m.e_xy = planarClosure(d.x(), d.y());
    m.e_z = std::abs(d.z());

    if (ground_truth)
    {
        if (ground_truth->size() != trajectory.size())
        {
            throw std::invalid_argument("ground truth and trajectory differ in length");
        }
        Vector3d sum = Vector3d::Zero();
        for (std::size_t k = 0; k < trajectory.size(); ++k)
        {
            sum += (trajectory[k].position - (*ground_truth)[k].position).cwiseAbs();
        }
        m.mae = sum / static_cast<double>(trajectory.size());
        m.terminal_error = (trajectory.back().position - ground_truth->back().position).norm();
    }
    return m;
}

nlohmann::json toJson(const TrajectoryMetrics& m)
{
    nlohmann::json j = {{"e_xy", m.e_xy}, {"e_z", m.e_z}};
    if (m.mae)
    {
        j["mae"] = {{"x", m.mae->x()}, {"y", m.mae->y()}, {"z", m.mae->z()}};
    }
    if (m.terminal_error)
    {
        j["terminal_error"] = *m.terminal_error;
    }
    return j;
}

} // namespace legodom
