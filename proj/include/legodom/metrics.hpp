/**
 * @file metrics.hpp
 * @brief Closure and tracking metrics over trajectories.
 */

#pragma once

#include <legodom/estimator.hpp>

#include <json.hpp>

#include <optional>
#include <vector>

namespace legodom
{

struct TrajectoryMetrics
{
    /// Planar distance between the first and last rows.
    double e_xy{0.0};
    /// Absolute height difference between the first and last rows.
    double e_z{0.0};
    /// Per-axis mean absolute position error against ground truth, if supplied.
    std::optional<Vector3d> mae;
    /// Distance between the final estimate and the final ground-truth position.
    std::optional<double> terminal_error;
};

/// Planar closure distance for a displacement (dx, dy).
double planarClosure(double dx, double dy);

/**
 * Throws std::invalid_argument on an empty trajectory, or when ground truth is
 * given with a different row count (rows are matched by index).
 */
TrajectoryMetrics computeMetrics(const std::vector<BodyState>& trajectory,
                                 const std::vector<BodyState>* ground_truth = nullptr);

nlohmann::json toJson(const TrajectoryMetrics& metrics);

} // namespace legodom
