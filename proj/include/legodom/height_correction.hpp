/**
 * @file height_correction.hpp
 * @brief Support-plane clustering of touchdown heights with time-decayed confidence.
 */

#pragma once

#include <legodom/common.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace legodom
{

struct SupportPlane
{
    double height{0.0};
    double weight{1.0};
    double last_update{0.0};
};

struct HeightParams
{
    double delta_h{0.04};  ///< match radius [m]; Δh/10 is the no-snap dead band
    double t_fade{30.0};   ///< records older than this are dropped [s]
    double kappa{1.0};     ///< weight decay time scale, in units of t_fade
    std::size_t max_planes{64};

    void validate() const;
};

/// Removes records with now - last_update > t_fade.
std::vector<SupportPlane> pruneStale(std::vector<SupportPlane> planes, double now, double t_fade);

struct HeightCorrectionResult
{
    double z{0.0};
    std::vector<SupportPlane> planes;
    std::optional<std::size_t> matched;  ///< index into planes, when a plane matched
};

/**
 * Prunes stale planes, matches @p z_raw against the survivors and snaps or
 * creates a plane. Among several matches the closest wins; ties go to the
 * larger weight, then the lower height. Plane heights never move.
 */
HeightCorrectionResult correctHeight(double z_raw,
                                     std::vector<SupportPlane> planes,
                                     double now,
                                     const HeightParams& params);

/// Stateful owner of the plane set, used by the estimator.
class SupportPlaneMap
{
public:
    explicit SupportPlaneMap(HeightParams params = {});

    /// Returns the corrected touchdown height.
    double correct(double z_raw, double now);

    const std::vector<SupportPlane>& planes() const { return m_planes; }
    const HeightParams& params() const { return m_params; }

private:
    HeightParams m_params;
    std::vector<SupportPlane> m_planes;
};

} // namespace legodom
