#include <legodom/height_correction.hpp>

#include <algorithm>

namespace legodom
{

void HeightParams::validate() const
{
    if (!(delta_h > 0.0))
    {
        throw ConfigError("height.delta_h must be positive");
    }
    if (!(t_fade > 0.0))
    {
        throw ConfigError("height.t_fade must be positive");
    }
    if (!(kappa > 0.0))
    {
        throw ConfigError("height.kappa must be positive");
    }
    if (max_planes == 0)
    {
        throw ConfigError("height.max_planes must be at least 1");
    }
}

std::vector<SupportPlane> pruneStale(std::vector<SupportPlane> planes, double now, double t_fade)
{
    std::erase_if(planes, [&](const SupportPlane& p) { return now - p.last_update > t_fade; });
    return planes;
}

HeightCorrectionResult correctHeight(double z_raw,
                                     std::vector<SupportPlane> planes,
                                     double now,
                                     const HeightParams& params)
{
    HeightCorrectionResult result;
    result.planes = pruneStale(std::move(planes), now, params.t_fade);

    std::optional<std::size_t> best;
    for (std::size_t n = 0; n < result.planes.size(); ++n)
    {
        const SupportPlane& cand = result.planes[n];
        const double dist = std::abs(z_raw - cand.height);
        if (dist > params.delta_h)
        {
            continue;
        }
        if (!best)
        {
            best = n;
            continue;
        }
        const SupportPlane& cur = result.planes[*best];
        const double cur_dist = std::abs(z_raw - cur.height);
        if (dist < cur_dist
            || (dist == cur_dist
                && (cand.weight > cur.weight
                    || (cand.weight == cur.weight && cand.height < cur.height))))
        {
            best = n;
        }
    }

    if (best)
    {
        SupportPlane& plane = result.planes[*best];
        const double diff = z_raw - plane.height;
        const double dz = std::abs(diff) <= params.delta_h / 10.0 ? 0.0 : diff;
        result.z = z_raw - dz;
        plane.weight = plane.weight * std::exp(-(now - plane.last_update) / (params.kappa * params.t_fade)) + 1.0;
        plane.last_update = now;
        result.matched = best;
        return result;
    }

    if (result.planes.size() >= params.max_planes)
    {
        // Evict the least confident record; the oldest one on ties.
        auto victim = std::min_element(result.planes.begin(), result.planes.end(),
                                       [](const SupportPlane& a, const SupportPlane& b) {
                                           return a.weight < b.weight
                                                  || (a.weight == b.weight && a.last_update < b.last_update);
                                       });
        result.planes.erase(victim);
    }
    result.planes.push_back({z_raw, 1.0, now});
    result.z = z_raw;
    return result;
}

SupportPlaneMap::SupportPlaneMap(HeightParams params)
    : m_params(params)
{
    m_params.validate();
}

double SupportPlaneMap::correct(double z_raw, double now)
{
    HeightCorrectionResult r = correctHeight(z_raw, std::move(m_planes), now, m_params);
    m_planes = std::move(r.planes);
    return r.z;
}

} // namespace legodom
