#include <legodom/config.hpp>

#include "text_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace legodom
{

namespace
{

bool parseBool(std::string_view key, std::string_view value)
{
    if (value == "true" || value == "1" || value == "on" || value == "yes")
    {
        return true;
    }
    if (value == "false" || value == "0" || value == "off" || value == "no")
    {
        return false;
    }
    throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

double parseNumber(std::string_view key, std::string_view value)
{
    const std::optional<double> v = detail::toDouble(value);
    if (!v)
    {
        throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(value) + "'");
    }
    return *v;
}

Vector3d parseVector(std::string_view key, std::string_view value)
{
    const std::vector<std::string_view> parts = detail::splitWhitespace(value);
    if (parts.size() != 3)
    {
        throw ConfigError("expected three numbers for " + std::string(key));
    }
    return {parseNumber(key, parts[0]), parseNumber(key, parts[1]), parseNumber(key, parts[2])};
}

std::size_t parseCount(std::string_view key, std::string_view value)
{
    const double v = parseNumber(key, value);
    if (v < 1.0 || v != std::floor(v) || v > 64.0)
    {
        throw ConfigError("invalid count for " + std::string(key));
    }
    return static_cast<std::size_t>(v);
}

void applyLegValue(LegGeometry& leg, std::string_view key, std::string_view field, std::string_view value)
{
    if (field == "hip_offset")
    {
        leg.hip_offset_len = parseNumber(key, value);
    }
    else if (field == "thigh")
    {
        leg.thigh_len = parseNumber(key, value);
    }
    else if (field == "calf")
    {
        leg.calf_len = parseNumber(key, value);
    }
    else if (field == "wheel_radius")
    {
        leg.wheel_radius = parseNumber(key, value);
    }
    else if (field == "side")
    {
        const double s = parseNumber(key, value);
        if (s != 1.0 && s != -1.0)
        {
            throw ConfigError(std::string(key) + " must be 1 or -1");
        }
        leg.side_sign = static_cast<int>(s);
    }
    else if (field == "hip_mount")
    {
        leg.hip_mount = parseVector(key, value);
    }
    else
    {
        throw ConfigError("unknown key: " + std::string(key));
    }
}

} // namespace

void applyConfigValue(EstimatorConfig& c, std::string_view key, std::string_view value)
{
    if (key.starts_with("leg."))
    {
        const std::string_view rest = key.substr(4);
        const std::size_t dot = rest.find('.');
        if (dot == std::string_view::npos)
        {
            throw ConfigError("unknown key: " + std::string(key));
        }
        const std::optional<double> index = detail::toDouble(rest.substr(0, dot));
        if (!index || *index < 0.0 || *index != std::floor(*index) || *index >= static_cast<double>(c.legs.size()))
        {
            throw ConfigError("leg index out of range in " + std::string(key));
        }
        applyLegValue(c.legs[static_cast<std::size_t>(*index)], key, rest.substr(dot + 1), value);
        return;
    }

    if (key == "legs")
    {
        const std::size_t n = parseCount(key, value);
        const LegGeometry templ = c.legs.empty() ? LegGeometry{} : c.legs.front();
        c.legs.resize(n, templ);
    }
    else if (key == "wheel_radius")
    {
        const double r = parseNumber(key, value);
        for (LegGeometry& leg : c.legs)
        {
            leg.wheel_radius = r;
        }
    }
    else if (key == "contact.f_th")
    {
        c.f_th = parseNumber(key, value);
    }
    else if (key == "kinematics.sigma_min")
    {
        c.sigma_min = parseNumber(key, value);
    }
    else if (key == "height.enabled")
    {
        c.height_enabled = parseBool(key, value);
    }
    else if (key == "height.delta_h")
    {
        c.height.delta_h = parseNumber(key, value);
    }
    else if (key == "height.t_fade")
    {
        c.height.t_fade = parseNumber(key, value);
    }
    else if (key == "height.kappa")
    {
        c.height.kappa = parseNumber(key, value);
    }
    else if (key == "height.max_planes")
    {
        c.height.max_planes = parseCount(key, value);
    }
    else if (key == "yaw.enabled")
    {
        c.yaw.enabled = parseBool(key, value);
    }
    else if (key == "yaw.imu_yaw_enabled")
    {
        c.yaw.imu_yaw_enabled = parseBool(key, value);
    }
    else if (key == "yaw.alpha0")
    {
        c.yaw.alpha0 = parseNumber(key, value);
    }
    else if (key == "yaw.ramp_time")
    {
        c.yaw.ramp_time = parseNumber(key, value);
    }
    else if (key == "yaw.min_baseline")
    {
        c.yaw.min_baseline = parseNumber(key, value);
    }
    else if (key == "ikvel.enabled")
    {
        c.ikvel.enabled = parseBool(key, value);
    }
    else if (key == "ikvel.q_pos")
    {
        c.ikvel.q_pos = parseNumber(key, value);
    }
    else if (key == "ikvel.q_vel")
    {
        c.ikvel.q_vel = parseNumber(key, value);
    }
    else if (key == "ikvel.r_angle")
    {
        c.ikvel.r_angle = parseNumber(key, value);
    }
    else if (key == "ikvel.r_rate")
    {
        c.ikvel.r_rate = parseNumber(key, value);
    }
    else if (key == "ikvel.dt_max")
    {
        c.ikvel.dt_max = parseNumber(key, value);
    }
    else if (key == "fusion.k_p")
    {
        c.fusion.k_p = parseNumber(key, value);
    }
    else if (key == "fusion.k_v")
    {
        c.fusion.k_v = parseNumber(key, value);
    }
    else if (key == "wheel.heading_eps")
    {
        c.heading_eps = parseNumber(key, value);
    }
    else if (key == "initial.position")
    {
        c.initial_position = parseVector(key, value);
    }
    else
    {
        throw ConfigError("unknown key: " + std::string(key));
    }
}

EstimatorConfig parseConfig(std::string_view text)
{
    EstimatorConfig config = EstimatorConfig::quadruped();
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
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try
        {
            applyConfigValue(config, detail::trim(content.substr(0, eq)), detail::trim(content.substr(eq + 1)));
        }
        catch (const ConfigError& e)
        {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

EstimatorConfig loadConfig(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parseConfig(buffer.str());
}

std::string formatConfig(const EstimatorConfig& c)
{
    std::ostringstream out;
    out.precision(17);
    const auto b = [](bool v) { return v ? "true" : "false"; };
    out << "legs = " << c.legs.size() << '\n';
    for (std::size_t i = 0; i < c.legs.size(); ++i)
    {
        const LegGeometry& leg = c.legs[i];
        out << "leg." << i << ".hip_offset = " << leg.hip_offset_len << '\n'
            << "leg." << i << ".thigh = " << leg.thigh_len << '\n'
            << "leg." << i << ".calf = " << leg.calf_len << '\n'
            << "leg." << i << ".wheel_radius = " << leg.wheel_radius << '\n'
            << "leg." << i << ".side = " << leg.side_sign << '\n'
            << "leg." << i << ".hip_mount = " << leg.hip_mount.x() << ' ' << leg.hip_mount.y() << ' '
            << leg.hip_mount.z() << '\n';
    }
    out << "contact.f_th = " << c.f_th << '\n'
        << "kinematics.sigma_min = " << c.sigma_min << '\n'
        << "height.enabled = " << b(c.height_enabled) << '\n'
        << "height.delta_h = " << c.height.delta_h << '\n'
        << "height.t_fade = " << c.height.t_fade << '\n'
        << "height.kappa = " << c.height.kappa << '\n'
        << "height.max_planes = " << c.height.max_planes << '\n'
        << "yaw.enabled = " << b(c.yaw.enabled) << '\n'
        << "yaw.imu_yaw_enabled = " << b(c.yaw.imu_yaw_enabled) << '\n'
        << "yaw.alpha0 = " << c.yaw.alpha0 << '\n'
        << "yaw.ramp_time = " << c.yaw.ramp_time << '\n'
        << "yaw.min_baseline = " << c.yaw.min_baseline << '\n'
        << "ikvel.enabled = " << b(c.ikvel.enabled) << '\n'
        << "ikvel.q_pos = " << c.ikvel.q_pos << '\n'
        << "ikvel.q_vel = " << c.ikvel.q_vel << '\n'
        << "ikvel.r_angle = " << c.ikvel.r_angle << '\n'
        << "ikvel.r_rate = " << c.ikvel.r_rate << '\n'
        << "ikvel.dt_max = " << c.ikvel.dt_max << '\n'
        << "fusion.k_p = " << c.fusion.k_p << '\n'
        << "fusion.k_v = " << c.fusion.k_v << '\n'
        << "wheel.heading_eps = " << c.heading_eps << '\n'
        << "initial.position = " << c.initial_position.x() << ' ' << c.initial_position.y() << ' '
        << c.initial_position.z() << '\n';
    return out.str();
}

} // namespace legodom
