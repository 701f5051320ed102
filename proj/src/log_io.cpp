#include <legodom/log_io.hpp>

#include "text_util.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace legodom
{

namespace
{

using nlohmann::json;

Vector3d vec3(const json& j, const char* key, std::size_t line_no)
{
    const auto it = j.find(key);
    if (it == j.end())
    {
        throw ParseError(line_no, std::string("missing field '") + key + "'");
    }
    if (!it->is_array() || it->size() != 3)
    {
        throw ParseError(line_no, std::string("field '") + key + "' must be an array of 3 numbers");
    }
    Vector3d v;
    for (std::size_t k = 0; k < 3; ++k)
    {
        if (!(*it)[k].is_number())
        {
            throw ParseError(line_no, std::string("field '") + key + "' must be an array of 3 numbers");
        }
        v[static_cast<Eigen::Index>(k)] = (*it)[k].get<double>();
    }
    return v;
}

double number(const json& j, const char* key, std::size_t line_no)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number())
    {
        throw ParseError(line_no, std::string("field '") + key + "' must be a number");
    }
    return it->get<double>();
}

json toJson(const Vector3d& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

} // namespace

SensorFrame parseFrame(std::string_view line, std::size_t line_no)
{
    json j;
    try
    {
        j = json::parse(line);
    }
    catch (const json::parse_error& e)
    {
        throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object())
    {
        throw ParseError(line_no, "record must be a JSON object");
    }

    SensorFrame frame;
    frame.stamp = number(j, "t", line_no);

    const auto att = j.find("att");
    if (att == j.end() || !att->is_array() || att->size() != 4)
    {
        throw ParseError(line_no, "field 'att' must be a quaternion [w, x, y, z]");
    }
    double wxyz[4];
    for (std::size_t k = 0; k < 4; ++k)
    {
        if (!(*att)[k].is_number())
        {
            throw ParseError(line_no, "field 'att' must be a quaternion [w, x, y, z]");
        }
        wxyz[k] = (*att)[k].get<double>();
    }
    frame.imu_attitude = Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    if (!(frame.imu_attitude.norm() > 0.0))
    {
        throw ParseError(line_no, "attitude quaternion has zero norm");
    }
    frame.imu_gyro = vec3(j, "gyro", line_no);

    const auto legs = j.find("legs");
    if (legs == j.end() || !legs->is_array())
    {
        throw ParseError(line_no, "field 'legs' must be an array");
    }
    bool any_wheel = false;
    for (const json& leg : *legs)
    {
        if (!leg.is_object())
        {
            throw ParseError(line_no, "leg entries must be objects");
        }
        frame.legs.push_back({vec3(leg, "q", line_no), vec3(leg, "dq", line_no), vec3(leg, "tau", line_no)});
        const auto wheel = leg.find("wheel");
        if (wheel != leg.end() && !wheel->is_null())
        {
            if (!wheel->is_object())
            {
                throw ParseError(line_no, "field 'wheel' must be an object");
            }
            frame.wheels.resize(frame.legs.size());
            frame.wheels.back() = WheelReading{number(*wheel, "psi", line_no), number(*wheel, "dpsi", line_no)};
            any_wheel = true;
        }
    }
    if (any_wheel)
    {
        frame.wheels.resize(frame.legs.size());
    }
    return frame;
}

std::string formatFrame(const SensorFrame& frame)
{
    json legs = json::array();
    for (std::size_t i = 0; i < frame.legs.size(); ++i)
    {
        const JointReading& r = frame.legs[i];
        json leg = {{"q", toJson(r.q)}, {"dq", toJson(r.dq)}, {"tau", toJson(r.tau)}};
        if (i < frame.wheels.size() && frame.wheels[i])
        {
            leg["wheel"] = {{"psi", frame.wheels[i]->psi}, {"dpsi", frame.wheels[i]->dpsi}};
        }
        legs.push_back(std::move(leg));
    }
    const Quaterniond& a = frame.imu_attitude;
    const json j = {{"t", frame.stamp},
                    {"att", json::array({a.w(), a.x(), a.y(), a.z()})},
                    {"gyro", toJson(frame.imu_gyro)},
                    {"legs", std::move(legs)}};
    return j.dump();
}

std::vector<SensorFrame> readLog(std::istream& in)
{
    std::vector<SensorFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (detail::trim(line).empty())
        {
            continue;
        }
        frames.push_back(parseFrame(line, line_no));
    }
    return frames;
}

std::vector<SensorFrame> readLog(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open log file " + path.string());
    }
    return readLog(in);
}

void writeLog(std::ostream& out, const std::vector<SensorFrame>& frames)
{
    for (const SensorFrame& frame : frames)
    {
        out << formatFrame(frame) << '\n';
    }
}

void writeLog(const std::filesystem::path& path, const std::vector<SensorFrame>& frames)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write log file " + path.string());
    }
    writeLog(out, frames);
}

std::string formatTrajectoryRow(const BodyState& s)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", s.stamp,
                  s.position.x(), s.position.y(), s.position.z(), s.roll, s.pitch, s.yaw, s.velocity.x(),
                  s.velocity.y(), s.velocity.z());
    return buf;
}

void writeTrajectory(std::ostream& out, const std::vector<BodyState>& states)
{
    out << kTrajectoryHeader << '\n';
    for (const BodyState& s : states)
    {
        out << formatTrajectoryRow(s) << '\n';
    }
}

void writeTrajectory(const std::filesystem::path& path, const std::vector<BodyState>& states)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write trajectory file " + path.string());
    }
    writeTrajectory(out, states);
}

std::vector<BodyState> readTrajectory(std::istream& in)
{
    std::vector<BodyState> states;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const std::string_view content = detail::trim(line);
        if (content.empty())
        {
            continue;
        }
        if (line_no == 1)
        {
            if (content != kTrajectoryHeader)
            {
                throw ParseError(line_no, "unexpected trajectory header");
            }
            continue;
        }
        const std::vector<std::string_view> cells = detail::splitChar(content, ',');
        if (cells.size() != 10)
        {
            throw ParseError(line_no, "expected 10 columns");
        }
        double v[10];
        for (std::size_t k = 0; k < 10; ++k)
        {
            const std::optional<double> d = detail::toDouble(cells[k]);
            if (!d)
            {
                throw ParseError(line_no, "invalid number '" + std::string(cells[k]) + "'");
            }
            v[k] = *d;
        }
        BodyState s;
        s.stamp = v[0];
        s.position = {v[1], v[2], v[3]};
        s.roll = v[4];
        s.pitch = v[5];
        s.yaw = v[6];
        s.velocity = {v[7], v[8], v[9]};
        states.push_back(s);
    }
    return states;
}

std::vector<BodyState> readTrajectory(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open trajectory file " + path.string());
    }
    return readTrajectory(in);
}

} // namespace legodom
