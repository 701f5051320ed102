/**
 * @file log_io.hpp
 * @brief Sensor logs (JSON lines) and trajectory files (CSV).
 *
 * Log record, one per line:
 *   {"t": 0.002, "att": [w, x, y, z], "gyro": [x, y, z],
 *    "legs": [{"q": [3], "dq": [3], "tau": [3], "wheel": {"psi": a, "dpsi": b}}, ...]}
 * "wheel" is optional per leg. Blank lines are skipped.
 */

#pragma once

#include <legodom/estimator.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace legodom
{

class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what)
        , m_line(line)
    {
    }

    std::size_t line() const { return m_line; }

private:
    std::size_t m_line;
};

/// Parses one record. @p line_no only labels errors.
SensorFrame parseFrame(std::string_view line, std::size_t line_no = 1);

std::string formatFrame(const SensorFrame& frame);

std::vector<SensorFrame> readLog(std::istream& in);
std::vector<SensorFrame> readLog(const std::filesystem::path& path);

void writeLog(std::ostream& out, const std::vector<SensorFrame>& frames);
void writeLog(const std::filesystem::path& path, const std::vector<SensorFrame>& frames);

inline constexpr std::string_view kTrajectoryHeader = "stamp,x,y,z,roll,pitch,yaw,vx,vy,vz";

std::string formatTrajectoryRow(const BodyState& state);

void writeTrajectory(std::ostream& out, const std::vector<BodyState>& states);
void writeTrajectory(const std::filesystem::path& path, const std::vector<BodyState>& states);

std::vector<BodyState> readTrajectory(std::istream& in);
std::vector<BodyState> readTrajectory(const std::filesystem::path& path);

} // namespace legodom
