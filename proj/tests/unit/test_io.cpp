#include <legodom/config.hpp>
#include <legodom/log_io.hpp>
#include <legodom/metrics.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef LEGODOM_CLI_PATH
#define LEGODOM_CLI_PATH "legodom"
#endif

using namespace legodom;

namespace
{

SensorFrame sampleFrame(double t, bool wheels)
{
    SensorFrame f;
    f.stamp = t;
    f.imu_attitude = Quaterniond(Eigen::AngleAxisd(0.3, Vector3d(0.1, 0.2, 0.9).normalized()));
    f.imu_gyro = Vector3d(0.01, -0.02, 0.1 / 3.0);
    for (int i = 0; i < 4; ++i)
    {
        JointReading jr;
        jr.q = Vector3d(0.1 * i, 0.7, -1.4 + 1e-17);
        jr.dq = Vector3d(1.0 / 7.0, -2.0, 0.0);
        jr.tau = Vector3d(0.5, -3.25, 7.0 / 3.0);
        f.legs.push_back(jr);
        if (wheels)
        {
            f.wheels.push_back(i == 2 ? std::nullopt : std::optional<WheelReading>(WheelReading{3.1, 12.5}));
        }
    }
    return f;
}

BodyState state(double t, double x, double y, double z)
{
    BodyState s;
    s.stamp = t;
    s.position = Vector3d(x, y, z);
    return s;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "legodom_unit_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

int runCli(const std::string& args)
{
    const std::string cmd = std::string("\"") + LEGODOM_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_SUITE("io")
{
    TEST_CASE("log records round-trip bit-exactly")
    {
        for (bool wheels : {false, true})
        {
            const SensorFrame f = sampleFrame(1.0 / 3.0, wheels);
            const SensorFrame g = parseFrame(formatFrame(f));
            CHECK(g.stamp == f.stamp);
            CHECK(g.imu_attitude.coeffs() == f.imu_attitude.coeffs());
            CHECK(g.imu_gyro == f.imu_gyro);
            REQUIRE(g.legs.size() == 4);
            for (std::size_t i = 0; i < 4; ++i)
            {
                CHECK(g.legs[i].q == f.legs[i].q);
                CHECK(g.legs[i].dq == f.legs[i].dq);
                CHECK(g.legs[i].tau == f.legs[i].tau);
            }
            CHECK(g.wheels.size() == f.wheels.size());
            if (wheels)
            {
                CHECK_FALSE(g.wheels[2].has_value());
                REQUIRE(g.wheels[0].has_value());
                CHECK(g.wheels[0]->psi == 3.1);
                CHECK(g.wheels[0]->dpsi == 12.5);
            }
            CHECK(formatFrame(g) == formatFrame(f));
        }
    }

    TEST_CASE("log errors carry the line number")
    {
        std::stringstream s;
        s << formatFrame(sampleFrame(0.0, false)) << "\n\n" << formatFrame(sampleFrame(0.1, false)) << "\n"
          << "{\"t\": 0.2, \"att\": [1,0,0,0], \"gyro\": [0,0]}\n";
        try
        {
            readLog(s);
            FAIL("expected ParseError");
        }
        catch (const ParseError& e)
        {
            CHECK(e.line() == 4);
        }
        CHECK_THROWS_AS(parseFrame("not json"), ParseError);
        CHECK_THROWS_AS(parseFrame("{\"t\": 0, \"att\": [0,0,0,0], \"gyro\": [0,0,0], \"legs\": []}"), ParseError);
    }

    TEST_CASE("empty log reads as no frames")
    {
        std::stringstream s("\n\n");
        CHECK(readLog(s).empty());
    }

    TEST_CASE("trajectory csv round-trip")
    {
        std::vector<BodyState> states{state(0.0, 0.1, 0.2, 0.3), state(0.002, 1.0 / 3.0, -2.0 / 7.0, 1e-300)};
        states[1].yaw = -kPi;
        states[1].velocity = Vector3d(0.5, 1e-17, -3.0);
        std::stringstream s;
        writeTrajectory(s, states);
        CHECK(s.str().rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
        const auto back = readTrajectory(s);
        REQUIRE(back.size() == 2);
        CHECK(back[1].position == states[1].position);
        CHECK(back[1].velocity == states[1].velocity);
        CHECK(back[1].yaw == states[1].yaw);
        CHECK(back[1].stamp == states[1].stamp);

        std::stringstream bad("stamp,x\n1,2\n");
        CHECK_THROWS_AS(readTrajectory(bad), ParseError);
        std::stringstream short_row(std::string(kTrajectoryHeader) + "\n1,2,3\n");
        CHECK_THROWS_AS(readTrajectory(short_row), ParseError);
    }

    TEST_CASE("config parsing")
    {
        const EstimatorConfig c = parseConfig("# tuned\ncontact.f_th = -35\nheight.delta_h = 0.03\n"
                                              "yaw.alpha0 = 0.05\nikvel.enabled = true\n"
                                              "leg.1.wheel_radius = 0.05\ninitial.position = 1 2 0.3\n");
        CHECK(c.f_th == -35.0);
        CHECK(c.height.delta_h == 0.03);
        CHECK(c.yaw.alpha0 == 0.05);
        CHECK(c.ikvel.enabled);
        CHECK(c.legs.at(1).wheel_radius == 0.05);
        CHECK(c.initial_position == Vector3d(1.0, 2.0, 0.3));
    }

    TEST_CASE("config errors")
    {
        CHECK_THROWS_AS(parseConfig("no_such.key = 1\n"), ConfigError);
        CHECK_THROWS_AS(parseConfig("contact.f_th = abc\n"), ConfigError);
        CHECK_THROWS_AS(parseConfig("height.delta_h = -1\n"), ConfigError);
        CHECK_THROWS_AS(parseConfig("just text\n"), ConfigError);
        try
        {
            parseConfig("\n\nyaw.ramp_time = 0\n");
            FAIL("expected ConfigError");
        }
        catch (const ConfigError& e)
        {
            CHECK(std::string(e.what()).find("ramp_time") != std::string::npos);
        }
        try
        {
            parseConfig("yaw.alpha0 = 0.1\nbogus = 1\n");
            FAIL("expected ConfigError");
        }
        catch (const ConfigError& e)
        {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }

    TEST_CASE("formatted config parses back to the same config")
    {
        EstimatorConfig c = EstimatorConfig::quadruped();
        c.f_th = -1.0 / 3.0;
        c.ikvel.q_vel = 0.123456789012345;
        c.legs[3].wheel_radius = 0.04;
        c.initial_position = Vector3d(0.1, 0.2, 0.3);
        const std::string text = formatConfig(c);
        CHECK(formatConfig(parseConfig(text)) == text);
        CHECK(parseConfig(text).f_th == c.f_th);
    }

    TEST_CASE("metrics")
    {
        CHECK(planarClosure(1.61, 1.52) == doctest::Approx(2.2141590).epsilon(1e-7));
        CHECK(planarClosure(3.0, 4.0) == 5.0);

        const std::vector<BodyState> loop{state(0, 1, 1, 0.3), state(1, 5, 2, 0.4), state(2, 4.0, 3.0, 0.25)};
        const TrajectoryMetrics m = computeMetrics(loop);
        CHECK(m.e_xy == doctest::Approx(std::hypot(3.0, 2.0)));
        CHECK(m.e_z == doctest::Approx(0.05));
        CHECK_FALSE(m.mae.has_value());

        const TrajectoryMetrics self = computeMetrics(loop, &loop);
        REQUIRE(self.mae.has_value());
        CHECK(self.mae->norm() == 0.0);
        CHECK(*self.terminal_error == 0.0);

        std::vector<BodyState> shifted = loop;
        for (BodyState& s : shifted)
        {
            s.position += Vector3d(100.0, -50.0, 7.0);
        }
        CHECK(computeMetrics(shifted).e_xy == doctest::Approx(m.e_xy).epsilon(1e-12));

        const std::vector<BodyState> one{state(0, 1, 2, 3)};
        CHECK(computeMetrics(one).e_xy == 0.0);
        CHECK_THROWS(computeMetrics({}));
        CHECK_THROWS(computeMetrics(loop, &one));

        const nlohmann::json j = toJson(self);
        CHECK(j.contains("e_xy"));
        CHECK(j.contains("mae"));
    }

    TEST_CASE("cli exit codes")
    {
        const auto log = scratch("bad.jsonl");
        std::ofstream(log) << formatFrame(sampleFrame(0.0, false)) << "\n{broken\n";
        CHECK(runCli("replay --log " + log.string() + " --out " + scratch("bad.csv").string()) == 2);

        const auto cfg = scratch("bad.cfg");
        std::ofstream(cfg) << "unknown.key = 1\n";
        const auto good = scratch("good.jsonl");
        std::ofstream(good) << formatFrame(sampleFrame(0.0, false)) << "\n" << formatFrame(sampleFrame(0.002, false))
                            << "\n";
        CHECK(runCli("replay --log " + good.string() + " --config " + cfg.string() + " --out " +
                     scratch("c.csv").string()) == 3);
        CHECK(runCli("replay --log " + good.string() + " --out " + scratch("ok.csv").string()) == 0);
        CHECK(readTrajectory(scratch("ok.csv")).size() == 2);
        CHECK(std::filesystem::exists(scratch("ok.csv.diag.jsonl")));
        CHECK(runCli("replay --log " + scratch("missing.jsonl").string()) != 0);
        CHECK(runCli("simulate --preset nope --out " + scratch("x.jsonl").string()) != 0);
    }

    TEST_CASE("empty log gives a header-only trajectory")
    {
        const auto log = scratch("empty.jsonl");
        std::ofstream(log) << "";
        const auto out = scratch("empty.csv");
        CHECK(runCli("replay --log " + log.string() + " --out " + out.string()) == 0);
        std::ifstream in(out);
        std::stringstream text;
        text << in.rdbuf();
        CHECK(text.str() == std::string(kTrajectoryHeader) + "\n");
    }
}
