// legodom: replay sensor logs, run simulator presets, compute closure metrics.

#include <legodom/config.hpp>
#include <legodom/gait_sim.hpp>
#include <legodom/log_io.hpp>
#include <legodom/metrics.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{

constexpr int kExitFailure = 1;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;

legodom::EstimatorConfig configFrom(const std::string& path)
{
    return path.empty() ? legodom::EstimatorConfig::quadruped() : legodom::loadConfig(path);
}

struct ReplayResult
{
    std::vector<legodom::BodyState> states;
    nlohmann::json final_diagnostics;
};

ReplayResult replay(const std::vector<legodom::SensorFrame>& frames, legodom::EstimatorConfig config,
                    std::ostream* diag)
{
    legodom::Estimator estimator(std::move(config));
    ReplayResult result;
    result.states.reserve(frames.size());
    for (const legodom::SensorFrame& frame : frames)
    {
        result.states.push_back(estimator.step(frame));
        if (diag)
        {
            *diag << estimator.diagnostics().dump() << '\n';
        }
    }
    result.final_diagnostics = estimator.diagnostics();
    return result;
}

int runReplay(const std::string& log_path, const std::string& config_path, const std::string& out_path, bool diag)
{
    legodom::EstimatorConfig config = configFrom(config_path);
    const std::vector<legodom::SensorFrame> frames = legodom::readLog(log_path);
    if (frames.empty())
    {
        std::cerr << "warning: " << log_path << " contains no frames\n";
    }

    std::ofstream diag_out;
    if (diag)
    {
        diag_out.open(out_path + ".diag.jsonl");
        if (!diag_out)
        {
            throw std::runtime_error("cannot write diagnostics next to " + out_path);
        }
    }
    const ReplayResult result = replay(frames, std::move(config), diag ? &diag_out : nullptr);
    legodom::writeTrajectory(out_path, result.states);
    return 0;
}

int runSimulate(const std::string& preset, const std::string& plan_path, const std::string& out_path,
                const std::string& truth_path, const std::string& config_out, std::uint64_t seed)
{
    const legodom::GaitPlan plan = plan_path.empty() ? legodom::presetPlan(preset) : legodom::loadPlan(plan_path);
    legodom::GaitRun run = legodom::generateGait(plan, seed);
    const std::vector<legodom::SensorFrame> frames =
        legodom::degrade(std::move(run.frames), plan.imperfections, seed);
    legodom::writeLog(out_path, frames);
    if (!truth_path.empty())
    {
        legodom::writeTrajectory(truth_path, run.truth);
    }
    if (!config_out.empty())
    {
        std::ofstream out(config_out);
        if (!out)
        {
            throw std::runtime_error("cannot write " + config_out);
        }
        out << legodom::formatConfig(legodom::estimatorConfigFor(plan, run));
    }
    std::cerr << plan.name << ": " << frames.size() << " frames, " << frames.back().stamp << " s\n";
    return 0;
}

int runMetrics(const std::string& trajectory_path, const std::string& truth_path)
{
    const std::vector<legodom::BodyState> trajectory = legodom::readTrajectory(trajectory_path);
    std::vector<legodom::BodyState> truth;
    if (!truth_path.empty())
    {
        truth = legodom::readTrajectory(truth_path);
    }
    const legodom::TrajectoryMetrics m = legodom::computeMetrics(trajectory, truth_path.empty() ? nullptr : &truth);
    std::cout << legodom::toJson(m).dump(2) << '\n';
    return 0;
}

int runInspect(const std::string& log_path, const std::string& config_path)
{
    legodom::EstimatorConfig config = configFrom(config_path);
    const std::vector<legodom::SensorFrame> frames = legodom::readLog(log_path);
    const ReplayResult result = replay(frames, std::move(config), nullptr);
    nlohmann::json out = result.final_diagnostics;
    out["frames"] = frames.size();
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contact-anchored leg odometry: replay, simulate, metrics, inspect"};
    app.require_subcommand(1);

    std::string log_path;
    std::string config_path;
    std::string out_path = "trajectory.csv";
    std::string truth_path;
    std::string preset = "flat_loop";
    std::string plan_path;
    std::string config_out;
    std::string trajectory_path;
    std::uint64_t seed = 0;
    bool no_diag = false;

    CLI::App* replay_cmd = app.add_subcommand("replay", "Run a sensor log through the estimator");
    replay_cmd->add_option("--log", log_path, "JSON-lines sensor log")->required();
    replay_cmd->add_option("--config", config_path, "Estimator configuration file");
    replay_cmd->add_option("--out", out_path, "Trajectory CSV to write")->capture_default_str();
    replay_cmd->add_flag("--no-diag", no_diag, "Skip the <out>.diag.jsonl diagnostics file");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic log from a preset or plan file");
    sim_cmd->add_option("--preset", preset, "Built-in plan")
        ->check(CLI::IsMember(legodom::presetNames()))
        ->capture_default_str();
    sim_cmd->add_option("--plan", plan_path, "Plan file (overrides --preset)");
    sim_cmd->add_option("--out", out_path, "Sensor log to write")->required();
    sim_cmd->add_option("--ground-truth", truth_path, "Ground-truth trajectory CSV to write");
    sim_cmd->add_option("--config-out", config_out, "Write a matching estimator configuration");
    sim_cmd->add_option("--seed", seed, "Seed for noise and imperfections")->capture_default_str();

    CLI::App* metrics_cmd = app.add_subcommand("metrics", "Closure metrics of a trajectory");
    metrics_cmd->add_option("--trajectory", trajectory_path, "Trajectory CSV")->required();
    metrics_cmd->add_option("--ground-truth", truth_path, "Ground-truth trajectory CSV");

    CLI::App* inspect_cmd = app.add_subcommand("inspect", "Replay a log and dump final planes and anchors");
    inspect_cmd->add_option("--log", log_path, "JSON-lines sensor log")->required();
    inspect_cmd->add_option("--config", config_path, "Estimator configuration file");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*replay_cmd)
        {
            return runReplay(log_path, config_path, out_path, !no_diag);
        }
        if (*sim_cmd)
        {
            return runSimulate(preset, plan_path, out_path, truth_path, config_out, seed);
        }
        if (*metrics_cmd)
        {
            return runMetrics(trajectory_path, truth_path);
        }
        return runInspect(log_path, config_path);
    }
    catch (const legodom::ParseError& e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitParse;
    }
    catch (const legodom::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
