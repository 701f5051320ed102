#include <legodom/estimator.hpp>
#include <legodom/gait_sim.hpp>

#include <doctest.h>

#include <vector>

using namespace legodom;

namespace
{

struct Replay
{
    std::vector<BodyState> states;
    nlohmann::json last_diag;
};

Replay replay(const std::vector<SensorFrame>& frames, const EstimatorConfig& config)
{
    Estimator est(config);
    Replay out;
    for (const SensorFrame& f : frames)
    {
        out.states.push_back(est.step(f));
    }
    out.last_diag = est.diagnostics();
    return out;
}

const char* kLongWalk = "name = long_walk\n"
                        "speed = 0.5\n"
                        "walk = 8 0\n"
                        "walk = 0 0\n"
                        "turn = 180\n";

/// Joint torques that put weight / n on every foot of a standing robot.
SensorFrame standingFrame(const std::vector<LegGeometry>& legs, const Vector3d& q, double stamp,
                          const Quaterniond& attitude, double load)
{
    SensorFrame f;
    f.stamp = stamp;
    f.imu_attitude = attitude;
    const Matrix3d R = attitude.toRotationMatrix();
    for (const LegGeometry& g : legs)
    {
        JointReading jr;
        jr.q = Vector3d(g.side_sign * q[0], q[1], q[2]);
        jr.tau = legJacobian(jr.q, g).transpose() * (R.transpose() * Vector3d(0.0, 0.0, -load));
        f.legs.push_back(jr);
    }
    return f;
}

} // namespace

TEST_SUITE("estimator")
{
    TEST_CASE("prediction only")
    {
        BodyState s;
        s.velocity = Vector3d(1.0, 0.0, 0.0);
        const BodyState a = predictOnly(s, 0.01, Vector3d::Zero());
        CHECK((a.position - Vector3d(0.01, 0.0, 0.0)).norm() <= 1e-16);
        CHECK(a.velocity == s.velocity);
        CHECK(a.roll == 0.0);
        CHECK(a.pitch == 0.0);
        CHECK(a.yaw == 0.0);
        CHECK(a.stamp == doctest::Approx(0.01));

        const BodyState b = predictOnly(s, 0.01, Vector3d(0.0, 0.0, 1.0));
        CHECK(b.yaw == doctest::Approx(0.01).epsilon(1e-12));
        CHECK_THROWS_AS(predictOnly(s, 0.0, Vector3d::Zero()), std::invalid_argument);
    }

    TEST_CASE("stamps must increase and leg counts must match")
    {
        const EstimatorConfig cfg = EstimatorConfig::quadruped();
        Estimator est(cfg);
        const SensorFrame f = standingFrame(cfg.legs, Vector3d(0.0, 0.7, -1.4), 1.0, Quaterniond::Identity(), 36.0);
        est.step(f);
        CHECK_THROWS_AS(est.step(f), std::invalid_argument);
        SensorFrame g = f;
        g.stamp = 2.0;
        g.legs.pop_back();
        CHECK_THROWS_AS(est.step(g), std::invalid_argument);
    }

    TEST_CASE("long zero-noise walk tracks the ground truth")
    {
        const GaitPlan plan = parsePlan(kLongWalk);
        const GaitRun run = generateGait(plan);
        REQUIRE(run.frames.back().stamp >= 60.0);
        const Replay r = replay(run.frames, estimatorConfigFor(plan, run));

        double worst = 0.0;
        for (std::size_t k = 0; k < r.states.size(); ++k)
        {
            worst = std::max(worst, (r.states[k].position - run.truth[k].position).norm());
            CHECK(r.states[k].stamp == run.frames[k].stamp);
        }
        MESSAGE("worst per-sample position error " << worst);
        CHECK(worst <= 1e-9);
        CHECK((r.states.back().position - run.truth.back().position).norm() <= 1e-6);
    }

    TEST_CASE("ikvel changes only the velocity path at zero noise")
    {
        const GaitPlan plan = presetPlan("flat_loop");
        const GaitRun run = generateGait(plan);
        EstimatorConfig off = estimatorConfigFor(plan, run);
        EstimatorConfig on = off;
        on.ikvel.enabled = true;
        const Replay a = replay(run.frames, off);
        const Replay b = replay(run.frames, on);
        double worst = 0.0;
        for (std::size_t k = 0; k < a.states.size(); ++k)
        {
            worst = std::max(worst, (a.states[k].position - b.states[k].position).norm());
        }
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("stance velocity observation matches the truth")
    {
        const GaitPlan plan = presetPlan("flat_loop");
        const GaitRun run = generateGait(plan);
        EstimatorConfig cfg = estimatorConfigFor(plan, run);
        cfg.fusion.k_v = 1.0;
        const Replay r = replay(run.frames, cfg);
        double worst = 0.0;
        for (std::size_t k = 0; k < r.states.size(); ++k)
        {
            worst = std::max(worst, (r.states[k].velocity - run.truth[k].velocity).norm());
        }
        MESSAGE("worst velocity error " << worst);
        CHECK(worst <= 1e-9);
    }

    TEST_CASE("airborne window propagates and reconnects continuously")
    {
        const GaitPlan plan = presetPlan("flat_loop");
        GaitRun run = generateGait(plan);
        const std::size_t begin = 2000;
        const std::size_t end = 2100;
        for (std::size_t k = begin; k < end; ++k)
        {
            for (JointReading& jr : run.frames[k].legs)
            {
                jr.tau.setZero();
            }
        }
        Estimator est(estimatorConfigFor(plan, run));
        BodyState prev;
        for (std::size_t k = 0; k < run.frames.size(); ++k)
        {
            const BodyState s = est.step(run.frames[k]);
            if (k > begin && k < end)
            {
                CHECK(est.contacts().empty());
                const double dt = s.stamp - prev.stamp;
                CHECK((s.position - (prev.position + prev.velocity * dt)).norm() <= 1e-12);
                CHECK(s.velocity == prev.velocity);
            }
            if (k == end)
            {
                // First frame back on the ground: no jump beyond one prediction step.
                const double dt = s.stamp - prev.stamp;
                CHECK((s.position - (prev.position + prev.velocity * dt)).norm() <= 1e-12);
            }
            prev = s;
        }
    }

    TEST_CASE("diagnostics record")
    {
        const GaitPlan plan = presetPlan("flat_loop");
        const GaitRun run = generateGait(plan);
        const std::vector<SensorFrame> head(run.frames.begin(), run.frames.begin() + 800);
        const Replay r = replay(head, estimatorConfigFor(plan, run));
        const nlohmann::json& d = r.last_diag;
        for (const char* key : {"t", "contacts", "force_z", "anchors", "planes", "yaw"})
        {
            CHECK(d.contains(key));
        }
        CHECK(d["anchors"].size() == 4);
        CHECK(d["yaw"].contains("alpha"));
        CHECK(d["yaw"].contains("yaw_kin"));
        CHECK(d["planes"].size() >= 1);
    }

    TEST_CASE("full support means every configured leg")
    {
        // Biped: two feet in contact ramp the gain to one.
        EstimatorConfig cfg = EstimatorConfig::quadruped();
        cfg.legs.resize(2);
        cfg.yaw.ramp_time = 1.0;
        const Vector3d q(0.0, 0.7, -1.4);
        Estimator est(cfg);
        double alpha = 0.0;
        for (int k = 0; k <= 1000; ++k)
        {
            // The IMU reports a yaw that keeps drifting; the feet do not move.
            const double yaw_imu = 0.001 * k;
            const Quaterniond att(Eigen::AngleAxisd(yaw_imu, Vector3d::UnitZ()));
            est.step(standingFrame(cfg.legs, q, 0.002 * k, att, 73.5));
            alpha = est.diagnostics()["yaw"]["alpha"].get<double>();
        }
        CHECK(est.contacts().size() == 2);
        CHECK(alpha == 1.0);
        // Heading pinned to the stance geometry, not the drifting IMU.
        CHECK(std::abs(est.state().yaw) <= 1e-9);
    }

    TEST_CASE("configuration validation")
    {
        EstimatorConfig cfg = EstimatorConfig::quadruped();
        CHECK_NOTHROW(cfg.validate());
        cfg.fusion.k_p = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = EstimatorConfig::quadruped();
        cfg.legs.clear();
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = EstimatorConfig::quadruped();
        cfg.yaw.alpha0 = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}
