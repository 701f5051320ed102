#include <legodom/contact_anchor.hpp>

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace legodom;

namespace
{

bool near(const Vector3d& a, const Vector3d& b, double tol)
{
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

} // namespace

TEST_SUITE("contact_anchor")
{
    TEST_CASE("gate uses an inclusive threshold on the supporting force")
    {
        CHECK(gateContact(-50.0, -20.0));
        CHECK_FALSE(gateContact(-10.0, -20.0));
        CHECK(gateContact(-20.0, -20.0));
    }

    TEST_CASE("gate is monotone in the vertical force")
    {
        bool prev = false;
        for (double f = 50.0; f >= -100.0; f -= 0.5)
        {
            const bool now = gateContact(f, -20.0);
            CHECK((now || !prev));
            prev = now;
        }
    }

    TEST_CASE("touchdown is the rising edge only")
    {
        CHECK(detectTouchdown(false, true));
        CHECK_FALSE(detectTouchdown(true, true));
        CHECK_FALSE(detectTouchdown(true, false));
        CHECK_FALSE(detectTouchdown(false, false));
    }

    TEST_CASE("record footfall")
    {
        const Vector3d foot(0.2, 0.1, -0.3);
        CHECK(near(recordFootfall(Vector3d::Zero(), Matrix3d::Identity(), foot), foot, 1e-15));
        CHECK(near(recordFootfall(Vector3d(1.0, 2.0, 0.3), Matrix3d::Identity(), foot), Vector3d(1.2, 2.1, 0.0),
                   1e-15));
        // Rotate then add: yaw 90 deg maps body x onto world y.
        const Matrix3d R = rotZ(kPi / 2);
        CHECK(near(recordFootfall(Vector3d::Zero(), R, Vector3d(0.2, 0.0, -0.3)), Vector3d(0.0, 0.2, -0.3), 1e-15));
    }

    TEST_CASE("anchored position observation")
    {
        const Vector3d foot(0.2, 0.1, -0.3);
        CHECK(near(anchoredPositionObs(Vector3d(1.0, 2.0, 0.3), Matrix3d::Identity(), foot), Vector3d(0.8, 1.9, 0.6),
                   1e-15));
        const Matrix3d R = rotZ(kPi / 2);
        CHECK(near(anchoredPositionObs(Vector3d(0.0, 0.2, -0.3), R, Vector3d(0.2, 0.0, -0.3)), Vector3d::Zero(), 1e-15));
    }

    TEST_CASE("record and observation are inverses")
    {
        const Vector3d p(1.5, -0.7, 0.31);
        const Matrix3d R = rpyToRotation(0.05, -0.1, 2.0);
        const Vector3d foot(0.19, -0.13, -0.29);
        CHECK(near(anchoredPositionObs(recordFootfall(p, R, foot), R, foot), p, 1e-15));
    }

    TEST_CASE("anchored velocity observation")
    {
        CHECK(near(anchoredVelocityObs(Matrix3d::Identity(), Vector3d::Zero(), Vector3d(0.3, 0.1, -0.3),
                                       Vector3d(-0.5, 0.0, 0.0)),
                   Vector3d(0.5, 0.0, 0.0), 1e-15));
        // omega x p = (0, 0.3, 0) for omega = z, p = (0.3, 0, -0.3).
        CHECK(near(anchoredVelocityObs(Matrix3d::Identity(), Vector3d(0.0, 0.0, 1.0), Vector3d(0.3, 0.0, -0.3),
                                       Vector3d::Zero()),
                   Vector3d(0.0, -0.3, 0.0), 1e-15));
    }

    TEST_CASE("fusion is the arithmetic mean")
    {
        const std::vector<Vector3d> pos{Vector3d(1.0, 0.0, 0.0), Vector3d(3.0, 0.0, 0.0)};
        const std::vector<Vector3d> vel{Vector3d(0.0, 1.0, 0.0), Vector3d(0.0, 3.0, 0.0)};
        const FusedObservation f = fuseObservations(pos, vel);
        CHECK(near(f.position, Vector3d(2.0, 0.0, 0.0), 1e-15));
        CHECK(near(f.velocity, Vector3d(0.0, 2.0, 0.0), 1e-15));
    }

    TEST_CASE("fusion of a single leg returns it")
    {
        const std::vector<Vector3d> pos{Vector3d(0.1, 0.2, 0.3)};
        const std::vector<Vector3d> vel{Vector3d(-1.0, 0.5, 0.25)};
        const FusedObservation f = fuseObservations(pos, vel);
        CHECK(f.position == pos[0]);
        CHECK(f.velocity == vel[0]);
    }

    TEST_CASE("fusion rejects empty and mismatched inputs")
    {
        const std::vector<Vector3d> none;
        const std::vector<Vector3d> one{Vector3d::Zero()};
        CHECK_THROWS_AS(fuseObservations(none, none), EmptyContactSet);
        CHECK_THROWS_AS(fuseObservations(one, none), std::invalid_argument);
    }

    TEST_CASE("fusion is permutation invariant and idempotent")
    {
        std::vector<Vector3d> pos{Vector3d(1.0, 2.0, 3.0), Vector3d(-1.0, 0.5, 2.0), Vector3d(0.25, 0.0, -1.0)};
        std::vector<Vector3d> vel = pos;
        const FusedObservation a = fuseObservations(pos, vel);
        std::reverse(pos.begin(), pos.end());
        std::reverse(vel.begin(), vel.end());
        const FusedObservation b = fuseObservations(pos, vel);
        CHECK(near(a.position, b.position, 1e-15));
        const std::vector<Vector3d> same(5, Vector3d(0.3, -0.2, 0.1));
        CHECK(near(fuseObservations(same, same).position, same[0], 1e-16));
    }

    TEST_CASE("contact set membership")
    {
        ContactSet c{{0, 2, 3}};
        CHECK(c.contains(2));
        CHECK_FALSE(c.contains(1));
        CHECK(c.size() == 3);
        CHECK_FALSE(c.empty());
    }
}
