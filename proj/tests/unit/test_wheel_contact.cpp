#include <legodom/wheel_contact.hpp>

#include <doctest.h>

#include <random>

using namespace legodom;

TEST_SUITE("wheel_contact")
{
    TEST_CASE("effective increment removes the shank pitch change")
    {
        // Pure leg swing: encoder follows the shank, no rolling.
        CHECK(std::abs(effectiveRollIncrement(0.1, 0.0, 0.0, 0.0, 0.3, -0.9, 0.2, -0.9)) <= 1e-15);
        CHECK(effectiveRollIncrement(0.2, 0.0, 0.0, 0.0, 0.3, -0.9, 0.3, -0.9) == doctest::Approx(0.2));
        // Body pitch counts towards the shank angle.
        CHECK(std::abs(effectiveRollIncrement(0.05, 0.0, 0.05, 0.0, 0.3, -0.9, 0.3, -0.9)) <= 1e-15);
    }

    TEST_CASE("encoder wrap is resolved to the short increment")
    {
        const double d = effectiveRollIncrement(-3.1, 3.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        // -6.2 + 2 pi
        CHECK(d == doctest::Approx(2.0 * kPi - 6.2).epsilon(1e-12));
        CHECK(d == doctest::Approx(0.0831853).epsilon(1e-6));
    }

    TEST_CASE("wrap is idempotent and bounded")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        for (int n = 0; n < 1000; ++n)
        {
            const double w = wrapAngle(u(rng));
            CHECK(w > -kPi);
            CHECK(w <= kPi);
            CHECK(wrapAngle(w) == w);
        }
        CHECK(wrapAngle(-kPi) == kPi);
    }

    TEST_CASE("heading direction")
    {
        const auto h0 = headingDirection(Matrix3d::Identity());
        REQUIRE(h0);
        CHECK((*h0 - Vector3d(1.0, 0.0, 0.0)).norm() <= 1e-15);

        const auto h90 = headingDirection(rotZ(kPi / 2));
        REQUIRE(h90);
        CHECK((*h90 - Vector3d(0.0, 1.0, 0.0)).norm() <= 1e-15);

        CHECK_FALSE(headingDirection(rotY(kPi / 2)).has_value());
        CHECK_FALSE(headingDirection(rotY(-kPi / 2)).has_value());
    }

    TEST_CASE("heading ignores pitch away from the singularity")
    {
        const auto h = headingDirection(rpyToRotation(0.0, 0.4, 0.7));
        REQUIRE(h);
        CHECK((*h - Vector3d(std::cos(0.7), std::sin(0.7), 0.0)).norm() <= 1e-15);
        CHECK(h->norm() == doctest::Approx(1.0));
    }

    TEST_CASE("contact propagation")
    {
        const Vector3d h(1.0, 0.0, 0.0);
        const Vector3d p = propagateContact(Vector3d::Zero(), 0.2, 0.05, h);
        CHECK((p - Vector3d(0.01, 0.0, 0.0)).norm() <= 1e-16);
        // Point foot: nothing moves.
        const Vector3d a(0.3, -0.4, 0.12);
        CHECK(propagateContact(a, 0.7, 0.0, h) == a);
        // Degenerate heading skips the cycle.
        CHECK(propagateContact(a, 0.7, 0.05, std::nullopt) == a);
    }

    TEST_CASE("propagation preserves the anchor height exactly")
    {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int n = 0; n < 200; ++n)
        {
            const Vector3d a(u(rng), u(rng), u(rng));
            const auto h = headingDirection(rpyToRotation(0.3 * u(rng), 0.3 * u(rng), 3.0 * u(rng)));
            REQUIRE(h);
            CHECK(propagateContact(a, u(rng), 0.05, h).z() == a.z());
        }
    }

    TEST_CASE("rolling velocity")
    {
        const Vector3d h(1.0, 0.0, 0.0);
        CHECK((rollingVelocity(4.0, 0.0, 0.0, 0.05, h) - Vector3d(0.2, 0.0, 0.0)).norm() <= 1e-15);
        CHECK(rollingVelocity(0.7, 0.5, 0.2, 0.05, h).norm() <= 1e-16);
        CHECK(rollingVelocity(4.0, 0.0, 0.0, 0.0, h).norm() == 0.0);
        CHECK(rollingVelocity(4.0, 0.0, 0.0, 0.05, std::nullopt).norm() == 0.0);
    }

    TEST_CASE("rolling velocity uses the shank joint rates only")
    {
        // Regression: the body pitch rate is not part of the velocity form.
        const Vector3d h(0.0, 1.0, 0.0);
        const double r = 0.06;
        const Vector3d v = rollingVelocity(3.0, 0.4, -0.1, r, h);
        CHECK((v - r * (3.0 - 0.4 + 0.1) * h).norm() <= 1e-15);
    }

    TEST_CASE("closed wheel trajectory returns the anchor")
    {
        // Roll forward then back by the same encoder sequence.
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 0.05);
        std::vector<double> psi{0.0};
        for (int k = 0; k < 400; ++k)
        {
            psi.push_back(wrapAngle(psi.back() + u(rng)));
        }
        for (int k = 399; k >= 0; --k)
        {
            psi.push_back(psi[static_cast<std::size_t>(k)]);
        }
        const double rw = 0.05;
        const auto h = headingDirection(rotZ(0.4));
        Vector3d a = Vector3d::Zero();
        for (std::size_t k = 1; k < psi.size(); ++k)
        {
            a = propagateContact(a, effectiveRollIncrement(psi[k], psi[k - 1], 0, 0, 0, 0, 0, 0), rw, h);
        }
        CHECK(a.norm() <= rw * 1e-9);
    }
}
