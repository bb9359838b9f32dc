/*
 * Copyright 2026 The mirrorball Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mirrorball/error.hpp"
#include "mirrorball/projection.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mirrorball;

namespace {

const double kSqrt1_2 = std::sqrt(0.5);

// Independent reference: the disk point is the normal's (x, y), and the
// normal bisects the camera axis and the reflected ray.
DiskPoint reference_classical(const Eigen::Vector3d& r)
{
    const Eigen::Vector3d n = (r + Eigen::Vector3d::UnitZ()).normalized();
    return {n.x(), n.y()};
}

Eigen::Vector3d random_unit(std::mt19937& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Vector3d v;
    do
    {
        v = {g(rng), g(rng), g(rng)};
    } while (v.norm() < 1e-6);
    return v.normalized();
}

} // namespace

TEST_CASE("reflect")
{
    const ReflectionRay i(0, 0, 1);
    SUBCASE("head-on returns along the axis")
    {
        const auto r = reflect(i, SurfaceNormal(0, 0, 1));
        CHECK(r.z() == doctest::Approx(1.0));
    }
    SUBCASE("grazing incidence flips the ray")
    {
        const auto r = reflect(i, SurfaceNormal(1, 0, 0));
        CHECK(r.x() == doctest::Approx(0.0));
        CHECK(r.z() == doctest::Approx(-1.0));
    }
    SUBCASE("45 degree normal sends the ray sideways")
    {
        const auto r = reflect(i, SurfaceNormal(kSqrt1_2, 0, kSqrt1_2));
        CHECK(r.x() == doctest::Approx(1.0));
        CHECK(std::abs(r.z()) < 1e-12);
    }
    SUBCASE("result stays unit length")
    {
        std::mt19937 rng(1);
        for (int k = 0; k < 1000; ++k)
        {
            Eigen::Vector3d n = random_unit(rng);
            n.z() = std::abs(n.z());
            const auto r = reflect(ReflectionRay(random_unit(rng)), SurfaceNormal(n.x(), n.y(), n.z()));
            CHECK(std::abs(r.vec().norm() - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("classical_forward examples")
{
    const auto a = classical_forward(ReflectionRay(0, 0, 1));
    REQUIRE(a);
    CHECK(a->ix == 0.0);
    CHECK(a->iy == 0.0);

    const auto b = classical_forward(ReflectionRay(1, 0, 0));
    REQUIRE(b);
    CHECK(b->ix == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(b->iy == doctest::Approx(0.0));

    CHECK_FALSE(classical_forward(ReflectionRay(0, 0, -1)));
}

TEST_CASE("improved_forward examples")
{
    const FovAlpha a300(300.0);
    const auto p = improved_forward(ReflectionRay(1, 0, 0), a300);
    REQUIRE(p);
    CHECK(p->ix == doctest::Approx(kSqrt1_2 / std::sin(75.0 * M_PI / 180.0)).epsilon(1e-12));
    CHECK(p->ix == doctest::Approx(0.7320508).epsilon(1e-7));
    CHECK_FALSE(improved_forward(ReflectionRay(0, 0.4358898943540673, -0.9), a300));
}

TEST_CASE("improved_inverse examples")
{
    for (double a : {200.0, 300.0, 360.0})
    {
        const auto r = improved_inverse({0, 0}, FovAlpha(a));
        CHECK(r.z() == doctest::Approx(1.0));
    }
    const auto pole = improved_inverse({1, 0}, FovAlpha(360.0));
    CHECK(pole.z() == doctest::Approx(-1.0));
    const auto side = improved_inverse({0.7320508075688772, 0}, FovAlpha(300.0));
    CHECK(side.x() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(side.z()) < 1e-9);
    CHECK_THROWS_AS(improved_inverse({0.9, 0.9}, FovAlpha(300.0)), ValidationError);
}

TEST_CASE("alpha_from_geometry")
{
    CHECK(alpha_from_geometry(BallGeometry(50, 500)).degrees() == doctest::Approx(360.0 - 2.0 * std::asin(0.1) * 180.0 / M_PI).epsilon(1e-12));
    CHECK(std::round(alpha_from_geometry(BallGeometry(50, 500)).degrees() * 100.0) / 100.0 == 348.52);
    CHECK(alpha_from_geometry(BallGeometry(50, 50 * std::sqrt(2.0))).degrees() == doctest::Approx(270.0));
    CHECK(alpha_from_geometry(BallGeometry(50, 5e9)).degrees() == doctest::Approx(360.0));
    CHECK_THROWS_AS(BallGeometry(50, 40), ValidationError);
    CHECK_THROWS_AS(BallGeometry(0, 40), ValidationError);
}

TEST_CASE("defined_region")
{
    CHECK(defined_region(FovAlpha(360.0)) == doctest::Approx(180.0));
    CHECK(defined_region(FovAlpha(300.0)) == doctest::Approx(150.0));
    CHECK(defined_region(FovAlpha(348.52)) == doctest::Approx(174.26));
}

TEST_CASE("domain type invariants")
{
    CHECK_THROWS_AS(FovAlpha(180.0), ValidationError);
    CHECK_THROWS_AS(FovAlpha(360.5), ValidationError);
    CHECK_NOTHROW(FovAlpha(360.0));
    CHECK_THROWS_AS(SurfaceNormal(0, 0, -1), ValidationError);
    CHECK_THROWS_AS(ReflectionRay(0, 0, 0), ValidationError);
}

TEST_CASE("property: classical matches the reflection-bisector reference")
{
    std::mt19937 rng(2);
    for (int k = 0; k < 20000; ++k)
    {
        const Eigen::Vector3d r = random_unit(rng);
        if (r.z() < -0.999)
        {
            continue;
        }
        const auto p = classical_forward(ReflectionRay(r));
        REQUIRE(p);
        const auto q = reference_classical(r);
        CHECK(std::abs(p->ix - q.ix) < 1e-9);
        CHECK(std::abs(p->iy - q.iy) < 1e-9);
    }
}

TEST_CASE("property: forward of the reflected ray at a disk point returns the point")
{
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20000; ++k)
    {
        const DiskPoint p{u(rng), u(rng)};
        if (p.norm_squared() > 0.998)
        {
            continue;
        }
        const auto r = reflect(ReflectionRay(0, 0, 1), normal_at(p));
        const auto q = classical_forward(r);
        REQUIRE(q);
        CHECK(std::abs(q->ix - p.ix) < 1e-9);
        CHECK(std::abs(q->iy - p.iy) < 1e-9);
    }
}

TEST_CASE("property: improved term is the classical term scaled radially")
{
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> alpha(181.0, 360.0);
    for (int k = 0; k < 20000; ++k)
    {
        const ReflectionRay r(random_unit(rng));
        const FovAlpha fov(alpha(rng));
        const auto c = classical_forward(r);
        const auto p = improved_forward(r, fov);
        REQUIRE(c);
        if (!p)
        {
            continue;
        }
        const double s = std::sin(fov.radians() / 4.0);
        CHECK(std::abs(p->ix * s - c->ix) < 1e-12);
        CHECK(std::abs(p->iy * s - c->iy) < 1e-12);
    }
}

TEST_CASE("property: defined exactly when the angle from +z is within alpha / 2")
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> alpha(181.0, 359.0);
    for (int k = 0; k < 20000; ++k)
    {
        const Eigen::Vector3d v = random_unit(rng);
        const FovAlpha fov(alpha(rng));
        const double limit = std::cos(fov.radians() / 2.0);
        if (std::abs(v.z() - limit) < 1e-9)
        {
            continue;
        }
        CHECK(is_defined(ReflectionRay(v), fov) == (v.z() >= limit));
        CHECK(improved_forward(ReflectionRay(v), fov).has_value() == (v.z() >= limit));
    }
}

TEST_CASE("property: disk radius grows monotonically with the ray angle")
{
    const FovAlpha fov(330.0);
    double last = -1.0;
    for (int k = 0; k <= 1650; ++k)
    {
        const double theta = k * 0.1 * M_PI / 180.0;
        const auto p = improved_forward(ReflectionRay(std::sin(theta), 0, std::cos(theta)), fov);
        REQUIRE(p);
        CHECK(p->ix > last);
        last = p->ix;
    }
    CHECK(last == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("property: inverse then forward is the identity on the disk")
{
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> alpha(181.0, 360.0);
    for (int k = 0; k < 20000; ++k)
    {
        const DiskPoint p{u(rng), u(rng)};
        if (!p.on_ball())
        {
            continue;
        }
        const FovAlpha fov(alpha(rng));
        const auto r = improved_inverse(p, fov);
        CHECK(std::abs(r.vec().norm() - 1.0) < 1e-12);
        if (p.norm_squared() > 0.9999)
        {
            continue;
        }
        const auto q = improved_forward(r, fov);
        REQUIRE(q);
        CHECK(std::abs(q->ix - p.ix) < 1e-9);
        CHECK(std::abs(q->iy - p.iy) < 1e-9);
    }
}
