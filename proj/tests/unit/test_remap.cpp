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
#include "mirrorball/remap.hpp"

#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace mirrorball;

namespace {

BallView make_view(double alpha, const Rotation3& orientation = Rotation3::identity())
{
    return BallView{RasterImage(1001, 801, 3, SampleDepth::U8), BallCircle{500, 400, 300}, FovAlpha(alpha), orientation, "v"};
}

// Invalid fraction weighted by the solid angle each equirect pixel covers.
double invalid_solid_angle_fraction(const RemapTable& t)
{
    double invalid = 0.0;
    double total = 0.0;
    for (int v = 0; v < t.height(); ++v)
    {
        const double lat = M_PI / 2.0 - (v + 0.5) * M_PI / t.height();
        const double w = std::cos(lat);
        for (int u = 0; u < t.width(); ++u)
        {
            total += w;
            if (!t.valid(static_cast<std::size_t>(v) * t.width() + u))
            {
                invalid += w;
            }
        }
    }
    return invalid / total;
}

} // namespace

TEST_CASE("disk_to_pixels examples")
{
    const BallCircle c{500, 400, 300};
    auto p = disk_to_pixels({0, 0}, c);
    CHECK(p.x == 500.0);
    CHECK(p.y == 400.0);
    p = disk_to_pixels({1, 0}, c);
    CHECK(p.x == 800.0);
    CHECK(p.y == 400.0);
    p = disk_to_pixels({0, 1}, c);
    CHECK(p.x == 500.0);
    CHECK(p.y == 100.0);
    const auto d = pixels_to_disk({650, 250}, c);
    CHECK(d.ix == doctest::Approx(0.5));
    CHECK(d.iy == doctest::Approx(0.5));
}

TEST_CASE("BallCircle and output validation")
{
    CHECK_THROWS_AS((BallCircle{500, 400, 8}.validate(1000, 800)), ValidationError);
    CHECK_THROWS_AS((BallCircle{500, 400, 450}.validate(1000, 800)), ValidationError);
    CHECK_NOTHROW((BallCircle{499.5, 399.5, 400}.validate(1000, 800)));
    CHECK_THROWS_AS(validate_output(VirtualCamera{0, 0, 0, 180, 10, 10}), ValidationError);
    CHECK_THROWS_AS(validate_output(EquirectSpec{0, 10}), ValidationError);
}

TEST_CASE("equirect ray convention")
{
    const EquirectSpec s{360, 180};
    CHECK(equirect_longitude_deg(s, 0) == doctest::Approx(-179.5));
    CHECK(equirect_latitude_deg(s, 0) == doctest::Approx(89.5));
    const auto fwd = equirect_ray(s, 179.5, 89.5);
    CHECK(fwd.z() == doctest::Approx(1.0));
    const auto east = equirect_ray(s, 269.5, 89.5);
    CHECK(east.x() == doctest::Approx(1.0));
}

TEST_CASE("equirect table at alpha 360 is valid except at the pole")
{
    const auto t = build_equirect_table(make_view(360.0), 1024, 512);
    const double invalid = 1.0 - double(t.valid_count()) / double(t.size());
    CHECK(invalid < 0.001);
}

TEST_CASE("equirect table at alpha 300 masks exactly the blind cap")
{
    const auto t = build_equirect_table(make_view(300.0), 1024, 512);
    const EquirectSpec s{1024, 512};
    const double limit = std::cos(150.0 * M_PI / 180.0);
    for (int v = 0; v < 512; ++v)
    {
        for (int u = 0; u < 1024; ++u)
        {
            const auto r = equirect_ray(s, u, v);
            if (std::abs(r.z() - limit) < 1e-9)
            {
                continue;
            }
            REQUIRE(t.valid(static_cast<std::size_t>(v) * 1024 + u) == (r.z() >= limit));
        }
    }
    CHECK(invalid_solid_angle_fraction(t) == doctest::Approx((1.0 - std::cos(M_PI / 6.0)) / 2.0).epsilon(0.01));
}

TEST_CASE("yawing the orientation shifts the valid mask by a quarter turn")
{
    const auto a = build_equirect_table(make_view(300.0), 400, 200);
    const auto b = build_equirect_table(make_view(300.0, Rotation3::from_axis_angle({0, 1, 0}, 90.0)), 400, 200);
    int mismatches = 0;
    for (int v = 0; v < 200; ++v)
    {
        for (int u = 0; u < 400; ++u)
        {
            const int shifted = (u + 100) % 400;
            mismatches += a.valid(static_cast<std::size_t>(v) * 400 + shifted) != b.valid(static_cast<std::size_t>(v) * 400 + u);
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("pinhole table examples")
{
    SUBCASE("forward camera sees only defined rays")
    {
        const auto t = build_pinhole_table(make_view(300.0), VirtualCamera{0, 0, 0, 60, 320, 240});
        CHECK(t.valid_count() == t.size());
    }
    SUBCASE("camera facing the pole sees nothing")
    {
        const auto t = build_pinhole_table(make_view(300.0), VirtualCamera{180, 0, 0, 40, 200, 200});
        CHECK(t.valid_count() == 0);
    }
    SUBCASE("center pixel maps to the ball center")
    {
        const auto t = build_pinhole_table(make_view(300.0), VirtualCamera{0, 0, 0, 70, 101, 51});
        const std::size_t i = 25 * 101 + 50;
        CHECK(t.src_x(i) == doctest::Approx(500.0));
        CHECK(t.src_y(i) == doctest::Approx(400.0));
    }
}

TEST_CASE("table build is pure")
{
    const VirtualCamera cam{20, -10, 5, 75, 160, 120};
    const auto view = make_view(330.0, Rotation3::from_axis_angle({1, 2, 3}, 33.0));
    CHECK(build_pinhole_table(view, cam) == build_pinhole_table(view, cam));
    CHECK(build_equirect_table(view, 128, 64) == build_equirect_table(view, 128, 64));
}

TEST_CASE("orientation and camera yaw compose")
{
    const Rotation3 q = Rotation3::from_axis_angle({0.3, 1, -0.2}, 41.0);
    const VirtualCamera cam{35, 12, -7, 80, 120, 90};
    const auto view = make_view(340.0, q);
    const auto table = build_pinhole_table(view, cam);

    // Same mapping with the ray computed externally.
    const double f = 60.0 / std::tan(40.0 * M_PI / 180.0);
    const Eigen::Matrix3d pose = view_rotation(35, 12, -7).matrix();
    double worst = 0.0;
    for (int v = 0; v < 90; ++v)
    {
        for (int u = 0; u < 120; ++u)
        {
            const Eigen::Vector3d local((u - 59.5) / f, -(v - 44.5) / f, 1.0);
            const Eigen::Vector3d ray = q.matrix() * pose * local.normalized();
            const auto p = improved_forward(ReflectionRay(ray), view.fov);
            const std::size_t i = static_cast<std::size_t>(v) * 120 + u;
            REQUIRE(p.has_value() == table.valid(i));
            if (p)
            {
                worst = std::max(worst, std::abs(table.src_x(i) - (500 + 300 * p->ix)));
                worst = std::max(worst, std::abs(table.src_y(i) - (400 - 300 * p->iy)));
            }
        }
    }
    CHECK(worst < 1e-6);

    // Folding the yaw into the orientation gives the same table.
    const auto folded = build_pinhole_table(make_view(340.0, q * view_rotation(35, 12, -7)), VirtualCamera{0, 0, 0, 80, 120, 90});
    double diff = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
    {
        REQUIRE(folded.valid(i) == table.valid(i));
        diff = std::max({diff, std::abs(folded.src_x(i) - table.src_x(i)), std::abs(folded.src_y(i) - table.src_y(i))});
    }
    CHECK(diff < 1e-6);
}

TEST_CASE("resolution falls off toward the pole")
{
    // Source pixels per radian of ray direction, from finite differences of an
    // equirect table, binned by angle from +z.
    const int w = 1440;
    const int h = 720;
    const auto t = build_equirect_table(make_view(360.0), w, h);
    const EquirectSpec s{w, h};
    constexpr int kBins = 16;
    std::array<double, kBins> frob{};
    std::array<double, kBins> radial{};
    std::array<int, kBins> count{};
    for (int v = 1; v < h - 1; ++v)
    {
        const double lat = equirect_latitude_deg(s, v) * M_PI / 180.0;
        if (std::abs(lat) > 70.0 * M_PI / 180.0)
        {
            continue;
        }
        for (int u = 1; u < w - 1; ++u)
        {
            const auto at = [&](int uu, int vv) { return static_cast<std::size_t>(vv) * w + uu; };
            if (!t.valid(at(u - 1, v)) || !t.valid(at(u + 1, v)) || !t.valid(at(u, v - 1)) || !t.valid(at(u, v + 1)))
            {
                continue;
            }
            const double theta = std::acos(std::clamp(equirect_ray(s, u, v).z(), -1.0, 1.0)) * 180.0 / M_PI;
            const int bin = static_cast<int>((theta - 10.0) / 10.0);
            if (theta < 10.0 || bin >= kBins)
            {
                continue;
            }
            // Step sizes in radians: east along the parallel, south along the meridian.
            const double du = std::cos(lat) * 2.0 * M_PI / w * 2.0;
            const double dv = M_PI / h * 2.0;
            Eigen::Matrix2d j;
            j << (t.src_x(at(u + 1, v)) - t.src_x(at(u - 1, v))) / du, (t.src_x(at(u, v + 1)) - t.src_x(at(u, v - 1))) / dv,
                (t.src_y(at(u + 1, v)) - t.src_y(at(u - 1, v))) / du, (t.src_y(at(u, v + 1)) - t.src_y(at(u, v - 1))) / dv;
            const Eigen::JacobiSVD<Eigen::Matrix2d> svd(j);
            frob[bin] += j.norm();
            radial[bin] += svd.singularValues()(1);
            ++count[bin];
        }
    }
    for (int b = 1; b < kBins; ++b)
    {
        REQUIRE(count[b] > 0);
        REQUIRE(count[b - 1] > 0);
        CHECK(frob[b] / count[b] > frob[b - 1] / count[b - 1]);
        CHECK(radial[b] / count[b] < radial[b - 1] / count[b - 1]);
    }
}

TEST_CASE("remap table serialization")
{
    const auto t = build_pinhole_table(make_view(300.0), VirtualCamera{150, 0, 0, 90, 64, 48});
    REQUIRE(t.valid_count() > 0);
    REQUIRE(t.valid_count() < t.size());
    const auto bytes = t.serialize();
    CHECK(bytes.size() == 14 + t.size() * 9);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MBRT");
    const auto back = RemapTable::deserialize(bytes);
    REQUIRE(back.width() == 64);
    REQUIRE(back.height() == 48);
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        REQUIRE(back.valid(i) == t.valid(i));
        CHECK(back.src_x(i) == static_cast<double>(static_cast<float>(t.src_x(i))));
        CHECK(back.src_y(i) == static_cast<double>(static_cast<float>(t.src_y(i))));
    }
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(RemapTable::deserialize(bad), ValidationError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(RemapTable::deserialize(bad), ValidationError);
    CHECK_THROWS_AS(RemapTable::load("/nonexistent/table.mbrt"), IoError);
}

TEST_CASE("resample")
{
    RasterImage src(40, 30, 3, SampleDepth::U8);
    std::mt19937 rng(9);
    for (auto& b : src.samples8())
    {
        b = static_cast<std::uint8_t>(rng());
    }
    SUBCASE("identity table is bit-exact")
    {
        RemapTable t(40, 30);
        for (int y = 0; y < 30; ++y)
        {
            for (int x = 0; x < 40; ++x)
            {
                t.set(static_cast<std::size_t>(y) * 40 + x, x, y);
            }
        }
        CHECK(resample(src, t, black_fill(src)) == src);
    }
    SUBCASE("all-invalid table gives the fill")
    {
        RemapTable t(7, 5);
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            t.set_invalid(i);
        }
        const auto out = resample(src, t, {10, 20, 30});
        for (int y = 0; y < 5; ++y)
        {
            for (int x = 0; x < 7; ++x)
            {
                CHECK(out.at(x, y, 0) == 10);
                CHECK(out.at(x, y, 2) == 30);
            }
        }
    }
    SUBCASE("midpoint is the bilinear average")
    {
        RemapTable t(1, 1);
        t.set(0, 10.5, 20.5);
        const auto out = resample(src, t, black_fill(src));
        for (int c = 0; c < 3; ++c)
        {
            const double mean =
                (src.at(10, 20, c) + src.at(11, 20, c) + src.at(10, 21, c) + src.at(11, 21, c)) / 4.0;
            CHECK(std::abs(double(out.at(0, 0, c)) - mean) <= 0.5 + 1e-3);
        }
    }
    SUBCASE("16-bit gray keeps its depth")
    {
        RasterImage g(4, 4, 1, SampleDepth::U16);
        g.set(1, 1, 0, 60000);
        RemapTable t(1, 1);
        t.set(0, 1, 1);
        const auto out = resample(g, t, black_fill(g));
        CHECK(out.depth() == SampleDepth::U16);
        CHECK(out.at(0, 0, 0) == 60000);
    }
    SUBCASE("fill channel mismatch is rejected")
    {
        RemapTable t(1, 1);
        CHECK_THROWS_AS(resample(src, t, {0}), ValidationError);
        CHECK_THROWS_AS(resample(src, t, {0, 0, 300}), ValidationError);
    }
}
