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

#include "mirrorball/cli.hpp"

#include "mirrorball/oracle.hpp"
#include "mirrorball/projection.hpp"
#include "mirrorball/registration.hpp"
#include "mirrorball/remap.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace mirrorball::cli {

namespace {

struct Check
{
    const char* name;
    std::function<bool(std::ostream&)> run;
};

bool round_trip(std::ostream& detail)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (double a : {200.0, 270.0, 360.0})
    {
        const FovAlpha fov(a);
        for (int i = 0; i < 2000; ++i)
        {
            const DiskPoint p{u(rng), u(rng)};
            if (p.norm_squared() > 0.999)
            {
                continue;
            }
            const auto q = improved_forward(improved_inverse(p, fov), fov);
            if (!q)
            {
                return false;
            }
            worst = std::max(worst, std::hypot(q->ix - p.ix, q->iy - p.iy));
        }
    }
    detail << "max error " << worst;
    return worst < 1e-7;
}

bool alpha_geometry(std::ostream& detail)
{
    const double a = alpha_from_geometry(BallGeometry(50.0, 2000.0)).degrees();
    detail << std::fixed << std::setprecision(2) << a << " deg";
    return std::abs(a - 357.13) < 0.01;
}

bool kabsch_recovery(std::ostream& detail)
{
    std::mt19937 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    const Rotation3 truth = Rotation3::from_axis_angle({0.3, -0.5, 0.8}, 47.0);
    std::vector<ReflectionRay> a;
    std::vector<ReflectionRay> b;
    for (int i = 0; i < 12; ++i)
    {
        const ReflectionRay r(n(rng), n(rng), n(rng));
        a.push_back(r);
        b.emplace_back(truth.apply(r.vec()));
    }
    const double err = geodesic_distance_deg(estimate_rotation(a, b).rotation, truth);
    detail << "error " << err << " deg";
    return err < 1e-9;
}

bool unwrap_oracle(std::ostream& detail)
{
    const oracle::SyntheticEnvironment env(oracle::AxisGradient{});
    oracle::SyntheticCamera cam;
    cam.resolution = 256;
    const auto render = oracle::raytrace_ball(env, cam);
    const BallView view{render.image, render.circle, FovAlpha(360.0), Rotation3::identity(), "selftest"};
    const RemapTable table = build_equirect_table(view, 128, 64);
    const RasterImage out = resample(view.image, table, black_fill(view.image));
    const RasterImage truth = oracle::ground_truth_view(env, EquirectSpec{128, 64});
    double sum = 0.0;
    std::size_t count = 0;
    for (int v = 0; v < 64; ++v)
    {
        // Skip the rows closest to the blind pole where the ball is most compressed.
        for (int u = 0; u < 128; ++u)
        {
            const auto ray = equirect_ray(EquirectSpec{128, 64}, u, v);
            if (ray.z() < -0.8)
            {
                continue;
            }
            for (int c = 0; c < 3; ++c)
            {
                sum += std::abs(double(out.at(u, v, c)) - double(truth.at(u, v, c)));
                ++count;
            }
        }
    }
    const double mae = sum / double(count);
    detail << "MAE " << std::fixed << std::setprecision(3) << mae;
    return mae < 2.0;
}

} // namespace

bool run_selftest(std::ostream& out)
{
    const Check checks[] = {
        {"improved term round trip", round_trip},
        {"alpha from ball geometry", alpha_geometry},
        {"rotation recovery", kabsch_recovery},
        {"unwrap against ray-traced ball", unwrap_oracle},
    };
    bool all = true;
    for (const auto& check : checks)
    {
        std::ostringstream detail;
        bool ok = false;
        try
        {
            ok = check.run(detail);
        }
        catch (const std::exception& e)
        {
            detail << "exception: " << e.what();
        }
        out << (ok ? "PASS " : "FAIL ") << check.name << " (" << detail.str() << ")\n";
        all = all && ok;
    }
    out << (all ? "selftest passed\n" : "selftest FAILED\n");
    return all;
}

} // namespace mirrorball::cli
