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

#include "mirrorball/registration.hpp"

#include "mirrorball/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <set>

namespace mirrorball {

namespace {

// Relative singular value below which a ray set counts as rank deficient.
constexpr double kRankTolerance = 1e-9;

bool rank_below_two(const std::vector<ReflectionRay>& rays)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rays.size()), 3);
    for (std::size_t i = 0; i < rays.size(); ++i)
    {
        m.row(static_cast<Eigen::Index>(i)) = rays[i].vec().transpose();
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    return !(s(0) > 0.0) || s(1) <= kRankTolerance * s(0);
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b)
{
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

constexpr std::array<std::array<double, 3>, 5> kRampStops = {{
    {0.0, 0.0, 4.0},
    {87.0, 16.0, 110.0},
    {188.0, 55.0, 84.0},
    {249.0, 142.0, 9.0},
    {252.0, 255.0, 164.0},
}};

} // namespace

RayPairs rays_from_correspondences(const std::vector<Correspondence>& pairs, const FovAlpha& fov_a,
                                   const FovAlpha& fov_b)
{
    if (pairs.size() < kMinCorrespondences)
    {
        throw ValidationError("registration needs at least " + std::to_string(kMinCorrespondences) +
                              " correspondences, got " + std::to_string(pairs.size()));
    }
    RayPairs out;
    out.rays_a.reserve(pairs.size());
    out.rays_b.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
    {
        if (!pairs[i].point_a.on_ball() || !pairs[i].point_b.on_ball())
        {
            throw ValidationError("correspondence " + std::to_string(i) + " lies outside the ball silhouette");
        }
        out.rays_a.push_back(improved_inverse(pairs[i].point_a, fov_a));
        out.rays_b.push_back(improved_inverse(pairs[i].point_b, fov_b));
    }
    if (rank_below_two(out.rays_a) || rank_below_two(out.rays_b))
    {
        throw ValidationError("degenerate correspondences: fewer than 2 linearly independent rays, rotation is unrecoverable");
    }
    return out;
}

RotationEstimate estimate_rotation(const std::vector<ReflectionRay>& rays_a, const std::vector<ReflectionRay>& rays_b)
{
    if (rays_a.size() != rays_b.size())
    {
        throw ValidationError("ray lists differ in length");
    }
    if (rays_a.size() < kMinCorrespondences)
    {
        throw ValidationError("registration needs at least " + std::to_string(kMinCorrespondences) + " ray pairs");
    }

    Eigen::Matrix3d cross_cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < rays_a.size(); ++i)
    {
        cross_cov += rays_a[i].vec() * rays_b[i].vec().transpose();
    }
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(1) <= kRankTolerance * s(0))
    {
        throw ValidationError("degenerate configuration: cross-covariance rank below 2");
    }

    const Eigen::Matrix3d& u = svd.matrixU();
    const Eigen::Matrix3d& v = svd.matrixV();
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    // Flip the weakest direction if the unconstrained optimum is a reflection.
    if ((v * u.transpose()).determinant() < 0.0)
    {
        d(2, 2) = -1.0;
    }
    const Rotation3 r(v * d * u.transpose());

    double sum_sq = 0.0;
    for (std::size_t i = 0; i < rays_a.size(); ++i)
    {
        const double e = angle_between(r.apply(rays_a[i].vec()), rays_b[i].vec());
        sum_sq += e * e;
    }
    return {r, rad_to_deg(std::sqrt(sum_sq / static_cast<double>(rays_a.size())))};
}

Rotation3 source_rotation_from_estimate(const RotationEstimate& estimate) { return estimate.rotation.transpose(); }

Rig::Rig(std::string reference_id, std::vector<RigSource> sources, BlendPolicy blend)
    : reference_id_(std::move(reference_id)), sources_(std::move(sources)), blend_(std::move(blend))
{
    validate();
}

void Rig::validate() const
{
    if (sources_.empty())
    {
        throw ValidationError("rig needs at least one source");
    }
    std::set<std::string> ids;
    for (const auto& s : sources_)
    {
        if (s.id.empty())
        {
            throw ValidationError("rig source id must not be empty");
        }
        if (!ids.insert(s.id).second)
        {
            throw ValidationError("duplicate rig source id '" + s.id + "'");
        }
        if (auto why = rotation_violation(s.rotation.matrix()); !why.empty())
        {
            throw ValidationError("source '" + s.id + "': " + why);
        }
    }
    const RigSource* ref = find(reference_id_);
    if (!ref)
    {
        throw ValidationError("reference source '" + reference_id_ + "' is not in the rig");
    }
    if ((ref->rotation.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > Rotation3::kTolerance)
    {
        throw ValidationError("reference source '" + reference_id_ + "' must have the identity rotation");
    }
    if (blend_.mode == BlendMode::Switch && !blend_.active.empty() && !find(blend_.active))
    {
        throw ValidationError("switch policy selects unknown source '" + blend_.active + "'");
    }
    if (blend_.mode == BlendMode::AlphaBlend)
    {
        double total = 0.0;
        for (const auto& [id, w] : blend_.weights)
        {
            if (!find(id))
            {
                throw ValidationError("blend weight for unknown source '" + id + "'");
            }
            if (!(w >= 0.0 && w <= 1.0))
            {
                throw ValidationError("blend weight for '" + id + "' must lie in [0, 1]");
            }
            total += w;
        }
        if (!(total > 0.0))
        {
            throw ValidationError("blend weights must not all be zero");
        }
    }
}

const RigSource* Rig::find(const std::string& id) const
{
    const auto it = std::find_if(sources_.begin(), sources_.end(), [&](const RigSource& s) { return s.id == id; });
    return it == sources_.end() ? nullptr : &*it;
}

const RigSource& Rig::at(const std::string& id) const
{
    if (const RigSource* s = find(id))
    {
        return *s;
    }
    throw ValidationError("unknown source id '" + id + "'");
}

Rig Rig::with_rotation(const std::string& id, const Rotation3& rotation) const
{
    auto sources = sources_;
    bool found = false;
    for (auto& s : sources)
    {
        if (s.id == id)
        {
            s.rotation = rotation;
            found = true;
        }
    }
    if (!found)
    {
        throw ValidationError("unknown source id '" + id + "'");
    }
    return Rig(reference_id_, std::move(sources), blend_);
}

Rig Rig::with_blend(BlendPolicy blend) const { return Rig(reference_id_, sources_, std::move(blend)); }

Rig Rig::with_alpha(const std::string& id, const FovAlpha& fov) const
{
    auto sources = sources_;
    for (auto& s : sources)
    {
        if (s.id == id)
        {
            s.fov = fov;
            return Rig(reference_id_, std::move(sources), blend_);
        }
    }
    throw ValidationError("unknown source id '" + id + "'");
}

Rotation3 source_orientation(const RigSource& source, const Rotation3& view_pose)
{
    return source.rotation.transpose() * view_pose;
}

std::array<std::uint8_t, 3> thermal_ramp(double t)
{
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const double pos = t * static_cast<double>(kRampStops.size() - 1);
    const auto lo = std::min(static_cast<std::size_t>(pos), kRampStops.size() - 2);
    const double f = pos - static_cast<double>(lo);
    std::array<std::uint8_t, 3> out{};
    for (std::size_t c = 0; c < 3; ++c)
    {
        const double v = kRampStops[lo][c] * (1.0 - f) + kRampStops[lo + 1][c] * f;
        out[c] = static_cast<std::uint8_t>(std::lround(v));
    }
    return out;
}

RasterImage tone_map_thermal(const RasterImage& gray, const std::vector<std::uint8_t>& valid)
{
    if (gray.channels() != 1)
    {
        throw ValidationError("thermal tone mapping expects a 1-channel layer");
    }
    const std::size_t n = static_cast<std::size_t>(gray.width()) * gray.height();
    if (valid.size() != n)
    {
        throw ValidationError("validity mask does not match the layer size");
    }
    std::uint32_t lo = gray.max_value();
    std::uint32_t hi = 0;
    for (int y = 0; y < gray.height(); ++y)
    {
        for (int x = 0; x < gray.width(); ++x)
        {
            if (valid[static_cast<std::size_t>(y) * gray.width() + x])
            {
                const auto v = gray.at(x, y, 0);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    RasterImage out(gray.width(), gray.height(), 3, SampleDepth::U8);
    const double span = hi > lo ? static_cast<double>(hi - lo) : 0.0;
    for (int y = 0; y < gray.height(); ++y)
    {
        for (int x = 0; x < gray.width(); ++x)
        {
            if (!valid[static_cast<std::size_t>(y) * gray.width() + x])
            {
                continue; // stays black
            }
            const double t = span > 0.0 ? (gray.at(x, y, 0) - lo) / span : 0.0;
            const auto rgb = thermal_ramp(t);
            for (int c = 0; c < 3; ++c)
            {
                out.set(x, y, c, rgb[static_cast<std::size_t>(c)]);
            }
        }
    }
    return out;
}

MergeResult merge_views(const Rig& rig, const std::vector<BallView>& views, const OutputSpec& output)
{
    validate_output(output);
    if (views.empty())
    {
        throw ValidationError("merge needs at least one view");
    }
    MergeResult result;
    for (const auto& view : views)
    {
        const RigSource* source = rig.find(view.source_id);
        if (!source)
        {
            throw ValidationError("view source '" + view.source_id + "' is not part of the rig");
        }
        view.validate();
        const RemapTable table = build_table(view.circle, view.fov, source_orientation(*source, view.orientation), output);
        MergeLayer layer;
        layer.source_id = view.source_id;
        layer.raw = resample(view.image, table, black_fill(view.image));
        layer.valid.resize(table.size());
        for (std::size_t i = 0; i < table.size(); ++i)
        {
            layer.valid[i] = table.valid(i) ? 1 : 0;
        }
        layer.image = view.image.channels() == 1 ? tone_map_thermal(layer.raw, layer.valid) : layer.raw;
        result.layers.push_back(std::move(layer));
    }

    const BlendPolicy& blend = rig.blend();
    if (blend.mode == BlendMode::Switch)
    {
        const std::string& active = blend.active.empty() ? rig.reference_id() : blend.active;
        const auto it = std::find_if(result.layers.begin(), result.layers.end(),
                                     [&](const MergeLayer& l) { return l.source_id == active; });
        if (it == result.layers.end())
        {
            throw ValidationError("switch policy selects source '" + active + "' but no view was supplied for it");
        }
        result.combined = it->image;
        return result;
    }

    std::vector<std::pair<const MergeLayer*, double>> weighted;
    for (const auto& layer : result.layers)
    {
        const auto w = blend.weights.find(layer.source_id);
        if (w != blend.weights.end() && w->second > 0.0)
        {
            weighted.emplace_back(&layer, w->second);
        }
    }
    if (weighted.empty())
    {
        throw ValidationError("blend policy gives zero weight to every supplied view");
    }
    const RasterImage& first = weighted.front().first->image;
    for (const auto& [layer, w] : weighted)
    {
        if (layer->image.width() != first.width() || layer->image.height() != first.height() ||
            layer->image.channels() != first.channels() || layer->image.depth() != first.depth())
        {
            throw ValidationError("layer '" + layer->source_id + "' cannot be blended: dimension, channel or depth mismatch");
        }
    }

    RasterImage combined(first.width(), first.height(), first.channels(), first.depth());
    for (int y = 0; y < combined.height(); ++y)
    {
        for (int x = 0; x < combined.width(); ++x)
        {
            const std::size_t i = static_cast<std::size_t>(y) * combined.width() + x;
            double total = 0.0;
            double acc[3] = {0.0, 0.0, 0.0};
            for (const auto& [layer, w] : weighted)
            {
                if (!layer->valid[i])
                {
                    continue;
                }
                total += w;
                for (int c = 0; c < combined.channels(); ++c)
                {
                    acc[c] += w * layer->image.at(x, y, c);
                }
            }
            if (total <= 0.0)
            {
                continue;
            }
            for (int c = 0; c < combined.channels(); ++c)
            {
                combined.set(x, y, c, static_cast<std::uint32_t>(acc[c] / total + 0.5));
            }
        }
    }
    result.combined = std::move(combined);
    return result;
}

} // namespace mirrorball
