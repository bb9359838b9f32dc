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

// Rotation-only registration of several camera views of the same ball, and
// merging of the registered sources into one multi-layer projection.

#pragma once

#include "mirrorball/projection.hpp"
#include "mirrorball/raster.hpp"
#include "mirrorball/remap.hpp"
#include "mirrorball/rotation.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mirrorball {

// The same scene point clicked in view A and in view B (disk coordinates).
struct Correspondence
{
    DiskPoint point_a;
    DiskPoint point_b;
};

struct RayPairs
{
    std::vector<ReflectionRay> rays_a;
    std::vector<ReflectionRay> rays_b;
};

inline constexpr std::size_t kMinCorrespondences = 2;

// Inverts the improved term in each view. Throws ValidationError for fewer than
// two pairs, off-ball points or a degenerate (all parallel) ray set.
RayPairs rays_from_correspondences(const std::vector<Correspondence>& pairs, const FovAlpha& fov_a,
                                   const FovAlpha& fov_b);

struct RotationEstimate
{
    // Maps rays of view A onto rays of view B.
    Rotation3 rotation;
    // RMS angle between R a_i and b_i, degrees.
    double residual_deg = 0.0;
};

// Orthogonal Procrustes (Kabsch) over unit rays: the proper rotation R
// minimizing sum |R a_i - b_i|^2.
RotationEstimate estimate_rotation(const std::vector<ReflectionRay>& rays_a, const std::vector<ReflectionRay>& rays_b);

enum class BlendMode
{
    Switch,
    AlphaBlend,
};

struct BlendPolicy
{
    BlendMode mode = BlendMode::Switch;
    // Source shown under Switch; empty means the reference source.
    std::string active;
    // Per-source weights under AlphaBlend; missing sources weigh 0.
    std::map<std::string, double> weights;

    friend bool operator==(const BlendPolicy&, const BlendPolicy&) = default;
};

struct RigSource
{
    std::string id;
    BallCircle circle;
    FovAlpha fov{360.0};
    // Maps this source's ray frame into the reference frame.
    Rotation3 rotation;

    friend bool operator==(const RigSource& a, const RigSource& b)
    {
        return a.id == b.id && a.circle == b.circle && a.fov.degrees() == b.fov.degrees() && a.rotation == b.rotation;
    }
};

inline constexpr int kRigSchemaVersion = 1;

// Registered multi-source configuration.
class Rig
{
public:
    Rig(std::string reference_id, std::vector<RigSource> sources, BlendPolicy blend);

    const std::string& reference_id() const { return reference_id_; }
    const std::vector<RigSource>& sources() const { return sources_; }
    const BlendPolicy& blend() const { return blend_; }

    const RigSource* find(const std::string& id) const;
    const RigSource& at(const std::string& id) const;

    // Copy with one source's rotation replaced.
    Rig with_rotation(const std::string& id, const Rotation3& rotation) const;
    Rig with_blend(BlendPolicy blend) const;
    Rig with_alpha(const std::string& id, const FovAlpha& fov) const;

    friend bool operator==(const Rig&, const Rig&) = default;

private:
    void validate() const;

    std::string reference_id_;
    std::vector<RigSource> sources_;
    BlendPolicy blend_;
};

// Rotation of source b into the reference frame given an estimate mapping
// reference rays (view A) onto source rays (view B).
Rotation3 source_rotation_from_estimate(const RotationEstimate& estimate);

struct MergeLayer
{
    std::string source_id;
    // Resampled source; 1-channel sources are tone-mapped to 8-bit RGB.
    RasterImage image;
    // Raw resample output before tone-mapping.
    RasterImage raw;
    std::vector<std::uint8_t> valid;
};

struct MergeResult
{
    std::vector<MergeLayer> layers;
    RasterImage combined;
};

// Effective world-to-source orientation used for a rig source.
Rotation3 source_orientation(const RigSource& source, const Rotation3& view_pose);

// Builds per-source tables (rig rotation composed with the view pose), resamples
// and composes per the rig's blend policy. Throws ValidationError for sources
// missing from the rig, missing views or layers that cannot be combined.
MergeResult merge_views(const Rig& rig, const std::vector<BallView>& views, const OutputSpec& output);

// Linear min/max normalization of a 1-channel layer over its valid pixels,
// mapped through a fixed black-purple-orange-yellow-white ramp.
RasterImage tone_map_thermal(const RasterImage& gray, const std::vector<std::uint8_t>& valid);

// Colour of the thermal ramp at t in [0, 1].
std::array<std::uint8_t, 3> thermal_ramp(double t);

} // namespace mirrorball
