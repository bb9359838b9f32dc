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

#include "mirrorball/config.hpp"
#include "mirrorball/error.hpp"
#include "mirrorball/frame_renderer.hpp"
#include "mirrorball/image_io.hpp"
#include "mirrorball/registration.hpp"
#include "mirrorball/remap.hpp"
#include "mirrorball/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace mirrorball::cli {

using nlohmann::json;

namespace {

// Ball view options shared by unwrap and reproject.
struct SourceOptions
{
    std::string input;
    std::optional<double> cx;
    std::optional<double> cy;
    std::optional<double> r_px;
    double alpha_deg = 360.0;
    std::string fill = "0";

    void add_to(CLI::App& app)
    {
        app.add_option("--input", input, "Mirror ball image (PNG, PGM or PPM)");
        app.add_option("--cx", cx, "Ball centre x in pixels (default: image centre)");
        app.add_option("--cy", cy, "Ball centre y in pixels (default: image centre)");
        app.add_option("--r-px", r_px, "Ball radius in pixels (default: largest centred disk)");
        app.add_option("--alpha", alpha_deg, "Reflected field of view in degrees, 180 < alpha <= 360")->capture_default_str();
        app.add_option("--fill", fill, "Fill value for the blind cone, one per channel, comma separated")->capture_default_str();
    }

    BallView load(const io::WarningSink& warn) const
    {
        if (input.empty())
        {
            throw ValidationError("--input is required");
        }
        BallView view{io::load_image(input, warn), {}, FovAlpha(alpha_deg), Rotation3::identity(), "input"};
        const double w = view.image.width();
        const double h = view.image.height();
        view.circle = {cx.value_or(0.5 * (w - 1)), cy.value_or(0.5 * (h - 1)), r_px.value_or(0.5 * std::min(w, h))};
        view.validate();
        return view;
    }
};

PixelValue parse_fill(const std::string& text, const RasterImage& src)
{
    PixelValue values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        try
        {
            std::size_t used = 0;
            const long v = std::stol(item, &used);
            if (used != item.size() || v < 0)
            {
                throw std::invalid_argument(item);
            }
            values.push_back(static_cast<std::uint32_t>(v));
        }
        catch (const std::exception&)
        {
            throw ValidationError("--fill expects non-negative integers, got '" + text + "'");
        }
    }
    if (values.size() == 1 && src.channels() == 3)
    {
        values.assign(3, values.front());
    }
    return values;
}

struct CameraOptions
{
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    double hfov = 90.0;
    int width = 640;
    int height = 480;

    void add_to(CLI::App& app)
    {
        app.add_option("--yaw", yaw, "View yaw in degrees")->capture_default_str();
        app.add_option("--pitch", pitch, "View pitch in degrees (positive looks up)")->capture_default_str();
        app.add_option("--roll", roll, "View roll in degrees")->capture_default_str();
        app.add_option("--hfov", hfov, "Horizontal field of view in degrees")->capture_default_str();
        app.add_option("--width", width, "Output width in pixels")->capture_default_str();
        app.add_option("--height", height, "Output height in pixels")->capture_default_str();
    }

    VirtualCamera camera() const { return {yaw, pitch, roll, hfov, width, height}; }
};

void print_rotation(std::ostream& out, const Rotation3& r)
{
    const auto m = r.row_major();
    out << std::fixed << std::setprecision(9);
    for (int row = 0; row < 3; ++row)
    {
        out << "  [" << std::setw(13) << m[static_cast<std::size_t>(row * 3)] << ", " << std::setw(13)
            << m[static_cast<std::size_t>(row * 3 + 1)] << ", " << std::setw(13) << m[static_cast<std::size_t>(row * 3 + 2)]
            << "]\n";
    }
    out.unsetf(std::ios::floatfield);
}

std::string frame_file_name(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06zu.png", index);
    return buf;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Mirror ball unwrapping, registration and live viewing"};
    app.require_subcommand(1);
    const io::WarningSink warn = [&err](const std::string& msg) { err << "warning: " << msg << "\n"; };

    // unwrap
    auto* unwrap = app.add_subcommand("unwrap", "Unwrap one mirror ball image to an equirectangular panorama");
    SourceOptions unwrap_src;
    unwrap_src.add_to(*unwrap);
    int unwrap_w = 2048;
    std::optional<int> unwrap_h;
    std::string unwrap_out;
    std::string unwrap_table;
    unwrap->add_option("--width", unwrap_w, "Panorama width in pixels")->capture_default_str();
    unwrap->add_option("--height", unwrap_h, "Panorama height in pixels (default: width / 2)");
    unwrap->add_option("--output", unwrap_out, "Output image (.png, .ppm, .pgm)")->required();
    unwrap->add_option("--table-out", unwrap_table, "Also write the remap table (MBRT format)");

    // reproject
    auto* reproject = app.add_subcommand("reproject", "Render a virtual pinhole view of a ball image or a configured rig");
    SourceOptions repro_src;
    repro_src.add_to(*reproject);
    CameraOptions repro_cam;
    repro_cam.add_to(*reproject);
    std::string repro_config;
    std::string repro_view;
    std::string repro_layer;
    std::optional<double> repro_blend;
    std::size_t repro_frame = 0;
    std::string repro_out;
    reproject->add_option("--config", repro_config, "Project config; renders the merged rig like GET /api/frame");
    reproject->add_option("--view", repro_view, "ViewState JSON (config mode); replaces the camera flags");
    reproject->add_option("--layer", repro_layer, "Show only this source (config mode)");
    reproject->add_option("--blend", repro_blend, "Crossfade weight of the second source in [0, 1] (config mode)");
    reproject->add_option("--frame", repro_frame, "Frame index for sequence inputs (config mode)")->capture_default_str();
    reproject->add_option("--output", repro_out, "Output image")->required();

    // register
    auto* reg = app.add_subcommand("register", "Estimate the rotation between two sources from correspondences");
    std::string reg_pairs;
    std::string reg_config;
    std::string reg_rig;
    std::string reg_a;
    std::string reg_b;
    std::string reg_out;
    reg->add_option("--correspondences", reg_pairs, "JSON list of {a: [x_px, y_px], b: [x_px, y_px]}")->required();
    reg->add_option("--config", reg_config, "Project config providing the rig");
    reg->add_option("--rig", reg_rig, "Rig JSON (alternative to --config)");
    reg->add_option("--source-a", reg_a, "Source of the 'a' points (default: reference)");
    reg->add_option("--source-b", reg_b, "Source of the 'b' points (default: first other source)");
    reg->add_option("--output", reg_out, "Write the updated rig JSON here");

    // merge
    auto* merge = app.add_subcommand("merge", "Merge the configured sources into one output or frame sequence");
    std::string merge_config;
    std::string merge_projection = "equirect";
    CameraOptions merge_cam;
    merge_cam.width = 2048;
    merge_cam.height = 1024;
    std::string merge_out;
    std::string merge_dir;
    std::string merge_layers;
    std::optional<std::size_t> merge_frames;
    merge->add_option("--config", merge_config, "Project config")->required();
    merge->add_option("--projection", merge_projection, "equirect or pinhole")->capture_default_str();
    merge_cam.add_to(*merge);
    merge->add_option("--output", merge_out, "Single output image (frame 0)");
    merge->add_option("--output-dir", merge_dir, "Directory for a numbered output frame sequence");
    merge->add_option("--layers-dir", merge_layers, "Also write every layer of frame 0 here");
    merge->add_option("--frames", merge_frames, "Limit the number of sequence frames");

    // alpha
    auto* alpha = app.add_subcommand("alpha", "Reflected field of view from ball radius and camera distance");
    double radius_mm = 0.0;
    double distance_mm = 0.0;
    alpha->add_option("--radius-mm", radius_mm, "Ball radius in millimeters")->required();
    alpha->add_option("--distance-mm", distance_mm, "Camera to ball centre distance in millimeters")->required();

    auto* selftest = app.add_subcommand("selftest", "Run the oracle-based verification suite");

    // serve
    auto* serve = app.add_subcommand("serve", "Start the HTTP/WebSocket stream service");
    std::string serve_config;
    std::optional<int> serve_port;
    std::optional<std::string> serve_bind;
    serve->add_option("--config", serve_config, "Project config")->required();
    serve->add_option("--port", serve_port, "Override the configured port");
    serve->add_option("--bind", serve_bind, "Override the configured bind address");

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try
    {
        if (unwrap->parsed())
        {
            const BallView view = unwrap_src.load(warn);
            const RemapTable table = build_equirect_table(view, unwrap_w, unwrap_h.value_or(unwrap_w / 2));
            if (!unwrap_table.empty())
            {
                table.save(unwrap_table);
            }
            io::save_image(unwrap_out, resample(view.image, table, parse_fill(unwrap_src.fill, view.image)));
            out << "wrote " << unwrap_out << " (" << table.width() << "x" << table.height() << ", "
                << std::fixed << std::setprecision(2) << 100.0 * (1.0 - double(table.valid_count()) / table.size())
                << " % blind-cone pixels)\n";
            return kExitOk;
        }
        if (reproject->parsed())
        {
            if (!repro_config.empty())
            {
                const io::ProjectConfig config = io::load_config(repro_config);
                service::ViewState view;
                if (!repro_view.empty())
                {
                    view = service::view_state_from_json(json::parse(repro_view));
                }
                else
                {
                    view.yaw_deg = repro_cam.yaw;
                    view.pitch_deg = repro_cam.pitch;
                    view.roll_deg = repro_cam.roll;
                    view.hfov_deg = repro_cam.hfov;
                    view.width = repro_cam.width;
                    view.height = repro_cam.height;
                    if (!repro_layer.empty())
                    {
                        view.layer = repro_layer;
                    }
                    view.blend = repro_blend;
                    view.validate();
                }
                const auto views = io::load_views(config, repro_frame, warn);
                const RasterImage frame = service::render_view(config.rig, views, view);
                io::save_image(repro_out, frame);
            }
            else
            {
                const BallView view = repro_src.load(warn);
                const RemapTable table = build_pinhole_table(view, repro_cam.camera());
                io::save_image(repro_out, resample(view.image, table, parse_fill(repro_src.fill, view.image)));
            }
            out << "wrote " << repro_out << "\n";
            return kExitOk;
        }
        if (reg->parsed())
        {
            const auto pairs = io::correspondences_from_json(io::load_json(reg_pairs));
            if (pairs.size() < kMinCorrespondences)
            {
                throw ValidationError("registration needs at least " + std::to_string(kMinCorrespondences) +
                                      " correspondences, got " + std::to_string(pairs.size()));
            }
            if (reg_config.empty() == reg_rig.empty())
            {
                throw ValidationError("give exactly one of --config or --rig");
            }
            const Rig rig = reg_config.empty() ? io::rig_from_json(io::load_json(reg_rig)) : io::load_config(reg_config).rig;
            const std::string id_a = reg_a.empty() ? rig.reference_id() : reg_a;
            std::string id_b = reg_b;
            if (id_b.empty())
            {
                for (const auto& s : rig.sources())
                {
                    if (s.id != id_a)
                    {
                        id_b = s.id;
                        break;
                    }
                }
            }
            if (id_b.empty())
            {
                throw ValidationError("rig has no second source to register");
            }
            const RigSource& a = rig.at(id_a);
            const RigSource& b = rig.at(id_b);
            const RayPairs rays = rays_from_correspondences(io::to_disk(pairs, a.circle, b.circle), a.fov, b.fov);
            const RotationEstimate est = estimate_rotation(rays.rays_a, rays.rays_b);
            const Rotation3 b_to_reference = a.rotation * est.rotation.transpose();
            out << "rotation " << id_a << " -> " << id_b << ":\n";
            print_rotation(out, est.rotation);
            out << "residual: " << std::fixed << std::setprecision(4) << est.residual_deg << " deg over " << pairs.size()
                << " correspondences\n";
            if (!reg_out.empty())
            {
                io::save_json(reg_out, io::rig_to_json(rig.with_rotation(id_b, b_to_reference)));
                out << "wrote " << reg_out << "\n";
            }
            return kExitOk;
        }
        if (merge->parsed())
        {
            const io::ProjectConfig config = io::load_config(merge_config);
            std::vector<std::pair<std::string, OutputSpec>> targets;
            OutputSpec spec;
            if (merge_projection == "equirect")
            {
                spec = EquirectSpec{merge_cam.width, merge_cam.height};
            }
            else if (merge_projection == "pinhole")
            {
                spec = merge_cam.camera();
            }
            else
            {
                throw ValidationError("--projection must be equirect or pinhole");
            }
            validate_output(spec);

            if (!merge_out.empty())
            {
                targets.emplace_back(merge_out, spec);
            }
            if (merge_out.empty() && merge_dir.empty())
            {
                for (const auto& o : config.outputs)
                {
                    if (o.path.empty())
                    {
                        throw ValidationError("config output '" + o.name + "' has no path");
                    }
                    targets.emplace_back(config.resolve(o.path).string(), o.spec);
                }
                if (targets.empty())
                {
                    throw ValidationError("nothing to write: give --output, --output-dir or config outputs");
                }
            }

            const auto views0 = io::load_views(config, 0, warn);
            for (const auto& [path, s] : targets)
            {
                const MergeResult merged = merge_views(config.rig, views0, s);
                io::save_image(path, merged.combined);
                out << "wrote " << path << "\n";
                if (!merge_layers.empty())
                {
                    std::filesystem::create_directories(merge_layers);
                    for (const auto& layer : merged.layers)
                    {
                        const auto lp = std::filesystem::path(merge_layers) / (layer.source_id + ".png");
                        io::save_image(lp, layer.image);
                    }
                }
            }

            if (!merge_dir.empty())
            {
                std::filesystem::create_directories(merge_dir);
                std::size_t count = io::common_frame_count(config);
                if (merge_frames)
                {
                    count = std::min(count, *merge_frames);
                }
                const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
                for (std::size_t begin = 0; begin < count; begin += batch)
                {
                    std::vector<std::future<std::string>> jobs;
                    for (std::size_t i = begin; i < std::min(count, begin + batch); ++i)
                    {
                        jobs.push_back(std::async(std::launch::async, [&config, &spec, &merge_dir, i] {
                            const auto views = io::load_views(config, i);
                            const auto path = std::filesystem::path(merge_dir) / frame_file_name(i);
                            io::save_image(path, merge_views(config.rig, views, spec).combined);
                            return path.string();
                        }));
                    }
                    for (auto& job : jobs)
                    {
                        out << "wrote " << job.get() << "\n";
                    }
                }
            }
            return kExitOk;
        }
        if (alpha->parsed())
        {
            const FovAlpha a = alpha_from_geometry(BallGeometry(radius_mm, distance_mm));
            out << std::fixed << std::setprecision(2) << a.degrees() << " deg\n";
            return kExitOk;
        }
        if (selftest->parsed())
        {
            return run_selftest(out) ? kExitOk : kExitValidation;
        }
        if (serve->parsed())
        {
            const io::ProjectConfig config = io::load_config(serve_config);
            service::StreamService svc(config);
            const std::string bind = serve_bind.value_or(config.service.bind);
            const int port = serve_port.value_or(config.service.port);
            if (port < 0 || port > 65535)
            {
                throw ValidationError("--port must be 0-65535");
            }
            const auto bound = svc.start(bind, static_cast<unsigned short>(port));
            out << "listening on http://" << bind << ":" << bound << "/api" << std::endl;
            svc.wait_for_signal();
            svc.stop();
            return kExitOk;
        }
    }
    catch (const ValidationError& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const json::exception& e)
    {
        err << "error: invalid JSON: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const IoError& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}

} // namespace mirrorball::cli
