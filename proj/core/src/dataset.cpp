/*
 * Copyright (C) 2026 The ctavatar authors
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
#include "ctav/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "ctav/raster.hpp"

namespace ctav {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Vec3 kBackground(0.10, 0.10, 0.12);

double smooth_zone(double dist, double rho) {
    const double cut = 2.5 * rho;
    if (dist >= cut) return 0.0;
    const double tail = std::exp(-0.5 * 2.5 * 2.5);
    return (std::exp(-0.5 * (dist / rho) * (dist / rho)) - tail) / (1.0 - tail);
}

struct WrinkleZone {
    Vec3 center;  // canonical space
    double rho;
    int driver;  // expression coefficient index, or -1 for the jaw angle
};

// The oracle avatar: per-face surface splats with smooth static colors and
// zone overlays whose opacity tracks the expression magnitude.
struct OracleAvatar {
    const SyntheticRig* rig = nullptr;
    std::vector<Vec3> canonical_centroid;
    std::vector<TriangleFrame> canonical_frames;
    std::vector<Vec3> skin_color;
    std::vector<WrinkleZone> zones;
    std::vector<std::vector<double>> zone_weight;  // per zone, per face
    Vec3 view_axis = Vec3(0.2, 0.3, 0.93).normalized();

    void init(const SyntheticRig& r) {
        rig = &r;
        const int F = r.face_count();
        canonical_centroid.resize(F);
        canonical_frames.resize(F);
        skin_color.resize(F);
        for (int f = 0; f < F; ++f) {
            const auto& tri = r.faces[f];
            const Vec3 a = r.base_vertices[tri[0]];
            const Vec3 b = r.base_vertices[tri[1]];
            const Vec3 c = r.base_vertices[tri[2]];
            canonical_centroid[f] = (a + b + c) / 3.0;
            canonical_frames[f] = triangle_frame(a, b, c);
            const Vec3& p = canonical_centroid[f];
            skin_color[f] =
                Vec3(0.46 + 0.17 * std::sin(2.1 * p.x() + 1.3 * p.y() + 0.7),
                     0.42 + 0.16 * std::sin(1.7 * p.y() + 2.3 * p.z() + 2.1),
                     0.40 + 0.15 * std::sin(2.6 * p.z() + 1.1 * p.x() + 4.2));
        }
        const Vec3 scale(0.78, 1.0, 0.92);
        zones = {
            {Vec3(0.0, 0.45, 0.86).normalized().cwiseProduct(scale), 0.26, 0},
            {Vec3(-0.45, -0.05, 0.85).normalized().cwiseProduct(scale), 0.22, 1},
            {Vec3(0.0, -0.55, 0.82).normalized().cwiseProduct(scale), 0.26, -1},
        };
        zone_weight.assign(zones.size(), std::vector<double>(F, 0.0));
        for (size_t z = 0; z < zones.size(); ++z) {
            for (int f = 0; f < F; ++f) {
                zone_weight[z][f] = smooth_zone(
                    (canonical_centroid[f] - zones[z].center).norm(), zones[z].rho);
            }
        }
    }

    FrameAttributes attributes(const Eigen::VectorXd& beta, const UnitQuaternion& jaw,
                               const Camera& cam) const {
        const SyntheticRig& r = *rig;
        const int F = r.face_count();
        const std::vector<Vec3> verts = eval_rig(r, beta, jaw);
        const double jaw_angle = 2.0 * std::acos(std::min(1.0, std::abs(jaw.w)));

        // Zone responses for this frame.
        std::vector<double> response(zones.size());
        for (size_t z = 0; z < zones.size(); ++z) {
            const int d = zones[z].driver;
            const double raw = d >= 0 ? std::abs(beta[d]) : jaw_angle / 0.35;
            response[z] = 0.85 * std::min(1.0, raw);
        }

        FrameAttributes attrs;
        std::vector<Vec3> mu, rgb;
        std::vector<Mat3> rot;
        std::vector<Vec3> scl;
        std::vector<double> alpha;
        const Vec3 cam_center = cam.center();
        for (int f = 0; f < F; ++f) {
            const auto& tri = r.faces[f];
            const TriangleFrame fd =
                triangle_frame(verts[tri[0]], verts[tri[1]], verts[tri[2]]);
            Vec3 outward = fd.R.col(1);
            if (outward.dot(fd.T) < 0.0) outward = -outward;

            const Vec3 v_d = (fd.T - cam_center).normalized();
            const Vec3 v_c = canonicalize_view(v_d, canonical_frames[f].R, fd.R);
            const double shade =
                0.92 + 0.08 * std::clamp(v_c.dot(view_axis), -1.0, 1.0);

            // Surface splat.
            mu.push_back(fd.T);
            rot.push_back(fd.R);
            scl.push_back(fd.k * Vec3(0.40, 0.10, 0.40));
            rgb.push_back((skin_color[f] * shade).cwiseMin(1.0).cwiseMax(0.0));
            alpha.push_back(0.93);

            // Wrinkle overlays: transparent at neutral, bright when driven.
            for (size_t z = 0; z < zones.size(); ++z) {
                const double w = zone_weight[z][f];
                if (w < 0.05) continue;
                const double a = response[z] * w;
                mu.push_back(fd.T + 0.035 * outward);
                rot.push_back(fd.R);
                scl.push_back(fd.k * Vec3(0.45, 0.10, 0.45));
                rgb.push_back(Vec3(0.97, 0.93, 0.84) * shade);
                alpha.push_back(a);
            }
        }
        const int n = static_cast<int>(mu.size());
        attrs.resize(n);
        attrs.mu = std::move(mu);
        attrs.rot = std::move(rot);
        attrs.scale = std::move(scl);
        attrs.rgb = std::move(rgb);
        attrs.alpha = std::move(alpha);
        return attrs;
    }
};

std::string image_name(int frame, int cam) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "images/f%04d_c%02d.cti", frame, cam);
    return buf;
}

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<int> Dataset::train_frames() const {
    std::vector<int> out;
    for (int i = 0; i < frame_count(); ++i) {
        if (!frames[i].holdout) out.push_back(i);
    }
    return out;
}

std::vector<int> Dataset::holdout_frames() const {
    std::vector<int> out;
    for (int i = 0; i < frame_count(); ++i) {
        if (frames[i].holdout) out.push_back(i);
    }
    return out;
}

ExpressionInput Dataset::expression(int frame) const {
    ExpressionInput e;
    e.beta = frames[frame].beta;
    e.jaw = frames[frame].jaw;
    return e;
}

Vec3 dataset_wrinkle_zone_center(const SyntheticRig&) {
    return Vec3(0.0, 0.45, 0.86).normalized().cwiseProduct(Vec3(0.78, 1.0, 0.92));
}

Dataset generate_dataset(const SyntheticRig& rig, const DatasetConfig& cfg,
                         std::uint64_t seed, ThreadPool* pool) {
    if (cfg.n_frames < 1) throw ConfigInvalid("dataset needs at least one frame");
    if (cfg.n_cameras < 1) throw ConfigInvalid("dataset needs at least one camera");
    if (cfg.holdout_count >= cfg.n_frames) {
        throw ConfigInvalid("holdout must leave training frames");
    }

    Dataset ds;
    ds.rig = rig;
    ds.seed = seed;
    ds.width = ds.height = cfg.image_size;
    ds.background = kBackground;

    // Frontal camera arc.
    const double radius = 2.7, elevation = 8.0 * kPi / 180.0;
    for (int cidx = 0; cidx < cfg.n_cameras; ++cidx) {
        const double az = cfg.n_cameras == 1
                              ? 0.0
                              : (-30.0 + 60.0 * cidx / (cfg.n_cameras - 1)) * kPi / 180.0;
        const Vec3 pos(radius * std::sin(az) * std::cos(elevation),
                       radius * std::sin(elevation),
                       radius * std::cos(az) * std::cos(elevation));
        ds.cameras.push_back(Camera::look_at(pos, Vec3::Zero(), 0.95 * cfg.image_size,
                                             0.95 * cfg.image_size, cfg.image_size,
                                             cfg.image_size));
    }

    // Expression track: skewed toward small motions; the trailing holdout
    // block alternates small/large so both tails are evaluated.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n_b = rig.blendshape_count();
    for (int fr = 0; fr < cfg.n_frames; ++fr) {
        DatasetFrame frame;
        frame.holdout = fr >= cfg.n_frames - cfg.holdout_count;
        const bool large = frame.holdout
                               ? ((fr - (cfg.n_frames - cfg.holdout_count)) % 2 == 1)
                               : uni(rng) > cfg.small_motion_fraction;
        frame.large = large;
        frame.beta = Eigen::VectorXd::Zero(n_b);
        for (int b = 0; b < n_b; ++b) frame.beta[b] = 0.22 * (2.0 * uni(rng) - 1.0);
        double jaw_angle = 0.06 * uni(rng);
        if (large) {
            // Boost one wrinkle driver plus one random component.
            const int main = uni(rng) < 0.5 ? 0 : 1;
            frame.beta[main] = (uni(rng) < 0.5 ? -1.0 : 1.0) * (0.55 + 0.45 * uni(rng));
            const int extra = static_cast<int>(uni(rng) * n_b) % n_b;
            frame.beta[extra] = (uni(rng) < 0.5 ? -1.0 : 1.0) * (0.4 + 0.4 * uni(rng));
            if (uni(rng) < 0.5) jaw_angle = 0.15 + 0.25 * uni(rng);
        }
        frame.jaw = UnitQuaternion::from_axis_angle(rig.jaw_axis, jaw_angle);
        ds.frames.push_back(std::move(frame));
    }

    // Render ground truth with the hidden oracle through the project's own
    // rasterizer.
    OracleAvatar oracle;
    oracle.init(rig);
    ds.images.assign(static_cast<size_t>(cfg.n_frames) * cfg.n_cameras, Image());
    parallel_chunks(pool, cfg.n_frames, [&](int, std::int64_t f0, std::int64_t f1) {
        for (std::int64_t fr = f0; fr < f1; ++fr) {
            for (int cidx = 0; cidx < cfg.n_cameras; ++cidx) {
                const Camera& cam = ds.cameras[cidx];
                const FrameAttributes attrs =
                    oracle.attributes(ds.frames[fr].beta, ds.frames[fr].jaw, cam);
                const auto projected = project(attrs, cam);
                ds.images[fr * cfg.n_cameras + cidx] =
                    blend(projected, cfg.image_size, cfg.image_size, ds.background);
            }
        }
    });
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "images", ec);
    if (ec) throw IoFailure("cannot create dataset directory: " + dir);

    std::ofstream os(fs::path(dir) / "meta.txt");
    if (!os) throw IoFailure("cannot write dataset metadata");
    os << "format=ctds1\n";
    os << "seed=" << ds.seed << "\n";
    os << "width=" << ds.width << "\n";
    os << "height=" << ds.height << "\n";
    os << "background=" << fmt_double(ds.background.x()) << ","
       << fmt_double(ds.background.y()) << "," << fmt_double(ds.background.z()) << "\n";
    os << "n_frames=" << ds.frame_count() << "\n";
    os << "n_cameras=" << ds.camera_count() << "\n";
    os << "rig.seed=" << ds.rig.seed << "\n";
    os << "rig.rings=" << ds.rig.config.rings << "\n";
    os << "rig.segments=" << ds.rig.config.segments << "\n";
    os << "rig.blendshapes=" << ds.rig.config.n_blendshapes << "\n";
    for (int c = 0; c < ds.camera_count(); ++c) {
        const Camera& cam = ds.cameras[c];
        const std::string p = "camera." + std::to_string(c) + ".";
        os << p << "fx=" << fmt_double(cam.fx) << "\n";
        os << p << "fy=" << fmt_double(cam.fy) << "\n";
        os << p << "cx=" << fmt_double(cam.cx) << "\n";
        os << p << "cy=" << fmt_double(cam.cy) << "\n";
        os << p << "width=" << cam.width << "\n";
        os << p << "height=" << cam.height << "\n";
        os << p << "rotation=";
        for (int i = 0; i < 9; ++i) {
            os << (i ? "," : "") << fmt_double(cam.R(i / 3, i % 3));
        }
        os << "\n" << p << "translation=" << fmt_double(cam.t.x()) << ","
           << fmt_double(cam.t.y()) << "," << fmt_double(cam.t.z()) << "\n";
    }
    for (int f = 0; f < ds.frame_count(); ++f) {
        const DatasetFrame& fr = ds.frames[f];
        const std::string p = "frame." + std::to_string(f) + ".";
        os << p << "beta=";
        for (int b = 0; b < fr.beta.size(); ++b) {
            os << (b ? "," : "") << fmt_double(fr.beta[b]);
        }
        os << "\n" << p << "jaw=" << fmt_double(fr.jaw.w) << "," << fmt_double(fr.jaw.x)
           << "," << fmt_double(fr.jaw.y) << "," << fmt_double(fr.jaw.z) << "\n";
        os << p << "large=" << (fr.large ? 1 : 0) << "\n";
        os << p << "holdout=" << (fr.holdout ? 1 : 0) << "\n";
        for (int c = 0; c < ds.camera_count(); ++c) {
            os << "image." << f << "." << c << "=" << image_name(f, c) << "\n";
        }
    }
    if (!os) throw IoFailure("failed writing dataset metadata");
    os.close();

    for (int f = 0; f < ds.frame_count(); ++f) {
        for (int c = 0; c < ds.camera_count(); ++c) {
            write_cti(ds.image(f, c), (fs::path(dir) / image_name(f, c)).string());
        }
    }
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream is(fs::path(dir) / "meta.txt");
    if (!is) throw IoFailure("cannot open dataset metadata in " + dir);

    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw CorruptFile("bad metadata line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw CorruptFile("missing metadata key: " + k);
        return it->second;
    };
    auto parse_csv = [](const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return out;
    };

    if (need("format") != "ctds1") throw VersionMismatch("unknown dataset format");

    Dataset ds;
    ds.seed = std::stoull(need("seed"));
    ds.width = std::stoi(need("width"));
    ds.height = std::stoi(need("height"));
    const auto bg = parse_csv(need("background"));
    if (bg.size() != 3) throw CorruptFile("background needs 3 components");
    ds.background = Vec3(bg[0], bg[1], bg[2]);

    RigConfig rc;
    rc.rings = std::stoi(need("rig.rings"));
    rc.segments = std::stoi(need("rig.segments"));
    rc.n_blendshapes = std::stoi(need("rig.blendshapes"));
    ds.rig = build_rig(rc, std::stoull(need("rig.seed")));

    const int n_frames = std::stoi(need("n_frames"));
    const int n_cameras = std::stoi(need("n_cameras"));
    for (int c = 0; c < n_cameras; ++c) {
        const std::string p = "camera." + std::to_string(c) + ".";
        Camera cam;
        cam.fx = std::stod(need(p + "fx"));
        cam.fy = std::stod(need(p + "fy"));
        cam.cx = std::stod(need(p + "cx"));
        cam.cy = std::stod(need(p + "cy"));
        cam.width = std::stoi(need(p + "width"));
        cam.height = std::stoi(need(p + "height"));
        const auto r = parse_csv(need(p + "rotation"));
        const auto t = parse_csv(need(p + "translation"));
        if (r.size() != 9 || t.size() != 3) throw CorruptFile("bad camera row");
        for (int i = 0; i < 9; ++i) cam.R(i / 3, i % 3) = r[i];
        cam.t = Vec3(t[0], t[1], t[2]);
        cam.validate();
        ds.cameras.push_back(cam);
    }
    for (int f = 0; f < n_frames; ++f) {
        const std::string p = "frame." + std::to_string(f) + ".";
        DatasetFrame fr;
        const auto beta = parse_csv(need(p + "beta"));
        fr.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
        const auto jq = parse_csv(need(p + "jaw"));
        if (jq.size() != 4) throw CorruptFile("bad jaw quaternion");
        fr.jaw = UnitQuaternion::normalized(jq[0], jq[1], jq[2], jq[3]);
        fr.large = need(p + "large") == "1";
        fr.holdout = need(p + "holdout") == "1";
        ds.frames.push_back(std::move(fr));
    }
    ds.images.resize(static_cast<size_t>(n_frames) * n_cameras);
    for (int f = 0; f < n_frames; ++f) {
        for (int c = 0; c < n_cameras; ++c) {
            const std::string rel =
                need("image." + std::to_string(f) + "." + std::to_string(c));
            Image img = read_cti((fs::path(dir) / rel).string());
            if (img.width != ds.width || img.height != ds.height) {
                throw CorruptFile("image size mismatch: " + rel);
            }
            ds.images[static_cast<size_t>(f) * n_cameras + c] = std::move(img);
        }
    }
    return ds;
}

}  // namespace ctav
