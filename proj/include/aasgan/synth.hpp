#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "aasgan/common.hpp"
#include "aasgan/data.hpp"

namespace aasgan::synth {

// Stand-in for game-engine trajectory corpora: straight, deterministic
// motion with at most one heading change, optionally perturbed by Gaussian
// positional jitter.
struct SynthConfig {
    int n_scenes = 10;
    int peds_min = 1;
    int peds_max = 3;
    double speed_min = 0.4;   // m/s
    double speed_max = 1.6;
    double heading_min = 0.0;  // radians
    double heading_max = 6.283185307179586;
    double turn_probability = 0.0;
    double turn_angle_min = -0.8;  // radians, applied once if a turn is drawn
    double turn_angle_max = 0.8;
    double jitter_std = 0.0;  // meters
    std::uint64_t seed = 1;
    int t_pred = 20;
    double dt = kSampleDt;
    double area = 10.0;  // start positions drawn uniformly in [0, area)^2

    void validate() const {
        if (n_scenes < 0) throw ArgumentError("SynthConfig: n_scenes < 0");
        if (peds_min < 1 || peds_min > peds_max) throw ArgumentError("SynthConfig: bad peds range");
        if (speed_min < 0 || speed_min > speed_max) throw ArgumentError("SynthConfig: bad speed range");
        if (heading_min > heading_max) throw ArgumentError("SynthConfig: bad heading range");
        if (turn_angle_min > turn_angle_max) throw ArgumentError("SynthConfig: bad turn angle range");
        if (turn_probability < 0 || turn_probability > 1)
            throw ArgumentError("SynthConfig: turn_probability outside [0,1]");
        if (jitter_std < 0) throw ArgumentError("SynthConfig: jitter_std < 0");
        if (t_pred < 2) throw ArgumentError("SynthConfig: t_pred < 2");
        if (dt <= 0) throw ArgumentError("SynthConfig: dt <= 0");
    }
};

namespace detail {

// Snapping step vectors and starts to multiples of 2^-20 m makes every
// cumulative sum exact in doubles, so jitter-free trajectories have a
// bit-exact zero second difference.
inline double quantize(double v) { return std::round(v * 1048576.0) / 1048576.0; }

inline Vec2 quantize(Vec2 v) { return {quantize(v.x), quantize(v.y)}; }

}  // namespace detail

inline Trajectory generate_linear_trajectory(Vec2 start, Vec2 velocity, int t_pred, double dt) {
    if (t_pred < 2) throw ArgumentError("generate_linear_trajectory: t_pred < 2");
    Trajectory t;
    t.dt = dt;
    t.points.reserve(static_cast<std::size_t>(t_pred));
    for (int k = 0; k < t_pred; ++k) {
        const double kd = static_cast<double>(k) * dt;
        t.points.push_back({start.x + kd * velocity.x, start.y + kd * velocity.y});
    }
    return t;
}

inline std::vector<Scene> generate_synthetic_dataset(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::vector<Scene> scenes;
    scenes.reserve(static_cast<std::size_t>(cfg.n_scenes));
    std::int64_t next_ped_id = 1;
    const std::int64_t frame_stride = 10;  // ETH/UCY convention: 10 frames per 0.4 s
    const std::int64_t block = frame_stride * cfg.t_pred;

    // Speeds are drawn slightly inside the configured range so the 2^-20 m
    // quantization of step vectors cannot push a segment speed out of it.
    const double margin = std::min((cfg.speed_max - cfg.speed_min) / 2.0, 1e-4);

    for (int si = 0; si < cfg.n_scenes; ++si) {
        Scene sc;
        sc.start_frame = block * si;
        const int n_peds = static_cast<int>(rng.uniform_int(cfg.peds_min, cfg.peds_max));
        for (int pi = 0; pi < n_peds; ++pi) {
            const Vec2 start = detail::quantize({rng.uniform(0.0, cfg.area), rng.uniform(0.0, cfg.area)});
            const double speed = rng.uniform(cfg.speed_min + margin, cfg.speed_max - margin);
            double heading = rng.uniform(cfg.heading_min, cfg.heading_max);
            int turn_step = -1;
            double turn_angle = 0.0;
            if (rng.uniform() < cfg.turn_probability) {
                turn_step = static_cast<int>(rng.uniform_int(1, cfg.t_pred - 1));
                turn_angle = rng.uniform(cfg.turn_angle_min, cfg.turn_angle_max);
            }

            Trajectory t;
            t.ped_id = next_ped_id++;
            t.dt = cfg.dt;
            Vec2 step = detail::quantize(
                {cfg.dt * speed * std::cos(heading), cfg.dt * speed * std::sin(heading)});
            Vec2 pos = start;
            t.points.push_back(pos);
            for (int k = 1; k < cfg.t_pred; ++k) {
                if (k == turn_step) {
                    heading += turn_angle;
                    step = detail::quantize(
                        {cfg.dt * speed * std::cos(heading), cfg.dt * speed * std::sin(heading)});
                }
                pos = pos + step;
                t.points.push_back(pos);
            }
            if (cfg.jitter_std > 0.0)
                for (Vec2& p : t.points)
                    p = {p.x + rng.normal(0.0, cfg.jitter_std), p.y + rng.normal(0.0, cfg.jitter_std)};
            sc.trajectories.push_back(std::move(t));
        }
        scenes.push_back(std::move(sc));
    }
    return scenes;
}

// Writes scenes in the common dataset format. Scenes are laid out on
// consecutive frame blocks so that parse + extract recovers exactly the
// scenes written (a sliding window crossing a block boundary has no fully
// present pedestrian and is dropped).
inline void write_dataset(const std::vector<Scene>& scenes, std::ostream& out,
                          std::int64_t frame_stride = 10) {
    out << "# frame_id ped_id x y\n";
    char buf[128];
    for (const Scene& sc : scenes) {
        for (const Trajectory& t : sc.trajectories) {
            for (std::size_t k = 0; k < t.points.size(); ++k) {
                const std::int64_t frame = sc.start_frame + frame_stride * static_cast<std::int64_t>(k);
                std::snprintf(buf, sizeof(buf), "%lld %lld %.9f %.9f\n",
                              static_cast<long long>(frame), static_cast<long long>(t.ped_id),
                              t.points[k].x, t.points[k].y);
                out << buf;
            }
        }
    }
    if (!out) throw IoError("write_dataset: stream write failed");
}

inline void write_dataset(const std::vector<Scene>& scenes, const std::string& path,
                          std::int64_t frame_stride = 10) {
    std::ofstream out(path);
    if (!out) throw IoError("write_dataset: cannot open " + path);
    write_dataset(scenes, out, frame_stride);
    out.flush();
    if (!out) throw IoError("write_dataset: write failed for " + path);
}

// Reassigns pedestrian ids and frame blocks so arbitrary scenes (which may
// overlap in frames or share ids) become writable as disjoint windows.
inline std::vector<Scene> relabel_scenes_to_blocks(std::vector<Scene> scenes,
                                                   std::int64_t frame_stride = 10) {
    std::int64_t next_ped = 1;
    std::int64_t next_frame = 0;
    for (Scene& sc : scenes) {
        sc.start_frame = next_frame;
        std::size_t len = 0;
        for (Trajectory& t : sc.trajectories) {
            t.ped_id = next_ped++;
            len = std::max(len, t.points.size());
        }
        next_frame += frame_stride * static_cast<std::int64_t>(len);
    }
    return scenes;
}

}  // namespace aasgan::synth
