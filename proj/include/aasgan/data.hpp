#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aasgan/common.hpp"

namespace aasgan {

// Sampling interval shared by every dataset this project handles.
inline constexpr double kSampleDt = 0.4;

// ---------------------------------------------------------------- types

struct TrajectorySample {
    std::int64_t frame_id = 0;
    std::int64_t ped_id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Trajectory {
    std::int64_t ped_id = 0;
    std::vector<Vec2> points;
    double dt = kSampleDt;
};

// A window of t_pred consecutive frames; every member trajectory covers the
// whole window (full-presence rule).
struct Scene {
    std::int64_t start_frame = 0;
    std::vector<Trajectory> trajectories;
};

// A trajectory as offsets from an origin. to_relative anchors points[0] at
// (0, 0) exactly; model outputs reuse the type without that anchor.
struct RelativeTrajectory {
    Vec2 origin;
    std::vector<Vec2> points;
};

struct SplitTrajectory {
    std::vector<Vec2> obs;
    std::vector<Vec2> pred;
};

// ---------------------------------------------------------------- parsing

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
    std::size_t pos = 0;
    try {
        out = std::stod(tok, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == tok.size() && std::isfinite(out);
}

inline bool to_nonneg_int(double v, std::int64_t& out) {
    if (v < 0.0 || v != std::floor(v) || v > 9.0e15) return false;
    out = static_cast<std::int64_t>(v);
    return true;
}

}  // namespace detail

// One sample per line: "frame_id ped_id x y", whitespace separated. Lines
// starting with '#' are comments. Integer ids may be written as "10" or
// "10.0" (ETH/UCY processed files use the latter).
inline std::vector<TrajectorySample> parse_trajectory_samples(std::istream& in,
                                                              const std::string& source) {
    std::vector<TrajectorySample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> fields;
        std::string tok;
        while (ls >> tok) fields.push_back(tok);
        if (fields.empty() || fields[0][0] == '#') continue;
        if (fields.size() != 4)
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        double raw[4];
        for (int i = 0; i < 4; ++i)
            if (!detail::parse_double(fields[i], raw[i]))
                throw ParseError(source + ":" + std::to_string(line_no) + ": field " +
                                 std::to_string(i + 1) + " is not numeric: '" + fields[i] + "'");
        TrajectorySample s;
        if (!detail::to_nonneg_int(raw[0], s.frame_id))
            throw ParseError(source + ":" + std::to_string(line_no) +
                             ": frame_id must be a non-negative integer");
        if (!detail::to_nonneg_int(raw[1], s.ped_id))
            throw ParseError(source + ":" + std::to_string(line_no) +
                             ": ped_id must be a non-negative integer");
        s.x = raw[2];
        s.y = raw[3];
        samples.push_back(s);
    }

    std::sort(samples.begin(), samples.end(), [](const TrajectorySample& a, const TrajectorySample& b) {
        return a.ped_id != b.ped_id ? a.ped_id < b.ped_id : a.frame_id < b.frame_id;
    });
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].ped_id == samples[i - 1].ped_id &&
            samples[i].frame_id == samples[i - 1].frame_id)
            throw DataError(source + ": duplicate observation for pedestrian " +
                            std::to_string(samples[i].ped_id) + " at frame " +
                            std::to_string(samples[i].frame_id));
    }
    return samples;
}

inline std::vector<TrajectorySample> parse_trajectory_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    return parse_trajectory_samples(in, path);
}

// ---------------------------------------------------------------- scenes

// Slides a window of t_pred frame steps over the dataset, advancing one step
// at a time. A pedestrian joins a scene only when present at every frame of
// the window; windows with no qualifying pedestrian are dropped. The frame
// stride is inferred from the data and must be uniform.
inline std::vector<Scene> extract_scenes(const std::vector<TrajectorySample>& samples, int t_obs,
                                         int t_pred) {
    if (t_obs <= 0 || t_obs >= t_pred)
        throw ArgumentError("extract_scenes: need 0 < t_obs < t_pred");
    if (samples.empty()) return {};

    struct Track {
        std::int64_t ped_id;
        std::int64_t first_frame;
        std::vector<Vec2> points;
    };

    std::vector<TrajectorySample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(), [](const TrajectorySample& a, const TrajectorySample& b) {
        return a.ped_id != b.ped_id ? a.ped_id < b.ped_id : a.frame_id < b.frame_id;
    });

    // Group into per-pedestrian tracks and infer the global stride.
    std::vector<Track> tracks;
    std::int64_t stride = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].ped_id == sorted[i].ped_id) ++j;
        Track tr;
        tr.ped_id = sorted[i].ped_id;
        tr.first_frame = sorted[i].frame_id;
        for (std::size_t k = i; k < j; ++k) {
            tr.points.push_back({sorted[k].x, sorted[k].y});
            if (k > i) {
                const std::int64_t d = sorted[k].frame_id - sorted[k - 1].frame_id;
                if (d <= 0)
                    throw DataError("extract_scenes: non-increasing frames for pedestrian " +
                                    std::to_string(tr.ped_id));
                if (stride == 0) stride = d;
                if (d != stride)
                    throw DataError("extract_scenes: non-uniform frame stride for pedestrian " +
                                    std::to_string(tr.ped_id) + " (" + std::to_string(d) + " vs " +
                                    std::to_string(stride) + ")");
            }
        }
        tracks.push_back(std::move(tr));
        i = j;
    }
    if (stride == 0) return {};  // no pedestrian has two samples; no window can fill

    // All tracks must live on one frame grid.
    const std::int64_t phase = tracks[0].first_frame % stride;
    std::int64_t min_frame = tracks[0].first_frame;
    std::int64_t max_frame = tracks[0].first_frame;
    for (const Track& tr : tracks) {
        if (tr.first_frame % stride != phase)
            throw DataError("extract_scenes: pedestrian " + std::to_string(tr.ped_id) +
                            " is off the common frame grid");
        min_frame = std::min(min_frame, tr.first_frame);
        max_frame = std::max(max_frame,
                             tr.first_frame + stride * static_cast<std::int64_t>(tr.points.size() - 1));
    }

    std::vector<Scene> scenes;
    const std::int64_t window_span = stride * (t_pred - 1);
    for (std::int64_t f = min_frame; f + window_span <= max_frame; f += stride) {
        Scene sc;
        sc.start_frame = f;
        for (const Track& tr : tracks) {
            const std::int64_t last = tr.first_frame + stride * static_cast<std::int64_t>(tr.points.size() - 1);
            if (tr.first_frame <= f && f + window_span <= last) {
                Trajectory t;
                t.ped_id = tr.ped_id;
                const std::size_t off = static_cast<std::size_t>((f - tr.first_frame) / stride);
                t.points.assign(tr.points.begin() + static_cast<std::ptrdiff_t>(off),
                                tr.points.begin() + static_cast<std::ptrdiff_t>(off + t_pred));
                sc.trajectories.push_back(std::move(t));
            }
        }
        if (!sc.trajectories.empty()) scenes.push_back(std::move(sc));
    }
    return scenes;
}

// ---------------------------------------------------------------- coordinates

inline RelativeTrajectory to_relative(const Trajectory& t) {
    if (t.points.empty()) throw ArgumentError("to_relative: empty trajectory");
    RelativeTrajectory r;
    r.origin = t.points[0];
    r.points.reserve(t.points.size());
    for (Vec2 p : t.points) r.points.push_back(p - r.origin);
    return r;
}

inline Trajectory to_absolute(const RelativeTrajectory& r, std::int64_t ped_id = 0,
                              double dt = kSampleDt) {
    Trajectory t;
    t.ped_id = ped_id;
    t.dt = dt;
    t.points.reserve(r.points.size());
    for (Vec2 p : r.points) t.points.push_back(p + r.origin);
    return t;
}

inline SplitTrajectory split_obs_pred(const std::vector<Vec2>& points, int t_obs) {
    if (t_obs <= 0 || static_cast<std::size_t>(t_obs) >= points.size())
        throw ArgumentError("split_obs_pred: t_obs out of range (" + std::to_string(t_obs) +
                            " for length " + std::to_string(points.size()) + ")");
    SplitTrajectory s;
    s.obs.assign(points.begin(), points.begin() + t_obs);
    s.pred.assign(points.begin() + t_obs, points.end());
    return s;
}

inline SplitTrajectory split_obs_pred(const Trajectory& t, int t_obs) {
    return split_obs_pred(t.points, t_obs);
}

inline SplitTrajectory split_obs_pred(const RelativeTrajectory& t, int t_obs) {
    return split_obs_pred(t.points, t_obs);
}

}  // namespace aasgan
