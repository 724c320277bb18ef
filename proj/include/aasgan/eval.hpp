#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aasgan/common.hpp"
#include "aasgan/data.hpp"
#include "aasgan/models.hpp"

namespace aasgan::eval {

// ---------------------------------------------------------------- metrics

// Mean Euclidean distance over the predicted timesteps.
inline double ade(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
    if (pred.size() != gt.size())
        throw ArgumentError("ade: length mismatch " + std::to_string(pred.size()) + " vs " +
                            std::to_string(gt.size()));
    if (pred.empty()) throw ArgumentError("ade: empty sequences");
    double sum = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) sum += (pred[t] - gt[t]).norm();
    return sum / static_cast<double>(pred.size());
}

// Euclidean distance at the final predicted timestep only.
inline double fde(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
    if (pred.size() != gt.size())
        throw ArgumentError("fde: length mismatch " + std::to_string(pred.size()) + " vs " +
                            std::to_string(gt.size()));
    if (pred.empty()) throw ArgumentError("fde: empty sequences");
    return (pred.back() - gt.back()).norm();
}

// Scene-level: mean over pedestrians.
inline double scene_ade(const std::vector<std::vector<Vec2>>& pred,
                        const std::vector<std::vector<Vec2>>& gt) {
    if (pred.size() != gt.size() || pred.empty())
        throw ArgumentError("scene_ade: pedestrian count mismatch or empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += ade(pred[i], gt[i]);
    return sum / static_cast<double>(pred.size());
}

inline double scene_fde(const std::vector<std::vector<Vec2>>& pred,
                        const std::vector<std::vector<Vec2>>& gt) {
    if (pred.size() != gt.size() || pred.empty())
        throw ArgumentError("scene_fde: pedestrian count mismatch or empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += fde(pred[i], gt[i]);
    return sum / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------- reports

struct MetricsReport {
    std::string dataset_name;
    double ade = 0.0;  // meters
    double fde = 0.0;  // meters
    int n_scenes = 0;
    int n_samples_N = 0;
    std::uint64_t seed = 0;
};

inline std::string metrics_csv(const std::vector<MetricsReport>& rows) {
    std::ostringstream out;
    out << "dataset,ade,fde,n_scenes,N,seed\n";
    char buf[160];
    for (const MetricsReport& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%d,%d,%llu\n", r.dataset_name.c_str(),
                      r.ade, r.fde, r.n_scenes, r.n_samples_N,
                      static_cast<unsigned long long>(r.seed));
        out << buf;
    }
    return out.str();
}

inline std::string metrics_table(const std::vector<MetricsReport>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %9s %4s %10s\n", "dataset", "ade", "fde",
                  "n_scenes", "N", "seed");
    out << buf;
    for (const MetricsReport& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-12s %10.4f %10.4f %9d %4d %10llu\n",
                      r.dataset_name.c_str(), r.ade, r.fde, r.n_scenes, r.n_samples_N,
                      static_cast<unsigned long long>(r.seed));
        out << buf;
    }
    return out.str();
}

// ---------------------------------------------------------------- best-of-N

// Best-of-N on one scene with the caller's rng stream: draws N prediction
// samples, keeps the one with minimum scene ADE, returns (its ADE, its FDE)
// in absolute coordinates. Nested sample sets share a stream prefix, so the
// minimum is monotone non-increasing in N.
inline std::pair<double, double> best_of_n_scene(const models::GeneratorModel& G, const Scene& sc,
                                                 int t_obs, int t_pred, int N, Rng& rng) {
    if (N < 1) throw ArgumentError("best_of_n_scene: N must be >= 1");
    const models::RelScene rel = models::rel_scene(sc);
    for (const RelativeTrajectory& rt : rel.peds)
        if (rt.points.size() != static_cast<std::size_t>(t_pred))
            throw DataError("best_of_n_scene: scene trajectory length != t_pred");
    const models::RelScene obs = models::obs_prefix(rel, t_obs);
    const int steps = t_pred - t_obs;

    std::vector<std::vector<Vec2>> gt_abs(sc.trajectories.size());
    for (std::size_t i = 0; i < sc.trajectories.size(); ++i)
        gt_abs[i].assign(sc.trajectories[i].points.begin() + t_obs,
                         sc.trajectories[i].points.end());

    double best_ade = std::numeric_limits<double>::infinity();
    double best_fde = 0.0;
    for (int n = 0; n < N; ++n) {
        auto pred_rel = models::sample_predict(G, obs, t_obs, steps, rng);
        std::vector<std::vector<Vec2>> pred_abs(pred_rel.size());
        for (std::size_t i = 0; i < pred_rel.size(); ++i) {
            pred_abs[i].reserve(pred_rel[i].size());
            for (Vec2 p : pred_rel[i]) pred_abs[i].push_back(p + rel.peds[i].origin);
        }
        const double a = scene_ade(pred_abs, gt_abs);
        if (a < best_ade) {
            best_ade = a;
            best_fde = scene_fde(pred_abs, gt_abs);
        }
    }
    return {best_ade, best_fde};
}

// Mean of per-scene best-of-N ADE/FDE. Each scene gets its own rng stream
// derived from (seed, scene index), so evaluation order cannot matter.
inline MetricsReport best_of_n_eval(const models::GeneratorModel& G,
                                    const std::vector<Scene>& scenes, int t_obs, int t_pred,
                                    int N, std::uint64_t seed, const std::string& dataset_name) {
    if (N < 1) throw ArgumentError("best_of_n_eval: N must be >= 1");
    if (scenes.empty()) throw DataError("best_of_n_eval: no scenes");
    double ade_sum = 0.0;
    double fde_sum = 0.0;
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(si)));
        auto [a, f] = best_of_n_scene(G, scenes[si], t_obs, t_pred, N, rng);
        ade_sum += a;
        fde_sum += f;
    }
    MetricsReport r;
    r.dataset_name = dataset_name;
    r.ade = ade_sum / static_cast<double>(scenes.size());
    r.fde = fde_sum / static_cast<double>(scenes.size());
    r.n_scenes = static_cast<int>(scenes.size());
    r.n_samples_N = N;
    r.seed = seed;
    return r;
}

// ---------------------------------------------------------------- leave-one-out

struct NamedDataset {
    std::string name;
    std::vector<Scene> scenes;
};

// Produces the Generator to evaluate on the held-out split, given the union
// of the remaining splits.
using TrainFn = std::function<models::GeneratorModel(const std::string& held_out_name,
                                                     const std::vector<Scene>& train_scenes)>;

// One report per split (train on the union of the others, best-of-N on the
// held-out split) plus a final "average" row over the splits.
inline std::vector<MetricsReport> leave_one_out(const std::vector<NamedDataset>& datasets,
                                                int t_obs, int t_pred, int N, std::uint64_t seed,
                                                const TrainFn& train_fn) {
    if (datasets.size() < 2) throw ArgumentError("leave_one_out: need at least 2 datasets");
    std::vector<MetricsReport> reports;
    reports.reserve(datasets.size() + 1);
    for (std::size_t held = 0; held < datasets.size(); ++held) {
        std::vector<Scene> train_scenes;
        for (std::size_t j = 0; j < datasets.size(); ++j) {
            if (j == held) continue;
            train_scenes.insert(train_scenes.end(), datasets[j].scenes.begin(),
                                datasets[j].scenes.end());
        }
        models::GeneratorModel G = train_fn(datasets[held].name, train_scenes);
        reports.push_back(
            best_of_n_eval(G, datasets[held].scenes, t_obs, t_pred, N, seed, datasets[held].name));
    }
    MetricsReport avg;
    avg.dataset_name = "average";
    for (const MetricsReport& r : reports) {
        avg.ade += r.ade;
        avg.fde += r.fde;
        avg.n_scenes += r.n_scenes;
    }
    avg.ade /= static_cast<double>(reports.size());
    avg.fde /= static_cast<double>(reports.size());
    avg.n_samples_N = N;
    avg.seed = seed;
    reports.push_back(std::move(avg));
    return reports;
}

// ---------------------------------------------------------------- plotting

// SVG with the ground-truth trajectories and each named prediction set in a
// distinct style, legend included. Output bytes are deterministic for fixed
// inputs.
inline void plot_scene(const Scene& sc,
                       const std::vector<std::pair<std::string, std::vector<std::vector<Vec2>>>>&
                           predictions,
                       const std::string& path, int t_obs = 0) {
    if (sc.trajectories.empty()) throw ArgumentError("plot_scene: empty scene");
    for (const auto& [name, tracks] : predictions)
        if (tracks.size() != sc.trajectories.size())
            throw ArgumentError("plot_scene: prediction '" + name +
                                "' pedestrian count mismatch");

    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    auto grow = [&](Vec2 p) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    };
    for (const Trajectory& t : sc.trajectories)
        for (Vec2 p : t.points) grow(p);
    for (const auto& [name, tracks] : predictions)
        for (const auto& track : tracks)
            for (Vec2 p : track) grow(p);

    const double span_x = std::max(max_x - min_x, 1e-6);
    const double span_y = std::max(max_y - min_y, 1e-6);
    const double W = 800.0, H = 600.0, margin = 50.0;
    const double scale = std::min((W - 2 * margin) / span_x, (H - 2 * margin) / span_y);
    auto sx = [&](double x) { return margin + (x - min_x) * scale; };
    auto sy = [&](double y) { return H - margin - (y - min_y) * scale; };  // y up

    static const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};
    constexpr int kPaletteSize = 6;

    std::ostringstream svg;
    char buf[160];
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";

    auto polyline = [&](const std::vector<Vec2>& pts, const char* color, const char* dash,
                        double width) {
        if (pts.empty()) return;
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
            << "\"";
        if (dash[0] != '\0') svg << " stroke-dasharray=\"" << dash << "\"";
        svg << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", i ? " " : "", sx(pts[i].x),
                          sy(pts[i].y));
            svg << buf;
        }
        svg << "\"/>\n";
    };

    for (const Trajectory& t : sc.trajectories) {
        polyline(t.points, "#000000", "", 2.0);
        if (t_obs > 0 && static_cast<std::size_t>(t_obs) <= t.points.size()) {
            // observed prefix drawn heavier over the full ground truth
            std::vector<Vec2> obs(t.points.begin(), t.points.begin() + t_obs);
            polyline(obs, "#000000", "", 3.5);
        }
    }
    for (std::size_t pi = 0; pi < predictions.size(); ++pi) {
        const char* color = kPalette[pi % kPaletteSize];
        for (std::size_t i = 0; i < predictions[pi].second.size(); ++i) {
            std::vector<Vec2> line;
            if (t_obs > 0 && static_cast<std::size_t>(t_obs) <= sc.trajectories[i].points.size())
                line.push_back(sc.trajectories[i].points[t_obs - 1]);
            line.insert(line.end(), predictions[pi].second[i].begin(),
                        predictions[pi].second[i].end());
            polyline(line, color, "6,4", 2.0);
        }
    }

    double ly = 30.0;
    svg << "<line x1=\"60\" y1=\"" << ly - 4 << "\" x2=\"90\" y2=\"" << ly - 4
        << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"96\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"14\">"
        << "ground truth</text>\n";
    for (std::size_t pi = 0; pi < predictions.size(); ++pi) {
        ly += 20.0;
        svg << "<line x1=\"60\" y1=\"" << ly - 4 << "\" x2=\"90\" y2=\"" << ly - 4
            << "\" stroke=\"" << kPalette[pi % kPaletteSize]
            << "\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
        svg << "<text x=\"96\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"14\">"
            << predictions[pi].first << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("plot_scene: cannot open '" + path + "'");
    out << svg.str();
    out.flush();
    if (!out) throw IoError("plot_scene: write failed for '" + path + "'");
}

}  // namespace aasgan::eval
