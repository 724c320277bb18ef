#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aasgan/autodiff.hpp"
#include "aasgan/checkpoint.hpp"
#include "aasgan/common.hpp"
#include "aasgan/data.hpp"
#include "aasgan/losses.hpp"
#include "aasgan/models.hpp"
#include "aasgan/synth.hpp"

namespace aasgan::training {

// ---------------------------------------------------------------- config

struct TrainConfig {
    std::string mode = "aa-sgan";  // aa-sgan | sgan-real | sgan-synthetic | sgan-hybrid |
                                   // independent-augmenter
    int t_obs = 8;
    int t_pred = 20;
    int batch_size = 4;  // scenes per step and ratio unit; a step consumes
                         // batch_size*ratio_real real and batch_size*ratio_synth synthetic scenes
    double lr_d = 5e-4;
    double lr_g = 5e-4;
    double lr_a = 5e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    long long steps = 100;
    std::uint64_t seed = 1;
    int ratio_real = 1;
    int ratio_synth = 1;
    int variety_k = 1;
    bool clip_enabled = true;
    double grad_clip = 2.0;
    // model dimensions
    int embed_dim = 16;
    int hidden_dim = 32;
    int noise_dim = 8;
    int pool_dim = 24;
    int pool_spatial_dim = 16;
    int pool_out_dim = 32;
    int head_dim = 16;

    void validate() const {
        if (mode != "aa-sgan" && mode != "sgan-real" && mode != "sgan-synthetic" &&
            mode != "sgan-hybrid" && mode != "independent-augmenter")
            throw ArgumentError("TrainConfig: unknown mode '" + mode + "'");
        if (t_obs <= 0 || t_obs >= t_pred)
            throw ArgumentError("TrainConfig: need 0 < t_obs < t_pred");
        if (batch_size < 1) throw ArgumentError("TrainConfig: batch_size must be >= 1");
        if (lr_d < 0 || lr_g < 0 || lr_a < 0)
            throw ArgumentError("TrainConfig: learning rates must be non-negative");
        if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
            throw ArgumentError("TrainConfig: adam betas must lie in [0, 1)");
        if (steps < 0) throw ArgumentError("TrainConfig: steps must be >= 0");
        if (ratio_real < 1 || ratio_synth < 1)
            throw ArgumentError("TrainConfig: ratio components must be positive");
        if (variety_k < 1) throw ArgumentError("TrainConfig: variety_k must be >= 1");
        if (clip_enabled && !(grad_clip > 0))
            throw ArgumentError("TrainConfig: grad_clip must be positive or none");
        model_config().validate();
        if (head_dim < 1) throw ArgumentError("TrainConfig: head_dim must be >= 1");
    }

    models::ModelConfig model_config() const {
        models::ModelConfig mc;
        mc.enc.embed_dim = embed_dim;
        mc.enc.hidden_dim = hidden_dim;
        mc.dec.embed_dim = embed_dim;
        mc.dec.hidden_dim = hidden_dim;
        mc.dec.noise_dim = noise_dim;
        mc.dec.pool_dim = pool_dim;
        mc.pool.spatial_dim = pool_spatial_dim;
        mc.pool.out_dim = pool_out_dim;
        return mc;
    }

    bool uses_real() const { return mode != "sgan-synthetic"; }
    bool uses_synth() const { return mode != "sgan-real"; }
    bool uses_augmenter() const { return mode == "aa-sgan" || mode == "independent-augmenter"; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double cfg_double(const std::string& key, const std::string& val) {
    std::size_t pos = 0;
    double d = 0;
    try {
        d = std::stod(val, &pos);
    } catch (const std::exception&) {
        throw ParseError("config: bad number for '" + key + "': '" + val + "'");
    }
    if (pos != val.size() || !std::isfinite(d))
        throw ParseError("config: bad number for '" + key + "': '" + val + "'");
    return d;
}

inline long long cfg_int(const std::string& key, const std::string& val) {
    const double d = cfg_double(key, val);
    const long long i = static_cast<long long>(d);
    if (static_cast<double>(i) != d)
        throw ParseError("config: '" + key + "' must be an integer, got '" + val + "'");
    return i;
}

inline std::string fmt_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return std::string(buf);
}

}  // namespace detail

// Flat "key = value" lines; '#' starts a comment; unknown keys are rejected.
// Parsed keys override `base`, so flag overrides can be layered on a file.
inline TrainConfig parse_train_config(std::istream& in, TrainConfig cfg = TrainConfig{}) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ParseError("config line " + std::to_string(line_no) + ": empty key or value");

        if (key == "mode") {
            cfg.mode = val;
        } else if (key == "t_obs") {
            cfg.t_obs = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "t_pred") {
            cfg.t_pred = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "lr_d") {
            cfg.lr_d = detail::cfg_double(key, val);
        } else if (key == "lr_g") {
            cfg.lr_g = detail::cfg_double(key, val);
        } else if (key == "lr_a") {
            cfg.lr_a = detail::cfg_double(key, val);
        } else if (key == "adam_betas") {
            const std::size_t comma = val.find(',');
            if (comma == std::string::npos)
                throw ParseError("config: adam_betas wants 'beta1,beta2', got '" + val + "'");
            cfg.beta1 = detail::cfg_double(key, detail::trim(val.substr(0, comma)));
            cfg.beta2 = detail::cfg_double(key, detail::trim(val.substr(comma + 1)));
        } else if (key == "steps") {
            cfg.steps = detail::cfg_int(key, val);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(detail::cfg_int(key, val));
        } else if (key == "real_synth_ratio") {
            const std::size_t colon = val.find(':');
            if (colon == std::string::npos)
                throw ParseError("config: real_synth_ratio wants 'R:S', got '" + val + "'");
            cfg.ratio_real = static_cast<int>(detail::cfg_int(key, detail::trim(val.substr(0, colon))));
            cfg.ratio_synth =
                static_cast<int>(detail::cfg_int(key, detail::trim(val.substr(colon + 1))));
        } else if (key == "variety_k") {
            cfg.variety_k = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "grad_clip") {
            if (val == "none") {
                cfg.clip_enabled = false;
                cfg.grad_clip = 0.0;
            } else {
                cfg.clip_enabled = true;
                cfg.grad_clip = detail::cfg_double(key, val);
            }
        } else if (key == "embed_dim") {
            cfg.embed_dim = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "hidden_dim") {
            cfg.hidden_dim = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "noise_dim") {
            cfg.noise_dim = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "pool_dim") {
            cfg.pool_dim = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "pool_spatial_dim") {
            cfg.pool_spatial_dim = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "pool_out_dim") {
            cfg.pool_out_dim = static_cast<int>(detail::cfg_int(key, val));
        } else if (key == "head_dim") {
            cfg.head_dim = static_cast<int>(detail::cfg_int(key, val));
        } else {
            throw ParseError("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline TrainConfig parse_train_config(const std::string& text, TrainConfig base = TrainConfig{}) {
    std::istringstream in(text);
    return parse_train_config(in, std::move(base));
}

inline std::string format_train_config(const TrainConfig& c) {
    std::ostringstream out;
    out << "mode = " << c.mode << "\n";
    out << "t_obs = " << c.t_obs << "\n";
    out << "t_pred = " << c.t_pred << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "lr_d = " << detail::fmt_double(c.lr_d) << "\n";
    out << "lr_g = " << detail::fmt_double(c.lr_g) << "\n";
    out << "lr_a = " << detail::fmt_double(c.lr_a) << "\n";
    out << "adam_betas = " << detail::fmt_double(c.beta1) << "," << detail::fmt_double(c.beta2)
        << "\n";
    out << "steps = " << c.steps << "\n";
    out << "seed = " << c.seed << "\n";
    out << "real_synth_ratio = " << c.ratio_real << ":" << c.ratio_synth << "\n";
    out << "variety_k = " << c.variety_k << "\n";
    out << "grad_clip = " << (c.clip_enabled ? detail::fmt_double(c.grad_clip) : std::string("none"))
        << "\n";
    out << "embed_dim = " << c.embed_dim << "\n";
    out << "hidden_dim = " << c.hidden_dim << "\n";
    out << "noise_dim = " << c.noise_dim << "\n";
    out << "pool_dim = " << c.pool_dim << "\n";
    out << "pool_spatial_dim = " << c.pool_spatial_dim << "\n";
    out << "pool_out_dim = " << c.pool_out_dim << "\n";
    out << "head_dim = " << c.head_dim << "\n";
    return out.str();
}

// ---------------------------------------------------------------- optimizer

inline double global_grad_norm(const ParamStore& ps) {
    double sq = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (double g : ps.at(i).grad.v) sq += g * g;
    return std::sqrt(sq);
}

inline void clip_global_norm(ParamStore& ps, double max_norm) {
    const double norm = global_grad_norm(ps);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (double& g : ps.at(i).grad.v) g *= scale;
}

// Moment buffers are indexed like the store it was initialized from; the
// store is passed at call time so owners stay freely movable.
class Adam {
  public:
    Adam() = default;
    Adam(const ParamStore& ps, double lr, double beta1, double beta2)
        : lr_(lr), b1_(beta1), b2_(beta2) {
        for (std::size_t i = 0; i < ps.size(); ++i) {
            m_.push_back(Tensor::zeros(ps.at(i).value.shape));
            v_.push_back(Tensor::zeros(ps.at(i).value.shape));
        }
    }

    // Applies one update from the accumulated gradients; does not zero them.
    void step(ParamStore& ps) {
        if (ps.size() != m_.size()) throw ContractError("Adam: store/moment size mismatch");
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            Param& p = ps.at(i);
            for (std::size_t j = 0; j < p.value.v.size(); ++j) {
                const double g = p.grad.v[j];
                m_[i].v[j] = b1_ * m_[i].v[j] + (1.0 - b1_) * g;
                v_[i].v[j] = b2_ * v_[i].v[j] + (1.0 - b2_) * g * g;
                const double mhat = m_[i].v[j] / c1;
                const double vhat = v_[i].v[j] / c2;
                p.value.v[j] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
            }
        }
    }

    long long t() const { return t_; }

    ckpt::Section dump(const std::string& name, const ParamStore& ps) const {
        ckpt::Section s;
        s.name = name;
        s.add("t", Tensor::scalar(static_cast<double>(t_)));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            s.add("m." + ps.at(i).name, m_[i]);
            s.add("v." + ps.at(i).name, v_[i]);
        }
        return s;
    }

    void load(const ckpt::Section& s, const ParamStore& ps) {
        t_ = static_cast<long long>(s.get("t").v[0]);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string& pname = ps.at(i).name;
            const Tensor& m = s.get("m." + pname);
            const Tensor& v = s.get("v." + pname);
            if (m.shape != m_[i].shape || v.shape != v_[i].shape)
                throw FormatError("Adam state '" + s.name + "': shape mismatch for '" + pname +
                                  "'");
            m_[i] = m;
            v_[i] = v;
        }
    }

  private:
    static constexpr double kEps = 1e-8;
    double lr_ = 0.0;
    double b1_ = 0.5;
    double b2_ = 0.999;
    long long t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

// ---------------------------------------------------------------- model bundle

struct Models {
    models::AugmenterModel A;
    models::GeneratorModel G;
    models::DiscriminatorModel D;

    static Models create(const models::ModelConfig& mc, int head_dim, Rng& rng) {
        Models m;
        m.A = models::AugmenterModel::create(mc, rng);
        m.G = models::GeneratorModel::create(mc, rng);
        m.D = models::DiscriminatorModel::create(mc.enc, head_dim, rng);
        return m;
    }

    void zero_all_grads() {
        A.params.zero_grad();
        G.params.zero_grad();
        D.params.zero_grad();
    }
};

struct Optimizers {
    Adam a, g, d;

    static Optimizers create(Models& m, const TrainConfig& cfg) {
        Optimizers o;
        o.a = Adam(m.A.params, cfg.lr_a, cfg.beta1, cfg.beta2);
        o.g = Adam(m.G.params, cfg.lr_g, cfg.beta1, cfg.beta2);
        o.d = Adam(m.D.params, cfg.lr_d, cfg.beta1, cfg.beta2);
        return o;
    }
};

// ---------------------------------------------------------------- step internals

namespace detail {

inline void require_scene_lengths(const std::vector<models::RelScene>& scenes, int t_pred,
                                  const char* who) {
    for (const models::RelScene& s : scenes) {
        if (s.peds.empty()) throw DataError(std::string(who) + ": scene with no pedestrians");
        for (const RelativeTrajectory& rt : s.peds)
            if (rt.points.size() != static_cast<std::size_t>(t_pred))
                throw DataError(std::string(who) + ": scene trajectory length " +
                                std::to_string(rt.points.size()) + " != t_pred " +
                                std::to_string(t_pred));
    }
}

inline std::vector<models::RelScene> to_rel(const std::vector<Scene>& scenes) {
    std::vector<models::RelScene> out;
    out.reserve(scenes.size());
    for (const Scene& s : scenes) out.push_back(models::rel_scene(s));
    return out;
}

inline std::vector<std::vector<Vec2>> detached_augment(const models::AugmenterModel& A,
                                                       const models::RelScene& s, int t_pred,
                                                       Rng& rng) {
    return models::sample_augment(A, s, t_pred, rng);
}

inline std::vector<std::vector<Vec2>> detached_predict(const models::GeneratorModel& G,
                                                       const models::RelScene& obs, int t_obs,
                                                       int steps, Rng& rng) {
    return models::sample_predict(G, obs, t_obs, steps, rng);
}

inline void append(std::vector<ad::Value>& dst, const std::vector<ad::Value>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

// One Generator branch update: variety_k prediction candidates per scene,
// candidate 0 fused with the observation and scored by D. Steps only G;
// gradients that reach D's parameters are discarded.
struct BranchResult {
    double adv = 0.0;
    double l2 = 0.0;
};

inline BranchResult generator_branch_update(const std::vector<models::RelScene>& obs_scenes,
                                            const std::vector<std::vector<std::vector<Vec2>>>& gt,
                                            Models& M, Adam& opt_g, const TrainConfig& cfg,
                                            Rng& rng) {
    const int steps = cfg.t_pred - cfg.t_obs;
    ad::Tape tape;
    std::vector<ad::Value> scores;
    std::vector<std::vector<Vec2>> gt_all;
    std::vector<std::vector<std::vector<ad::Value>>> cands(
        static_cast<std::size_t>(cfg.variety_k));
    for (std::size_t si = 0; si < obs_scenes.size(); ++si) {
        const models::RelScene& obs = obs_scenes[si];
        for (int k = 0; k < cfg.variety_k; ++k) {
            auto z = models::draw_noise(rng, obs.peds.size(), cfg.noise_dim);
            auto preds = models::predict(tape, M.G, obs, z, cfg.t_obs, steps);
            if (k == 0) {
                auto fused = models::const_leaves(tape, models::scene_points(obs));
                for (std::size_t i = 0; i < fused.size(); ++i)
                    fused[i].insert(fused[i].end(), preds[i].begin(), preds[i].end());
                append(scores, models::discriminate(tape, M.D, fused, cfg.t_pred));
            }
            for (auto& row : preds) cands[static_cast<std::size_t>(k)].push_back(std::move(row));
        }
        gt_all.insert(gt_all.end(), gt[si].begin(), gt[si].end());
    }
    losses::LossParts parts = losses::generator_branch_loss(tape, scores, gt_all, cands, steps);
    tape.backward(parts.total);
    if (cfg.clip_enabled) clip_global_norm(M.G.params, cfg.grad_clip);
    opt_g.step(M.G.params);
    M.G.params.zero_grad();
    M.D.params.zero_grad();
    return {parts.adv.scalar(), parts.l2.scalar()};
}

// Augmenter update: gradients flow through D's score of the augmented
// trajectories; only A's parameters step.
inline BranchResult augmenter_update(const std::vector<models::RelScene>& synth, Models& M,
                                     Adam& opt_a, const TrainConfig& cfg, Rng& rng) {
    ad::Tape tape;
    std::vector<ad::Value> scores;
    std::vector<std::vector<Vec2>> s_all;
    std::vector<std::vector<ad::Value>> a_all;
    for (const models::RelScene& s : synth) {
        auto z = models::draw_noise(rng, s.peds.size(), cfg.noise_dim);
        auto aug = models::augment(tape, M.A, s, z, cfg.t_pred);
        append(scores, models::discriminate(tape, M.D, aug, cfg.t_pred));
        for (const auto& row : models::scene_points(s)) s_all.push_back(row);
        for (auto& row : aug) a_all.push_back(std::move(row));
    }
    losses::LossParts parts = losses::augmenter_loss(tape, scores, s_all, a_all, cfg.t_pred);
    tape.backward(parts.total);
    if (cfg.clip_enabled) clip_global_norm(M.A.params, cfg.grad_clip);
    opt_a.step(M.A.params);
    M.A.params.zero_grad();
    M.D.params.zero_grad();
    return {parts.adv.scalar(), parts.l2.scalar()};
}

}  // namespace detail

// ---------------------------------------------------------------- train steps

// Full three-phase step: D over {r, r~, a, a~}, then G over the real and the
// synth-augmented branches (two sequential updates, A's output held fixed),
// then A through D's score of a.
inline losses::LossReport train_step(const std::vector<Scene>& batch_real,
                                     const std::vector<Scene>& batch_synth, Models& M,
                                     Optimizers& opt, const TrainConfig& cfg, Rng& rng,
                                     long long step_index) {
    if (cfg.mode != "aa-sgan") throw ArgumentError("train_step: mode must be aa-sgan");
    if (batch_real.empty() || batch_synth.empty()) throw ArgumentError("train_step: empty batch");
    if (batch_real.size() * static_cast<std::size_t>(cfg.ratio_synth) !=
        batch_synth.size() * static_cast<std::size_t>(cfg.ratio_real))
        throw ArgumentError("train_step: batch sizes violate real_synth_ratio");

    const auto rel_real = detail::to_rel(batch_real);
    const auto rel_synth = detail::to_rel(batch_synth);
    detail::require_scene_lengths(rel_real, cfg.t_pred, "train_step(real)");
    detail::require_scene_lengths(rel_synth, cfg.t_pred, "train_step(synth)");
    const int pred_steps = cfg.t_pred - cfg.t_obs;

    losses::LossReport rep;
    rep.step = step_index;

    // -------- phase 1: Discriminator
    {
        ad::Tape tape;
        std::vector<ad::Value> sr, srt, sa, sat;
        for (const auto& R : rel_real) detail::append(sr, models::discriminate(tape, M.D, R, cfg.t_pred));
        for (const auto& R : rel_real) {
            auto obs = models::obs_prefix(R, cfg.t_obs);
            auto pred = detail::detached_predict(M.G, obs, cfg.t_obs, pred_steps, rng);
            auto fused = models::fuse_points(models::scene_points(obs), pred);
            detail::append(srt, models::discriminate(tape, M.D, models::const_leaves(tape, fused),
                                                     cfg.t_pred));
        }
        std::vector<std::vector<std::vector<Vec2>>> aug_cache;
        aug_cache.reserve(rel_synth.size());
        for (const auto& S : rel_synth) {
            auto a = detail::detached_augment(M.A, S, cfg.t_pred, rng);
            detail::append(sa, models::discriminate(tape, M.D, models::const_leaves(tape, a),
                                                    cfg.t_pred));
            aug_cache.push_back(std::move(a));
        }
        for (std::size_t i = 0; i < rel_synth.size(); ++i) {
            std::vector<std::vector<Vec2>> a_obs_pts(aug_cache[i].size());
            for (std::size_t p = 0; p < aug_cache[i].size(); ++p)
                a_obs_pts[p].assign(aug_cache[i][p].begin(), aug_cache[i][p].begin() + cfg.t_obs);
            auto a_obs =
                models::scene_from_rel_points(models::scene_origins(rel_synth[i]), a_obs_pts);
            auto pred = detail::detached_predict(M.G, a_obs, cfg.t_obs, pred_steps, rng);
            auto fused = models::fuse_points(a_obs_pts, pred);
            detail::append(sat, models::discriminate(tape, M.D, models::const_leaves(tape, fused),
                                                     cfg.t_pred));
        }
        ad::Value d_loss = losses::discriminator_loss(sr, sa, srt, sat);
        tape.backward(d_loss);
        if (cfg.clip_enabled) clip_global_norm(M.D.params, cfg.grad_clip);
        opt.d.step(M.D.params);
        M.D.params.zero_grad();
        rep.d_loss = d_loss.scalar();
    }

    // -------- phase 2: Generator, real branch then synth-augmented branch
    {
        std::vector<models::RelScene> obs_scenes;
        std::vector<std::vector<std::vector<Vec2>>> gt;
        for (const auto& R : rel_real) {
            obs_scenes.push_back(models::obs_prefix(R, cfg.t_obs));
            gt.push_back(models::pred_suffix_points(R, cfg.t_obs));
        }
        auto res = detail::generator_branch_update(obs_scenes, gt, M, opt.g, cfg, rng);
        rep.g_real_adv = res.adv;
        rep.g_real_l2 = res.l2;
    }
    {
        std::vector<models::RelScene> obs_scenes;
        std::vector<std::vector<std::vector<Vec2>>> gt;
        for (const auto& S : rel_synth) {
            auto a = detail::detached_augment(M.A, S, cfg.t_pred, rng);
            std::vector<std::vector<Vec2>> a_obs_pts(a.size());
            std::vector<std::vector<Vec2>> a_pred_pts(a.size());
            for (std::size_t p = 0; p < a.size(); ++p) {
                a_obs_pts[p].assign(a[p].begin(), a[p].begin() + cfg.t_obs);
                a_pred_pts[p].assign(a[p].begin() + cfg.t_obs, a[p].end());
            }
            obs_scenes.push_back(
                models::scene_from_rel_points(models::scene_origins(S), a_obs_pts));
            gt.push_back(std::move(a_pred_pts));
        }
        auto res = detail::generator_branch_update(obs_scenes, gt, M, opt.g, cfg, rng);
        rep.g_synth_adv = res.adv;
        rep.g_synth_l2 = res.l2;
    }

    // -------- phase 3: Augmenter
    {
        auto res = detail::augmenter_update(rel_synth, M, opt.a, cfg, rng);
        rep.a_adv = res.adv;
        rep.a_l2 = res.l2;
    }
    return rep;
}

// Standard SGAN alternation without the Augmenter. The batch is the data
// batch for the mode (real scenes, synthetic scenes, or the interleaved
// hybrid mix); every scene is treated as ground-truth data.
inline losses::LossReport train_step_baseline(const std::vector<Scene>& batch, Models& M,
                                              Optimizers& opt, const TrainConfig& cfg, Rng& rng,
                                              long long step_index) {
    if (cfg.mode != "sgan-real" && cfg.mode != "sgan-synthetic" && cfg.mode != "sgan-hybrid")
        throw ArgumentError("train_step_baseline: mode must be an sgan baseline");
    if (batch.empty()) throw ArgumentError("train_step_baseline: empty batch");
    const auto rel = detail::to_rel(batch);
    detail::require_scene_lengths(rel, cfg.t_pred, "train_step_baseline");
    const int pred_steps = cfg.t_pred - cfg.t_obs;

    losses::LossReport rep;
    rep.step = step_index;

    // -------- Discriminator: real class vs fused-prediction class
    {
        ad::Tape tape;
        std::vector<ad::Value> sr, srt;
        for (const auto& R : rel) detail::append(sr, models::discriminate(tape, M.D, R, cfg.t_pred));
        for (const auto& R : rel) {
            auto obs = models::obs_prefix(R, cfg.t_obs);
            auto pred = detail::detached_predict(M.G, obs, cfg.t_obs, pred_steps, rng);
            auto fused = models::fuse_points(models::scene_points(obs), pred);
            detail::append(srt, models::discriminate(tape, M.D, models::const_leaves(tape, fused),
                                                     cfg.t_pred));
        }
        ad::Value d_loss = losses::discriminator_loss(sr, {}, srt, {});
        tape.backward(d_loss);
        if (cfg.clip_enabled) clip_global_norm(M.D.params, cfg.grad_clip);
        opt.d.step(M.D.params);
        M.D.params.zero_grad();
        rep.d_loss = d_loss.scalar();
    }

    // -------- Generator: single update over the whole batch
    {
        std::vector<models::RelScene> obs_scenes;
        std::vector<std::vector<std::vector<Vec2>>> gt;
        for (const auto& R : rel) {
            obs_scenes.push_back(models::obs_prefix(R, cfg.t_obs));
            gt.push_back(models::pred_suffix_points(R, cfg.t_obs));
        }
        auto res = detail::generator_branch_update(obs_scenes, gt, M, opt.g, cfg, rng);
        rep.g_real_adv = res.adv;
        rep.g_real_l2 = res.l2;
    }
    return rep;
}

// Ablation: trains only A and D (D sees real as real, augmented as fake); G
// is never touched.
inline losses::LossReport train_augmenter_standalone(const std::vector<Scene>& batch_real,
                                                     const std::vector<Scene>& batch_synth,
                                                     Models& M, Optimizers& opt,
                                                     const TrainConfig& cfg, Rng& rng,
                                                     long long step_index) {
    if (cfg.mode != "independent-augmenter")
        throw ArgumentError("train_augmenter_standalone: mode must be independent-augmenter");
    if (batch_real.empty() || batch_synth.empty())
        throw ArgumentError("train_augmenter_standalone: empty batch");
    const auto rel_real = detail::to_rel(batch_real);
    const auto rel_synth = detail::to_rel(batch_synth);
    detail::require_scene_lengths(rel_real, cfg.t_pred, "train_augmenter_standalone(real)");
    detail::require_scene_lengths(rel_synth, cfg.t_pred, "train_augmenter_standalone(synth)");

    losses::LossReport rep;
    rep.step = step_index;

    {
        ad::Tape tape;
        std::vector<ad::Value> sr, sa;
        for (const auto& R : rel_real) detail::append(sr, models::discriminate(tape, M.D, R, cfg.t_pred));
        for (const auto& S : rel_synth) {
            auto a = detail::detached_augment(M.A, S, cfg.t_pred, rng);
            detail::append(sa, models::discriminate(tape, M.D, models::const_leaves(tape, a),
                                                    cfg.t_pred));
        }
        ad::Value d_loss = losses::discriminator_loss(sr, sa, {}, {});
        tape.backward(d_loss);
        if (cfg.clip_enabled) clip_global_norm(M.D.params, cfg.grad_clip);
        opt.d.step(M.D.params);
        M.D.params.zero_grad();
        rep.d_loss = d_loss.scalar();
    }
    {
        auto res = detail::augmenter_update(rel_synth, M, opt.a, cfg, rng);
        rep.a_adv = res.adv;
        rep.a_l2 = res.l2;
    }
    return rep;
}

// Maps every scene of a synthetic dataset through the Augmenter (per-scene
// rng streams derived from the seed) and relabels the results into a
// writeable dataset in absolute coordinates.
inline std::vector<Scene> augment_dataset(const models::AugmenterModel& A,
                                          const std::vector<Scene>& synth, int t_pred,
                                          std::uint64_t seed) {
    std::vector<Scene> out;
    out.reserve(synth.size());
    for (std::size_t si = 0; si < synth.size(); ++si) {
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(si)));
        models::RelScene rel = models::rel_scene(synth[si]);
        auto a = models::sample_augment(A, rel, t_pred, rng);
        Scene dst;
        for (std::size_t i = 0; i < a.size(); ++i) {
            RelativeTrajectory rt;
            rt.origin = rel.peds[i].origin;
            rt.points = a[i];
            dst.trajectories.push_back(to_absolute(rt, static_cast<std::int64_t>(i + 1)));
        }
        out.push_back(std::move(dst));
    }
    return synth::relabel_scenes_to_blocks(std::move(out));
}

// Models plus config straight from a checkpoint file, no datasets needed;
// sections absent from the file keep their seeded initialization.
struct LoadedCheckpoint {
    TrainConfig cfg;
    Models models;
    long long step = 0;
    bool has_augmenter = false;
    bool has_generator = false;
};

inline LoadedCheckpoint load_checkpoint_models(const std::string& path) {
    ckpt::Checkpoint c = ckpt::Checkpoint::load(path);
    LoadedCheckpoint out;
    out.cfg = parse_train_config(c.get_meta("config"));
    out.cfg.validate();
    Rng rng(out.cfg.seed);
    out.models = Models::create(out.cfg.model_config(), out.cfg.head_dim, rng);
    if ((out.has_augmenter = c.has_section("augmenter")))
        ckpt::load_params(out.models.A.params, c.get_section("augmenter"));
    if ((out.has_generator = c.has_section("generator")))
        ckpt::load_params(out.models.G.params, c.get_section("generator"));
    ckpt::load_params(out.models.D.params, c.get_section("discriminator"));
    out.step = std::stoll(c.get_meta("step"));
    return out;
}

// ---------------------------------------------------------------- trainer

// Owns models, optimizers, the rng stream and the dataset cursors; cycles
// batches in file order so realized real:synth ratios are exact by
// construction and checkpoint resume is reproducible.
class Trainer {
  public:
    Trainer(TrainConfig cfg, std::vector<Scene> real_scenes, std::vector<Scene> synth_scenes)
        : cfg_(std::move(cfg)), real_(std::move(real_scenes)), synth_(std::move(synth_scenes)),
          rng_(cfg_.seed) {
        cfg_.validate();
        if (cfg_.uses_real() && real_.empty())
            throw DataError("Trainer: mode '" + cfg_.mode + "' needs real scenes");
        if (cfg_.uses_synth() && synth_.empty())
            throw DataError("Trainer: mode '" + cfg_.mode + "' needs synthetic scenes");
        M_ = Models::create(cfg_.model_config(), cfg_.head_dim, rng_);
        opt_ = Optimizers::create(M_, cfg_);
    }

    losses::LossReport step() {
        losses::LossReport rep;
        if (cfg_.mode == "aa-sgan") {
            auto br = take(real_, cursor_real_, cfg_.batch_size * cfg_.ratio_real);
            auto bs = take(synth_, cursor_synth_, cfg_.batch_size * cfg_.ratio_synth);
            rep = train_step(br, bs, M_, opt_, cfg_, rng_, step_);
        } else if (cfg_.mode == "independent-augmenter") {
            auto br = take(real_, cursor_real_, cfg_.batch_size * cfg_.ratio_real);
            auto bs = take(synth_, cursor_synth_, cfg_.batch_size * cfg_.ratio_synth);
            rep = train_augmenter_standalone(br, bs, M_, opt_, cfg_, rng_, step_);
        } else if (cfg_.mode == "sgan-real") {
            auto b = take(real_, cursor_real_, cfg_.batch_size);
            rep = train_step_baseline(b, M_, opt_, cfg_, rng_, step_);
        } else if (cfg_.mode == "sgan-synthetic") {
            auto b = take(synth_, cursor_synth_, cfg_.batch_size);
            rep = train_step_baseline(b, M_, opt_, cfg_, rng_, step_);
        } else {  // sgan-hybrid
            auto b = take(real_, cursor_real_, cfg_.batch_size * cfg_.ratio_real);
            auto bs = take(synth_, cursor_synth_, cfg_.batch_size * cfg_.ratio_synth);
            b.insert(b.end(), bs.begin(), bs.end());
            rep = train_step_baseline(b, M_, opt_, cfg_, rng_, step_);
        }
        ++step_;
        return rep;
    }

    // Runs A over every synthetic scene and writes the augmented trajectories
    // as a dataset file in absolute coordinates.
    void dump_augmented(const std::string& path) {
        synth::write_dataset(augment_dataset(M_.A, synth_, cfg_.t_pred, cfg_.seed), path);
    }

    // Checkpoints carry sections only for the models the mode trains; an
    // untouched model is reproduced bit-exactly at load time by the seeded
    // re-initialization.
    void save(const std::string& path) const {
        ckpt::Checkpoint c;
        c.set_meta("config", format_train_config(cfg_));
        c.set_meta("step", std::to_string(step_));
        c.set_meta("rng", rng_.state());
        c.set_meta("cursor_real", std::to_string(cursor_real_));
        c.set_meta("cursor_synth", std::to_string(cursor_synth_));
        if (cfg_.uses_augmenter()) {
            c.sections.push_back(ckpt::dump_params("augmenter", M_.A.params));
            c.sections.push_back(opt_.a.dump("adam.augmenter", M_.A.params));
        }
        if (cfg_.mode != "independent-augmenter") {
            c.sections.push_back(ckpt::dump_params("generator", M_.G.params));
            c.sections.push_back(opt_.g.dump("adam.generator", M_.G.params));
        }
        c.sections.push_back(ckpt::dump_params("discriminator", M_.D.params));
        c.sections.push_back(opt_.d.dump("adam.discriminator", M_.D.params));
        c.save(path);
    }

    static Trainer load(const std::string& path, std::vector<Scene> real_scenes,
                        std::vector<Scene> synth_scenes) {
        ckpt::Checkpoint c = ckpt::Checkpoint::load(path);
        TrainConfig cfg = parse_train_config(c.get_meta("config"));
        Trainer t(std::move(cfg), std::move(real_scenes), std::move(synth_scenes));
        if (c.has_section("augmenter")) {
            ckpt::load_params(t.M_.A.params, c.get_section("augmenter"));
            t.opt_.a.load(c.get_section("adam.augmenter"), t.M_.A.params);
        }
        if (c.has_section("generator")) {
            ckpt::load_params(t.M_.G.params, c.get_section("generator"));
            t.opt_.g.load(c.get_section("adam.generator"), t.M_.G.params);
        }
        ckpt::load_params(t.M_.D.params, c.get_section("discriminator"));
        t.opt_.d.load(c.get_section("adam.discriminator"), t.M_.D.params);
        t.step_ = std::stoll(c.get_meta("step"));
        t.rng_.restore(c.get_meta("rng"));
        t.cursor_real_ = std::stoull(c.get_meta("cursor_real"));
        t.cursor_synth_ = std::stoull(c.get_meta("cursor_synth"));
        return t;
    }

    const TrainConfig& config() const { return cfg_; }
    Models& models() { return M_; }
    const Models& models() const { return M_; }
    long long step_index() const { return step_; }
    Rng& rng() { return rng_; }

  private:
    std::vector<Scene> take(const std::vector<Scene>& src, std::size_t& cursor, int count) {
        std::vector<Scene> out;
        out.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            out.push_back(src[cursor % src.size()]);
            ++cursor;
        }
        return out;
    }

    TrainConfig cfg_;
    std::vector<Scene> real_;
    std::vector<Scene> synth_;
    Rng rng_;
    Models M_;
    Optimizers opt_;
    long long step_ = 0;
    std::size_t cursor_real_ = 0;
    std::size_t cursor_synth_ = 0;
};

}  // namespace aasgan::training
