#pragma once

#include <string>
#include <vector>

#include "aasgan/autodiff.hpp"
#include "aasgan/common.hpp"
#include "aasgan/data.hpp"
#include "aasgan/nn.hpp"

namespace aasgan::models {

// ---------------------------------------------------------------- configs

struct EncoderConfig {
    int embed_dim = 16;   // output size of the point embedding
    int hidden_dim = 32;  // LSTM hidden size
};

struct DecoderConfig {
    int embed_dim = 16;
    int hidden_dim = 32;
    int noise_dim = 8;   // length of z
    int pool_dim = 24;   // length of the pooled context c; pool_dim + noise_dim == hidden_dim
};

struct PoolingConfig {
    int spatial_dim = 16;  // embedding of the relative displacement
    int out_dim = 32;      // pooled vector length
};

struct ModelConfig {
    EncoderConfig enc;
    DecoderConfig dec;
    PoolingConfig pool;

    void validate() const {
        if (enc.embed_dim < 1 || enc.hidden_dim < 1 || dec.embed_dim < 1 || dec.hidden_dim < 1 ||
            dec.noise_dim < 1 || dec.pool_dim < 1 || pool.spatial_dim < 1 || pool.out_dim < 1)
            throw ArgumentError("ModelConfig: all dimensions must be positive");
        if (dec.pool_dim + dec.noise_dim != dec.hidden_dim)
            throw ArgumentError("ModelConfig: pool_dim + noise_dim must equal decoder hidden_dim");
        if (enc.hidden_dim != dec.hidden_dim)
            throw ArgumentError(
                "ModelConfig: encoder and decoder hidden sizes must match (one pooling module "
                "serves both)");
    }
};

// ---------------------------------------------------------------- models

// Encoder-decoder trajectory network. The Augmenter maps a full-length
// synthetic trajectory to a transformed trajectory of the same length; the
// Generator maps an observed prefix to its predicted continuation. Both share
// this structure.
struct TrajModel {
    ModelConfig cfg;
    ParamStore params;

    static TrajModel create(const ModelConfig& cfg, Rng& rng) {
        cfg.validate();
        TrajModel m;
        m.cfg = cfg;
        const auto e = static_cast<std::size_t>(cfg.enc.embed_dim);
        const auto h = static_cast<std::size_t>(cfg.enc.hidden_dim);
        const auto de = static_cast<std::size_t>(cfg.dec.embed_dim);
        const auto sp = static_cast<std::size_t>(cfg.pool.spatial_dim);
        const auto po = static_cast<std::size_t>(cfg.pool.out_dim);
        nn::add_linear(m.params, "enc.embed", 2, e, rng);
        nn::add_lstm(m.params, "enc.lstm", e, h, rng);
        nn::add_linear(m.params, "pool.spatial", 2, sp, rng);
        nn::add_linear(m.params, "pool.mlp", sp + h, po, rng);
        nn::add_linear(m.params, "ctx", po, static_cast<std::size_t>(cfg.dec.pool_dim), rng);
        nn::add_linear(m.params, "dec.embed", 2, de, rng);
        nn::add_lstm(m.params, "dec.lstm", de, h, rng);
        nn::add_linear(m.params, "dec.mix", po + h, h, rng);
        nn::add_linear(m.params, "out", h, 2, rng);
        return m;
    }
};

using AugmenterModel = TrajModel;
using GeneratorModel = TrajModel;

// Encoder plus a small MLP head through a sigmoid; scores a full-length
// trajectory's realism in (0, 1).
struct DiscriminatorModel {
    EncoderConfig enc;
    int head_dim = 16;
    ParamStore params;

    static DiscriminatorModel create(const EncoderConfig& enc, int head_dim, Rng& rng) {
        if (enc.embed_dim < 1 || enc.hidden_dim < 1 || head_dim < 1)
            throw ArgumentError("DiscriminatorModel: dimensions must be positive");
        DiscriminatorModel d;
        d.enc = enc;
        d.head_dim = head_dim;
        const auto e = static_cast<std::size_t>(enc.embed_dim);
        const auto h = static_cast<std::size_t>(enc.hidden_dim);
        nn::add_linear(d.params, "enc.embed", 2, e, rng);
        nn::add_lstm(d.params, "enc.lstm", e, h, rng);
        nn::add_linear(d.params, "head.l1", h, static_cast<std::size_t>(head_dim), rng);
        nn::add_linear(d.params, "head.l2", static_cast<std::size_t>(head_dim), 1, rng);
        return d;
    }
};

// ---------------------------------------------------------------- scene views

// One scene in relative coordinates, the models' native input.
struct RelScene {
    std::vector<RelativeTrajectory> peds;
};

inline RelScene rel_scene(const Scene& s) {
    RelScene r;
    r.peds.reserve(s.trajectories.size());
    for (const Trajectory& t : s.trajectories) r.peds.push_back(to_relative(t));
    return r;
}

// Tape leaves for a scene's points: pts[ped][t] has shape (2).
struct SceneLeaves {
    std::vector<std::vector<ad::Value>> pts;
    std::vector<Vec2> origins;
};

inline SceneLeaves scene_leaves(ad::Tape& tape, const RelScene& s) {
    SceneLeaves L;
    L.pts.reserve(s.peds.size());
    for (const RelativeTrajectory& rt : s.peds) {
        std::vector<ad::Value> row;
        row.reserve(rt.points.size());
        for (Vec2 p : rt.points) row.push_back(tape.input(Tensor::vec({p.x, p.y})));
        L.pts.push_back(std::move(row));
        L.origins.push_back(rt.origin);
    }
    return L;
}

// ---------------------------------------------------------------- forward passes

// e_t = ReLU(phi(x_t, y_t)); h_t = LSTM(h_{t-1}, e_t). h_0 = c_0 = 0.
// Weights shared across pedestrians. Returns the final hidden state per ped.
inline std::vector<ad::Value> encode(ad::Tape& tape, ParamStore& ps,
                                     const std::vector<std::vector<ad::Value>>& pts,
                                     int hidden_dim) {
    if (pts.empty()) throw ArgumentError("encode: empty pedestrian set");
    const std::size_t len = pts[0].size();
    for (const auto& row : pts)
        if (row.size() != len) throw ContractError("encode: pedestrians with unequal lengths");
    std::vector<ad::Value> finals;
    finals.reserve(pts.size());
    for (const auto& row : pts) {
        ad::Value h = tape.constant(Tensor::zeros({static_cast<std::size_t>(hidden_dim)}));
        ad::Value c = h;
        for (const ad::Value& p : row) {
            ad::Value e = nn::linear_relu(tape, ps, "enc.embed", p);
            auto hc = nn::lstm_step(tape, ps, "enc.lstm", e, h, c);
            h = hc.first;
            c = hc.second;
        }
        finals.push_back(h);
    }
    return finals;
}

// Social pooling: for pedestrian i, every neighbour j contributes
// ReLU(mlp([ReLU(spatial(pos_j - pos_i)), h_j])), and the contributions are
// element-wise max-pooled. A lone pedestrian gets the all-zero vector.
inline std::vector<ad::Value> pool(ad::Tape& tape, ParamStore& ps,
                                   const std::vector<ad::Value>& hidden,
                                   const std::vector<ad::Value>& positions) {
    if (hidden.empty()) throw ArgumentError("pool: empty pedestrian set");
    if (hidden.size() != positions.size())
        throw ArgumentError("pool: hidden/position count mismatch");
    const std::size_t out_dim = ps.get("pool.mlp.W").value.shape[1];
    const std::size_t n = hidden.size();
    std::vector<ad::Value> pooled;
    pooled.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (n == 1) {
            pooled.push_back(tape.constant(Tensor::zeros({out_dim})));
            continue;
        }
        std::vector<ad::Value> contributions;
        contributions.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            ad::Value rel = ad::sub(positions[j], positions[i]);
            ad::Value emb = nn::linear_relu(tape, ps, "pool.spatial", rel);
            ad::Value v = nn::linear_relu(tape, ps, "pool.mlp", ad::concat(emb, hidden[j]));
            contributions.push_back(v);
        }
        pooled.push_back(ad::max_pool(contributions));
    }
    return pooled;
}

// h0 = [ReLU(W_c p), z]; the decoder cell state starts at zero.
inline ad::Value init_decoder_state(ad::Tape& tape, ParamStore& ps, ad::Value pooled,
                                    ad::Value z, int hidden_dim) {
    ad::Value ctx = nn::linear_relu(tape, ps, "ctx", pooled);
    ad::Value h0 = ad::concat(ctx, z);
    if (h0.val().size() != static_cast<std::size_t>(hidden_dim))
        throw ShapeError("init_decoder_state: context " + ctx.val().shape_str() + " + noise " +
                         z.val().shape_str() + " does not fill the decoder state");
    return h0;
}

struct DecoderState {
    std::vector<ad::Value> h;
    std::vector<ad::Value> c;
    std::vector<ad::Value> prev_rel;  // last emitted (or observed) relative position
    std::vector<Vec2> origins;        // absolute frame offsets for social pooling
};

// Iterates: e = ReLU(phi(prev)); p = pool(h, positions); the recurrent hidden
// input is ReLU(mix([p, h])); the next position is the affine projection of
// the new hidden state and feeds the next step.
inline std::vector<std::vector<ad::Value>> decode(ad::Tape& tape, const TrajModel& m,
                                                  DecoderState st, int steps) {
    if (steps < 1) throw ArgumentError("decode: steps must be >= 1");
    ParamStore& ps = const_cast<ParamStore&>(m.params);
    const std::size_t n = st.h.size();
    std::vector<std::vector<ad::Value>> out(n);
    for (int t = 0; t < steps; ++t) {
        std::vector<ad::Value> positions;
        positions.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            positions.push_back(ad::add(
                st.prev_rel[i], tape.constant(Tensor::vec({st.origins[i].x, st.origins[i].y}))));
        }
        std::vector<ad::Value> pooled = pool(tape, ps, st.h, positions);
        for (std::size_t i = 0; i < n; ++i) {
            ad::Value e = nn::linear_relu(tape, ps, "dec.embed", st.prev_rel[i]);
            ad::Value mix = nn::linear_relu(tape, ps, "dec.mix", ad::concat(pooled[i], st.h[i]));
            auto hc = nn::lstm_step(tape, ps, "dec.lstm", e, mix, st.c[i]);
            st.h[i] = hc.first;
            st.c[i] = hc.second;
            ad::Value pos = nn::linear(tape, ps, "out", st.h[i]);
            out[i].push_back(pos);
            st.prev_rel[i] = pos;
        }
    }
    return out;
}

// The Augmenter consumes all t_pred points of a synthetic trajectory and
// re-emits t_pred points, re-walking the trajectory from its normalized
// starting point.
inline std::vector<std::vector<ad::Value>> augment(ad::Tape& tape, const AugmenterModel& A,
                                                   const RelScene& s,
                                                   const std::vector<Tensor>& z_per_ped,
                                                   int t_pred) {
    for (const RelativeTrajectory& rt : s.peds)
        if (rt.points.size() != static_cast<std::size_t>(t_pred))
            throw ContractError("augment: input trajectory length " +
                                std::to_string(rt.points.size()) + " != t_pred " +
                                std::to_string(t_pred));
    if (z_per_ped.size() != s.peds.size())
        throw ArgumentError("augment: one noise vector per pedestrian");
    SceneLeaves L = scene_leaves(tape, s);
    ParamStore& ps = const_cast<ParamStore&>(A.params);
    const std::size_t n = L.pts.size();

    std::vector<ad::Value> enc_h = encode(tape, ps, L.pts, A.cfg.enc.hidden_dim);
    std::vector<ad::Value> last_positions;
    for (std::size_t i = 0; i < n; ++i)
        last_positions.push_back(ad::add(
            L.pts[i].back(), tape.constant(Tensor::vec({L.origins[i].x, L.origins[i].y}))));
    std::vector<ad::Value> pooled = pool(tape, ps, enc_h, last_positions);

    DecoderState st;
    st.origins = L.origins;
    for (std::size_t i = 0; i < n; ++i) {
        ad::Value z = tape.input(z_per_ped.at(i));
        st.h.push_back(init_decoder_state(tape, ps, pooled[i], z, A.cfg.dec.hidden_dim));
        st.c.push_back(tape.constant(Tensor::zeros({static_cast<std::size_t>(A.cfg.dec.hidden_dim)})));
        st.prev_rel.push_back(L.pts[i][0]);
    }
    return decode(tape, A, std::move(st), t_pred);
}

// The Generator observes the first t_obs points and predicts the next
// `pred_steps`, continuing from the last observed position.
inline std::vector<std::vector<ad::Value>> predict(ad::Tape& tape, const GeneratorModel& G,
                                                   const RelScene& obs,
                                                   const std::vector<Tensor>& z_per_ped, int t_obs,
                                                   int pred_steps) {
    for (const RelativeTrajectory& rt : obs.peds)
        if (rt.points.size() != static_cast<std::size_t>(t_obs))
            throw ContractError("predict: observed length " + std::to_string(rt.points.size()) +
                                " != t_obs " + std::to_string(t_obs));
    if (pred_steps < 1) throw ArgumentError("predict: pred_steps must be >= 1");
    if (z_per_ped.size() != obs.peds.size())
        throw ArgumentError("predict: one noise vector per pedestrian");
    SceneLeaves L = scene_leaves(tape, obs);
    ParamStore& ps = const_cast<ParamStore&>(G.params);
    const std::size_t n = L.pts.size();

    std::vector<ad::Value> enc_h = encode(tape, ps, L.pts, G.cfg.enc.hidden_dim);
    std::vector<ad::Value> last_positions;
    for (std::size_t i = 0; i < n; ++i)
        last_positions.push_back(ad::add(
            L.pts[i].back(), tape.constant(Tensor::vec({L.origins[i].x, L.origins[i].y}))));
    std::vector<ad::Value> pooled = pool(tape, ps, enc_h, last_positions);

    DecoderState st;
    st.origins = L.origins;
    for (std::size_t i = 0; i < n; ++i) {
        ad::Value z = tape.input(z_per_ped.at(i));
        st.h.push_back(init_decoder_state(tape, ps, pooled[i], z, G.cfg.dec.hidden_dim));
        st.c.push_back(tape.constant(Tensor::zeros({static_cast<std::size_t>(G.cfg.dec.hidden_dim)})));
        st.prev_rel.push_back(L.pts[i].back());
    }
    return decode(tape, G, std::move(st), pred_steps);
}

// Scores each full-length trajectory of a scene in (0, 1). Rejects inputs of
// any other length so the same head serves Generator and Augmenter outputs.
inline std::vector<ad::Value> discriminate(ad::Tape& tape, const DiscriminatorModel& D,
                                           const std::vector<std::vector<ad::Value>>& pts,
                                           int t_pred) {
    for (const auto& row : pts)
        if (row.size() != static_cast<std::size_t>(t_pred))
            throw ContractError("discriminate: trajectory length " + std::to_string(row.size()) +
                                " != t_pred " + std::to_string(t_pred));
    ParamStore& ps = const_cast<ParamStore&>(D.params);
    std::vector<ad::Value> finals = encode(tape, ps, pts, D.enc.hidden_dim);
    std::vector<ad::Value> scores;
    scores.reserve(finals.size());
    for (ad::Value h : finals) {
        ad::Value hid = ad::relu(nn::linear(tape, ps, "head.l1", h));
        scores.push_back(ad::sigmoid(nn::linear(tape, ps, "head.l2", hid)));
    }
    return scores;
}

inline std::vector<ad::Value> discriminate(ad::Tape& tape, const DiscriminatorModel& D,
                                           const RelScene& s, int t_pred) {
    for (const RelativeTrajectory& rt : s.peds)
        if (rt.points.size() != static_cast<std::size_t>(t_pred))
            throw ContractError("discriminate: trajectory length " +
                                std::to_string(rt.points.size()) + " != t_pred " +
                                std::to_string(t_pred));
    SceneLeaves L = scene_leaves(tape, s);
    return discriminate(tape, D, L.pts, t_pred);
}

// ---------------------------------------------------------------- extraction

inline std::vector<std::vector<Vec2>> extract_points(
    const std::vector<std::vector<ad::Value>>& preds) {
    std::vector<std::vector<Vec2>> out(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out[i].reserve(preds[i].size());
        for (const ad::Value& v : preds[i]) out[i].push_back({v.val().v[0], v.val().v[1]});
    }
    return out;
}

// ---------------------------------------------------------------- scene helpers

inline RelScene obs_prefix(const RelScene& s, int t_obs) {
    RelScene out;
    out.peds.reserve(s.peds.size());
    for (const RelativeTrajectory& rt : s.peds) {
        if (rt.points.size() < static_cast<std::size_t>(t_obs))
            throw ArgumentError("obs_prefix: trajectory shorter than t_obs");
        RelativeTrajectory o;
        o.origin = rt.origin;
        o.points.assign(rt.points.begin(), rt.points.begin() + t_obs);
        out.peds.push_back(std::move(o));
    }
    return out;
}

inline std::vector<std::vector<Vec2>> scene_points(const RelScene& s) {
    std::vector<std::vector<Vec2>> out;
    out.reserve(s.peds.size());
    for (const RelativeTrajectory& rt : s.peds) out.push_back(rt.points);
    return out;
}

inline std::vector<std::vector<Vec2>> pred_suffix_points(const RelScene& s, int t_obs) {
    std::vector<std::vector<Vec2>> out;
    out.reserve(s.peds.size());
    for (const RelativeTrajectory& rt : s.peds) {
        if (rt.points.size() <= static_cast<std::size_t>(t_obs))
            throw ArgumentError("pred_suffix_points: trajectory not longer than t_obs");
        out.emplace_back(rt.points.begin() + t_obs, rt.points.end());
    }
    return out;
}

// RelScene from raw per-pedestrian offsets (model outputs are offsets from an
// origin, not anchored at (0,0)).
inline RelScene scene_from_rel_points(const std::vector<Vec2>& origins,
                                      const std::vector<std::vector<Vec2>>& points) {
    if (origins.size() != points.size())
        throw ArgumentError("scene_from_rel_points: origin/points count mismatch");
    RelScene out;
    out.peds.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.peds[i].origin = origins[i];
        out.peds[i].points = points[i];
    }
    return out;
}

inline std::vector<Vec2> scene_origins(const RelScene& s) {
    std::vector<Vec2> out;
    out.reserve(s.peds.size());
    for (const RelativeTrajectory& rt : s.peds) out.push_back(rt.origin);
    return out;
}

inline std::vector<std::vector<Vec2>> fuse_points(const std::vector<std::vector<Vec2>>& obs,
                                                  const std::vector<std::vector<Vec2>>& pred) {
    if (obs.size() != pred.size()) throw ArgumentError("fuse_points: pedestrian count mismatch");
    std::vector<std::vector<Vec2>> out(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        out[i] = obs[i];
        out[i].insert(out[i].end(), pred[i].begin(), pred[i].end());
    }
    return out;
}

// Detached tape leaves for already-computed points.
inline std::vector<std::vector<ad::Value>> const_leaves(
    ad::Tape& tape, const std::vector<std::vector<Vec2>>& pts) {
    std::vector<std::vector<ad::Value>> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out[i].reserve(pts[i].size());
        for (Vec2 p : pts[i]) out[i].push_back(tape.constant(Tensor::vec({p.x, p.y})));
    }
    return out;
}

inline std::vector<Tensor> draw_noise(Rng& rng, std::size_t n_peds, int noise_dim) {
    std::vector<Tensor> out;
    out.reserve(n_peds);
    for (std::size_t i = 0; i < n_peds; ++i)
        out.push_back(nn::sample_standard_normal({static_cast<std::size_t>(noise_dim)}, rng));
    return out;
}

// Detached forwards: fresh per-pedestrian noise from the stream, plain points
// out, no gradients recorded beyond the throwaway tape.
inline std::vector<std::vector<Vec2>> sample_augment(const AugmenterModel& A, const RelScene& s,
                                                     int t_pred, Rng& rng) {
    ad::Tape tape;
    auto z = draw_noise(rng, s.peds.size(), A.cfg.dec.noise_dim);
    return extract_points(augment(tape, A, s, z, t_pred));
}

inline std::vector<std::vector<Vec2>> sample_predict(const GeneratorModel& G, const RelScene& obs,
                                                     int t_obs, int steps, Rng& rng) {
    ad::Tape tape;
    auto z = draw_noise(rng, obs.peds.size(), G.cfg.dec.noise_dim);
    return extract_points(predict(tape, G, obs, z, t_obs, steps));
}

}  // namespace aasgan::models
