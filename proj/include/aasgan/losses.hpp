#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "aasgan/autodiff.hpp"
#include "aasgan/common.hpp"
#include "aasgan/tensor.hpp"

namespace aasgan::losses {

// Scores are clamped away from {0, 1} before the log so adversarial losses
// stay finite.
constexpr double kScoreEps = 1e-7;

inline ad::Value neg_log(ad::Value score) {
    return ad::scale(ad::log(ad::clamp(score, kScoreEps, 1.0 - kScoreEps)), -1.0);
}

inline ad::Value neg_log_one_minus(ad::Value score) {
    ad::Value one = score.tape->constant(Tensor::scalar(1.0));
    return ad::scale(ad::log(ad::clamp(ad::sub(one, score), kScoreEps, 1.0 - kScoreEps)), -1.0);
}

namespace detail {

inline ad::Value mean_neg_log(const std::vector<ad::Value>& scores) {
    std::vector<ad::Value> terms;
    terms.reserve(scores.size());
    for (ad::Value s : scores) terms.push_back(neg_log(s));
    return ad::mean_scalars(terms);
}

inline ad::Value mean_neg_log_one_minus(const std::vector<ad::Value>& scores) {
    std::vector<ad::Value> terms;
    terms.reserve(scores.size());
    for (ad::Value s : scores) terms.push_back(neg_log_one_minus(s));
    return ad::mean_scalars(terms);
}

inline std::vector<ad::Value> as_constants(ad::Tape& tape, const std::vector<Vec2>& pts) {
    std::vector<ad::Value> out;
    out.reserve(pts.size());
    for (Vec2 p : pts) out.push_back(tape.constant(Tensor::vec({p.x, p.y})));
    return out;
}

}  // namespace detail

// Binary cross-entropy over one real class and three fake classes
// (augmented, real-fused, augmented-fused). Each class contributes the mean
// over its pedestrians; empty classes are skipped so baseline modes can feed
// the discriminator a subset.
inline ad::Value discriminator_loss(const std::vector<ad::Value>& real_scores,
                                    const std::vector<ad::Value>& aug_scores,
                                    const std::vector<ad::Value>& real_fused_scores,
                                    const std::vector<ad::Value>& aug_fused_scores) {
    std::vector<ad::Value> terms;
    if (!real_scores.empty()) terms.push_back(detail::mean_neg_log(real_scores));
    if (!aug_scores.empty()) terms.push_back(detail::mean_neg_log_one_minus(aug_scores));
    if (!real_fused_scores.empty())
        terms.push_back(detail::mean_neg_log_one_minus(real_fused_scores));
    if (!aug_fused_scores.empty())
        terms.push_back(detail::mean_neg_log_one_minus(aug_fused_scores));
    if (terms.empty()) throw ArgumentError("discriminator_loss: no scores in any class");
    return ad::add_scalars(terms);
}

// Pointwise squared-distance alignment: sum over timesteps, mean over
// pedestrians.
inline ad::Value l2_alignment(ad::Tape& tape, const std::vector<std::vector<Vec2>>& reference,
                              const std::vector<std::vector<ad::Value>>& produced) {
    if (reference.size() != produced.size() || reference.empty())
        throw ArgumentError("l2_alignment: pedestrian count mismatch or empty");
    std::vector<ad::Value> per_ped;
    per_ped.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (reference[i].size() != produced[i].size())
            throw ArgumentError("l2_alignment: length mismatch for pedestrian " +
                                std::to_string(i));
        per_ped.push_back(
            ad::l2_point_seq(detail::as_constants(tape, reference[i]), produced[i]));
    }
    return ad::mean_scalars(per_ped);
}

struct LossParts {
    ad::Value total;
    ad::Value adv;
    ad::Value l2;
};

// Augmenter objective: fool the discriminator (non-saturating form) while
// staying close to the input synthetic trajectory. Both sequences must cover
// the full trajectory length.
inline LossParts augmenter_loss(ad::Tape& tape, const std::vector<ad::Value>& aug_scores,
                                const std::vector<std::vector<Vec2>>& synth_pts,
                                const std::vector<std::vector<ad::Value>>& aug_pts,
                                int full_len) {
    if (aug_scores.empty()) throw ArgumentError("augmenter_loss: no scores");
    for (const auto& row : synth_pts)
        if (row.size() != static_cast<std::size_t>(full_len))
            throw ContractError("augmenter_loss: sequence length " + std::to_string(row.size()) +
                                " != full trajectory length " + std::to_string(full_len));
    LossParts p{};
    p.adv = detail::mean_neg_log(aug_scores);
    p.l2 = l2_alignment(tape, synth_pts, aug_pts);
    p.total = ad::add(p.adv, p.l2);
    return p;
}

// Best-of-k alignment: for each pedestrian, the candidate with the smallest
// summed squared pointwise distance to the ground truth is kept (gradient
// flows only into that candidate); the per-pedestrian minima are averaged.
inline ad::Value variety_l2(ad::Tape& tape, const std::vector<std::vector<Vec2>>& ground_truth,
                            const std::vector<std::vector<std::vector<ad::Value>>>& candidates) {
    if (candidates.empty()) throw ArgumentError("variety_l2: no candidates");
    const std::size_t n = ground_truth.size();
    for (const auto& cand : candidates)
        if (cand.size() != n) throw ArgumentError("variety_l2: candidate pedestrian count mismatch");
    if (n == 0) throw ArgumentError("variety_l2: empty scene");
    std::vector<ad::Value> per_ped;
    per_ped.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<ad::Value> gt = detail::as_constants(tape, ground_truth[i]);
        ad::Value best{};
        double best_val = 0.0;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            ad::Value d = ad::l2_point_seq(gt, candidates[k][i]);
            if (k == 0 || d.scalar() < best_val) {
                best = d;
                best_val = d.scalar();
            }
        }
        per_ped.push_back(best);
    }
    return ad::mean_scalars(per_ped);
}

namespace detail {

inline void require_pred_len(const std::vector<std::vector<Vec2>>& gt,
                             const std::vector<std::vector<std::vector<ad::Value>>>& cands,
                             int expected_len, const char* who) {
    for (const auto& row : gt)
        if (row.size() != static_cast<std::size_t>(expected_len))
            throw ContractError(std::string(who) + ": ground-truth length " +
                                std::to_string(row.size()) + " != predicted-segment length " +
                                std::to_string(expected_len));
    for (const auto& cand : cands)
        for (const auto& row : cand)
            if (row.size() != static_cast<std::size_t>(expected_len))
                throw ContractError(std::string(who) + ": candidate length " +
                                    std::to_string(row.size()) +
                                    " != predicted-segment length " +
                                    std::to_string(expected_len));
}

}  // namespace detail

// One Generator branch (real-fused or augmented-fused): non-saturating
// adversarial term over the fused trajectories plus the best-of-k alignment
// over the predicted segment only. Sequences must have exactly the
// predicted-segment length; full trajectories are rejected.
inline LossParts generator_branch_loss(
    ad::Tape& tape, const std::vector<ad::Value>& fused_scores,
    const std::vector<std::vector<Vec2>>& ground_truth_pred,
    const std::vector<std::vector<std::vector<ad::Value>>>& candidates, int expected_len) {
    if (fused_scores.empty()) throw ArgumentError("generator_branch_loss: no scores");
    detail::require_pred_len(ground_truth_pred, candidates, expected_len,
                             "generator_branch_loss");
    LossParts p{};
    p.adv = detail::mean_neg_log(fused_scores);
    p.l2 = variety_l2(tape, ground_truth_pred, candidates);
    p.total = ad::add(p.adv, p.l2);
    return p;
}

// Full Generator objective, both branches summed: real-fused then
// augmented-fused.
inline ad::Value generator_loss(ad::Tape& tape, const std::vector<ad::Value>& real_fused_scores,
                                const std::vector<ad::Value>& aug_fused_scores,
                                const std::vector<std::vector<Vec2>>& real_gt_pred,
                                const std::vector<std::vector<std::vector<ad::Value>>>& real_cands,
                                const std::vector<std::vector<Vec2>>& aug_gt_pred,
                                const std::vector<std::vector<std::vector<ad::Value>>>& aug_cands,
                                int expected_len) {
    LossParts real =
        generator_branch_loss(tape, real_fused_scores, real_gt_pred, real_cands, expected_len);
    LossParts aug =
        generator_branch_loss(tape, aug_fused_scores, aug_gt_pred, aug_cands, expected_len);
    return ad::add(real.total, aug.total);
}

// ---------------------------------------------------------------- reporting

struct LossReport {
    long long step = 0;
    double d_loss = 0.0;
    double a_adv = 0.0;
    double a_l2 = 0.0;
    double g_real_adv = 0.0;
    double g_real_l2 = 0.0;
    double g_synth_adv = 0.0;
    double g_synth_l2 = 0.0;
};

// One whitespace-separated line per training step; %.17g keeps doubles
// round-trippable so identical runs produce byte-identical logs.
inline std::string format_loss_line(const LossReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%lld %.17g %.17g %.17g %.17g %.17g %.17g %.17g", r.step,
                  r.d_loss, r.a_adv, r.a_l2, r.g_real_adv, r.g_real_l2, r.g_synth_adv,
                  r.g_synth_l2);
    return std::string(buf);
}

}  // namespace aasgan::losses
