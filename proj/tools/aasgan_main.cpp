// Command-line driver: train / eval / augment / gen-synth / benchmark / plot.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "aasgan/aasgan.hpp"

namespace fs = std::filesystem;
using namespace aasgan;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// AASGAN_OUTPUT_ROOT relocates relative output paths; absolute paths win.
fs::path resolve_out(const std::string& p) {
    fs::path path(p);
    const char* root = std::getenv("AASGAN_OUTPUT_ROOT");
    if (root != nullptr && root[0] != '\0' && path.is_relative()) return fs::path(root) / path;
    return path;
}

std::vector<Scene> load_scenes(const std::string& path, int t_obs, int t_pred) {
    auto samples = parse_trajectory_file(path);
    auto scenes = extract_scenes(samples, t_obs, t_pred);
    if (scenes.empty()) throw DataError("'" + path + "': no full-length scenes at t_pred " +
                                        std::to_string(t_pred));
    return scenes;
}

// Training flags funnel through the config parser so overrides get the same
// validation as config files.
struct CfgFlags {
    std::vector<std::pair<std::string, std::string>> flag_to_key = {
        {"--mode", "mode"},
        {"--t-obs", "t_obs"},
        {"--t-pred", "t_pred"},
        {"--batch-size", "batch_size"},
        {"--lr-d", "lr_d"},
        {"--lr-g", "lr_g"},
        {"--lr-a", "lr_a"},
        {"--adam-betas", "adam_betas"},
        {"--steps", "steps"},
        {"--seed", "seed"},
        {"--ratio", "real_synth_ratio"},
        {"--variety-k", "variety_k"},
        {"--grad-clip", "grad_clip"},
        {"--embed-dim", "embed_dim"},
        {"--hidden-dim", "hidden_dim"},
        {"--noise-dim", "noise_dim"},
        {"--pool-dim", "pool_dim"},
        {"--pool-spatial-dim", "pool_spatial_dim"},
        {"--pool-out-dim", "pool_out_dim"},
        {"--head-dim", "head_dim"},
    };
    std::map<std::string, std::string> values;

    void attach(CLI::App* sub) {
        for (const auto& [flag, key] : flag_to_key)
            sub->add_option(flag, values[key], "config key " + key);
    }

    std::string overrides_text(const CLI::App* sub) const {
        std::string out;
        for (const auto& [flag, key] : flag_to_key)
            if (sub->count(flag) > 0) out += key + " = " + values.at(key) + "\n";
        return out;
    }
};

training::TrainConfig resolve_config(const std::string& config_path, const CfgFlags& flags,
                                     const CLI::App* sub) {
    training::TrainConfig cfg;
    if (!config_path.empty()) cfg = training::parse_train_config(read_file(config_path));
    cfg = training::parse_train_config(flags.overrides_text(sub), cfg);
    cfg.validate();
    return cfg;
}

void require_finite(const losses::LossReport& rep) {
    const double parts[] = {rep.d_loss,     rep.a_adv,      rep.a_l2,      rep.g_real_adv,
                            rep.g_real_l2,  rep.g_synth_adv, rep.g_synth_l2};
    for (double p : parts)
        if (!std::isfinite(p))
            throw ContractError("non-finite loss at step " + std::to_string(rep.step) + ": " +
                                losses::format_loss_line(rep));
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

int run_train(const CLI::App* sub, const std::string& config_path, const CfgFlags& flags,
              const std::string& real_path, const std::string& synth_path,
              const std::string& out_dir, const std::string& resume_path, long long log_every,
              long long checkpoint_every) {
    training::TrainConfig cfg;
    if (!resume_path.empty()) {
        // the checkpoint's config wins on resume; only --steps may extend it
        ckpt::Checkpoint c = ckpt::Checkpoint::load(resume_path);
        cfg = training::parse_train_config(c.get_meta("config"));
        if (sub->count("--steps") > 0)
            cfg = training::parse_train_config("steps = " + flags.values.at("steps"), cfg);
        cfg.validate();
    } else {
        cfg = resolve_config(config_path, flags, sub);
    }

    std::vector<Scene> real, synth;
    if (cfg.uses_real()) {
        if (real_path.empty())
            throw ArgumentError("mode '" + cfg.mode + "' needs --real <dataset>");
        real = load_scenes(real_path, cfg.t_obs, cfg.t_pred);
    }
    if (cfg.uses_synth()) {
        if (synth_path.empty())
            throw ArgumentError("mode '" + cfg.mode + "' needs --synth <dataset>");
        synth = load_scenes(synth_path, cfg.t_obs, cfg.t_pred);
    }

    const fs::path run_dir = resolve_out(out_dir);
    fs::create_directories(run_dir);
    write_text(run_dir / "config.txt", training::format_train_config(cfg));

    training::Trainer trainer =
        resume_path.empty() ? training::Trainer(cfg, std::move(real), std::move(synth))
                            : training::Trainer::load(resume_path, std::move(real),
                                                      std::move(synth));

    std::ofstream log(run_dir / "loss_log.txt");
    if (!log) throw IoError("cannot open loss log in '" + run_dir.string() + "'");
    const fs::path ckpt_path = run_dir / "checkpoint.bin";
    while (trainer.step_index() < cfg.steps) {
        losses::LossReport rep = trainer.step();
        require_finite(rep);
        const std::string line = losses::format_loss_line(rep);
        log << line << "\n";
        if (log_every > 0 && rep.step % log_every == 0) std::cout << line << "\n";
        if (checkpoint_every > 0 && trainer.step_index() % checkpoint_every == 0) {
            log.flush();
            trainer.save(ckpt_path.string());
        }
    }
    log.flush();
    if (!log) throw IoError("loss log write failed");
    trainer.save(ckpt_path.string());
    std::cout << "trained " << trainer.step_index() << " steps (" << cfg.mode << "); checkpoint "
              << ckpt_path.string() << "\n";
    return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path, int N,
             std::uint64_t seed, const std::string& name_flag, const std::string& out_dir,
             int t_obs_flag, int t_pred_flag) {
    training::LoadedCheckpoint lc = training::load_checkpoint_models(ckpt_path);
    if (!lc.has_generator)
        throw ArgumentError("checkpoint '" + ckpt_path + "' has no generator section");
    if (t_obs_flag > 0 && t_obs_flag != lc.cfg.t_obs)
        throw ArgumentError("--t-obs " + std::to_string(t_obs_flag) + " incompatible with checkpoint t_obs " +
                            std::to_string(lc.cfg.t_obs));
    if (t_pred_flag > 0 && t_pred_flag != lc.cfg.t_pred)
        throw ArgumentError("--t-pred " + std::to_string(t_pred_flag) +
                            " incompatible with checkpoint t_pred " + std::to_string(lc.cfg.t_pred));

    auto scenes = load_scenes(data_path, lc.cfg.t_obs, lc.cfg.t_pred);
    const std::string name = name_flag.empty() ? fs::path(data_path).stem().string() : name_flag;
    eval::MetricsReport rep =
        eval::best_of_n_eval(lc.models.G, scenes, lc.cfg.t_obs, lc.cfg.t_pred, N, seed, name);
    std::cout << eval::metrics_table({rep});
    if (!out_dir.empty()) {
        const fs::path dir = resolve_out(out_dir);
        fs::create_directories(dir);
        write_text(dir / "metrics.csv", eval::metrics_csv({rep}));
        write_text(dir / "metrics.txt", eval::metrics_table({rep}));
    }
    return 0;
}

int run_augment(const std::string& ckpt_path, const std::string& synth_path,
                const std::string& out_file, std::uint64_t seed) {
    training::LoadedCheckpoint lc = training::load_checkpoint_models(ckpt_path);
    if (!lc.has_augmenter)
        throw ArgumentError("checkpoint '" + ckpt_path +
                            "' has no augmenter section (trained without one)");
    auto scenes = load_scenes(synth_path, lc.cfg.t_obs, lc.cfg.t_pred);
    auto augmented = training::augment_dataset(lc.models.A, scenes, lc.cfg.t_pred, seed);
    const fs::path out = resolve_out(out_file);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    synth::write_dataset(augmented, out.string());
    std::cout << "augmented " << augmented.size() << " scenes -> " << out.string() << "\n";
    return 0;
}

int run_gen_synth(const synth::SynthConfig& sc, const std::string& out_file) {
    sc.validate();
    auto scenes = synth::generate_synthetic_dataset(sc);
    const fs::path out = resolve_out(out_file);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    synth::write_dataset(scenes, out.string());
    std::cout << "generated " << scenes.size() << " scenes -> " << out.string() << "\n";
    return 0;
}

int run_benchmark(const CLI::App* sub, const std::string& config_path, const CfgFlags& flags,
                  const std::vector<std::string>& data_paths, const std::string& synth_path,
                  int N, const std::string& out_dir) {
    training::TrainConfig cfg = resolve_config(config_path, flags, sub);
    if (data_paths.size() < 2) throw ArgumentError("benchmark needs at least 2 --data files");

    std::vector<eval::NamedDataset> datasets;
    for (const std::string& p : data_paths) {
        eval::NamedDataset d;
        d.name = fs::path(p).stem().string();
        for (const auto& prev : datasets)
            if (prev.name == d.name) throw ArgumentError("duplicate dataset name '" + d.name + "'");
        d.scenes = load_scenes(p, cfg.t_obs, cfg.t_pred);
        datasets.push_back(std::move(d));
    }
    std::vector<Scene> synth_scenes;
    if (cfg.uses_synth()) {
        if (synth_path.empty())
            throw ArgumentError("mode '" + cfg.mode + "' needs --synth <dataset>");
        synth_scenes = load_scenes(synth_path, cfg.t_obs, cfg.t_pred);
    }

    eval::TrainFn train_fn = [&](const std::string& held_out,
                                 const std::vector<Scene>& train_scenes) {
        std::cout << "training fold (held out: " << held_out << ", " << train_scenes.size()
                  << " scenes)\n";
        training::Trainer trainer(cfg, train_scenes, synth_scenes);
        while (trainer.step_index() < cfg.steps) require_finite(trainer.step());
        return std::move(trainer.models().G);
    };
    auto reports = eval::leave_one_out(datasets, cfg.t_obs, cfg.t_pred, N, cfg.seed, train_fn);
    std::cout << eval::metrics_table(reports);
    if (!out_dir.empty()) {
        const fs::path dir = resolve_out(out_dir);
        fs::create_directories(dir);
        write_text(dir / "metrics.csv", eval::metrics_csv(reports));
        write_text(dir / "metrics.txt", eval::metrics_table(reports));
    }
    return 0;
}

int run_plot(const std::string& data_path, std::size_t scene_idx, const std::string& ckpt_path,
             int samples, std::uint64_t seed, const std::string& out_file, int t_obs,
             int t_pred) {
    models::GeneratorModel G;
    bool have_generator = false;
    if (!ckpt_path.empty()) {
        training::LoadedCheckpoint lc = training::load_checkpoint_models(ckpt_path);
        if (!lc.has_generator)
            throw ArgumentError("checkpoint '" + ckpt_path + "' has no generator section");
        t_obs = lc.cfg.t_obs;
        t_pred = lc.cfg.t_pred;
        G = std::move(lc.models.G);
        have_generator = true;
    }
    auto scenes = load_scenes(data_path, t_obs, t_pred);
    if (scene_idx >= scenes.size())
        throw ArgumentError("--scene " + std::to_string(scene_idx) + " out of range (have " +
                            std::to_string(scenes.size()) + ")");
    const Scene& sc = scenes[scene_idx];

    std::vector<std::pair<std::string, std::vector<std::vector<Vec2>>>> preds;
    if (have_generator) {
        const models::RelScene rel = models::rel_scene(sc);
        const models::RelScene obs = models::obs_prefix(rel, t_obs);
        for (int k = 0; k < samples; ++k) {
            Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(k)));
            auto rel_pts = models::sample_predict(G, obs, t_obs, t_pred - t_obs, rng);
            std::vector<std::vector<Vec2>> abs_pts(rel_pts.size());
            for (std::size_t i = 0; i < rel_pts.size(); ++i)
                for (Vec2 p : rel_pts[i]) abs_pts[i].push_back(p + rel.peds[i].origin);
            preds.emplace_back("sample " + std::to_string(k + 1), std::move(abs_pts));
        }
    }
    const fs::path out = resolve_out(out_file);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    eval::plot_scene(sc, preds, out.string(), t_obs);
    std::cout << "plotted scene " << scene_idx << " -> " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarially augmented pedestrian trajectory prediction"};
    app.require_subcommand(1);
    // conflicting duplicate flags are an error, not last-one-wins
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::Throw);

    // train
    auto* train = app.add_subcommand("train", "run the training loop for the configured mode");
    std::string tr_config, tr_real, tr_synth, tr_out = "run", tr_resume;
    long long tr_log_every = 10, tr_ckpt_every = 100;
    CfgFlags tr_flags;
    train->add_option("--config", tr_config, "config file (key = value lines)");
    tr_flags.attach(train);
    train->add_option("--real", tr_real, "real trajectory dataset");
    train->add_option("--synth", tr_synth, "synthetic trajectory dataset");
    train->add_option("--out", tr_out, "run directory (loss log, checkpoint)");
    train->add_option("--resume", tr_resume, "checkpoint to resume from (its config wins)");
    train->add_option("--log-every", tr_log_every, "stdout echo period, 0 silences");
    train->add_option("--checkpoint-every", tr_ckpt_every, "periodic checkpoint period");

    // eval
    auto* ev = app.add_subcommand("eval", "best-of-N metrics for a trained generator");
    std::string ev_ckpt, ev_data, ev_name, ev_out;
    int ev_n = 20, ev_tobs = 0, ev_tpred = 0;
    std::uint64_t ev_seed = 1;
    ev->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
    ev->add_option("--data", ev_data, "evaluation dataset")->required();
    ev->add_option("--n", ev_n, "samples per scene (best-of-N)");
    ev->add_option("--seed", ev_seed, "evaluation seed");
    ev->add_option("--name", ev_name, "dataset label (default: file stem)");
    ev->add_option("--out", ev_out, "directory for metrics.csv / metrics.txt");
    ev->add_option("--t-obs", ev_tobs, "must match the checkpoint if given");
    ev->add_option("--t-pred", ev_tpred, "must match the checkpoint if given");

    // augment
    auto* aug = app.add_subcommand("augment", "dump augmented synthetic trajectories");
    std::string au_ckpt, au_synth, au_out;
    std::uint64_t au_seed = 1;
    aug->add_option("--checkpoint", au_ckpt, "checkpoint with augmenter weights")->required();
    aug->add_option("--synth", au_synth, "synthetic dataset to augment")->required();
    aug->add_option("--out", au_out, "output dataset file")->required();
    aug->add_option("--seed", au_seed, "noise seed");

    // gen-synth
    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic trajectory dataset");
    synth::SynthConfig sc;
    std::string gs_out;
    gen->add_option("--n-scenes", sc.n_scenes, "scene count");
    gen->add_option("--peds-min", sc.peds_min, "min pedestrians per scene");
    gen->add_option("--peds-max", sc.peds_max, "max pedestrians per scene");
    gen->add_option("--speed-min", sc.speed_min, "m/s");
    gen->add_option("--speed-max", sc.speed_max, "m/s");
    gen->add_option("--heading-min", sc.heading_min, "radians");
    gen->add_option("--heading-max", sc.heading_max, "radians");
    gen->add_option("--turn-prob", sc.turn_probability, "per-trajectory turn probability");
    gen->add_option("--turn-angle-min", sc.turn_angle_min, "radians");
    gen->add_option("--turn-angle-max", sc.turn_angle_max, "radians");
    gen->add_option("--jitter", sc.jitter_std, "positional noise sigma, meters");
    gen->add_option("--seed", sc.seed, "rng seed");
    gen->add_option("--t-pred", sc.t_pred, "trajectory length");
    gen->add_option("--area", sc.area, "start positions drawn in [0,area)^2");
    gen->add_option("--dt", sc.dt, "sampling period, seconds");
    gen->add_option("--out", gs_out, "output dataset file")->required();

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "leave-one-out over named datasets");
    std::string be_config, be_synth, be_out;
    std::vector<std::string> be_data;
    int be_n = 20;
    CfgFlags be_flags;
    bench->add_option("--config", be_config, "training config file");
    be_flags.attach(bench);
    bench->add_option("--data", be_data, "dataset file (repeat; name = file stem)")
        ->required()
        ->expected(-1);
    bench->add_option("--synth", be_synth, "synthetic dataset for modes that need one");
    bench->add_option("--n", be_n, "samples per scene (best-of-N)");
    bench->add_option("--out", be_out, "directory for metrics.csv / metrics.txt");

    // plot
    auto* plot = app.add_subcommand("plot", "SVG of one scene with prediction samples");
    std::string pl_data, pl_ckpt, pl_out = "scene.svg";
    std::size_t pl_scene = 0;
    int pl_samples = 3, pl_tobs = 8, pl_tpred = 20;
    std::uint64_t pl_seed = 1;
    plot->add_option("--data", pl_data, "dataset file")->required();
    plot->add_option("--scene", pl_scene, "scene index");
    plot->add_option("--checkpoint", pl_ckpt, "draw generator samples from this checkpoint");
    plot->add_option("--samples", pl_samples, "prediction samples to draw");
    plot->add_option("--seed", pl_seed, "noise seed");
    plot->add_option("--out", pl_out, "output SVG path");
    plot->add_option("--t-obs", pl_tobs, "observed prefix (without --checkpoint)");
    plot->add_option("--t-pred", pl_tpred, "scene length (without --checkpoint)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train)
            return run_train(train, tr_config, tr_flags, tr_real, tr_synth, tr_out, tr_resume,
                             tr_log_every, tr_ckpt_every);
        if (*ev) return run_eval(ev_ckpt, ev_data, ev_n, ev_seed, ev_name, ev_out, ev_tobs, ev_tpred);
        if (*aug) return run_augment(au_ckpt, au_synth, au_out, au_seed);
        if (*gen) return run_gen_synth(sc, gs_out);
        if (*bench) return run_benchmark(bench, be_config, be_flags, be_data, be_synth, be_n, be_out);
        if (*plot)
            return run_plot(pl_data, pl_scene, pl_ckpt, pl_samples, pl_seed, pl_out, pl_tobs,
                            pl_tpred);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
