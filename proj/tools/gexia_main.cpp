#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "gexia/eval.hpp"
#include "gexia/gex.hpp"
#include "gexia/gradcheck.hpp"
#include "gexia/synth.hpp"
#include "gexia/trainer.hpp"

namespace fs = std::filesystem;
using namespace gexia;

namespace {

// Exit codes: 0 ok, 2 usage/config, 3 data/format, 4 numeric, 5 remote service.
constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumeric = 4;
constexpr int kRemote = 5;

int fail(int code, const std::string& category, const std::string& message) {
    std::cerr << "gexia: error(" << category << "): " << message << std::endl;
    return code;
}

std::pair<std::int64_t, std::int64_t> parse_iters(const std::string& s) {
    auto dash = s.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= s.size()) {
        throw UsageError("--iters must look like V-T, e.g. 3-1, got '" + s + "'");
    }
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(s.substr(0, dash), &used);
        if (used != dash) throw std::invalid_argument(s);
        const std::string tail = s.substr(dash + 1);
        const std::int64_t t = std::stoll(tail, &used);
        if (used != tail.size()) throw std::invalid_argument(s);
        if (v < 0 || t < 0) throw UsageError("iteration counts must be >= 0");
        return {v, t};
    } catch (const std::invalid_argument&) {
        throw UsageError("--iters must look like V-T, e.g. 3-1, got '" + s + "'");
    } catch (const std::out_of_range&) {
        throw UsageError("--iters value out of range: '" + s + "'");
    }
}

void print_report(const RetrievalReport& r, std::int64_t vi, std::int64_t ti) {
    std::printf("%-4s %8lld %8lld %8.4f %8.4f %8.4f %8.2f %6lld\n", r.direction.c_str(), static_cast<long long>(vi),
                static_cast<long long>(ti), r.r1, r.r5, r.r10, r.mdr, static_cast<long long>(r.n_queries));
}

struct PretrainArgs {
    std::string config_path, data_path, out_dir, resume, dtype_override;
    std::int64_t steps_override = -1;
    std::int64_t batch_override = -1;
    std::int64_t seed_override = -1;
    bool freeze_encoders = false;
};

template <typename S>
void run_pretrain(RunConfig cfg, const Manifest& data, const fs::path& data_dir, const PretrainArgs& args) {
    const fs::path out_dir(args.out_dir);
    RunLock lock(out_dir);

    Model<S> model;
    std::int64_t start_step = 0;
    bool resumed = false;
    if (!args.resume.empty()) {
        auto loaded = load_checkpoint<S>(args.resume);
        cfg = loaded.config;
        if (args.steps_override > 0) cfg.train.steps = args.steps_override;
        model = std::move(loaded.model);
        start_step = loaded.meta.step;
        resumed = true;
    } else {
        model = Model<S>::init(cfg.encoder, cfg.iam, cfg.train.tau_init, cfg.seed);
    }
    if (args.freeze_encoders) cfg.train.lr_encoders = 0.0;

    save_run_config(cfg, out_dir / "config.effective.json");
    auto optimizer = make_optimizer(model, cfg.train);
    if (resumed) {
        load_optimizer_state(fs::path(args.resume), model, optimizer);
    }

    std::ofstream metrics(out_dir / "metrics.jsonl", resumed ? std::ios::app : std::ios::trunc);
    if (!metrics) throw DataError("cannot open metrics log in " + out_dir.string());
    const std::int64_t final_step = train(data, data_dir, cfg, model, optimizer, start_step, out_dir, &metrics);
    std::cout << "trained to step " << final_step << ", checkpoint in " << out_dir.string() << std::endl;
}

template <typename S>
int run_eval(const fs::path& ckpt, const fs::path& data_path, const std::string& iters_flag,
             const std::string& sweep_flag, const std::string& direction) {
    auto loaded = load_checkpoint<S>(ckpt);
    Manifest manifest = load_manifest(data_path);
    std::vector<const ClipRecord*> records;
    for (const auto& r : manifest.records()) records.push_back(&r);
    if (records.empty()) throw DataError("evaluation manifest is empty");

    std::vector<std::pair<std::int64_t, std::int64_t>> settings;
    if (!sweep_flag.empty()) {
        std::string item;
        std::istringstream is(sweep_flag);
        while (std::getline(is, item, ',')) settings.push_back(parse_iters(item));
    } else if (!iters_flag.empty()) {
        settings.push_back(parse_iters(iters_flag));
    } else {
        // Fall back to the checkpoint policy; requires a single-granularity manifest.
        const Granularity g = records.front()->granularity;
        for (const auto* r : records) {
            if (r->granularity != g) {
                throw UsageError("manifest mixes granularities; pass --iters or --sweep explicitly");
            }
        }
        auto s = loaded.config.iter_policy.at(to_string(g));
        settings.push_back({s.video_iters, s.text_iters});
    }

    auto rows = ablation_sweep(loaded.model, records, data_path.parent_path(), settings);
    std::printf("%-4s %8s %8s %8s %8s %8s %8s %6s\n", "dir", "v_iters", "t_iters", "R@1", "R@5", "R@10", "MdR", "N");
    for (const auto& row : rows) {
        if (direction != "v2t") print_report(row.t2v, row.video_iters, row.text_iters);
        if (direction != "t2v") print_report(row.v2t, row.video_iters, row.text_iters);
    }
    return kOk;
}

template <typename S>
int run_heatmap(const fs::path& ckpt, const fs::path& video, const std::string& text, std::int64_t patch,
                std::int64_t stride, const std::string& iters_flag, const fs::path& out_dir) {
    auto loaded = load_checkpoint<S>(ckpt);
    FrameVolume frames = read_frames(video);
    if (frames.d > loaded.config.encoder.d_long) frames = sample_frames(frames, loaded.config.encoder.d_long);
    auto [vi, ti] = parse_iters(iters_flag);
    HeatmapGeometry geom;
    geom.patch = patch;
    geom.stride = stride;
    auto result = alignment_heatmap(loaded.model, frames, text, geom, vi, ti);
    fs::create_directories(out_dir);
    for (std::size_t t = 0; t < result.grids.size(); ++t) {
        gxt::write_tensor(out_dir / ("scores_t" + std::to_string(t) + ".gxt"), *result.grids[t]);
        gxt::write_tensor(out_dir / ("map_t" + std::to_string(t) + ".gxt"), *result.resized[t]);
    }
    std::cout << "baseline similarity " << result.baseline_sim << ", " << result.grids.size() << " grids of "
              << result.grid_h << "x" << result.grid_w << " in " << out_dir.string() << std::endl;
    return kOk;
}

template <typename S>
int run_gradcheck(std::uint64_t seed, double eps, double tol, std::int64_t iters) {
    auto rows = gradcheck_full_pipeline<S>(seed, eps, iters);
    bool ok = true;
    for (const auto& row : rows) {
        const bool pass = row.max_rel_err < tol;
        ok = ok && pass;
        std::printf("%-28s %12.3e %s\n", row.name.c_str(), row.max_rel_err, pass ? "PASS" : "FAIL");
    }
    if (!ok) {
        std::cerr << "gexia: error(numeric): gradient check failed at tol " << tol << std::endl;
        return kNumeric;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GEXIA granularity-expansion and iterative-approximation laboratory"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic SVST corpus");
    std::string synth_out;
    SynthConfig synth_cfg;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--pairs", synth_cfg.pairs, "number of pairs");
    synth->add_option("--sources", synth_cfg.sources, "number of source ids");
    synth->add_option("--seed", synth_cfg.seed, "random seed");
    synth->add_option("--height", synth_cfg.frame_h, "frame height");
    synth->add_option("--width", synth_cfg.frame_w, "frame width");
    synth->add_option("--frames", synth_cfg.frames_per_clip, "stored frames per clip");

    // gex
    auto* gex = app.add_subcommand("gex", "expand a single-grained manifest");
    std::string gex_input, gex_out, gex_summarizer = "extractive", gex_endpoint, gex_model, gex_prompt_file;
    GexConfig gex_cfg;
    gex->add_option("--input", gex_input, "input manifest")->required();
    gex->add_option("--out", gex_out, "output directory")->required();
    gex->add_option("--min-group", gex_cfg.min_group, "minimum SVST pairs per source");
    gex->add_option("--summarizer", gex_summarizer, "extractive | remote");
    gex->add_flag("--with-images", gex_cfg.with_images, "also emit IT records");
    gex->add_flag("--random-fallback", gex_cfg.random_fallback, "random integration when no groups qualify");
    gex->add_option("--random-children", gex_cfg.random_children, "children per random integration");
    gex->add_option("--max-children", gex_cfg.max_children, "cap children per integrated record (0 = whole group)");
    gex->add_option("--seed", gex_cfg.seed, "random seed");
    gex->add_option("--endpoint", gex_endpoint, "remote chat-completion endpoint URL");
    gex->add_option("--model", gex_model, "remote model name");
    gex->add_option("--max-words", gex_cfg.summarizer.max_words, "summary word budget");
    gex->add_option("--prompt-template", gex_prompt_file, "prompt template file ([SENTENCES] placeholder)");
    gex->add_flag("--fail-hard", gex_cfg.summarizer.fail_hard, "abort on remote summarizer failure");

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "contrastive pretraining");
    PretrainArgs pre_args;
    pre->add_option("--config", pre_args.config_path, "run config JSON");
    pre->add_option("--data", pre_args.data_path, "training manifest")->required();
    pre->add_option("--out", pre_args.out_dir, "run/checkpoint directory")->required();
    pre->add_option("--resume", pre_args.resume, "checkpoint directory to resume from");
    pre->add_option("--steps", pre_args.steps_override, "override train.steps");
    pre->add_option("--batch-size", pre_args.batch_override, "override train.batch_size");
    pre->add_option("--seed", pre_args.seed_override, "override seed");
    pre->add_option("--dtype", pre_args.dtype_override, "override dtype (f32|f64)");
    pre->add_flag("--freeze-encoders", pre_args.freeze_encoders, "set lr_encoders to 0");

    // eval
    auto* ev = app.add_subcommand("eval", "retrieval evaluation");
    std::string ev_ckpt, ev_data, ev_iters, ev_sweep, ev_direction = "both";
    ev->add_option("--ckpt", ev_ckpt, "checkpoint directory")->required();
    ev->add_option("--data", ev_data, "evaluation manifest")->required();
    ev->add_option("--iters", ev_iters, "V-T iteration counts, e.g. 3-1");
    ev->add_option("--sweep", ev_sweep, "comma list of V-T settings, e.g. 1-1,3-1,3-3");
    ev->add_option("--direction", ev_direction, "t2v | v2t | both")
        ->check(CLI::IsMember({"t2v", "v2t", "both"}));

    // heatmap
    auto* hm = app.add_subcommand("heatmap", "occlusion alignment score maps");
    std::string hm_ckpt, hm_video, hm_text, hm_iters = "1-1", hm_out;
    std::int64_t hm_patch = 32, hm_stride = 16;
    hm->add_option("--ckpt", hm_ckpt, "checkpoint directory")->required();
    hm->add_option("--video", hm_video, "GXT1 frame volume")->required();
    hm->add_option("--text", hm_text, "query text")->required();
    hm->add_option("--patch", hm_patch, "mask patch size in pixels");
    hm->add_option("--stride", hm_stride, "mask stride in pixels");
    hm->add_option("--iters", hm_iters, "V-T iteration counts");
    hm->add_option("--out", hm_out, "output directory")->required();

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient oracle");
    std::uint64_t gc_seed = 1;
    double gc_eps = 1e-5, gc_tol = 1e-4;
    std::int64_t gc_iters = 3;
    std::string gc_dtype = "f64";
    gc->add_option("--seed", gc_seed, "random seed");
    gc->add_option("--eps", gc_eps, "finite-difference step");
    gc->add_option("--tol", gc_tol, "max relative error per tensor");
    gc->add_option("--iters", gc_iters, "IAM iterations in the checked graph");
    gc->add_option("--dtype", gc_dtype, "f32 | f64")->check(CLI::IsMember({"f32", "f64"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "gexia: error(usage): " << e.what() << std::endl;
        return kUsage;
    }

    try {
        if (*synth) {
            Manifest m = synthesize_corpus(synth_out, synth_cfg);
            std::cout << "wrote " << m.size() << " SVST pairs to " << synth_out << std::endl;
            return kOk;
        }
        if (*gex) {
            if (gex_summarizer == "remote") {
                gex_cfg.summarizer.kind = SummarizerConfig::Kind::remote_chat;
                gex_cfg.summarizer.endpoint = gex_endpoint;
                gex_cfg.summarizer.model = gex_model;
                // Fail early when the token is missing (constructor checks).
                RemoteSummarizer probe(gex_cfg.summarizer);
                (void)probe;
            } else if (gex_summarizer != "extractive") {
                throw UsageError("--summarizer must be extractive or remote");
            }
            if (!gex_prompt_file.empty()) {
                std::ifstream is(gex_prompt_file);
                if (!is) throw DataError("cannot open prompt template: " + gex_prompt_file);
                gex_cfg.summarizer.prompt_template.assign((std::istreambuf_iterator<char>(is)),
                                                          std::istreambuf_iterator<char>());
            }
            const fs::path input(gex_input);
            Manifest in = load_manifest(input);
            GexResult result = expand(in, input.parent_path(), gex_out, gex_cfg);
            save_manifest(result.manifest, fs::path(gex_out) / "manifest.jsonl");
            std::cout << "histogram:";
            for (const auto& [g, n] : result.histogram) std::cout << " " << g << "=" << n;
            std::cout << std::endl;
            for (const auto& w : result.warnings) std::cerr << "gexia: warning: " << w << std::endl;
            return kOk;
        }
        if (*pre) {
            RunConfig cfg;
            if (!pre_args.config_path.empty()) cfg = load_run_config(pre_args.config_path);
            if (pre_args.steps_override > 0) cfg.train.steps = pre_args.steps_override;
            if (pre_args.batch_override > 0) cfg.train.batch_size = pre_args.batch_override;
            if (pre_args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(pre_args.seed_override);
            if (!pre_args.dtype_override.empty()) cfg.dtype = pre_args.dtype_override;
            cfg.validate();
            const fs::path data_path(pre_args.data_path);
            Manifest data = load_manifest(data_path);
            if (cfg.dtype == "f64") {
                run_pretrain<double>(cfg, data, data_path.parent_path(), pre_args);
            } else {
                run_pretrain<float>(cfg, data, data_path.parent_path(), pre_args);
            }
            return kOk;
        }
        if (*ev) {
            const std::string dtype = read_checkpoint_meta(ev_ckpt).dtype;
            return dtype == "f64" ? run_eval<double>(ev_ckpt, ev_data, ev_iters, ev_sweep, ev_direction)
                                  : run_eval<float>(ev_ckpt, ev_data, ev_iters, ev_sweep, ev_direction);
        }
        if (*hm) {
            const std::string dtype = read_checkpoint_meta(hm_ckpt).dtype;
            return dtype == "f64"
                       ? run_heatmap<double>(hm_ckpt, hm_video, hm_text, hm_patch, hm_stride, hm_iters, hm_out)
                       : run_heatmap<float>(hm_ckpt, hm_video, hm_text, hm_patch, hm_stride, hm_iters, hm_out);
        }
        if (*gc) {
            return gc_dtype == "f32" ? run_gradcheck<float>(gc_seed, gc_eps, gc_tol, gc_iters)
                                     : run_gradcheck<double>(gc_seed, gc_eps, gc_tol, gc_iters);
        }
    } catch (const UsageError& e) {
        return fail(kUsage, "usage", e.what());
    } catch (const ConfigError& e) {
        return fail(kUsage, "config", e.what());
    } catch (const RemoteServiceError& e) {
        return fail(kRemote, "remote", e.what());
    } catch (const DegenerateInputError& e) {
        return fail(kNumeric, "numeric", e.what());
    } catch (const NumericError& e) {
        return fail(kNumeric, "numeric", e.what());
    } catch (const FormatError& e) {
        return fail(kData, "format", e.what());
    } catch (const DimensionError& e) {
        return fail(kData, "data", e.what());
    } catch (const DataError& e) {
        return fail(kData, "data", e.what());
    } catch (const std::exception& e) {
        return fail(kData, "data", e.what());
    }
    return kUsage;
}
