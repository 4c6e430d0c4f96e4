// Command-line pipeline: synthetic scenes in, pseudo masks and evaluation out.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>
#include <vector>

#include "pointprop/config.hpp"
#include "pointprop/crf.hpp"
#include "pointprop/io.hpp"
#include "pointprop/metrics.hpp"
#include "pointprop/pipeline.hpp"
#include "pointprop/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pointprop;

namespace {

// Work-stealing over [0, count); tasks only write per-index files, so the
// schedule cannot affect any output byte.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    fn(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string object_name(const char* prefix, int id, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03d.%s", prefix, id, ext);
    return buf;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    double crop_pad = 0.0;
    bool crop_pad_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run config file (key = value, or run.json)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "64-bit seed override")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--crop-pad", args.crop_pad, "box dilation fraction per side")
        ->each([&args](const std::string&) { args.crop_pad_given = true; });
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) {
        config = load_run_config(args.config_path);
    }
    if (args.seed_given) {
        config.seed = args.seed;
    }
    if (args.crop_pad_given) {
        config.crop_pad = args.crop_pad;
    }
    config.validate();
    return config;
}

ProbMask scores_to_grid(const PropagationScores& scores) {
    ProbMask grid(scores.n(), 2);
    for (int i = 0; i < scores.n(); ++i) {
        grid.set(i, 0, scores.pi_fg(i));
        grid.set(i, 1, scores.pi_bg(i));
    }
    return grid;
}

PropagationScores grid_to_scores(const ProbMask& grid) {
    if (grid.height != 2) {
        throw BadDimensions("scores grid must have two rows");
    }
    PropagationScores scores;
    scores.pi_fg = Vec::Zero(grid.width);
    scores.pi_bg = Vec::Zero(grid.width);
    for (int i = 0; i < grid.width; ++i) {
        scores.pi_fg(i) = grid.at(i, 0);
        scores.pi_bg(i) = grid.at(i, 1);
    }
    return scores;
}

json report_to_json(const EvalReport& report) {
    json j;
    j["n_objects"] = report.n_objects;
    j["mean_iou"] = report.mean_iou;
    j["per_object_iou"] = report.per_object_iou;
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v) {
            j[key] = *v;
        } else {
            j[key] = nullptr;
        }
    };
    put("point_precision_fg", report.point_precision_fg);
    put("point_recall_fg", report.point_recall_fg);
    put("point_precision_bg", report.point_precision_bg);
    put("point_recall_bg", report.point_recall_bg);
    return j;
}

int run_synth(const CommonArgs& common, const std::string& spec_path, int count, int threads,
              bool emit_sim) {
    const RunConfig config = resolve_config(common);
    SceneSpec spec = load_scene_spec(spec_path);
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    parallel_for(count, threads, [&](int index) {
        SceneSpec each = spec;
        each.seed = mix_seed(config.seed, static_cast<std::uint64_t>(index));
        const Scene scene = generate_scene(each);
        const fs::path scene_dir = fs::path(common.out_dir) / object_name("scene", index, "d");
        save_scene(scene_dir, scene);
        if (emit_sim) {
            for (int i = 0; i < scene.n_objects(); ++i) {
                const SeedGeometry geom = derive_seeds(scene.annotations[i], scene.image.width,
                                                       scene.image.height, config);
                const SimilarityMatrix sim = similarity_from_scene(
                    scene, i, geom.window, config.sim_noise, config.similarity());
                write_matrix(scene_dir / object_name("sim", i, "extm"), sim.values);
            }
        }
    });
    std::cout << "wrote " << count << " scene(s) to " << common.out_dir << "\n";
    return 0;
}

int run_extract_points(const CommonArgs& common, const std::string& masks_dir) {
    const RunConfig config = resolve_config(common);
    std::vector<fs::path> mask_files;
    for (const auto& entry : fs::directory_iterator(masks_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("gt_", 0) == 0 && entry.path().extension() == ".pgm") {
            mask_files.push_back(entry.path());
        }
    }
    std::sort(mask_files.begin(), mask_files.end());
    if (mask_files.empty()) {
        throw IoError("no gt_*.pgm masks found in " + masks_dir);
    }

    // Class ids come from scene.json when the masks belong to a scene.
    std::vector<int> class_ids;
    std::string image_ref;
    if (fs::exists(fs::path(masks_dir) / "scene.json")) {
        std::ifstream in(fs::path(masks_dir) / "scene.json");
        const json meta = json::parse(in);
        class_ids = meta.at("class_ids").get<std::vector<int>>();
        image_ref = "image.ppm";
    }

    std::vector<AnnotationRecord> records;
    for (std::size_t i = 0; i < mask_files.size(); ++i) {
        const BinaryMask mask = read_binary_mask(mask_files[i]);
        AnnotationRecord r;
        r.object_id = static_cast<int>(i);
        r.class_id = i < class_ids.size() ? class_ids[i] : 0;
        r.extreme = extract_extreme_points(mask);
        r.image_ref = image_ref;
        records.push_back(std::move(r));
    }
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    write_annotations(fs::path(common.out_dir) / "annotations.jsonl", records);
    std::cout << "extracted " << records.size() << " annotation(s)\n";
    return 0;
}

int run_build_tpm(const CommonArgs& common, const std::string& sim_path) {
    const RunConfig config = resolve_config(common);
    const SimilarityMatrix sim = SimilarityMatrix::from(read_matrix(sim_path));
    const TransitionMatrix tpm = symmetrize(sinkhorn(sim, config.sinkhorn()));
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    write_matrix(fs::path(common.out_dir) / "tpm.extm", tpm.values);
    std::cout << "tpm: " << tpm.n() << " nodes, row/col deviation "
              << stochastic_deviation(tpm.values) << "\n";
    return 0;
}

// Seed geometry for an annotation needs the source image dimensions; they are
// read from the referenced image next to the annotation file.
std::pair<int, int> annotation_image_dims(const AnnotationRecord& record,
                                          const fs::path& ann_path, int fallback_side) {
    if (!record.image_ref.empty()) {
        const fs::path img_path = ann_path.parent_path() / record.image_ref;
        if (fs::exists(img_path)) {
            const Image img = read_image(img_path);
            return {img.width, img.height};
        }
    }
    return {fallback_side, fallback_side};
}

int run_propagate(const CommonArgs& common, const std::string& tpm_path,
                  const std::string& ann_path, int alpha_flag, bool absorbing_flag,
                  double beta_flag, bool beta_given) {
    RunConfig config = resolve_config(common);
    if (alpha_flag > 0) {
        config.alpha = alpha_flag;
    }
    if (absorbing_flag) {
        config.absorbing = true;
    }
    if (beta_given) {
        config.beta = beta_flag;
    }
    config.validate();

    const TransitionMatrix tpm{read_matrix(tpm_path)};
    const TransitionMatrix propagated = config.absorbing
                                            ? propagate_absorbing(tpm, config.beta)
                                            : propagate_power(tpm, config.alpha);
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    write_matrix(fs::path(common.out_dir) / "propagated.extm", propagated.values);

    const auto records = read_annotations(ann_path);
    for (const AnnotationRecord& record : records) {
        const auto [w, h] = annotation_image_dims(record, ann_path, config.target_side);
        const SeedGeometry geom = derive_seeds(record.extreme, w, h, config);
        if (geom.window.node_count() != propagated.n()) {
            throw SizeMismatch("propagate: TPM has " + std::to_string(propagated.n()) +
                               " nodes but the grid expects " +
                               std::to_string(geom.window.node_count()));
        }
        const PropagationScores scores = propagation_scores(propagated, geom.fg, geom.bg);
        write_prob_mask(fs::path(common.out_dir) /
                            object_name("scores", record.object_id, "expm"),
                        scores_to_grid(scores));
    }
    std::cout << "propagated " << (config.absorbing ? "absorbing" : "alpha-hop")
              << " matrix and " << records.size() << " score file(s)\n";
    return 0;
}

int run_retrieve(const CommonArgs& common, const std::string& scores_dir,
                 const std::string& ann_path, int epoch) {
    const RunConfig config = resolve_config(common);
    const auto records = read_annotations(ann_path);
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    for (const AnnotationRecord& record : records) {
        const auto [w, h] = annotation_image_dims(record, ann_path, config.target_side);
        const SeedGeometry geom = derive_seeds(record.extreme, w, h, config);
        const ProbMask grid = read_prob_mask(
            fs::path(scores_dir) / object_name("scores", record.object_id, "expm"));
        const PropagationScores scores = grid_to_scores(grid);
        if (scores.n() != geom.window.node_count()) {
            throw SizeMismatch("retrieve: scores length does not match the patch grid");
        }
        PseudoPointLabels labels = threshold_labels(scores, geom.box_nodes, config.tau_fg,
                                                    config.tau_bg, config.alpha);
        const std::size_t fg_before = labels.count(NodeLabel::Foreground);
        const std::size_t bg_before = labels.count(NodeLabel::Background);
        const bool mil_fallback = fg_before + bg_before == 0;

        DropoutConfig dropout;
        dropout.rate = config.dropout_rate;
        dropout.keep_floor = config.keep_floor;
        dropout.seed = derive_dropout_seed(config.seed, record.object_id, epoch);
        labels = point_dropout(labels, dropout);

        const SparseTarget target =
            assemble_targets(geom.fg, geom.bg, labels, config.patch_side);
        write_labels(fs::path(common.out_dir) /
                         object_name("labels", record.object_id, "pgm"),
                     labels, config.patch_side);
        write_binary_mask(fs::path(common.out_dir) /
                              object_name("yhat", record.object_id, "pgm"),
                          target.y_hat);
        write_binary_mask(fs::path(common.out_dir) /
                              object_name("kmask", record.object_id, "pgm"),
                          target.k_mask);
        std::cout << "object " << record.object_id << ": retrieved_fg=" << fg_before
                  << " retrieved_bg=" << bg_before
                  << " kept_fg=" << labels.count(NodeLabel::Foreground)
                  << " kept_bg=" << labels.count(NodeLabel::Background)
                  << " mil_fallback=" << (mil_fallback ? 1 : 0) << "\n";
    }
    return 0;
}

int run_refine(const CommonArgs& common, const std::string& mask_path,
               const std::string& image_path) {
    const RunConfig config = resolve_config(common);
    const ProbMask mask = read_prob_mask(mask_path);
    const Image image = read_image(image_path);
    const ProbMask refined = meanfield_refine(mask, image, config.crf());
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    write_prob_mask(fs::path(common.out_dir) / "refined.expm", refined);
    std::cout << "refined " << mask.width << "x" << mask.height << " mask ("
              << config.crf_iterations << " iterations)\n";
    return 0;
}

int run_pseudo_mask(const CommonArgs& common, const std::string& scene_dir, bool refine,
                    int threads) {
    const RunConfig config = resolve_config(common);
    const Scene scene = load_scene(scene_dir);
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    std::vector<std::string> stats(scene.n_objects());
    parallel_for(scene.n_objects(), threads, [&](int i) {
        const ObjectPipelineResult result = run_object_pipeline(scene, i, config);
        ProbMask prob =
            labels_to_prob(result.labels, result.window, scene.image.width, scene.image.height);
        if (refine) {
            prob = meanfield_refine(prob, scene.image, config.crf());
        }
        const BinaryMask mask = threshold_mask(prob, config.mask_threshold);
        write_binary_mask(fs::path(common.out_dir) / object_name("pseudo", i, "pgm"), mask);
        write_labels(fs::path(common.out_dir) / object_name("labels", i, "pgm"), result.labels,
                     config.patch_side);
        write_prob_mask(fs::path(common.out_dir) / object_name("scores", i, "expm"),
                        scores_to_grid(result.scores));
        stats[i] = "object " + std::to_string(i) +
                   ": fg=" + std::to_string(result.labels.count(NodeLabel::Foreground)) +
                   " bg=" + std::to_string(result.labels.count(NodeLabel::Background)) +
                   " mil_fallback=" + (result.mil_fallback ? "1" : "0");
    });
    for (const std::string& line : stats) {
        std::cout << line << "\n";
    }
    return 0;
}

int run_eval(const CommonArgs& common, const std::string& pred_dir, const std::string& gt_dir,
             bool with_baseline) {
    const RunConfig config = resolve_config(common);
    const Scene scene = load_scene(gt_dir);
    std::vector<double> ious;
    std::vector<PointPr> prs;
    std::vector<double> baseline_ious;
    std::vector<PointPr> baseline_prs;

    for (int i = 0; i < scene.n_objects(); ++i) {
        const fs::path pred_path = fs::path(pred_dir) / object_name("pseudo", i, "pgm");
        const BinaryMask pred = read_binary_mask(pred_path);
        ious.push_back(iou(pred, scene.gt_masks[i]));

        const SeedGeometry geom = derive_seeds(scene.annotations[i], scene.image.width,
                                               scene.image.height, config);
        const std::vector<int> classes = node_majority_class(scene, geom.window);
        std::vector<std::uint8_t> is_object(classes.size(), 0);
        for (std::size_t n = 0; n < classes.size(); ++n) {
            is_object[n] = classes[n] == scene.class_ids[i] ? 1 : 0;
        }
        const fs::path labels_path = fs::path(pred_dir) / object_name("labels", i, "pgm");
        if (fs::exists(labels_path)) {
            prs.push_back(point_label_pr(read_labels(labels_path), is_object));
        }

        if (with_baseline) {
            const SimilarityMatrix sim = similarity_from_scene(scene, i, geom.window,
                                                               config.sim_noise,
                                                               config.similarity());
            const PseudoPointLabels baseline = tightness_baseline_labels(
                CropWindow::identity(config.target_side, config.patch_side), geom.target_box,
                sim, geom.fg);
            const BinaryMask baseline_mask = labels_to_mask(baseline, geom.window,
                                                            scene.image.width,
                                                            scene.image.height);
            baseline_ious.push_back(iou(baseline_mask, scene.gt_masks[i]));
            baseline_prs.push_back(point_label_pr(baseline, is_object));
        }
    }

    json out;
    out["main"] = report_to_json(make_report(ious, prs));
    if (with_baseline) {
        out["baseline"] = report_to_json(make_report(baseline_ious, baseline_prs));
    }
    fs::create_directories(common.out_dir);
    write_run_json(common.out_dir, config);
    std::ofstream report_file(fs::path(common.out_dir) / "report.json", std::ios::binary);
    report_file << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"extreme-point label propagation pipeline"};
    app.require_subcommand(1);

    CommonArgs synth_args, extract_args, tpm_args, prop_args, retr_args, refine_args,
        pseudo_args, eval_args;

    auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
    std::string spec_path;
    int synth_count = 1;
    int synth_threads = static_cast<int>(std::thread::hardware_concurrency());
    bool synth_emit_sim = false;
    synth->add_option("--spec", spec_path, "scene spec file")->required();
    synth->add_option("--count", synth_count, "number of scenes");
    synth->add_option("--threads", synth_threads, "worker threads");
    synth->add_flag("--emit-sim", synth_emit_sim,
                    "also write per-object similarity matrices (EXTM)");
    add_common(synth, synth_args);

    auto* extract = app.add_subcommand("extract-points", "masks -> extreme point annotations");
    std::string masks_dir;
    extract->add_option("--masks", masks_dir, "directory of gt_*.pgm masks")->required();
    add_common(extract, extract_args);

    auto* tpm = app.add_subcommand("build-tpm", "similarity -> doubly-stochastic transition");
    std::string sim_path;
    tpm->add_option("--sim", sim_path, "similarity matrix file (EXTM)")->required();
    add_common(tpm, tpm_args);

    auto* prop = app.add_subcommand("propagate",
                                    "propagate the transition matrix and score seeds");
    std::string prop_tpm, prop_ann;
    int prop_alpha = 0;
    bool prop_absorbing = false;
    double prop_beta = 0.0;
    prop->add_option("--tpm", prop_tpm, "transition matrix file (EXTM)")->required();
    prop->add_option("--ann", prop_ann, "annotation file (JSONL)")->required();
    prop->add_option("--alpha", prop_alpha, "hop count override");
    prop->add_flag("--absorbing", prop_absorbing, "use the converged closed form");
    auto* beta_opt = prop->add_option("--beta", prop_beta, "blending coefficient");
    add_common(prop, prop_args);

    auto* retr = app.add_subcommand("retrieve", "scores -> pseudo point labels and targets");
    std::string retr_scores, retr_ann;
    int retr_epoch = 0;
    retr->add_option("--scores", retr_scores, "directory holding scores_*.expm")->required();
    retr->add_option("--ann", retr_ann, "annotation file (JSONL)")->required();
    retr->add_option("--epoch", retr_epoch, "epoch index folded into the dropout seed");
    add_common(retr, retr_args);

    auto* refine = app.add_subcommand("refine", "mean-field CRF refinement of a mask");
    std::string refine_mask, refine_image;
    refine->add_option("--mask", refine_mask, "probability mask (EXPM)")->required();
    refine->add_option("--image", refine_image, "guide image (PGM/PPM)")->required();
    add_common(refine, refine_args);

    auto* pseudo = app.add_subcommand("pseudo-mask", "full per-object pipeline on a scene");
    std::string pseudo_scene;
    bool pseudo_refine = false;
    int pseudo_threads = static_cast<int>(std::thread::hardware_concurrency());
    pseudo->add_option("--scene", pseudo_scene, "scene directory")->required();
    pseudo->add_flag("--refine", pseudo_refine, "CRF-refine the painted labels");
    pseudo->add_option("--threads", pseudo_threads, "worker threads");
    add_common(pseudo, pseudo_args);

    auto* evalc = app.add_subcommand("eval", "pseudo masks vs scene ground truth");
    std::string eval_pred, eval_gt;
    bool eval_baseline = false;
    evalc->add_option("--pred", eval_pred, "directory of pseudo_*.pgm (and labels_*.pgm)")
        ->required();
    evalc->add_option("--gt", eval_gt, "scene directory with ground truth")->required();
    evalc->add_flag("--baseline", eval_baseline, "also score the box-tightness baseline");
    add_common(evalc, eval_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(synth)) {
            return run_synth(synth_args, spec_path, synth_count, synth_threads,
                             synth_emit_sim);
        }
        if (app.got_subcommand(extract)) {
            return run_extract_points(extract_args, masks_dir);
        }
        if (app.got_subcommand(tpm)) {
            return run_build_tpm(tpm_args, sim_path);
        }
        if (app.got_subcommand(prop)) {
            return run_propagate(prop_args, prop_tpm, prop_ann, prop_alpha, prop_absorbing,
                                 prop_beta, beta_opt->count() > 0);
        }
        if (app.got_subcommand(retr)) {
            return run_retrieve(retr_args, retr_scores, retr_ann, retr_epoch);
        }
        if (app.got_subcommand(refine)) {
            return run_refine(refine_args, refine_mask, refine_image);
        }
        if (app.got_subcommand(pseudo)) {
            return run_pseudo_mask(pseudo_args, pseudo_scene, pseudo_refine, pseudo_threads);
        }
        if (app.got_subcommand(evalc)) {
            return run_eval(eval_args, eval_pred, eval_gt, eval_baseline);
        }
    } catch (const NoConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const SingularSystem& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NonFinite& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
