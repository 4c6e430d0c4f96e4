// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Usage: acceptance --cli <path-to-pointprop-binary> [--keep-tmp]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pointprop/config.hpp"
#include "pointprop/crf.hpp"
#include "pointprop/io.hpp"
#include "pointprop/losses.hpp"
#include "pointprop/metrics.hpp"
#include "pointprop/pipeline.hpp"
#include "pointprop/rng.hpp"
#include "pointprop/scene.hpp"
#include "pointprop/transition.hpp"

namespace fs = std::filesystem;
using namespace pointprop;

namespace {

int g_failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << id << ": " << detail << "\n";
    if (!ok) {
        ++g_failures;
    }
}

Mat random_positive(Rng& rng, int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = 0.05 + rng.unit();
        }
    }
    return m;
}

TransitionMatrix random_transition(Rng& rng, int n) {
    return symmetrize(sinkhorn(SimilarityMatrix{random_positive(rng, n)}, {1e-12, 2000}));
}

// --- desk-scale scene suite shared by criteria 5 and 6 ---

SceneSpec separated_spec(std::uint64_t seed, double sigma) {
    SceneSpec spec;
    spec.image_side = 128;
    spec.patch_side = 16;
    spec.n_objects = 1;
    spec.shape_family = ShapeFamily::Rect;
    spec.occluder = OccluderKind::Bar;
    spec.occluder_min_width = 14;
    spec.occluder_max_width = 20;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    return spec;
}

RunConfig desk_config(double sigma) {
    RunConfig config;
    config.target_side = 128;
    config.patch_side = 16;
    config.delta = 3;
    config.sim_noise = sigma;
    // Class-separated similarity is near block diagonal; the inter-block
    // balance stalls at the cross-block mass (~1e-8), so the desk operating
    // point asks for the type-level 1e-6 balance instead.
    config.sinkhorn_tolerance = 1e-6;
    return config;
}

void criterion_sinkhorn() {
    Rng rng(1001);
    double worst_dev = 0.0;
    double worst_scale = 0.0;
    int checked = 0;
    for (int n : {16, 64, 256, 1024}) {
        for (int rep = 0; rep < 25; ++rep) {
            const SimilarityMatrix s{random_positive(rng, n)};
            const Mat a = sinkhorn(s);
            worst_dev = std::max(worst_dev, stochastic_deviation(a));
            for (double c : {1e-3, 1e3}) {
                const Mat scaled = sinkhorn(SimilarityMatrix{(c * s.values).eval()});
                worst_scale = std::max(worst_scale, (scaled - a).cwiseAbs().maxCoeff());
            }
            ++checked;
        }
    }
    std::ostringstream detail;
    detail << checked << " matrices over {16,64,256,1024}; max row/col deviation " << worst_dev
           << " (<= 1e-8), max scale-invariance gap " << worst_scale << " (<= 1e-7)";
    report("1. sinkhorn convergence", worst_dev <= 1e-8 && worst_scale <= 1e-7, detail.str());
}

void criterion_propagation_oracle() {
    Rng rng(1002);
    double worst = 0.0;
    int cases = 0;
    for (int n = 2; n <= 8; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            const TransitionMatrix t = random_transition(rng, n);
            for (int alpha = 1; alpha <= 4; ++alpha) {
                const Mat got = propagate_power(t, alpha).values;
                const Mat want = oracles::power_by_paths(t.values, alpha);
                worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
                ++cases;
            }
        }
    }
    std::ostringstream detail;
    detail << cases << " (n,alpha) cases, n<=8, alpha<=4; max |power - path enumeration| = "
           << worst << " (<= 1e-12)";
    report("2. propagation oracle", worst <= 1e-12, detail.str());
}

void criterion_absorbing() {
    Rng rng(1003);
    double worst = 0.0;
    double worst_rows = 0.0;
    for (int n : {4, 16, 64}) {
        const TransitionMatrix t = random_transition(rng, n);
        for (double beta : {0.0, 0.25, 0.5}) {
            const Mat closed = propagate_absorbing(t, beta).values;
            const Mat series = oracles::neumann_series(t.values, beta, 60);
            worst = std::max(worst, (closed - series).cwiseAbs().maxCoeff());
            worst_rows = std::max(
                worst_rows, (closed.rowwise().sum().array() - 1.0).abs().maxCoeff());
        }
    }
    std::ostringstream detail;
    detail << "beta in {0, 0.25, 0.5}; max |closed form - 60-term series| = " << worst
           << " (<= 1e-9), max row-sum deviation " << worst_rows;
    report("3. absorbing-chain identity", worst <= 1e-9 && worst_rows <= 1e-9, detail.str());
}

void criterion_dice_grad() {
    Rng rng(1004);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        ProbMask p(16, 16);
        ProbMask q(16, 16);
        for (double& v : p.values) {
            v = rng.unit();
        }
        for (double& v : q.values) {
            v = rng.unit();
        }
        const ProbMask grad = dice_grad(p, q);
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double fd = oracles::finite_difference(
                [&](const ProbMask& m) { return dice_loss(m, q); }, p, i);
            const double scale = std::max({std::fabs(fd), std::fabs(grad.values[i]), 1e-12});
            worst = std::max(worst, std::fabs(grad.values[i] - fd) / scale);
        }
    }
    std::ostringstream detail;
    detail << "50 random 16x16 instances; max relative error vs central differences = " << worst
           << " (< 1e-4)";
    report("4. dice gradient check", worst < 1e-4, detail.str());
}

void criterion_separated_objects() {
    const int n_scenes = 50;

    // Directional claim at sigma = 0.05.
    int wins = 0;
    double mean_ours = 0.0;
    double mean_baseline = 0.0;
    const RunConfig noisy = desk_config(0.05);
    for (int k = 0; k < n_scenes; ++k) {
        const Scene scene = generate_scene(separated_spec(9000 + k, 0.05));
        const ObjectPipelineResult r = run_object_pipeline(scene, 0, noisy);
        const BinaryMask ours =
            labels_to_mask(r.labels, r.window, scene.image.width, scene.image.height);
        const PseudoPointLabels base = tightness_baseline_labels(
            CropWindow::identity(noisy.target_side, noisy.patch_side), r.target_box,
            r.similarity, r.fg);
        const BinaryMask base_mask =
            labels_to_mask(base, r.window, scene.image.width, scene.image.height);
        const double iou_ours = iou(ours, scene.gt_masks[0]);
        const double iou_base = iou(base_mask, scene.gt_masks[0]);
        mean_ours += iou_ours;
        mean_baseline += iou_base;
        wins += iou_ours > iou_base;
    }
    mean_ours /= n_scenes;
    mean_baseline /= n_scenes;

    // Occluder-class hygiene at sigma = 0.
    int occluder_fg = 0;
    const RunConfig clean = desk_config(0.0);
    for (int k = 0; k < n_scenes; ++k) {
        const Scene scene = generate_scene(separated_spec(9000 + k, 0.0));
        const ObjectPipelineResult r = run_object_pipeline(scene, 0, clean);
        const std::vector<int> classes = node_majority_class(scene, r.window);
        for (std::size_t node = 0; node < r.labels.labels.size(); ++node) {
            if (r.labels.labels[node] == NodeLabel::Foreground &&
                classes[node] == scene.occluder_class) {
                ++occluder_fg;
            }
        }
    }

    std::ostringstream detail;
    detail << "50 bar-occluded scenes: pipeline beats baseline on " << wins
           << "/50 (mean IoU " << mean_ours << " vs " << mean_baseline
           << "); occluder patches labeled FG at sigma=0: " << occluder_fg;
    report("5. separated-object directional claim", wins == n_scenes && occluder_fg == 0,
           detail.str());
}

void criterion_retrieval_precision() {
    int scenes_checked = 0;
    int fg_defined = 0;
    int bg_defined = 0;
    int violations = 0;
    std::ostringstream bad;
    const RunConfig clean = desk_config(0.0);

    auto check_scene = [&](const SceneSpec& spec) {
        const Scene scene = generate_scene(spec);
        for (int i = 0; i < scene.n_objects(); ++i) {
            const ObjectPipelineResult r = run_object_pipeline(scene, i, clean);
            const std::vector<int> classes = node_majority_class(scene, r.window);
            std::vector<std::uint8_t> is_object(classes.size(), 0);
            for (std::size_t n = 0; n < classes.size(); ++n) {
                is_object[n] = classes[n] == scene.class_ids[i] ? 1 : 0;
            }
            const PointPr pr = point_label_pr(r.labels, is_object);
            ++scenes_checked;
            // FG precision must be defined (seeds always retrieve something)
            // and exact; BG precision is undefined when the box holds no
            // background at all (a tight box around a full rectangle), and
            // must be exact whenever it is defined.
            bool ok = pr.precision_fg.has_value() && *pr.precision_fg == 1.0;
            fg_defined += pr.precision_fg.has_value();
            if (pr.precision_bg.has_value()) {
                ++bg_defined;
                ok = ok && *pr.precision_bg == 1.0;
            }
            if (!ok) {
                ++violations;
                if (bad.str().size() < 120) {
                    bad << " [seed " << spec.seed << " obj " << i << "]";
                }
            }
        }
    };

    // The separated suite at sigma = 0, plus occluder-free shape variety.
    for (int k = 0; k < 50; ++k) {
        check_scene(separated_spec(9000 + k, 0.0));
    }
    for (int k = 0; k < 25; ++k) {
        SceneSpec spec = separated_spec(7000 + k, 0.0);
        spec.occluder = OccluderKind::None;
        spec.shape_family = k % 3 == 0   ? ShapeFamily::Rect
                            : k % 3 == 1 ? ShapeFamily::Ellipse
                                         : ShapeFamily::Polyomino;
        check_scene(spec);
    }

    const bool ok = violations == 0 && fg_defined == scenes_checked &&
                    bg_defined * 2 >= scenes_checked;
    std::ostringstream detail;
    detail << scenes_checked << " sigma=0 objects: every defined precision exactly 1.0 ("
           << violations << " violations; FG defined " << fg_defined << "/" << scenes_checked
           << ", BG defined " << bg_defined << "/" << scenes_checked
           << "); tau_fg=1e-3, tau_bg=-1e-4, alpha=3" << bad.str();
    report("6. retrieval correctness at sigma=0", ok, detail.str());
}

void criterion_mil_blindness() {
    // Box mask: rows 4..11, cols 4..11 of a 16x16 grid.
    BinaryMask box(16, 16);
    for (int y = 4; y <= 11; ++y) {
        for (int x = 4; x <= 11; ++x) {
            box.set(x, y, 1);
        }
    }
    const ProbMask full = to_prob(box);

    // Diagonal through the box: same projections, IoU 8/64.
    ProbMask diag(16, 16, 0.0);
    for (int k = 0; k < 8; ++k) {
        diag.set(4 + k, 4 + k, 1.0);
    }

    // Frame of the box: same projections, IoU 28/64.
    ProbMask frame(16, 16, 0.0);
    for (int k = 4; k <= 11; ++k) {
        frame.set(k, 4, 1.0);
        frame.set(k, 11, 1.0);
        frame.set(4, k, 1.0);
        frame.set(11, k, 1.0);
    }

    bool ok = true;
    double worst_gap = 0.0;
    double worst_iou = 0.0;
    for (const ProbMask* variant : {&diag, &frame}) {
        ok = ok && project_columns(*variant) == project_columns(full);
        ok = ok && project_rows(*variant) == project_rows(full);
        const double gap = std::fabs(mil_loss(*variant, box) - mil_loss(full, box));
        worst_gap = std::max(worst_gap, gap);
        const double overlap = iou(threshold_mask(*variant, 0.5), box);
        worst_iou = std::max(worst_iou, overlap);
    }
    std::ostringstream detail;
    detail << "equal-projection pairs with IoU <= " << worst_iou
           << " (< 0.5): max mil_loss difference " << worst_gap << " (< 1e-9)";
    report("7. MIL projection blindness", ok && worst_gap < 1e-9 && worst_iou < 0.5,
           detail.str());
}

void criterion_crf_oracle() {
    Rng rng(1008);
    double worst_oracle = 0.0;
    double worst_norm = 0.0;
    double worst_flip = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
        ProbMask m(16, 16);
        for (double& v : m.values) {
            v = rng.unit();
        }
        Image img(16, 16, 3);
        for (auto& v : img.values) {
            v = static_cast<std::uint8_t>(rng.range(0, 255));
        }
        CrfParams p;
        const ProbMask got = meanfield_refine(m, img, p);
        const ProbMask want = oracles::dense_meanfield(m, img, p.iterations, p.w_spatial,
                                                       p.w_bilateral, p.theta_gamma,
                                                       p.theta_alpha, p.theta_beta, p.compat);
        for (std::size_t i = 0; i < got.values.size(); ++i) {
            worst_oracle = std::max(worst_oracle, std::fabs(got.values[i] - want.values[i]));
        }

        const auto [fg, bg] = meanfield_refine_marginals(m, img, p);
        for (std::size_t i = 0; i < fg.values.size(); ++i) {
            worst_norm = std::max(worst_norm, std::fabs(fg.values[i] + bg.values[i] - 1.0));
        }

        ProbMask flipped(16, 16);
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            flipped.values[i] = 1.0 - m.values[i];
        }
        const ProbMask refl = meanfield_refine(flipped, img, p);
        for (std::size_t i = 0; i < refl.values.size(); ++i) {
            worst_flip = std::max(worst_flip, std::fabs(got.values[i] - (1.0 - refl.values[i])));
        }
    }
    std::ostringstream detail;
    detail << "16x16: max |fast - dense oracle| = " << worst_oracle
           << " (<= 1e-9), marginal sum deviation " << worst_norm
           << " (<= 1e-12), label-flip gap " << worst_flip << " (<= 1e-9)";
    report("8. CRF oracle equivalence",
           worst_oracle <= 1e-9 && worst_norm <= 1e-12 && worst_flip <= 1e-9, detail.str());
}

void criterion_extreme_round_trip() {
    Rng rng(1009);
    int ok_count = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const int cell = 2 + static_cast<int>(rng.below(4));
        const BinaryMask m =
            random_polyomino(rng, 48, 48, 3 + static_cast<int>(rng.below(16)), cell);
        if (m.count() == 0) {
            continue;
        }
        const BBox got = bbox_from_extremes(extract_extreme_points(m));
        ok_count += got == oracles::tight_bbox(m);
    }
    std::ostringstream detail;
    detail << ok_count << "/" << trials
           << " random polyomino masks: bbox(extremes) equals the tight bbox exactly";
    report("9. extreme-point round trip", ok_count == trials, detail.str());
}

// --- criterion 10 helpers ---

int run_cmd(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1) {
        return -1;
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool trees_equal(const fs::path& a, const fs::path& b, std::string* detail) {
    auto collect = [](const fs::path& root) {
        std::map<std::string, fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (entry.is_regular_file()) {
                files[fs::relative(entry.path(), root).string()] = entry.path();
            }
        }
        return files;
    };
    const auto fa = collect(a);
    const auto fb = collect(b);
    if (fa.size() != fb.size()) {
        *detail = "file counts differ";
        return false;
    }
    for (const auto& [rel, path] : fa) {
        const auto it = fb.find(rel);
        if (it == fb.end()) {
            *detail = "missing " + rel;
            return false;
        }
        std::ifstream ia(path, std::ios::binary), ib(it->second, std::ios::binary);
        const std::string ba((std::istreambuf_iterator<char>(ia)), {});
        const std::string bb((std::istreambuf_iterator<char>(ib)), {});
        if (ba != bb) {
            *detail = "byte mismatch in " + rel;
            return false;
        }
    }
    return true;
}

void criterion_cli_determinism(const std::string& cli, const fs::path& tmp) {
    const fs::path spec_file = tmp / "sep.spec";
    const fs::path conf_file = tmp / "desk.conf";
    {
        std::ofstream spec(spec_file);
        spec << "image_side = 128\npatch_side = 16\nn_objects = 1\nshape = rect\n"
             << "occluder = bar\noccluder_min_width = 14\noccluder_max_width = 20\n"
             << "noise_sigma = 0.05\n";
        std::ofstream conf(conf_file);
        conf << "target_side = 128\npatch_side = 16\ndelta = 3\nsim_noise = 0.05\n"
             << "sinkhorn_tolerance = 1e-6\n"
             << "crf_theta_gamma = 2.0\ncrf_theta_alpha = 8.0\n";
    }

    auto run_tree = [&](const fs::path& root, int threads) {
        const std::string base = cli + " --config " + conf_file.string() + " --seed 31";
        std::ostringstream cmd;
        cmd << cli << " synth --spec " << spec_file.string() << " --config "
            << conf_file.string() << " --seed 31 --count 2 --threads " << threads << " --out "
            << (root / "scenes").string() << " > /dev/null";
        if (run_cmd(cmd.str()) != 0) {
            return false;
        }
        for (int k = 0; k < 2; ++k) {
            const std::string scene =
                (root / "scenes" / ("scene_00" + std::to_string(k) + ".d")).string();
            std::ostringstream pm;
            pm << cli << " pseudo-mask --scene " << scene << " --config " << conf_file.string()
               << " --seed 31 --threads " << threads << " --out "
               << (root / ("pred_" + std::to_string(k))).string() << " > /dev/null";
            if (run_cmd(pm.str()) != 0) {
                return false;
            }
            std::ostringstream ev;
            ev << cli << " eval --pred " << (root / ("pred_" + std::to_string(k))).string()
               << " --gt " << scene << " --config " << conf_file.string()
               << " --seed 31 --baseline --out "
               << (root / ("eval_" + std::to_string(k))).string() << " > /dev/null";
            if (run_cmd(ev.str()) != 0) {
                return false;
            }
        }
        return true;
    };

    bool ok = run_tree(tmp / "run_a", 1) && run_tree(tmp / "run_b", 2) &&
              run_tree(tmp / "run_c", 2);
    std::string why;
    if (ok) {
        ok = trees_equal(tmp / "run_a", tmp / "run_b", &why) &&
             trees_equal(tmp / "run_b", tmp / "run_c", &why);
    } else {
        why = "a pipeline subprocess failed";
    }
    report("10. CLI determinism", ok,
           ok ? "3 full pipeline runs (threads 1/2/2) produced byte-identical output trees"
              : why);
}

void extra_cli_contract(const std::string& cli, const fs::path& tmp) {
    bool ok = true;
    std::ostringstream detail;

    // Missing required flag: exit 2, message names the flag.
    const fs::path errfile = tmp / "stderr.txt";
    const int rc = run_cmd(cli + " propagate --tpm nowhere.extm > /dev/null 2> " +
                           errfile.string());
    std::ifstream err(errfile);
    const std::string err_text((std::istreambuf_iterator<char>(err)), {});
    if (rc != 2 || err_text.find("--ann") == std::string::npos) {
        ok = false;
        detail << "missing --ann gave exit " << rc << "; ";
    }

    // alpha = 1 propagation reproduces the TPM payload bit-exactly.
    Rng rng(1010);
    const SimilarityMatrix sim{random_positive(rng, 64)};
    const fs::path simfile = tmp / "sim.extm";
    write_matrix(simfile, sim.values);
    const fs::path annfile = tmp / "ann.jsonl";
    {
        std::ofstream ann(annfile);
        ann << R"({"object_id":0,"class_id":1,"extreme":[[30,10],[10,30],[30,50],[50,30]],)"
            << R"("image":""})"
            << "\n";
    }
    const fs::path conf = tmp / "c16.conf";
    {
        std::ofstream out(conf);
        out << "target_side = 64\npatch_side = 8\ndelta = 2\n";
    }
    const std::string common = " --config " + conf.string() + " --seed 1 ";
    int rc2 = run_cmd(cli + " build-tpm --sim " + simfile.string() + common + "--out " +
                      (tmp / "tpm_out").string() + " > /dev/null");
    int rc3 = run_cmd(cli + " propagate --tpm " + (tmp / "tpm_out" / "tpm.extm").string() +
                      " --ann " + annfile.string() + common + "--alpha 1 --out " +
                      (tmp / "prop_out").string() + " > /dev/null");
    if (rc2 != 0 || rc3 != 0) {
        ok = false;
        detail << "build-tpm/propagate exits " << rc2 << "/" << rc3 << "; ";
    } else {
        std::ifstream fa(tmp / "tpm_out" / "tpm.extm", std::ios::binary);
        std::ifstream fb(tmp / "prop_out" / "propagated.extm", std::ios::binary);
        const std::string ba((std::istreambuf_iterator<char>(fa)), {});
        const std::string bb((std::istreambuf_iterator<char>(fb)), {});
        if (ba != bb) {
            ok = false;
            detail << "alpha-1 payload differs; ";
        }
    }
    report("cli contract (exit codes, alpha-1 identity)", ok,
           ok ? "missing --ann exits 2 naming the flag; alpha-1 output equals the TPM payload"
              : detail.str());
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    bool keep_tmp = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else if (arg == "--keep-tmp") {
            keep_tmp = true;
        } else {
            std::cerr << "usage: acceptance --cli <pointprop binary> [--keep-tmp]\n";
            return 2;
        }
    }

    const auto started = std::chrono::steady_clock::now();
    criterion_sinkhorn();
    criterion_propagation_oracle();
    criterion_absorbing();
    criterion_dice_grad();
    criterion_separated_objects();
    criterion_retrieval_precision();
    criterion_mil_blindness();
    criterion_crf_oracle();
    criterion_extreme_round_trip();

    if (cli.empty()) {
        report("10. CLI determinism", false, "no --cli binary given");
    } else {
        const fs::path tmp =
            fs::temp_directory_path() /
            ("pointprop-acceptance-" + std::to_string(static_cast<unsigned>(::getpid())));
        fs::create_directories(tmp);
        try {
            criterion_cli_determinism(cli, tmp);
            extra_cli_contract(cli, tmp);
        } catch (const std::exception& e) {
            report("10. CLI determinism", false, e.what());
        }
        if (!keep_tmp) {
            std::error_code ec;
            fs::remove_all(tmp, ec);
        }
    }

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << " ("
              << g_failures << " failed, " << elapsed / 1000.0 << " s)\n";
    return g_failures == 0 ? 0 : 1;
}
