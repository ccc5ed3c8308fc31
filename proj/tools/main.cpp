/* SPDX-License-Identifier: Apache-2.0 */
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splatpart/cluster.hpp"
#include "splatpart/io.hpp"
#include "splatpart/net.hpp"
#include "splatpart/render.hpp"
#include "splatpart/swap.hpp"
#include "splatpart/synthetic.hpp"

namespace {

using namespace splatpart;

/// Relative paths resolve under SPLATPART_DATA_DIR (inputs) or
/// SPLATPART_OUT_DIR (outputs) when those are set.
std::string resolve(const std::string& path, const char* env) {
    if (path.empty() || path.front() == '/') {
        return path;
    }
    const char* base = std::getenv(env);
    if (!base || !*base) {
        return path;
    }
    return std::string(base) + "/" + path;
}

std::string in_path(const std::string& p) { return resolve(p, "SPLATPART_DATA_DIR"); }
std::string out_path(const std::string& p) { return resolve(p, "SPLATPART_OUT_DIR"); }

void print_repro(const std::string& command, const std::string& seed,
                 const std::string& config_desc) {
    std::ostringstream hash;
    hash << "0x" << std::hex << std::setfill('0') << std::setw(16) << fnv1a_hash(config_desc);
    std::cout << "# reproducibility\n"
              << "#   command: " << command << "\n"
              << "#   seed: " << seed << "\n"
              << "#   config-hash: " << hash.str() << "\n"
              << "#   formats: splat=" << kSplatFormatVersion
              << " binding=" << kBindingFormatVersion << " labels=" << kLabelsFormatVersion
              << " segmentation=" << kSegmentationFormatVersion
              << " segment=" << kSegmentFormatVersion
              << " checkpoint=" << kCheckpointFormatVersion << "\n";
}

/// Accepts either a labels file or a segmentation table and returns flat
/// per-Gaussian labels (noise = -1).
std::vector<int> read_any_labels(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) {
        throw ParseError("cannot open '" + path + "' for reading");
    }
    std::string magic;
    probe >> magic;
    probe.close();
    if (magic == "splatpart-segmentation") {
        return flatten_segmentation(read_segmentation(path));
    }
    return read_labels(path);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string spec_name = "three-band";
    std::string out_prefix;
    std::uint64_t seed = 1;
    int resolution = 0;             // 0 = spec default
    int gaussians_per_triangle = 0; // 0 = spec default
};

int run_synth(const SynthArgs& a) {
    SyntheticSpec spec =
        a.spec_name == "disjoint" ? make_disjoint_subparts_spec() : make_three_band_spec();
    spec.seed = a.seed;
    if (a.resolution > 0) {
        spec.resolution = a.resolution;
    }
    if (a.gaussians_per_triangle > 0) {
        spec.gaussians_per_triangle = a.gaussians_per_triangle;
    }

    const SyntheticResult result = make_synthetic_avatar(spec);
    const std::string prefix = out_path(a.out_prefix);
    write_avatar(prefix + ".ply", prefix + ".binding.txt", prefix + ".obj", result.avatar);
    write_labels(prefix + ".truth.txt", result.truth);

    std::ostringstream desc;
    desc << "synth spec=" << a.spec_name << " resolution=" << spec.resolution
         << " gaussians_per_triangle=" << spec.gaussians_per_triangle << " seed=" << spec.seed;
    print_repro("synth", std::to_string(a.seed), desc.str());
    std::cout << "wrote " << result.avatar.size() << " gaussians on "
              << result.avatar.mesh.triangle_count() << " triangles to " << prefix
              << ".{ply,binding.txt,obj,truth.txt}\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string splat, binding, mesh, out, log_csv;
    NetConfig config;
    int table_log2 = 19;
};

int run_train(TrainArgs& a) {
    a.config.hash.table_size = 1u << a.table_log2;
    a.config.validate();
    const Avatar avatar = read_avatar(in_path(a.splat), in_path(a.binding), in_path(a.mesh));

    TrainLog log;
    const DisentangleModel model = train(avatar, a.config, &log);
    write_checkpoint(out_path(a.out), model);

    if (!a.log_csv.empty()) {
        std::ofstream csv(out_path(a.log_csv));
        csv << "step,tau,loss,loss_rec,loss_sparsity,loss_usage\n";
        csv.precision(12);
        for (const TrainStepRecord& r : log.steps) {
            csv << r.step << "," << r.tau << "," << r.loss << "," << r.loss_rec << ","
                << r.loss_sparsity << "," << r.loss_usage << "\n";
        }
    }

    print_repro("train", std::to_string(a.config.seed), describe_net_config(a.config));
    if (!log.steps.empty()) {
        const TrainStepRecord& last = log.steps.back();
        std::cout << "final step " << last.step << ": loss=" << last.loss
                  << " rec=" << last.loss_rec << "\n";
    }
    std::cout << "channel usage:";
    for (std::size_t c = 0; c < log.usage_histogram.size(); ++c) {
        std::cout << " " << c << ":" << log.usage_histogram[c];
    }
    std::cout << "\nusage-indicator: " << log.usage_indicator_final << "\n"
              << "wrote checkpoint " << out_path(a.out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentArgs {
    std::string checkpoint, splat, binding, mesh, out;
};

int run_segment(const SegmentArgs& a) {
    const DisentangleModel model = read_checkpoint(in_path(a.checkpoint));
    const Avatar avatar = read_avatar(in_path(a.splat), in_path(a.binding), in_path(a.mesh));
    const std::vector<int> labels = assign_segments(model, avatar);
    write_labels(out_path(a.out), labels);

    std::vector<std::size_t> counts(static_cast<std::size_t>(model.config.bottleneck_size), 0);
    for (int l : labels) {
        ++counts[static_cast<std::size_t>(l)];
    }
    print_repro("segment", "-", describe_net_config(model.config));
    std::cout << "channel counts:";
    for (std::size_t c = 0; c < counts.size(); ++c) {
        std::cout << " " << c << ":" << counts[c];
    }
    std::cout << "\nwrote labels " << out_path(a.out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterArgs {
    std::string labels, splat, binding, mesh, out;
    double eps = DbscanConfig{}.eps;
    int min_samples = DbscanConfig{}.min_samples;
    bool sweep = false;
    std::vector<double> eps_list;
    std::vector<int> min_samples_list;
};

int run_cluster(const ClusterArgs& a) {
    const Avatar avatar = read_avatar(in_path(a.splat), in_path(a.binding), in_path(a.mesh));
    const std::vector<int> channel_labels = read_labels(in_path(a.labels));

    if (a.sweep) {
        std::vector<double> eps_values = a.eps_list.empty()
                                             ? std::vector<double>{0.001, 0.002, 0.005, 0.01, 0.02}
                                             : a.eps_list;
        std::vector<int> ms_values =
            a.min_samples_list.empty() ? std::vector<int>{50, 100, 150} : a.min_samples_list;

        std::ostringstream desc;
        desc << "cluster sweep eps=" << eps_values.size() << " ms=" << ms_values.size();
        print_repro("cluster", "-", desc.str());

        std::cout << "channel eps min_samples clusters noise_fraction\n";
        for (double eps : eps_values) {
            for (int ms : ms_values) {
                const Segmentation seg =
                    refine_segments(avatar, channel_labels, DbscanConfig{eps, ms});
                std::vector<int> cluster_count(static_cast<std::size_t>(seg.channel_count), 0);
                std::vector<std::size_t> member_count(static_cast<std::size_t>(seg.channel_count), 0);
                std::vector<std::size_t> noise_count(static_cast<std::size_t>(seg.channel_count), 0);
                for (const SegmentRecord& r : seg.records) {
                    const std::size_t c = static_cast<std::size_t>(r.channel);
                    ++member_count[c];
                    if (r.cluster == kNoiseLabel) {
                        ++noise_count[c];
                    } else {
                        cluster_count[c] = std::max(cluster_count[c], r.cluster + 1);
                    }
                }
                for (int c = 0; c < seg.channel_count; ++c) {
                    const std::size_t members = member_count[static_cast<std::size_t>(c)];
                    const double noise_fraction =
                        members == 0 ? 0.0
                                     : static_cast<double>(noise_count[static_cast<std::size_t>(c)]) /
                                           static_cast<double>(members);
                    std::cout << c << " " << eps << " " << ms << " "
                              << cluster_count[static_cast<std::size_t>(c)] << " "
                              << noise_fraction << "\n";
                }
            }
        }
        return 0;
    }

    if (a.out.empty()) {
        throw InvalidArgumentError("cluster requires --out unless --sweep is given");
    }
    const DbscanConfig config{a.eps, a.min_samples};
    const Segmentation seg = refine_segments(avatar, channel_labels, config);
    write_segmentation(out_path(a.out), seg);

    std::ostringstream desc;
    desc << "cluster eps=" << a.eps << " min_samples=" << a.min_samples;
    print_repro("cluster", "-", desc.str());
    std::cout << "wrote segmentation " << out_path(a.out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
    std::string segmentation, splat, binding, mesh, tag = "part", out;
    int channel = 0;
    int cluster = 0;
    double eps = DbscanConfig{}.eps;
    int min_samples = DbscanConfig{}.min_samples;
};

int run_extract(const ExtractArgs& a) {
    const Avatar avatar = read_avatar(in_path(a.splat), in_path(a.binding), in_path(a.mesh));
    const Segmentation seg = read_segmentation(in_path(a.segmentation));
    SegmentArchive archive = extract_segment(avatar, seg, a.channel, a.cluster, a.tag);
    archive.dbscan = DbscanConfig{a.eps, a.min_samples}; // provenance only
    write_segment(out_path(a.out), archive);

    std::ostringstream desc;
    desc << "extract channel=" << a.channel << " cluster=" << a.cluster << " tag=" << a.tag;
    print_repro("extract", "-", desc.str());
    std::cout << "wrote archive with " << archive.gaussians.size() << " gaussians on "
              << archive.triangles.size() << " triangles to " << out_path(a.out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// swap

struct SwapArgs {
    std::string target_splat, target_binding, target_mesh, part, out_prefix;
    std::string strategy = "replacement";
    int n = 0;
    double o = 1.0;
};

int run_swap(const SwapArgs& a) {
    const Avatar target =
        read_avatar(in_path(a.target_splat), in_path(a.target_binding), in_path(a.target_mesh));
    const SegmentArchive part = read_segment(in_path(a.part));

    MergeConfig config;
    config.strategy =
        a.strategy == "overlap" ? MergeStrategy::Overlap : MergeStrategy::Replacement;
    config.n = a.n;
    config.o = a.o;
    const Avatar merged = merge_segment(target, part, config);

    const std::string prefix = out_path(a.out_prefix);
    write_avatar(prefix + ".ply", prefix + ".binding.txt", prefix + ".obj", merged);

    std::ostringstream desc;
    desc << "swap strategy=" << a.strategy << " n=" << a.n << " o=" << a.o;
    print_repro("swap", "-", desc.str());
    std::cout << "merged " << target.size() << " target + " << part.gaussians.size()
              << " part gaussians -> " << merged.size() << "\n"
              << "wrote " << prefix << ".{ply,binding.txt,obj}\n";
    return 0;
}

// ---------------------------------------------------------------------------
// render / render-segments

struct RenderArgs {
    std::string splat, binding, mesh, out, labels;
    int width = 512;
    int height = 512;
    int sh_degree = 3;
    double fov = 40.0;
    std::vector<double> cam_pos, cam_target, cam_up;
};

Camera camera_from_args(const RenderArgs& a, const Avatar& avatar) {
    Camera cam = auto_camera(avatar, a.width, a.height);
    cam.fov_y_deg = a.fov;
    if (!a.cam_pos.empty()) {
        cam.position = Eigen::Vector3d(a.cam_pos[0], a.cam_pos[1], a.cam_pos[2]);
    }
    if (!a.cam_target.empty()) {
        cam.target = Eigen::Vector3d(a.cam_target[0], a.cam_target[1], a.cam_target[2]);
    }
    if (!a.cam_up.empty()) {
        cam.up = Eigen::Vector3d(a.cam_up[0], a.cam_up[1], a.cam_up[2]);
    }
    return cam;
}

int run_render(const RenderArgs& a, bool segments) {
    const Avatar avatar = read_avatar(in_path(a.splat), in_path(a.binding), in_path(a.mesh));
    const Camera cam = camera_from_args(a, avatar);

    RenderStats stats;
    Image img;
    if (segments) {
        const std::vector<int> labels = read_any_labels(in_path(a.labels));
        img = render_segments(avatar, labels, cam, &stats);
    } else {
        img = render(avatar, cam, a.sh_degree, &stats);
    }
    write_ppm(out_path(a.out), img);

    std::ostringstream desc;
    desc << "render width=" << a.width << " height=" << a.height << " sh=" << a.sh_degree
         << " segments=" << segments;
    print_repro(segments ? "render-segments" : "render", "-", desc.str());
    std::cout << "drawn=" << stats.drawn << " behind_camera=" << stats.behind_camera
              << " offscreen=" << stats.offscreen << "\n"
              << "wrote " << out_path(a.out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
    std::string predicted, truth;
};

int run_metrics(const MetricsArgs& a) {
    const std::vector<int> predicted = read_any_labels(in_path(a.predicted));
    const std::vector<int> truth = read_labels(in_path(a.truth));
    const ClusterMetrics m = segmentation_metrics(predicted, truth);

    print_repro("metrics", "-", "metrics");
    std::cout << "metric value\n";
    std::cout << "ARI " << m.ari << "\n";
    std::cout << "NMI " << m.nmi << "\n";
    std::cout << "purity " << m.purity << "\n";
    return 0;
}

const char* error_category(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return "parse";
    if (dynamic_cast<const TopologyMismatchError*>(&e)) return "topology-mismatch";
    if (dynamic_cast<const DegenerateTriangleError*>(&e)) return "degenerate-triangle";
    if (dynamic_cast<const NumericalOverflowError*>(&e)) return "numerical-overflow";
    if (dynamic_cast<const ZeroScaleError*>(&e)) return "zero-scale";
    if (dynamic_cast<const InvalidArgumentError*>(&e)) return "invalid-argument";
    if (dynamic_cast<const Error*>(&e)) return "error";
    return "internal";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"splatpart: segmentation and part swapping for splat avatars"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic avatar");
    synth->add_option("--spec", synth_args.spec_name, "spec name")
        ->check(CLI::IsMember({"three-band", "disjoint"}));
    synth->add_option("--out-prefix", synth_args.out_prefix, "output path prefix")->required();
    synth->add_option("--seed", synth_args.seed, "generation seed");
    synth->add_option("--resolution", synth_args.resolution, "mesh resolution override");
    synth->add_option("--gaussians-per-triangle", synth_args.gaussians_per_triangle,
                      "sampling density override");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the segmentation model");
    train_cmd->add_option("--splat", train_args.splat, "input splat PLY")->required();
    train_cmd->add_option("--binding", train_args.binding, "binding sidecar")->required();
    train_cmd->add_option("--mesh", train_args.mesh, "mesh OBJ")->required();
    train_cmd->add_option("--out", train_args.out, "output checkpoint")->required();
    train_cmd->add_option("-k,--bottleneck", train_args.config.bottleneck_size,
                          "bottleneck channels");
    train_cmd->add_option("--hidden", train_args.config.hidden_dim, "hidden width");
    train_cmd
        ->add_option_function<std::string>(
            "--encoder",
            [&](const std::string& v) {
                train_args.config.encoder_kind =
                    v == "xyz" ? EncoderKind::RawXyz : EncoderKind::HashGrid;
            },
            "position encoder")
        ->check(CLI::IsMember({"hashgrid", "xyz"}));
    train_cmd
        ->add_option_function<std::string>(
            "--activation",
            [&](const std::string& v) {
                train_args.config.activation_kind = v == "softmax"
                                                        ? ActivationKind::PlainSoftmax
                                                        : ActivationKind::GumbelSoftmax;
            },
            "bottleneck activation")
        ->check(CLI::IsMember({"gumbel", "softmax"}));
    train_cmd->add_option("--lambda-usage", train_args.config.lambda_usage, "usage loss weight");
    train_cmd->add_option("--lambda-sparsity", train_args.config.lambda_sparsity,
                          "sparsity loss weight");
    train_cmd->add_option("--tau-start", train_args.config.temperature.tau_start,
                          "initial temperature");
    train_cmd->add_option("--tau-end", train_args.config.temperature.tau_end,
                          "final temperature");
    train_cmd->add_option("--anneal-steps", train_args.config.temperature.anneal_steps,
                          "temperature anneal steps (<=0: half of total)");
    train_cmd->add_option("--steps", train_args.config.total_steps, "training steps");
    train_cmd->add_option("--batch", train_args.config.batch_size, "batch size");
    train_cmd->add_option("--seed", train_args.config.seed, "training seed");
    train_cmd->add_option("--lr", train_args.config.learning_rate, "mlp learning rate");
    train_cmd->add_option("--lr-hash", train_args.config.learning_rate_hash,
                          "embedding learning rate");
    train_cmd->add_option("--levels", train_args.config.hash.levels, "hash grid levels");
    train_cmd->add_option("--features", train_args.config.hash.features_per_level,
                          "features per level");
    train_cmd->add_option("--table-log2", train_args.table_log2, "log2 of hash table size")
        ->check(CLI::Range(4, 24));
    train_cmd->add_option("--base-resolution", train_args.config.hash.base_resolution,
                          "coarsest lattice resolution");
    train_cmd->add_option("--growth", train_args.config.hash.growth_factor,
                          "per-level growth factor (<=0: derive for finest=2048)");
    train_cmd->add_option("--log", train_args.log_csv, "write per-step loss CSV");

    SegmentArgs segment_args;
    auto* segment_cmd = app.add_subcommand("segment", "assign channel labels with a checkpoint");
    segment_cmd->add_option("--checkpoint", segment_args.checkpoint, "trained checkpoint")
        ->required();
    segment_cmd->add_option("--splat", segment_args.splat, "input splat PLY")->required();
    segment_cmd->add_option("--binding", segment_args.binding, "binding sidecar")->required();
    segment_cmd->add_option("--mesh", segment_args.mesh, "mesh OBJ")->required();
    segment_cmd->add_option("--out", segment_args.out, "output labels file")->required();

    ClusterArgs cluster_args;
    auto* cluster_cmd = app.add_subcommand("cluster", "refine channels into spatial clusters");
    cluster_cmd->add_option("--labels", cluster_args.labels, "channel labels file")->required();
    cluster_cmd->add_option("--splat", cluster_args.splat, "input splat PLY")->required();
    cluster_cmd->add_option("--binding", cluster_args.binding, "binding sidecar")->required();
    cluster_cmd->add_option("--mesh", cluster_args.mesh, "mesh OBJ")->required();
    cluster_cmd->add_option("--out", cluster_args.out, "output segmentation table");
    cluster_cmd->add_option("--eps", cluster_args.eps, "neighborhood radius");
    cluster_cmd->add_option("--min-samples", cluster_args.min_samples, "core point threshold");
    cluster_cmd->add_flag("--sweep", cluster_args.sweep,
                          "print a cluster-count/noise table over a parameter grid");
    cluster_cmd->add_option("--eps-list", cluster_args.eps_list, "sweep eps values");
    cluster_cmd->add_option("--min-samples-list", cluster_args.min_samples_list,
                            "sweep min_samples values");

    ExtractArgs extract_args;
    auto* extract_cmd = app.add_subcommand("extract", "store one cluster as a part archive");
    extract_cmd->add_option("--segmentation", extract_args.segmentation, "segmentation table")
        ->required();
    extract_cmd->add_option("--splat", extract_args.splat, "input splat PLY")->required();
    extract_cmd->add_option("--binding", extract_args.binding, "binding sidecar")->required();
    extract_cmd->add_option("--mesh", extract_args.mesh, "mesh OBJ")->required();
    extract_cmd->add_option("--channel", extract_args.channel, "channel id")->required();
    extract_cmd->add_option("--cluster", extract_args.cluster, "cluster id")->required();
    extract_cmd->add_option("--tag", extract_args.tag, "semantic tag");
    extract_cmd->add_option("--out", extract_args.out, "output archive path")->required();
    extract_cmd->add_option("--eps", extract_args.eps, "provenance: dbscan eps");
    extract_cmd->add_option("--min-samples", extract_args.min_samples,
                            "provenance: dbscan min_samples");

    SwapArgs swap_args;
    auto* swap_cmd = app.add_subcommand("swap", "attach a part archive to a target avatar");
    swap_cmd->add_option("--target-splat", swap_args.target_splat, "target splat PLY")
        ->required();
    swap_cmd->add_option("--target-binding", swap_args.target_binding, "target binding sidecar")
        ->required();
    swap_cmd->add_option("--target-mesh", swap_args.target_mesh, "target mesh OBJ")->required();
    swap_cmd->add_option("--part", swap_args.part, "part archive")->required();
    swap_cmd->add_option("--strategy", swap_args.strategy, "merge strategy")
        ->check(CLI::IsMember({"replacement", "overlap"}));
    swap_cmd->add_option("--n", swap_args.n, "replacement threshold");
    swap_cmd->add_option("--o", swap_args.o, "overlap opacity factor")
        ->check(CLI::Range(0.0, 1.0));
    swap_cmd->add_option("--out-prefix", swap_args.out_prefix, "output path prefix")->required();

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand("render", "rasterize an avatar preview");
    RenderArgs render_seg_args;
    auto* render_seg_cmd =
        app.add_subcommand("render-segments", "rasterize a categorical segment overlay");
    for (auto [cmd, args] : {std::pair{render_cmd, &render_args},
                             std::pair{render_seg_cmd, &render_seg_args}}) {
        cmd->add_option("--splat", args->splat, "input splat PLY")->required();
        cmd->add_option("--binding", args->binding, "binding sidecar")->required();
        cmd->add_option("--mesh", args->mesh, "mesh OBJ")->required();
        cmd->add_option("--out", args->out, "output PPM image")->required();
        cmd->add_option("--width", args->width, "image width");
        cmd->add_option("--height", args->height, "image height");
        cmd->add_option("--fov", args->fov, "vertical field of view, degrees");
        cmd->add_option("--cam-pos", args->cam_pos, "camera position")->expected(3);
        cmd->add_option("--cam-target", args->cam_target, "camera look-at")->expected(3);
        cmd->add_option("--cam-up", args->cam_up, "camera up vector")->expected(3);
    }
    render_cmd->add_option("--sh-degree", render_args.sh_degree, "sh evaluation degree")
        ->check(CLI::Range(0, 3));
    render_seg_cmd
        ->add_option("--labels", render_seg_args.labels, "labels or segmentation file")
        ->required();

    MetricsArgs metrics_args;
    auto* metrics_cmd = app.add_subcommand("metrics", "score predicted labels against truth");
    metrics_cmd->add_option("--predicted", metrics_args.predicted,
                            "predicted labels or segmentation file")
        ->required();
    metrics_cmd->add_option("--truth", metrics_args.truth, "ground-truth labels file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return run_synth(synth_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (segment_cmd->parsed()) return run_segment(segment_args);
        if (cluster_cmd->parsed()) return run_cluster(cluster_args);
        if (extract_cmd->parsed()) return run_extract(extract_args);
        if (swap_cmd->parsed()) return run_swap(swap_args);
        if (render_cmd->parsed()) return run_render(render_args, false);
        if (render_seg_cmd->parsed()) return run_render(render_seg_args, true);
        if (metrics_cmd->parsed()) return run_metrics(metrics_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << error_category(e) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
