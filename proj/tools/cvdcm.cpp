// cvdcm: single entry point for the pipeline — design generation, synthetic
// scenes, image-disjoint splitting, MNL estimation, joint training, analysis.
//
// Exit codes: 0 success, 2 bad arguments, 3 inseparable split,
// 4 non-convergence, 5 data-leakage guard.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvdcm/analysis.hpp"
#include "cvdcm/dataset_io.hpp"
#include "cvdcm/design.hpp"
#include "cvdcm/extractor.hpp"
#include "cvdcm/mnl.hpp"
#include "cvdcm/rng.hpp"
#include "cvdcm/scenes.hpp"
#include "cvdcm/split.hpp"
#include "cvdcm/trainer.hpp"
#include "cvdcm/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cvdcm;

namespace {

constexpr const char* kVersion = "cvdcm 0.1.0";

constexpr int kExitBadArgs = 2;
constexpr int kExitInseparable = 3;
constexpr int kExitNoConvergence = 4;
constexpr int kExitLeakage = 5;

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << text;
    }
    fs::rename(tmp, path);
}

// every command drops a manifest next to its outputs so a run can be
// reproduced from the file alone
void write_run_manifest(const fs::path& dir, const std::string& command, const json& config,
                        std::uint64_t seed, const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs,
                        std::chrono::steady_clock::time_point started) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json j{{"command", command}, {"config", config},          {"seed", seed},
           {"inputs", inputs},  {"outputs", outputs},         {"tool_version", kVersion},
           {"wall_time_sec", wall}};
    const fs::path where = dir.empty() ? fs::path(".") : dir;
    fs::create_directories(where);
    write_text_atomic((where / "run_manifest.json").string(), j.dump(2) + "\n");
}

// CVDCM_OUT_DIR provides the default output location when --out is omitted
std::string default_out(const std::string& leaf) {
    const char* base = std::getenv("CVDCM_OUT_DIR");
    if (!base || !*base) return {};
    return (fs::path(base) / leaf).string();
}

void require_out(std::string& out, const std::string& leaf, const char* flag) {
    if (out.empty()) out = default_out(leaf);
    if (out.empty())
        throw CLI::ValidationError(flag, "required (or set CVDCM_OUT_DIR)");
}

struct DesignArgs {
    double tt_band = 15.0;
    int n_respondents = 1;
    int tasks_per_respondent = 15;
    std::string manifest_path;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_design(DesignArgs args) {
    const auto started = std::chrono::steady_clock::now();
    require_out(args.out, "design.jsonl", "--out");
    const ImageManifest manifest = read_manifest_jsonl(args.manifest_path);

    std::vector<std::string> municipalities;
    for (const auto& m : manifest.images)
        if (std::find(municipalities.begin(), municipalities.end(), m.municipality) ==
            municipalities.end())
            municipalities.push_back(m.municipality);
    std::sort(municipalities.begin(), municipalities.end());

    Dataset design_set;
    Rng rng(derive_seed(args.seed, 1));
    for (int r = 0; r < args.n_respondents; ++r) {
        const std::string muni = municipalities[rng.uniform_int(municipalities.size())];
        auto tasks = design::build_respondent_design(args.tt_band, args.tasks_per_respondent,
                                                     manifest, muni,
                                                     derive_seed(args.seed, 2, r));
        for (auto& t : tasks) {
            t.respondent_id = "r" + std::to_string(r);
            t.task_id = t.respondent_id + "_t" + t.task_id;
            design_set.tasks.push_back(std::move(t));
        }
    }
    fs::create_directories(fs::path(args.out).parent_path().empty()
                               ? "."
                               : fs::path(args.out).parent_path());
    write_dataset_jsonl(design_set, args.out);
    std::cout << "wrote " << design_set.n_obs() << " choice tasks to " << args.out << "\n";

    write_run_manifest(fs::path(args.out).parent_path(), "design",
                       json{{"tt_band", args.tt_band},
                            {"n_respondents", args.n_respondents},
                            {"tasks_per_respondent", args.tasks_per_respondent}},
                       args.seed, {args.manifest_path}, {args.out}, started);
    return 0;
}

struct SynthArgs {
    int n_images = 200;
    int resolution = 32;
    std::vector<double> alpha{0.0, 0.0, 0.0, 0.0};
    double beta_hhc = -0.86;
    double beta_tti = -0.21;
    std::vector<double> beta_month;
    int n_respondents = 50;
    int tasks_per_respondent = 15;
    std::string pairing = "pool";
    bool seasonal_tint = false;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth(SynthArgs args) {
    const auto started = std::chrono::steady_clock::now();
    require_out(args.out, "synth", "--out");
    const fs::path outdir(args.out);
    fs::create_directories(outdir / "images");

    const int total_tasks = args.n_respondents * args.tasks_per_respondent;
    const bool fresh = args.pairing == "fresh";
    const int n_images = fresh ? 2 * total_tasks : args.n_images;

    scenes::GenOptions gen_opts;
    gen_opts.seasonal_tint = args.seasonal_tint;

    ImageManifest manifest;
    manifest.base_dir = outdir.string();
    Rng scene_rng(derive_seed(args.seed, 1));
    for (int i = 0; i < n_images; ++i) {
        scenes::SceneParams scene = scenes::random_scene(scene_rng);
        Image img = scenes::gen_image(scene, args.resolution, derive_seed(args.seed, 2, i),
                                      gen_opts);
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "img_%06d", i);
        img.image_id = idbuf;
        const std::string rel = std::string("images/") + idbuf + ".png";
        write_png_rgb8(img, (outdir / rel).string());
        ImageMeta meta;
        meta.image_id = img.image_id;
        meta.path = rel;
        meta.month = img.month;
        meta.municipality = "M" + std::to_string(i % 10);
        meta.density = img.density;
        meta.ground_truth = img.ground_truth;
        manifest.images.push_back(std::move(meta));
    }
    write_manifest_jsonl(manifest, (outdir / "manifest.jsonl").string());

    // designs
    std::vector<ChoiceTask> designs;
    Rng design_rng(derive_seed(args.seed, 3));
    int fresh_cursor = 0;
    const double tt_bands[3] = {15.0, 25.0, 35.0};
    for (int r = 0; r < args.n_respondents; ++r) {
        const double tt = tt_bands[design_rng.uniform_int(3)];
        const std::string muni = "M" + std::to_string(design_rng.uniform_int(10));
        if (!fresh) {
            auto tasks = design::build_respondent_design(tt, args.tasks_per_respondent,
                                                         manifest, muni,
                                                         derive_seed(args.seed, 4, r));
            for (auto& t : tasks) {
                t.respondent_id = "r" + std::to_string(r);
                t.task_id = t.respondent_id + "_t" + t.task_id;
                designs.push_back(std::move(t));
            }
        } else {
            const auto templates = design::enumerate_templates(design::levels_for(tt));
            Rng rng(derive_seed(args.seed, 4, r));
            for (int t = 0; t < args.tasks_per_respondent; ++t) {
                const auto& tpl = templates[rng.uniform_int(templates.size())];
                ChoiceTask task;
                task.respondent_id = "r" + std::to_string(r);
                task.task_id = task.respondent_id + "_t" + std::to_string(t);
                for (int j = 0; j < 2; ++j) {
                    const ImageMeta& meta = manifest.images[fresh_cursor++];
                    auto& alt = task.alts[j];
                    alt.hhc = j == 0 ? tpl.hhc_a : tpl.hhc_b;
                    alt.tti = j == 0 ? tpl.tti_a : tpl.tti_b;
                    alt.image_id = meta.image_id;
                    alt.month = meta.month;
                }
                designs.push_back(std::move(task));
            }
        }
    }

    scenes::TrueModel true_model;
    true_model.beta_hhc = args.beta_hhc;
    true_model.beta_tti = args.beta_tti;
    if (!args.beta_month.empty()) {
        if (args.beta_month.size() != 12 || args.beta_month[11] != 0.0)
            throw CLI::ValidationError("--true-beta-month",
                                       "needs 12 values with the December entry 0");
        for (int m = 0; m < 12; ++m) true_model.beta_month[m] = args.beta_month[m];
    }
    for (int i = 0; i < 4; ++i) true_model.alpha[i] = args.alpha[i];

    const Dataset data =
        scenes::simulate_choices(designs, true_model, manifest, derive_seed(args.seed, 5));
    write_dataset_jsonl(data, (outdir / "dataset.jsonl").string());
    std::cout << "wrote " << n_images << " images and " << data.n_obs()
              << " simulated choice tasks under " << args.out << "\n";

    write_run_manifest(outdir, "synth",
                       json{{"n_images", n_images},
                            {"resolution", args.resolution},
                            {"alpha", args.alpha},
                            {"true_beta_hhc", args.beta_hhc},
                            {"true_beta_tti", args.beta_tti},
                            {"n_respondents", args.n_respondents},
                            {"tasks_per_respondent", args.tasks_per_respondent},
                            {"pairing", args.pairing},
                            {"seasonal_tint", args.seasonal_tint}},
                       args.seed, {},
                       {(outdir / "manifest.jsonl").string(),
                        (outdir / "dataset.jsonl").string()},
                       started);
    return 0;
}

struct SplitArgs {
    std::string data;
    double fraction = 0.8;
    std::uint64_t seed = 0;
    std::string out_train;
    std::string out_test;
};

int cmd_split(SplitArgs args) {
    const auto started = std::chrono::steady_clock::now();
    require_out(args.out_train, "train.jsonl", "--out-train");
    require_out(args.out_test, "test.jsonl", "--out-test");
    const Dataset data = read_dataset_jsonl(args.data);
    const split::SplitResult result = split::split(data, args.fraction, args.seed);
    write_dataset_jsonl(result.train, args.out_train);
    write_dataset_jsonl(result.test, args.out_test);
    const fs::path report_path = fs::path(args.out_train).parent_path() / "split_report.json";
    write_text_atomic(report_path.string(), split::split_report_json(result, args.seed) + "\n");
    std::cout << "train " << result.train.n_obs() << " obs, test " << result.test.n_obs()
              << " obs; achieved fraction " << result.fraction_achieved << "\n";
    write_run_manifest(fs::path(args.out_train).parent_path(), "split",
                       json{{"fraction", args.fraction}}, args.seed, {args.data},
                       {args.out_train, args.out_test, report_path.string()}, started);
    return 0;
}

struct EstimateArgs {
    int model = 1;
    std::string train;
    std::string test;
    std::string out;
};

int cmd_estimate(const EstimateArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    const Dataset train = read_dataset_jsonl(args.train);
    const mnl::Model model = args.model == 1 ? mnl::Model::Model1 : mnl::Model::Model2;
    const EstimationResult fit = mnl::estimate_mnl(train, model);
    if (!fit.converged) {
        std::cerr << "estimation did not converge after " << fit.iterations << " iterations\n";
        return kExitNoConvergence;
    }

    trainer::EvalMetrics test_metrics{};
    int test_n = 0;
    if (!args.test.empty()) {
        const Dataset test = read_dataset_jsonl(args.test);
        test_n = test.n_obs();
        test_metrics.loglik = mnl::log_likelihood(test, fit.params);
        const FitMetrics fm = mnl::fit_metrics(test_metrics.loglik, test_n, 2);
        test_metrics.rho2 = fm.rho2;
        test_metrics.cross_entropy = fm.cross_entropy;
    }

    const auto report = analysis::report_from_estimation(
        "Model " + std::to_string(args.model), fit, test_metrics, test_n);
    const std::string table = analysis::compare_models_text({report});
    std::cout << table;

    if (!args.out.empty()) {
        fs::create_directories(args.out);
        write_text_atomic((fs::path(args.out) / "estimation.json").string(),
                          estimation_to_json(fit) + "\n");
        write_text_atomic((fs::path(args.out) / "estimation.txt").string(), table);
        write_run_manifest(args.out, "estimate", json{{"model", args.model}}, 0,
                           {args.train, args.test},
                           {(fs::path(args.out) / "estimation.json").string()}, started);
    }
    return 0;
}

struct TrainArgs {
    std::string train;
    std::string test;
    std::string images;
    std::string extractor_config;
    trainer::TrainerConfig tcfg;
    std::string out;
};

int cmd_train(TrainArgs args) {
    const auto started = std::chrono::steady_clock::now();
    require_out(args.out, "checkpoint", "--out");
    const Dataset train_set = read_dataset_jsonl(args.train);
    const Dataset test_set = read_dataset_jsonl(args.test);
    const ImageManifest manifest = read_manifest_jsonl(args.images);

    vision::ExtractorConfig ecfg;
    if (!args.extractor_config.empty()) {
        std::ifstream in(args.extractor_config);
        if (!in) throw std::runtime_error("cannot open " + args.extractor_config);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        ecfg = vision::config_from_json(text);
    }

    const trainer::ImageStore images = trainer::ImageStore::from_manifest(manifest);
    const trainer::TrainResult result =
        trainer::train(train_set, test_set, images, ecfg, args.tcfg);

    fs::create_directories(args.out);
    const fs::path outdir(args.out);
    vision::save_weights(ecfg, result.weights, (outdir / "weights.cvw").string());
    write_text_atomic((outdir / "params.json").string(),
                      params_to_json(result.params) + "\n");
    write_text_atomic((outdir / "trainlog.json").string(),
                      trainer::trainlog_to_json(result.log) + "\n");

    // test metrics of the trained model next to the numeric-only warm start
    const double warm_test_ll = mnl::log_likelihood(test_set, result.warm_start.params);
    json metrics{{"test",
                  {{"loglik", result.test_metrics.loglik},
                   {"rho2", result.test_metrics.rho2},
                   {"cross_entropy", result.test_metrics.cross_entropy},
                   {"n", test_set.n_obs()}}},
                 {"warm_start_model2_test_loglik", warm_test_ll},
                 {"best_epoch", result.log.best_epoch}};
    write_text_atomic((outdir / "metrics.json").string(), metrics.dump(2) + "\n");

    std::cout << "trained " << args.tcfg.epochs << " epochs (best epoch "
              << result.log.best_epoch << ")\n"
              << "test LL " << result.test_metrics.loglik << " (Model 2 warm start "
              << warm_test_ll << ")\n";

    write_run_manifest(outdir, "train",
                       json{{"batch_size", args.tcfg.batch_size},
                            {"learning_rate", args.tcfg.learning_rate},
                            {"momentum", args.tcfg.momentum},
                            {"l2_gamma", args.tcfg.l2_gamma},
                            {"epochs", args.tcfg.epochs},
                            {"augment_hflip", args.tcfg.augment_hflip},
                            {"validation_fraction", args.tcfg.validation_fraction},
                            {"extractor", json::parse(vision::config_to_json(ecfg))}},
                       args.tcfg.seed, {args.train, args.test, args.images},
                       {(outdir / "weights.cvw").string(),
                        (outdir / "params.json").string(),
                        (outdir / "trainlog.json").string()},
                       started);
    return 0;
}

struct AnalyzeArgs {
    std::string checkpoint;
    std::string images;
    std::string data;
    int top_k = 20;
    int quantiles = 6;
    std::string out;
};

int cmd_analyze(AnalyzeArgs args) {
    const auto started = std::chrono::steady_clock::now();
    require_out(args.out, "analysis", "--out");
    const fs::path ckpt(args.checkpoint);
    auto [ecfg, weights] = vision::load_weights((ckpt / "weights.cvw").string());
    std::ifstream pin(ckpt / "params.json");
    if (!pin) throw std::runtime_error("cannot open " + (ckpt / "params.json").string());
    std::string ptext((std::istreambuf_iterator<char>(pin)), std::istreambuf_iterator<char>());
    const ModelParams params = params_from_json(ptext);

    const ImageManifest manifest = read_manifest_jsonl(args.images);
    const trainer::ImageStore images = trainer::ImageStore::from_manifest(manifest);
    const auto utilities = trainer::image_utilities(params, ecfg, weights, images);

    int k = args.top_k;
    if (k > static_cast<int>(utilities.size())) {
        std::cerr << "warning: --top-k " << k << " exceeds the image count "
                  << utilities.size() << "; clipping\n";
        k = static_cast<int>(utilities.size());
    }
    const analysis::Ranking ranking = analysis::rank_images(utilities, k);

    double top_mean = 0.0, bottom_mean = 0.0;
    for (const auto& r : ranking.top) top_mean += r.utility / ranking.top.size();
    for (const auto& r : ranking.bottom) bottom_mean += r.utility / ranking.bottom.size();
    const double delta_u = top_mean - bottom_mean;
    const double wtp =
        analysis::wtp_extremes(delta_u, params.beta_hhc, params.scaling.cost_divisor);
    std::cout << "WTP between the mean of the top-" << k << " and bottom-" << k
              << " images: " << analysis::fmt_fixed(wtp, 1) << " eur/month (delta_u "
              << analysis::fmt_fixed(delta_u, 3) << ")\n";

    fs::create_directories(args.out);
    const fs::path outdir(args.out);
    write_text_atomic((outdir / "utilities.csv").string(),
                      analysis::image_utilities_csv(utilities, images));

    json rank_json{{"top", json::array()}, {"bottom", json::array()}};
    std::ostringstream md;
    md << "| rank | top image | utility | bottom image | utility |\n|---|---|---|---|---|\n";
    for (int i = 0; i < k; ++i) {
        rank_json["top"].push_back(
            {{"image_id", ranking.top[i].image_id}, {"utility", ranking.top[i].utility}});
        rank_json["bottom"].push_back(
            {{"image_id", ranking.bottom[i].image_id}, {"utility", ranking.bottom[i].utility}});
        md << "| " << (i + 1) << " | " << ranking.top[i].image_id << " | "
           << analysis::fmt_fixed(ranking.top[i].utility, 3) << " | "
           << ranking.bottom[i].image_id << " | "
           << analysis::fmt_fixed(ranking.bottom[i].utility, 3) << " |\n";
    }
    write_text_atomic((outdir / "ranking.json").string(), rank_json.dump(2) + "\n");
    write_text_atomic((outdir / "ranking.md").string(), md.str());

    std::vector<std::string> outputs{(outdir / "utilities.csv").string(),
                                     (outdir / "ranking.json").string(),
                                     (outdir / "ranking.md").string()};

    // density-quantile summary needs density metadata on every image
    std::size_t with_density = 0;
    for (const auto& [id, u] : utilities)
        if (images.require(id).density) ++with_density;
    if (with_density < utilities.size()) {
        std::cerr << "warning: " << (utilities.size() - with_density)
                  << " image(s) lack density metadata; skipping the density summary\n";
    } else if (static_cast<int>(utilities.size()) >= args.quantiles) {
        const auto groups = analysis::density_quantiles(utilities, images, args.quantiles);
        write_text_atomic((outdir / "density_summary.json").string(),
                          analysis::density_summary_json(groups) + "\n");
        std::ostringstream csv;
        csv << "group,count,density_lo,density_hi,min,q1,median,q3,max\n";
        for (std::size_t g = 0; g < groups.size(); ++g)
            csv << g << ',' << groups[g].count << ',' << groups[g].density_lo << ','
                << groups[g].density_hi << ',' << groups[g].min << ',' << groups[g].q1 << ','
                << groups[g].median << ',' << groups[g].q3 << ',' << groups[g].max << '\n';
        write_text_atomic((outdir / "density_summary.csv").string(), csv.str());
        outputs.push_back((outdir / "density_summary.json").string());
    }

    json wtp_json{{"top_k", k},
                  {"top_mean_utility", top_mean},
                  {"bottom_mean_utility", bottom_mean},
                  {"delta_u", delta_u},
                  {"wtp_eur_per_month", wtp}};
    write_text_atomic((outdir / "wtp.json").string(), wtp_json.dump(2) + "\n");
    outputs.push_back((outdir / "wtp.json").string());

    if (!args.data.empty()) {
        const Dataset data = read_dataset_jsonl(args.data);
        const auto rows = analysis::decompose(params, ecfg, weights, data, images);
        write_text_atomic((outdir / "decomposition.csv").string(),
                          analysis::decomposition_csv(rows));
        outputs.push_back((outdir / "decomposition.csv").string());
    }

    write_run_manifest(outdir, "analyze",
                       json{{"top_k", args.top_k}, {"quantiles", args.quantiles}}, 0,
                       {args.checkpoint, args.images, args.data}, outputs, started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"computer-vision-enriched discrete choice models"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DesignArgs design_args;
    auto* design_cmd = app.add_subcommand("design", "generate pivoted choice tasks");
    design_cmd->add_option("--tt-band", design_args.tt_band,
                           "respondent's current travel time in minutes")
        ->required();
    design_cmd->add_option("--n-respondents", design_args.n_respondents);
    design_cmd->add_option("--tasks-per-respondent", design_args.tasks_per_respondent);
    design_cmd->add_option("--manifest", design_args.manifest_path, "image manifest JSONL")
        ->required();
    design_cmd->add_option("--seed", design_args.seed);
    design_cmd->add_option("--out", design_args.out, "output dataset JSONL");

    SynthArgs synth_args;
    auto* synth_cmd =
        app.add_subcommand("synth", "generate synthetic scenes and simulated choices");
    synth_cmd->add_option("--n-images", synth_args.n_images);
    synth_cmd->add_option("--resolution", synth_args.resolution);
    synth_cmd->add_option("--alpha", synth_args.alpha,
                          "true image-utility weights on green, built, sky, water")
        ->expected(4);
    synth_cmd->add_option("--true-beta-hhc", synth_args.beta_hhc);
    synth_cmd->add_option("--true-beta-tti", synth_args.beta_tti);
    synth_cmd->add_option("--true-beta-month", synth_args.beta_month)->expected(12);
    synth_cmd->add_option("--n-respondents", synth_args.n_respondents);
    synth_cmd->add_option("--tasks-per-respondent", synth_args.tasks_per_respondent);
    synth_cmd->add_option("--pairing", synth_args.pairing, "pool | fresh")
        ->check(CLI::IsMember({"pool", "fresh"}));
    synth_cmd->add_flag("--seasonal-tint", synth_args.seasonal_tint);
    synth_cmd->add_option("--seed", synth_args.seed);
    synth_cmd->add_option("--out", synth_args.out, "output directory");

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "image-disjoint train/test split");
    split_cmd->add_option("--data", split_args.data)->required();
    split_cmd->add_option("--fraction", split_args.fraction)
        ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
    split_cmd->add_option("--seed", split_args.seed);
    split_cmd->add_option("--out-train", split_args.out_train);
    split_cmd->add_option("--out-test", split_args.out_test);

    EstimateArgs est_args;
    auto* est_cmd = app.add_subcommand("estimate", "maximum-likelihood MNL estimation");
    est_cmd->add_option("--model", est_args.model)->check(CLI::IsMember({1, 2}))->required();
    est_cmd->add_option("--train", est_args.train)->required();
    est_cmd->add_option("--test", est_args.test);
    est_cmd->add_option("--out", est_args.out, "output directory");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "joint training of the CV-DCM");
    train_cmd->add_option("--train", train_args.train)->required();
    train_cmd->add_option("--test", train_args.test)->required();
    train_cmd->add_option("--images", train_args.images, "image manifest JSONL")->required();
    train_cmd->add_option("--extractor-config", train_args.extractor_config,
                          "extractor config JSON file");
    train_cmd->add_option("--batch-size", train_args.tcfg.batch_size);
    train_cmd->add_option("--learning-rate", train_args.tcfg.learning_rate);
    train_cmd->add_option("--momentum", train_args.tcfg.momentum);
    train_cmd->add_option("--l2-gamma", train_args.tcfg.l2_gamma);
    train_cmd->add_option("--epochs", train_args.tcfg.epochs);
    train_cmd->add_option("--seed", train_args.tcfg.seed);
    train_cmd->add_flag("--augment-hflip,!--no-augment-hflip", train_args.tcfg.augment_hflip);
    train_cmd->add_option("--validation-fraction", train_args.tcfg.validation_fraction);
    train_cmd->add_option("--out", train_args.out, "checkpoint directory");

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "derived quantities and reports");
    analyze_cmd->add_option("--checkpoint", analyze_args.checkpoint)->required();
    analyze_cmd->add_option("--images", analyze_args.images)->required();
    analyze_cmd->add_option("--data", analyze_args.data, "dataset for the decomposition");
    analyze_cmd->add_option("--top-k", analyze_args.top_k);
    analyze_cmd->add_option("--quantiles", analyze_args.quantiles);
    analyze_cmd->add_option("--out", analyze_args.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadArgs;
    }

    try {
        if (design_cmd->parsed()) return cmd_design(design_args);
        if (synth_cmd->parsed()) return cmd_synth(synth_args);
        if (split_cmd->parsed()) return cmd_split(split_args);
        if (est_cmd->parsed()) return cmd_estimate(est_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (analyze_cmd->parsed()) return cmd_analyze(analyze_args);
    } catch (const design::IneligibleRespondent& e) {
        std::cerr << "error: --tt-band: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const SplitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInseparable;
    } catch (const LeakageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLeakage;
    } catch (const EstimationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
