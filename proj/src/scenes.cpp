#include "cvdcm/scenes.hpp"

#include <algorithm>
#include <unordered_map>
#include <cmath>
#include <iostream>

#include "cvdcm/mnl.hpp"

namespace cvdcm::scenes {

namespace {

enum Category : int { kSky = 0, kBuilt, kGreen, kWater, kRoad, kClutter, kNumCategories };

struct Color {
    double r, g, b;
};

constexpr Color kBase[kNumCategories] = {
    {0.53, 0.80, 0.92},  // sky
    {0.55, 0.53, 0.50},  // built
    {0.20, 0.55, 0.18},  // green
    {0.23, 0.42, 0.85},  // water
    {0.30, 0.30, 0.32},  // road
    {0.60, 0.45, 0.35},  // clutter base, re-tinted per rectangle
};

constexpr int kDefaultPatchSize = 8;

bool is_winter(int month) { return month <= 2 || month >= 11; }

float quantize8(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<float>(std::lround(c * 255.0) / 255.0);
}

}  // namespace

Image gen_image(const SceneParams& scene, int resolution, std::uint64_t seed,
                const GenOptions& opts) {
    check_month(scene.month);
    const double fr[4] = {scene.sky_frac, scene.built_frac, scene.green_frac, scene.water_frac};
    double total = 0.0;
    for (double f : fr) {
        if (f < 0.0 || f > 1.0)
            throw std::invalid_argument("scene fractions must lie in [0,1]");
        total += f;
    }
    if (total > 1.0 + 1e-12)
        throw std::invalid_argument("scene fractions must sum to at most 1");
    if (resolution <= 0) throw std::invalid_argument("resolution must be positive");
    if (resolution % kDefaultPatchSize != 0)
        std::cerr << "warning: resolution " << resolution
                  << " is not divisible by the default patch size " << kDefaultPatchSize
                  << "\n";

    const int n_px = resolution * resolution;
    std::vector<int> category(n_px, kRoad);
    // cumulative pixel boundaries keep every realized fraction within 1/n_px
    // of nominal (the boundary rows are partial)
    double cum = 0.0;
    int start = 0;
    const int order[4] = {kSky, kBuilt, kGreen, kWater};
    const double order_frac[4] = {scene.sky_frac, scene.built_frac, scene.green_frac,
                                  scene.water_frac};
    for (int i = 0; i < 4; ++i) {
        cum += order_frac[i];
        const int end = static_cast<int>(std::lround(cum * n_px));
        for (int p = start; p < std::min(end, n_px); ++p) category[p] = order[i];
        start = std::max(start, std::min(end, n_px));
    }

    Rng rng(derive_seed(seed, /*stream=*/0x7363656eu));

    // clutter rectangles overwrite the bands
    std::vector<Color> rect_color;
    std::vector<int> rect_id(n_px, -1);
    for (int r = 0; r < scene.clutter; ++r) {
        const int w = 2 + static_cast<int>(rng.uniform_int(std::max(1, resolution / 4)));
        const int h = 2 + static_cast<int>(rng.uniform_int(std::max(1, resolution / 4)));
        const int x0 = static_cast<int>(rng.uniform_int(std::max(1, resolution - w)));
        const int y0 = static_cast<int>(rng.uniform_int(std::max(1, resolution - h)));
        Color c{0.3 + 0.5 * rng.uniform01(), 0.3 + 0.5 * rng.uniform01(),
                0.3 + 0.5 * rng.uniform01()};
        rect_color.push_back(c);
        for (int y = y0; y < std::min(y0 + h, resolution); ++y)
            for (int x = x0; x < std::min(x0 + w, resolution); ++x) {
                category[y * resolution + x] = kClutter;
                rect_id[y * resolution + x] = r;
            }
    }

    Color palette[kNumCategories];
    std::copy(std::begin(kBase), std::end(kBase), palette);
    if (opts.seasonal_tint && is_winter(scene.month)) {
        // leaves are gone: pull the green band toward bare-branch brown
        const Color bare{0.45, 0.40, 0.28};
        palette[kGreen] = {0.3 * palette[kGreen].r + 0.7 * bare.r,
                           0.3 * palette[kGreen].g + 0.7 * bare.g,
                           0.3 * palette[kGreen].b + 0.7 * bare.b};
    }

    Image img;
    img.height = resolution;
    img.width = resolution;
    img.month = scene.month;
    img.pixels.resize(static_cast<std::size_t>(n_px) * 3);
    int counts[kNumCategories] = {0};
    for (int p = 0; p < n_px; ++p) {
        const int cat = category[p];
        counts[cat] += 1;
        Color c = (cat == kClutter) ? rect_color[rect_id[p]] : palette[cat];
        img.pixels[3 * p + 0] = quantize8(c.r + rng.uniform(-0.05, 0.05));
        img.pixels[3 * p + 1] = quantize8(c.g + rng.uniform(-0.05, 0.05));
        img.pixels[3 * p + 2] = quantize8(c.b + rng.uniform(-0.05, 0.05));
    }

    SceneFractions gt;
    gt.sky = static_cast<double>(counts[kSky]) / n_px;
    gt.built = static_cast<double>(counts[kBuilt]) / n_px;
    gt.green = static_cast<double>(counts[kGreen]) / n_px;
    gt.water = static_cast<double>(counts[kWater]) / n_px;
    gt.road = static_cast<double>(counts[kRoad]) / n_px;
    gt.clutter = static_cast<double>(counts[kClutter]) / n_px;
    img.ground_truth = gt;
    img.density = gt.built + rng.normal(0.0, 0.05);
    return img;
}

double true_image_utility(const SceneFractions& gt, const std::array<double, 4>& alpha) {
    return alpha[0] * gt.green + alpha[1] * gt.built + alpha[2] * gt.sky + alpha[3] * gt.water;
}

SceneParams random_scene(Rng& rng, int clutter_max) {
    // powered exponentials normalized over five bands give occasional
    // near-degenerate scenes, which helps the feature extractor
    double x[5];
    double sum = 0.0;
    for (double& v : x) {
        double u = rng.uniform01();
        while (u <= 0.0) u = rng.uniform01();
        v = std::pow(-std::log(u), 1.5);
        sum += v;
    }
    SceneParams scene;
    scene.sky_frac = x[0] / sum;
    scene.built_frac = x[1] / sum;
    scene.green_frac = x[2] / sum;
    scene.water_frac = x[3] / sum;  // x[4] is the road share
    scene.clutter = static_cast<int>(rng.uniform_int(clutter_max + 1));
    scene.month = 1 + static_cast<int>(rng.uniform_int(12));
    return scene;
}

Dataset simulate_choices(const std::vector<ChoiceTask>& designs, const TrueModel& model,
                         const ImageManifest& manifest, std::uint64_t seed) {
    ModelParams numeric;
    numeric.beta_hhc = model.beta_hhc;
    numeric.beta_tti = model.beta_tti;
    numeric.beta_month = model.beta_month;
    numeric.scaling = model.scaling;

    std::unordered_map<std::string, const ImageMeta*> index;
    index.reserve(manifest.images.size());
    for (const auto& m : manifest.images) index[m.image_id] = &m;

    Rng rng(derive_seed(seed, /*stream=*/0x73696dull));
    Dataset out;
    out.tasks.reserve(designs.size());
    for (const ChoiceTask& design : designs) {
        Eigen::Vector2d v;
        for (int j = 0; j < 2; ++j) {
            const Alternative& alt = design.alts[j];
            double u = mnl::utility_numeric(numeric, alt);
            auto found = index.find(alt.image_id);
            const ImageMeta* meta = found == index.end() ? nullptr : found->second;
            if (!meta)
                throw std::runtime_error("simulate_choices: image '" + alt.image_id +
                                         "' not in manifest");
            if (!meta->ground_truth)
                throw std::runtime_error("simulate_choices: image '" + alt.image_id +
                                         "' carries no ground truth");
            u += true_image_utility(*meta->ground_truth, model.alpha);
            v(j) = u;
        }
        const Eigen::VectorXd p = mnl::logit_probs(v);
        ChoiceTask task = design;
        task.chosen = rng.uniform01() < p(0) ? 0 : 1;
        out.tasks.push_back(std::move(task));
    }
    return out;
}

}  // namespace cvdcm::scenes
