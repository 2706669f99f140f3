#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "cvdcm/mnl.hpp"
#include "cvdcm/scenes.hpp"
#include "test_support.hpp"

using namespace cvdcm;
using namespace cvdcm::test;

namespace {

ImageManifest manifest_for(const std::vector<Image>& images) {
    ImageManifest m;
    for (const auto& img : images) {
        ImageMeta meta;
        meta.image_id = img.image_id;
        meta.path = img.image_id + ".png";
        meta.month = img.month;
        meta.municipality = "M0";
        meta.density = img.density;
        meta.ground_truth = img.ground_truth;
        m.images.push_back(meta);
    }
    return m;
}

}  // namespace

TEST_CASE("a pure green scene renders green everywhere") {
    scenes::SceneParams scene;
    scene.green_frac = 1.0;
    scene.month = 6;
    const Image img = scenes::gen_image(scene, 32, 1);
    REQUIRE(img.ground_truth.has_value());
    CHECK(img.ground_truth->green == 1.0);
    CHECK(img.ground_truth->road == 0.0);
    // generous palette check: green channel dominates every pixel
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            CHECK(img.at(y, x, 1) > img.at(y, x, 0));
            CHECK(img.at(y, x, 1) > img.at(y, x, 2));
        }
}

TEST_CASE("generation is deterministic in (scene, seed)") {
    Rng rng(2);
    const scenes::SceneParams scene = scenes::random_scene(rng);
    const Image a = scenes::gen_image(scene, 32, 77);
    const Image b = scenes::gen_image(scene, 32, 77);
    const Image c = scenes::gen_image(scene, 32, 78);
    CHECK(a.pixels == b.pixels);
    CHECK(a.density == b.density);
    CHECK(a.pixels != c.pixels);
}

TEST_CASE("realized fractions sit close to nominal and sum to one") {
    Rng rng(3);
    for (int rep = 0; rep < 25; ++rep) {
        scenes::SceneParams scene = scenes::random_scene(rng);
        scene.clutter = 0;  // clutter legitimately displaces the bands
        const Image img = scenes::gen_image(scene, 32, derive_seed(4, rep));
        const auto& gt = *img.ground_truth;
        CHECK(std::abs(gt.green - scene.green_frac) < 0.02);
        CHECK(std::abs(gt.built - scene.built_frac) < 0.02);
        CHECK(std::abs(gt.sky - scene.sky_frac) < 0.02);
        CHECK(std::abs(gt.water - scene.water_frac) < 0.02);
        CHECK(gt.green + gt.built + gt.sky + gt.water + gt.road + gt.clutter ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("ground truth is exact under clutter") {
    scenes::SceneParams scene;
    scene.green_frac = 0.5;
    scene.built_frac = 0.3;
    scene.clutter = 3;
    const Image img = scenes::gen_image(scene, 32, 11);
    const auto& gt = *img.ground_truth;
    // clutter took pixels from somewhere; everything still accounts to 1
    CHECK(gt.clutter > 0.0);
    CHECK(gt.green + gt.built + gt.sky + gt.water + gt.road + gt.clutter ==
          doctest::Approx(1.0));

    // density proxy is built fraction plus small noise
    REQUIRE(img.density.has_value());
    CHECK(std::abs(*img.density - gt.built) < 0.25);
}

TEST_CASE("true image utility is the alpha dot product") {
    SceneFractions gt;
    CHECK(scenes::true_image_utility(gt, {0, 0, 0, 0}) == 0.0);
    gt.green = 0.5;
    CHECK(scenes::true_image_utility(gt, {2, 0, 0, 0}) == doctest::Approx(1.0));

    SceneFractions a{0.2, 0.1, 0.0, 0.0, 0.7, 0.0};
    SceneFractions b{0.0, 0.3, 0.4, 0.1, 0.2, 0.0};
    SceneFractions ab{0.2, 0.4, 0.4, 0.1, 0.9, 0.0};
    const std::array<double, 4> alpha{1.5, -2.0, 0.5, 1.0};
    CHECK(scenes::true_image_utility(ab, alpha) ==
          doctest::Approx(scenes::true_image_utility(a, alpha) +
                          scenes::true_image_utility(b, alpha)));
}

TEST_CASE("choice simulation follows the logit probabilities") {
    // two images with known ground truth
    std::vector<Image> images;
    for (int i = 0; i < 2; ++i) {
        scenes::SceneParams scene;
        scene.green_frac = i == 0 ? 0.8 : 0.1;
        scene.built_frac = i == 0 ? 0.1 : 0.8;
        scene.month = 12;
        Image img = scenes::gen_image(scene, 16, 100 + i);
        img.image_id = "img_" + std::to_string(i);
        images.push_back(std::move(img));
    }
    const auto manifest = manifest_for(images);

    SUBCASE("an enormous cost coefficient forces the cheaper alternative") {
        std::vector<ChoiceTask> designs;
        for (int i = 0; i < 200; ++i) {
            ChoiceTask t = make_task(-75, 5, 75, -5, -1);
            t.alts[0].image_id = "img_0";
            t.alts[1].image_id = "img_1";
            designs.push_back(t);
        }
        scenes::TrueModel model;
        model.beta_hhc = -40.0;  // overwhelming
        const Dataset data = scenes::simulate_choices(designs, model, manifest, 5);
        for (const auto& t : data.tasks) CHECK(t.chosen == 0);
    }

    SUBCASE("equal utilities behave like a fair coin") {
        std::vector<ChoiceTask> designs;
        for (int i = 0; i < 10000; ++i) {
            ChoiceTask t = make_task(0, 0, 0, 0, -1);
            t.alts[0].image_id = "img_0";
            t.alts[1].image_id = "img_0";  // same image both sides
            designs.push_back(t);
        }
        scenes::TrueModel model;
        model.alpha = {1.0, -1.0, 0.5, 0.0};  // cancels across equal images
        const Dataset data = scenes::simulate_choices(designs, model, manifest, 6);
        int first = 0;
        for (const auto& t : data.tasks) first += t.chosen == 0 ? 1 : 0;
        const double sigma = std::sqrt(10000.0 * 0.25);
        CHECK(std::abs(first - 5000.0) < 3.0 * sigma);
    }

    SUBCASE("empirical shares match logit probabilities per utility gap") {
        // vary the cost delta to sweep the utility difference
        scenes::TrueModel model;
        model.beta_hhc = -0.86;
        model.beta_tti = -0.21;
        model.alpha = {2.0, -2.0, 0.0, 0.0};
        const int reps = 50000;
        std::map<int, std::pair<int, int>> bucket;  // hhc delta -> (n, chose 0)
        std::vector<ChoiceTask> designs;
        const int deltas[] = {-150, -75, 75, 150};
        for (int i = 0; i < reps; ++i) {
            const int d = deltas[i % 4];
            ChoiceTask t = make_task(d, -5, 0, 5, -1);
            t.alts[0].image_id = "img_0";
            t.alts[1].image_id = "img_1";
            designs.push_back(t);
        }
        const Dataset data = scenes::simulate_choices(designs, model, manifest, 7);
        for (const auto& t : data.tasks) {
            auto& [n, k] = bucket[t.alts[0].hhc];
            n += 1;
            k += t.chosen == 0 ? 1 : 0;
        }
        ModelParams p;
        p.beta_hhc = model.beta_hhc;
        p.beta_tti = model.beta_tti;
        for (const auto& [delta, nk] : bucket) {
            Alternative a{delta, -5, "", 12}, b{0, 5, "", 12};
            const double v0 = mnl::utility_numeric(p, a) +
                              scenes::true_image_utility(*images[0].ground_truth, model.alpha);
            const double v1 = mnl::utility_numeric(p, b) +
                              scenes::true_image_utility(*images[1].ground_truth, model.alpha);
            const double prob = 1.0 / (1.0 + std::exp(v1 - v0));
            const double share = static_cast<double>(nk.second) / nk.first;
            const double sigma = std::sqrt(prob * (1.0 - prob) / nk.first);
            CHECK(std::abs(share - prob) < 4.0 * sigma);
        }
    }

    SUBCASE("missing ground truth is an error") {
        auto broken = manifest;
        broken.images[0].ground_truth.reset();
        std::vector<ChoiceTask> designs;
        ChoiceTask t = make_task(0, 0, 75, -5, -1);
        t.alts[0].image_id = "img_0";
        t.alts[1].image_id = "img_1";
        designs.push_back(t);
        scenes::TrueModel model;
        CHECK_THROWS(scenes::simulate_choices(designs, model, broken, 8));
    }
}

TEST_CASE("seasonal tint desaturates winter greens") {
    scenes::SceneParams scene;
    scene.green_frac = 1.0;
    scene.month = 1;
    scenes::GenOptions tinted;
    tinted.seasonal_tint = true;
    const Image plain = scenes::gen_image(scene, 16, 9);
    const Image winter = scenes::gen_image(scene, 16, 9, tinted);

    double plain_green = 0.0, winter_green = 0.0;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            plain_green += plain.at(y, x, 1);
            winter_green += winter.at(y, x, 1);
        }
    CHECK(winter_green < plain_green);

    // summer months are untouched by the flag
    scene.month = 6;
    const Image summer_a = scenes::gen_image(scene, 16, 9);
    const Image summer_b = scenes::gen_image(scene, 16, 9, tinted);
    CHECK(summer_a.pixels == summer_b.pixels);
}
