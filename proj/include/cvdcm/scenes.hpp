#pragma once

#include <array>
#include <cstdint>

#include "cvdcm/dataset_io.hpp"
#include "cvdcm/image.hpp"
#include "cvdcm/rng.hpp"
#include "cvdcm/types.hpp"

// Procedural streetscape stand-ins with exact pixel-counted ground truth,
// plus logit choice simulation from a known true model.
namespace cvdcm::scenes {

struct SceneParams {
    double green_frac = 0.0;
    double built_frac = 0.0;
    double sky_frac = 0.0;
    double water_frac = 0.0;  // residual after these four is road
    int clutter = 0;          // distractor rectangles painted over the bands
    int month = kDecember;
};

// Data-generating counterpart of the estimated model: numeric tastes,
// month constants (December fixed 0) and the true image utility weights.
struct TrueModel {
    double beta_hhc = 0.0;
    double beta_tti = 0.0;
    std::array<double, 12> beta_month{};
    std::array<double, 4> alpha{};  // weights on (green, built, sky, water)
    Scaling scaling;
};

struct GenOptions {
    // desaturate greens for Nov-Feb so feature maps can absorb the season
    bool seasonal_tint = false;
};

// Deterministic banded raster (sky / built / green / water / road top to
// bottom) with per-pixel color jitter and clutter rectangles. The returned
// image carries ground_truth counted from the rendered raster and a
// density proxy (built fraction plus seeded noise).
Image gen_image(const SceneParams& scene, int resolution, std::uint64_t seed,
                const GenOptions& opts = {});

double true_image_utility(const SceneFractions& gt, const std::array<double, 4>& alpha);

// Seeded random scene composition for synthetic corpora
SceneParams random_scene(Rng& rng, int clutter_max = 4);

// Fills in the chosen alternative of every design task by drawing from the
// logit probabilities implied by the true model. Every referenced image
// must carry ground truth in the manifest.
Dataset simulate_choices(const std::vector<ChoiceTask>& designs, const TrueModel& model,
                         const ImageManifest& manifest, std::uint64_t seed);

}  // namespace cvdcm::scenes
