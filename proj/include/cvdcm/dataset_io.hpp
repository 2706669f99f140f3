#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvdcm/types.hpp"

namespace cvdcm {

// Realized scene composition of a synthetic image, counted from the rendered
// raster (exact, not nominal). Road and clutter absorb the residual.
struct SceneFractions {
    double green = 0.0;
    double built = 0.0;
    double sky = 0.0;
    double water = 0.0;
    double road = 0.0;
    double clutter = 0.0;
};

// One line of the image manifest JSONL
struct ImageMeta {
    std::string image_id;
    std::string path;  // relative to the manifest file
    int month = kDecember;
    std::string municipality;
    std::optional<double> density;
    std::optional<SceneFractions> ground_truth;
};

struct ImageManifest {
    std::vector<ImageMeta> images;
    std::string base_dir;  // directory of the manifest file; resolves paths

    const ImageMeta* find(const std::string& image_id) const;
    std::string resolve_path(const ImageMeta& meta) const;
};

// Dataset JSONL: one ChoiceTask per line,
// {"respondent_id","task_id","alts":[{"hhc","tti","image_id","month"},...],"chosen"}
// "chosen" is absent for unanswered designs; "image_id" for image-free data.
Dataset read_dataset_jsonl(const std::string& path);
void write_dataset_jsonl(const Dataset& data, const std::string& path);

ImageManifest read_manifest_jsonl(const std::string& path);
void write_manifest_jsonl(const ImageManifest& manifest, const std::string& path);

// checkpoint / result serialization
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);
std::string estimation_to_json(const EstimationResult& result);

}  // namespace cvdcm
