#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cvdcm/extractor.hpp"
#include "cvdcm/image.hpp"
#include "cvdcm/mnl.hpp"
#include "cvdcm/types.hpp"

// Joint optimization of taste parameters and extractor weights under the
// cross-entropy + selective-L2 loss, with the extractor shared across the
// two alternatives of every task.
namespace cvdcm::trainer {

struct TrainerConfig {
    int batch_size = 20;
    double learning_rate = 1e-3;
    double momentum = 0.0;
    double l2_gamma = 0.1;  // applies to extractor weights only, never to betas
    int epochs = 50;
    std::uint64_t seed = 0;
    bool augment_hflip = true;
    double validation_fraction = 0.1;  // carved from the train set
    void validate() const;
};

struct EpochLog {
    double train_loss = 0.0;  // mean over batches, L2 term included
    double train_ll = 0.0;    // post-epoch, no augmentation
    double val_ll = 0.0;
    double epoch_time_sec = 0.0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    int best_epoch = 0;  // 1-based; 0 = warm start retained
    double test_ll = 0.0;
};

// Decoded images keyed by id; pixels loaded once
class ImageStore {
public:
    void add(Image img);
    static ImageStore from_manifest(const ImageManifest& manifest);
    const Image& require(const std::string& id) const;
    bool contains(const std::string& id) const { return images_.count(id) > 0; }
    std::size_t size() const { return images_.size(); }
    std::vector<std::string> ids_sorted() const;

private:
    std::unordered_map<std::string, Image> images_;
};

// per-image flip mask used by the training loop; absent = no augmentation
using FlipMask = std::vector<std::array<bool, 2>>;

double loss(const std::vector<ChoiceTask>& batch, const ModelParams& params,
            const vision::ExtractorConfig& cfg, const vision::ExtractorWeights& weights,
            double gamma, const ImageStore& images, const FlipMask* flips = nullptr);

// Gradient of the batch loss. beta layout: [hhc, tti, jan..nov, beta_k...].
struct JointGradient {
    Eigen::VectorXd beta;
    vision::ExtractorWeights weights;
};

JointGradient joint_gradient(const std::vector<ChoiceTask>& batch, const ModelParams& params,
                             const vision::ExtractorConfig& cfg,
                             const vision::ExtractorWeights& weights, double gamma,
                             const ImageStore& images, const FlipMask* flips = nullptr);

struct EvalMetrics {
    double loglik = 0.0;
    double rho2 = 0.0;
    double cross_entropy = 0.0;
};

EvalMetrics evaluate(const Dataset& data, const ModelParams& params,
                     const vision::ExtractorConfig& cfg,
                     const vision::ExtractorWeights& weights, const ImageStore& images);

// u(S) = sum_k beta_k * phi(S|w)_k for every image in the store; month
// constants are deliberately not included.
std::map<std::string, double> image_utilities(const ModelParams& params,
                                              const vision::ExtractorConfig& cfg,
                                              const vision::ExtractorWeights& weights,
                                              const ImageStore& images);

// per-alternative image utilities in mnl::ImageUtils layout
mnl::ImageUtils dataset_image_utils(const Dataset& data,
                                    const std::map<std::string, double>& utils);

struct TrainResult {
    ModelParams params;
    vision::ExtractorWeights weights;
    TrainLog log;
    EvalMetrics test_metrics;
    EstimationResult warm_start;  // the Model 2 fit used to initialize beta
};

// Epoch loop: seeded shuffle, per-image horizontal flips, SGD; beta warm
// started from Model 2, beta_k from zero; best weights by validation LL;
// final evaluation on test without augmentation. Throws LeakageError when
// the train and test image sets intersect.
TrainResult train(const Dataset& train_set, const Dataset& test_set, const ImageStore& images,
                  const vision::ExtractorConfig& ecfg, const TrainerConfig& tcfg);

std::string trainlog_to_json(const TrainLog& log);

}  // namespace cvdcm::trainer
