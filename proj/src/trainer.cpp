#include "cvdcm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "cvdcm/rng.hpp"

namespace cvdcm::trainer {

namespace {

constexpr int kNumericParams = 13;  // hhc, tti, eleven free months

// Model-2 numeric feature vector of an alternative
Eigen::VectorXd numeric_features(const Alternative& alt, const Scaling& s) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(kNumericParams);
    auto [sh, st] = mnl::scale_attributes(alt, s);
    x(0) = sh;
    x(1) = st;
    if (alt.month != kDecember) x(2 + alt.month - 1) = 1.0;
    return x;
}

Eigen::VectorXd beta_k_vector(const ModelParams& p) {
    return Eigen::Map<const Eigen::VectorXd>(p.beta_k.data(),
                                             static_cast<Eigen::Index>(p.beta_k.size()));
}

const Image& task_image(const ImageStore& images, const ChoiceTask& task, int j) {
    if (task.alts[j].image_id.empty())
        throw std::invalid_argument("task '" + task.task_id + "' has no image on alternative " +
                                    std::to_string(j));
    return images.require(task.alts[j].image_id);
}

std::unordered_set<std::string> dataset_image_ids(const Dataset& data) {
    std::unordered_set<std::string> ids;
    for (const auto& task : data.tasks)
        for (const auto& alt : task.alts)
            if (!alt.image_id.empty()) ids.insert(alt.image_id);
    return ids;
}

}  // namespace

void TrainerConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("trainer: batch_size must be >= 1");
    if (l2_gamma < 0.0) throw std::invalid_argument("trainer: l2_gamma must be >= 0");
    if (epochs < 0) throw std::invalid_argument("trainer: epochs must be >= 0");
    if (validation_fraction < 0.0 || validation_fraction >= 0.5)
        throw std::invalid_argument("trainer: validation_fraction must lie in [0, 0.5)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("trainer: learning_rate must be > 0");
}

void ImageStore::add(Image img) {
    const std::string id = img.image_id;
    if (id.empty()) throw std::invalid_argument("ImageStore: image without an id");
    images_[id] = std::move(img);
}

ImageStore ImageStore::from_manifest(const ImageManifest& manifest) {
    ImageStore store;
    for (const auto& meta : manifest.images) store.add(load_image(manifest, meta));
    return store;
}

const Image& ImageStore::require(const std::string& id) const {
    auto it = images_.find(id);
    if (it == images_.end())
        throw std::runtime_error("unresolvable image_id '" + id + "'");
    return it->second;
}

std::vector<std::string> ImageStore::ids_sorted() const {
    std::vector<std::string> ids;
    ids.reserve(images_.size());
    for (const auto& [id, _] : images_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double loss(const std::vector<ChoiceTask>& batch, const ModelParams& params,
            const vision::ExtractorConfig& cfg, const vision::ExtractorWeights& weights,
            double gamma, const ImageStore& images, const FlipMask* flips) {
    if (batch.empty()) throw std::invalid_argument("loss: empty batch");
    const Eigen::VectorXd bk = beta_k_vector(params);
    double nll = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const ChoiceTask& task = batch[n];
        if (task.chosen != 0 && task.chosen != 1)
            throw std::invalid_argument("loss: task '" + task.task_id + "' has no choice");
        Eigen::Vector2d v;
        for (int j = 0; j < 2; ++j) {
            const Image* img = &task_image(images, task, j);
            Image flipped;
            if (flips && (*flips)[n][j]) {
                flipped = hflip(*img);
                img = &flipped;
            }
            const Eigen::VectorXd z = vision::forward(cfg, weights, *img);
            v(j) = mnl::utility_numeric(params, task.alts[j]) + bk.dot(z);
        }
        const double vmax = v.maxCoeff();
        const Eigen::Vector2d e = (v.array() - vmax).exp();
        nll -= v(task.chosen) - vmax - std::log(e.sum());
    }
    return nll / static_cast<double>(batch.size()) + gamma * vision::squared_norm(weights);
}

JointGradient joint_gradient(const std::vector<ChoiceTask>& batch, const ModelParams& params,
                             const vision::ExtractorConfig& cfg,
                             const vision::ExtractorWeights& weights, double gamma,
                             const ImageStore& images, const FlipMask* flips) {
    if (batch.empty()) throw std::invalid_argument("joint_gradient: empty batch");
    const Eigen::VectorXd bk = beta_k_vector(params);
    const int kdim = static_cast<int>(bk.size());
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    // validate and resolve images up front; the parallel region below must
    // not throw
    std::vector<std::array<const Image*, 2>> task_images(batch.size());
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const ChoiceTask& task = batch[n];
        if (task.chosen != 0 && task.chosen != 1)
            throw std::invalid_argument("joint_gradient: task '" + task.task_id +
                                        "' has no choice");
        for (int j = 0; j < 2; ++j) task_images[n][j] = &task_image(images, task, j);
    }

    // per-task contributions accumulated into slots so the reduction order
    // is fixed regardless of thread count
    std::vector<Eigen::VectorXd> beta_slots(batch.size());
    std::vector<vision::ExtractorWeights> weight_slots(batch.size());
    const std::ptrdiff_t n_tasks = static_cast<std::ptrdiff_t>(batch.size());
    std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t n = 0; n < n_tasks; ++n) {
        try {
            const ChoiceTask& task = batch[n];
            Eigen::Vector2d v;
            std::array<Eigen::VectorXd, 2> z;
            std::array<vision::ForwardCache, 2> caches;
            std::array<Image, 2> flipped_storage;
            for (int j = 0; j < 2; ++j) {
                const Image* img = task_images[n][j];
                if (flips && (*flips)[n][j]) {
                    flipped_storage[j] = hflip(*img);
                    img = &flipped_storage[j];
                }
                z[j] = vision::forward(cfg, weights, *img, &caches[j]);
                v(j) = mnl::utility_numeric(params, task.alts[j]) + bk.dot(z[j]);
            }
            const Eigen::Vector2d probs = mnl::logit_probs(v);

            Eigen::VectorXd gbeta = Eigen::VectorXd::Zero(kNumericParams + kdim);
            vision::ExtractorWeights gw = vision::zeros_like(cfg);
            for (int j = 0; j < 2; ++j) {
                const double resid = ((task.chosen == j) ? 1.0 : 0.0) - probs(j);
                gbeta.head(kNumericParams) -=
                    inv_b * resid * numeric_features(task.alts[j], params.scaling);
                if (kdim > 0) {
                    gbeta.tail(kdim) -= inv_b * resid * z[j];
                    const Eigen::VectorXd upstream = (-inv_b * resid) * bk;
                    vision::add_scaled(gw,
                                       vision::backward(cfg, weights, caches[j], upstream),
                                       1.0);
                }
            }
            beta_slots[n] = std::move(gbeta);
            weight_slots[n] = std::move(gw);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    JointGradient g;
    g.beta = Eigen::VectorXd::Zero(kNumericParams + kdim);
    g.weights = vision::zeros_like(cfg);
    for (std::size_t n = 0; n < batch.size(); ++n) {
        g.beta += beta_slots[n];
        vision::add_scaled(g.weights, weight_slots[n], 1.0);
    }
    vision::add_scaled(g.weights, weights, 2.0 * gamma);
    return g;
}

std::map<std::string, double> image_utilities(const ModelParams& params,
                                              const vision::ExtractorConfig& cfg,
                                              const vision::ExtractorWeights& weights,
                                              const ImageStore& images) {
    const Eigen::VectorXd bk = beta_k_vector(params);
    const std::vector<std::string> ids = images.ids_sorted();
    std::vector<const Image*> imgs(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) imgs[i] = &images.require(ids[i]);
    std::vector<double> utils(ids.size(), 0.0);
    const std::ptrdiff_t n_imgs = static_cast<std::ptrdiff_t>(ids.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n_imgs; ++i) {
        try {
            const Eigen::VectorXd z = vision::forward(cfg, weights, *imgs[i]);
            utils[i] = bk.size() > 0 ? bk.dot(z) : 0.0;
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = utils[i];
    return out;
}

mnl::ImageUtils dataset_image_utils(const Dataset& data,
                                    const std::map<std::string, double>& utils) {
    mnl::ImageUtils out(2 * data.tasks.size(), 0.0);
    for (std::size_t n = 0; n < data.tasks.size(); ++n)
        for (int j = 0; j < 2; ++j) {
            const std::string& id = data.tasks[n].alts[j].image_id;
            if (id.empty()) continue;
            auto it = utils.find(id);
            if (it == utils.end())
                throw std::runtime_error("unresolvable image_id '" + id + "'");
            out[2 * n + j] = it->second;
        }
    return out;
}

EvalMetrics evaluate(const Dataset& data, const ModelParams& params,
                     const vision::ExtractorConfig& cfg,
                     const vision::ExtractorWeights& weights, const ImageStore& images) {
    // score only the images this dataset references
    ImageStore used;
    for (const std::string& id : dataset_image_ids(data)) used.add(images.require(id));
    const auto utils = image_utilities(params, cfg, weights, used);
    const auto iu = dataset_image_utils(data, utils);
    EvalMetrics m;
    m.loglik = mnl::log_likelihood(data, params, &iu);
    const FitMetrics fm = mnl::fit_metrics(m.loglik, data.n_obs(), 2);
    m.rho2 = fm.rho2;
    m.cross_entropy = fm.cross_entropy;
    return m;
}

TrainResult train(const Dataset& train_set, const Dataset& test_set, const ImageStore& images,
                  const vision::ExtractorConfig& ecfg, const TrainerConfig& tcfg) {
    tcfg.validate();
    ecfg.validate();
    if (train_set.tasks.empty() || test_set.tasks.empty())
        throw std::invalid_argument("train: empty train or test set");

    // leakage guard: the split must have kept the image sets disjoint
    const auto train_ids = dataset_image_ids(train_set);
    const auto test_ids = dataset_image_ids(test_set);
    for (const auto& id : test_ids)
        if (train_ids.count(id))
            throw LeakageError("data leakage: image '" + id +
                               "' appears in both train and test sets");
    for (const auto& id : train_ids) images.require(id);
    for (const auto& id : test_ids) images.require(id);

    // numeric warm start from Model 2; feature-map weights from zero
    EstimationResult warm = mnl::estimate_mnl(train_set, mnl::Model::Model2);
    ModelParams params = warm.params;
    params.beta_k.assign(ecfg.feature_dim, 0.0);

    vision::ExtractorWeights weights =
        vision::init_weights(ecfg, derive_seed(tcfg.seed, /*stream=*/1));

    // seeded validation carve-out from the train set
    std::vector<std::size_t> order(train_set.tasks.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(tcfg.seed, /*stream=*/2));
    split_rng.shuffle(order);
    const std::size_t n_val =
        static_cast<std::size_t>(tcfg.validation_fraction * train_set.tasks.size());
    Dataset val_set, fit_set;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_val ? val_set : fit_set).tasks.push_back(train_set.tasks[order[i]]);
    const bool use_val = !val_set.tasks.empty();

    ModelParams best_params = params;
    vision::ExtractorWeights best_weights = weights;
    double best_val_ll = -std::numeric_limits<double>::infinity();
    TrainResult result;
    result.warm_start = warm;
    result.log.best_epoch = 0;

    Eigen::VectorXd beta_velocity =
        Eigen::VectorXd::Zero(kNumericParams + ecfg.feature_dim);
    vision::ExtractorWeights weight_velocity = vision::zeros_like(ecfg);

    std::vector<std::size_t> fit_order(fit_set.tasks.size());
    std::iota(fit_order.begin(), fit_order.end(), 0);

    for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng epoch_rng(derive_seed(tcfg.seed, /*stream=*/3, /*counter=*/epoch));
        epoch_rng.shuffle(fit_order);

        double loss_sum = 0.0;
        int n_batches = 0;
        for (std::size_t at = 0; at < fit_order.size(); at += tcfg.batch_size) {
            const std::size_t end =
                std::min(at + static_cast<std::size_t>(tcfg.batch_size), fit_order.size());
            std::vector<ChoiceTask> batch;
            batch.reserve(end - at);
            for (std::size_t i = at; i < end; ++i)
                batch.push_back(fit_set.tasks[fit_order[i]]);

            FlipMask flips(batch.size(), {false, false});
            if (tcfg.augment_hflip)
                for (auto& f : flips) f = {epoch_rng.bernoulli(0.5), epoch_rng.bernoulli(0.5)};

            loss_sum += loss(batch, params, ecfg, weights, tcfg.l2_gamma, images, &flips);
            JointGradient g =
                joint_gradient(batch, params, ecfg, weights, tcfg.l2_gamma, images, &flips);
            ++n_batches;

            beta_velocity = tcfg.momentum * beta_velocity - tcfg.learning_rate * g.beta;
            params.beta_hhc += beta_velocity(0);
            params.beta_tti += beta_velocity(1);
            for (int m = 0; m < 11; ++m) params.beta_month[m] += beta_velocity(2 + m);
            for (int k = 0; k < ecfg.feature_dim; ++k)
                params.beta_k[k] += beta_velocity(kNumericParams + k);

            vision::scale_weights(weight_velocity, tcfg.momentum);
            vision::add_scaled(weight_velocity, g.weights, -tcfg.learning_rate);
            vision::add_scaled(weights, weight_velocity, 1.0);
            vision::quantize_to_float32(weights);

            if (!std::isfinite(loss_sum))
                throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(n_batches));
        }

        EpochLog el;
        el.train_loss = loss_sum / std::max(1, n_batches);
        el.train_ll = fit_set.tasks.empty()
                          ? 0.0
                          : evaluate(fit_set, params, ecfg, weights, images).loglik;
        el.val_ll = use_val ? evaluate(val_set, params, ecfg, weights, images).loglik : 0.0;
        const double tracked = use_val ? el.val_ll : el.train_ll;
        if (tracked > best_val_ll) {
            best_val_ll = tracked;
            best_params = params;
            best_weights = weights;
            result.log.best_epoch = epoch;
        }
        el.epoch_time_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.epochs.push_back(el);
    }

    result.params = best_params;
    result.weights = best_weights;
    result.test_metrics = evaluate(test_set, result.params, ecfg, result.weights, images);
    result.log.test_ll = result.test_metrics.loglik;
    return result;
}

std::string trainlog_to_json(const TrainLog& log) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : log.epochs)
        epochs.push_back({{"train_loss", e.train_loss},
                          {"train_ll", e.train_ll},
                          {"val_ll", e.val_ll},
                          {"epoch_time_sec", e.epoch_time_sec}});
    nlohmann::json j{{"epochs", epochs},
                     {"best_epoch", log.best_epoch},
                     {"test_ll", log.test_ll}};
    return j.dump(2);
}

}  // namespace cvdcm::trainer
