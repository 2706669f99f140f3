#pragma once

#include <map>
#include <string>
#include <vector>

#include "cvdcm/trainer.hpp"
#include "cvdcm/types.hpp"

// Derived quantities and reports: utility-difference decomposition, image
// ranking, willingness to pay between extremes, density-quantile summaries
// and the model-comparison table.
namespace cvdcm::analysis {

struct UtilityDecomposition {
    std::string task_id;
    double dv_total = 0.0;  // right minus left alternative
    double dv_numeric = 0.0;
    double dv_image = 0.0;
};

std::vector<UtilityDecomposition> decompose(const ModelParams& params,
                                            const vision::ExtractorConfig& cfg,
                                            const vision::ExtractorWeights& weights,
                                            const Dataset& data,
                                            const trainer::ImageStore& images);

struct RankedImage {
    std::string image_id;
    double utility = 0.0;
};

struct Ranking {
    std::vector<RankedImage> top;     // best first
    std::vector<RankedImage> bottom;  // worst first
};

// Sorted by utility, ties broken by image_id. k is clipped to the image count.
Ranking rank_images(const std::map<std::string, double>& utilities, int k);
Ranking rank_images(const ModelParams& params, const vision::ExtractorConfig& cfg,
                    const vision::ExtractorWeights& weights, const trainer::ImageStore& images,
                    int k);

// (delta_u / |beta_hhc|) * cost_divisor: utility converted back to euros/month
double wtp_extremes(double delta_u, double beta_hhc, double cost_divisor = 225.0);

struct DensitySummary {
    int count = 0;
    double density_lo = 0.0;
    double density_hi = 0.0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;  // of the utilities
};

// Images sorted by density and cut into q near-equal groups (earliest
// groups absorb the remainder); box statistics of utility per group.
std::vector<DensitySummary> density_quantiles(
    const std::vector<std::pair<double, double>>& density_and_utility, int q = 6);

// Same, pulling densities from the store; throws when an image has none.
std::vector<DensitySummary> density_quantiles(const std::map<std::string, double>& utilities,
                                              const trainer::ImageStore& images, int q = 6);

// ---- model comparison -------------------------------------------------

struct ModelReport {
    std::string name;
    std::string model_type;  // "lin-add RUM-MNL" or "CV-DCM"
    std::string n_parameters;
    int train_n = 0;
    int test_n = 0;
    double train_ll = 0.0, train_rho2 = 0.0, train_ce = 0.0;
    double test_ll = 0.0, test_rho2 = 0.0, test_ce = 0.0;
    struct Param {
        std::string name;
        double est = 0.0, se = 0.0, p = 1.0;
        bool fixed = false;
    };
    std::vector<Param> params;
    bool has_vtt = false;
    double vtt = 0.0, vtt_se = 0.0, vtt_p = 1.0;
};

ModelReport report_from_estimation(const std::string& name, const EstimationResult& fit,
                                   const trainer::EvalMetrics& test, int test_n);

// Aligned text table / JSON with the same numbers; throws when the reports
// were not computed on identical train/test datasets.
std::string compare_models_text(const std::vector<ModelReport>& reports);
std::string compare_models_json(const std::vector<ModelReport>& reports);
std::string compare_models_markdown(const std::vector<ModelReport>& reports);

// formatting helpers shared by the table emitters (and their tests)
std::string fmt_thousands(double v);           // -5954.3 -> "-5,954"
std::string fmt_fixed(double v, int decimals);

// ---- report files ------------------------------------------------------

std::string image_utilities_csv(const std::map<std::string, double>& utilities,
                                const trainer::ImageStore& images);
std::string decomposition_csv(const std::vector<UtilityDecomposition>& rows);
std::string density_summary_json(const std::vector<DensitySummary>& groups);

}  // namespace cvdcm::analysis
