#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvdcm {

// Months are 1..12; December (12) is the normalization reference whose
// constant is fixed to zero and never estimated.
inline constexpr int kDecember = 12;

struct Scaling {
    double cost_divisor = 225.0;
    double time_divisor = 15.0;
};

// One alternative of a binary choice task. hhc/tti are pivoted deltas
// (euros per month / minutes); month is the acquisition month of the
// attached image. image_id is empty for image-free datasets.
struct Alternative {
    int hhc = 0;
    int tti = 0;
    std::string image_id;
    int month = kDecember;
};

struct ChoiceTask {
    std::string respondent_id;
    std::string task_id;
    std::array<Alternative, 2> alts;
    int chosen = -1;  // 0 or 1; -1 = unanswered (design not yet simulated)
};

struct Dataset {
    std::vector<ChoiceTask> tasks;
    int n_obs() const { return static_cast<int>(tasks.size()); }
};

struct ModelParams {
    double beta_hhc = 0.0;
    double beta_tti = 0.0;
    std::array<double, 12> beta_month{};  // index m-1 for month m; [11] == 0
    std::vector<double> beta_k;           // feature-map weights; empty for Models 1-2
    Scaling scaling;
};

struct FitMetrics {
    double rho2 = 0.0;
    double cross_entropy = 0.0;
};

struct EstimationResult {
    ModelParams params;
    std::vector<std::string> param_names;  // free parameters, in vector order
    std::vector<double> estimates;
    std::vector<double> std_errors;
    std::vector<double> p_values;
    std::vector<std::vector<double>> covariance;
    double loglik = 0.0;
    double rho2 = 0.0;
    double cross_entropy = 0.0;
    double vtt = 0.0;
    double vtt_se = 0.0;
    double vtt_p = 1.0;
    bool converged = false;
    int iterations = 0;
    int n_obs = 0;
};

// Estimation failures that map to CLI exit code 4
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Train/test image overlap; CLI exit code 5
struct LeakageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inseparable dataset in the image-disjoint split; CLI exit code 3
struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check_month(int month) {
    if (month < 1 || month > 12)
        throw std::invalid_argument("month out of range 1..12: " + std::to_string(month));
}

}  // namespace cvdcm
