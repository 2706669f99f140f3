#pragma once

#include <Eigen/Dense>

#include "cvdcm/types.hpp"

// Linear-additive RUM-MNL core: utilities, logit probabilities, likelihood,
// analytic score/Hessian, Newton-Raphson estimation, standard errors, fit
// metrics and the value of travel time.
namespace cvdcm::mnl {

// Which parameters are free. Model1: beta_hhc, beta_tti. Model2: plus the
// eleven month constants (December fixed to zero).
enum class Model { Model1 = 1, Model2 = 2 };

inline int n_free_params(Model m) { return m == Model::Model1 ? 2 : 13; }

std::vector<std::string> param_names(Model m);

// min-max scaled attributes; the same divisors apply to every observation
// regardless of the respondent's travel-time regime.
std::pair<double, double> scale_attributes(const Alternative& alt, const Scaling& s);

// beta_hhc*scaled_hhc + beta_tti*scaled_tti + beta_month[month]
double utility_numeric(const ModelParams& params, const Alternative& alt);

// softmax with max-subtraction; throws on non-finite input
Eigen::VectorXd logit_probs(const Eigen::VectorXd& v);

// Per-alternative-occurrence image utilities (sum_k beta_k z_jk), laid out
// as [task0 alt0, task0 alt1, task1 alt0, ...]; optional everywhere below.
using ImageUtils = std::vector<double>;

double log_likelihood(const Dataset& data, const ModelParams& params,
                      const ImageUtils* image_utils = nullptr);

// rho2 = 1 - LL/LL0 with the equiprobable null LL0 = n*ln(1/j);
// cross_entropy = -LL/n
FitMetrics fit_metrics(double loglik, int n, int j = 2);

// Score of the log-likelihood over the model's free parameters:
// dLL/db_m = sum_n sum_j (y_nj - P_nj) x_njm
Eigen::VectorXd grad_loglik(const Dataset& data, const ModelParams& params, Model model,
                            const ImageUtils* image_utils = nullptr);

// Analytic Hessian of the log-likelihood (negative semidefinite)
Eigen::MatrixXd hessian_loglik(const Dataset& data, const ModelParams& params, Model model,
                               const ImageUtils* image_utils = nullptr);

struct EstimateOptions {
    double grad_tol = 1e-6;           // infinity norm of the score
    int max_iterations = 200;
    double separation_threshold = 50.0;  // |beta| beyond this on scaled features = no finite MLE
};

// Newton-Raphson with analytic Hessian (backtracking line search, gradient
// ascent fallback). Throws EstimationError on separation or a singular
// Hessian (the message names the collinear parameters).
EstimationResult estimate_mnl(const Dataset& data, Model model,
                              const EstimateOptions& opts = {},
                              const ModelParams* start = nullptr);

// Standard errors of the numeric parameters (Model 2 set) with the utility
// derived from the images held fixed at the supplied per-alternative values.
std::vector<double> conditional_std_errors(const Dataset& data, const ModelParams& params,
                                           const ImageUtils& image_utils);

// VTT = 60 * (cost_divisor/time_divisor) * beta_tti/beta_hhc  [euros/hr/month]
double vtt(const ModelParams& params);

// Delta-method standard error of the VTT ratio. cov is the 2x2 covariance
// of (beta_hhc, beta_tti).
double vtt_std_error(const ModelParams& params, const Eigen::Matrix2d& cov);

// two-sided normal p-value for z = est/se
double p_value(double est, double se);

}  // namespace cvdcm::mnl
