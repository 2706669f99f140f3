#include "cvdcm/mnl.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace cvdcm::mnl {

namespace {

const char* kMonthNames[12] = {"jan", "feb", "mar", "apr", "may", "jun",
                               "jul", "aug", "sep", "oct", "nov", "dec"};

// free-parameter feature vector of one alternative: [scaled_hhc, scaled_tti]
// for Model 1, plus the eleven Jan..Nov indicators for Model 2
Eigen::VectorXd features(const Alternative& alt, const Scaling& s, Model model) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_free_params(model));
    auto [sh, st] = scale_attributes(alt, s);
    x(0) = sh;
    x(1) = st;
    if (model == Model::Model2 && alt.month != kDecember) {
        x(2 + alt.month - 1) = 1.0;
    }
    return x;
}

ModelParams params_from_vector(const Eigen::VectorXd& theta, Model model, const Scaling& s) {
    ModelParams p;
    p.scaling = s;
    p.beta_hhc = theta(0);
    p.beta_tti = theta(1);
    if (model == Model::Model2) {
        for (int m = 0; m < 11; ++m) p.beta_month[m] = theta(2 + m);
    }
    return p;
}

void check_task(const ChoiceTask& task) {
    if (task.chosen != 0 && task.chosen != 1)
        throw std::invalid_argument("task " + task.task_id + " has no chosen alternative");
    check_month(task.alts[0].month);
    check_month(task.alts[1].month);
}

void check_image_utils(const Dataset& data, const ImageUtils* iu) {
    if (iu && iu->size() != 2 * data.tasks.size())
        throw std::invalid_argument("image_utils must hold one value per alternative occurrence");
}

// log P_chosen and probabilities of one task
struct TaskEval {
    Eigen::Vector2d probs;
    double log_p_chosen;
};

TaskEval eval_task(const ChoiceTask& task, const ModelParams& params,
                   const ImageUtils* iu, std::size_t task_index) {
    Eigen::Vector2d v;
    for (int j = 0; j < 2; ++j) {
        v(j) = utility_numeric(params, task.alts[j]);
        if (iu) v(j) += (*iu)[2 * task_index + j];
    }
    const double vmax = v.maxCoeff();
    const Eigen::Vector2d e = (v.array() - vmax).exp();
    const double denom = e.sum();
    TaskEval out;
    out.probs = e / denom;
    out.log_p_chosen = v(task.chosen) - vmax - std::log(denom);
    return out;
}

}  // namespace

std::vector<std::string> param_names(Model m) {
    std::vector<std::string> names = {"beta_hhc", "beta_tti"};
    if (m == Model::Model2) {
        for (int i = 0; i < 11; ++i) names.push_back(std::string("beta_") + kMonthNames[i]);
    }
    return names;
}

std::pair<double, double> scale_attributes(const Alternative& alt, const Scaling& s) {
    if (s.cost_divisor <= 0.0 || s.time_divisor <= 0.0)
        throw std::invalid_argument("scaling divisors must be positive");
    // levels beyond the divisors never come out of the design generator;
    // accept them with a one-time warning
    if (std::abs(alt.hhc) > s.cost_divisor || std::abs(alt.tti) > s.time_divisor) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "warning: attribute level outside the scaling range (hhc "
                      << alt.hhc << ", tti " << alt.tti << "); scaled values leave [-1,1]\n";
    }
    return {alt.hhc / s.cost_divisor, alt.tti / s.time_divisor};
}

double utility_numeric(const ModelParams& params, const Alternative& alt) {
    check_month(alt.month);
    const double bm = params.beta_month[alt.month - 1];
    if (!std::isfinite(params.beta_hhc) || !std::isfinite(params.beta_tti) || !std::isfinite(bm))
        throw std::invalid_argument("non-finite utility parameter");
    auto [sh, st] = scale_attributes(alt, params.scaling);
    return params.beta_hhc * sh + params.beta_tti * st + bm;
}

Eigen::VectorXd logit_probs(const Eigen::VectorXd& v) {
    if (v.size() == 0) throw std::invalid_argument("logit_probs: empty utility vector");
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i))) throw std::invalid_argument("logit_probs: non-finite utility");
    const double vmax = v.maxCoeff();
    Eigen::VectorXd e = (v.array() - vmax).exp();
    return e / e.sum();
}

double log_likelihood(const Dataset& data, const ModelParams& params, const ImageUtils* iu) {
    if (data.tasks.empty()) throw std::invalid_argument("log_likelihood: empty dataset");
    check_image_utils(data, iu);
    double ll = 0.0;
    for (std::size_t n = 0; n < data.tasks.size(); ++n) {
        check_task(data.tasks[n]);
        ll += eval_task(data.tasks[n], params, iu, n).log_p_chosen;
    }
    return ll;
}

FitMetrics fit_metrics(double loglik, int n, int j) {
    if (n <= 0) throw std::invalid_argument("fit_metrics: n must be positive");
    if (j < 2) throw std::invalid_argument("fit_metrics: need at least two alternatives");
    if (loglik > 0.0) throw std::invalid_argument("fit_metrics: log-likelihood must be <= 0");
    const double ll0 = n * std::log(1.0 / j);
    return {1.0 - loglik / ll0, -loglik / n};
}

Eigen::VectorXd grad_loglik(const Dataset& data, const ModelParams& params, Model model,
                            const ImageUtils* iu) {
    if (data.tasks.empty()) throw std::invalid_argument("grad_loglik: empty dataset");
    check_image_utils(data, iu);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_free_params(model));
    for (std::size_t n = 0; n < data.tasks.size(); ++n) {
        const ChoiceTask& task = data.tasks[n];
        check_task(task);
        const TaskEval ev = eval_task(task, params, iu, n);
        for (int j = 0; j < 2; ++j) {
            const double y = (task.chosen == j) ? 1.0 : 0.0;
            g += (y - ev.probs(j)) * features(task.alts[j], params.scaling, model);
        }
    }
    return g;
}

Eigen::MatrixXd hessian_loglik(const Dataset& data, const ModelParams& params, Model model,
                               const ImageUtils* iu) {
    if (data.tasks.empty()) throw std::invalid_argument("hessian_loglik: empty dataset");
    check_image_utils(data, iu);
    const int p = n_free_params(model);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t n = 0; n < data.tasks.size(); ++n) {
        const ChoiceTask& task = data.tasks[n];
        const TaskEval ev = eval_task(task, params, iu, n);
        // H_n = (sum_j P_j x_j)(.)^T - sum_j P_j x_j x_j^T
        Eigen::VectorXd xbar = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd xxt = Eigen::MatrixXd::Zero(p, p);
        for (int j = 0; j < 2; ++j) {
            const Eigen::VectorXd x = features(task.alts[j], params.scaling, model);
            xbar += ev.probs(j) * x;
            xxt += ev.probs(j) * x * x.transpose();
        }
        h += xbar * xbar.transpose() - xxt;
    }
    return 0.5 * (h + h.transpose());
}

namespace {

// Inverse of the negative Hessian; throws naming the collinear parameters
// when the information matrix is singular.
Eigen::MatrixXd invert_information(const Eigen::MatrixXd& hessian,
                                   const std::vector<std::string>& names) {
    const Eigen::MatrixXd info = -hessian;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    lu.setThreshold(1e-10);
    if (lu.rank() < info.rows()) {
        // kernel directions point at the parameters that cannot be identified
        Eigen::MatrixXd ker = lu.kernel();
        std::ostringstream msg;
        msg << "singular Hessian; collinear parameters:";
        for (Eigen::Index i = 0; i < info.rows(); ++i) {
            if (ker.row(i).cwiseAbs().maxCoeff() > 1e-6) msg << " " << names[i];
        }
        throw EstimationError(msg.str());
    }
    return lu.inverse();
}

}  // namespace

EstimationResult estimate_mnl(const Dataset& data, Model model, const EstimateOptions& opts,
                              const ModelParams* start) {
    if (data.tasks.empty()) throw std::invalid_argument("estimate_mnl: empty dataset");
    const int p = n_free_params(model);
    const auto names = param_names(model);
    const Scaling scaling = start ? start->scaling : Scaling{};

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    if (start) {
        theta(0) = start->beta_hhc;
        theta(1) = start->beta_tti;
        if (model == Model::Model2)
            for (int m = 0; m < 11; ++m) theta(2 + m) = start->beta_month[m];
    }

    ModelParams params = params_from_vector(theta, model, scaling);
    double ll = log_likelihood(data, params);
    bool converged = false;
    int iter = 0;

    for (; iter < opts.max_iterations; ++iter) {
        const Eigen::VectorXd g = grad_loglik(data, params, model);
        if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd h = hessian_loglik(data, params, model);
        Eigen::VectorXd direction;
        {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(-h);
            lu.setThreshold(1e-10);
            if (lu.rank() == p) {
                direction = lu.solve(g);
            } else {
                direction = g;  // gradient ascent fallback
            }
        }
        if (direction.dot(g) <= 0.0) direction = g;

        // inside the quadratic basin the objective improvement sits at the
        // floating-point floor of the likelihood sum; take the plain Newton
        // step instead of asking the line search to resolve it
        if (g.lpNorm<Eigen::Infinity>() < 1e-3) {
            theta += direction;
            params = params_from_vector(theta, model, scaling);
            ll = log_likelihood(data, params);
            if (theta.cwiseAbs().maxCoeff() > opts.separation_threshold)
                throw EstimationError(
                    "no finite MLE: parameter magnitude exceeded " +
                    std::to_string(opts.separation_threshold) +
                    " on scaled features (separated data)");
            continue;
        }

        // line search on the concave log-likelihood: backtrack when the unit
        // step overshoots, expand while the objective keeps improving (on
        // separated data this drives the parameters into the magnitude guard
        // instead of creeping along a vanishing gradient)
        double step = 1.0;
        Eigen::VectorXd theta_new = theta + direction;
        double ll_new = log_likelihood(data, params_from_vector(theta_new, model, scaling));
        if (ll_new > ll) {
            for (int e = 0; e < 60; ++e) {
                const Eigen::VectorXd cand = theta + (2.0 * step) * direction;
                const double ll_cand =
                    log_likelihood(data, params_from_vector(cand, model, scaling));
                if (!(ll_cand > ll_new)) break;
                step *= 2.0;
                theta_new = cand;
                ll_new = ll_cand;
            }
        } else {
            while (step > 1e-12) {
                step *= 0.5;
                theta_new = theta + step * direction;
                ll_new = log_likelihood(data, params_from_vector(theta_new, model, scaling));
                if (ll_new > ll) break;
            }
        }
        if (ll_new <= ll && g.lpNorm<Eigen::Infinity>() >= opts.grad_tol) {
            break;  // no improving step found
        }
        theta = theta_new;
        ll = ll_new;
        params = params_from_vector(theta, model, scaling);
        if (theta.cwiseAbs().maxCoeff() > opts.separation_threshold) {
            throw EstimationError(
                "no finite MLE: parameter magnitude exceeded " +
                std::to_string(opts.separation_threshold) +
                " on scaled features (separated data)");
        }
    }

    // separation that stalls gradient ascent instead of tripping the
    // magnitude guard: the chosen alternative is predicted perfectly, so no
    // finite maximizer exists
    {
        double min_p_chosen = 1.0;
        for (std::size_t n = 0; n < data.tasks.size(); ++n) {
            const TaskEval ev = eval_task(data.tasks[n], params, nullptr, n);
            min_p_chosen = std::min(min_p_chosen, ev.probs(data.tasks[n].chosen));
        }
        if (min_p_chosen > 1.0 - 1e-4)
            throw EstimationError(
                "no finite MLE: every chosen alternative is predicted with probability 1 "
                "(separated data)");
    }

    EstimationResult res;
    res.params = params;
    res.param_names = names;
    res.converged = converged;
    res.iterations = iter;
    res.n_obs = data.n_obs();
    res.loglik = ll;
    const FitMetrics fm = fit_metrics(ll, data.n_obs(), 2);
    res.rho2 = fm.rho2;
    res.cross_entropy = fm.cross_entropy;

    const Eigen::MatrixXd cov = invert_information(hessian_loglik(data, params, model), names);
    res.covariance.assign(p, std::vector<double>(p));
    res.estimates.resize(p);
    res.std_errors.resize(p);
    res.p_values.resize(p);
    for (int i = 0; i < p; ++i) {
        res.estimates[i] = theta(i);
        res.std_errors[i] = std::sqrt(std::max(cov(i, i), 0.0));
        res.p_values[i] = p_value(theta(i), res.std_errors[i]);
        for (int j = 0; j < p; ++j) res.covariance[i][j] = cov(i, j);
    }
    if (params.beta_hhc != 0.0 && params.beta_tti != 0.0) {
        res.vtt = vtt(params);
        Eigen::Matrix2d cov2 = cov.topLeftCorner<2, 2>();
        res.vtt_se = vtt_std_error(params, cov2);
        res.vtt_p = p_value(res.vtt, res.vtt_se);
    } else {
        res.vtt = std::numeric_limits<double>::quiet_NaN();
        res.vtt_se = std::numeric_limits<double>::quiet_NaN();
        res.vtt_p = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

std::vector<double> conditional_std_errors(const Dataset& data, const ModelParams& params,
                                           const ImageUtils& image_utils) {
    const auto names = param_names(Model::Model2);
    const Eigen::MatrixXd h = hessian_loglik(data, params, Model::Model2, &image_utils);
    const Eigen::MatrixXd cov = invert_information(h, names);
    std::vector<double> se(names.size());
    for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(std::max(cov(i, i), 0.0));
    return se;
}

double vtt(const ModelParams& params) {
    if (params.beta_hhc == 0.0) throw std::invalid_argument("vtt: beta_hhc is zero");
    const double unit = params.scaling.cost_divisor / params.scaling.time_divisor;
    return 60.0 * unit * (params.beta_tti / params.beta_hhc);
}

double vtt_std_error(const ModelParams& params, const Eigen::Matrix2d& cov) {
    const double bh = params.beta_hhc;
    const double bt = params.beta_tti;
    if (bh == 0.0 || bt == 0.0) throw std::invalid_argument("vtt_std_error: zero coefficient");
    const double v = vtt(params);
    const double rel = cov(1, 1) / (bt * bt) + cov(0, 0) / (bh * bh) - 2.0 * cov(0, 1) / (bt * bh);
    return std::abs(v) * std::sqrt(std::max(rel, 0.0));
}

double p_value(double est, double se) {
    if (se <= 0.0) return est == 0.0 ? 1.0 : 0.0;
    return std::erfc(std::abs(est / se) / std::sqrt(2.0));
}

}  // namespace cvdcm::mnl
