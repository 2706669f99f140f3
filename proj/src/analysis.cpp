#include "cvdcm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace cvdcm::analysis {

std::vector<UtilityDecomposition> decompose(const ModelParams& params,
                                            const vision::ExtractorConfig& cfg,
                                            const vision::ExtractorWeights& weights,
                                            const Dataset& data,
                                            const trainer::ImageStore& images) {
    const auto utils = trainer::image_utilities(params, cfg, weights, images);
    std::vector<UtilityDecomposition> out;
    out.reserve(data.tasks.size());
    for (const auto& task : data.tasks) {
        UtilityDecomposition d;
        d.task_id = task.task_id;
        double u_img[2];
        for (int j = 0; j < 2; ++j) {
            const std::string& id = task.alts[j].image_id;
            if (id.empty())
                throw std::runtime_error("decompose: task '" + task.task_id +
                                         "' is missing an image");
            auto it = utils.find(id);
            if (it == utils.end())
                throw std::runtime_error("decompose: unresolvable image_id '" + id + "'");
            u_img[j] = it->second;
        }
        d.dv_numeric = mnl::utility_numeric(params, task.alts[1]) -
                       mnl::utility_numeric(params, task.alts[0]);
        d.dv_image = u_img[1] - u_img[0];
        d.dv_total = d.dv_numeric + d.dv_image;
        out.push_back(std::move(d));
    }
    return out;
}

Ranking rank_images(const std::map<std::string, double>& utilities, int k) {
    std::vector<RankedImage> all;
    all.reserve(utilities.size());
    for (const auto& [id, u] : utilities) all.push_back({id, u});
    std::sort(all.begin(), all.end(), [](const RankedImage& a, const RankedImage& b) {
        if (a.utility != b.utility) return a.utility > b.utility;
        return a.image_id < b.image_id;
    });
    const int n = static_cast<int>(all.size());
    const int kk = std::min(k, n);
    Ranking r;
    r.top.assign(all.begin(), all.begin() + kk);
    r.bottom.assign(all.rbegin(), all.rbegin() + kk);  // worst first
    return r;
}

Ranking rank_images(const ModelParams& params, const vision::ExtractorConfig& cfg,
                    const vision::ExtractorWeights& weights, const trainer::ImageStore& images,
                    int k) {
    return rank_images(trainer::image_utilities(params, cfg, weights, images), k);
}

double wtp_extremes(double delta_u, double beta_hhc, double cost_divisor) {
    if (beta_hhc == 0.0) throw std::invalid_argument("wtp_extremes: beta_hhc is zero");
    return delta_u / std::abs(beta_hhc) * cost_divisor;
}

namespace {

// linear interpolation between order statistics (values must be sorted)
double quantile_sorted(const std::vector<double>& v, double p) {
    if (v.empty()) return 0.0;
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

std::vector<DensitySummary> density_quantiles(
    const std::vector<std::pair<double, double>>& density_and_utility, int q) {
    if (q < 2) throw std::invalid_argument("density_quantiles: need q >= 2 groups");
    if (density_and_utility.size() < static_cast<std::size_t>(q))
        throw std::invalid_argument("density_quantiles: fewer images than groups");
    auto sorted = density_and_utility;
    std::sort(sorted.begin(), sorted.end());

    const int n = static_cast<int>(sorted.size());
    const int base = n / q;
    const int rem = n % q;
    std::vector<DensitySummary> out;
    int at = 0;
    for (int g = 0; g < q; ++g) {
        const int size = base + (g < rem ? 1 : 0);  // remainder to the front groups
        DensitySummary s;
        s.count = size;
        s.density_lo = sorted[at].first;
        s.density_hi = sorted[at + size - 1].first;
        std::vector<double> utils;
        utils.reserve(size);
        for (int i = 0; i < size; ++i) utils.push_back(sorted[at + i].second);
        std::sort(utils.begin(), utils.end());
        s.min = utils.front();
        s.max = utils.back();
        s.q1 = quantile_sorted(utils, 0.25);
        s.median = quantile_sorted(utils, 0.5);
        s.q3 = quantile_sorted(utils, 0.75);
        out.push_back(s);
        at += size;
    }
    return out;
}

std::vector<DensitySummary> density_quantiles(const std::map<std::string, double>& utilities,
                                              const trainer::ImageStore& images, int q) {
    std::vector<std::pair<double, double>> du;
    du.reserve(utilities.size());
    for (const auto& [id, u] : utilities) {
        const Image& img = images.require(id);
        if (!img.density)
            throw std::runtime_error("density_quantiles: image '" + id + "' has no density");
        du.emplace_back(*img.density, u);
    }
    return density_quantiles(du, q);
}

// ---- model comparison ---------------------------------------------------

std::string fmt_thousands(double v) {
    const long long r = std::llround(v);
    std::string digits = std::to_string(std::abs(r));
    std::string grouped;
    int count = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (count > 0 && count % 3 == 0) grouped.push_back(',');
        grouped.push_back(*it);
        ++count;
    }
    std::reverse(grouped.begin(), grouped.end());
    return (r < 0 ? "-" : "") + grouped;
}

std::string fmt_fixed(double v, int decimals) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(decimals);
    os << v;
    std::string s = os.str();
    if (s == "-0" || s.rfind("-0.", 0) == 0) {
        // normalize negative zero
        bool all_zero = true;
        for (char c : s)
            if (c >= '1' && c <= '9') all_zero = false;
        if (all_zero) s = s.substr(1);
    }
    return s;
}

namespace {

void check_same_datasets(const std::vector<ModelReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("compare_models: no results");
    for (const auto& r : reports)
        if (r.train_n != reports.front().train_n || r.test_n != reports.front().test_n)
            throw std::invalid_argument(
                "compare_models: results were computed on different train/test datasets");
}

// the union of parameter names over all models, in first-seen order
std::vector<std::string> all_param_names(const std::vector<ModelReport>& reports) {
    std::vector<std::string> names;
    for (const auto& r : reports)
        for (const auto& p : r.params)
            if (std::find(names.begin(), names.end(), p.name) == names.end())
                names.push_back(p.name);
    return names;
}

const ModelReport::Param* find_param(const ModelReport& r, const std::string& name) {
    for (const auto& p : r.params)
        if (p.name == name) return &p;
    return nullptr;
}

}  // namespace

ModelReport report_from_estimation(const std::string& name, const EstimationResult& fit,
                                   const trainer::EvalMetrics& test, int test_n) {
    ModelReport r;
    r.name = name;
    r.model_type = fit.params.beta_k.empty() ? "lin-add RUM-MNL" : "CV-DCM";
    r.n_parameters = std::to_string(fit.param_names.size());
    r.train_n = fit.n_obs;
    r.train_ll = fit.loglik;
    r.train_rho2 = fit.rho2;
    r.train_ce = fit.cross_entropy;
    r.test_n = test_n;
    r.test_ll = test.loglik;
    r.test_rho2 = test.rho2;
    r.test_ce = test.cross_entropy;
    for (std::size_t i = 0; i < fit.param_names.size(); ++i)
        r.params.push_back(
            {fit.param_names[i], fit.estimates[i], fit.std_errors[i], fit.p_values[i], false});
    if (fit.param_names.size() > 2)  // month constants present: show the fixed reference
        r.params.push_back({"beta_dec", 0.0, 0.0, 0.0, true});
    r.has_vtt = true;
    r.vtt = fit.vtt;
    r.vtt_se = fit.vtt_se;
    r.vtt_p = fit.vtt_p;
    return r;
}

std::string compare_models_text(const std::vector<ModelReport>& reports) {
    check_same_datasets(reports);
    const int label_w = 26;
    const int col_w = 24;
    std::ostringstream os;
    auto label = [&](const std::string& s) {
        os << s;
        for (int i = static_cast<int>(s.size()); i < label_w; ++i) os << ' ';
    };
    auto cell = [&](const std::string& s) {
        for (int i = static_cast<int>(s.size()); i < col_w; ++i) os << ' ';
        os << s;
    };
    auto row = [&](const std::string& lab, auto value_of) {
        label(lab);
        for (const auto& r : reports) cell(value_of(r));
        os << '\n';
    };

    row("", [](const ModelReport& r) { return r.name; });
    row("Model type", [](const ModelReport& r) { return r.model_type; });
    row("Number of parameters", [](const ModelReport& r) { return r.n_parameters; });
    os << "Train set N = " << reports.front().train_n << '\n';
    row("  Log-Likelihood", [](const ModelReport& r) { return fmt_thousands(r.train_ll); });
    row("  rho2", [](const ModelReport& r) { return fmt_fixed(r.train_rho2, 3); });
    row("  Cross-entropy", [](const ModelReport& r) { return fmt_fixed(r.train_ce, 3); });
    os << "Test set N = " << reports.front().test_n << '\n';
    row("  Log-Likelihood", [](const ModelReport& r) { return fmt_thousands(r.test_ll); });
    row("  rho2", [](const ModelReport& r) { return fmt_fixed(r.test_rho2, 3); });
    row("  Cross-entropy", [](const ModelReport& r) { return fmt_fixed(r.test_ce, 3); });

    label("");
    for (std::size_t i = 0; i < reports.size(); ++i) cell("est     s.e.   p-val");
    os << '\n';
    for (const auto& name : all_param_names(reports)) {
        row(name, [&](const ModelReport& r) -> std::string {
            const auto* p = find_param(r, name);
            if (!p) return "";
            if (p->fixed) return "0.00  --fixed";
            return fmt_fixed(p->est, 2) + "   " + fmt_fixed(p->se, 3) + "    " +
                   fmt_fixed(p->p, 2);
        });
    }
    row("Value-of-Travel-Time", [&](const ModelReport& r) -> std::string {
        if (!r.has_vtt) return "";
        return fmt_fixed(r.vtt, 1) + "   " + fmt_fixed(r.vtt_se, 2) + "    " +
               fmt_fixed(r.vtt_p, 2);
    });
    os << "  [eur/hr month]\n";
    return os.str();
}

namespace {

nlohmann::json report_to_json(const ModelReport& r) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : r.params) {
        nlohmann::json pj{{"name", p.name}, {"est", p.est}, {"fixed", p.fixed}};
        if (!p.fixed) {
            pj["se"] = p.se;
            pj["p"] = p.p;
        }
        params.push_back(pj);
    }
    nlohmann::json j{{"name", r.name},
                     {"model_type", r.model_type},
                     {"n_parameters", r.n_parameters},
                     {"train", {{"n", r.train_n},
                                {"loglik", r.train_ll},
                                {"rho2", r.train_rho2},
                                {"cross_entropy", r.train_ce}}},
                     {"test", {{"n", r.test_n},
                               {"loglik", r.test_ll},
                               {"rho2", r.test_rho2},
                               {"cross_entropy", r.test_ce}}},
                     {"params", params}};
    if (r.has_vtt) j["vtt"] = {{"value", r.vtt}, {"se", r.vtt_se}, {"p", r.vtt_p}};
    return j;
}

}  // namespace

std::string compare_models_json(const std::vector<ModelReport>& reports) {
    check_same_datasets(reports);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    return nlohmann::json{{"models", arr}}.dump(2);
}

std::string compare_models_markdown(const std::vector<ModelReport>& reports) {
    check_same_datasets(reports);
    std::ostringstream os;
    os << "| |";
    for (const auto& r : reports) os << ' ' << r.name << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < reports.size(); ++i) os << "---|";
    os << '\n';
    auto row = [&](const std::string& lab, auto value_of) {
        os << "| " << lab << " |";
        for (const auto& r : reports) os << ' ' << value_of(r) << " |";
        os << '\n';
    };
    row("Model type", [](const ModelReport& r) { return r.model_type; });
    row("Number of parameters", [](const ModelReport& r) { return r.n_parameters; });
    row("Train Log-Likelihood", [](const ModelReport& r) { return fmt_thousands(r.train_ll); });
    row("Train rho2", [](const ModelReport& r) { return fmt_fixed(r.train_rho2, 3); });
    row("Train Cross-entropy", [](const ModelReport& r) { return fmt_fixed(r.train_ce, 3); });
    row("Test Log-Likelihood", [](const ModelReport& r) { return fmt_thousands(r.test_ll); });
    row("Test rho2", [](const ModelReport& r) { return fmt_fixed(r.test_rho2, 3); });
    row("Test Cross-entropy", [](const ModelReport& r) { return fmt_fixed(r.test_ce, 3); });
    for (const auto& name : all_param_names(reports)) {
        row(name, [&](const ModelReport& r) -> std::string {
            const auto* p = find_param(r, name);
            if (!p) return "";
            if (p->fixed) return "0.00 (fixed)";
            return fmt_fixed(p->est, 2) + " (" + fmt_fixed(p->se, 3) + ")";
        });
    }
    row("VTT [eur/hr month]", [](const ModelReport& r) -> std::string {
        if (!r.has_vtt) return "";
        return fmt_fixed(r.vtt, 1) + " (" + fmt_fixed(r.vtt_se, 2) + ")";
    });
    return os.str();
}

// ---- report files ---------------------------------------------------------

std::string image_utilities_csv(const std::map<std::string, double>& utilities,
                                const trainer::ImageStore& images) {
    std::ostringstream os;
    os << "image_id,utility,density,month\n";
    for (const auto& [id, u] : utilities) {
        const Image& img = images.require(id);
        os << id << ',' << fmt_fixed(u, 6) << ',';
        if (img.density) os << fmt_fixed(*img.density, 6);
        os << ',' << img.month << '\n';
    }
    return os.str();
}

std::string decomposition_csv(const std::vector<UtilityDecomposition>& rows) {
    std::ostringstream os;
    os << "task_id,dv_total,dv_numeric,dv_image\n";
    for (const auto& d : rows)
        os << d.task_id << ',' << fmt_fixed(d.dv_total, 6) << ',' << fmt_fixed(d.dv_numeric, 6)
           << ',' << fmt_fixed(d.dv_image, 6) << '\n';
    return os.str();
}

std::string density_summary_json(const std::vector<DensitySummary>& groups) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : groups)
        arr.push_back({{"count", g.count},
                       {"density_lo", g.density_lo},
                       {"density_hi", g.density_hi},
                       {"min", g.min},
                       {"q1", g.q1},
                       {"median", g.median},
                       {"q3", g.q3},
                       {"max", g.max}});
    return nlohmann::json{{"groups", arr}}.dump(2);
}

}  // namespace cvdcm::analysis
