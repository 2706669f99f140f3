#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "cvdcm/rng.hpp"
#include "cvdcm/types.hpp"

namespace cvdcm::test {

inline ChoiceTask make_task(int hhc0, int tti0, int hhc1, int tti1, int chosen,
                            int month0 = kDecember, int month1 = kDecember) {
    ChoiceTask t;
    t.alts[0] = {hhc0, tti0, "", month0};
    t.alts[1] = {hhc1, tti1, "", month1};
    t.chosen = chosen;
    return t;
}

// random dataset over the design levels, with random months and choices
inline Dataset random_dataset(Rng& rng, int n_tasks) {
    const int hhc[] = {-225, -150, -75, 0, 75, 150, 225};
    const int tti[] = {-15, -10, -5, 0, 5, 10, 15};
    Dataset data;
    for (int i = 0; i < n_tasks; ++i) {
        ChoiceTask t;
        t.task_id = std::to_string(i);
        for (int j = 0; j < 2; ++j) {
            t.alts[j].hhc = hhc[rng.uniform_int(7)];
            t.alts[j].tti = tti[rng.uniform_int(7)];
            t.alts[j].month = 1 + static_cast<int>(rng.uniform_int(12));
        }
        t.chosen = rng.bernoulli(0.5) ? 1 : 0;
        data.tasks.push_back(std::move(t));
    }
    return data;
}

// central finite differences of a scalar function
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   Eigen::VectorXd theta, double h = 1e-5) {
    Eigen::VectorXd g(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double t0 = theta(i);
        theta(i) = t0 + h;
        const double fp = f(theta);
        theta(i) = t0 - h;
        const double fm = f(theta);
        theta(i) = t0;
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

// relative error with a unit floor, as in standard gradient checkers
inline double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        worst = std::max(worst, rel_error(a(i), b(i)));
    return worst;
}

// Spearman rank correlation (average ranks on ties)
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace cvdcm::test
