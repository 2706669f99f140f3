#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cvdcm/mnl.hpp"
#include "test_support.hpp"

using namespace cvdcm;
using namespace cvdcm::test;

namespace {

ModelParams params_from_theta(const Eigen::VectorXd& theta) {
    ModelParams p;
    p.beta_hhc = theta(0);
    p.beta_tti = theta(1);
    if (theta.size() > 2)
        for (int m = 0; m < 11; ++m) p.beta_month[m] = theta(2 + m);
    return p;
}

}  // namespace

TEST_CASE("attribute scaling divides by the fixed divisors") {
    Scaling s;
    CHECK(mnl::scale_attributes({225, 0, "", 12}, s).first == doctest::Approx(1.0));
    CHECK(mnl::scale_attributes({0, 0, "", 12}, s).first == 0.0);
    CHECK(mnl::scale_attributes({0, 0, "", 12}, s).second == 0.0);
    CHECK(mnl::scale_attributes({0, -15, "", 12}, s).second == doctest::Approx(-1.0));
    CHECK(mnl::scale_attributes({-150, 10, "", 12}, s).first == doctest::Approx(-150.0 / 225));
    CHECK_THROWS(mnl::scale_attributes({0, 0, "", 12}, Scaling{0.0, 15.0}));
}

TEST_CASE("numeric utility is linear-additive with a month constant") {
    ModelParams p;
    CHECK(mnl::utility_numeric(p, {75, 5, "", 12}) == 0.0);

    p.beta_hhc = -0.86;
    p.beta_tti = -0.21;
    CHECK(mnl::utility_numeric(p, {225, 15, "", 12}) == doctest::Approx(-1.07));

    ModelParams q;
    q.beta_month[0] = 0.46;  // January
    CHECK(mnl::utility_numeric(q, {0, 0, "", 1}) == doctest::Approx(0.46));
    CHECK(mnl::utility_numeric(q, {0, 0, "", 12}) == 0.0);

    ModelParams bad;
    bad.beta_hhc = std::nan("");
    CHECK_THROWS(mnl::utility_numeric(bad, {0, 0, "", 12}));
    CHECK_THROWS(mnl::utility_numeric(p, {0, 0, "", 13}));
}

TEST_CASE("logit probabilities") {
    Eigen::VectorXd v(2);
    v << 0.0, 0.0;
    CHECK(mnl::logit_probs(v)(0) == doctest::Approx(0.5));

    v << 1.0, 0.0;
    const auto p = mnl::logit_probs(v);
    CHECK(p(0) == doctest::Approx(0.7311).epsilon(1e-3));
    CHECK(p(1) == doctest::Approx(0.2689).epsilon(1e-3));

    SUBCASE("translation invariance is bit-identical") {
        // utilities and shifts on a dyadic grid so v + c carries no rounding
        // of its own; the max-subtraction must then cancel c exactly
        Rng rng(7);
        int mismatches = 0;
        for (int i = 0; i < 50; ++i) {
            Eigen::VectorXd u(3);
            for (int j = 0; j < 3; ++j)
                u(j) = static_cast<double>(static_cast<long>(rng.uniform_int(16385)) - 8192) /
                       1024.0;
            const double c =
                static_cast<double>(static_cast<long>(rng.uniform_int(131073)) - 65536) /
                1024.0;
            const Eigen::VectorXd a = mnl::logit_probs(u);
            const Eigen::VectorXd b = mnl::logit_probs(u.array() + c);
            for (int j = 0; j < 3; ++j)
                if (a(j) != b(j)) ++mismatches;
            CHECK(std::abs(a.sum() - 1.0) < 1e-12);
        }
        CHECK(mismatches == 0);
    }

    SUBCASE("extreme utilities stay normalized") {
        Eigen::VectorXd big(2);
        big << 1000.0, -1000.0;
        const auto q = mnl::logit_probs(big);
        CHECK(q(0) == doctest::Approx(1.0));
        CHECK(std::abs(q.sum() - 1.0) < 1e-12);
    }

    Eigen::VectorXd bad(2);
    bad << std::nan(""), 0.0;
    CHECK_THROWS(mnl::logit_probs(bad));
}

TEST_CASE("log-likelihood of the equiprobable model") {
    Dataset data;
    for (int i = 0; i < 10; ++i) data.tasks.push_back(make_task(75, -5, -75, 5, i % 2));
    ModelParams p;
    CHECK(mnl::log_likelihood(data, p) == doctest::Approx(10.0 * std::log(0.5)));

    mnl::ImageUtils zeros(20, 0.0);
    CHECK(mnl::log_likelihood(data, p, &zeros) == mnl::log_likelihood(data, p));

    CHECK_THROWS(mnl::log_likelihood(Dataset{}, p));
    mnl::ImageUtils short_utils(3, 0.0);
    CHECK_THROWS(mnl::log_likelihood(data, p, &short_utils));
}

TEST_CASE("fit metric fixtures") {
    auto m = mnl::fit_metrics(-1194.0, 1948);
    CHECK(m.rho2 == doctest::Approx(0.116).epsilon(0.005));
    CHECK(std::abs(m.cross_entropy - 0.613) < 0.0005);

    m = mnl::fit_metrics(-1137.0, 1948);
    CHECK(std::abs(m.rho2 - 0.158) < 0.0005);

    m = mnl::fit_metrics(-5954.0, 9784);
    CHECK(std::abs(m.cross_entropy - 0.609) < 0.0005);

    // null model
    const double ll0 = 100.0 * std::log(0.5);
    CHECK(mnl::fit_metrics(ll0, 100).rho2 == doctest::Approx(0.0));

    CHECK_THROWS(mnl::fit_metrics(1.0, 100));
    CHECK_THROWS(mnl::fit_metrics(-1.0, 0));
}

TEST_CASE("score: hand value on a single task") {
    Dataset data;
    // scaled hhc features (1, 0): hhc 225 vs 0, everything else equal
    data.tasks.push_back(make_task(225, 0, 0, 0, 0));
    ModelParams p;  // all zero => P = (0.5, 0.5)... but hhc features differ
    // force equal probabilities by zero parameters
    const Eigen::VectorXd g = mnl::grad_loglik(data, p, mnl::Model::Model1);
    CHECK(g(0) == doctest::Approx(0.5));  // (1-0.5)*1 + (0-0.5)*0
    CHECK(g(1) == doctest::Approx(0.0));
}

TEST_CASE("score matches central finite differences") {
    Rng rng(42);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        Dataset data = random_dataset(rng, 40);
        const auto model = rep % 2 == 0 ? mnl::Model::Model1 : mnl::Model::Model2;
        Eigen::VectorXd theta(mnl::n_free_params(model));
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.uniform(-1.5, 1.5);

        const Eigen::VectorXd analytic =
            mnl::grad_loglik(data, params_from_theta(theta), model);
        const Eigen::VectorXd numeric = fd_gradient(
            [&](const Eigen::VectorXd& t) {
                return mnl::log_likelihood(data, params_from_theta(t));
            },
            theta, 1e-5);
        worst = std::max(worst, max_rel_error(analytic, numeric));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("analytic Hessian matches finite differences of the score and is NSD") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        Dataset data = random_dataset(rng, 30);
        Eigen::VectorXd theta(13);
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.uniform(-1.0, 1.0);
        const auto model = mnl::Model::Model2;
        const Eigen::MatrixXd h = mnl::hessian_loglik(data, params_from_theta(theta), model);

        for (Eigen::Index col = 0; col < theta.size(); ++col) {
            const Eigen::VectorXd hcol = fd_gradient(
                [&](const Eigen::VectorXd& t) {
                    return mnl::grad_loglik(data, params_from_theta(t), model)(col);
                },
                theta, 1e-5);
            CHECK(max_rel_error(h.col(col), hcol) < 1e-5);
        }

        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-h);
        CHECK(es.eigenvalues().minCoeff() > -1e-8);  // negative Hessian is PSD
    }
}

TEST_CASE("estimation: mirrored data forces a zero MLE") {
    // two mirrored task patterns (for identification), each answered both ways
    Dataset data;
    data.tasks.push_back(make_task(225, -5, -225, 5, 0));
    data.tasks.push_back(make_task(225, -5, -225, 5, 1));
    data.tasks.push_back(make_task(75, -15, -75, 15, 0));
    data.tasks.push_back(make_task(75, -15, -75, 15, 1));
    const auto fit = mnl::estimate_mnl(data, mnl::Model::Model1);
    CHECK(fit.converged);
    CHECK(fit.iterations == 0);
    CHECK(std::abs(fit.estimates[0]) < 1e-8);
    CHECK(std::abs(fit.estimates[1]) < 1e-8);
}

TEST_CASE("estimation: separated data raises a no-finite-MLE error") {
    Dataset data;
    // chosen alternative strictly better on both attributes
    data.tasks.push_back(make_task(-225, -15, 225, 15, 0));
    CHECK_THROWS_AS(static_cast<void>(mnl::estimate_mnl(data, mnl::Model::Model1)),
                    EstimationError);
}

TEST_CASE("estimation: singular Hessian names the collinear parameters") {
    Dataset data;
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        ChoiceTask t = random_dataset(rng, 1).tasks[0];
        t.alts[0].month = 12;  // every month indicator identically zero
        t.alts[1].month = 12;
        data.tasks.push_back(t);
    }
    try {
        static_cast<void>(mnl::estimate_mnl(data, mnl::Model::Model2));
        FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("singular") != std::string::npos);
        CHECK(msg.find("beta_jan") != std::string::npos);
        CHECK(msg.find("beta_nov") != std::string::npos);
    }
}

TEST_CASE("estimation recovers parameters on logit-simulated data") {
    // logit draws via inverse CDF on the true model
    Rng rng(11);
    const double bh = -0.86, bt = -0.21;
    Dataset data;
    for (int i = 0; i < 8000; ++i) {
        ChoiceTask t = random_dataset(rng, 1).tasks[0];
        t.alts[0].month = t.alts[1].month = 12;
        const double v0 = bh * t.alts[0].hhc / 225.0 + bt * t.alts[0].tti / 15.0;
        const double v1 = bh * t.alts[1].hhc / 225.0 + bt * t.alts[1].tti / 15.0;
        const double p0 = 1.0 / (1.0 + std::exp(v1 - v0));
        t.chosen = rng.uniform01() < p0 ? 0 : 1;
        data.tasks.push_back(std::move(t));
    }
    const auto fit = mnl::estimate_mnl(data, mnl::Model::Model1);
    CHECK(fit.converged);
    CHECK(std::abs(fit.estimates[0] - bh) < 3.0 * fit.std_errors[0]);
    CHECK(std::abs(fit.estimates[1] - bt) < 3.0 * fit.std_errors[1]);
    CHECK(mnl::grad_loglik(data, fit.params, mnl::Model::Model1).lpNorm<Eigen::Infinity>() <
          1e-6);

    // result invariants
    CHECK(fit.cross_entropy == doctest::Approx(-fit.loglik / fit.n_obs));
    CHECK(fit.rho2 ==
          doctest::Approx(1.0 - fit.loglik / (fit.n_obs * std::log(0.5))));
}

TEST_CASE("conditional standard errors reduce to the plain Model 2 case") {
    Rng rng(9);
    Dataset data = random_dataset(rng, 400);
    ModelParams p;
    p.beta_hhc = -0.9;
    p.beta_tti = -0.2;
    p.beta_month[3] = 0.25;

    mnl::ImageUtils zeros(2 * data.tasks.size(), 0.0);
    const auto cond = mnl::conditional_std_errors(data, p, zeros);
    REQUIRE(cond.size() == 13);

    const Eigen::MatrixXd h = mnl::hessian_loglik(data, p, mnl::Model::Model2);
    const Eigen::MatrixXd cov = (-h).inverse();
    for (int i = 0; i < 13; ++i) {
        CHECK(cond[i] == doctest::Approx(std::sqrt(cov(i, i))));
        CHECK(cond[i] > 0.0);
        CHECK(std::isfinite(cond[i]));
    }

    // non-zero offsets change the utilities and the Hessian
    mnl::ImageUtils offsets(2 * data.tasks.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) offsets[i] = rng.uniform(-1.0, 1.0);
    const auto cond2 = mnl::conditional_std_errors(data, p, offsets);
    for (int i = 0; i < 13; ++i) CHECK(cond2[i] > 0.0);
}

TEST_CASE("value of travel time") {
    ModelParams p;
    p.beta_hhc = -0.96;
    p.beta_tti = -0.24;
    CHECK(mnl::vtt(p) == doctest::Approx(225.0));

    p.beta_hhc = -0.86;
    p.beta_tti = -0.21;
    CHECK(mnl::vtt(p) == doctest::Approx(219.8).epsilon(0.001));

    p.beta_hhc = -0.5;
    p.beta_tti = -0.5;
    CHECK(mnl::vtt(p) == doctest::Approx(900.0));

    p.beta_hhc = 0.0;
    CHECK_THROWS(mnl::vtt(p));
}

TEST_CASE("vtt delta-method standard error") {
    ModelParams p;
    p.beta_hhc = -0.86;
    p.beta_tti = -0.21;
    Eigen::Matrix2d cov;
    cov << 0.025 * 0.025, 1e-4, 1e-4, 0.023 * 0.023;
    const double se = mnl::vtt_std_error(p, cov);
    CHECK(se > 0.0);
    // same order of magnitude as the paper's reported 28.26
    CHECK(se > 5.0);
    CHECK(se < 100.0);
}

TEST_CASE("scale equivariance: c-scaled divisors with c-scaled betas change nothing") {
    ModelParams a;
    a.beta_hhc = -0.7;
    a.beta_tti = -0.3;
    ModelParams b = a;
    const double c = 3.0;
    b.scaling.cost_divisor *= c;
    b.scaling.time_divisor *= c;
    b.beta_hhc *= c;
    b.beta_tti *= c;

    Rng rng(13);
    Dataset data = random_dataset(rng, 50);
    for (const auto& task : data.tasks)
        for (int j = 0; j < 2; ++j)
            CHECK(mnl::utility_numeric(a, task.alts[j]) ==
                  doctest::Approx(mnl::utility_numeric(b, task.alts[j])));
    CHECK(mnl::log_likelihood(data, a) == doctest::Approx(mnl::log_likelihood(data, b)));
    CHECK(mnl::vtt(a) == doctest::Approx(mnl::vtt(b)));
}

TEST_CASE("two-sided normal p-values") {
    CHECK(mnl::p_value(1.959964, 1.0) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(mnl::p_value(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(mnl::p_value(10.0, 1.0) < 1e-20);
}
