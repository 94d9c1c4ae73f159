#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "risklab/harness.hpp"

using namespace risklab;

namespace {

DistributionSpec halfspace_spec(double h = 1.0) {
    DistributionSpec spec;
    spec.marginal = uniform_ball(2);
    if (h < 1.0) {
        spec.noise = NoiseKind::massart;
        spec.margin_h = h;
    }
    spec.f_star = make_homogeneous({1.0, 0.0});
    return spec;
}

RiskTable synthetic_table(const std::vector<int>& ns, double c, double exponent) {
    RiskTable t;
    for (int n : ns)
        for (int trial = 0; trial < 5; ++trial) {
            RiskRow r;
            r.learner_id = "synthetic";
            r.n = n;
            r.trial = trial;
            r.status = "ok";
            r.excess = c * std::pow(n, exponent);
            r.risk = r.excess;
            t.rows.push_back(r);
        }
    return t;
}

} // namespace

TEST_CASE("constant learner has zero excess in every trial") {
    DistributionSpec spec = halfspace_spec(0.5);
    auto learner = constant_learner(spec, LossKind::binary);
    RiskTable t = run_trials(*learner, spec, {50}, 20, 7);
    for (const auto& r : t.rows) {
        CHECK(r.status == "ok");
        CHECK(r.excess == 0.0);
        CHECK(r.risk == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("determinism: identical configs give byte-identical tables") {
    DistributionSpec spec = halfspace_spec();
    auto scheme = std::shared_ptr<const CompressionScheme>(svm_scheme(2));
    auto learner = scheme_learner(spec, scheme, 20000);
    RiskTable a = run_trials(*learner, spec, {40, 80}, 25, 123);
    auto learner2 = scheme_learner(spec, scheme, 20000);
    RiskTable b = run_trials(*learner2, spec, {40, 80}, 25, 123);
    CHECK(risk_table_csv(a) == risk_table_csv(b));
}

TEST_CASE("trial seeds are distinct") {
    DistributionSpec spec = halfspace_spec();
    auto learner = constant_learner(spec, LossKind::binary);
    RiskTable t = run_trials(*learner, spec, {10, 20, 40}, 50, 99);
    std::vector<std::uint64_t> seeds;
    for (const auto& r : t.rows) seeds.push_back(r.seed);
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("failed trials are recorded with reasons and excluded") {
    // massart-noisy labels are rarely separable, so the svm scheme must fail often
    DistributionSpec spec = halfspace_spec(0.3);
    auto scheme = std::shared_ptr<const CompressionScheme>(svm_scheme(2));
    auto learner = scheme_learner(spec, scheme, 5000);
    RiskTable t = run_trials(*learner, spec, {60}, 30, 5);
    int failed = 0;
    for (const auto& r : t.rows)
        if (r.status != "ok") {
            ++failed;
            CHECK(!r.status.empty());
        }
    CHECK(failed > 0);
}

TEST_CASE("bound formulas evaluate to the pinned values") {
    BoundParams p;
    p.k = 5;
    CHECK(bound_value(BoundId::floyd_warmuth, 105, 0.05, p) ==
          doctest::Approx(0.2322).epsilon(0.0022)); // 0.2322 +- 0.0005
    CHECK(std::abs(bound_value(BoundId::floyd_warmuth, 105, 0.05, p) - 0.2322) < 0.0005);
    p.k = 3;
    CHECK(std::abs(bound_value(BoundId::pol, 300, 0.1, p) - 0.0646) < 0.0005);
    CHECK(bound_value(BoundId::expectation_k_over_n1, 99, 0.05, p) ==
          doctest::Approx(0.03).epsilon(1e-12));
    p.k = 2;
    CHECK(bound_value(BoundId::deviation_ek_log, 200, 0.05, p) ==
          doctest::Approx(std::exp(1.0) * 2.0 * std::log(20.0) / 200.0).epsilon(1e-12));
}

TEST_CASE("interval scheme satisfies the deviation bound at n=200") {
    DistributionSpec spec;
    spec.marginal = uniform_ball(1);
    spec.f_star = make_interval(-0.3, 0.5);
    auto scheme = std::shared_ptr<const CompressionScheme>(closure_scheme_intervals());
    auto learner = scheme_learner(spec, scheme);
    RiskTable t = run_trials(*learner, spec, {200}, 500, 2024);
    BoundParams p;
    p.k = 2;
    BoundReport rep = verify_bound(t, BoundId::deviation_ek_log, 0.05, p);
    CHECK(rep.satisfied);
    CHECK(rep.per_n[0].quantile <= rep.per_n[0].bound);
    CHECK(rep.per_n[0].trials_failed == 0);
}

TEST_CASE("quantile precision error when trials are too few") {
    DistributionSpec spec = halfspace_spec();
    auto learner = constant_learner(spec, LossKind::binary);
    RiskTable t = run_trials(*learner, spec, {50}, 30, 7);
    BoundParams p;
    p.k = 2;
    CHECK_THROWS_AS(verify_bound(t, BoundId::deviation_ek_log, 0.05, p), config_error);
}

TEST_CASE("rate fit") {
    SUBCASE("statistic exactly c/n gives slope -1") {
        RiskTable t = synthetic_table({100, 200, 400, 800, 1600}, 3.0, -1.0);
        RateFit f = rate_fit(t, Statistic::mean());
        CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("statistic exactly c/sqrt(n) gives slope -0.5") {
        RiskTable t = synthetic_table({100, 200, 400, 800}, 1.0, -0.5);
        RateFit f = rate_fit(t, Statistic::mean());
        CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-9));
    }
    SUBCASE("grid validation") {
        RiskTable t = synthetic_table({100, 200, 400}, 1.0, -1.0);
        CHECK_THROWS_AS(rate_fit(t, Statistic::mean()), config_error);
        RiskTable u = synthetic_table({100, 150, 200, 300}, 1.0, -1.0);
        CHECK_THROWS_AS(rate_fit(u, Statistic::mean()), config_error);
    }
    SUBCASE("zero statistics truncate the fit with a warning") {
        RiskTable t = synthetic_table({100, 200, 400, 800}, 1.0, -1.0);
        for (auto& r : t.rows)
            if (r.n == 800) r.excess = 0.0;
        RateFit f = rate_fit(t, Statistic::mean());
        CHECK(f.truncated_zeros);
        CHECK(f.points_used == 3);
    }
}

TEST_CASE("net ERM pipeline: decomposition holds on every trial") {
    DistributionSpec spec = halfspace_spec(0.5);
    NetErmConfig cfg;
    cfg.cls = std::make_shared<HypothesisClass>(make_halfspace_grid(2, 90));
    cfg.beta = 1.0;
    cfg.B = 2.0; // 1/h
    cfg.delta = 0.05;
    cfg.cloud_points = 3000;
    auto learner = net_erm_learner(spec, cfg);
    RiskTable t = run_trials(*learner, spec, {100, 200}, 60, 31);
    CHECK(t.decomp_checked == 120);
    CHECK(t.decomp_violations == 0);
    for (const auto& r : t.rows) {
        CHECK(r.status == "ok");
        CHECK(r.excess >= 0.0);
        CHECK(r.aux >= 1.0);
    }
}

TEST_CASE("full ERM aggregation inequality holds pathwise") {
    DistributionSpec spec = halfspace_spec(0.4);
    auto cls = std::make_shared<HypothesisClass>(make_halfspace_grid(2, 72));
    spec.f_star = cls->members[0];
    auto learner = full_erm_learner(spec, cls, 3000);
    RiskTable t = run_trials(*learner, spec, {80, 160}, 60, 17);
    CHECK(t.decomp_checked == 240); // two c values per trial
    CHECK(t.decomp_violations == 0);
}

TEST_CASE("svm expectation bound on a reduced run") {
    DistributionSpec spec = halfspace_spec();
    auto scheme = std::shared_ptr<const CompressionScheme>(svm_scheme(2));
    auto learner = scheme_learner(spec, scheme, 20000);
    RiskTable t = run_trials(*learner, spec, {99}, 200, 42);
    BoundParams p;
    p.k = 3;
    BoundReport rep = verify_bound(t, BoundId::expectation_k_over_n1, 0.05, p);
    CHECK(rep.expectation);
    CHECK(rep.satisfied);
    CHECK(rep.per_n[0].mean + 3.0 * rep.per_n[0].mean_se <= 0.03);
}

TEST_CASE("adversarial family sandwich at reduced scale") {
    AdversarialReport rep = adversarial_family_eval(2, 0.25, 400, 8, 25, 0.05, 90, 2000, 7);
    CHECK(rep.packing_size >= 2);
    CHECK(rep.worst_mean_excess >= 0.0);
    CHECK(rep.fitted_constant <= 10.0);
    CHECK(rep.lower_reference == doctest::Approx(2.0 * 0.75 / (400 * 0.25)).epsilon(1e-12));
    for (double v : rep.mean_excess_per_f) CHECK(v >= 0.0);
}

TEST_CASE("majority of three vs the single scheme on realizable svm data") {
    DistributionSpec spec = halfspace_spec();
    auto scheme = std::shared_ptr<const CompressionScheme>(svm_scheme(2));
    auto single = scheme_learner(spec, scheme, 20000);
    auto majority = majority_learner(spec, scheme, 20000);
    RiskTable ts = run_trials(*single, spec, {120}, 300, 66);
    RiskTable tm = run_trials(*majority, spec, {120}, 300, 66);
    auto mean_risk = [](const RiskTable& t) {
        double s = 0.0;
        int c = 0;
        for (const auto& r : t.rows)
            if (r.status == "ok") {
                s += r.risk;
                ++c;
            }
        return s / c;
    };
    double ms = mean_risk(ts), mm = mean_risk(tm);
    MESSAGE("single mean risk = ", ms, ", majority-of-three mean risk = ", mm);
    // the vote uses thirds of the sample, so a constant-factor gap is expected
    CHECK(mm > 0.0);
    CHECK(mm <= 4.0 * ms + 0.01);
}

TEST_CASE("net ERM mainbound variant runs with clean decompositions") {
    DistributionSpec spec = halfspace_spec(0.5);
    NetErmConfig cfg;
    cfg.cls = std::make_shared<HypothesisClass>(make_halfspace_grid(2, 72));
    cfg.B = 2.0;
    cfg.variant = EtaVariant::mainbound;
    cfg.cloud_points = 2000;
    auto learner = net_erm_learner(spec, cfg);
    RiskTable t = run_trials(*learner, spec, {100, 200}, 40, 12);
    CHECK(t.decomp_violations == 0);
    for (const auto& r : t.rows) CHECK(r.status == "ok");
}

TEST_CASE("adversarial family with h = 1 degenerates gracefully") {
    AdversarialReport rep = adversarial_family_eval(2, 1.0, 200, 8, 10, 0.05, 72, 1500, 3);
    CHECK(rep.lower_reference == 0.0);
    CHECK(rep.worst_mean_excess >= 0.0);
}

TEST_CASE("adversarial family rejects out-of-range B") {
    // B = 1/h = 20 > sqrt(n/d) = sqrt(50)
    CHECK_THROWS_AS(adversarial_family_eval(2, 0.05, 100, 8, 5, 0.05, 36, 500, 1), config_error);
}

TEST_CASE("skeleton regression learner runs and reports exact excess") {
    DistributionSpec spec;
    spec.marginal = uniform_ball(1);
    spec.noise = NoiseKind::regression;
    spec.sigma = 0.25;
    SkeletonRegressionConfig cfg;
    cfg.cls = std::make_shared<HypothesisClass>(make_constant_grid(-0.5, 0.5, 41));
    spec.f_star = cfg.cls->members[20];
    cfg.cloud_points = 500;
    auto learner = skeleton_regression_learner(spec, cfg);
    RiskTable t = run_trials(*learner, spec, {100, 400}, 40, 3);
    for (const auto& r : t.rows) {
        CHECK(r.status == "ok");
        CHECK(r.excess >= 0.0);
        CHECK(r.risk == doctest::Approx(r.excess + 0.0625).epsilon(1e-9));
    }
}
