#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "risklab/harness.hpp"

using namespace risklab;

// The OpenMP kernels must reproduce the serial reference bit for bit: every
// trial derives its own generator and rows are preallocated, so scheduling
// cannot influence the output.

TEST_CASE("distance kernel: parallel equals serial") {
    HypothesisClass cls = make_halfspace_grid(2, 60);
    DistributionSpec spec;
    spec.marginal = uniform_sphere(2);
    spec.f_star = cls.members[0];
    MetricCloud c = build_cloud(cls, spec, LossKind::binary, 5000, 3, CloudMode::loss_class);
    auto par = pairwise_distances(c, 0);
    auto ser = pairwise_distances_serial(c);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) REQUIRE(par[i] == ser[i]);
}

TEST_CASE("trial engine: parallel equals serial, byte for byte") {
    DistributionSpec spec;
    spec.marginal = uniform_ball(2);
    spec.f_star = make_homogeneous({1.0, 0.0});
    auto scheme = std::shared_ptr<const CompressionScheme>(svm_scheme(2));

    auto learner_par = scheme_learner(spec, scheme, 10000);
    RiskTable par = run_trials(*learner_par, spec, {30, 60}, 40, 99, 0);
    auto learner_ser = scheme_learner(spec, scheme, 10000);
    RiskTable ser = run_trials_serial(*learner_ser, spec, {30, 60}, 40, 99);
    CHECK(risk_table_csv(par) == risk_table_csv(ser));
    CHECK(par.decomp_checked == ser.decomp_checked);
    CHECK(par.decomp_violations == ser.decomp_violations);
}

TEST_CASE("net ERM trials: parallel equals serial with decomposition checks") {
    DistributionSpec spec;
    spec.marginal = uniform_ball(2);
    spec.noise = NoiseKind::massart;
    spec.margin_h = 0.5;
    spec.f_star = make_homogeneous({1.0, 0.0});
    NetErmConfig cfg;
    cfg.cls = std::make_shared<HypothesisClass>(make_halfspace_grid(2, 72));
    cfg.B = 2.0;
    cfg.cloud_points = 2000;

    auto a = net_erm_learner(spec, cfg);
    RiskTable par = run_trials(*a, spec, {100}, 50, 5, 2);
    auto b = net_erm_learner(spec, cfg);
    RiskTable ser = run_trials_serial(*b, spec, {100}, 50, 5);
    CHECK(risk_table_csv(par) == risk_table_csv(ser));
    CHECK(par.decomp_violations == 0);
    CHECK(par.decomp_checked == ser.decomp_checked);
}

TEST_CASE("adversarial family: jobs do not change the report") {
    AdversarialReport a = adversarial_family_eval(2, 0.25, 400, 6, 10, 0.05, 72, 1500, 7, 2);
    AdversarialReport b = adversarial_family_eval(2, 0.25, 400, 6, 10, 0.05, 72, 1500, 7, 1);
    CHECK(a.worst_mean_excess == b.worst_mean_excess);
    CHECK(a.mean_excess_per_f == b.mean_excess_per_f);
}
