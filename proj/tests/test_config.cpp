#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "risklab/config.hpp"

using namespace risklab;

TEST_CASE("minimal config for svm audit parses with defaults") {
    ParseResult r = parse_config("subcommand = audit\nscheme = svm\n");
    REQUIRE(r.errors.empty());
    REQUIRE(r.config.has_value());
    CHECK(r.config->trials == 200);
    CHECK(r.config->delta == 0.05);
    CHECK(validate_for_subcommand(*r.config).empty());
}

TEST_CASE("non-increasing n_grid rejected") {
    ParseResult r = parse_config("n_grid = 400, 200\n");
    REQUIRE(!r.errors.empty());
    bool found = false;
    for (const auto& e : r.errors) found = found || e.find("n_grid not increasing") != std::string::npos;
    CHECK(found);
}

TEST_CASE("unknown key suggests the nearest known key") {
    ParseResult r = parse_config("epsilonn = 0.1\n");
    REQUIRE(!r.errors.empty());
    CHECK(r.errors[0].find("epsilonn") != std::string::npos);
    CHECK(r.errors[0].find("did you mean 'epsilons'") != std::string::npos);
}

TEST_CASE("all errors are collected, not just the first") {
    ParseResult r = parse_config(
        "n_grid = 400, 200\n"
        "delta = 1.5\n"
        "trials = 0\n"
        "format = yaml\n");
    CHECK(r.errors.size() >= 4);
    CHECK(!r.config.has_value());
}

TEST_CASE("sections and lists parse") {
    ParseResult r = parse_config(
        "subcommand = net-erm\n"
        "n_grid = 100, 200, 400\n"
        "epsilons = 0.05, 0.1\n"
        "[distribution]\n"
        "marginal = uniform-ball\n"
        "dim = 2\n"
        "noise = massart\n"
        "margin = 0.5\n"
        "[class]\n"
        "kind = homogeneous-halfspace\n"
        "dim = 2\n"
        "count = 72\n"
        "[learner]\n"
        "kind = net-erm\n"
        "B = 2\n");
    REQUIRE(r.errors.empty());
    const ExperimentConfig& c = *r.config;
    CHECK(c.n_grid == std::vector<int>{100, 200, 400});
    CHECK(c.distribution.noise == "massart");
    CHECK(c.distribution.margin == 0.5);
    CHECK(c.cls.count == 72);
    CHECK(c.learner.B == 2.0);

    HypothesisClass cls = build_class(c);
    CHECK(cls.size() == 72);
    DistributionSpec spec = build_distribution(c, cls);
    CHECK(spec.noise == NoiseKind::massart);
    CHECK(spec.margin_h == 0.5);
    CHECK(hypothesis_equal(spec.f_star, cls.members[0]));
}

TEST_CASE("finite-support distribution block") {
    ParseResult r = parse_config(
        "[distribution]\n"
        "marginal = finite-support\n"
        "atoms = 0; 1\n"
        "weights = 0.25, 0.75\n"
        "[class]\n"
        "kind = finite\n"
        "tables = 1, -1; 1, 1; -1, -1\n");
    REQUIRE(r.errors.empty());
    HypothesisClass cls = build_class(*r.config);
    CHECK(cls.size() == 3);
    DistributionSpec spec = build_distribution(*r.config, cls);
    CHECK(spec.marginal.kind == MarginalKind::finite_support);
    CHECK(spec.marginal.weights == Vec{0.25, 0.75});
}

TEST_CASE("subcommand requirements listed") {
    ParseResult r = parse_config("subcommand = experiment\n");
    REQUIRE(r.config.has_value());
    auto missing = validate_for_subcommand(*r.config);
    CHECK(std::find(missing.begin(), missing.end(), "bound") != missing.end());
}

TEST_CASE("config render round-trips") {
    ParseResult r = parse_config("subcommand = audit\nscheme = intervals\ntrials = 77\n");
    REQUIRE(r.config.has_value());
    ParseResult r2 = parse_config(render_config(*r.config));
    REQUIRE(r2.errors.empty());
    CHECK(r2.config->trials == 77);
    CHECK(r2.config->scheme == "intervals");
}
