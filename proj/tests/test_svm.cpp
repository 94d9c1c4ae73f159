#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "risklab/svm.hpp"

using namespace risklab;

namespace {

LabeledExample ex1(double x, double y) { return {{{x}, -1}, y}; }
LabeledExample ex2(double x0, double x1, double y) { return {{{x0, x1}, -1}, y}; }

Subsample realizable_draw(int n, std::uint64_t seed, double margin_cut = 0.0) {
    DistributionSpec spec;
    spec.marginal = uniform_ball(2);
    spec.f_star = make_homogeneous({1.0, 0.0});
    Rng rng(seed);
    Subsample s;
    while (static_cast<int>(s.size()) < n) {
        Point p = draw_point(spec.marginal, rng);
        if (std::abs(p.x[0]) < margin_cut) continue;
        s.push_back({p, evaluate(spec.f_star, p)});
    }
    return s;
}

// Brute-force maximum margin over a fine (angle, offset) grid in d = 2.
struct GridSeparator {
    Vec unit;
    double offset; // line: unit . x + offset = 0
    double margin;
};

GridSeparator grid_oracle(const Subsample& s) {
    GridSeparator best{{1.0, 0.0}, 0.0, -1.0};
    const double pi = 3.14159265358979323846;
    for (int ai = 0; ai < 6284; ++ai) {
        double a = ai * (2.0 * pi / 6284.0);
        Vec u{std::cos(a), std::sin(a)};
        for (int oi = -1500; oi <= 1500; ++oi) {
            double c = oi * 0.001;
            double m = 1e18;
            for (const auto& e : s) m = std::min(m, e.y * (u[0] * e.x.x[0] + u[1] * e.x.x[1] + c));
            if (m > best.margin) best = {u, c, m};
        }
    }
    return best;
}

} // namespace

TEST_CASE("hard margin solver") {
    SUBCASE("two points in d=1: w=1, b=0, margin=1") {
        SeparatorSolution sol = hard_margin_solve({ex1(-1.0, -1), ex1(1.0, 1)});
        CHECK(sol.w[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(sol.b == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(sol.margin == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(sol.active_indices.size() == 2);
    }
    SUBCASE("separable triangle matches the grid-search oracle to 1e-3") {
        Subsample s{ex2(-0.5, -0.2, -1), ex2(-0.1, 0.5, 1), ex2(0.4, -0.4, -1)};
        SeparatorSolution sol = hard_margin_solve(s);
        GridSeparator oracle = grid_oracle(s);
        double norm = std::sqrt(sol.w[0] * sol.w[0] + sol.w[1] * sol.w[1]);
        CHECK(sol.margin == doctest::Approx(oracle.margin).epsilon(2e-3));
        CHECK(sol.w[0] / norm == doctest::Approx(oracle.unit[0]).epsilon(5e-3));
        CHECK(sol.w[1] / norm == doctest::Approx(oracle.unit[1]).epsilon(5e-3));
        CHECK(sol.b / norm == doctest::Approx(oracle.offset).epsilon(5e-3));
    }
    SUBCASE("adding a far point leaves the separator unchanged") {
        Subsample s{ex2(-0.5, -0.2, -1), ex2(-0.1, 0.5, 1), ex2(0.4, -0.4, -1)};
        SeparatorSolution a = hard_margin_solve(s);
        s.push_back(ex2(0.9, -0.9, -1.0));
        SeparatorSolution b = hard_margin_solve(s);
        CHECK(a.w[0] == doctest::Approx(b.w[0]).epsilon(1e-10));
        CHECK(a.w[1] == doctest::Approx(b.w[1]).epsilon(1e-10));
        CHECK(a.b == doctest::Approx(b.b).epsilon(1e-10));
    }
    SUBCASE("all constraints satisfied on random instances") {
        for (int rep = 0; rep < 50; ++rep) {
            Subsample s = realizable_draw(30, derive_seed(5, "svm-feas", 30, rep));
            SeparatorSolution sol = hard_margin_solve(s);
            for (const auto& e : s) {
                double v = e.y * (sol.w[0] * e.x.x[0] + sol.w[1] * e.x.x[1] + sol.b);
                CHECK(v >= 1.0 - 1e-8);
            }
        }
    }
    SUBCASE("non-separable input raises") {
        Subsample s{ex2(0.0, 0.1, 1), ex2(0.0, -0.1, -1), ex2(0.0, 0.1001, -1), ex2(0.0, -0.1001, 1)};
        CHECK_THROWS_AS(hard_margin_solve(s), solver_error);
    }
    SUBCASE("dimension and size caps") {
        LabeledExample wide{{Vec(11, 0.0), -1}, 1.0};
        LabeledExample wide2{{Vec(11, 1.0), -1}, -1.0};
        CHECK_THROWS_AS(hard_margin_solve({wide, wide2}), config_error);
        CHECK_THROWS_AS(svm_scheme(11), config_error);
    }
    SUBCASE("margin below 1e-6 is a conditioning error") {
        Subsample s{ex1(-1e-7, -1), ex1(1e-7, 1)};
        CHECK_THROWS_AS(hard_margin_solve(s), solver_error);
    }
    SUBCASE("margin maximality: random perturbations never help") {
        Subsample s = realizable_draw(25, 99);
        SeparatorSolution sol = hard_margin_solve(s);
        Rng rng(123);
        for (int t = 0; t < 100; ++t) {
            Vec dw{rng.next_gaussian(), rng.next_gaussian()};
            double db = rng.next_gaussian();
            double norm = std::sqrt(dw[0] * dw[0] + dw[1] * dw[1] + db * db);
            dw[0] *= 1e-3 / norm;
            dw[1] *= 1e-3 / norm;
            db *= 1e-3 / norm;
            Vec w2{sol.w[0] + dw[0], sol.w[1] + dw[1]};
            double b2 = sol.b + db;
            bool feasible = true;
            for (const auto& e : s)
                feasible = feasible && e.y * (w2[0] * e.x.x[0] + w2[1] * e.x.x[1] + b2) >= 1.0 - 1e-12;
            double margin2 = 1.0 / std::sqrt(w2[0] * w2[0] + w2[1] * w2[1]);
            CHECK((!feasible || margin2 <= sol.margin + 1e-12));
        }
    }
    SUBCASE("solution is a function of the sample as a set") {
        Subsample s = realizable_draw(20, 7);
        SeparatorSolution a = hard_margin_solve(s);
        std::reverse(s.begin(), s.end());
        SeparatorSolution b = hard_margin_solve(s);
        CHECK(a.w == b.w);
        CHECK(a.b == b.b);
    }
}

TEST_CASE("essential support vectors") {
    SUBCASE("d=1 two-point example keeps both points (size d+1)") {
        Subsample s{ex1(-1.0, -1), ex1(1.0, 1), ex1(1.8, 1), ex1(-1.9, -1)};
        Subsample ess = essential_support_vectors(s);
        CHECK(ess.size() == 2);
        CHECK(same_example_set(ess, {ex1(-1.0, -1), ex1(1.0, 1)}));
    }
    SUBCASE("generic d=2 data: at most d+1 = 3 points, re-solve reproduces (w, b)") {
        for (int rep = 0; rep < 500; ++rep) {
            Subsample s = realizable_draw(20, derive_seed(31, "svm-ess", 20, rep));
            SeparatorSolution full = hard_margin_solve(s);
            Subsample ess = essential_support_vectors(s);
            CHECK(static_cast<int>(ess.size()) <= 3);
            SeparatorSolution re = hard_margin_solve(ess);
            CHECK(std::abs(re.w[0] - full.w[0]) <= 1e-8);
            CHECK(std::abs(re.w[1] - full.w[1]) <= 1e-8);
            CHECK(std::abs(re.b - full.b) <= 1e-8);
        }
    }
}

TEST_CASE("svm compression scheme") {
    auto scheme = svm_scheme(2);

    SUBCASE("audit: valid, permutation invariant, stable on 200 seeded samples") {
        DistributionSpec spec;
        spec.marginal = uniform_ball(2);
        spec.f_star = make_homogeneous({1.0, 0.0});
        std::vector<Sample> samples;
        for (int i = 0; i < 200; ++i) {
            Rng pick(derive_seed(47, "svm-audit-size", 0, i));
            int n = 4 + static_cast<int>(pick.next_below(17));
            samples.push_back(generate_sample(spec, n, derive_seed(47, "svm-audit", 1, i)));
        }
        SchemeAudit a = audit(*scheme, samples);
        INFO(a.counterexample);
        CHECK(a.valid);
        CHECK(a.permutation_invariant);
        CHECK(a.stable);
        MESSAGE("svm scheme homogeneous (reported, not asserted): ", a.homogeneous);
    }
    SUBCASE("psi(n, 1) <= k = 3 on 7-point sets") {
        for (int rep = 0; rep < 30; ++rep) {
            Subsample s = realizable_draw(7, derive_seed(53, "svm-psi", 7, rep));
            PsiCount c = count_psi(*scheme, s, 1);
            CHECK(c.value <= 3);
        }
    }
    SUBCASE("degenerate collinear positives still give a valid scheme") {
        Subsample s{ex2(0.5, 0.0, 1), ex2(0.5, 0.1, 1), ex2(0.5, -0.1, 1), ex2(0.5, 0.05, 1),
                    ex2(-0.5, 0.0, -1), ex2(-0.5, 0.1, -1)};
        Predictor f = scheme->train_checked(s);
        for (const auto& e : s) CHECK(f(e.x) == e.y);
    }
    SUBCASE("single-class sample compresses to one point and reconstructs the constant") {
        Subsample s{ex2(0.1, 0.2, 1), ex2(0.3, -0.2, 1), ex2(-0.4, 0.5, 1)};
        Subsample k = scheme->compress(s);
        CHECK(k.size() == 1);
        Predictor f = scheme->reconstruct(k);
        CHECK(f({{-0.9, -0.9}, -1}) == 1.0);
    }
}
