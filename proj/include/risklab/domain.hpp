#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "risklab/errors.hpp"
#include "risklab/rng.hpp"

namespace risklab {

using Vec = std::vector<double>;

// Evaluation point. `atom` indexes a finite-support marginal's atom list
// (-1 when the point came from a continuous marginal).
struct Point {
    Vec x;
    int atom = -1;
};

struct LabeledExample {
    Point x;
    double y = 0.0; // +/-1 for binary labels, real in [-1,1] for square loss
};

struct Sample {
    std::vector<LabeledExample> examples;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(examples.size()); }
};

enum class LossKind { binary, square };

enum class ClassKind {
    finite,                // explicit label vectors over a finite domain
    homogeneous_halfspace, // sign(w.x)
    affine_halfspace,      // sign(w.x + b)
    interval,              // +1 inside [lo, hi] in R^1
    rectangle,             // +1 inside an axis-aligned box in R^d
    regression_grid        // constant functions with values on a grid in [-1,1]
};

// Self-contained hypothesis. Only the fields of the active kind are used.
struct Hypothesis {
    ClassKind kind = ClassKind::finite;
    Vec normal;           // halfspaces
    double offset = 0.0;  // affine halfspaces
    Vec lo, hi;           // interval/rectangle corners; lo > hi encodes "all negative"
    Vec table;            // finite kind: value per atom
    double constant = 0.0;
};

bool hypothesis_equal(const Hypothesis& a, const Hypothesis& b);

// Evaluates a hypothesis at a point. Finite-kind hypotheses require a valid
// atom index. Sign convention: boundary points classify as +1.
double evaluate(const Hypothesis& h, const Point& p);

struct HypothesisClass {
    ClassKind kind = ClassKind::finite;
    int dim = 1;
    std::vector<Hypothesis> members;

    int size() const { return static_cast<int>(members.size()); }
};

// Generators used throughout the experiments.
HypothesisClass make_halfspace_grid(int dim, int count);       // homogeneous, d=2 angular grid
HypothesisClass make_affine_halfspace(int dim);                // empty container class (kind only)
HypothesisClass make_finite_class(std::vector<Vec> tables);
HypothesisClass make_constant_grid(double lo, double hi, int count);

Hypothesis make_interval(double lo, double hi);
Hypothesis make_box(Vec lo, Vec hi);
Hypothesis all_negative_box(int dim);
Hypothesis make_homogeneous(Vec normal);
Hypothesis make_affine(Vec normal, double offset);

enum class MarginalKind { uniform_ball, uniform_sphere, finite_support };

struct Marginal {
    MarginalKind kind = MarginalKind::uniform_ball;
    int dim = 1;
    std::vector<Vec> atoms; // finite support only
    Vec weights;            // finite support only, sums to 1
};

enum class NoiseKind { realizable, massart, regression };

// Synthetic data distribution: a marginal plus a noise model around f*.
// realizable is massart with h = 1 (one code path, so the two are
// bit-identical for equal seeds).
struct DistributionSpec {
    Marginal marginal;
    NoiseKind noise = NoiseKind::realizable;
    double margin_h = 1.0; // massart margin, in (0, 1]
    double sigma = 0.0;    // regression noise level, in [0, 0.25]
    Hypothesis f_star;
};

void validate(const DistributionSpec& spec); // throws config_error

Marginal uniform_ball(int dim);
Marginal uniform_sphere(int dim);
Marginal finite_support(std::vector<Vec> atoms, Vec weights);

Point draw_point(const Marginal& m, Rng& rng);

// n i.i.d. draws, deterministic given (spec, n, seed).
Sample generate_sample(const DistributionSpec& spec, int n, std::uint64_t seed);

struct RiskValue {
    double value = 0.0;
    double stderr_ = 0.0;
    bool exact = true;
};

inline constexpr int kRiskMcPoints = 100000;   // MC fallback size for risk evaluation
inline constexpr std::uint64_t kEvalSeed = 0x5DEECE66DULL; // fixed evaluation seed

// P(f(X) != g(X)). Exact for finite support and for homogeneous halfspaces
// under rotationally symmetric marginals (angle / pi); MC otherwise.
RiskValue disagreement_mass(const Hypothesis& f, const Hypothesis& g,
                            const DistributionSpec& spec,
                            int mc_points = kRiskMcPoints,
                            std::uint64_t eval_seed = kEvalSeed);

// ||f - g||_{L2(P_X)}. Exact on finite support and constant functions.
RiskValue l2_distance(const Hypothesis& f, const Hypothesis& g,
                      const DistributionSpec& spec,
                      int mc_points = kRiskMcPoints,
                      std::uint64_t eval_seed = kEvalSeed);

// R(h) = E l(h(X), Y). The noise is integrated out analytically, so only the
// marginal may need Monte Carlo.
RiskValue true_risk(const Hypothesis& h, const DistributionSpec& spec, LossKind loss,
                    int mc_points = kRiskMcPoints,
                    std::uint64_t eval_seed = kEvalSeed);

// R(h) - R(f*), nonnegative under the well-specified noise models.
RiskValue excess_risk(const Hypothesis& h, const DistributionSpec& spec, LossKind loss,
                      int mc_points = kRiskMcPoints,
                      std::uint64_t eval_seed = kEvalSeed);

double loss_value(LossKind loss, double prediction, double y);
double empirical_risk(const Hypothesis& h, const Sample& sample, LossKind loss);

struct BernsteinEstimate {
    enum class Kind { L1, L2 } kind = Kind::L1;
    double beta = 0.0;
    double B = 1.0;
    int witness = -1; // index of the hypothesis attaining the binding ratio
    bool feasible = true;
};

// Smallest B >= 1 with P|g| <= B (Pg)^beta (L1) or Pg^2 <= B (Pg)^beta (L2)
// over the excess loss class of `cls`, maximizing beta over the grid.
// Hypotheses with Pg <= 1e-9 are treated as zero and must have numerator
// <= 1e-6, otherwise the beta is flagged infeasible.
BernsteinEstimate estimate_bernstein(const HypothesisClass& cls,
                                     const DistributionSpec& spec, LossKind loss,
                                     BernsteinEstimate::Kind kind,
                                     const std::vector<double>& beta_grid);

std::optional<int> find_f_star(const HypothesisClass& cls, const DistributionSpec& spec);

} // namespace risklab
