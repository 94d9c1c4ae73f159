#pragma once

#include <optional>
#include <string>
#include <vector>

#include "risklab/domain.hpp"
#include "risklab/entropy.hpp"

namespace risklab {

struct DistributionBlock {
    std::string marginal = "uniform-ball"; // uniform-ball | uniform-sphere | finite-support
    int dim = 2;
    std::string noise = "realizable"; // realizable | massart | regression
    double margin = 1.0;
    double sigma = 0.0;
    std::vector<Vec> atoms; // finite support rows
    Vec weights;
    int fstar_index = 0; // which class member is f*
};

struct ClassBlock {
    std::string kind = "homogeneous-halfspace"; // | finite | constant-grid | interval | rectangle
    int dim = 2;
    int count = 720;
    double lo = -0.5, hi = 0.5;        // constant grid range
    std::vector<Vec> tables;           // finite kind rows
};

struct LearnerBlock {
    std::string kind = "net-erm"; // net-erm | scheme | majority3 | skeleton-l2 | erm-full | constant
    std::string scheme = "intervals"; // intervals | rectangles | svm | halving | perceptron
    double beta = 1.0;
    double B = 1.0;
    std::string variant = "cor"; // cor | mainbound
    int cloud_points = kCloudMcPoints;
    int eval_points = kRiskMcPoints;
};

struct ExperimentConfig {
    std::string subcommand; // entropy | net-erm | compress | svm | experiment | audit
    std::vector<int> n_grid{200};
    int trials = 200;
    double delta = 0.05;
    std::uint64_t master_seed = 1;
    int jobs = 0;
    std::string format = "csv";
    std::string out_dir = "out";
    std::string bound;  // bound id for `experiment`
    std::string scheme; // scheme for `audit` / `compress` / `experiment`
    std::vector<double> epsilons{0.05, 0.1, 0.2, 0.4};
    double k_param = 0.0; // bound parameter k (0 = derive from the scheme)
    double h = 0.25;      // adversarial margin
    int packing_cap = 64;
    DistributionBlock distribution;
    ClassBlock cls;
    LearnerBlock learner;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors; // all validation errors, not just the first
};

// Line-based key = value format with [section] headers and # comments;
// lists are comma-separated. Unknown keys are reported with a nearest-key
// suggestion; every validation error is collected.
ParseResult parse_config(const std::string& text);

// Requirements that depend on the subcommand (missing keys listed by name).
std::vector<std::string> validate_for_subcommand(const ExperimentConfig& cfg);

// Materialization into domain objects.
HypothesisClass build_class(const ExperimentConfig& cfg);
DistributionSpec build_distribution(const ExperimentConfig& cfg, const HypothesisClass& cls);

// Round-trip of the resolved configuration, written next to the outputs.
std::string render_config(const ExperimentConfig& cfg);

} // namespace risklab
