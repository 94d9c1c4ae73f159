#pragma once

#include <memory>

#include "risklab/compression.hpp"
#include "risklab/skeleton.hpp"
#include "risklab/svm.hpp"

namespace risklab {

struct RiskRow {
    std::string learner_id;
    int n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double risk = 0.0;
    double excess = 0.0;
    double aux = 0.0;   // net size / compression size, learner-specific
    std::string status; // "ok" or the failure reason
};

struct RiskTable {
    std::vector<RiskRow> rows;
    std::uint64_t master_seed = 0;
    long decomp_checked = 0;    // pathwise decompositions evaluated
    long decomp_violations = 0; // must stay 0
};

struct TrialOutcome {
    double risk = 0.0, excess = 0.0, aux = 0.0;
    bool ok = true;
    std::string reason;
    int decomp_checked = 0;
    int decomp_violations = 0;
};

// A learner that can be driven by the trial engine. prepare(n) runs once per
// grid point (serial); run_trial must be safe to call concurrently.
class TrialLearner {
public:
    virtual ~TrialLearner() = default;
    virtual std::string id() const = 0;
    virtual void prepare(int n) { (void)n; }
    virtual TrialOutcome run_trial(const Sample& sample) const = 0;
};

// OpenMP trial engine: per-trial seed = derive_seed(master, id, n, trial),
// rows preallocated so the result does not depend on scheduling.
RiskTable run_trials(TrialLearner& learner, const DistributionSpec& spec,
                     const std::vector<int>& n_grid, int trials, std::uint64_t master_seed,
                     int jobs = 0);

// Serial reference implementation, kept for testing and benchmarking.
RiskTable run_trials_serial(TrialLearner& learner, const DistributionSpec& spec,
                            const std::vector<int>& n_grid, int trials,
                            std::uint64_t master_seed);

// ---- learners -------------------------------------------------------------

std::unique_ptr<TrialLearner> constant_learner(const DistributionSpec& spec, LossKind loss);

struct NetErmConfig {
    std::shared_ptr<const HypothesisClass> cls;
    double beta = 1.0;
    double B = 1.0;
    double delta = 0.05;
    EtaVariant variant = EtaVariant::cor;
    int cloud_points = kCloudMcPoints;
    std::uint64_t cloud_seed = kEvalSeed;
    bool check_decomposition = true;
    double decomp_c = 1.0;
    // optional substitute distribution for cloud construction, e.g. an exact
    // finite-support discretization of the marginal (must share f*)
    std::shared_ptr<const DistributionSpec> cloud_spec;
    // rotate the net by a seeded index offset each trial; requires an exactly
    // rotation-invariant setup (full angular class over a circle-grid cloud
    // whose atom count is a multiple of the class size), where every rotation
    // of an eta-cover is again an eta-cover
    bool rotate_net_per_trial = false;
};

std::unique_ptr<TrialLearner> net_erm_learner(const DistributionSpec& spec, NetErmConfig cfg);

// ERM over the whole finite class, with the aggregation-inequality
// decomposition R(f) - 2 R(f*) <= fwd_sup(c=1) + 2 rev_sup(c=1) checked
// pathwise on every trial.
std::unique_ptr<TrialLearner> full_erm_learner(const DistributionSpec& spec,
                                               std::shared_ptr<const HypothesisClass> cls,
                                               int cloud_points = kCloudMcPoints,
                                               std::uint64_t cloud_seed = kEvalSeed);

std::unique_ptr<TrialLearner> scheme_learner(const DistributionSpec& spec,
                                             std::shared_ptr<const CompressionScheme> scheme,
                                             int eval_points = kRiskMcPoints,
                                             std::uint64_t eval_seed = kEvalSeed);

std::unique_ptr<TrialLearner> majority_learner(const DistributionSpec& spec,
                                               std::shared_ptr<const CompressionScheme> scheme,
                                               int eval_points = kRiskMcPoints,
                                               std::uint64_t eval_seed = kEvalSeed);

struct SkeletonRegressionConfig {
    std::shared_ptr<const HypothesisClass> cls;
    double delta = 0.05;
    int cloud_points = kCloudMcPoints;
    std::uint64_t cloud_seed = kEvalSeed;
};

std::unique_ptr<TrialLearner> skeleton_regression_learner(const DistributionSpec& spec,
                                                          SkeletonRegressionConfig cfg);

// ---- bound verification ----------------------------------------------------

enum class BoundId {
    floyd_warmuth,         // k log(en/k)/(n-k) + log(1/d)/(n-k)
    expectation_k_over_n1, // k/(n+1), in expectation
    deviation_ek_log,      // e k log(1/d)/n
    pol,                   // k^2 / (n d^{1/k})
    mod_klogk,             // k log(k)/n + log(1/d)/n, fitted constant
    homogeneous_k_over_n,  // e k/n + e log(1/d)/n
    logconc_rate,          // (B d/n + B log(1/d)/n)^{1/(2-beta)}, fitted constant
    svm_dlogd,             // d log(d)/n + log(1/d)/n, fitted constant
};

const char* bound_name(BoundId id);
BoundId bound_from_name(const std::string& name);

struct BoundParams {
    double k = 0.0;
    double d = 0.0;
    double beta = 1.0;
    double B = 1.0;
};

// Formula values use the paper's truncated logarithm log(x) = ln(max(x, e)).
double bound_value(BoundId id, int n, double delta, const BoundParams& p);
bool bound_is_fitted(BoundId id);      // carries an unspecified constant
bool bound_is_expectation(BoundId id); // mean + 3 SE, not a quantile

struct BoundPerN {
    int n = 0;
    int trials_ok = 0;
    int trials_failed = 0;
    double mean = 0.0, mean_se = 0.0;
    double quantile = 0.0;
    double bound = 0.0;          // raw formula value
    double applied_bound = 0.0;  // fitted constant folded in when applicable
    double fitted_constant = 0.0;
    double violation_fraction = 0.0;
};

struct BoundReport {
    std::string bound_id;
    double delta = 0.0;
    bool expectation = false;
    bool fitted = false;
    double constant_smallest_n = 1.0; // per the design decision, fitted on the smallest n
    double constant_lsq = 1.0;        // least squares over the grid
    std::vector<BoundPerN> per_n;
    bool satisfied = false;
};

BoundReport verify_bound(const RiskTable& table, BoundId id, double delta,
                         const BoundParams& params);

// ---- rate fits ---------------------------------------------------------------

struct Statistic {
    enum class Kind { mean, quantile } kind = Kind::mean;
    double q = 0.95;
    static Statistic mean() { return {Kind::mean, 0.0}; }
    static Statistic quantile(double q) { return {Kind::quantile, q}; }
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    int points_used = 0;
    bool truncated_zeros = false;
};

RateFit rate_fit(const RiskTable& table, const Statistic& stat);

// ---- adversarial family -----------------------------------------------------

struct AdversarialReport {
    int d = 0, n = 0;
    double h = 0.0;
    double eps = 0.0;            // packing scale d(1-h)/(n h^2), capped to [0,1]
    int packing_size = 0;
    std::vector<double> mean_excess_per_f;
    double worst_mean_excess = 0.0;
    double lower_reference = 0.0; // d(1-h)/(n h), reference curve only
    double upper_value = 0.0;     // logconc formula with B = 1/h, beta = 1
    double fitted_constant = 0.0; // worst / upper_value
};

// Runs net ERM against the hard family P^f(Y=1|X) = (1 + f(X) h)/2 over a
// maximal angular packing of homogeneous halfspaces in d = 2. Enforces
// B = 1/h <= sqrt(n/d).
AdversarialReport adversarial_family_eval(int d, double h, int n, int packing_cap, int trials,
                                          double delta, int class_count, int cloud_points,
                                          std::uint64_t master_seed, int jobs = 0);

// ---- output -----------------------------------------------------------------

std::string risk_table_csv(const RiskTable& table);
void write_text_atomic(const std::string& path, const std::string& content);

} // namespace risklab
