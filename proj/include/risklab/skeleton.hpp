#pragma once

#include "risklab/entropy.hpp"

namespace risklab {

// Proper eta-cover of a cloud; member_indices are hypothesis indices sorted
// ascending, so lexicographic tie-breaking by net position equals
// tie-breaking by hypothesis index.
struct EpsilonNet {
    std::vector<int> member_indices;
    double eta = 0.0;
    int r = 1;
};

EpsilonNet build_epsilon_net(EntropySolver& solver, double eta);

enum class EtaVariant { cor, mainbound };

// Net radius formulas; all proportionality constants are 1 and log(1/delta)
// is the plain natural log, so eta -> 0 as delta -> 1.
//   cor:       (fp + B log(1/delta)/n)^{1/(2-beta)}
//   mainbound: B (fp + B log(1/delta)/n)^{beta/(2-beta)}
double select_eta(int n, double delta, double beta, double B, const FixedPointResult& fp,
                  EtaVariant variant);

struct NetErmOutput {
    int chosen_index = -1;      // position in the net
    int hypothesis_index = -1;  // index into the source class
    double empirical_risk = 0.0;
    double eta_used = 0.0;
    int tie_count = 0;
};

NetErmOutput net_erm(const EpsilonNet& net, const MetricCloud& cloud, const Sample& sample,
                     LossKind loss);

// Report on the margin condition P|g| >= c B (Pg)^beta over net members close
// to f*, plus the tail construction for constant-margin Massart specs.
struct StrongerCondReport {
    double eta = 0.0, beta = 1.0, B = 1.0;
    std::vector<int> feasible; // net positions with P|g| <= eta
    std::vector<int> eligible; // net positions with P|g| in [eta/2, 2 eta]
    bool vacuous = false;      // no member with P|g| <= eta
    bool holds_c1 = false, holds_c05 = false, holds_c025 = false;
    bool tail_computed = false;
    double t0 = 0.0, tail_mass = 0.0, tail_bound = 0.0;
    bool tail_ok = false;
};

StrongerCondReport check_strongercond(const EpsilonNet& net, const MetricCloud& excess_cloud,
                                      double eta, double beta, double B);

struct SkeletonRegressionResult {
    NetErmOutput erm;
    EpsilonNet net;
    FixedPointResult zeta;
    double eta = 0.0;
    MetricCloud cloud; // raw-class L2 cloud the net was built on
};

// ERM over an L2(P) eta-net of the raw class, square loss, well-specified
// bounded regression. eta = zeta(F, 1/n) + sqrt(log(1/delta)/n).
SkeletonRegressionResult skeleton_l2_regression(const HypothesisClass& cls,
                                                const DistributionSpec& spec,
                                                const Sample& sample, double delta,
                                                int m = kCloudMcPoints,
                                                std::uint64_t seed = kEvalSeed);

enum class ShiftDirection { forward, reverse };

// forward: sup_g (Pg - (1+c) Pn g); reverse: sup_g (Pn g - (1+2c)/(1+c) Pg).
// Pg comes from the cloud; Pn g is evaluated on the sample through the
// cloud's class provenance.
double shifted_process_sup(const MetricCloud& cloud, const Sample& sample, double c,
                           ShiftDirection dir);

// Pg of one cloud member (weighted mean of its value vector).
double cloud_mean(const MetricCloud& cloud, int member);

// Pn g of one cloud member on a fresh sample (loss or excess-loss, per mode).
double empirical_cloud_value(const MetricCloud& cloud, int member, const Sample& sample);

} // namespace risklab
