#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "risklab/domain.hpp"

namespace risklab {

enum class CloudMode { loss_class, excess_loss_class, raw_class };
enum class CoverSolver { greedy, exact };
enum class FixedPointKind { gamma, gamma_bracket, gamma_star, zeta };

// Finite metric representation of a (loss) class: one value vector per
// hypothesis over weighted evaluation points, with L_r(P) distances.
struct MetricCloud {
    std::vector<Vec> vectors; // [hypothesis][point]
    Vec weights;              // per point, sums to 1
    int r = 1;                // L_r exponent, 1 or 2
    std::vector<int> labels;  // hypothesis index into the source class

    CloudMode mode = CloudMode::loss_class;
    LossKind loss = LossKind::binary;
    std::shared_ptr<const HypothesisClass> cls;
    std::shared_ptr<const DistributionSpec> spec;
    int f_star_index = -1; // index of f* in the class, -1 if absent

    int size() const { return static_cast<int>(vectors.size()); }
    int points() const { return static_cast<int>(weights.size()); }
    double distance(int i, int j) const;
};

inline constexpr int kCloudMcPoints = 10000; // default MC points for cloud construction
inline constexpr int kExactCoverCap = 24;    // exact solvers refuse larger clouds

// Builds the cloud. Exact evaluation points for finite-support marginals
// (atoms expanded over the label noise), m MC points with weight 1/m
// otherwise. Excess mode subtracts f*'s loss vector.
MetricCloud build_cloud(const HypothesisClass& cls, const DistributionSpec& spec, LossKind loss,
                        int m, std::uint64_t seed, CloudMode mode, int r = 1);

// Weighted pointwise min/max pair of L_r width <= the eps it was built for.
struct Bracket {
    Vec lower;
    Vec upper;
    double width = 0.0;
};

struct LocalEntropyProfile {
    std::vector<double> epsilons;
    std::vector<double> dloc;
    bool bracketing = false;
    double beta = 1.0;
    double B = 1.0;
};

struct FixedPointResult {
    double value = 0.0;
    double k = 0.0;
    FixedPointKind kind = FixedPointKind::gamma;
    std::vector<std::pair<double, double>> evidence; // (eps, k * Dloc at the transformed scale)
    bool crossed = false;  // a genuine crossing was bracketed inside (1e-6, 1]
    bool at_grid_min = false;
};

// Caches the pairwise distance matrix and per-scale ball masks so that
// repeated covering / local-entropy queries on the same cloud are cheap.
// Construction is the expensive step (OpenMP kernel); queries are
// single-threaded except for the sup over centers inside local_entropy.
class EntropySolver {
public:
    explicit EntropySolver(const MetricCloud& cloud, int jobs = 0);

    const MetricCloud& cloud() const { return *cloud_; }
    int size() const { return n_; }
    double diameter() const { return diam_; }
    double distance(int i, int j) const { return dist_[static_cast<std::size_t>(i) * n_ + j]; }

    // Minimal (exact) or greedy proper cover of the whole cloud by L_r balls
    // of radius eps, centers drawn from the cloud.
    int covering_number(double eps, CoverSolver solver);
    std::vector<int> cover_centers(double eps, CoverSolver solver);

    // Same, restricted to a subset of hypotheses (centers from the subset).
    int covering_number_subset(const std::vector<int>& members, double eps, CoverSolver solver);

    // Minimal number of eps-brackets covering the cloud, brackets generated
    // as pointwise min/max over cloud-vector subsets of size <= 4.
    int bracketing_number(double eps);
    int bracketing_number_subset(const std::vector<int>& members, double eps);
    std::vector<Bracket> bracket_cover(double eps);

    // sup over centers g of the cover / bracket count of cloud ∩ B(g, radius)
    // at scale eps. These are the building blocks of the local entropies.
    int covering_sup(double radius, double eps);
    int bracketing_sup(double radius, double eps);

    // D^loc: sup over gamma >= eps (dyadic grid capped at the diameter) and
    // over centers of log N(cloud ∩ B(g, 2B gamma^beta), gamma).
    double local_entropy(double eps, double beta, double B, bool bracketing);

    // Shared-grid profile over an eps list; dloc is non-increasing by
    // construction because all entries take suffix maxima over one grid.
    LocalEntropyProfile profile(std::vector<double> eps_grid, double beta, double B,
                                bool bracketing);

    FixedPointResult fixed_point(double k, double beta, double B, FixedPointKind kind);

    std::vector<int> ball_members(int center, double radius) const;

private:
    struct MaskTable;
    const MetricCloud* cloud_;
    int n_ = 0;
    int jobs_ = 0;
    std::vector<double> dist_;
    double diam_ = 0.0;
    std::map<double, std::shared_ptr<const MaskTable>> mask_cache_;
    std::map<std::tuple<double, double, double, bool>, double> dloc_memo_;
    std::map<std::pair<double, double>, int> cover_sup_memo_;
    std::map<std::pair<double, double>, int> bracket_sup_memo_;

    const MaskTable& masks(double scale);
    std::vector<double> dyadic_grid(double eps) const;
};

// One-shot convenience wrappers over EntropySolver.
int covering_number(const MetricCloud& cloud, double eps, CoverSolver solver);
int bracketing_number(const MetricCloud& cloud, double eps);
double local_entropy(const MetricCloud& cloud, double eps, double beta, double B,
                     bool bracketing = false);
FixedPointResult fixed_point(const MetricCloud& cloud, double k, double beta, double B,
                             FixedPointKind kind);

// Distance kernels: OpenMP and serial reference (kept for testing and the
// benchmark target). Row-major n*n output.
std::vector<double> pairwise_distances(const MetricCloud& cloud, int jobs = 0);
std::vector<double> pairwise_distances_serial(const MetricCloud& cloud);

} // namespace risklab
