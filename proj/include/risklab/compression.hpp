#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "risklab/domain.hpp"

namespace risklab {

using Subsample = std::vector<LabeledExample>;
using Predictor = std::function<double(const Point&)>;

bool example_less(const LabeledExample& a, const LabeledExample& b);  // lexicographic (x, y)
bool example_equal(const LabeledExample& a, const LabeledExample& b); // exact comparison
bool same_example_set(Subsample a, Subsample b);                      // multiset equality
bool subsample_included(const Subsample& part, const Subsample& whole);

// Rejects duplicate x with conflicting labels (impossible under realizability).
void check_consistent_labels(const Subsample& sample);

// A size-k sample compression scheme: a permutation-invariant compressor and
// a reconstruction map that must relabel the whole sample correctly.
class CompressionScheme {
public:
    virtual ~CompressionScheme() = default;
    virtual std::string id() const = 0;
    virtual int size_bound() const = 0; // declared k
    virtual Subsample compress(const Subsample& sample) const = 0;
    virtual Predictor reconstruct(const Subsample& compressed) const = 0;

    // reconstruct(compress(sample)), checked against every sample label
    Predictor train_checked(const Subsample& sample) const;
};

// Intersection-closed closure schemes: compression set = extreme positive
// examples, reconstruction = smallest consistent box.
std::unique_ptr<CompressionScheme> closure_scheme_intervals();
std::unique_ptr<CompressionScheme> closure_scheme_rectangles(int dim);

// Smallest box containing the positive examples (lo > hi when there are none).
Hypothesis closure_box(const Subsample& compressed, int dim);

// Conservative online learner: state changes only on prediction mistakes.
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;
    virtual std::unique_ptr<OnlineLearner> clone() const = 0;
    virtual double predict(const Point& p) const = 0;
    virtual void update(const Point& p, double y) = 0; // called only on mistakes
    virtual int mistake_bound() const = 0;

    // processes one example; returns true (and updates) iff it was a mistake
    bool observe(const LabeledExample& e);
};

std::unique_ptr<OnlineLearner> halving_learner(std::shared_ptr<const HypothesisClass> cls);
std::unique_ptr<OnlineLearner> perceptron_learner(int dim, int mistake_cap);

// Compression scheme from a conservative online learner run over the sample
// sorted by the total order on X (lexicographic on coordinates, exact
// comparison). Compression set = the mistake examples.
std::unique_ptr<CompressionScheme> online_to_batch(std::shared_ptr<const OnlineLearner> prototype,
                                                   std::string id);

struct MajorityVote {
    Predictor predict;               // sign(f1 + f2 + f3)
    std::array<Predictor, 3> parts;  // reconstructions on S_{1/3}, S_{2/3}, S
    int n_used = 0;                  // after truncation to a multiple of 3
};

MajorityVote majority_of_three(const CompressionScheme& scheme, const Sample& sample);

struct SchemeAudit {
    bool valid = true;
    bool permutation_invariant = true;
    bool stable = true;
    bool homogeneous = true; // refinement of stable: reported false unless stable
    int samples_checked = 0;
    std::string counterexample; // first failure, human-readable
};

// Exhaustive deletion audit over the given realizable samples, plus validity
// and permutation invariance (5 seeded shuffles per sample).
SchemeAudit audit(const CompressionScheme& scheme, const std::vector<Sample>& samples);

struct PsiCount {
    int n = 0;
    int p = 0;
    long long value = 0;
    std::string scheme_id;
};

// Exhaustive count over all (n+p choose p) removals of p points such that the
// reconstruction trained on the remaining n misclassifies every removed point.
PsiCount count_psi(const CompressionScheme& scheme, const Subsample& points, int p);

} // namespace risklab
