#pragma once

#include "risklab/compression.hpp"

namespace risklab {

struct SeparatorSolution {
    Vec w;
    double b = 0.0;
    double margin = 0.0;            // 1 / ||w||
    std::vector<int> active_indices; // input-sample positions with y (w.x + b) = 1 within 1e-6
};

// Maximum-margin separator via a working-set iteration on the dual, with a
// full KKT verification; degenerate instances fall back to an exhaustive
// verified search over working sets of size <= d+1 ranked by a closest
// hull-points estimate. The sample is value-sorted internally, so the result
// is a function of the sample as a set. Throws solver_error on non-separable
// or ill-conditioned input (margin below 1e-6).
SeparatorSolution hard_margin_solve(const Subsample& sample);

// Minimal subsample of active points whose separator reproduces the full
// solution within 1e-8: greedy deletion, then exhaustive refinement over the
// active points when there are at most 12 of them. Size is at most d + 1.
Subsample essential_support_vectors(const Subsample& sample);

// compress = essential support vectors, reconstruct = re-solve, k = d + 1.
// Single-class samples compress to their lexicographically smallest example
// and reconstruct to the constant label.
std::unique_ptr<CompressionScheme> svm_scheme(int dim);

} // namespace risklab
