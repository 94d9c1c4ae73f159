#include "risklab/svm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace risklab {

namespace {

constexpr double kLambdaTol = 1e-12;
constexpr double kFeasTol = 1e-9;
constexpr double kActiveTol = 1e-6;
constexpr double kReproduceTol = 1e-8;

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Gaussian elimination with partial pivoting; returns false on a tiny pivot.
bool solve_dense(std::vector<double> a, Vec rhs, int n, Vec& out) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * n + col]))
                piv = r;
        if (std::abs(a[static_cast<std::size_t>(piv) * n + col]) < 1e-12) return false;
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(piv) * n + c], a[static_cast<std::size_t>(col) * n + c]);
            std::swap(rhs[static_cast<std::size_t>(piv)], rhs[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = a[static_cast<std::size_t>(r) * n + col] / a[static_cast<std::size_t>(col) * n + col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * out[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

struct Problem {
    std::vector<Vec> x;
    Vec y;
    int n = 0;
    int dim = 0;
};

struct Candidate {
    Vec w;
    double b = 0.0;
    Vec lambda;              // multipliers on the working set
    std::vector<int> w_set;  // sorted indices into the problem
};

// Working-set subproblem: y_i (w.x_i + b) = 1 on W with w = sum lambda y x.
std::optional<Candidate> solve_working_set(const Problem& pr, const std::vector<int>& w_set) {
    const int m = static_cast<int>(w_set.size());
    std::vector<double> a(static_cast<std::size_t>(m + 1) * (m + 1), 0.0);
    Vec rhs(static_cast<std::size_t>(m + 1), 1.0);
    rhs[static_cast<std::size_t>(m)] = 0.0;
    for (int i = 0; i < m; ++i) {
        const int wi = w_set[static_cast<std::size_t>(i)];
        for (int j = 0; j < m; ++j) {
            const int wj = w_set[static_cast<std::size_t>(j)];
            a[static_cast<std::size_t>(i) * (m + 1) + j] =
                pr.y[static_cast<std::size_t>(wi)] * pr.y[static_cast<std::size_t>(wj)] *
                dot(pr.x[static_cast<std::size_t>(wi)], pr.x[static_cast<std::size_t>(wj)]);
        }
        a[static_cast<std::size_t>(i) * (m + 1) + m] = pr.y[static_cast<std::size_t>(wi)];
        a[static_cast<std::size_t>(m) * (m + 1) + i] = pr.y[static_cast<std::size_t>(wi)];
    }
    Vec sol;
    if (!solve_dense(std::move(a), std::move(rhs), m + 1, sol)) return std::nullopt;
    Candidate c;
    c.w_set = w_set;
    c.lambda.assign(sol.begin(), sol.begin() + m);
    c.b = sol[static_cast<std::size_t>(m)];
    c.w.assign(static_cast<std::size_t>(pr.dim), 0.0);
    for (int i = 0; i < m; ++i) {
        const int wi = w_set[static_cast<std::size_t>(i)];
        for (int d = 0; d < pr.dim; ++d)
            c.w[static_cast<std::size_t>(d)] += c.lambda[static_cast<std::size_t>(i)] *
                                                pr.y[static_cast<std::size_t>(wi)] *
                                                pr.x[static_cast<std::size_t>(wi)][static_cast<std::size_t>(d)];
    }
    return c;
}

// Full KKT check: dual feasibility, stationarity in b, primal feasibility
// everywhere, working-set constraints active. A passing candidate is the
// unique maximum-margin separator.
bool kkt_verified(const Problem& pr, const Candidate& c) {
    double sum_ly = 0.0;
    for (std::size_t i = 0; i < c.w_set.size(); ++i) {
        if (c.lambda[i] < -kLambdaTol) return false;
        sum_ly += c.lambda[i] * pr.y[static_cast<std::size_t>(c.w_set[i])];
    }
    if (std::abs(sum_ly) > 1e-9) return false;
    for (int i = 0; i < pr.n; ++i) {
        double v = pr.y[static_cast<std::size_t>(i)] * (dot(c.w, pr.x[static_cast<std::size_t>(i)]) + c.b);
        if (v < 1.0 - kFeasTol) return false;
    }
    for (int wi : c.w_set) {
        double v = pr.y[static_cast<std::size_t>(wi)] * (dot(c.w, pr.x[static_cast<std::size_t>(wi)]) + c.b);
        if (std::abs(v - 1.0) > 1e-7) return false;
    }
    return true;
}

std::vector<int> closest_opposite_pair(const Problem& pr) {
    int i0 = -1, j0 = -1;
    double best = 0.0;
    for (int i = 0; i < pr.n; ++i)
        for (int j = i + 1; j < pr.n; ++j) {
            if (pr.y[static_cast<std::size_t>(i)] == pr.y[static_cast<std::size_t>(j)]) continue;
            double d2 = 0.0;
            for (int c = 0; c < pr.dim; ++c) {
                double d = pr.x[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] -
                           pr.x[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
                d2 += d * d;
            }
            if (i0 < 0 || d2 < best) {
                best = d2;
                i0 = i;
                j0 = j;
            }
        }
    if (i0 < 0) throw solver_error("svm: sample contains a single class");
    return {i0, j0};
}

// Fast path: textbook add/drop working-set iteration. Converges on
// non-degenerate instances; bails out (nullopt) on singular systems or
// cycling so the caller can fall back to the exhaustive search.
std::optional<Candidate> active_set_iterate(const Problem& pr) {
    std::vector<int> w_set = closest_opposite_pair(pr);
    std::sort(w_set.begin(), w_set.end());
    for (int iter = 0; iter < 80; ++iter) {
        auto cand = solve_working_set(pr, w_set);
        if (!cand) return std::nullopt;
        int drop = -1;
        for (std::size_t i = 0; i < w_set.size(); ++i)
            if (cand->lambda[i] < -kLambdaTol &&
                (drop < 0 || cand->lambda[i] < cand->lambda[static_cast<std::size_t>(drop)]))
                drop = static_cast<int>(i);
        if (drop >= 0 && w_set.size() > 1) {
            w_set.erase(w_set.begin() + drop);
            continue;
        }
        int worst = -1;
        double worst_v = 1.0 - kFeasTol;
        for (int i = 0; i < pr.n; ++i) {
            double v = pr.y[static_cast<std::size_t>(i)] * (dot(cand->w, pr.x[static_cast<std::size_t>(i)]) + cand->b);
            if (v < worst_v) {
                worst_v = v;
                worst = i;
            }
        }
        if (worst < 0) return cand;
        if (std::find(w_set.begin(), w_set.end(), worst) != w_set.end()) return std::nullopt;
        w_set.push_back(worst);
        std::sort(w_set.begin(), w_set.end());
    }
    return std::nullopt;
}

// Schlesinger-Kozinec iteration for the closest pair of convex hull points;
// used only to rank candidates by distance to the margin for the fallback.
struct HullPair {
    Vec u, v;
};

HullPair sk_closest_hull_points(const Problem& pr, int max_iter = 20000) {
    std::vector<int> pair = closest_opposite_pair(pr);
    int pi = pr.y[static_cast<std::size_t>(pair[0])] > 0 ? pair[0] : pair[1];
    int ni = pr.y[static_cast<std::size_t>(pair[0])] > 0 ? pair[1] : pair[0];
    HullPair hp{pr.x[static_cast<std::size_t>(pi)], pr.x[static_cast<std::size_t>(ni)]};
    Vec diff(static_cast<std::size_t>(pr.dim));
    for (int it = 0; it < max_iter; ++it) {
        for (int c = 0; c < pr.dim; ++c) diff[static_cast<std::size_t>(c)] = hp.u[static_cast<std::size_t>(c)] - hp.v[static_cast<std::size_t>(c)];
        double best_gain = -1e-14;
        int best_i = -1;
        double best_t = 0.0;
        bool best_pos = true;
        for (int i = 0; i < pr.n; ++i) {
            const Vec& xi = pr.x[static_cast<std::size_t>(i)];
            const bool pos = pr.y[static_cast<std::size_t>(i)] > 0;
            const Vec& anchor = pos ? hp.u : hp.v;
            double g = 0.0, nn = 0.0;
            for (int c = 0; c < pr.dim; ++c) {
                double step = xi[static_cast<std::size_t>(c)] - anchor[static_cast<std::size_t>(c)];
                g += (pos ? diff[static_cast<std::size_t>(c)] : -diff[static_cast<std::size_t>(c)]) * step;
                nn += step * step;
            }
            if (g >= 0.0 || nn < 1e-30) continue; // no descent toward this vertex
            double t = std::min(1.0, -g / nn);
            double gain = -g * t - 0.5 * nn * t * t; // decrease of ||u - v||^2 / 2
            if (gain > best_gain) {
                best_gain = gain;
                best_i = i;
                best_t = t;
                best_pos = pos;
            }
        }
        if (best_i < 0 || best_gain < 1e-14) break;
        Vec& target = best_pos ? hp.u : hp.v;
        const Vec& xi = pr.x[static_cast<std::size_t>(best_i)];
        for (int c = 0; c < pr.dim; ++c)
            target[static_cast<std::size_t>(c)] += best_t * (xi[static_cast<std::size_t>(c)] - target[static_cast<std::size_t>(c)]);
    }
    return hp;
}

// Exhaustive fallback: rank points by distance to the estimated margin, then
// search working sets of size <= d+1 in deterministic order until one passes
// the full KKT check. Carathéodory guarantees such a set exists.
std::optional<Candidate> exhaustive_search(const Problem& pr, const Subsample& sorted_sample) {
    HullPair hp = sk_closest_hull_points(pr);
    Vec w_est(static_cast<std::size_t>(pr.dim));
    double q = 0.0;
    for (int c = 0; c < pr.dim; ++c) {
        w_est[static_cast<std::size_t>(c)] = hp.u[static_cast<std::size_t>(c)] - hp.v[static_cast<std::size_t>(c)];
        q += w_est[static_cast<std::size_t>(c)] * w_est[static_cast<std::size_t>(c)];
    }
    if (q < 1e-12) return std::nullopt; // hulls touch: not separable
    double b_est = 0.0;
    for (int c = 0; c < pr.dim; ++c)
        b_est -= 0.5 * (hp.u[static_cast<std::size_t>(c)] + hp.v[static_cast<std::size_t>(c)]) * w_est[static_cast<std::size_t>(c)];

    std::vector<int> pool(static_cast<std::size_t>(pr.n));
    for (int i = 0; i < pr.n; ++i) pool[static_cast<std::size_t>(i)] = i;
    auto margin_gap = [&](int i) {
        double v = pr.y[static_cast<std::size_t>(i)] * (dot(w_est, pr.x[static_cast<std::size_t>(i)]) + b_est);
        return std::abs(v - 0.5 * q); // active points sit at w_est.x + b = +-q/2
    };
    std::sort(pool.begin(), pool.end(), [&](int a, int b) {
        double ga = margin_gap(a), gb = margin_gap(b);
        if (ga != gb) return ga < gb;
        return example_less(sorted_sample[static_cast<std::size_t>(a)], sorted_sample[static_cast<std::size_t>(b)]);
    });
    if (static_cast<int>(pool.size()) > 16) pool.resize(16);

    const int pool_n = static_cast<int>(pool.size());
    const int max_size = std::min(pr.dim + 1, pool_n);
    std::vector<int> sel;
    std::optional<Candidate> found;
    std::function<bool(int, int)> rec = [&](int start, int remaining) {
        if (remaining == 0) {
            bool pos = false, neg = false;
            for (int s : sel) (pr.y[static_cast<std::size_t>(s)] > 0 ? pos : neg) = true;
            if (!pos || !neg) return false;
            std::vector<int> w_set = sel;
            std::sort(w_set.begin(), w_set.end());
            auto cand = solve_working_set(pr, w_set);
            if (cand && kkt_verified(pr, *cand)) {
                found = cand;
                return true;
            }
            return false;
        }
        for (int i = start; i <= pool_n - remaining; ++i) {
            sel.push_back(pool[static_cast<std::size_t>(i)]);
            if (rec(i + 1, remaining - 1)) return true;
            sel.pop_back();
        }
        return false;
    };
    for (int size = 2; size <= max_size && !found; ++size) rec(0, size);
    return found;
}

bool has_both_classes(const Subsample& s) {
    bool pos = false, neg = false;
    for (const auto& e : s) (e.y > 0 ? pos : neg) = true;
    return pos && neg;
}

} // namespace

SeparatorSolution hard_margin_solve(const Subsample& sample) {
    if (sample.empty()) throw config_error("svm on empty sample");
    const int dim = static_cast<int>(sample.front().x.x.size());
    if (dim > 10) throw config_error("svm solver limited to d <= 10");
    if (sample.size() > 10000) throw capacity_error("svm solver limited to n <= 10000");
    check_consistent_labels(sample);

    // value-sorted copy, so the solution is a function of the sample as a set
    std::vector<int> order(sample.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return example_less(sample[static_cast<std::size_t>(a)], sample[static_cast<std::size_t>(b)]);
    });
    Subsample sorted;
    sorted.reserve(sample.size());
    for (int idx : order) sorted.push_back(sample[static_cast<std::size_t>(idx)]);

    Problem pr;
    pr.n = static_cast<int>(sorted.size());
    pr.dim = dim;
    pr.x.resize(static_cast<std::size_t>(pr.n));
    pr.y.resize(static_cast<std::size_t>(pr.n));
    for (int i = 0; i < pr.n; ++i) {
        pr.x[static_cast<std::size_t>(i)] = sorted[static_cast<std::size_t>(i)].x.x;
        pr.y[static_cast<std::size_t>(i)] = sorted[static_cast<std::size_t>(i)].y;
    }

    std::optional<Candidate> cand = active_set_iterate(pr);
    if (!cand || !kkt_verified(pr, *cand)) cand = exhaustive_search(pr, sorted);
    if (!cand) throw solver_error("svm: sample not separable within tolerance");

    SeparatorSolution sol;
    sol.w = cand->w;
    sol.b = cand->b;
    double norm = std::sqrt(dot(sol.w, sol.w));
    if (norm < 1e-12) throw solver_error("svm: degenerate zero separator");
    sol.margin = 1.0 / norm;
    if (sol.margin < 1e-6) throw solver_error("svm: margin below 1e-6");

    bool pos_active = false, neg_active = false;
    for (int i = 0; i < pr.n; ++i) {
        double v = pr.y[static_cast<std::size_t>(i)] * (dot(sol.w, pr.x[static_cast<std::size_t>(i)]) + sol.b);
        if (v < 1.0 - kReproduceTol)
            throw solver_error("svm: sample not separable within tolerance");
        if (std::abs(v - 1.0) <= kActiveTol) {
            sol.active_indices.push_back(order[static_cast<std::size_t>(i)]);
            (pr.y[static_cast<std::size_t>(i)] > 0 ? pos_active : neg_active) = true;
        }
    }
    if (!pos_active || !neg_active)
        throw solver_error("svm: active set misses one class side");
    std::sort(sol.active_indices.begin(), sol.active_indices.end());
    return sol;
}

namespace {

bool reproduces(const Subsample& subset, const SeparatorSolution& full) {
    if (!has_both_classes(subset)) return false;
    try {
        SeparatorSolution s = hard_margin_solve(subset);
        for (std::size_t c = 0; c < full.w.size(); ++c)
            if (std::abs(s.w[c] - full.w[c]) > kReproduceTol) return false;
        return std::abs(s.b - full.b) <= kReproduceTol;
    } catch (const solver_error&) {
        return false;
    }
}

} // namespace

Subsample essential_support_vectors(const Subsample& sample) {
    SeparatorSolution full = hard_margin_solve(sample);
    Subsample actives;
    for (int idx : full.active_indices) actives.push_back(sample[static_cast<std::size_t>(idx)]);
    std::sort(actives.begin(), actives.end(), example_less);

    // greedy deletion pass
    Subsample cur = actives;
    for (const auto& e : actives) {
        if (cur.size() <= 2) break;
        Subsample cand;
        bool removed = false;
        for (const auto& o : cur) {
            if (!removed && example_equal(o, e)) {
                removed = true;
                continue;
            }
            cand.push_back(o);
        }
        if (removed && reproduces(cand, full)) cur = std::move(cand);
    }

    // exhaustive refinement guarantees minimality at desk scale
    const int m = static_cast<int>(actives.size());
    if (m <= 12) {
        for (int size = 2; size < static_cast<int>(cur.size()); ++size) {
            std::vector<int> sel(static_cast<std::size_t>(size));
            Subsample found;
            std::function<bool(int, int)> rec = [&](int start, int chosen) {
                if (chosen == size) {
                    Subsample cand;
                    for (int s : sel) cand.push_back(actives[static_cast<std::size_t>(s)]);
                    if (reproduces(cand, full)) {
                        found = cand;
                        return true;
                    }
                    return false;
                }
                for (int i = start; i < m; ++i) {
                    sel[static_cast<std::size_t>(chosen)] = i;
                    if (rec(i + 1, chosen + 1)) return true;
                }
                return false;
            };
            if (rec(0, 0)) {
                cur = found;
                break;
            }
        }
    }
    const int dim = static_cast<int>(sample.front().x.x.size());
    if (static_cast<int>(cur.size()) > dim + 1)
        throw scheme_error("svm: essential set larger than d + 1");
    return cur;
}

namespace {

class SvmScheme final : public CompressionScheme {
public:
    explicit SvmScheme(int dim) : dim_(dim) {}

    std::string id() const override { return "svm"; }
    int size_bound() const override { return dim_ + 1; }

    Subsample compress(const Subsample& sample) const override {
        check_consistent_labels(sample);
        if (!has_both_classes(sample)) {
            // constant-label sample: keep the lexicographically smallest example
            Subsample out{*std::min_element(sample.begin(), sample.end(), example_less)};
            return out;
        }
        return essential_support_vectors(sample);
    }

    Predictor reconstruct(const Subsample& compressed) const override {
        if (compressed.empty()) throw scheme_error("svm: empty compression set");
        if (!has_both_classes(compressed)) {
            double label = compressed.front().y;
            return [label](const Point&) { return label; };
        }
        SeparatorSolution sol = hard_margin_solve(compressed);
        Vec w = sol.w;
        double b = sol.b;
        return [w, b](const Point& p) {
            double s = b;
            for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * p.x[c];
            return s >= 0.0 ? 1.0 : -1.0;
        };
    }

private:
    int dim_;
};

} // namespace

std::unique_ptr<CompressionScheme> svm_scheme(int dim) {
    if (dim < 1 || dim > 10) throw config_error("svm scheme needs 1 <= d <= 10");
    return std::make_unique<SvmScheme>(dim);
}

} // namespace risklab
