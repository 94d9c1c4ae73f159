#include "risklab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace risklab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double sign_pm1(double t) { return t >= 0.0 ? 1.0 : -1.0; }

bool box_is_empty(const Hypothesis& h) {
    for (std::size_t j = 0; j < h.lo.size(); ++j)
        if (h.lo[j] > h.hi[j]) return true;
    return h.lo.empty();
}

bool rotationally_symmetric(const Marginal& m) {
    return m.kind == MarginalKind::uniform_ball || m.kind == MarginalKind::uniform_sphere;
}

// Mean of fn(point) under the marginal: exact sum over atoms for finite
// support, MC otherwise.
template <typename F>
RiskValue expect_marginal(const DistributionSpec& spec, F&& fn, int mc_points,
                          std::uint64_t eval_seed) {
    const Marginal& m = spec.marginal;
    if (m.kind == MarginalKind::finite_support) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            Point p{m.atoms[i], static_cast<int>(i)};
            s += m.weights[i] * fn(p);
        }
        return {s, 0.0, true};
    }
    Rng rng(mix64(eval_seed ^ 0xA5A5A5A5A5A5A5A5ULL));
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < mc_points; ++i) {
        Point p = draw_point(m, rng);
        double v = fn(p);
        s += v;
        s2 += v * v;
    }
    double mean = s / mc_points;
    double var = std::max(0.0, s2 / mc_points - mean * mean);
    return {mean, std::sqrt(var / mc_points), false};
}

} // namespace

bool hypothesis_equal(const Hypothesis& a, const Hypothesis& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ClassKind::finite:
            return a.table == b.table;
        case ClassKind::homogeneous_halfspace:
            return a.normal == b.normal;
        case ClassKind::affine_halfspace:
            return a.normal == b.normal && a.offset == b.offset;
        case ClassKind::interval:
        case ClassKind::rectangle:
            return a.lo == b.lo && a.hi == b.hi;
        case ClassKind::regression_grid:
            return a.constant == b.constant;
    }
    return false;
}

double evaluate(const Hypothesis& h, const Point& p) {
    switch (h.kind) {
        case ClassKind::finite:
            if (p.atom < 0 || p.atom >= static_cast<int>(h.table.size()))
                throw config_error("finite hypothesis evaluated outside its finite domain");
            return h.table[static_cast<std::size_t>(p.atom)];
        case ClassKind::homogeneous_halfspace:
            return sign_pm1(dot(h.normal, p.x));
        case ClassKind::affine_halfspace:
            return sign_pm1(dot(h.normal, p.x) + h.offset);
        case ClassKind::interval:
        case ClassKind::rectangle: {
            if (box_is_empty(h)) return -1.0;
            for (std::size_t j = 0; j < h.lo.size(); ++j)
                if (p.x[j] < h.lo[j] || p.x[j] > h.hi[j]) return -1.0;
            return 1.0;
        }
        case ClassKind::regression_grid:
            return h.constant;
    }
    return -1.0;
}

Hypothesis make_interval(double lo, double hi) {
    Hypothesis h;
    h.kind = ClassKind::interval;
    h.lo = {lo};
    h.hi = {hi};
    return h;
}

Hypothesis make_box(Vec lo, Vec hi) {
    Hypothesis h;
    h.kind = lo.size() == 1 ? ClassKind::interval : ClassKind::rectangle;
    h.lo = std::move(lo);
    h.hi = std::move(hi);
    return h;
}

Hypothesis all_negative_box(int dim) {
    Hypothesis h;
    h.kind = dim == 1 ? ClassKind::interval : ClassKind::rectangle;
    h.lo.assign(static_cast<std::size_t>(dim), 1.0);
    h.hi.assign(static_cast<std::size_t>(dim), -1.0);
    return h;
}

Hypothesis make_homogeneous(Vec normal) {
    if (norm(normal) == 0.0) throw config_error("halfspace normal must be nonzero");
    Hypothesis h;
    h.kind = ClassKind::homogeneous_halfspace;
    h.normal = std::move(normal);
    return h;
}

Hypothesis make_affine(Vec normal, double offset) {
    if (norm(normal) == 0.0) throw config_error("halfspace normal must be nonzero");
    Hypothesis h;
    h.kind = ClassKind::affine_halfspace;
    h.normal = std::move(normal);
    h.offset = offset;
    return h;
}

HypothesisClass make_halfspace_grid(int dim, int count) {
    if (dim != 2) throw config_error("angular halfspace grid is only defined in d = 2");
    if (count < 1) throw config_error("halfspace grid needs count >= 1");
    HypothesisClass cls;
    cls.kind = ClassKind::homogeneous_halfspace;
    cls.dim = 2;
    cls.members.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        double theta = 2.0 * kPi * j / count;
        cls.members.push_back(make_homogeneous({std::cos(theta), std::sin(theta)}));
    }
    return cls;
}

HypothesisClass make_affine_halfspace(int dim) {
    HypothesisClass cls;
    cls.kind = ClassKind::affine_halfspace;
    cls.dim = dim;
    return cls;
}

HypothesisClass make_finite_class(std::vector<Vec> tables) {
    HypothesisClass cls;
    cls.kind = ClassKind::finite;
    cls.dim = 1;
    for (auto& t : tables) {
        Hypothesis h;
        h.kind = ClassKind::finite;
        h.table = std::move(t);
        for (const auto& prev : cls.members)
            if (hypothesis_equal(prev, h)) throw config_error("duplicate hypothesis in finite class");
        cls.members.push_back(std::move(h));
    }
    return cls;
}

HypothesisClass make_constant_grid(double lo, double hi, int count) {
    if (count < 1 || lo > hi || lo < -1.0 || hi > 1.0)
        throw config_error("constant grid must lie inside [-1, 1]");
    HypothesisClass cls;
    cls.kind = ClassKind::regression_grid;
    cls.dim = 1;
    for (int j = 0; j < count; ++j) {
        Hypothesis h;
        h.kind = ClassKind::regression_grid;
        h.constant = count == 1 ? lo : lo + (hi - lo) * j / (count - 1);
        cls.members.push_back(h);
    }
    return cls;
}

Marginal uniform_ball(int dim) {
    if (dim < 1) throw config_error("marginal dimension must be >= 1");
    return {MarginalKind::uniform_ball, dim, {}, {}};
}

Marginal uniform_sphere(int dim) {
    if (dim < 1) throw config_error("marginal dimension must be >= 1");
    return {MarginalKind::uniform_sphere, dim, {}, {}};
}

Marginal finite_support(std::vector<Vec> atoms, Vec weights) {
    if (atoms.empty() || atoms.size() != weights.size())
        throw config_error("finite support needs matching nonempty atoms and weights");
    double s = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw config_error("finite support weights must be nonnegative");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw config_error("finite support weights must sum to 1");
    Marginal m;
    m.kind = MarginalKind::finite_support;
    m.dim = static_cast<int>(atoms.front().size());
    m.atoms = std::move(atoms);
    m.weights = std::move(weights);
    return m;
}

void validate(const DistributionSpec& spec) {
    if (spec.marginal.kind == MarginalKind::finite_support) {
        if (spec.marginal.atoms.empty()) throw config_error("empty pmf");
        double s = std::accumulate(spec.marginal.weights.begin(), spec.marginal.weights.end(), 0.0);
        if (std::abs(s - 1.0) > 1e-12) throw config_error("pmf weights must sum to 1");
    }
    if (spec.noise == NoiseKind::massart && (spec.margin_h <= 0.0 || spec.margin_h > 1.0))
        throw config_error("massart margin h must lie in (0, 1]");
    if (spec.noise == NoiseKind::regression && (spec.sigma < 0.0 || spec.sigma > 0.25))
        throw config_error("regression noise sigma must lie in [0, 0.25]");
    if (spec.noise == NoiseKind::regression && spec.f_star.kind == ClassKind::regression_grid &&
        std::abs(spec.f_star.constant) + spec.sigma > 1.0 + 1e-12)
        throw config_error("regression labels would leave [-1, 1]");
}

Point draw_point(const Marginal& m, Rng& rng) {
    switch (m.kind) {
        case MarginalKind::finite_support: {
            double u = rng.next_double();
            double acc = 0.0;
            for (std::size_t i = 0; i < m.atoms.size(); ++i) {
                acc += m.weights[i];
                if (u < acc || i + 1 == m.atoms.size())
                    return {m.atoms[i], static_cast<int>(i)};
            }
            return {m.atoms.back(), static_cast<int>(m.atoms.size()) - 1};
        }
        case MarginalKind::uniform_ball:
        case MarginalKind::uniform_sphere: {
            Vec x(static_cast<std::size_t>(m.dim));
            double n2 = 0.0;
            do {
                n2 = 0.0;
                for (auto& c : x) {
                    c = rng.next_gaussian();
                    n2 += c * c;
                }
            } while (n2 == 0.0);
            double inv = 1.0 / std::sqrt(n2);
            double radius = 1.0;
            if (m.kind == MarginalKind::uniform_ball)
                radius = std::pow(rng.next_double(), 1.0 / m.dim);
            for (auto& c : x) c *= inv * radius;
            return {std::move(x), -1};
        }
    }
    throw config_error("unknown marginal");
}

Sample generate_sample(const DistributionSpec& spec, int n, std::uint64_t seed) {
    if (n < 1) throw config_error("sample size must be >= 1");
    validate(spec);
    Rng rng(seed);
    Sample s;
    s.seed = seed;
    s.examples.reserve(static_cast<std::size_t>(n));
    const double h = spec.noise == NoiseKind::massart ? spec.margin_h : 1.0;
    for (int i = 0; i < n; ++i) {
        Point p = draw_point(spec.marginal, rng);
        double f = evaluate(spec.f_star, p);
        double y;
        if (spec.noise == NoiseKind::regression) {
            y = f + (rng.next_double() < 0.5 ? -spec.sigma : spec.sigma);
            if (std::abs(y) > 1.0 + 1e-12)
                throw config_error("regression label outside [-1, 1]; shrink f* or sigma");
        } else {
            // realizable == massart with h = 1: the flip draw is always consumed
            y = rng.next_double() < (1.0 + h) / 2.0 ? f : -f;
        }
        s.examples.push_back({std::move(p), y});
    }
    return s;
}

RiskValue disagreement_mass(const Hypothesis& f, const Hypothesis& g,
                            const DistributionSpec& spec, int mc_points,
                            std::uint64_t eval_seed) {
    if (hypothesis_equal(f, g)) return {0.0, 0.0, true};
    if (f.kind == ClassKind::homogeneous_halfspace && g.kind == ClassKind::homogeneous_halfspace &&
        rotationally_symmetric(spec.marginal)) {
        double c = dot(f.normal, g.normal) / (norm(f.normal) * norm(g.normal));
        c = std::clamp(c, -1.0, 1.0);
        return {std::acos(c) / kPi, 0.0, true};
    }
    return expect_marginal(
        spec, [&](const Point& p) { return evaluate(f, p) != evaluate(g, p) ? 1.0 : 0.0; },
        mc_points, eval_seed);
}

namespace {

RiskValue expect_sq_delta(const Hypothesis& f, const Hypothesis& g,
                          const DistributionSpec& spec, int mc_points,
                          std::uint64_t eval_seed) {
    if (f.kind == ClassKind::regression_grid && g.kind == ClassKind::regression_grid) {
        double d = f.constant - g.constant;
        return {d * d, 0.0, true};
    }
    return expect_marginal(
        spec,
        [&](const Point& p) {
            double d = evaluate(f, p) - evaluate(g, p);
            return d * d;
        },
        mc_points, eval_seed);
}

} // namespace

RiskValue l2_distance(const Hypothesis& f, const Hypothesis& g, const DistributionSpec& spec,
                      int mc_points, std::uint64_t eval_seed) {
    RiskValue sq = expect_sq_delta(f, g, spec, mc_points, eval_seed);
    double d = std::sqrt(std::max(0.0, sq.value));
    double se = d > 0.0 ? sq.stderr_ / (2.0 * d) : sq.stderr_;
    return {d, se, sq.exact};
}

RiskValue true_risk(const Hypothesis& h, const DistributionSpec& spec, LossKind loss,
                    int mc_points, std::uint64_t eval_seed) {
    validate(spec);
    if (loss == LossKind::binary) {
        const double margin = spec.noise == NoiseKind::massart ? spec.margin_h : 1.0;
        const double bayes = (1.0 - margin) / 2.0;
        RiskValue d = disagreement_mass(h, spec.f_star, spec, mc_points, eval_seed);
        return {bayes + margin * d.value, margin * d.stderr_, d.exact};
    }
    // square loss with zero-mean independent noise: R(h) = ||h - f*||^2 + sigma^2
    RiskValue sq = expect_sq_delta(h, spec.f_star, spec, mc_points, eval_seed);
    return {sq.value + spec.sigma * spec.sigma, sq.stderr_, sq.exact};
}

RiskValue excess_risk(const Hypothesis& h, const DistributionSpec& spec, LossKind loss,
                      int mc_points, std::uint64_t eval_seed) {
    if (loss == LossKind::binary) {
        const double margin = spec.noise == NoiseKind::massart ? spec.margin_h : 1.0;
        RiskValue d = disagreement_mass(h, spec.f_star, spec, mc_points, eval_seed);
        return {margin * d.value, margin * d.stderr_, d.exact};
    }
    RiskValue sq = expect_sq_delta(h, spec.f_star, spec, mc_points, eval_seed);
    return sq;
}

double loss_value(LossKind loss, double prediction, double y) {
    if (loss == LossKind::binary) return prediction != y ? 1.0 : 0.0;
    double d = prediction - y;
    return d * d;
}

double empirical_risk(const Hypothesis& h, const Sample& sample, LossKind loss) {
    double s = 0.0;
    for (const auto& e : sample.examples) s += loss_value(loss, evaluate(h, e.x), e.y);
    return s / sample.size();
}

namespace {

// L1 and L2 numerators of the Bernstein ratios for one excess-loss function.
struct ExcessMoments {
    double pg;  // Pg
    double l1;  // P|g|
    double l2;  // Pg^2
};

ExcessMoments excess_moments(const Hypothesis& f, const DistributionSpec& spec, LossKind loss,
                             int mc_points, std::uint64_t eval_seed) {
    if (loss == LossKind::binary) {
        // |g| = g^2 = 1[f != f*] pointwise, independent of the label draw
        const double margin = spec.noise == NoiseKind::massart ? spec.margin_h : 1.0;
        double d = disagreement_mass(f, spec.f_star, spec, mc_points, eval_seed).value;
        return {margin * d, d, d};
    }
    // two-point noise +-sigma: with D = f - f*,
    //   E_eps g   = D^2,  E_eps |g| = |D| max(|D|, 2 sigma),  E_eps g^2 = D^4 + 4 sigma^2 D^2
    const double sg = spec.sigma;
    auto moments = [&](auto&& proj) {
        return expect_marginal(
                   spec,
                   [&](const Point& p) {
                       double d = evaluate(f, p) - evaluate(spec.f_star, p);
                       return proj(d);
                   },
                   mc_points, eval_seed)
            .value;
    };
    if (f.kind == ClassKind::regression_grid && spec.f_star.kind == ClassKind::regression_grid) {
        double d = f.constant - spec.f_star.constant;
        return {d * d, std::abs(d) * std::max(std::abs(d), 2.0 * sg),
                d * d * d * d + 4.0 * sg * sg * d * d};
    }
    double pg = moments([](double d) { return d * d; });
    double l1 = moments([&](double d) { return std::abs(d) * std::max(std::abs(d), 2.0 * sg); });
    double l2 = moments([&](double d) { return d * d * d * d + 4.0 * sg * sg * d * d; });
    return {pg, l1, l2};
}

} // namespace

BernsteinEstimate estimate_bernstein(const HypothesisClass& cls, const DistributionSpec& spec,
                                     LossKind loss, BernsteinEstimate::Kind kind,
                                     const std::vector<double>& beta_grid) {
    if (cls.members.empty()) throw config_error("Bernstein estimation over empty class");
    constexpr double kZeroPg = 1e-9;
    constexpr double kZeroNum = 1e-6;

    std::vector<ExcessMoments> moments;
    moments.reserve(cls.members.size());
    for (const auto& f : cls.members)
        moments.push_back(excess_moments(f, spec, loss, kRiskMcPoints, kEvalSeed));

    BernsteinEstimate best;
    best.kind = kind;
    best.feasible = false;
    for (double beta : beta_grid) {
        double bound = 1.0;
        int witness = -1;
        bool feasible = true;
        for (std::size_t i = 0; i < moments.size(); ++i) {
            double num = kind == BernsteinEstimate::Kind::L1 ? moments[i].l1 : moments[i].l2;
            if (moments[i].pg <= kZeroPg) {
                if (num > kZeroNum) {
                    feasible = false;
                    witness = static_cast<int>(i);
                    break;
                }
                continue;
            }
            double ratio = num / std::pow(moments[i].pg, beta);
            if (ratio > bound) {
                bound = ratio;
                witness = static_cast<int>(i);
            }
        }
        if (!feasible) continue;
        if (!best.feasible || beta > best.beta) {
            best.beta = beta;
            best.B = bound;
            best.witness = witness;
            best.feasible = true;
        }
    }
    if (!best.feasible) throw config_error("no feasible beta in the supplied grid");
    return best;
}

std::optional<int> find_f_star(const HypothesisClass& cls, const DistributionSpec& spec) {
    for (int i = 0; i < cls.size(); ++i)
        if (hypothesis_equal(cls.members[static_cast<std::size_t>(i)], spec.f_star)) return i;
    return std::nullopt;
}

} // namespace risklab
