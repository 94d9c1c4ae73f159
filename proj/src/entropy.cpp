#include "risklab/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "risklab/parallel.hpp"

namespace risklab {

namespace {

// Small fixed-universe bitset used by the set-cover solvers.
class Bits {
public:
    Bits() = default;
    explicit Bits(int n) : n_(n), w_((n + 63) / 64, 0ULL) {}

    static Bits full(int n) {
        Bits b(n);
        for (int i = 0; i < n; ++i) b.set(i);
        return b;
    }

    void set(int i) { w_[static_cast<std::size_t>(i) >> 6] |= 1ULL << (i & 63); }
    bool test(int i) const { return (w_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1ULL; }

    int count() const {
        int c = 0;
        for (auto w : w_) c += std::popcount(w);
        return c;
    }
    bool any() const {
        for (auto w : w_)
            if (w) return true;
        return false;
    }
    int and_count(const Bits& o) const {
        int c = 0;
        for (std::size_t i = 0; i < w_.size(); ++i) c += std::popcount(w_[i] & o.w_[i]);
        return c;
    }
    bool subset_of(const Bits& o) const {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }
    Bits& operator&=(const Bits& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
        return *this;
    }
    void subtract(const Bits& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
    }
    int first_set() const {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i]) return static_cast<int>(i * 64 + std::countr_zero(w_[i]));
        return -1;
    }
    const std::vector<std::uint64_t>& raw() const { return w_; }
    std::vector<int> to_indices() const {
        std::vector<int> out;
        for (int i = 0; i < n_; ++i)
            if (test(i)) out.push_back(i);
        return out;
    }

private:
    int n_ = 0;
    std::vector<std::uint64_t> w_;
};

struct CoverResult {
    int count = 0;
    std::vector<int> chosen; // indices into the candidate list
};

// Greedy weighted-universe set cover; ties broken by smallest candidate index.
CoverResult greedy_cover(const Bits& universe, const std::vector<Bits>& candidate_cover,
                         const std::vector<int>& candidate_ids) {
    CoverResult res;
    Bits uncovered = universe;
    while (uncovered.any()) {
        int best = -1, best_gain = 0;
        for (std::size_t c = 0; c < candidate_cover.size(); ++c) {
            int gain = candidate_cover[c].and_count(uncovered);
            if (gain > best_gain) {
                best_gain = gain;
                best = static_cast<int>(c);
            }
        }
        if (best < 0) throw solver_error("set cover: uncoverable element");
        res.chosen.push_back(candidate_ids.empty() ? best : candidate_ids[best]);
        uncovered.subtract(candidate_cover[static_cast<std::size_t>(best)]);
        ++res.count;
    }
    return res;
}

// Branch-and-bound exact set cover seeded with the greedy incumbent.
// Candidates dominated by another candidate (cover subset) are dropped first.
class ExactCover {
public:
    ExactCover(const Bits& universe, std::vector<Bits> covers, std::vector<int> ids)
        : universe_(universe), covers_(std::move(covers)), ids_(std::move(ids)) {
        // exact duplicates first (keep the smallest id), then dominance pruning
        {
            std::map<std::vector<std::uint64_t>, std::size_t> seen;
            std::vector<Bits> uc;
            std::vector<int> ui;
            for (std::size_t i = 0; i < covers_.size(); ++i) {
                auto [it, inserted] = seen.emplace(covers_[i].raw(), uc.size());
                if (inserted) {
                    uc.push_back(covers_[i]);
                    ui.push_back(ids_[i]);
                } else if (ids_[i] < ui[it->second]) {
                    ui[it->second] = ids_[i];
                }
            }
            covers_ = std::move(uc);
            ids_ = std::move(ui);
        }
        std::vector<bool> drop(covers_.size(), false);
        for (std::size_t a = 0; a < covers_.size(); ++a) {
            if (drop[a]) continue;
            for (std::size_t b = 0; b < covers_.size(); ++b) {
                if (a == b || drop[b]) continue;
                if (covers_[a].subset_of(covers_[b]) &&
                    (covers_[a].count() < covers_[b].count() || a > b)) {
                    drop[a] = true;
                    break;
                }
            }
        }
        std::vector<Bits> kc;
        std::vector<int> ki;
        for (std::size_t i = 0; i < covers_.size(); ++i) {
            if (!drop[i]) {
                kc.push_back(covers_[i]);
                ki.push_back(ids_[i]);
            }
        }
        covers_ = std::move(kc);
        ids_ = std::move(ki);
        max_cover_ = 1;
        for (const auto& c : covers_) max_cover_ = std::max(max_cover_, c.count());
    }

    CoverResult solve() {
        CoverResult greedy = greedy_cover(universe_, covers_, {});
        best_count_ = greedy.count;
        best_ = greedy.chosen;
        cur_.clear();
        recurse(universe_);
        CoverResult res;
        res.count = best_count_;
        for (int c : best_) res.chosen.push_back(ids_[static_cast<std::size_t>(c)]);
        return res;
    }

private:
    void recurse(const Bits& uncovered) {
        if (!uncovered.any()) {
            if (static_cast<int>(cur_.size()) < best_count_) {
                best_count_ = static_cast<int>(cur_.size());
                best_ = cur_;
            }
            return;
        }
        int lb = (uncovered.count() + max_cover_ - 1) / max_cover_;
        if (static_cast<int>(cur_.size()) + lb >= best_count_) return;
        // branch on the uncovered element with the fewest covering candidates
        int pick = -1, pick_count = -1;
        for (int e : uncovered.to_indices()) {
            int cnt = 0;
            for (const auto& c : covers_)
                if (c.test(e)) ++cnt;
            if (pick < 0 || cnt < pick_count) {
                pick = e;
                pick_count = cnt;
            }
        }
        if (pick_count == 0) return; // uncoverable; cannot happen for self-covering candidates
        for (std::size_t c = 0; c < covers_.size(); ++c) {
            if (!covers_[c].test(pick)) continue;
            Bits rest = uncovered;
            rest.subtract(covers_[c]);
            cur_.push_back(static_cast<int>(c));
            recurse(rest);
            cur_.pop_back();
        }
    }

    Bits universe_;
    std::vector<Bits> covers_;
    std::vector<int> ids_;
    int max_cover_ = 1;
    int best_count_ = 0;
    std::vector<int> best_, cur_;
};

} // namespace

double MetricCloud::distance(int i, int j) const {
    const Vec& u = vectors[static_cast<std::size_t>(i)];
    const Vec& v = vectors[static_cast<std::size_t>(j)];
    double s = 0.0;
    if (r == 1) {
        for (std::size_t p = 0; p < weights.size(); ++p) s += weights[p] * std::abs(u[p] - v[p]);
        return s;
    }
    for (std::size_t p = 0; p < weights.size(); ++p) {
        double d = u[p] - v[p];
        s += weights[p] * d * d;
    }
    return std::sqrt(s);
}

MetricCloud build_cloud(const HypothesisClass& cls, const DistributionSpec& spec, LossKind loss,
                        int m, std::uint64_t seed, CloudMode mode, int r) {
    if (cls.members.empty()) throw config_error("cloud over empty class");
    if (cls.size() > 10000)
        throw config_error("class too large to discretize: " + std::to_string(cls.size()) +
                           " hypotheses (cap 10000)");
    if (m < 1) throw config_error("cloud needs m >= 1 evaluation points");
    if (r != 1 && r != 2) throw config_error("cloud L_r exponent must be 1 or 2");
    validate(spec);

    MetricCloud cloud;
    cloud.r = r;
    cloud.mode = mode;
    cloud.loss = loss;
    cloud.cls = std::make_shared<HypothesisClass>(cls);
    cloud.spec = std::make_shared<DistributionSpec>(spec);
    if (auto idx = find_f_star(cls, spec)) cloud.f_star_index = *idx;

    std::vector<Point> pts;
    std::vector<double> ys;
    if (spec.marginal.kind == MarginalKind::finite_support) {
        const double h = spec.noise == NoiseKind::massart ? spec.margin_h : 1.0;
        for (std::size_t i = 0; i < spec.marginal.atoms.size(); ++i) {
            double w = spec.marginal.weights[i];
            if (w <= 0.0) continue;
            Point p{spec.marginal.atoms[i], static_cast<int>(i)};
            double f = evaluate(spec.f_star, p);
            if (mode == CloudMode::raw_class) {
                pts.push_back(p);
                ys.push_back(0.0);
                cloud.weights.push_back(w);
            } else if (loss == LossKind::binary) {
                double w_keep = w * (1.0 + h) / 2.0;
                double w_flip = w * (1.0 - h) / 2.0;
                pts.push_back(p);
                ys.push_back(f);
                cloud.weights.push_back(w_keep);
                if (w_flip > 0.0) {
                    pts.push_back(p);
                    ys.push_back(-f);
                    cloud.weights.push_back(w_flip);
                }
            } else {
                if (spec.sigma > 0.0) {
                    pts.push_back(p);
                    ys.push_back(f + spec.sigma);
                    cloud.weights.push_back(w / 2.0);
                    pts.push_back(p);
                    ys.push_back(f - spec.sigma);
                    cloud.weights.push_back(w / 2.0);
                } else {
                    pts.push_back(p);
                    ys.push_back(f);
                    cloud.weights.push_back(w);
                }
            }
        }
    } else {
        Sample s = generate_sample(spec, m, seed);
        pts.reserve(s.examples.size());
        for (auto& e : s.examples) {
            pts.push_back(e.x);
            ys.push_back(e.y);
            cloud.weights.push_back(1.0 / m);
        }
    }

    const int npts = static_cast<int>(pts.size());
    cloud.vectors.assign(cls.members.size(), Vec(static_cast<std::size_t>(npts), 0.0));
    cloud.labels.resize(cls.members.size());
    for (int i = 0; i < cls.size(); ++i) cloud.labels[static_cast<std::size_t>(i)] = i;

    Vec fstar_loss;
    if (mode == CloudMode::excess_loss_class) {
        fstar_loss.resize(static_cast<std::size_t>(npts));
        for (int j = 0; j < npts; ++j)
            fstar_loss[static_cast<std::size_t>(j)] =
                loss_value(loss, evaluate(spec.f_star, pts[static_cast<std::size_t>(j)]),
                           ys[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < cls.size(); ++i) {
        const Hypothesis& h = cls.members[static_cast<std::size_t>(i)];
        Vec& row = cloud.vectors[static_cast<std::size_t>(i)];
        for (int j = 0; j < npts; ++j) {
            const Point& p = pts[static_cast<std::size_t>(j)];
            double v = evaluate(h, p);
            switch (mode) {
                case CloudMode::raw_class:
                    row[static_cast<std::size_t>(j)] = v;
                    break;
                case CloudMode::loss_class:
                    row[static_cast<std::size_t>(j)] = loss_value(loss, v, ys[static_cast<std::size_t>(j)]);
                    break;
                case CloudMode::excess_loss_class:
                    row[static_cast<std::size_t>(j)] =
                        loss_value(loss, v, ys[static_cast<std::size_t>(j)]) -
                        fstar_loss[static_cast<std::size_t>(j)];
                    break;
            }
        }
    }
    return cloud;
}

std::vector<double> pairwise_distances(const MetricCloud& cloud, int jobs) {
    const int n = cloud.size();
    std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(n, jobs, [&](long i) {
        for (int j = static_cast<int>(i) + 1; j < n; ++j) {
            double v = cloud.distance(static_cast<int>(i), j);
            d[static_cast<std::size_t>(i) * n + j] = v;
            d[static_cast<std::size_t>(j) * n + i] = v;
        }
    });
    return d;
}

std::vector<double> pairwise_distances_serial(const MetricCloud& cloud) {
    const int n = cloud.size();
    std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = cloud.distance(i, j);
            d[static_cast<std::size_t>(i) * n + j] = v;
            d[static_cast<std::size_t>(j) * n + i] = v;
        }
    return d;
}

struct EntropySolver::MaskTable {
    std::vector<Bits> ball; // ball[c] = { j : d(c, j) <= scale }
};

EntropySolver::EntropySolver(const MetricCloud& cloud, int jobs)
    : cloud_(&cloud), n_(cloud.size()), jobs_(jobs) {
    if (n_ == 0) throw config_error("entropy solver over empty cloud");
    dist_ = pairwise_distances(cloud, jobs);
    diam_ = 0.0;
    for (double v : dist_) diam_ = std::max(diam_, v);
}

const EntropySolver::MaskTable& EntropySolver::masks(double scale) {
    auto it = mask_cache_.find(scale);
    if (it != mask_cache_.end()) return *it->second;
    auto table = std::make_shared<MaskTable>();
    table->ball.assign(static_cast<std::size_t>(n_), Bits(n_));
    for (int c = 0; c < n_; ++c) {
        Bits& b = table->ball[static_cast<std::size_t>(c)];
        const double* row = dist_.data() + static_cast<std::size_t>(c) * n_;
        for (int j = 0; j < n_; ++j)
            if (row[j] <= scale) b.set(j);
    }
    auto [pos, inserted] = mask_cache_.emplace(scale, std::move(table));
    (void)inserted;
    return *pos->second;
}

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0)) throw config_error("covering scale eps must be > 0");
}

} // namespace

int EntropySolver::covering_number(double eps, CoverSolver solver) {
    std::vector<int> all(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) all[static_cast<std::size_t>(i)] = i;
    return covering_number_subset(all, eps, solver);
}

int EntropySolver::covering_number_subset(const std::vector<int>& members, double eps,
                                          CoverSolver solver) {
    check_eps(eps);
    if (members.empty()) return 0;
    if (solver == CoverSolver::exact && static_cast<int>(members.size()) > kExactCoverCap)
        throw capacity_error("exact set cover capped at " + std::to_string(kExactCoverCap) +
                             " hypotheses, got " + std::to_string(members.size()));
    Bits universe(n_);
    for (int i : members) universe.set(i);
    const MaskTable& mt = masks(eps);
    std::vector<Bits> covers;
    std::vector<int> ids;
    covers.reserve(members.size());
    for (int c : members) {
        Bits b = mt.ball[static_cast<std::size_t>(c)];
        b &= universe;
        covers.push_back(std::move(b));
        ids.push_back(c);
    }
    if (solver == CoverSolver::greedy) return greedy_cover(universe, covers, ids).count;
    return ExactCover(universe, std::move(covers), std::move(ids)).solve().count;
}

std::vector<int> EntropySolver::cover_centers(double eps, CoverSolver solver) {
    check_eps(eps);
    if (solver == CoverSolver::exact && n_ > kExactCoverCap)
        throw capacity_error("exact set cover capped at " + std::to_string(kExactCoverCap) +
                             " hypotheses, got " + std::to_string(n_));
    Bits universe = Bits::full(n_);
    const MaskTable& mt = masks(eps);
    std::vector<Bits> covers(mt.ball.begin(), mt.ball.end());
    std::vector<int> ids(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) ids[static_cast<std::size_t>(i)] = i;
    CoverResult res = solver == CoverSolver::greedy
                          ? greedy_cover(universe, covers, ids)
                          : ExactCover(universe, std::move(covers), std::move(ids)).solve();
    // proper-cover recheck: every vector within eps of some returned center
    for (int j = 0; j < n_; ++j) {
        bool ok = false;
        for (int c : res.chosen)
            if (distance(c, j) <= eps) {
                ok = true;
                break;
            }
        if (!ok) throw solver_error("cover recheck failed");
    }
    return res.chosen;
}

namespace {

// All brackets from pointwise min/max over vector subsets of size <= 4
// (singletons included) with L_r width <= eps, as coverage masks over the
// universe. Generators range over the whole cloud; coverage is restricted.
struct BracketCandidates {
    std::vector<Bits> covers;
    std::vector<Bracket> brackets;
};

double lr_width(const Vec& lo, const Vec& hi, const Vec& w, int r) {
    double s = 0.0;
    if (r == 1) {
        for (std::size_t p = 0; p < w.size(); ++p) s += w[p] * (hi[p] - lo[p]);
        return s;
    }
    for (std::size_t p = 0; p < w.size(); ++p) {
        double d = hi[p] - lo[p];
        s += w[p] * d * d;
    }
    return std::sqrt(s);
}

BracketCandidates bracket_candidates(const MetricCloud& cloud, const Bits& universe, int n,
                                     double eps) {
    BracketCandidates out;
    const int npts = cloud.points();
    Vec lo(static_cast<std::size_t>(npts)), hi(static_cast<std::size_t>(npts));
    auto consider = [&](std::initializer_list<int> subset) {
        bool first = true;
        for (int s : subset) {
            const Vec& v = cloud.vectors[static_cast<std::size_t>(s)];
            if (first) {
                lo = v;
                hi = v;
                first = false;
            } else {
                for (int p = 0; p < npts; ++p) {
                    lo[static_cast<std::size_t>(p)] = std::min(lo[static_cast<std::size_t>(p)], v[static_cast<std::size_t>(p)]);
                    hi[static_cast<std::size_t>(p)] = std::max(hi[static_cast<std::size_t>(p)], v[static_cast<std::size_t>(p)]);
                }
            }
        }
        const double width = lr_width(lo, hi, cloud.weights, cloud.r);
        if (width > eps) return;
        Bits cover(n);
        bool any = false;
        for (int j = 0; j < n; ++j) {
            if (!universe.test(j)) continue;
            const Vec& v = cloud.vectors[static_cast<std::size_t>(j)];
            bool inside = true;
            for (int p = 0; p < npts && inside; ++p)
                inside = lo[static_cast<std::size_t>(p)] <= v[static_cast<std::size_t>(p)] &&
                         v[static_cast<std::size_t>(p)] <= hi[static_cast<std::size_t>(p)];
            if (inside) {
                cover.set(j);
                any = true;
            }
        }
        if (!any) return;
        out.covers.push_back(std::move(cover));
        out.brackets.push_back({lo, hi, width});
    };
    for (int a = 0; a < n; ++a) {
        consider({a});
        for (int b = a + 1; b < n; ++b) {
            consider({a, b});
            for (int c = b + 1; c < n; ++c) {
                consider({a, b, c});
                for (int d = c + 1; d < n; ++d) consider({a, b, c, d});
            }
        }
    }
    return out;
}

} // namespace

int EntropySolver::bracketing_number(double eps) {
    std::vector<int> all(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) all[static_cast<std::size_t>(i)] = i;
    return bracketing_number_subset(all, eps);
}

int EntropySolver::bracketing_number_subset(const std::vector<int>& members, double eps) {
    check_eps(eps);
    if (members.empty()) return 0;
    if (n_ > kExactCoverCap)
        throw capacity_error("bracketing capped at " + std::to_string(kExactCoverCap) +
                             " hypotheses, got " + std::to_string(n_));
    Bits universe(n_);
    for (int i : members) universe.set(i);
    BracketCandidates cand = bracket_candidates(*cloud_, universe, n_, eps);
    std::vector<int> ids(cand.covers.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ExactCover(universe, std::move(cand.covers), std::move(ids)).solve().count;
}

std::vector<Bracket> EntropySolver::bracket_cover(double eps) {
    check_eps(eps);
    if (n_ > kExactCoverCap)
        throw capacity_error("bracketing capped at " + std::to_string(kExactCoverCap) +
                             " hypotheses, got " + std::to_string(n_));
    Bits universe = Bits::full(n_);
    BracketCandidates cand = bracket_candidates(*cloud_, universe, n_, eps);
    std::vector<int> ids(cand.covers.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    CoverResult res = ExactCover(universe, std::move(cand.covers), std::move(ids)).solve();
    std::vector<Bracket> out;
    for (int id : res.chosen) out.push_back(cand.brackets[static_cast<std::size_t>(id)]);
    return out;
}

int EntropySolver::covering_sup(double radius, double eps) {
    check_eps(eps);
    auto key = std::make_pair(radius, eps);
    if (auto it = cover_sup_memo_.find(key); it != cover_sup_memo_.end()) return it->second;
    const MaskTable& rmask = masks(radius);
    const MaskTable& emask = masks(eps);
    const bool exact = n_ <= kExactCoverCap;
    std::vector<int> counts(static_cast<std::size_t>(n_), 0);
    parallel_for(n_, jobs_, [&](long g) {
        const Bits& universe = rmask.ball[static_cast<std::size_t>(g)];
        std::vector<Bits> covers;
        std::vector<int> ids;
        for (int c : universe.to_indices()) {
            Bits b = emask.ball[static_cast<std::size_t>(c)];
            b &= universe;
            covers.push_back(std::move(b));
            ids.push_back(c);
        }
        counts[static_cast<std::size_t>(g)] =
            exact ? ExactCover(universe, std::move(covers), std::move(ids)).solve().count
                  : greedy_cover(universe, covers, ids).count;
    });
    int best = *std::max_element(counts.begin(), counts.end());
    cover_sup_memo_.emplace(key, best);
    return best;
}

int EntropySolver::bracketing_sup(double radius, double eps) {
    check_eps(eps);
    if (n_ > kExactCoverCap)
        throw capacity_error("bracketing capped at " + std::to_string(kExactCoverCap) +
                             " hypotheses, got " + std::to_string(n_));
    auto key = std::make_pair(radius, eps);
    if (auto it = bracket_sup_memo_.find(key); it != bracket_sup_memo_.end()) return it->second;
    const MaskTable& rmask = masks(radius);
    int best = 0;
    for (int g = 0; g < n_; ++g) {
        const Bits& universe = rmask.ball[static_cast<std::size_t>(g)];
        BracketCandidates cand = bracket_candidates(*cloud_, universe, n_, eps);
        std::vector<int> ids(cand.covers.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
        best = std::max(best, ExactCover(universe, std::move(cand.covers), std::move(ids)).solve().count);
    }
    bracket_sup_memo_.emplace(key, best);
    return best;
}

std::vector<double> EntropySolver::dyadic_grid(double eps) const {
    // absolute powers of two so grids for different eps anchors nest
    std::vector<double> grid{eps};
    double g = std::exp2(std::ceil(std::log2(eps)));
    if (g == eps) g *= 2.0;
    while (g < 2.0 * diam_ && grid.size() < 64) {
        grid.push_back(g);
        g *= 2.0;
    }
    return grid;
}

double EntropySolver::local_entropy(double eps, double beta, double B, bool bracketing) {
    if (!(eps > 0.0) || eps > 1.0) throw config_error("local entropy needs eps in (0, 1]");
    if (B < 1.0 || beta < 0.0 || beta > 1.0)
        throw config_error("local entropy needs B >= 1 and beta in [0, 1]");
    auto key = std::make_tuple(eps, beta, B, bracketing);
    if (auto it = dloc_memo_.find(key); it != dloc_memo_.end()) return it->second;
    int best = 1;
    for (double gamma : dyadic_grid(eps)) {
        double radius = 2.0 * B * std::pow(gamma, beta);
        int c = bracketing ? bracketing_sup(radius, gamma) : covering_sup(radius, gamma);
        best = std::max(best, c);
    }
    double v = std::log(static_cast<double>(best));
    dloc_memo_.emplace(key, v);
    return v;
}

LocalEntropyProfile EntropySolver::profile(std::vector<double> eps_grid, double beta, double B,
                                           bool bracketing) {
    if (eps_grid.empty()) throw config_error("empty eps grid");
    std::sort(eps_grid.begin(), eps_grid.end());
    // one shared gamma grid so the profile is non-increasing by construction
    std::vector<double> gammas = dyadic_grid(eps_grid.front());
    for (double e : eps_grid)
        if (std::find(gammas.begin(), gammas.end(), e) == gammas.end()) gammas.push_back(e);
    std::sort(gammas.begin(), gammas.end());
    std::vector<int> counts(gammas.size(), 1);
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        double radius = 2.0 * B * std::pow(gammas[i], beta);
        counts[i] = bracketing ? bracketing_sup(radius, gammas[i]) : covering_sup(radius, gammas[i]);
    }
    LocalEntropyProfile prof;
    prof.bracketing = bracketing;
    prof.beta = beta;
    prof.B = B;
    for (double e : eps_grid) {
        int best = 1;
        for (std::size_t i = 0; i < gammas.size(); ++i)
            if (gammas[i] >= e) best = std::max(best, counts[i]);
        prof.epsilons.push_back(e);
        prof.dloc.push_back(std::log(static_cast<double>(best)));
    }
    return prof;
}

FixedPointResult EntropySolver::fixed_point(double k, double beta, double B,
                                            FixedPointKind kind) {
    if (!(k > 0.0)) throw config_error("fixed point needs k > 0");
    if ((kind == FixedPointKind::zeta && cloud_->r != 2) ||
        (kind != FixedPointKind::zeta && cloud_->r != 1))
        throw config_error("fixed point kind does not match the cloud's L_r");

    auto lhs = [&](double eps) {
        switch (kind) {
            case FixedPointKind::gamma:
                return k * local_entropy(std::pow(eps, 1.0 / (2.0 - beta)), beta, B, false);
            case FixedPointKind::gamma_bracket:
                return k * local_entropy(std::pow(eps, 1.0 / (2.0 - beta)), beta, B, true);
            case FixedPointKind::gamma_star:
                return k * local_entropy(std::min(1.0, B * std::pow(eps, beta / (2.0 - beta))),
                                         1.0, 1.0, false);
            case FixedPointKind::zeta:
                return k * local_entropy(eps, 1.0, 1.0, false);
        }
        return 0.0;
    };
    auto rhs = [&](double eps) { return kind == FixedPointKind::zeta ? eps * eps : eps; };
    auto holds = [&](double eps) { return lhs(eps) <= rhs(eps); };

    FixedPointResult res;
    res.k = k;
    res.kind = kind;
    const double lo_bound = 1e-6, hi_bound = 1.0;
    double l0 = lhs(lo_bound);
    res.evidence.emplace_back(lo_bound, l0);
    if (l0 <= rhs(lo_bound)) {
        res.value = lo_bound;
        res.at_grid_min = true;
        return res;
    }
    double h0 = lhs(hi_bound);
    res.evidence.emplace_back(hi_bound, h0);
    if (h0 > rhs(hi_bound)) {
        res.value = hi_bound;
        return res; // no crossing inside the range
    }
    double lo = lo_bound, hi = hi_bound;
    while (hi / lo > 1.0 + 1e-3) {
        double mid = std::sqrt(lo * hi);
        double v = lhs(mid);
        res.evidence.emplace_back(mid, v);
        if (v <= rhs(mid))
            hi = mid;
        else
            lo = mid;
    }
    res.value = hi;
    res.crossed = true;
    std::sort(res.evidence.begin(), res.evidence.end());
    (void)holds;
    return res;
}

std::vector<int> EntropySolver::ball_members(int center, double radius) const {
    std::vector<int> out;
    const double* row = dist_.data() + static_cast<std::size_t>(center) * n_;
    for (int j = 0; j < n_; ++j)
        if (row[j] <= radius) out.push_back(j);
    return out;
}

int covering_number(const MetricCloud& cloud, double eps, CoverSolver solver) {
    EntropySolver s(cloud);
    return s.covering_number(eps, solver);
}

int bracketing_number(const MetricCloud& cloud, double eps) {
    EntropySolver s(cloud);
    return s.bracketing_number(eps);
}

double local_entropy(const MetricCloud& cloud, double eps, double beta, double B,
                     bool bracketing) {
    EntropySolver s(cloud);
    return s.local_entropy(eps, beta, B, bracketing);
}

FixedPointResult fixed_point(const MetricCloud& cloud, double k, double beta, double B,
                             FixedPointKind kind) {
    EntropySolver s(cloud);
    return s.fixed_point(k, beta, B, kind);
}

} // namespace risklab
