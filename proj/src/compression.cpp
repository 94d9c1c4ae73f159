#include "risklab/compression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace risklab {

namespace {

bool point_less(const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Subsample sorted_by_order(Subsample s) {
    std::sort(s.begin(), s.end(), example_less);
    return s;
}

Subsample remove_one(const Subsample& s, const LabeledExample& e) {
    Subsample out;
    bool removed = false;
    for (const auto& x : s) {
        if (!removed && example_equal(x, e)) {
            removed = true;
            continue;
        }
        out.push_back(x);
    }
    return out;
}

std::string describe(const LabeledExample& e) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < e.x.x.size(); ++i) os << (i ? "," : "") << e.x.x[i];
    os << ")," << e.y;
    return os.str();
}

} // namespace

bool example_less(const LabeledExample& a, const LabeledExample& b) {
    if (a.x.x != b.x.x) return point_less(a.x.x, b.x.x);
    return a.y < b.y;
}

bool example_equal(const LabeledExample& a, const LabeledExample& b) {
    return a.x.x == b.x.x && a.y == b.y;
}

bool same_example_set(Subsample a, Subsample b) {
    if (a.size() != b.size()) return false;
    std::sort(a.begin(), a.end(), example_less);
    std::sort(b.begin(), b.end(), example_less);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!example_equal(a[i], b[i])) return false;
    return true;
}

bool subsample_included(const Subsample& part, const Subsample& whole) {
    Subsample rest = whole;
    for (const auto& e : part) {
        auto it = std::find_if(rest.begin(), rest.end(),
                               [&](const LabeledExample& o) { return example_equal(o, e); });
        if (it == rest.end()) return false;
        rest.erase(it);
    }
    return true;
}

void check_consistent_labels(const Subsample& sample) {
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = i + 1; j < sample.size(); ++j)
            if (sample[i].x.x == sample[j].x.x && sample[i].y != sample[j].y)
                throw scheme_error("duplicate point with conflicting labels");
}

Predictor CompressionScheme::train_checked(const Subsample& sample) const {
    Subsample set = compress(sample);
    Predictor f = reconstruct(set);
    for (const auto& e : sample)
        if (f(e.x) != e.y)
            throw scheme_error(id() + ": reconstruction misclassifies a sample point");
    return f;
}

Hypothesis closure_box(const Subsample& compressed, int dim) {
    Vec lo(static_cast<std::size_t>(dim)), hi(static_cast<std::size_t>(dim));
    bool any = false;
    for (const auto& e : compressed) {
        if (e.y != 1.0) continue;
        if (!any) {
            lo = e.x.x;
            hi = e.x.x;
            any = true;
        } else {
            for (int j = 0; j < dim; ++j) {
                lo[static_cast<std::size_t>(j)] = std::min(lo[static_cast<std::size_t>(j)], e.x.x[static_cast<std::size_t>(j)]);
                hi[static_cast<std::size_t>(j)] = std::max(hi[static_cast<std::size_t>(j)], e.x.x[static_cast<std::size_t>(j)]);
            }
        }
    }
    if (!any) return all_negative_box(dim);
    return make_box(std::move(lo), std::move(hi));
}

namespace {

// Closure scheme for intervals (d = 1) and axis-aligned rectangles: the
// compression set is the positives attaining a coordinate extreme,
// tie-broken lexicographically so the scheme is permutation invariant.
class ClosureScheme final : public CompressionScheme {
public:
    explicit ClosureScheme(int dim) : dim_(dim) {}

    std::string id() const override { return dim_ == 1 ? "intervals" : "rectangles"; }
    int size_bound() const override { return 2 * dim_; }

    Subsample compress(const Subsample& sample) const override {
        check_consistent_labels(sample);
        Subsample chosen;
        for (int j = 0; j < dim_; ++j) {
            const LabeledExample* best_lo = nullptr;
            const LabeledExample* best_hi = nullptr;
            for (const auto& e : sample) {
                if (e.y != 1.0) continue;
                double v = e.x.x[static_cast<std::size_t>(j)];
                if (!best_lo || v < best_lo->x.x[static_cast<std::size_t>(j)] ||
                    (v == best_lo->x.x[static_cast<std::size_t>(j)] && example_less(e, *best_lo)))
                    best_lo = &e;
                if (!best_hi || v > best_hi->x.x[static_cast<std::size_t>(j)] ||
                    (v == best_hi->x.x[static_cast<std::size_t>(j)] && example_less(e, *best_hi)))
                    best_hi = &e;
            }
            for (const LabeledExample* pick : {best_lo, best_hi}) {
                if (!pick) continue;
                bool dup = false;
                for (const auto& c : chosen) dup = dup || example_equal(c, *pick);
                if (!dup) chosen.push_back(*pick);
            }
        }
        // non-realizable input surfaces here: the closure must relabel the sample
        Hypothesis box = closure_box(chosen, dim_);
        for (const auto& e : sample)
            if (evaluate(box, e.x) != e.y)
                throw scheme_error(id() + ": sample is not realizable by a closed box");
        return sorted_by_order(std::move(chosen));
    }

    Predictor reconstruct(const Subsample& compressed) const override {
        Hypothesis box = closure_box(compressed, dim_);
        return [box](const Point& p) { return evaluate(box, p); };
    }

private:
    int dim_;
};

} // namespace

std::unique_ptr<CompressionScheme> closure_scheme_intervals() {
    return std::make_unique<ClosureScheme>(1);
}

std::unique_ptr<CompressionScheme> closure_scheme_rectangles(int dim) {
    if (dim < 1) throw config_error("rectangle scheme needs dim >= 1");
    return std::make_unique<ClosureScheme>(dim);
}

bool OnlineLearner::observe(const LabeledExample& e) {
    if (predict(e.x) == e.y) return false;
    update(e.x, e.y);
    return true;
}

namespace {

class HalvingLearner final : public OnlineLearner {
public:
    explicit HalvingLearner(std::shared_ptr<const HypothesisClass> cls)
        : cls_(std::move(cls)), active_(cls_->members.size(), true) {
        if (cls_->members.empty()) throw config_error("halving needs a nonempty class");
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<HalvingLearner>(*this);
    }

    double predict(const Point& p) const override {
        double vote = 0.0;
        for (std::size_t i = 0; i < active_.size(); ++i)
            if (active_[i]) vote += evaluate(cls_->members[i], p);
        return vote >= 0.0 ? 1.0 : -1.0;
    }

    void update(const Point& p, double y) override {
        for (std::size_t i = 0; i < active_.size(); ++i)
            if (active_[i] && evaluate(cls_->members[i], p) != y) active_[i] = false;
    }

    int mistake_bound() const override {
        return static_cast<int>(std::floor(std::log2(static_cast<double>(cls_->members.size()))));
    }

private:
    std::shared_ptr<const HypothesisClass> cls_;
    std::vector<bool> active_;
};

class PerceptronLearner final : public OnlineLearner {
public:
    PerceptronLearner(int dim, int cap) : w_(static_cast<std::size_t>(dim), 0.0), cap_(cap) {}

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<PerceptronLearner>(*this);
    }

    double predict(const Point& p) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * p.x[i];
        return s >= 0.0 ? 1.0 : -1.0;
    }

    void update(const Point& p, double y) override {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] += y * p.x[i];
    }

    int mistake_bound() const override { return cap_; }

private:
    Vec w_;
    int cap_;
};

class OnlineToBatchScheme final : public CompressionScheme {
public:
    OnlineToBatchScheme(std::shared_ptr<const OnlineLearner> proto, std::string id)
        : proto_(std::move(proto)), id_(std::move(id)) {}

    std::string id() const override { return id_; }
    int size_bound() const override { return proto_->mistake_bound(); }

    Subsample compress(const Subsample& sample) const override {
        check_consistent_labels(sample);
        Subsample sorted = sorted_by_order(sample);
        auto learner = proto_->clone();
        Subsample mistakes;
        for (const auto& e : sorted)
            if (learner->observe(e)) mistakes.push_back(e);
        if (static_cast<int>(mistakes.size()) > size_bound())
            throw scheme_error(id_ + ": mistake bound exceeded (" +
                               std::to_string(mistakes.size()) + " > " +
                               std::to_string(size_bound()) + ")");
        return mistakes; // already in sorted order
    }

    Predictor reconstruct(const Subsample& compressed) const override {
        Subsample sorted = sorted_by_order(compressed);
        auto proto = proto_;
        return [proto, sorted](const Point& p) {
            for (const auto& e : sorted)
                if (e.x.x == p.x) return e.y;
            auto learner = proto->clone();
            for (const auto& e : sorted) {
                if (!point_less(e.x.x, p.x)) break;
                learner->observe(e);
            }
            return learner->predict(p);
        };
    }

private:
    std::shared_ptr<const OnlineLearner> proto_;
    std::string id_;
};

} // namespace

std::unique_ptr<OnlineLearner> halving_learner(std::shared_ptr<const HypothesisClass> cls) {
    return std::make_unique<HalvingLearner>(std::move(cls));
}

std::unique_ptr<OnlineLearner> perceptron_learner(int dim, int mistake_cap) {
    return std::make_unique<PerceptronLearner>(dim, mistake_cap);
}

std::unique_ptr<CompressionScheme> online_to_batch(std::shared_ptr<const OnlineLearner> prototype,
                                                   std::string id) {
    return std::make_unique<OnlineToBatchScheme>(std::move(prototype), std::move(id));
}

MajorityVote majority_of_three(const CompressionScheme& scheme, const Sample& sample) {
    const int third = sample.size() / 3;
    if (third < 1) throw config_error("majority_of_three needs at least 3 examples");
    MajorityVote mv;
    mv.n_used = 3 * third;
    for (int part = 1; part <= 3; ++part) {
        Subsample prefix(sample.examples.begin(), sample.examples.begin() + part * third);
        mv.parts[static_cast<std::size_t>(part - 1)] = scheme.train_checked(prefix);
    }
    auto f1 = mv.parts[0], f2 = mv.parts[1], f3 = mv.parts[2];
    mv.predict = [f1, f2, f3](const Point& p) {
        return f1(p) + f2(p) + f3(p) >= 0.0 ? 1.0 : -1.0;
    };
    return mv;
}

SchemeAudit audit(const CompressionScheme& scheme, const std::vector<Sample>& samples) {
    SchemeAudit a;
    bool homog_raw = true;
    auto fail = [&](bool& flag, int sample_idx, const std::string& what) {
        flag = false;
        if (a.counterexample.empty())
            a.counterexample = "sample " + std::to_string(sample_idx) + ": " + what;
    };
    for (std::size_t si = 0; si < samples.size(); ++si) {
        const Subsample& s = samples[si].examples;
        ++a.samples_checked;
        try {
            Subsample kappa = scheme.compress(s);
            Predictor f = scheme.reconstruct(kappa);
            for (const auto& e : s)
                if (f(e.x) != e.y) {
                    fail(a.valid, static_cast<int>(si), "reconstruction misclassifies " + describe(e));
                    break;
                }
            if (static_cast<int>(kappa.size()) > scheme.size_bound())
                fail(a.valid, static_cast<int>(si), "compression set exceeds the declared size bound");

            // permutation invariance over 5 seeded shuffles
            Rng rng(mix64(samples[si].seed ^ 0xC0FFEEULL));
            for (int rep = 0; rep < 5 && a.permutation_invariant; ++rep) {
                Subsample shuffled = s;
                for (std::size_t i = shuffled.size(); i > 1; --i)
                    std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
                if (!same_example_set(scheme.compress(shuffled), kappa))
                    fail(a.permutation_invariant, static_cast<int>(si), "compression set depends on order");
            }

            // stability: deleting a non-compression element never changes the set
            for (const auto& e : s) {
                bool in_kappa = false;
                for (const auto& c : kappa) in_kappa = in_kappa || example_equal(c, e);
                if (in_kappa) continue;
                if (!same_example_set(scheme.compress(remove_one(s, e)), kappa)) {
                    fail(a.stable, static_cast<int>(si), "deleting non-member " + describe(e) + " changed the set");
                    break;
                }
            }
            // homogeneity: deleting a compression element keeps the remaining
            // elements inside the new compression set
            for (const auto& e : kappa) {
                Subsample rest_kappa = remove_one(kappa, e);
                Subsample new_kappa = scheme.compress(remove_one(s, e));
                if (!subsample_included(rest_kappa, new_kappa)) {
                    homog_raw = false;
                    if (a.counterexample.empty())
                        a.counterexample = "sample " + std::to_string(si) + ": deleting member " +
                                           describe(e) + " dropped a remaining element";
                    break;
                }
            }
        } catch (const std::exception& ex) {
            fail(a.valid, static_cast<int>(si), std::string("compress/reconstruct failed: ") + ex.what());
        }
    }
    a.homogeneous = a.stable && homog_raw;
    return a;
}

PsiCount count_psi(const CompressionScheme& scheme, const Subsample& points, int p) {
    const int total = static_cast<int>(points.size());
    if (p < 1 || p > 3) throw config_error("psi counting supports p in {1, 2, 3}");
    if (total > 10) throw capacity_error("psi counting capped at 10 points, got " + std::to_string(total));
    if (total - p < 1) throw config_error("psi counting needs n = |points| - p >= 1");
    check_consistent_labels(points);

    PsiCount out;
    out.n = total - p;
    out.p = p;
    out.scheme_id = scheme.id();
    std::vector<int> sel(static_cast<std::size_t>(p));
    std::function<void(int, int)> rec = [&](int start, int chosen) {
        if (chosen == p) {
            Subsample rest;
            for (int i = 0; i < total; ++i) {
                bool removed = false;
                for (int s : sel) removed = removed || s == i;
                if (!removed) rest.push_back(points[static_cast<std::size_t>(i)]);
            }
            Predictor f = scheme.reconstruct(scheme.compress(rest));
            bool all_wrong = true;
            for (int s : sel)
                all_wrong = all_wrong && f(points[static_cast<std::size_t>(s)].x) !=
                                             points[static_cast<std::size_t>(s)].y;
            if (all_wrong) ++out.value;
            return;
        }
        for (int i = start; i < total; ++i) {
            sel[static_cast<std::size_t>(chosen)] = i;
            rec(i + 1, chosen + 1);
        }
    };
    rec(0, 0);
    return out;
}

} // namespace risklab
