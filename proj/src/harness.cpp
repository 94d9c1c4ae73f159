#include "risklab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "risklab/parallel.hpp"

namespace risklab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDecompTol = 1e-9;

// the paper's truncated logarithm
double tlog(double x) { return std::log(std::max(x, std::exp(1.0))); }

double margin_of(const DistributionSpec& spec) {
    return spec.noise == NoiseKind::massart ? spec.margin_h : 1.0;
}

std::vector<double> ok_risks(const RiskTable& t, int n) {
    std::vector<double> out;
    for (const auto& r : t.rows)
        if (r.n == n && r.status == "ok") out.push_back(r.risk);
    return out;
}

double quantile_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    if (idx == 0) idx = 1;
    if (idx > v.size()) idx = v.size();
    return v[idx - 1];
}

} // namespace

// ---- trial engine -----------------------------------------------------------

namespace {

RiskRow make_row(TrialLearner& learner, const DistributionSpec& spec, int n, int trial,
                 std::uint64_t master_seed, int* checked, int* violations) {
    std::uint64_t seed = derive_seed(master_seed, learner.id(), static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(trial));
    RiskRow row;
    row.learner_id = learner.id();
    row.n = n;
    row.trial = trial;
    row.seed = seed;
    TrialOutcome o;
    try {
        Sample s = generate_sample(spec, n, seed);
        o = learner.run_trial(s);
    } catch (const solver_error& e) {
        o.ok = false;
        o.reason = e.what();
    } catch (const scheme_error& e) {
        o.ok = false;
        o.reason = e.what();
    }
    row.risk = o.risk;
    row.excess = o.excess;
    row.aux = o.aux;
    row.status = o.ok ? "ok" : (o.reason.empty() ? "failed" : o.reason);
    *checked = o.decomp_checked;
    *violations = o.decomp_violations;
    return row;
}

} // namespace

RiskTable run_trials(TrialLearner& learner, const DistributionSpec& spec,
                     const std::vector<int>& n_grid, int trials, std::uint64_t master_seed,
                     int jobs) {
    if (trials < 1) throw config_error("run_trials needs trials >= 1");
    if (n_grid.empty()) throw config_error("run_trials needs a nonempty n grid");
    RiskTable table;
    table.master_seed = master_seed;
    table.rows.resize(n_grid.size() * static_cast<std::size_t>(trials));
    std::vector<int> checked(table.rows.size(), 0), violations(table.rows.size(), 0);
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const int n = n_grid[gi];
        learner.prepare(n);
        parallel_for(trials, jobs, [&](long tr) {
            std::size_t at = gi * static_cast<std::size_t>(trials) + static_cast<std::size_t>(tr);
            table.rows[at] = make_row(learner, spec, n, static_cast<int>(tr), master_seed,
                                      &checked[at], &violations[at]);
        });
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        table.decomp_checked += checked[i];
        table.decomp_violations += violations[i];
    }
    return table;
}

RiskTable run_trials_serial(TrialLearner& learner, const DistributionSpec& spec,
                            const std::vector<int>& n_grid, int trials,
                            std::uint64_t master_seed) {
    if (trials < 1) throw config_error("run_trials needs trials >= 1");
    if (n_grid.empty()) throw config_error("run_trials needs a nonempty n grid");
    RiskTable table;
    table.master_seed = master_seed;
    table.rows.resize(n_grid.size() * static_cast<std::size_t>(trials));
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        learner.prepare(n_grid[gi]);
        for (int tr = 0; tr < trials; ++tr) {
            std::size_t at = gi * static_cast<std::size_t>(trials) + static_cast<std::size_t>(tr);
            int c = 0, v = 0;
            table.rows[at] = make_row(learner, spec, n_grid[gi], tr, master_seed, &c, &v);
            table.decomp_checked += c;
            table.decomp_violations += v;
        }
    }
    return table;
}

// ---- learners -----------------------------------------------------------------

namespace {

class ConstantLearner final : public TrialLearner {
public:
    ConstantLearner(const DistributionSpec& spec, LossKind loss) : spec_(spec) {
        risk_ = true_risk(spec.f_star, spec, loss).value;
    }
    std::string id() const override { return "constant-fstar"; }
    TrialOutcome run_trial(const Sample&) const override {
        TrialOutcome o;
        o.risk = risk_;
        o.excess = 0.0;
        return o;
    }

private:
    DistributionSpec spec_;
    double risk_ = 0.0;
};

class NetErmLearner final : public TrialLearner {
public:
    NetErmLearner(const DistributionSpec& spec, NetErmConfig cfg)
        : spec_(spec), cfg_(std::move(cfg)) {
        if (!cfg_.cls) throw config_error("net ERM learner needs a class");
    }

    std::string id() const override {
        return cfg_.variant == EtaVariant::cor ? "net-erm-cor" : "net-erm-mainbound";
    }

    void prepare(int n) override {
        if (!solver_) {
            const DistributionSpec& cspec = cfg_.cloud_spec ? *cfg_.cloud_spec : spec_;
            cloud_ = build_cloud(*cfg_.cls, cspec, LossKind::binary, cfg_.cloud_points,
                                 cfg_.cloud_seed, CloudMode::loss_class);
            if (cloud_.f_star_index < 0)
                throw config_error("net ERM learner needs f* inside the class");
            solver_ = std::make_unique<EntropySolver>(cloud_);
            loss_means_.resize(static_cast<std::size_t>(cloud_.size()));
            for (int i = 0; i < cloud_.size(); ++i)
                loss_means_[static_cast<std::size_t>(i)] = cloud_mean(cloud_, i);
        }
        FixedPointResult fp =
            cfg_.variant == EtaVariant::cor
                ? solver_->fixed_point(cfg_.B / n, cfg_.beta, cfg_.B, FixedPointKind::gamma)
                : solver_->fixed_point(cfg_.B / n, cfg_.beta, cfg_.B, FixedPointKind::gamma_star);
        eta_ = select_eta(n, cfg_.delta, cfg_.beta, cfg_.B, fp, cfg_.variant);
        eta_ = std::min(std::max(eta_, 1e-6), 1.0);
        net_ = build_epsilon_net(*solver_, eta_);
        net_pg_.resize(net_.member_indices.size());
        fstar_eta_pos_ = 0;
        for (std::size_t pos = 0; pos < net_.member_indices.size(); ++pos) {
            net_pg_[pos] = loss_means_[static_cast<std::size_t>(net_.member_indices[pos])] -
                           loss_means_[static_cast<std::size_t>(cloud_.f_star_index)];
            if (net_pg_[pos] < net_pg_[static_cast<std::size_t>(fstar_eta_pos_)])
                fstar_eta_pos_ = static_cast<int>(pos);
        }
    }

    TrialOutcome run_trial(const Sample& sample) const override {
        const EpsilonNet* net = &net_;
        const std::vector<double>* net_pg = &net_pg_;
        int fstar_eta_pos = fstar_eta_pos_;
        EpsilonNet rotated;
        std::vector<double> rotated_pg;
        if (cfg_.rotate_net_per_trial) {
            const int m = cloud_.size();
            const int offset = static_cast<int>(mix64(sample.seed ^ 0x4E457421ULL) % m);
            rotated = net_;
            for (int& idx : rotated.member_indices) idx = (idx + offset) % m;
            std::sort(rotated.member_indices.begin(), rotated.member_indices.end());
            rotated_pg.resize(rotated.member_indices.size());
            fstar_eta_pos = 0;
            for (std::size_t pos = 0; pos < rotated.member_indices.size(); ++pos) {
                rotated_pg[pos] = loss_means_[static_cast<std::size_t>(rotated.member_indices[pos])] -
                                  loss_means_[static_cast<std::size_t>(cloud_.f_star_index)];
                if (rotated_pg[pos] < rotated_pg[static_cast<std::size_t>(fstar_eta_pos)])
                    fstar_eta_pos = static_cast<int>(pos);
            }
            net = &rotated;
            net_pg = &rotated_pg;
        }
        NetErmOutput out = net_erm(*net, cloud_, sample, LossKind::binary);
        const Hypothesis& hyp = cfg_.cls->members[static_cast<std::size_t>(out.hypothesis_index)];
        TrialOutcome o;
        o.risk = true_risk(hyp, spec_, LossKind::binary).value;
        o.excess = excess_risk(hyp, spec_, LossKind::binary).value;
        o.aux = static_cast<double>(net->member_indices.size());
        if (cfg_.check_decomposition) {
            const double c = cfg_.decomp_c;
            double rn_star = empirical_risk(spec_.f_star, sample, LossKind::binary);
            double sup = -1e300;
            double rn_eta = 0.0;
            for (std::size_t pos = 0; pos < net->member_indices.size(); ++pos) {
                int hyp_idx = cloud_.labels[static_cast<std::size_t>(net->member_indices[pos])];
                double rn = empirical_risk(cfg_.cls->members[static_cast<std::size_t>(hyp_idx)],
                                           sample, LossKind::binary);
                sup = std::max(sup, (*net_pg)[pos] - (1.0 + c) * (rn - rn_star));
                if (static_cast<int>(pos) == fstar_eta_pos) rn_eta = rn;
            }
            double lhs = (*net_pg)[static_cast<std::size_t>(out.chosen_index)];
            double rhs = sup + (1.0 + c) * (rn_eta - rn_star);
            o.decomp_checked = 1;
            o.decomp_violations = lhs > rhs + kDecompTol ? 1 : 0;
        }
        return o;
    }

    double eta() const { return eta_; }
    int net_size() const { return static_cast<int>(net_.member_indices.size()); }

private:
    DistributionSpec spec_;
    NetErmConfig cfg_;
    MetricCloud cloud_;
    std::unique_ptr<EntropySolver> solver_;
    Vec loss_means_;
    double eta_ = 0.0;
    EpsilonNet net_;
    std::vector<double> net_pg_;
    int fstar_eta_pos_ = 0;
};

class FullErmLearner final : public TrialLearner {
public:
    FullErmLearner(const DistributionSpec& spec, std::shared_ptr<const HypothesisClass> cls,
                   int cloud_points, std::uint64_t cloud_seed)
        : spec_(spec), cls_(std::move(cls)) {
        cloud_ = build_cloud(*cls_, spec_, LossKind::binary, cloud_points, cloud_seed,
                             CloudMode::loss_class);
        if (cloud_.f_star_index < 0) throw config_error("full ERM learner needs f* inside the class");
        risk_means_.resize(static_cast<std::size_t>(cloud_.size()));
        for (int i = 0; i < cloud_.size(); ++i)
            risk_means_[static_cast<std::size_t>(i)] = cloud_mean(cloud_, i);
    }

    std::string id() const override { return "erm-full"; }

    TrialOutcome run_trial(const Sample& sample) const override {
        const int m = cls_->size();
        std::vector<double> rn(static_cast<std::size_t>(m));
        int chosen = 0;
        for (int i = 0; i < m; ++i) {
            rn[static_cast<std::size_t>(i)] =
                empirical_risk(cls_->members[static_cast<std::size_t>(i)], sample, LossKind::binary);
            if (rn[static_cast<std::size_t>(i)] < rn[static_cast<std::size_t>(chosen)]) chosen = i;
        }
        TrialOutcome o;
        o.risk = true_risk(cls_->members[static_cast<std::size_t>(chosen)], spec_, LossKind::binary).value;
        o.excess = excess_risk(cls_->members[static_cast<std::size_t>(chosen)], spec_, LossKind::binary).value;
        // aggregation inequality R(f) - (1+2c) R(f*) <= fwd(c) + (1+c) rev(c),
        // checked pathwise at c = 1/2 (the R - 2 R(f*) form) and c = 1
        const double r_star = risk_means_[static_cast<std::size_t>(cloud_.f_star_index)];
        for (double c : {0.5, 1.0}) {
            double fwd = -1e300, rev = -1e300;
            for (int i = 0; i < m; ++i) {
                double pg = risk_means_[static_cast<std::size_t>(i)];
                fwd = std::max(fwd, pg - (1.0 + c) * rn[static_cast<std::size_t>(i)]);
                rev = std::max(rev, rn[static_cast<std::size_t>(i)] - (1.0 + 2.0 * c) / (1.0 + c) * pg);
            }
            double lhs = risk_means_[static_cast<std::size_t>(chosen)] - (1.0 + 2.0 * c) * r_star;
            double rhs = fwd + (1.0 + c) * rev;
            ++o.decomp_checked;
            if (lhs > rhs + kDecompTol) ++o.decomp_violations;
        }
        return o;
    }

private:
    DistributionSpec spec_;
    std::shared_ptr<const HypothesisClass> cls_;
    MetricCloud cloud_;
    Vec risk_means_;
};

// Shared fixed evaluation grid: risk of an arbitrary predictor is computed
// against f* on MC points with the noise integrated out analytically.
class EvalGrid {
public:
    EvalGrid(const DistributionSpec& spec, int points, std::uint64_t seed) {
        Rng rng(mix64(seed ^ 0xFEEDFACEULL));
        pts_.reserve(static_cast<std::size_t>(points));
        fstar_.reserve(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            pts_.push_back(draw_point(spec.marginal, rng));
            fstar_.push_back(evaluate(spec.f_star, pts_.back()));
        }
    }

    double disagreement(const Predictor& f) const {
        long bad = 0;
        for (std::size_t i = 0; i < pts_.size(); ++i)
            if (f(pts_[i]) != fstar_[i]) ++bad;
        return static_cast<double>(bad) / static_cast<double>(pts_.size());
    }

private:
    std::vector<Point> pts_;
    Vec fstar_;
};

// Exact symmetric-difference mass of two boxes under uniform_ball(1).
double interval_disagreement(const Hypothesis& a, const Hypothesis& b) {
    auto mass = [](double lo, double hi) {
        lo = std::max(lo, -1.0);
        hi = std::min(hi, 1.0);
        return std::max(0.0, hi - lo) / 2.0;
    };
    auto lo_of = [](const Hypothesis& h) { return h.lo.empty() || h.lo[0] > h.hi[0] ? 1.0 : h.lo[0]; };
    auto hi_of = [](const Hypothesis& h) { return h.lo.empty() || h.lo[0] > h.hi[0] ? -1.0 : h.hi[0]; };
    double inter = mass(std::max(lo_of(a), lo_of(b)), std::min(hi_of(a), hi_of(b)));
    return mass(lo_of(a), hi_of(a)) + mass(lo_of(b), hi_of(b)) - 2.0 * inter;
}

class SchemeLearner final : public TrialLearner {
public:
    SchemeLearner(const DistributionSpec& spec, std::shared_ptr<const CompressionScheme> scheme,
                  int eval_points, std::uint64_t eval_seed)
        : spec_(spec), scheme_(std::move(scheme)) {
        exact_intervals_ = scheme_->id() == "intervals" &&
                           spec_.marginal.kind == MarginalKind::uniform_ball &&
                           spec_.marginal.dim == 1 && spec_.f_star.kind == ClassKind::interval;
        if (!exact_intervals_)
            grid_ = std::make_unique<EvalGrid>(spec_, eval_points, eval_seed);
    }

    std::string id() const override { return "scheme-" + scheme_->id(); }

    TrialOutcome run_trial(const Sample& sample) const override {
        TrialOutcome o;
        Subsample compressed = scheme_->compress(sample.examples);
        Predictor f = scheme_->reconstruct(compressed);
        for (const auto& e : sample.examples)
            if (f(e.x) != e.y) {
                o.ok = false;
                o.reason = "reconstruction inconsistent with the sample";
                return o;
            }
        o.aux = static_cast<double>(compressed.size());
        const double margin = margin_of(spec_);
        double dis = exact_intervals_
                         ? interval_disagreement(closure_box(compressed, 1), spec_.f_star)
                         : grid_->disagreement(f);
        o.excess = margin * dis;
        o.risk = (1.0 - margin) / 2.0 + margin * dis;
        return o;
    }

private:
    DistributionSpec spec_;
    std::shared_ptr<const CompressionScheme> scheme_;
    bool exact_intervals_ = false;
    std::unique_ptr<EvalGrid> grid_;
};

class MajorityLearner final : public TrialLearner {
public:
    MajorityLearner(const DistributionSpec& spec, std::shared_ptr<const CompressionScheme> scheme,
                    int eval_points, std::uint64_t eval_seed)
        : spec_(spec), scheme_(std::move(scheme)),
          grid_(std::make_unique<EvalGrid>(spec_, eval_points, eval_seed)) {}

    std::string id() const override { return "majority3-" + scheme_->id(); }

    TrialOutcome run_trial(const Sample& sample) const override {
        TrialOutcome o;
        MajorityVote mv = majority_of_three(*scheme_, sample);
        o.aux = static_cast<double>(mv.n_used);
        const double margin = margin_of(spec_);
        double dis = grid_->disagreement(mv.predict);
        o.excess = margin * dis;
        o.risk = (1.0 - margin) / 2.0 + margin * dis;
        return o;
    }

private:
    DistributionSpec spec_;
    std::shared_ptr<const CompressionScheme> scheme_;
    std::unique_ptr<EvalGrid> grid_;
};

class SkeletonRegressionLearner final : public TrialLearner {
public:
    SkeletonRegressionLearner(const DistributionSpec& spec, SkeletonRegressionConfig cfg)
        : spec_(spec), cfg_(std::move(cfg)) {
        if (!cfg_.cls) throw config_error("skeleton regression learner needs a class");
    }

    std::string id() const override { return "skeleton-l2"; }

    void prepare(int n) override {
        if (!solver_) {
            cloud_ = build_cloud(*cfg_.cls, spec_, LossKind::square, cfg_.cloud_points,
                                 cfg_.cloud_seed, CloudMode::raw_class, 2);
            solver_ = std::make_unique<EntropySolver>(cloud_);
        }
        FixedPointResult zeta = solver_->fixed_point(1.0 / n, 1.0, 1.0, FixedPointKind::zeta);
        eta_ = zeta.value + std::sqrt(std::log(1.0 / cfg_.delta) / n);
        net_ = build_epsilon_net(*solver_, eta_);
    }

    TrialOutcome run_trial(const Sample& sample) const override {
        NetErmOutput out = net_erm(net_, cloud_, sample, LossKind::square);
        const Hypothesis& hyp = cfg_.cls->members[static_cast<std::size_t>(out.hypothesis_index)];
        TrialOutcome o;
        o.risk = true_risk(hyp, spec_, LossKind::square).value;
        o.excess = excess_risk(hyp, spec_, LossKind::square).value;
        o.aux = static_cast<double>(net_.member_indices.size());
        return o;
    }

private:
    DistributionSpec spec_;
    SkeletonRegressionConfig cfg_;
    MetricCloud cloud_;
    std::unique_ptr<EntropySolver> solver_;
    double eta_ = 0.0;
    EpsilonNet net_;
};

} // namespace

std::unique_ptr<TrialLearner> constant_learner(const DistributionSpec& spec, LossKind loss) {
    return std::make_unique<ConstantLearner>(spec, loss);
}

std::unique_ptr<TrialLearner> net_erm_learner(const DistributionSpec& spec, NetErmConfig cfg) {
    return std::make_unique<NetErmLearner>(spec, std::move(cfg));
}

std::unique_ptr<TrialLearner> full_erm_learner(const DistributionSpec& spec,
                                               std::shared_ptr<const HypothesisClass> cls,
                                               int cloud_points, std::uint64_t cloud_seed) {
    return std::make_unique<FullErmLearner>(spec, std::move(cls), cloud_points, cloud_seed);
}

std::unique_ptr<TrialLearner> scheme_learner(const DistributionSpec& spec,
                                             std::shared_ptr<const CompressionScheme> scheme,
                                             int eval_points, std::uint64_t eval_seed) {
    return std::make_unique<SchemeLearner>(spec, std::move(scheme), eval_points, eval_seed);
}

std::unique_ptr<TrialLearner> majority_learner(const DistributionSpec& spec,
                                               std::shared_ptr<const CompressionScheme> scheme,
                                               int eval_points, std::uint64_t eval_seed) {
    return std::make_unique<MajorityLearner>(spec, std::move(scheme), eval_points, eval_seed);
}

std::unique_ptr<TrialLearner> skeleton_regression_learner(const DistributionSpec& spec,
                                                          SkeletonRegressionConfig cfg) {
    return std::make_unique<SkeletonRegressionLearner>(spec, std::move(cfg));
}

// ---- bounds -------------------------------------------------------------------

const char* bound_name(BoundId id) {
    switch (id) {
        case BoundId::floyd_warmuth: return "floyd_warmuth";
        case BoundId::expectation_k_over_n1: return "k_over_n_plus_1";
        case BoundId::deviation_ek_log: return "ek_log_delta_over_n";
        case BoundId::pol: return "pol";
        case BoundId::mod_klogk: return "k_logk_over_n";
        case BoundId::homogeneous_k_over_n: return "homogeneous_k_over_n";
        case BoundId::logconc_rate: return "logconc";
        case BoundId::svm_dlogd: return "svm_dlogd";
    }
    return "unknown";
}

BoundId bound_from_name(const std::string& name) {
    for (BoundId id : {BoundId::floyd_warmuth, BoundId::expectation_k_over_n1,
                       BoundId::deviation_ek_log, BoundId::pol, BoundId::mod_klogk,
                       BoundId::homogeneous_k_over_n, BoundId::logconc_rate, BoundId::svm_dlogd})
        if (name == bound_name(id)) return id;
    throw config_error("unknown bound id: " + name);
}

double bound_value(BoundId id, int n, double delta, const BoundParams& p) {
    const double e = std::exp(1.0);
    switch (id) {
        case BoundId::floyd_warmuth:
            return p.k * tlog(e * n / p.k) / (n - p.k) + tlog(1.0 / delta) / (n - p.k);
        case BoundId::expectation_k_over_n1:
            return p.k / (n + 1.0);
        case BoundId::deviation_ek_log:
            return e * p.k * tlog(1.0 / delta) / n;
        case BoundId::pol:
            return p.k * p.k / (n * std::pow(delta, 1.0 / p.k));
        case BoundId::mod_klogk:
            return p.k * tlog(p.k) / n + tlog(1.0 / delta) / n;
        case BoundId::homogeneous_k_over_n:
            return e * p.k / n + e * tlog(1.0 / delta) / n;
        case BoundId::logconc_rate:
            return std::pow(p.B * p.d / n + p.B * tlog(1.0 / delta) / n, 1.0 / (2.0 - p.beta));
        case BoundId::svm_dlogd:
            return p.d * tlog(p.d) / n + tlog(1.0 / delta) / n;
    }
    return 0.0;
}

bool bound_is_fitted(BoundId id) {
    return id == BoundId::mod_klogk || id == BoundId::logconc_rate || id == BoundId::svm_dlogd;
}

bool bound_is_expectation(BoundId id) { return id == BoundId::expectation_k_over_n1; }

BoundReport verify_bound(const RiskTable& table, BoundId id, double delta,
                         const BoundParams& params) {
    if (delta <= 0.0 || delta >= 1.0) throw config_error("delta must lie in (0, 1)");
    std::vector<int> ns;
    for (const auto& r : table.rows)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());
    if (ns.empty()) throw config_error("empty risk table");

    BoundReport rep;
    rep.bound_id = bound_name(id);
    rep.delta = delta;
    rep.expectation = bound_is_expectation(id);
    rep.fitted = bound_is_fitted(id);

    for (int n : ns) {
        std::vector<double> risks = ok_risks(table, n);
        int total = 0;
        for (const auto& r : table.rows)
            if (r.n == n) ++total;
        if (!rep.expectation && static_cast<double>(risks.size()) * delta < 20.0)
            throw config_error("insufficient trials for the requested quantile: need trials*delta >= 20");
        BoundPerN per;
        per.n = n;
        per.trials_ok = static_cast<int>(risks.size());
        per.trials_failed = total - per.trials_ok;
        double s = 0.0, s2 = 0.0;
        for (double r : risks) {
            s += r;
            s2 += r * r;
        }
        per.mean = risks.empty() ? 0.0 : s / static_cast<double>(risks.size());
        double var = risks.empty() ? 0.0
                                   : std::max(0.0, s2 / static_cast<double>(risks.size()) - per.mean * per.mean);
        per.mean_se = risks.empty() ? 0.0 : std::sqrt(var / static_cast<double>(risks.size()));
        per.quantile = quantile_of(risks, 1.0 - delta);
        per.bound = bound_value(id, n, delta, params);
        rep.per_n.push_back(per);
    }

    rep.constant_smallest_n = rep.per_n.front().bound > 0.0
                                  ? rep.per_n.front().quantile / rep.per_n.front().bound
                                  : 1.0;
    double num = 0.0, den = 0.0;
    for (const auto& per : rep.per_n) {
        num += per.quantile * per.bound;
        den += per.bound * per.bound;
    }
    rep.constant_lsq = den > 0.0 ? num / den : 1.0;

    rep.satisfied = true;
    for (auto& per : rep.per_n) {
        per.fitted_constant = per.bound > 0.0 ? per.quantile / per.bound : 0.0;
        per.applied_bound = rep.fitted ? rep.constant_smallest_n * per.bound : per.bound;
        std::vector<double> risks = ok_risks(table, per.n);
        int bad = 0;
        for (double r : risks)
            if (r > per.applied_bound + 1e-12) ++bad;
        per.violation_fraction =
            risks.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(risks.size());
        if (rep.expectation) {
            if (per.mean + 3.0 * per.mean_se > per.bound) rep.satisfied = false;
        } else if (!rep.fitted) {
            if (per.quantile > per.bound) rep.satisfied = false;
        } else if (per.n != rep.per_n.front().n) {
            double slack = delta + 3.0 * std::sqrt(delta * (1.0 - delta) /
                                                   std::max(1, per.trials_ok));
            if (per.violation_fraction > slack) rep.satisfied = false;
        }
    }
    return rep;
}

RateFit rate_fit(const RiskTable& table, const Statistic& stat) {
    std::vector<int> ns;
    for (const auto& r : table.rows)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());
    if (ns.size() < 4) throw config_error("rate fit needs at least 4 grid points");
    if (static_cast<double>(ns.back()) / ns.front() < 8.0)
        throw config_error("rate fit needs the n grid to span a factor of 8");

    std::vector<double> xs, ys;
    RateFit fit;
    for (int n : ns) {
        std::vector<double> risks;
        for (const auto& r : table.rows)
            if (r.n == n && r.status == "ok") risks.push_back(r.excess);
        double v;
        if (stat.kind == Statistic::Kind::mean) {
            double s = 0.0;
            for (double r : risks) s += r;
            v = risks.empty() ? 0.0 : s / static_cast<double>(risks.size());
        } else {
            v = quantile_of(risks, stat.q);
        }
        if (v <= 0.0) {
            fit.truncated_zeros = true;
            break; // fit on the nonzero prefix
        }
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 2) throw config_error("rate fit degenerate: fewer than 2 nonzero statistics");
    const int m = static_cast<int>(xs.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < m; ++i) {
        mx += xs[static_cast<std::size_t>(i)];
        my += ys[static_cast<std::size_t>(i)];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sxx += (xs[static_cast<std::size_t>(i)] - mx) * (xs[static_cast<std::size_t>(i)] - mx);
        sxy += (xs[static_cast<std::size_t>(i)] - mx) * (ys[static_cast<std::size_t>(i)] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (int i = 0; i < m; ++i) {
        double e = ys[static_cast<std::size_t>(i)] - (fit.intercept + fit.slope * xs[static_cast<std::size_t>(i)]);
        rss += e * e;
    }
    fit.slope_se = m > 2 ? std::sqrt(rss / (m - 2) / sxx) : 0.0;
    fit.points_used = m;
    return fit;
}

// ---- adversarial family ---------------------------------------------------------

AdversarialReport adversarial_family_eval(int d, double h, int n, int packing_cap, int trials,
                                          double delta, int class_count, int cloud_points,
                                          std::uint64_t master_seed, int jobs) {
    if (d != 2) throw config_error("the adversarial family is implemented for d = 2");
    if (h <= 0.0 || h > 1.0) throw config_error("margin h must lie in (0, 1]");
    const double B = 1.0 / h;
    if (B > std::sqrt(static_cast<double>(n) / d))
        throw config_error("B = 1/h exceeds sqrt(n/d); the hard-family regime does not apply");

    AdversarialReport rep;
    rep.d = d;
    rep.n = n;
    rep.h = h;
    rep.eps = std::min(1.0, d * (1.0 - h) / (n * h * h));
    if (rep.eps <= 0.0) rep.eps = 1.0 / n; // h = 1: realizable, degenerate packing scale
    int packing = static_cast<int>(std::floor(2.0 / rep.eps));
    packing = std::max(1, std::min(packing, packing_cap));
    rep.packing_size = packing;

    HypothesisClass cls = make_halfspace_grid(2, class_count);
    HypothesisClass pack = make_halfspace_grid(2, packing);
    // recheck the packing property exactly via the angle formula
    DistributionSpec probe;
    probe.marginal = uniform_ball(2);
    probe.f_star = pack.members[0];
    for (int i = 0; i < pack.size(); ++i)
        for (int j = i + 1; j < pack.size(); ++j) {
            double dis = disagreement_mass(pack.members[static_cast<std::size_t>(i)],
                                           pack.members[static_cast<std::size_t>(j)], probe)
                             .value;
            if (dis < rep.eps - 1e-12 && packing > 1)
                throw config_error("packing construction violated the separation");
        }

    // one net serves the whole family: binary loss-class distances depend on
    // the marginal only, not on the label noise
    DistributionSpec spec0;
    spec0.marginal = uniform_ball(2);
    spec0.noise = NoiseKind::massart;
    spec0.margin_h = h;
    spec0.f_star = cls.members[0];
    MetricCloud cloud = build_cloud(cls, spec0, LossKind::binary, cloud_points,
                                    kEvalSeed, CloudMode::loss_class);
    EntropySolver solver(cloud, jobs);
    FixedPointResult fp = solver.fixed_point(B / n, 1.0, B, FixedPointKind::gamma);
    double eta = std::min(1.0, std::max(1e-6, select_eta(n, delta, 1.0, B, fp, EtaVariant::cor)));
    EpsilonNet net = build_epsilon_net(solver, eta);

    rep.mean_excess_per_f.assign(static_cast<std::size_t>(packing), 0.0);
    std::vector<double> sums(static_cast<std::size_t>(packing) * trials, 0.0);
    parallel_for(static_cast<long>(packing) * trials, jobs, [&](long idx) {
        int fi = static_cast<int>(idx / trials);
        int tr = static_cast<int>(idx % trials);
        DistributionSpec spec_f = spec0;
        spec_f.f_star = pack.members[static_cast<std::size_t>(fi)];
        std::uint64_t seed = derive_seed(master_seed, "adversarial", static_cast<std::uint64_t>(fi),
                                         static_cast<std::uint64_t>(tr));
        Sample s = generate_sample(spec_f, n, seed);
        NetErmOutput out = net_erm(net, cloud, s, LossKind::binary);
        const Hypothesis& hyp = cls.members[static_cast<std::size_t>(out.hypothesis_index)];
        sums[static_cast<std::size_t>(idx)] = excess_risk(hyp, spec_f, LossKind::binary).value;
    });
    for (int fi = 0; fi < packing; ++fi) {
        double s = 0.0;
        for (int tr = 0; tr < trials; ++tr)
            s += sums[static_cast<std::size_t>(fi) * trials + static_cast<std::size_t>(tr)];
        rep.mean_excess_per_f[static_cast<std::size_t>(fi)] = s / trials;
    }
    rep.worst_mean_excess = *std::max_element(rep.mean_excess_per_f.begin(),
                                              rep.mean_excess_per_f.end());
    rep.lower_reference = d * (1.0 - h) / (n * h);
    BoundParams bp;
    bp.d = d;
    bp.beta = 1.0;
    bp.B = B;
    rep.upper_value = bound_value(BoundId::logconc_rate, n, delta, bp);
    rep.fitted_constant = rep.upper_value > 0.0 ? rep.worst_mean_excess / rep.upper_value : 0.0;
    return rep;
}

// ---- output ---------------------------------------------------------------------

std::string risk_table_csv(const RiskTable& table) {
    std::string out = "learner_id,n,trial,seed,risk,excess,aux,status\n";
    char buf[256];
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%llu,%.17g,%.17g,%.17g,%s\n",
                      r.learner_id.c_str(), r.n, r.trial,
                      static_cast<unsigned long long>(r.seed), r.risk, r.excess, r.aux,
                      r.status.c_str());
        out += buf;
    }
    return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw config_error("cannot open output file: " + tmp);
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace risklab
