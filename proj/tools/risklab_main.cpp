// risklab: desk-scale experiments for excess-risk bounds, compression
// schemes, and local entropies. See README.md for the config grammar.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "risklab/config.hpp"
#include "risklab/harness.hpp"

using namespace risklab;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot read config file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::shared_ptr<const HypothesisClass> finite_class_16() {
    std::vector<Vec> tables;
    for (int m = 0; m < 16; ++m) {
        Vec t(8);
        for (int j = 0; j < 8; ++j) t[static_cast<std::size_t>(j)] = ((m >> (j % 4)) & 1) ? 1.0 : -1.0;
        t[4] = (m & 1) ? 1.0 : -1.0;
        t[5] = (m & 2) ? 1.0 : -1.0;
        t[6] = (m & 4) ? 1.0 : -1.0;
        t[7] = (m & 8) ? 1.0 : -1.0;
        tables.push_back(t);
    }
    return std::make_shared<HypothesisClass>(make_finite_class(tables));
}

DistributionSpec default_spec_for_scheme(const std::string& scheme,
                                         const std::shared_ptr<const HypothesisClass>& halving_cls) {
    DistributionSpec spec;
    if (scheme == "intervals") {
        spec.marginal = uniform_ball(1);
        spec.f_star = make_interval(-0.3, 0.5);
    } else if (scheme == "rectangles") {
        spec.marginal = uniform_ball(2);
        spec.f_star = make_box({-0.4, -0.3}, {0.5, 0.6});
    } else if (scheme == "svm" || scheme == "perceptron") {
        spec.marginal = uniform_ball(2);
        spec.f_star = make_homogeneous({1.0, 0.0});
    } else if (scheme == "halving") {
        std::vector<Vec> atoms;
        for (int j = 0; j < 8; ++j) atoms.push_back({static_cast<double>(j)});
        spec.marginal = finite_support(atoms, Vec(8, 0.125));
        spec.f_star = halving_cls->members[5];
    } else {
        throw config_error("unknown scheme '" + scheme + "'");
    }
    return spec;
}

std::shared_ptr<const CompressionScheme> make_scheme(const std::string& name,
                                                     const std::shared_ptr<const HypothesisClass>& halving_cls) {
    if (name == "intervals") return closure_scheme_intervals();
    if (name == "rectangles") return closure_scheme_rectangles(2);
    if (name == "svm") return svm_scheme(2);
    if (name == "halving") return online_to_batch(std::shared_ptr<OnlineLearner>(halving_learner(halving_cls)), "halving16");
    if (name == "perceptron")
        return online_to_batch(std::shared_ptr<OnlineLearner>(perceptron_learner(2, 25)), "perceptron");
    throw config_error("unknown scheme '" + name + "'");
}

double default_k(const std::string& scheme) {
    if (scheme == "intervals") return 2;
    if (scheme == "rectangles") return 4;
    if (scheme == "svm") return 3;
    if (scheme == "halving") return 4;
    if (scheme == "perceptron") return 25;
    return 0;
}

// margin-conditioned realizable halfspace draw used by the perceptron audit
Sample margin_sample(const DistributionSpec& spec, int n, double gamma, std::uint64_t seed) {
    Rng rng(seed);
    Sample s;
    s.seed = seed;
    while (s.size() < n) {
        Point p = draw_point(spec.marginal, rng);
        if (std::abs(p.x[0]) < gamma) continue;
        double y = evaluate(spec.f_star, p);
        s.examples.push_back({std::move(p), y});
    }
    return s;
}

std::vector<Sample> audit_samples(const std::string& scheme, const DistributionSpec& spec,
                                  int count, std::uint64_t master_seed) {
    std::vector<Sample> out;
    for (int i = 0; i < count; ++i) {
        Rng pick(derive_seed(master_seed, "audit-size", 0, static_cast<std::uint64_t>(i)));
        int n = 4 + static_cast<int>(pick.next_below(17)); // sizes 4..20
        std::uint64_t seed = derive_seed(master_seed, "audit", 1, static_cast<std::uint64_t>(i));
        if (scheme == "perceptron") out.push_back(margin_sample(spec, n, 0.2, seed));
        else out.push_back(generate_sample(spec, n, seed));
    }
    return out;
}

json bound_report_json(const BoundReport& rep) {
    json j;
    j["bound_id"] = rep.bound_id;
    j["delta"] = rep.delta;
    j["expectation"] = rep.expectation;
    j["fitted"] = rep.fitted;
    j["constant_smallest_n"] = rep.constant_smallest_n;
    j["constant_lsq"] = rep.constant_lsq;
    j["satisfied"] = rep.satisfied;
    j["per_n"] = json::array();
    for (const auto& p : rep.per_n) {
        json row;
        row["n"] = p.n;
        row["trials_ok"] = p.trials_ok;
        row["trials_failed"] = p.trials_failed;
        row["mean"] = p.mean;
        row["mean_se"] = p.mean_se;
        row["quantile"] = p.quantile;
        row["bound"] = p.bound;
        row["applied_bound"] = p.applied_bound;
        row["fitted_constant"] = p.fitted_constant;
        row["violation_fraction"] = p.violation_fraction;
        j["per_n"].push_back(row);
    }
    return j;
}

void print_bound_summary(const BoundReport& rep) {
    std::printf("bound %-22s delta=%.3g %s\n", rep.bound_id.c_str(), rep.delta,
                rep.satisfied ? "SATISFIED" : "VIOLATED");
    for (const auto& p : rep.per_n) {
        if (rep.expectation)
            std::printf("  n=%-6d mean=%.5f (+3se %.5f)  bound=%.5f  failed=%d\n", p.n, p.mean,
                        p.mean + 3 * p.mean_se, p.bound, p.trials_failed);
        else
            std::printf("  n=%-6d q%.0f=%.5f  bound=%.5f  applied=%.5f  viol=%.4f  failed=%d\n",
                        p.n, 100 * (1 - rep.delta), p.quantile, p.bound, p.applied_bound,
                        p.violation_fraction, p.trials_failed);
    }
}

struct Paths {
    std::string out_dir;
    std::string file(const std::string& name) const { return out_dir + "/" + name; }
};

int run_audit(const ExperimentConfig& cfg) {
    auto halving_cls = finite_class_16();
    auto scheme = make_scheme(cfg.scheme, halving_cls);
    DistributionSpec spec = default_spec_for_scheme(cfg.scheme, halving_cls);
    std::vector<Sample> samples = audit_samples(cfg.scheme, spec, cfg.trials, cfg.master_seed);
    SchemeAudit a = audit(*scheme, samples);

    json j;
    j["scheme_id"] = scheme->id();
    j["seed"] = cfg.master_seed;
    j["samples"] = a.samples_checked;
    j["valid"] = a.valid;
    j["permutation_invariant"] = a.permutation_invariant;
    j["stable"] = a.stable;
    j["homogeneous"] = a.homogeneous;
    j["counterexample"] = a.counterexample;

    // small exhaustive psi table
    j["psi"] = json::array();
    if (cfg.scheme == "intervals" || cfg.scheme == "rectangles" || cfg.scheme == "svm") {
        const double k = default_k(cfg.scheme);
        for (int p = 1; p <= 2; ++p) {
            for (int rep = 0; rep < 5; ++rep) {
                Sample pts = generate_sample(spec, 7 + p,
                                             derive_seed(cfg.master_seed, "psi", static_cast<std::uint64_t>(p), rep));
                try {
                    PsiCount c = count_psi(*scheme, pts.examples, p);
                    json row;
                    row["scheme_id"] = c.scheme_id;
                    row["seed"] = derive_seed(cfg.master_seed, "psi", static_cast<std::uint64_t>(p), rep);
                    row["n"] = c.n;
                    row["p"] = c.p;
                    row["value"] = c.value;
                    row["bound_stable"] = std::pow(k, p);
                    j["psi"].push_back(row);
                } catch (const std::exception&) {
                    // non-realizable draws for this scheme are skipped
                }
            }
        }
    }
    Paths paths{cfg.out_dir};
    write_text_atomic(paths.file("audit_" + cfg.scheme + ".json"), j.dump(2) + "\n");
    write_text_atomic(paths.file("config.resolved.txt"), render_config(cfg));

    bool need_homog = cfg.scheme == "intervals" || cfg.scheme == "rectangles";
    bool pass = a.valid && a.permutation_invariant && a.stable && (!need_homog || a.homogeneous);
    std::printf("audit %s: valid=%d perm=%d stable=%d homogeneous=%d (%d samples)\n",
                cfg.scheme.c_str(), a.valid, a.permutation_invariant, a.stable, a.homogeneous,
                a.samples_checked);
    if (!a.counterexample.empty()) std::printf("  counterexample: %s\n", a.counterexample.c_str());
    return pass ? 0 : 1;
}

int run_experiment(const ExperimentConfig& cfg, const std::string& learner_kind) {
    Paths paths{cfg.out_dir};
    std::unique_ptr<TrialLearner> learner;
    DistributionSpec spec;
    BoundParams params;
    params.d = cfg.distribution.dim;
    params.beta = cfg.learner.beta;
    params.B = cfg.learner.B;

    auto halving_cls = finite_class_16();
    if (learner_kind == "scheme" || learner_kind == "majority3") {
        auto scheme = make_scheme(cfg.scheme, halving_cls);
        spec = default_spec_for_scheme(cfg.scheme, halving_cls);
        if (cfg.distribution.noise == "massart") {
            spec.noise = NoiseKind::massart;
            spec.margin_h = cfg.distribution.margin;
        }
        params.k = cfg.k_param > 0 ? cfg.k_param : default_k(cfg.scheme);
        learner = learner_kind == "scheme"
                      ? scheme_learner(spec, scheme, cfg.learner.eval_points, kEvalSeed)
                      : majority_learner(spec, scheme, cfg.learner.eval_points, kEvalSeed);
    } else if (learner_kind == "net-erm") {
        HypothesisClass cls = build_class(cfg);
        spec = build_distribution(cfg, cls);
        NetErmConfig nc;
        nc.cls = std::make_shared<HypothesisClass>(std::move(cls));
        nc.beta = cfg.learner.beta;
        nc.B = cfg.learner.B;
        nc.delta = cfg.delta;
        nc.variant = cfg.learner.variant == "mainbound" ? EtaVariant::mainbound : EtaVariant::cor;
        nc.cloud_points = cfg.learner.cloud_points;
        params.k = cfg.k_param;
        learner = net_erm_learner(spec, nc);
    } else if (learner_kind == "erm-full") {
        HypothesisClass cls = build_class(cfg);
        spec = build_distribution(cfg, cls);
        learner = full_erm_learner(spec, std::make_shared<HypothesisClass>(std::move(cls)),
                                   cfg.learner.cloud_points);
    } else if (learner_kind == "skeleton-l2") {
        HypothesisClass cls = build_class(cfg);
        spec = build_distribution(cfg, cls);
        SkeletonRegressionConfig sc;
        sc.cls = std::make_shared<HypothesisClass>(std::move(cls));
        sc.delta = cfg.delta;
        sc.cloud_points = cfg.learner.cloud_points;
        learner = skeleton_regression_learner(spec, sc);
    } else if (learner_kind == "constant") {
        HypothesisClass cls = build_class(cfg);
        spec = build_distribution(cfg, cls);
        learner = constant_learner(spec, LossKind::binary);
    } else {
        throw config_error("unknown learner kind '" + learner_kind + "'");
    }

    RiskTable table = run_trials(*learner, spec, cfg.n_grid, cfg.trials, cfg.master_seed, cfg.jobs);
    write_text_atomic(paths.file("risk_table.csv"), risk_table_csv(table));
    write_text_atomic(paths.file("config.resolved.txt"), render_config(cfg));

    bool pass = table.decomp_violations == 0;
    std::printf("trials: %zu rows, decompositions checked=%ld violations=%ld\n", table.rows.size(),
                table.decomp_checked, table.decomp_violations);

    if (!cfg.bound.empty()) {
        BoundReport rep = verify_bound(table, bound_from_name(cfg.bound), cfg.delta, params);
        if (cfg.format == "json")
            write_text_atomic(paths.file("bound_report.json"), bound_report_json(rep).dump(2) + "\n");
        else {
            std::string csv = "n,trials_ok,trials_failed,mean,mean_se,quantile,bound,applied_bound,violation_fraction\n";
            char buf[256];
            for (const auto& p : rep.per_n) {
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              p.n, p.trials_ok, p.trials_failed, p.mean, p.mean_se, p.quantile,
                              p.bound, p.applied_bound, p.violation_fraction);
                csv += buf;
            }
            write_text_atomic(paths.file("bound_report.csv"), csv);
        }
        print_bound_summary(rep);
        pass = pass && rep.satisfied;
    }
    if (cfg.n_grid.size() >= 4) {
        try {
            RateFit fit = rate_fit(table, Statistic::mean());
            std::printf("rate fit: slope=%.4f (se %.4f, %d points%s)\n", fit.slope, fit.slope_se,
                        fit.points_used, fit.truncated_zeros ? ", zeros truncated" : "");
        } catch (const config_error& e) {
            std::printf("rate fit skipped: %s\n", e.what());
        }
    }
    return pass ? 0 : 1;
}

int run_entropy(const ExperimentConfig& cfg) {
    HypothesisClass cls = build_class(cfg);
    DistributionSpec spec = build_distribution(cfg, cls);
    MetricCloud cloud = build_cloud(cls, spec, LossKind::binary, cfg.learner.cloud_points,
                                    kEvalSeed, CloudMode::loss_class);
    EntropySolver solver(cloud, cfg.jobs);
    LocalEntropyProfile prof =
        solver.profile(cfg.epsilons, cfg.learner.beta, cfg.learner.B, false);

    std::string csv = "eps,value,kind,solver\n";
    char buf[160];
    const char* solver_name = cloud.size() <= kExactCoverCap ? "exact" : "greedy";
    bool monotone = true;
    for (std::size_t i = 0; i < prof.epsilons.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,dloc,%s\n", prof.epsilons[i], prof.dloc[i],
                      solver_name);
        csv += buf;
        if (i > 0 && prof.dloc[i] > prof.dloc[i - 1] + 1e-12) monotone = false;
    }
    for (int n : cfg.n_grid) {
        FixedPointResult fp = solver.fixed_point(cfg.learner.B / n, cfg.learner.beta,
                                                 cfg.learner.B, FixedPointKind::gamma);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,gamma_n%d,%s\n", cfg.learner.B / n, fp.value,
                      n, solver_name);
        csv += buf;
    }
    Paths paths{cfg.out_dir};
    write_text_atomic(paths.file("entropy.csv"), csv);
    write_text_atomic(paths.file("config.resolved.txt"), render_config(cfg));
    std::printf("local entropy over %zu scales (%s solver); monotone=%d\n", prof.epsilons.size(),
                solver_name, monotone);
    for (std::size_t i = 0; i < prof.epsilons.size(); ++i)
        std::printf("  eps=%.4f  dloc=%.4f\n", prof.epsilons[i], prof.dloc[i]);
    return monotone ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risklab: excess-risk bounds, compression schemes, and local entropies at desk scale"};
    app.require_subcommand(1);
    app.fallthrough(true);

    std::string config_path, out_dir, format, scheme, bound, learner_kind;
    std::uint64_t seed = 0;
    int jobs = -1, trials = -1, single_n = 0;
    double delta = -1.0;
    std::vector<int> n_grid;

    app.add_option("--config", config_path, "config file (key = value grammar, see README)");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--jobs", jobs, "parallel workers (0 = all cores)");
    app.add_option("--format", format, "csv or json");

    CLI::App* sub_entropy = app.add_subcommand("entropy", "local entropy profile and fixed points");
    CLI::App* sub_net = app.add_subcommand("net-erm", "ERM over an epsilon-net of the class");
    CLI::App* sub_compress = app.add_subcommand("compress", "compression-scheme risk experiment");
    CLI::App* sub_svm = app.add_subcommand("svm", "hard-margin SVM scheme experiment");
    CLI::App* sub_exp = app.add_subcommand("experiment", "generic learner-vs-bound experiment");
    CLI::App* sub_audit = app.add_subcommand("audit", "validity/stability/homogeneity audit");

    for (CLI::App* s : {sub_compress, sub_exp, sub_audit})
        s->add_option("--scheme", scheme, "intervals|rectangles|svm|halving|perceptron");
    for (CLI::App* s : {sub_exp, sub_compress, sub_svm, sub_net})
        s->add_option("--bound", bound, "bound id to verify");
    for (CLI::App* s : {sub_entropy, sub_net, sub_compress, sub_svm, sub_exp, sub_audit}) {
        s->add_option("--trials", trials, "trials per grid point");
        s->add_option("--delta", delta, "confidence level");
        s->add_option("--n", single_n, "single sample size");
        s->add_option("--n-grid", n_grid, "sample size grid");
    }
    sub_exp->add_option("--learner", learner_kind, "net-erm|scheme|majority3|skeleton-l2|erm-full|constant");

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    if (!config_path.empty()) {
        ParseResult pr = parse_config(slurp(config_path));
        if (!pr.errors.empty()) {
            for (const auto& e : pr.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
            return 2;
        }
        cfg = *pr.config;
    }
    // flags override the config file
    if (app.count("--out-dir")) cfg.out_dir = out_dir;
    if (app.count("--seed")) cfg.master_seed = seed;
    if (app.count("--jobs")) cfg.jobs = jobs;
    if (app.count("--format")) cfg.format = format;
    if (trials >= 0) cfg.trials = trials;
    if (delta >= 0) cfg.delta = delta;
    if (!scheme.empty()) cfg.scheme = scheme;
    if (!bound.empty()) cfg.bound = bound;
    if (!n_grid.empty()) cfg.n_grid = n_grid;
    if (single_n > 0) cfg.n_grid = {single_n};

    if (app.got_subcommand(sub_entropy)) cfg.subcommand = "entropy";
    else if (app.got_subcommand(sub_net)) cfg.subcommand = "net-erm";
    else if (app.got_subcommand(sub_compress)) cfg.subcommand = "compress";
    else if (app.got_subcommand(sub_svm)) cfg.subcommand = "svm";
    else if (app.got_subcommand(sub_exp)) cfg.subcommand = "experiment";
    else if (app.got_subcommand(sub_audit)) cfg.subcommand = "audit";

    if (cfg.subcommand == "svm") {
        cfg.scheme = "svm";
        if (cfg.bound.empty()) cfg.bound = "k_over_n_plus_1";
    }

    std::string effective_kind;
    if (cfg.subcommand == "experiment")
        effective_kind = !learner_kind.empty() ? learner_kind
                         : !cfg.scheme.empty() ? "scheme"
                                               : cfg.learner.kind;
    const bool scheme_based = effective_kind == "scheme" || effective_kind == "majority3";

    auto missing = validate_for_subcommand(cfg);
    if (cfg.subcommand == "experiment" && !effective_kind.empty() && !scheme_based)
        std::erase_if(missing, [](const std::string& m) { return m == "bound" || m == "scheme"; });
    if (!missing.empty()) {
        std::fprintf(stderr, "missing required keys:");
        for (const auto& m : missing) std::fprintf(stderr, " %s", m.c_str());
        std::fprintf(stderr, "\n");
        return 2;
    }

    try {
        if (cfg.subcommand == "entropy") return run_entropy(cfg);
        if (cfg.subcommand == "audit") return run_audit(cfg);
        if (cfg.subcommand == "net-erm") return run_experiment(cfg, "net-erm");
        if (cfg.subcommand == "compress" || cfg.subcommand == "svm")
            return run_experiment(cfg, "scheme");
        if (cfg.subcommand == "experiment") return run_experiment(cfg, effective_kind);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
