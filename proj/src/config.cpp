#include "risklab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace risklab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

const std::vector<std::string>& known_keys(const std::string& section) {
    static const std::vector<std::string> top{
        "subcommand", "n_grid", "trials", "delta",    "master_seed", "jobs",  "format",
        "out_dir",    "bound",  "scheme", "epsilons", "k",           "h",     "packing_cap"};
    static const std::vector<std::string> dist{"marginal", "dim",   "noise",       "margin",
                                               "sigma",    "atoms", "weights", "fstar_index"};
    static const std::vector<std::string> cls{"kind", "dim", "count", "lo", "hi", "tables"};
    static const std::vector<std::string> learner{"kind",    "scheme",       "beta",       "B",
                                                  "variant", "cloud_points", "eval_points"};
    if (section == "distribution") return dist;
    if (section == "class") return cls;
    if (section == "learner") return learner;
    return top;
}

std::string suggest(const std::string& key, const std::string& section) {
    const auto& keys = known_keys(section);
    int best = 1000;
    std::string pick;
    for (const auto& k : keys) {
        int d = edit_distance(key, k);
        if (d < best) {
            best = d;
            pick = k;
        }
    }
    if (best <= 3 && !pick.empty()) return " (did you mean '" + pick + "'?)";
    return "";
}

struct Parser {
    ExperimentConfig cfg;
    std::vector<std::string> errors;

    bool to_double(const std::string& key, const std::string& v, double* out) {
        try {
            std::size_t pos = 0;
            *out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return true;
        } catch (...) {
            errors.push_back("key '" + key + "': not a number: '" + v + "'");
            return false;
        }
    }
    bool to_int(const std::string& key, const std::string& v, int* out) {
        double d = 0;
        if (!to_double(key, v, &d)) return false;
        if (d != std::floor(d)) {
            errors.push_back("key '" + key + "': not an integer: '" + v + "'");
            return false;
        }
        *out = static_cast<int>(d);
        return true;
    }
    bool to_u64(const std::string& key, const std::string& v, std::uint64_t* out) {
        try {
            std::size_t pos = 0;
            *out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return true;
        } catch (...) {
            errors.push_back("key '" + key + "': not an unsigned integer: '" + v + "'");
            return false;
        }
    }
    std::vector<Vec> to_rows(const std::string& key, const std::string& v) {
        // rows separated by ';', coordinates by ','
        std::vector<Vec> rows;
        std::stringstream ss(v);
        std::string row;
        while (std::getline(ss, row, ';')) {
            Vec r;
            for (const auto& item : split_list(row)) {
                double d = 0;
                if (!to_double(key, item, &d)) return {};
                r.push_back(d);
            }
            if (!r.empty()) rows.push_back(std::move(r));
        }
        return rows;
    }

    void top_level(const std::string& key, const std::string& v) {
        if (key == "subcommand") cfg.subcommand = v;
        else if (key == "n_grid") {
            cfg.n_grid.clear();
            for (const auto& item : split_list(v)) {
                int n = 0;
                if (to_int(key, item, &n)) cfg.n_grid.push_back(n);
            }
        } else if (key == "trials") to_int(key, v, &cfg.trials);
        else if (key == "delta") to_double(key, v, &cfg.delta);
        else if (key == "master_seed") to_u64(key, v, &cfg.master_seed);
        else if (key == "jobs") to_int(key, v, &cfg.jobs);
        else if (key == "format") cfg.format = v;
        else if (key == "out_dir") cfg.out_dir = v;
        else if (key == "bound") cfg.bound = v;
        else if (key == "scheme") cfg.scheme = v;
        else if (key == "epsilons") {
            cfg.epsilons.clear();
            for (const auto& item : split_list(v)) {
                double d = 0;
                if (to_double(key, item, &d)) cfg.epsilons.push_back(d);
            }
        } else if (key == "k") to_double(key, v, &cfg.k_param);
        else if (key == "h") to_double(key, v, &cfg.h);
        else if (key == "packing_cap") to_int(key, v, &cfg.packing_cap);
        else errors.push_back("unknown key '" + key + "'" + suggest(key, ""));
    }

    void distribution(const std::string& key, const std::string& v) {
        auto& d = cfg.distribution;
        if (key == "marginal") d.marginal = v;
        else if (key == "dim") to_int(key, v, &d.dim);
        else if (key == "noise") d.noise = v;
        else if (key == "margin") to_double(key, v, &d.margin);
        else if (key == "sigma") to_double(key, v, &d.sigma);
        else if (key == "atoms") d.atoms = to_rows(key, v);
        else if (key == "weights") {
            d.weights.clear();
            for (const auto& item : split_list(v)) {
                double w = 0;
                if (to_double(key, item, &w)) d.weights.push_back(w);
            }
        } else if (key == "fstar_index") to_int(key, v, &d.fstar_index);
        else errors.push_back("unknown key 'distribution." + key + "'" + suggest(key, "distribution"));
    }

    void klass(const std::string& key, const std::string& v) {
        auto& c = cfg.cls;
        if (key == "kind") c.kind = v;
        else if (key == "dim") to_int(key, v, &c.dim);
        else if (key == "count") to_int(key, v, &c.count);
        else if (key == "lo") to_double(key, v, &c.lo);
        else if (key == "hi") to_double(key, v, &c.hi);
        else if (key == "tables") c.tables = to_rows(key, v);
        else errors.push_back("unknown key 'class." + key + "'" + suggest(key, "class"));
    }

    void learner(const std::string& key, const std::string& v) {
        auto& l = cfg.learner;
        if (key == "kind") l.kind = v;
        else if (key == "scheme") l.scheme = v;
        else if (key == "beta") to_double(key, v, &l.beta);
        else if (key == "B") to_double(key, v, &l.B);
        else if (key == "variant") l.variant = v;
        else if (key == "cloud_points") to_int(key, v, &l.cloud_points);
        else if (key == "eval_points") to_int(key, v, &l.eval_points);
        else errors.push_back("unknown key 'learner." + key + "'" + suggest(key, "learner"));
    }

    void finish_validation() {
        for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
            if (cfg.n_grid[i] <= cfg.n_grid[i - 1]) {
                errors.push_back("n_grid not increasing");
                break;
            }
        for (int n : cfg.n_grid)
            if (n < 1) {
                errors.push_back("n_grid entries must be >= 1");
                break;
            }
        if (cfg.delta <= 0.0 || cfg.delta >= 1.0) errors.push_back("delta must lie in (0, 1)");
        if (cfg.trials < 1) errors.push_back("trials must be >= 1");
        if (cfg.format != "csv" && cfg.format != "json")
            errors.push_back("format must be csv or json");
        if (!cfg.subcommand.empty()) {
            static const std::vector<std::string> subs{"entropy", "net-erm", "compress",
                                                       "svm",     "experiment", "audit"};
            if (std::find(subs.begin(), subs.end(), cfg.subcommand) == subs.end())
                errors.push_back("unknown subcommand '" + cfg.subcommand + "'");
        }
        if (cfg.distribution.noise == "massart" &&
            (cfg.distribution.margin <= 0.0 || cfg.distribution.margin > 1.0))
            errors.push_back("distribution.margin must lie in (0, 1]");
        if (cfg.distribution.sigma < 0.0 || cfg.distribution.sigma > 0.25)
            errors.push_back("distribution.sigma must lie in [0, 0.25]");
        for (double e : cfg.epsilons)
            if (e <= 0.0 || e > 1.0) {
                errors.push_back("epsilons must lie in (0, 1]");
                break;
            }
    }
};

} // namespace

ParseResult parse_config(const std::string& text) {
    Parser p;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                p.errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section != "distribution" && section != "class" && section != "learner")
                p.errors.push_back("line " + std::to_string(lineno) + ": unknown section [" +
                                   section + "]");
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            p.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            p.errors.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (section.empty()) p.top_level(key, value);
        else if (section == "distribution") p.distribution(key, value);
        else if (section == "class") p.klass(key, value);
        else if (section == "learner") p.learner(key, value);
    }
    p.finish_validation();
    ParseResult res;
    res.errors = p.errors;
    if (res.errors.empty()) res.config = p.cfg;
    return res;
}

std::vector<std::string> validate_for_subcommand(const ExperimentConfig& cfg) {
    std::vector<std::string> missing;
    if (cfg.subcommand.empty()) missing.push_back("subcommand");
    if (cfg.subcommand == "experiment") {
        if (cfg.bound.empty()) missing.push_back("bound");
        if (cfg.scheme.empty() && cfg.learner.kind.empty()) missing.push_back("scheme");
    }
    if (cfg.subcommand == "audit" || cfg.subcommand == "compress") {
        if (cfg.scheme.empty()) missing.push_back("scheme");
    }
    return missing;
}

HypothesisClass build_class(const ExperimentConfig& cfg) {
    const auto& c = cfg.cls;
    if (c.kind == "homogeneous-halfspace") return make_halfspace_grid(c.dim, c.count);
    if (c.kind == "constant-grid") return make_constant_grid(c.lo, c.hi, c.count);
    if (c.kind == "finite") return make_finite_class(c.tables);
    throw config_error("unknown class kind '" + c.kind + "'");
}

DistributionSpec build_distribution(const ExperimentConfig& cfg, const HypothesisClass& cls) {
    const auto& d = cfg.distribution;
    DistributionSpec spec;
    if (d.marginal == "uniform-ball") spec.marginal = uniform_ball(d.dim);
    else if (d.marginal == "uniform-sphere") spec.marginal = uniform_sphere(d.dim);
    else if (d.marginal == "finite-support") spec.marginal = finite_support(d.atoms, d.weights);
    else throw config_error("unknown marginal '" + d.marginal + "'");

    if (d.noise == "realizable") spec.noise = NoiseKind::realizable;
    else if (d.noise == "massart") {
        spec.noise = NoiseKind::massart;
        spec.margin_h = d.margin;
    } else if (d.noise == "regression") {
        spec.noise = NoiseKind::regression;
        spec.sigma = d.sigma;
    } else throw config_error("unknown noise '" + d.noise + "'");

    if (d.fstar_index < 0 || d.fstar_index >= cls.size())
        throw config_error("fstar_index outside the class");
    spec.f_star = cls.members[static_cast<std::size_t>(d.fstar_index)];
    return spec;
}

std::string render_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "subcommand = " << cfg.subcommand << "\n";
    os << "n_grid = ";
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) os << (i ? ", " : "") << cfg.n_grid[i];
    os << "\ntrials = " << cfg.trials << "\ndelta = " << cfg.delta
       << "\nmaster_seed = " << cfg.master_seed << "\njobs = " << cfg.jobs
       << "\nformat = " << cfg.format << "\nout_dir = " << cfg.out_dir << "\n";
    if (!cfg.bound.empty()) os << "bound = " << cfg.bound << "\n";
    if (!cfg.scheme.empty()) os << "scheme = " << cfg.scheme << "\n";
    os << "epsilons = ";
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) os << (i ? ", " : "") << cfg.epsilons[i];
    os << "\nh = " << cfg.h << "\npacking_cap = " << cfg.packing_cap << "\n";
    os << "\n[distribution]\nmarginal = " << cfg.distribution.marginal
       << "\ndim = " << cfg.distribution.dim << "\nnoise = " << cfg.distribution.noise
       << "\nmargin = " << cfg.distribution.margin << "\nsigma = " << cfg.distribution.sigma
       << "\nfstar_index = " << cfg.distribution.fstar_index << "\n";
    os << "\n[class]\nkind = " << cfg.cls.kind << "\ndim = " << cfg.cls.dim
       << "\ncount = " << cfg.cls.count << "\nlo = " << cfg.cls.lo << "\nhi = " << cfg.cls.hi
       << "\n";
    os << "\n[learner]\nkind = " << cfg.learner.kind << "\nscheme = " << cfg.learner.scheme
       << "\nbeta = " << cfg.learner.beta << "\nB = " << cfg.learner.B
       << "\nvariant = " << cfg.learner.variant << "\ncloud_points = " << cfg.learner.cloud_points
       << "\neval_points = " << cfg.learner.eval_points << "\n";
    return os.str();
}

} // namespace risklab
