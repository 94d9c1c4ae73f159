#include "risklab/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace risklab {

EpsilonNet build_epsilon_net(EntropySolver& solver, double eta) {
    if (!(eta > 0.0)) throw config_error("net radius eta must be > 0");
    if (solver.cloud().mode == CloudMode::excess_loss_class)
        throw config_error("nets are built on loss-class or raw-class clouds");
    EpsilonNet net;
    net.eta = eta;
    net.r = solver.cloud().r;
    net.member_indices = solver.cover_centers(eta, CoverSolver::greedy);
    std::sort(net.member_indices.begin(), net.member_indices.end());
    return net;
}

double select_eta(int n, double delta, double beta, double B, const FixedPointResult& fp,
                  EtaVariant variant) {
    if (delta <= 0.0 || delta >= 1.0) throw config_error("delta must lie in (0, 1)");
    if (n < 1) throw config_error("select_eta needs n >= 1");
    double base = fp.value + B * std::log(1.0 / delta) / n;
    if (variant == EtaVariant::cor) return std::pow(base, 1.0 / (2.0 - beta));
    return B * std::pow(base, beta / (2.0 - beta));
}

NetErmOutput net_erm(const EpsilonNet& net, const MetricCloud& cloud, const Sample& sample,
                     LossKind loss) {
    if (net.member_indices.empty()) throw config_error("net ERM over empty net");
    if (!cloud.cls) throw config_error("cloud lacks class provenance");
    NetErmOutput out;
    out.eta_used = net.eta;
    std::vector<double> risks;
    risks.reserve(net.member_indices.size());
    double best = 0.0;
    for (std::size_t pos = 0; pos < net.member_indices.size(); ++pos) {
        int hyp = cloud.labels[static_cast<std::size_t>(net.member_indices[pos])];
        double r = empirical_risk(cloud.cls->members[static_cast<std::size_t>(hyp)], sample, loss);
        risks.push_back(r);
        if (pos == 0 || r < best) {
            best = r;
            out.chosen_index = static_cast<int>(pos);
            out.hypothesis_index = hyp;
        }
    }
    out.empirical_risk = best;
    out.tie_count = 0;
    for (double r : risks)
        if (r <= best + 1e-12) ++out.tie_count;
    return out;
}

StrongerCondReport check_strongercond(const EpsilonNet& net, const MetricCloud& excess_cloud,
                                      double eta, double beta, double B) {
    if (excess_cloud.mode != CloudMode::excess_loss_class)
        throw config_error("check_strongercond needs an excess-loss cloud");
    StrongerCondReport rep;
    rep.eta = eta;
    rep.beta = beta;
    rep.B = B;

    std::vector<double> pg(net.member_indices.size()), pabs(net.member_indices.size());
    for (std::size_t pos = 0; pos < net.member_indices.size(); ++pos) {
        int idx = net.member_indices[pos];
        const Vec& row = excess_cloud.vectors[static_cast<std::size_t>(idx)];
        double s = 0.0, a = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            s += excess_cloud.weights[j] * row[j];
            a += excess_cloud.weights[j] * std::abs(row[j]);
        }
        pg[pos] = s;
        pabs[pos] = a;
        if (a <= eta) rep.feasible.push_back(static_cast<int>(pos));
        if (a >= eta / 2.0 && a <= 2.0 * eta) rep.eligible.push_back(static_cast<int>(pos));
    }
    rep.vacuous = rep.feasible.empty();
    auto holds_at = [&](double c) {
        for (int pos : rep.feasible) {
            double target = c * B * std::pow(std::max(0.0, pg[static_cast<std::size_t>(pos)]), beta);
            if (pabs[static_cast<std::size_t>(pos)] >= target - 1e-12) return true;
        }
        return false;
    };
    rep.holds_c1 = holds_at(1.0);
    rep.holds_c05 = holds_at(0.5);
    rep.holds_c025 = holds_at(0.25);

    const DistributionSpec* spec = excess_cloud.spec.get();
    bool massart_like = spec && excess_cloud.loss == LossKind::binary &&
                        (spec->noise == NoiseKind::massart || spec->noise == NoiseKind::realizable);
    if (massart_like) {
        int pick = !rep.eligible.empty() ? rep.eligible.front()
                   : !rep.feasible.empty() ? rep.feasible.front()
                                           : -1;
        if (pick >= 0) {
            double h = spec->noise == NoiseKind::massart ? spec->margin_h : 1.0;
            rep.tail_computed = true;
            rep.t0 = beta < 1.0 ? std::pow(B, -1.0 / beta) * std::pow(eta, (1.0 - beta) / beta)
                                : 1.0 / B;
            // constant margin: |xi(X)| = h everywhere, so the tail event is
            // all of {f != f*} when h >= t0 and empty otherwise
            double disagreement = pabs[static_cast<std::size_t>(pick)];
            rep.tail_mass = h >= rep.t0 ? disagreement : 0.0;
            rep.tail_bound = beta < 1.0 ? std::pow(B * rep.t0, 1.0 / (1.0 - beta)) : 1.0;
            rep.tail_ok = rep.tail_mass <= rep.tail_bound + 1e-12;
        }
    }
    return rep;
}

SkeletonRegressionResult skeleton_l2_regression(const HypothesisClass& cls,
                                                const DistributionSpec& spec,
                                                const Sample& sample, double delta, int m,
                                                std::uint64_t seed) {
    if (spec.noise != NoiseKind::regression)
        throw config_error("skeleton regression needs the bounded zero-mean noise model");
    if (delta <= 0.0 || delta >= 1.0) throw config_error("delta must lie in (0, 1)");
    for (const auto& h : cls.members) {
        if (h.kind == ClassKind::regression_grid && std::abs(h.constant) > 1.0)
            throw config_error("regression class must map into [-1, 1]");
        if (h.kind == ClassKind::finite)
            for (double v : h.table)
                if (std::abs(v) > 1.0) throw config_error("regression class must map into [-1, 1]");
    }

    SkeletonRegressionResult res;
    res.cloud = build_cloud(cls, spec, LossKind::square, m, seed, CloudMode::raw_class, 2);
    EntropySolver solver(res.cloud);
    const int n = sample.size();
    res.zeta = solver.fixed_point(1.0 / n, 1.0, 1.0, FixedPointKind::zeta);
    res.eta = res.zeta.value + std::sqrt(std::log(1.0 / delta) / n);
    res.net = build_epsilon_net(solver, res.eta);
    res.erm = net_erm(res.net, res.cloud, sample, LossKind::square);
    return res;
}

double cloud_mean(const MetricCloud& cloud, int member) {
    const Vec& row = cloud.vectors[static_cast<std::size_t>(member)];
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += cloud.weights[j] * row[j];
    return s;
}

double empirical_cloud_value(const MetricCloud& cloud, int member, const Sample& sample) {
    if (!cloud.cls || !cloud.spec) throw config_error("cloud lacks provenance");
    if (cloud.mode == CloudMode::raw_class)
        throw config_error("empirical values are defined for loss/excess clouds");
    int hyp = cloud.labels[static_cast<std::size_t>(member)];
    double s = empirical_risk(cloud.cls->members[static_cast<std::size_t>(hyp)], sample, cloud.loss);
    if (cloud.mode == CloudMode::excess_loss_class)
        s -= empirical_risk(cloud.spec->f_star, sample, cloud.loss);
    return s;
}

double shifted_process_sup(const MetricCloud& cloud, const Sample& sample, double c,
                           ShiftDirection dir) {
    if (cloud.size() == 0) throw config_error("shifted process over empty cloud");
    double best = -1e300;
    for (int i = 0; i < cloud.size(); ++i) {
        double pg = cloud_mean(cloud, i);
        double png = empirical_cloud_value(cloud, i, sample);
        double v = dir == ShiftDirection::forward
                       ? pg - (1.0 + c) * png
                       : png - (1.0 + 2.0 * c) / (1.0 + c) * pg;
        best = std::max(best, v);
    }
    return best;
}

} // namespace risklab
