// Compares the OpenMP kernels against their serial reference implementations:
// pairwise cloud distances, the local-entropy center sweep, and the Monte
// Carlo trial engine. Results must match bit for bit; timings are printed.

#include <chrono>
#include <cstdio>

#include "risklab/harness.hpp"
#include "risklab/parallel.hpp"

using namespace risklab;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

} // namespace

int main() {
    std::printf("jobs available: %d\n\n", effective_jobs(0));

    // 1. distance kernel
    {
        HypothesisClass cls = make_halfspace_grid(2, 360);
        DistributionSpec spec;
        spec.marginal = uniform_sphere(2);
        spec.f_star = cls.members[0];
        MetricCloud cloud = build_cloud(cls, spec, LossKind::binary, 20000, 7, CloudMode::loss_class);

        auto t0 = clock_type::now();
        auto ser = pairwise_distances_serial(cloud);
        double ts = seconds_since(t0);
        t0 = clock_type::now();
        auto par = pairwise_distances(cloud, 0);
        double tp = seconds_since(t0);
        bool equal = ser == par;
        std::printf("pairwise distances (360 x 20000): serial %.3fs, openmp %.3fs, speedup %.2fx, equal=%d\n",
                    ts, tp, ts / tp, equal);
        if (!equal) return 1;
    }

    // 2. local entropy center sweep
    {
        HypothesisClass cls = make_halfspace_grid(2, 360);
        DistributionSpec spec;
        spec.marginal = uniform_sphere(2);
        spec.f_star = cls.members[0];
        MetricCloud cloud = build_cloud(cls, spec, LossKind::binary, 8000, 7, CloudMode::loss_class);

        EntropySolver serial_solver(cloud, 1);
        auto t0 = clock_type::now();
        double ds = serial_solver.local_entropy(0.05, 1.0, 1.0, false);
        double ts = seconds_since(t0);
        EntropySolver parallel_solver(cloud, 0);
        t0 = clock_type::now();
        double dp = parallel_solver.local_entropy(0.05, 1.0, 1.0, false);
        double tp = seconds_since(t0);
        std::printf("local entropy sweep (360 centers): serial %.3fs, openmp %.3fs, speedup %.2fx, equal=%d\n",
                    ts, tp, ts / tp, ds == dp);
        if (ds != dp) return 1;
    }

    // 3. trial engine
    {
        DistributionSpec spec;
        spec.marginal = uniform_ball(2);
        spec.f_star = make_homogeneous({1.0, 0.0});
        auto scheme = std::shared_ptr<const CompressionScheme>(svm_scheme(2));

        auto serial_learner = scheme_learner(spec, scheme, 50000);
        auto t0 = clock_type::now();
        RiskTable ser = run_trials_serial(*serial_learner, spec, {99}, 300, 42);
        double ts = seconds_since(t0);
        auto parallel_learner = scheme_learner(spec, scheme, 50000);
        t0 = clock_type::now();
        RiskTable par = run_trials(*parallel_learner, spec, {99}, 300, 42, 0);
        double tp = seconds_since(t0);
        bool equal = risk_table_csv(ser) == risk_table_csv(par);
        std::printf("svm trial engine (300 trials, n=99): serial %.3fs, openmp %.3fs, speedup %.2fx, equal=%d\n",
                    ts, tp, ts / tp, equal);
        if (!equal) return 1;
    }

    std::printf("\nall kernels bitwise-identical across serial and parallel paths\n");
    return 0;
}
