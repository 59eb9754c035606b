#pragma once

#include "leafscope/classifier.hpp"
#include "leafscope/io.hpp"
#include "leafscope/poisson.hpp"

namespace leafscope {

struct CheckResult {
    std::string name;
    std::string status;  // "pass" | "fail" | "ambiguous"
    double residual = 0.0;
    double tolerance = 0.0;
    long samples = 0;
    double seconds = 0.0;
    std::string detail;

    bool passed() const { return status == "pass"; }
};

struct VerificationReport {
    int n = 0;
    std::string level;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed()) return false;
        return true;
    }
    long ambiguous_count() const {
        long k = 0;
        for (const auto& c : checks)
            if (c.status == "ambiguous") ++k;
        return k;
    }
};

Json report_to_json(const VerificationReport& report);

// Sample budgets for one battery run.
struct VerifyParams {
    long jacobi_points = 100;
    long casimir_points = 100;
    long rank_battery = 200;
    long dim_probe_samples = 20;
    long span_pairs = 100;
    long flows = 20;
    long flow_steps = 50;
    long flow_checkpoints = 5;
    long count_trials = 50;
    long round_trip_per_family = 30;
    long fresh_vanish_samples = 200;

    static VerifyParams full() { return {}; }
    static VerifyParams quick() {
        VerifyParams p;
        p.jacobi_points = 25;
        p.casimir_points = 25;
        p.rank_battery = 60;
        p.dim_probe_samples = 6;
        p.span_pairs = 30;
        p.flows = 5;
        p.flow_steps = 20;
        p.flow_checkpoints = 3;
        p.count_trials = 10;
        p.round_trip_per_family = 6;
        p.fresh_vanish_samples = 50;
        return p;
    }
};

// The per-curve property battery behind `verify` and the acceptance suite.
VerificationReport run_verification(const Frame& frame, const SecantEngine& engine,
                                    const LeafClassifier& classifier, const PoissonCache& cache,
                                    const VerifyParams& params, const std::string& level_name);

// Individual checks, exposed for the acceptance suite.
CheckResult check_syzygy_uniqueness(const PoissonCache& cache);
CheckResult check_jacobi(const Frame& frame, const PoissonCache& cache, long points);
CheckResult check_jacobi_negative_control(const Frame& frame, const PoissonCache& cache);
CheckResult check_casimir(const Frame& frame, const PoissonCache& cache, long points);
CheckResult check_rank_identity(const LeafClassifier& classifier, const PoissonCache& cache,
                                long total_points);
CheckResult check_partial_secant_dimensions(const Frame& frame, long samples_per_level);
CheckResult check_full_secant_dimensions(const Frame& frame, long samples_per_level);
CheckResult check_quadric_pencil(const LeafClassifier& classifier, const PoissonCache& cache);
CheckResult check_top_equation(const LeafClassifier& classifier, const PoissonCache& cache,
                               long fresh_samples);
CheckResult check_unique_vs_pencil(const LeafClassifier& classifier, long trials);
CheckResult check_span_lattice(const Frame& frame, long pairs);
CheckResult check_flow_invariance(const LeafClassifier& classifier, const PoissonCache& cache,
                                  long flows, long steps, long checkpoints);
CheckResult check_round_trip(const LeafClassifier& classifier, long per_family);
CheckResult check_cache_probes(const Frame& frame, const PoissonCache& cache);

}  // namespace leafscope
