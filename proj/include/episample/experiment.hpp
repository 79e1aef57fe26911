#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "episample/population.hpp"
#include "episample/sampler.hpp"
#include "episample/simulation.hpp"

namespace episample {

// Everything one experiment needs: who lives in the town, how the disease
// behaves, which testing policy runs with what budget, and the run shape.
struct ExperimentConfig {
    PopulationConfig population;
    std::uint64_t population_seed = 1;

    SimulationConfig sim;  // disease, quarantine, seeds, budget, retention

    PolicyKind policy = PolicyKind::active_bandit;
    BanditConfig bandit;
    double reporting_rate = 0.8;  // share of non-household meetings disclosed

    int horizon_days = 120;
    bool stop_on_extinction = true;
    int replications = 1;
    std::uint64_t base_seed = 1;
    std::string out_dir = "runs";
    bool write_outputs = true;

    void validate() const;  // throws ConfigError
};

// Defaults sized for a desk machine: 20k agents, 120 days, 100 tests/day,
// and a compact embedding profile that retrains from yesterday's vectors.
ExperimentConfig default_experiment_config();

// Strict JSON loader: unknown keys are config errors so typos surface
// instead of silently running the defaults.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

// EPISAMPLE_SEED and EPISAMPLE_OUT, when set, beat the file values.
void apply_env_overrides(ExperimentConfig& cfg);

struct MetricsSummary {
    std::int64_t total_deaths = 0;
    std::int64_t total_infected = 0;  // ever infectious, initial seeds included
    std::int64_t total_exposed = 0;
    std::int64_t peak_infectious = 0;  // max daily Ia+Is+Ic
    int peak_day = 0;
    std::int64_t tests_total = 0;
    std::int64_t positives_total = 0;
    std::int64_t detected = 0;         // infected agents with a positive test
    double precision = 0.0;            // positives / tests, 0 when untested
    double mean_detection_lag = 0.0;   // first infectious day -> first positive
    double detection_fraction = 0.0;   // detected / total_infected
};

MetricsSummary compute_metrics(const Simulation& sim);

struct RunResult {
    int replication = 0;
    std::uint64_t epidemic_seed = 0;
    std::uint64_t day0_state_hash = 0;  // pairing check across policies
    int final_day = 0;
    bool extinct = false;
    MetricsSummary summary;
    std::vector<DayLog> days;
};

// One full run: the policy picks tests each day, positives disclose
// contacts into the observed graph, and when out_prefix is non-empty the
// run writes daily.csv, events.jsonl, decisions.jsonl, and summary.json
// under that prefix.
RunResult run_with_policy(const ExperimentConfig& cfg, const Population& pop,
                          std::uint64_t epidemic_seed, TestingPolicy& policy,
                          const std::string& out_prefix);

// All replications of the configured policy. The population is built once;
// replication r always draws epidemic seed r of the base seed, so runs of
// different policies pair up seed for seed.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

struct PolicyStats {
    PolicyKind policy = PolicyKind::random_uniform;
    int n = 0;
    double mean_deaths = 0.0, sd_deaths = 0.0;
    double mean_infected = 0.0, sd_infected = 0.0;
    double mean_precision = 0.0, sd_precision = 0.0;
    double mean_detection_fraction = 0.0;
    double mean_detection_lag = 0.0;
    bool dispersion_defined = false;  // false when n == 1
};

struct PairedComparison {
    PolicyKind a = PolicyKind::random_uniform;
    PolicyKind b = PolicyKind::random_uniform;
    int n = 0;
    double mean_death_diff = 0.0;  // mean over replications of (a - b)
    int a_lower = 0;               // replications where a saw fewer deaths
    int b_lower = 0;
    int ties = 0;
    double sign_test_p = 1.0;  // two-sided exact binomial, ties dropped
};

struct ComparisonTable {
    std::vector<PolicyStats> stats;
    std::vector<PairedComparison> pairs;  // all unordered policy pairs
};

// Exact two-sided sign test on wins/losses (ties already removed).
double sign_test_p_value(int wins, int losses);

// Seed-paired comparison. Every policy must carry the same number of
// replications and byte-identical day-0 state hashes per replication;
// anything else means the runs were not paired and is an error.
ComparisonTable compare_runs(
    const std::vector<std::pair<PolicyKind, std::vector<RunResult>>>& runs);

// Runs each policy over the same seeds and compares.
ComparisonTable compare_policies(const ExperimentConfig& cfg,
                                 const std::vector<PolicyKind>& policies);

void write_daily_csv(const std::vector<DayLog>& days, const std::string& path);
std::string render_comparison(const ComparisonTable& table);
void write_comparison_json(const ComparisonTable& table, const std::string& path);

}  // namespace episample
