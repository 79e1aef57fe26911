// Command line front end. Four verbs:
//   generate  build a synthetic town and save it
//   simulate  run one policy for N replications, write run artifacts
//   compare   run several policies on paired seeds and print the table
//   validate  load a config, check it, echo the effective settings
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "episample/errors.hpp"
#include "episample/experiment.hpp"

using namespace episample;
using nlohmann::ordered_json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> policy;
    std::optional<int> tests_per_day;
    std::optional<int> days;
    std::optional<int> replications;
    std::optional<std::string> out;
    bool deterministic = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_policy) {
    cmd->add_option("--config", args.config_path, "JSON config file (defaults when omitted)");
    cmd->add_option("--seed", args.seed, "base seed override");
    if (with_policy)
        cmd->add_option("--policy", args.policy,
                        "testing policy: active_bandit, random, symptomatic_only, "
                        "contact_tracing");
    cmd->add_option("--tests-per-day", args.tests_per_day, "daily test budget override");
    cmd->add_option("--days", args.days, "horizon override in days");
    cmd->add_option("--replications", args.replications, "replication count override");
    cmd->add_option("--out", args.out, "output directory override");
    cmd->add_flag("--deterministic", args.deterministic,
                  "re-run the first replication and fail on any divergence");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg = args.config_path.empty()
                               ? default_experiment_config()
                               : load_experiment_config(args.config_path);
    apply_env_overrides(cfg);
    if (args.seed) cfg.base_seed = *args.seed;
    if (args.policy) cfg.policy = policy_from_name(*args.policy);
    if (args.tests_per_day) cfg.sim.tests_per_day = *args.tests_per_day;
    if (args.days) cfg.horizon_days = *args.days;
    if (args.replications) cfg.replications = *args.replications;
    if (args.out) cfg.out_dir = *args.out;
    cfg.validate();
    return cfg;
}

ordered_json config_json(const ExperimentConfig& cfg) {
    const DiseaseParams& d = cfg.sim.disease;
    const QuarantinePolicy& q = cfg.sim.quarantine;
    const SkipGramParams& sg = cfg.bandit.embedding.skipgram;
    return ordered_json{
        {"population",
         {{"target_size", cfg.population.target_size},
          {"seed", cfg.population_seed},
          {"mixing_locations_per_nta", cfg.population.mixing_locations_per_nta},
          {"nta_radius", cfg.population.nta_radius}}},
        {"disease",
         {{"beta_contact", d.beta_contact},
          {"p_I_given_E", d.p_I_given_E},
          {"p_Is_given_Ia", d.p_Is_given_Ia},
          {"p_Ic_given_Is", d.p_Ic_given_Is},
          {"p_D_given_Ic", d.p_D_given_Ic},
          {"incubation_days", d.incubation_days},
          {"lambda_Ia", d.lambda_Ia},
          {"lambda_Is", d.lambda_Is},
          {"lambda_Ic", d.lambda_Ic},
          {"fixed_durations", d.fixed_durations}}},
        {"quarantine",
         {{"duration_days", q.duration_days},
          {"self_quarantine_symptomatic", q.self_quarantine_symptomatic},
          {"self_quarantine_critical", q.self_quarantine_critical},
          {"quarantine_on_positive", q.quarantine_on_positive}}},
        {"testing",
         {{"policy", policy_name(cfg.policy)},
          {"budget_per_day", cfg.sim.tests_per_day},
          {"reporting_rate", cfg.reporting_rate},
          {"k", cfg.bandit.ucb.k},
          {"eta", cfg.bandit.ucb.eta},
          {"epsilon_dist", cfg.bandit.ucb.epsilon_dist},
          {"cooldown_days", cfg.bandit.ucb.cooldown_days}}},
        {"embedding",
         {{"dim", sg.dim},
          {"window", sg.window},
          {"negatives", sg.negatives},
          {"epochs", sg.epochs},
          {"lr", sg.lr},
          {"lr_min", sg.lr_min},
          {"neg_power", sg.neg_power},
          {"walk_len", cfg.bandit.embedding.walk_len},
          {"walks_uniform", cfg.bandit.embedding.walks_uniform},
          {"walks_pattern", cfg.bandit.embedding.walks_pattern}}},
        {"run",
         {{"horizon_days", cfg.horizon_days},
          {"replications", cfg.replications},
          {"base_seed", cfg.base_seed},
          {"out_dir", cfg.out_dir},
          {"initial_infected", cfg.sim.initial_infected},
          {"retention_days", cfg.sim.retention_days},
          {"stop_on_extinction", cfg.stop_on_extinction},
          {"write_outputs", cfg.write_outputs}}}};
}

void print_run(const RunResult& rr) {
    std::printf(
        "rep %d: deaths %lld, infected %lld (peak %lld on day %d), detected %lld "
        "(%.1f%%), precision %.3f, lag %.1fd, day %d%s\n",
        rr.replication, static_cast<long long>(rr.summary.total_deaths),
        static_cast<long long>(rr.summary.total_infected),
        static_cast<long long>(rr.summary.peak_infectious), rr.summary.peak_day,
        static_cast<long long>(rr.summary.detected), 100.0 * rr.summary.detection_fraction,
        rr.summary.precision, rr.summary.mean_detection_lag, rr.final_day,
        rr.extinct ? " (extinct)" : "");
}

bool same_run(const RunResult& a, const RunResult& b) {
    if (a.day0_state_hash != b.day0_state_hash || a.final_day != b.final_day ||
        a.extinct != b.extinct || a.days.size() != b.days.size())
        return false;
    for (std::size_t i = 0; i < a.days.size(); ++i) {
        const DayLog& x = a.days[i];
        const DayLog& y = b.days[i];
        if (x.day != y.day || x.counts != y.counts || x.new_exposed != y.new_exposed ||
            x.tests_used != y.tests_used || x.positives_found != y.positives_found ||
            x.in_quarantine != y.in_quarantine)
            return false;
    }
    const MetricsSummary& m = a.summary;
    const MetricsSummary& n = b.summary;
    return m.total_deaths == n.total_deaths && m.total_infected == n.total_infected &&
           m.tests_total == n.tests_total && m.positives_total == n.positives_total &&
           m.detected == n.detected;
}

// Replays replication 0 of the given policy in memory and compares every
// daily figure. Any divergence means hidden nondeterminism crept in.
void check_determinism(const ExperimentConfig& cfg, const Population& pop,
                       PolicyKind kind) {
    const std::uint64_t epidemic_seed = SeedTree(cfg.base_seed).child("replication", 0);
    const std::uint64_t policy_seed = mix64(epidemic_seed ^ fnv1a(policy_name(kind)));
    auto first = make_policy(kind, policy_seed, cfg.bandit);
    auto second = make_policy(kind, policy_seed, cfg.bandit);
    const RunResult a = run_with_policy(cfg, pop, epidemic_seed, *first, "");
    const RunResult b = run_with_policy(cfg, pop, epidemic_seed, *second, "");
    if (!same_run(a, b))
        throw ContractError(std::string("determinism check failed for policy ") +
                            policy_name(kind));
    std::printf("determinism check passed for %s (replication 0 run twice)\n",
                policy_name(kind));
}

int cmd_generate(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    const std::uint64_t seed = args.seed ? *args.seed : cfg.population_seed;
    const Population pop = generate_population(cfg.population, seed);
    std::int64_t households = 0;
    for (const Location& loc : pop.locations)
        if (loc.kind == LocationKind::household) households++;
    const std::string out = args.out ? *args.out : std::string("population.bin");
    save_population(pop, out);
    std::printf("generated %zu agents, %zu locations (%lld households), %zu districts\n",
                pop.agents.size(), pop.locations.size(),
                static_cast<long long>(households), pop.ntas.size());
    std::printf("saved population to %s (seed %llu)\n", out.c_str(),
                static_cast<unsigned long long>(seed));
    return 0;
}

int cmd_simulate(const CommonArgs& args) {
    const ExperimentConfig cfg = resolve_config(args);
    std::printf("simulate: %lld agents, policy %s, budget %d/day, horizon %d, %d reps\n",
                static_cast<long long>(cfg.population.target_size),
                policy_name(cfg.policy), cfg.sim.tests_per_day, cfg.horizon_days,
                cfg.replications);
    if (args.deterministic) {
        const Population pop = generate_population(cfg.population, cfg.population_seed);
        check_determinism(cfg, pop, cfg.policy);
    }
    const std::vector<RunResult> results = run_experiment(cfg);
    for (const RunResult& rr : results) print_run(rr);
    if (cfg.write_outputs)
        std::printf("artifacts under %s/%s/\n", cfg.out_dir.c_str(),
                    policy_name(cfg.policy));
    return 0;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& policy_names) {
    ExperimentConfig cfg = resolve_config(args);
    std::vector<PolicyKind> kinds;
    if (policy_names.empty()) {
        kinds = {PolicyKind::active_bandit, PolicyKind::random_uniform,
                 PolicyKind::symptomatic_only, PolicyKind::contact_tracing};
    } else {
        for (const std::string& name : policy_names) kinds.push_back(policy_from_name(name));
    }
    std::printf("compare: %lld agents, budget %d/day, horizon %d, %d paired reps\n",
                static_cast<long long>(cfg.population.target_size), cfg.sim.tests_per_day,
                cfg.horizon_days, cfg.replications);
    if (args.deterministic) {
        const Population pop = generate_population(cfg.population, cfg.population_seed);
        for (PolicyKind kind : kinds) check_determinism(cfg, pop, kind);
    }
    const ComparisonTable table = compare_policies(cfg, kinds);
    std::fputs(render_comparison(table).c_str(), stdout);
    if (cfg.write_outputs && !cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::string path = cfg.out_dir + "/comparison.json";
        write_comparison_json(table, path);
        std::printf("comparison written to %s\n", path.c_str());
    }
    return 0;
}

int cmd_validate(const CommonArgs& args) {
    const ExperimentConfig cfg = resolve_config(args);
    std::printf("%s\n", config_json(cfg).dump(2).c_str());
    std::printf("configuration is valid\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"episample: agent-based outbreak simulator with adaptive test allocation"};
    app.require_subcommand(1);

    CommonArgs gen_args, sim_args, cmp_args, val_args;
    std::vector<std::string> cmp_policies;

    CLI::App* gen = app.add_subcommand("generate", "build and save a synthetic population");
    add_common_flags(gen, gen_args, false);

    CLI::App* sim = app.add_subcommand("simulate", "run one testing policy");
    add_common_flags(sim, sim_args, true);

    CLI::App* cmp = app.add_subcommand("compare", "run policies on paired seeds");
    add_common_flags(cmp, cmp_args, false);
    cmp->add_option("--policy", cmp_policies, "policies to compare (repeat or comma-list)")
        ->delimiter(',');

    CLI::App* val = app.add_subcommand("validate", "check a config and echo it");
    add_common_flags(val, val_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(gen_args);
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (cmp->parsed()) return cmd_compare(cmp_args, cmp_policies);
        if (val->parsed()) return cmd_validate(val_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
