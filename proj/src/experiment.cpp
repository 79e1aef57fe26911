#include "episample/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "episample/errors.hpp"
#include "episample/observed_graph.hpp"

namespace episample {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw ConfigError(std::string("section '") + section + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError(std::string("unknown key '") + it.key() + "' in section '" +
                              section + "'");
    }
}

template <typename T>
void read_to(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (population.target_size < 2)
        throw ConfigError("population target size must be at least 2");
    sim.disease.validate();
    sim.quarantine.validate();
    if (sim.initial_infected < 0) throw ConfigError("initial infections must be >= 0");
    if (sim.tests_per_day < 0) throw ConfigError("daily test budget must be >= 0");
    if (sim.retention_days < 1) throw ConfigError("contact retention must be >= 1 day");
    bandit.validate();
    if (reporting_rate < 0.0 || reporting_rate > 1.0)
        throw ConfigError("reporting rate must lie in [0, 1]");
    if (horizon_days < 1) throw ConfigError("horizon must be at least 1 day");
    if (replications < 1) throw ConfigError("at least one replication is required");
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.population.target_size = 20000;
    cfg.sim.initial_infected = 10;
    cfg.sim.tests_per_day = 100;  // half a percent of the town per day
    // Calibrated operating point: this contact rate gives outbreaks that
    // neither fizzle nor blow past what 100 tests/day can influence, which
    // is where policy comparisons are informative.
    cfg.sim.disease.beta_contact = 0.016;
    // Tuned on paired seeds: the spread bonus runs 20-40x the label mean
    // on these embeddings and raw distance anti-predicts infection, so eta
    // has to stay small. The wide neighbor count matters because a
    // candidate only carries signal when a fresh positive appears among
    // its k nearest labeled rows; k=20 lights up more of the field at the
    // same per-pick hit rate. The longer cooldown curbs re-test churn.
    cfg.bandit.ucb.k = 20;
    cfg.bandit.ucb.eta = 0.02;
    cfg.bandit.ucb.cooldown_days = 5;
    // Compact daily retrain: warm starts carry most of the signal, so a
    // single epoch over short walks keeps the day loop fast.
    cfg.bandit.embedding.skipgram.dim = 32;
    cfg.bandit.embedding.skipgram.window = 3;
    cfg.bandit.embedding.skipgram.negatives = 3;
    cfg.bandit.embedding.skipgram.epochs = 1;
    cfg.bandit.embedding.walk_len = 10;
    cfg.bandit.embedding.walks_uniform = 2;
    cfg.bandit.embedding.walks_pattern = 1;
    return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg = default_experiment_config();
    try {
        check_keys(root, "(top level)",
                   {"population", "disease", "quarantine", "testing", "embedding", "run"});
        if (root.contains("population")) {
            const json& p = root["population"];
            check_keys(p, "population",
                       {"target_size", "seed", "mixing_locations_per_nta", "nta_radius",
                        "age_gender_csv", "ntas_csv", "interactions_csv"});
            read_to(p, "target_size", cfg.population.target_size);
            read_to(p, "seed", cfg.population_seed);
            read_to(p, "mixing_locations_per_nta", cfg.population.mixing_locations_per_nta);
            read_to(p, "nta_radius", cfg.population.nta_radius);
            read_to(p, "age_gender_csv", cfg.population.age_gender_csv);
            read_to(p, "ntas_csv", cfg.population.ntas_csv);
            read_to(p, "interactions_csv", cfg.population.interactions_csv);
        }
        if (root.contains("disease")) {
            const json& d = root["disease"];
            check_keys(d, "disease",
                       {"beta_contact", "p_I_given_E", "p_Is_given_Ia", "p_Ic_given_Is",
                        "p_D_given_Ic", "incubation_days", "lambda_Ia", "lambda_Is",
                        "lambda_Ic", "fixed_durations"});
            DiseaseParams& dp = cfg.sim.disease;
            read_to(d, "beta_contact", dp.beta_contact);
            read_to(d, "p_I_given_E", dp.p_I_given_E);
            read_to(d, "p_Is_given_Ia", dp.p_Is_given_Ia);
            read_to(d, "p_Ic_given_Is", dp.p_Ic_given_Is);
            read_to(d, "p_D_given_Ic", dp.p_D_given_Ic);
            read_to(d, "incubation_days", dp.incubation_days);
            read_to(d, "lambda_Ia", dp.lambda_Ia);
            read_to(d, "lambda_Is", dp.lambda_Is);
            read_to(d, "lambda_Ic", dp.lambda_Ic);
            read_to(d, "fixed_durations", dp.fixed_durations);
        }
        if (root.contains("quarantine")) {
            const json& q = root["quarantine"];
            check_keys(q, "quarantine",
                       {"duration_days", "self_quarantine_symptomatic",
                        "self_quarantine_critical", "quarantine_on_positive"});
            QuarantinePolicy& qp = cfg.sim.quarantine;
            read_to(q, "duration_days", qp.duration_days);
            read_to(q, "self_quarantine_symptomatic", qp.self_quarantine_symptomatic);
            read_to(q, "self_quarantine_critical", qp.self_quarantine_critical);
            read_to(q, "quarantine_on_positive", qp.quarantine_on_positive);
            cfg.bandit.quarantine_days = qp.duration_days;
        }
        if (root.contains("testing")) {
            const json& t = root["testing"];
            check_keys(t, "testing",
                       {"policy", "budget_per_day", "reporting_rate", "k", "eta",
                        "epsilon_dist", "cooldown_days"});
            if (t.contains("policy")) cfg.policy = policy_from_name(t["policy"].get<std::string>());
            read_to(t, "budget_per_day", cfg.sim.tests_per_day);
            read_to(t, "reporting_rate", cfg.reporting_rate);
            read_to(t, "k", cfg.bandit.ucb.k);
            read_to(t, "eta", cfg.bandit.ucb.eta);
            read_to(t, "epsilon_dist", cfg.bandit.ucb.epsilon_dist);
            read_to(t, "cooldown_days", cfg.bandit.ucb.cooldown_days);
        }
        if (root.contains("embedding")) {
            const json& e = root["embedding"];
            check_keys(e, "embedding",
                       {"dim", "window", "negatives", "epochs", "lr", "lr_min", "neg_power",
                        "walk_len", "walks_uniform", "walks_pattern"});
            SkipGramParams& sg = cfg.bandit.embedding.skipgram;
            read_to(e, "dim", sg.dim);
            read_to(e, "window", sg.window);
            read_to(e, "negatives", sg.negatives);
            read_to(e, "epochs", sg.epochs);
            read_to(e, "lr", sg.lr);
            read_to(e, "lr_min", sg.lr_min);
            read_to(e, "neg_power", sg.neg_power);
            read_to(e, "walk_len", cfg.bandit.embedding.walk_len);
            read_to(e, "walks_uniform", cfg.bandit.embedding.walks_uniform);
            read_to(e, "walks_pattern", cfg.bandit.embedding.walks_pattern);
        }
        if (root.contains("run")) {
            const json& r = root["run"];
            check_keys(r, "run",
                       {"horizon_days", "replications", "base_seed", "out_dir",
                        "initial_infected", "retention_days", "stop_on_extinction",
                        "write_outputs"});
            read_to(r, "horizon_days", cfg.horizon_days);
            read_to(r, "replications", cfg.replications);
            read_to(r, "base_seed", cfg.base_seed);
            read_to(r, "out_dir", cfg.out_dir);
            read_to(r, "initial_infected", cfg.sim.initial_infected);
            read_to(r, "retention_days", cfg.sim.retention_days);
            read_to(r, "stop_on_extinction", cfg.stop_on_extinction);
            read_to(r, "write_outputs", cfg.write_outputs);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config value has the wrong type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

void apply_env_overrides(ExperimentConfig& cfg) {
    if (const char* seed = std::getenv("EPISAMPLE_SEED")) {
        try {
            cfg.base_seed = std::stoull(seed);
        } catch (const std::exception&) {
            throw ConfigError(std::string("EPISAMPLE_SEED is not a number: ") + seed);
        }
    }
    if (const char* out = std::getenv("EPISAMPLE_OUT")) cfg.out_dir = out;
}

MetricsSummary compute_metrics(const Simulation& sim) {
    MetricsSummary m;
    m.total_deaths = sim.total_deaths();
    m.total_infected = sim.total_ever_infectious();
    m.total_exposed = sim.total_ever_exposed();
    for (const DayLog& log : sim.logs()) {
        const std::int64_t infectious = log.counts[static_cast<int>(DiseaseState::Ia)] +
                                        log.counts[static_cast<int>(DiseaseState::Is)] +
                                        log.counts[static_cast<int>(DiseaseState::Ic)];
        if (infectious > m.peak_infectious) {
            m.peak_infectious = infectious;
            m.peak_day = log.day;
        }
        m.tests_total += log.tests_used;
        m.positives_total += log.positives_found;
    }
    m.precision = m.tests_total > 0
                      ? static_cast<double>(m.positives_total) /
                            static_cast<double>(m.tests_total)
                      : 0.0;
    std::int64_t lag_sum = 0;
    for (std::int32_t a = 0; a < sim.population_size(); ++a) {
        const int fp = sim.first_positive_day(a);
        if (fp < 0) continue;
        m.detected++;
        lag_sum += fp - sim.first_infectious_day(a);
    }
    m.mean_detection_lag =
        m.detected > 0 ? static_cast<double>(lag_sum) / static_cast<double>(m.detected)
                       : 0.0;
    m.detection_fraction = m.total_infected > 0
                               ? static_cast<double>(m.detected) /
                                     static_cast<double>(m.total_infected)
                               : 0.0;
    return m;
}

namespace {

json summary_json(const RunResult& rr) {
    const MetricsSummary& m = rr.summary;
    return json{{"replication", rr.replication},
                {"epidemic_seed", rr.epidemic_seed},
                {"day0_state_hash", rr.day0_state_hash},
                {"final_day", rr.final_day},
                {"extinct", rr.extinct},
                {"total_deaths", m.total_deaths},
                {"total_infected", m.total_infected},
                {"total_exposed", m.total_exposed},
                {"peak_infectious", m.peak_infectious},
                {"peak_day", m.peak_day},
                {"tests_total", m.tests_total},
                {"positives_total", m.positives_total},
                {"detected", m.detected},
                {"precision", m.precision},
                {"mean_detection_lag", m.mean_detection_lag},
                {"detection_fraction", m.detection_fraction}};
}

}  // namespace

RunResult run_with_policy(const ExperimentConfig& cfg, const Population& pop,
                          std::uint64_t epidemic_seed, TestingPolicy& policy,
                          const std::string& out_prefix) {
    cfg.validate();
    RunResult rr;
    rr.epidemic_seed = epidemic_seed;

    Simulation sim(pop, cfg.sim, epidemic_seed);
    const std::int64_t n = sim.population_size();
    MeetingIndex index(n, cfg.sim.retention_days);
    ObservedGraph graph(n, static_cast<std::int64_t>(pop.locations.size()),
                        cfg.sim.retention_days);
    // Disclosure randomness must stay off the epidemic streams so policy
    // choices never displace the outbreak's own draws.
    Rng report_rng = SeedTree(epidemic_seed).subtree("observation").stream("contact-reports");

    const bool writing = !out_prefix.empty();
    std::ofstream events, decisions;
    if (writing) {
        events.open(out_prefix + "events.jsonl");
        if (!events) throw IoError("cannot open for writing: " + out_prefix + "events.jsonl");
        decisions.open(out_prefix + "decisions.jsonl");
        if (!decisions)
            throw IoError("cannot open for writing: " + out_prefix + "decisions.jsonl");
    }

    std::vector<DiseaseState> prev(static_cast<std::size_t>(n));
    for (std::int32_t a = 0; a < n; ++a) {
        prev[static_cast<std::size_t>(a)] = sim.state_of(a);
        if (writing && prev[static_cast<std::size_t>(a)] != DiseaseState::S)
            events << json{{"day", 0},
                           {"type", "seed"},
                           {"agent", a},
                           {"state", disease_state_name(prev[static_cast<std::size_t>(a)])}}
                          .dump()
                   << '\n';
    }
    rr.day0_state_hash = sim.state_hash();

    std::vector<TestResult> day_results;
    const auto select = [&](const Simulation& s, int d) {
        PolicyContext ctx{s, graph, d, cfg.sim.tests_per_day};
        return policy.select(ctx);
    };
    const auto observe = [&](const Simulation& s, const std::vector<TestResult>& results) {
        const int d = s.current_day();
        index.add_day(d, s.meetings_on(d));
        std::vector<ContactReport> reports(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].positive)
                reports[i] = make_report(index, pop, results[i].agent, d,
                                         cfg.reporting_rate, report_rng);
            graph.record_test(results[i], results[i].positive ? &reports[i] : nullptr);
        }
        PolicyContext ctx{s, graph, d, cfg.sim.tests_per_day};
        policy.observe(ctx, results, reports);
        day_results = results;
    };

    for (int day = 1; day <= cfg.horizon_days; ++day) {
        day_results.clear();
        DayLog log = sim.step_day(select, observe);
        rr.days.push_back(log);

        if (writing) {
            for (std::int32_t a = 0; a < n; ++a) {
                const DiseaseState now = sim.state_of(a);
                DiseaseState& was = prev[static_cast<std::size_t>(a)];
                if (now == was) continue;
                events << json{{"day", day},
                               {"type", "transition"},
                               {"agent", a},
                               {"from", disease_state_name(was)},
                               {"to", disease_state_name(now)}}
                              .dump()
                       << '\n';
                was = now;
            }
            for (const TestResult& r : day_results)
                events << json{{"day", day},
                               {"type", "test"},
                               {"agent", r.agent},
                               {"positive", r.positive}}
                              .dump()
                       << '\n';
            const DecisionRecord& rec = policy.last_decision();
            json dec{{"day", day},
                     {"expansion_slots", rec.expansion_slots},
                     {"densification_slots", rec.densification_slots},
                     {"selected", rec.selected}};
            json scores = json::array();
            for (const ScoredCandidate& sc : rec.scored_picks)
                scores.push_back({{"agent", sc.row},
                                  {"mean", sc.mean},
                                  {"spread", sc.spread},
                                  {"score", sc.score}});
            dec["scores"] = std::move(scores);
            decisions << dec.dump() << '\n';
        }

        if (cfg.stop_on_extinction && !sim.epidemic_active()) {
            rr.extinct = true;
            break;
        }
    }
    rr.final_day = sim.last_completed_day();
    rr.summary = compute_metrics(sim);

    if (writing) {
        if (!events || !decisions)
            throw IoError("failed while writing run logs under " + out_prefix);
        write_daily_csv(rr.days, out_prefix + "daily.csv");
        std::ofstream sf(out_prefix + "summary.json");
        if (!sf) throw IoError("cannot open for writing: " + out_prefix + "summary.json");
        sf << summary_json(rr).dump(2) << '\n';
        if (!sf) throw IoError("failed while writing " + out_prefix + "summary.json");
    }
    return rr;
}

namespace {

std::vector<RunResult> run_replications(const ExperimentConfig& cfg, const Population& pop,
                                        PolicyKind kind) {
    SeedTree root(cfg.base_seed);
    std::vector<RunResult> out;
    out.reserve(static_cast<std::size_t>(cfg.replications));
    for (int r = 0; r < cfg.replications; ++r) {
        const std::uint64_t epidemic_seed =
            root.child("replication", static_cast<std::uint64_t>(r));
        // Policies get their own stream so the epidemic draws pair up
        // across policies while selections stay independent.
        const std::uint64_t policy_seed = mix64(epidemic_seed ^ fnv1a(policy_name(kind)));
        auto policy = make_policy(kind, policy_seed, cfg.bandit);
        std::string prefix;
        if (cfg.write_outputs && !cfg.out_dir.empty()) {
            prefix = cfg.out_dir + "/" + policy_name(kind) + "/rep" + std::to_string(r) + "/";
            std::error_code ec;
            std::filesystem::create_directories(prefix, ec);
            if (ec) throw IoError("cannot create output directory: " + prefix);
        }
        RunResult rr = run_with_policy(cfg, pop, epidemic_seed, *policy, prefix);
        rr.replication = r;
        out.push_back(std::move(rr));
    }
    return out;
}

}  // namespace

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Population pop = generate_population(cfg.population, cfg.population_seed);
    return run_replications(cfg, pop, cfg.policy);
}

double sign_test_p_value(int wins, int losses) {
    if (wins < 0 || losses < 0) throw ContractError("sign test counts must be >= 0");
    const int n = wins + losses;
    if (n == 0) return 1.0;
    const int k = std::min(wins, losses);
    // Two-sided exact binomial tail at p = 1/2, accumulated in logs to
    // stay finite for large replication counts.
    double tail = 0.0;
    double log_choose = 0.0;  // log C(n, 0)
    const double log_half_n = -static_cast<double>(n) * std::log(2.0);
    for (int i = 0; i <= k; ++i) {
        if (i > 0) log_choose += std::log(static_cast<double>(n - i + 1) / i);
        tail += std::exp(log_choose + log_half_n);
    }
    return std::min(1.0, 2.0 * tail);
}

namespace {

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

ComparisonTable compare_runs(
    const std::vector<std::pair<PolicyKind, std::vector<RunResult>>>& runs) {
    if (runs.empty()) throw ContractError("nothing to compare");
    const std::size_t n_reps = runs.front().second.size();
    if (n_reps == 0) throw ContractError("policies carry no replications");
    for (const auto& [kind, rs] : runs) {
        if (rs.size() != n_reps)
            throw ContractError(std::string("policy ") + policy_name(kind) +
                                " has a different replication count");
        for (std::size_t r = 0; r < n_reps; ++r) {
            if (rs[r].epidemic_seed != runs.front().second[r].epidemic_seed ||
                rs[r].day0_state_hash != runs.front().second[r].day0_state_hash)
                throw ContractError(
                    "replication " + std::to_string(r) +
                    " is not seed-paired across policies (different seed or start state)");
        }
    }

    ComparisonTable table;
    for (const auto& [kind, rs] : runs) {
        PolicyStats st;
        st.policy = kind;
        st.n = static_cast<int>(n_reps);
        std::vector<double> deaths, infected, precision, detect, lag;
        for (const RunResult& rr : rs) {
            deaths.push_back(static_cast<double>(rr.summary.total_deaths));
            infected.push_back(static_cast<double>(rr.summary.total_infected));
            precision.push_back(rr.summary.precision);
            detect.push_back(rr.summary.detection_fraction);
            lag.push_back(rr.summary.mean_detection_lag);
        }
        st.mean_deaths = mean_of(deaths);
        st.sd_deaths = sd_of(deaths);
        st.mean_infected = mean_of(infected);
        st.sd_infected = sd_of(infected);
        st.mean_precision = mean_of(precision);
        st.sd_precision = sd_of(precision);
        st.mean_detection_fraction = mean_of(detect);
        st.mean_detection_lag = mean_of(lag);
        st.dispersion_defined = n_reps > 1;
        table.stats.push_back(st);
    }

    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            PairedComparison pc;
            pc.a = runs[i].first;
            pc.b = runs[j].first;
            pc.n = static_cast<int>(n_reps);
            double diff_sum = 0.0;
            for (std::size_t r = 0; r < n_reps; ++r) {
                const std::int64_t da = runs[i].second[r].summary.total_deaths;
                const std::int64_t db = runs[j].second[r].summary.total_deaths;
                diff_sum += static_cast<double>(da - db);
                if (da < db) {
                    pc.a_lower++;
                } else if (db < da) {
                    pc.b_lower++;
                } else {
                    pc.ties++;
                }
            }
            pc.mean_death_diff = diff_sum / static_cast<double>(n_reps);
            pc.sign_test_p = sign_test_p_value(pc.a_lower, pc.b_lower);
            table.pairs.push_back(pc);
        }
    }
    return table;
}

ComparisonTable compare_policies(const ExperimentConfig& cfg,
                                 const std::vector<PolicyKind>& policies) {
    cfg.validate();
    if (policies.empty()) throw ContractError("no policies to compare");
    const Population pop = generate_population(cfg.population, cfg.population_seed);
    std::vector<std::pair<PolicyKind, std::vector<RunResult>>> runs;
    runs.reserve(policies.size());
    for (PolicyKind kind : policies)
        runs.emplace_back(kind, run_replications(cfg, pop, kind));
    return compare_runs(runs);
}

void write_daily_csv(const std::vector<DayLog>& days, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "day,S,E,Ia,Is,Ic,R,D,new_exposed,tests_used,positives_found,in_quarantine\n";
    for (const DayLog& d : days) {
        out << d.day;
        for (int s = 0; s < kDiseaseStateCount; ++s) out << ',' << d.counts[s];
        out << ',' << d.new_exposed << ',' << d.tests_used << ',' << d.positives_found
            << ',' << d.in_quarantine << '\n';
    }
    if (!out) throw IoError("failed while writing " + path);
}

std::string render_comparison(const ComparisonTable& table) {
    std::string text;
    char line[256];
    std::snprintf(line, sizeof(line), "%-18s %4s %14s %16s %10s %9s %7s\n", "policy", "n",
                  "deaths", "infected", "precision", "detected", "lag");
    text += line;
    for (const PolicyStats& st : table.stats) {
        if (st.dispersion_defined) {
            std::snprintf(line, sizeof(line),
                          "%-18s %4d %8.1f ±%5.1f %10.1f ±%5.1f %10.3f %8.1f%% %6.1fd\n",
                          policy_name(st.policy), st.n, st.mean_deaths, st.sd_deaths,
                          st.mean_infected, st.sd_infected, st.mean_precision,
                          100.0 * st.mean_detection_fraction, st.mean_detection_lag);
        } else {
            std::snprintf(line, sizeof(line),
                          "%-18s %4d %8.1f (n=1) %10.1f (n=1) %10.3f %8.1f%% %6.1fd\n",
                          policy_name(st.policy), st.n, st.mean_deaths, st.mean_infected,
                          st.mean_precision, 100.0 * st.mean_detection_fraction,
                          st.mean_detection_lag);
        }
        text += line;
    }
    for (const PairedComparison& pc : table.pairs) {
        std::snprintf(line, sizeof(line),
                      "%s vs %s: mean death diff %+.2f, fewer deaths in %d/%d (ties %d), "
                      "sign-test p=%.4f\n",
                      policy_name(pc.a), policy_name(pc.b), pc.mean_death_diff, pc.a_lower,
                      pc.n, pc.ties, pc.sign_test_p);
        text += line;
    }
    return text;
}

void write_comparison_json(const ComparisonTable& table, const std::string& path) {
    json stats = json::array();
    for (const PolicyStats& st : table.stats)
        stats.push_back({{"policy", policy_name(st.policy)},
                         {"replications", st.n},
                         {"mean_deaths", st.mean_deaths},
                         {"sd_deaths", st.sd_deaths},
                         {"mean_infected", st.mean_infected},
                         {"sd_infected", st.sd_infected},
                         {"mean_precision", st.mean_precision},
                         {"sd_precision", st.sd_precision},
                         {"mean_detection_fraction", st.mean_detection_fraction},
                         {"mean_detection_lag", st.mean_detection_lag},
                         {"dispersion_defined", st.dispersion_defined}});
    json pairs = json::array();
    for (const PairedComparison& pc : table.pairs)
        pairs.push_back({{"a", policy_name(pc.a)},
                         {"b", policy_name(pc.b)},
                         {"replications", pc.n},
                         {"mean_death_diff", pc.mean_death_diff},
                         {"a_lower", pc.a_lower},
                         {"b_lower", pc.b_lower},
                         {"ties", pc.ties},
                         {"sign_test_p", pc.sign_test_p}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << json{{"policies", std::move(stats)}, {"pairs", std::move(pairs)}}.dump(2)
        << '\n';
    if (!out) throw IoError("failed while writing " + path);
}

}  // namespace episample
