#include "episample/simulation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace episample {

const char* disease_state_name(DiseaseState s) {
    switch (s) {
        case DiseaseState::S: return "S";
        case DiseaseState::E: return "E";
        case DiseaseState::Ia: return "Ia";
        case DiseaseState::Is: return "Is";
        case DiseaseState::Ic: return "Ic";
        case DiseaseState::R: return "R";
        case DiseaseState::D: return "D";
    }
    throw ContractError("disease_state_name: bad state value");
}

DiseaseState disease_state_from_name(const std::string& name) {
    for (int i = 0; i < kDiseaseStateCount; ++i) {
        DiseaseState s = static_cast<DiseaseState>(i);
        if (name == disease_state_name(s)) return s;
    }
    throw ConfigError("unknown disease state: " + name);
}

namespace {

void check_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

void check_positive(double d, const char* what) {
    if (!(d > 0.0)) throw ConfigError(std::string(what) + " must be positive");
}

int fixed_dwell(double mean) {
    return static_cast<int>(std::max(1LL, std::llround(mean)));
}

}  // namespace

void DiseaseParams::validate() const {
    check_prob(beta_contact, "beta_contact");
    check_prob(p_I_given_E, "p_I_given_E");
    check_prob(p_Is_given_Ia, "p_Is_given_Ia");
    check_prob(p_Ic_given_Is, "p_Ic_given_Is");
    check_prob(p_D_given_Ic, "p_D_given_Ic");
    check_positive(incubation_days, "incubation_days");
    check_positive(lambda_Ia, "lambda_Ia");
    check_positive(lambda_Is, "lambda_Is");
    check_positive(lambda_Ic, "lambda_Ic");
}

void QuarantinePolicy::validate() const {
    if (duration_days < 0) throw ConfigError("duration_days must be >= 0");
}

ProgressOutcome progress_one(DiseaseState state, int days_in_state,
                             const DiseaseParams& params, double u_exit,
                             double u_branch) {
    DiseaseState up;    // where escalation leads
    DiseaseState down;  // where the benign branch leads
    double p_up;
    double mean;
    switch (state) {
        case DiseaseState::E:
            up = DiseaseState::Ia;
            down = DiseaseState::S;
            p_up = params.p_I_given_E;
            mean = params.incubation_days;
            break;
        case DiseaseState::Ia:
            up = DiseaseState::Is;
            down = DiseaseState::R;
            p_up = params.p_Is_given_Ia;
            mean = params.lambda_Ia;
            break;
        case DiseaseState::Is:
            up = DiseaseState::Ic;
            down = DiseaseState::R;
            p_up = params.p_Ic_given_Is;
            mean = params.lambda_Is;
            break;
        case DiseaseState::Ic:
            up = DiseaseState::D;
            down = DiseaseState::R;
            p_up = params.p_D_given_Ic;
            mean = params.lambda_Ic;
            break;
        default:
            return {state, false};  // S, R and D never progress
    }
    bool exits;
    if (params.fixed_durations) {
        exits = days_in_state + 1 >= fixed_dwell(mean);
    } else {
        exits = u_exit < std::min(1.0, 1.0 / mean);
    }
    if (!exits) return {state, false};
    return {u_branch < p_up ? up : down, true};
}

Simulation::Simulation(const Population& pop, const SimulationConfig& config,
                       std::uint64_t seed)
    : pop_(&pop),
      config_(config),
      epidemic_seeds_(SeedTree(seed).subtree("epidemic")),
      visit_rng_(epidemic_seeds_.stream("visits")),
      progression_rng_(epidemic_seeds_.stream("progression")) {
    config_.disease.validate();
    config_.quarantine.validate();
    if (config_.tests_per_day < 0) throw ConfigError("tests_per_day must be >= 0");
    if (config_.retention_days < 1) throw ConfigError("retention_days must be >= 1");
    n_agents_ = static_cast<std::int64_t>(pop.agents.size());
    if (config_.initial_infected < 0 || config_.initial_infected > n_agents_)
        throw ConfigError("initial_infected must lie in [0, population size]");
    if (pop.propensity_offsets.empty() && n_agents_ > 0)
        throw ContractError("population propensity index not built");

    states_.assign(n_agents_, DiseaseState::S);
    days_in_state_.assign(n_agents_, 0);
    quarantine_enroll_.assign(n_agents_, -1);
    quarantine_until_.assign(n_agents_, -1);
    last_tested_day_.assign(n_agents_, -1);
    first_exposed_day_.assign(n_agents_, -1);
    first_infectious_day_.assign(n_agents_, -1);
    first_positive_day_.assign(n_agents_, -1);
    queued_.assign(n_agents_, 0);
    location_visitors_.resize(pop.locations.size());

    // Seed the outbreak: a uniform sample without replacement starts
    // infectious-asymptomatic on day 0, everyone else susceptible.
    Rng seed_rng = epidemic_seeds_.stream("initial-infected");
    std::vector<std::int32_t> ids(n_agents_);
    std::iota(ids.begin(), ids.end(), 0);
    for (std::int64_t k = 0; k < config_.initial_infected; ++k) {
        std::int64_t j = k + static_cast<std::int64_t>(
                                 seed_rng.uniform_int(static_cast<std::uint64_t>(n_agents_ - k)));
        std::swap(ids[k], ids[j]);
        states_[ids[k]] = DiseaseState::Ia;
        first_infectious_day_[ids[k]] = 0;
    }
    total_ever_infectious_ = config_.initial_infected;
    counts_[static_cast<int>(DiseaseState::S)] = n_agents_ - config_.initial_infected;
    counts_[static_cast<int>(DiseaseState::Ia)] = config_.initial_infected;
}

std::int32_t Simulation::check_agent(std::int32_t agent) const {
    if (agent < 0 || agent >= n_agents_)
        throw ContractError("agent id out of range: " + std::to_string(agent));
    return agent;
}

bool Simulation::epidemic_active() const {
    return counts_[static_cast<int>(DiseaseState::E)] +
               counts_[static_cast<int>(DiseaseState::Ia)] +
               counts_[static_cast<int>(DiseaseState::Is)] +
               counts_[static_cast<int>(DiseaseState::Ic)] >
           0;
}

void Simulation::enroll_quarantine(std::int32_t agent) {
    // Extending an active enrollment keeps the original enroll day so the
    // agent does not flicker out of membership for the current day.
    if (in_quarantine(agent, day_ + 1)) {
        quarantine_until_[agent] =
            std::max(quarantine_until_[agent], day_ + config_.quarantine.duration_days);
    } else {
        quarantine_enroll_[agent] = day_;
        quarantine_until_[agent] = day_ + config_.quarantine.duration_days;
    }
}

void Simulation::transition(std::int32_t agent, DiseaseState to) {
    DiseaseState from = states_[agent];
    counts_[static_cast<int>(from)] -= 1;
    counts_[static_cast<int>(to)] += 1;
    states_[agent] = to;
    days_in_state_[agent] = 0;
    switch (to) {
        case DiseaseState::E:
            if (first_exposed_day_[agent] < 0) first_exposed_day_[agent] = day_;
            total_ever_exposed_ += 1;
            day_new_exposed_ += 1;
            break;
        case DiseaseState::Ia:
            if (first_infectious_day_[agent] < 0) first_infectious_day_[agent] = day_;
            total_ever_infectious_ += 1;
            day_new_infectious_ += 1;
            break;
        case DiseaseState::Is:
        case DiseaseState::Ic: {
            // Self-report once per illness unless already a known positive.
            if (!queued_[agent] && first_positive_day_[agent] < 0) {
                queued_[agent] = 1;
                symptomatic_queue_.push_back(agent);
            }
            bool self_q = to == DiseaseState::Is
                              ? config_.quarantine.self_quarantine_symptomatic
                              : config_.quarantine.self_quarantine_critical;
            if (self_q) enroll_quarantine(agent);
            break;
        }
        case DiseaseState::R:
        case DiseaseState::D:
            // Leaving the infectious phase releases any quarantine hold.
            quarantine_enroll_[agent] = -1;
            quarantine_until_[agent] = -1;
            if (to == DiseaseState::D) {
                day_deaths_ += 1;
                queued_[agent] = 0;  // the dead cannot be lab-tested
            }
            break;
        case DiseaseState::S:
            break;
    }
}

void Simulation::draw_visits(std::vector<Visit>& out) {
    out.clear();
    const auto& props = pop_->propensities;
    const auto& offsets = pop_->propensity_offsets;
    for (std::int32_t a = 0; a < n_agents_; ++a) {
        bool eligible = states_[a] != DiseaseState::D && !in_quarantine(a, day_);
        for (std::int64_t i = offsets[a]; i < offsets[a + 1]; ++i) {
            // Draw for every row, eligible or not, so quarantine decisions
            // never shift anyone else's randomness.
            bool fires = visit_rng_.bernoulli(props[i].visit_prob);
            if (fires && eligible) out.push_back({a, props[i].location});
        }
    }
}

void Simulation::resolve_transmissions(const std::vector<Visit>& visits,
                                       std::vector<Meeting>& meetings_out) {
    touched_locations_.clear();
    for (const Visit& v : visits) {
        auto& bucket = location_visitors_[v.location];
        if (bucket.empty()) touched_locations_.push_back(v.location);
        bucket.push_back(v.agent);
    }
    // Visits arrive ordered by agent, so buckets are ascending already;
    // locations are processed in id order for a deterministic stream.
    std::sort(touched_locations_.begin(), touched_locations_.end());

    const double beta = config_.disease.beta_contact;
    const std::uint64_t n_loc = pop_->locations.size();
    for (std::int32_t loc : touched_locations_) {
        auto& bucket = location_visitors_[loc];
        const int m = static_cast<int>(bucket.size());
        const double phi = pop_->locations[loc].meeting_prob;
        if (m >= 2 && phi > 0.0) {
            Rng rng = epidemic_seeds_.stream(
                "location-meetings", static_cast<std::uint64_t>(day_) * n_loc + loc);
            sample_pair_meetings(m, phi, rng, [&](int i, int j) {
                std::int32_t a = bucket[i];
                std::int32_t b = bucket[j];
                meetings_out.push_back({a, b, loc});
                // A meeting infects only across an (infectious, S) pair.
                std::int32_t s = -1;
                if (is_infectious(states_[a]) && states_[b] == DiseaseState::S) s = b;
                else if (is_infectious(states_[b]) && states_[a] == DiseaseState::S) s = a;
                if (s >= 0 && rng.bernoulli(beta)) transition(s, DiseaseState::E);
            });
        }
        bucket.clear();
    }
}

void Simulation::progress_all() {
    for (std::int32_t a = 0; a < n_agents_; ++a) {
        // Two draws per agent per day no matter what, for the same
        // policy-invariance reason as in draw_visits.
        double u_exit = progression_rng_.uniform();
        double u_branch = progression_rng_.uniform();
        ProgressOutcome out =
            progress_one(states_[a], days_in_state_[a], config_.disease, u_exit, u_branch);
        if (out.moved) {
            transition(a, out.state);
        } else {
            days_in_state_[a] += 1;
        }
    }
}

std::vector<TestResult> Simulation::run_tests(const SelectHook& select) {
    std::vector<TestResult> results;
    if (!select) return results;
    std::vector<std::int32_t> requested = select(*this, day_);
    if (static_cast<std::int64_t>(requested.size()) > config_.tests_per_day)
        throw ContractError("testing hook requested " + std::to_string(requested.size()) +
                            " tests, budget is " + std::to_string(config_.tests_per_day));
    results.reserve(requested.size());
    for (std::int32_t agent : requested) {
        check_agent(agent);
        if (last_tested_day_[agent] == day_)
            throw ContractError("agent " + std::to_string(agent) + " tested twice on day " +
                                std::to_string(day_));
        results.push_back(test_agent(agent));
    }
    for (const TestResult& r : results) {
        if (r.positive && config_.quarantine.quarantine_on_positive) enroll_quarantine(r.agent);
    }
    return results;
}

TestResult Simulation::test_agent(std::int32_t agent) {
    check_agent(agent);
    if (states_[agent] == DiseaseState::D)
        throw ContractError("cannot test dead agent " + std::to_string(agent));
    last_tested_day_[agent] = day_;
    queued_[agent] = 0;
    TestResult r;
    r.agent = agent;
    r.day = day_;
    r.positive = is_infectious(states_[agent]);
    if (r.positive && first_positive_day_[agent] < 0) first_positive_day_[agent] = day_;
    total_tests_ += 1;
    return r;
}

const std::vector<Meeting>& Simulation::meetings_on(int day) const {
    static const std::vector<Meeting> kEmpty;
    if (day < 1 || day >= static_cast<int>(meetings_by_day_.size())) return kEmpty;
    return meetings_by_day_[day];
}

const std::vector<Visit>& Simulation::visits_on(int day) const {
    static const std::vector<Visit> kEmpty;
    if (day < 1 || day >= static_cast<int>(visits_by_day_.size())) return kEmpty;
    return visits_by_day_[day];
}

std::vector<std::int32_t> Simulation::symptomatic_pending(std::size_t max_n) const {
    std::vector<std::int32_t> out;
    for (std::size_t i = queue_head_; i < symptomatic_queue_.size() && out.size() < max_n; ++i) {
        std::int32_t a = symptomatic_queue_[i];
        if (queued_[a]) out.push_back(a);
    }
    return out;
}

void Simulation::purge_old_logs() {
    int cutoff = day_ - config_.retention_days + 1;
    if (cutoff >= 1 && cutoff < static_cast<int>(meetings_by_day_.size())) {
        std::vector<Meeting>().swap(meetings_by_day_[cutoff]);
        std::vector<Visit>().swap(visits_by_day_[cutoff]);
    }
}

void Simulation::verify_conservation() const {
    std::array<std::int64_t, kDiseaseStateCount> census{};
    for (std::int32_t a = 0; a < n_agents_; ++a) census[static_cast<int>(states_[a])] += 1;
    std::int64_t total = 0;
    for (int s = 0; s < kDiseaseStateCount; ++s) {
        if (census[s] != counts_[s])
            throw ContractError("state census drifted from running counts");
        total += census[s];
    }
    if (total != n_agents_) throw ContractError("agents were created or destroyed");
}

DayLog Simulation::step_day(const SelectHook& select, const ResultHook& observe) {
    day_new_exposed_ = 0;
    day_new_infectious_ = 0;
    day_deaths_ = 0;

    meetings_by_day_.resize(day_ + 1);
    visits_by_day_.resize(day_ + 1);
    auto& visits = visits_by_day_[day_];
    auto& meetings = meetings_by_day_[day_];

    // Advance the queue head past entries removed since the last day.
    while (queue_head_ < symptomatic_queue_.size() && !queued_[symptomatic_queue_[queue_head_]])
        queue_head_ += 1;

    draw_visits(visits);
    resolve_transmissions(visits, meetings);
    progress_all();
    std::vector<TestResult> results = run_tests(select);
    if (observe) observe(*this, results);

    DayLog log;
    log.day = day_;
    log.counts = counts_;
    log.new_exposed = day_new_exposed_;
    log.new_infectious = day_new_infectious_;
    log.deaths_today = day_deaths_;
    log.tests_used = static_cast<std::int64_t>(results.size());
    for (const TestResult& r : results) log.positives_found += r.positive ? 1 : 0;
    for (std::int32_t a = 0; a < n_agents_; ++a)
        log.in_quarantine += in_quarantine(a, day_) ? 1 : 0;

    verify_conservation();
    purge_old_logs();
    logs_.push_back(log);
    day_ += 1;
    return log;
}

std::uint64_t Simulation::state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ull;
        h = mix64(h);
    };
    feed(static_cast<std::uint64_t>(n_agents_));
    feed(static_cast<std::uint64_t>(day_));
    for (std::int32_t a = 0; a < n_agents_; ++a) {
        feed(static_cast<std::uint64_t>(states_[a]));
        feed(static_cast<std::uint64_t>(days_in_state_[a] + 1));
        feed(static_cast<std::uint64_t>(quarantine_enroll_[a] + 2));
        feed(static_cast<std::uint64_t>(quarantine_until_[a] + 2));
    }
    return h;
}

}  // namespace episample
