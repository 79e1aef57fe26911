#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "episample/errors.hpp"
#include "episample/population.hpp"
#include "episample/rng.hpp"

namespace episample {

// Disease course: susceptible agents get exposed through meetings with
// infectious agents; exposure either fades back to S or turns infectious
// asymptomatic, which can escalate to symptomatic, then critical, then
// death, with recovery possible from every infectious stage.
enum class DiseaseState : std::uint8_t {
    S = 0,   // susceptible
    E = 1,   // exposed, not yet infectious, tests negative
    Ia = 2,  // infectious, no symptoms
    Is = 3,  // infectious, symptomatic
    Ic = 4,  // infectious, critical
    R = 5,   // recovered (absorbing)
    D = 6,   // dead (absorbing)
};

constexpr int kDiseaseStateCount = 7;

const char* disease_state_name(DiseaseState s);
DiseaseState disease_state_from_name(const std::string& name);

inline bool is_infectious(DiseaseState s) {
    return s == DiseaseState::Ia || s == DiseaseState::Is || s == DiseaseState::Ic;
}

struct DiseaseParams {
    // Per-meeting transmission probability. The stock value is a model
    // assumption tuned so a desk-scale run produces a multi-month epidemic
    // wave instead of infecting everyone in three weeks; see README.
    double beta_contact = 0.02;

    // Branch probabilities taken when a state is exited.
    double p_I_given_E = 0.6;     // E resolves to Ia (else back to S)
    double p_Is_given_Ia = 0.4;   // Ia escalates to Is (else R)
    double p_Ic_given_Is = 0.25;  // Is escalates to Ic (else R)
    double p_D_given_Ic = 0.3;    // Ic ends in D (else R)

    // Mean dwell times in days. By default dwell is geometric with exit
    // probability 1/mean per day; fixed_durations switches to a
    // deterministic stay of round(mean) days.
    double incubation_days = 5.0;
    double lambda_Ia = 7.0;
    double lambda_Is = 7.0;
    double lambda_Ic = 10.0;
    bool fixed_durations = false;

    void validate() const;  // throws ConfigError
};

struct QuarantinePolicy {
    int duration_days = 14;
    bool self_quarantine_symptomatic = true;  // enroll on entering Is
    bool self_quarantine_critical = true;     // enroll on entering Ic
    bool quarantine_on_positive = true;       // enroll on a positive test

    void validate() const;  // throws ConfigError
};

struct Visit {
    std::int32_t agent;
    std::int32_t location;
};

// One realized contact between two co-visitors of a location. a < b by
// agent id; the day is implied by the per-day log bucket.
struct Meeting {
    std::int32_t a;
    std::int32_t b;
    std::int32_t location;
};

struct TestResult {
    std::int32_t agent = -1;
    int day = -1;
    bool positive = false;
};

struct DayLog {
    int day = 0;
    // End-of-day census indexed by DiseaseState.
    std::array<std::int64_t, kDiseaseStateCount> counts{};
    std::int64_t new_exposed = 0;     // S -> E transitions today
    std::int64_t new_infectious = 0;  // E -> Ia transitions today
    std::int64_t deaths_today = 0;
    std::int64_t tests_used = 0;
    std::int64_t positives_found = 0;
    std::int64_t in_quarantine = 0;   // agents whose isolation covers today
};

// One day of disease progression for a single agent, decided by two
// uniform draws (exit and branch). Pure so the distributional behavior can
// be checked in isolation; callers draw the uniforms even for agents in
// S/R/D so RNG consumption does not depend on the epidemic's course.
struct ProgressOutcome {
    DiseaseState state;
    bool moved;
};
ProgressOutcome progress_one(DiseaseState state, int days_in_state,
                             const DiseaseParams& params, double u_exit,
                             double u_branch);

// Emits each of the C(m, 2) unordered visitor index pairs independently
// with probability meet_prob, walking the lexicographic pair sequence with
// geometric skips so the cost scales with the number of realized pairs,
// not with m^2. Pairs arrive ordered, (0,1), (0,2), ... with i < j.
template <class F>
void sample_pair_meetings(int m, double meet_prob, Rng& rng, F&& emit) {
    if (m < 2 || meet_prob <= 0.0) return;
    if (meet_prob >= 1.0) {
        for (int i = 0; i + 1 < m; ++i)
            for (int j = i + 1; j < m; ++j) emit(i, j);
        return;
    }
    // Walk pairs (i, j), j < i, skipping a geometric number of indices
    // between hits. log1p keeps precision when meet_prob is tiny.
    const double denom = std::log1p(-meet_prob);
    std::int64_t i = 1;
    std::int64_t j = -1;
    while (i < m) {
        double u = rng.uniform();
        double skip = std::log1p(-u) / denom;  // u < 1, so skip is finite
        j += 1 + static_cast<std::int64_t>(skip);
        while (j >= i && i < m) {
            j -= i;
            i += 1;
        }
        if (i < m) emit(static_cast<int>(j), static_cast<int>(i));
    }
}

struct SimulationConfig {
    DiseaseParams disease;
    QuarantinePolicy quarantine;
    std::int64_t initial_infected = 10;
    // Per-day cap on tests a hook may request; exceeding it is a
    // contract violation by the hook.
    int tests_per_day = 0;
    // Meetings and visits are kept for this many days for contact
    // reporting, then dropped.
    int retention_days = 14;
};

// Runs the daily loop over a fixed population: draw visits, realize
// per-location meetings and transmissions, progress the disease, enroll
// self-quarantiners, then hand the day to an optional testing hook whose
// positives can be quarantined. All randomness flows from named substreams
// of the seed, and the stream positions never depend on testing decisions,
// so two runs differing only in policy share the same epidemic randomness.
class Simulation {
  public:
    // Chooses agents to test for the day being processed; at most
    // config.tests_per_day ids, no duplicates, no dead agents.
    using SelectHook = std::function<std::vector<std::int32_t>(const Simulation&, int day)>;
    // Receives the day's lab results after quarantine enforcement.
    using ResultHook = std::function<void(const Simulation&, const std::vector<TestResult>&)>;

    // The population must outlive the simulation.
    Simulation(const Population& pop, const SimulationConfig& config, std::uint64_t seed);

    DayLog step_day() { return step_day(SelectHook(), ResultHook()); }
    DayLog step_day(const SelectHook& select, const ResultHook& observe);

    // Applies a lab test right now: positive iff the agent is currently
    // infectious. Marks the agent tested for the day and drops them from
    // the self-report queue. step_day routes hook requests through this.
    TestResult test_agent(std::int32_t agent);

    const Population& population() const { return *pop_; }
    const SimulationConfig& config() const { return config_; }
    std::int64_t population_size() const { return n_agents_; }

    // Day about to be simulated by the next step_day (and the day tests
    // apply to). Day 1 is the first simulated day.
    int current_day() const { return day_; }
    int last_completed_day() const { return day_ - 1; }

    DiseaseState state_of(std::int32_t agent) const { return states_[check_agent(agent)]; }
    int days_in_state(std::int32_t agent) const { return days_in_state_[check_agent(agent)]; }
    bool alive(std::int32_t agent) const { return states_[check_agent(agent)] != DiseaseState::D; }
    std::int64_t count_in_state(DiseaseState s) const {
        return counts_[static_cast<int>(s)];
    }
    // True while any agent sits in E/Ia/Is/Ic; the epidemic is over for
    // good once this turns false.
    bool epidemic_active() const;

    // Isolation membership: enrolled strictly before `day` and not yet
    // released. Members emit no visits and hence no meetings.
    bool in_quarantine(std::int32_t agent, int day) const {
        std::int32_t a = check_agent(agent);
        return quarantine_enroll_[a] >= 0 && quarantine_enroll_[a] < day &&
               day <= quarantine_until_[a];
    }

    // Per-day logs for the retention window; days outside it (purged or
    // not yet simulated) come back empty.
    const std::vector<Meeting>& meetings_on(int day) const;
    const std::vector<Visit>& visits_on(int day) const;
    int retention_days() const { return config_.retention_days; }

    // Agents who self-reported symptoms and have not been tested or died
    // since, oldest first, at most max_n of them.
    std::vector<std::int32_t> symptomatic_pending(std::size_t max_n) const;

    int last_tested_day(std::int32_t agent) const { return last_tested_day_[check_agent(agent)]; }
    int first_exposed_day(std::int32_t agent) const { return first_exposed_day_[check_agent(agent)]; }
    int first_infectious_day(std::int32_t agent) const {
        return first_infectious_day_[check_agent(agent)];
    }
    int first_positive_day(std::int32_t agent) const {
        return first_positive_day_[check_agent(agent)];
    }

    std::int64_t total_ever_exposed() const { return total_ever_exposed_; }
    std::int64_t total_ever_infectious() const { return total_ever_infectious_; }
    std::int64_t total_deaths() const { return counts_[static_cast<int>(DiseaseState::D)]; }
    std::int64_t total_tests() const { return total_tests_; }

    const std::vector<DayLog>& logs() const { return logs_; }

    // Order-insensitive digest of the epidemiological state; equal hashes
    // across two simulations mean identical agent states, quarantine
    // registers, and clocks.
    std::uint64_t state_hash() const;

  private:
    std::int32_t check_agent(std::int32_t agent) const;
    void enroll_quarantine(std::int32_t agent);
    void transition(std::int32_t agent, DiseaseState to);
    void draw_visits(std::vector<Visit>& out);
    void resolve_transmissions(const std::vector<Visit>& visits,
                               std::vector<Meeting>& meetings_out);
    void progress_all();
    std::vector<TestResult> run_tests(const SelectHook& select);
    void purge_old_logs();
    void verify_conservation() const;

    const Population* pop_;
    SimulationConfig config_;
    std::int64_t n_agents_ = 0;
    int day_ = 1;

    SeedTree epidemic_seeds_;
    Rng visit_rng_;
    Rng progression_rng_;

    std::vector<DiseaseState> states_;
    std::vector<int> days_in_state_;
    std::array<std::int64_t, kDiseaseStateCount> counts_{};

    std::vector<std::int32_t> quarantine_enroll_;  // -1 when not enrolled
    std::vector<std::int32_t> quarantine_until_;   // last isolation day

    std::vector<int> last_tested_day_;
    std::vector<int> first_exposed_day_;
    std::vector<int> first_infectious_day_;
    std::vector<int> first_positive_day_;

    // Self-report queue, FIFO with lazy removal via queued_ flags.
    std::vector<std::int32_t> symptomatic_queue_;
    std::size_t queue_head_ = 0;
    std::vector<std::uint8_t> queued_;

    // Day-indexed logs; buckets older than the retention window are
    // emptied after each step.
    std::vector<std::vector<Meeting>> meetings_by_day_;
    std::vector<std::vector<Visit>> visits_by_day_;

    // Scratch for grouping a day's visits by location.
    std::vector<std::vector<std::int32_t>> location_visitors_;
    std::vector<std::int32_t> touched_locations_;

    // Day counters reset inside step_day.
    std::int64_t day_new_exposed_ = 0;
    std::int64_t day_new_infectious_ = 0;
    std::int64_t day_deaths_ = 0;

    std::int64_t total_ever_exposed_ = 0;
    std::int64_t total_ever_infectious_ = 0;
    std::int64_t total_tests_ = 0;

    std::vector<DayLog> logs_;
};

}  // namespace episample
