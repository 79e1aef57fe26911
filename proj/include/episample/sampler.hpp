#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "episample/embedding.hpp"
#include "episample/observed_graph.hpp"
#include "episample/rng.hpp"
#include "episample/simulation.hpp"

namespace episample {

// The two moves the adaptive tester can make with a test slot: spend it on
// someone never seen before (expansion) or on a promising node inside the
// already-observed graph (densification).
enum class Arm : std::uint8_t { expansion = 0, densification = 1 };

const char* arm_name(Arm arm);

// Beta-Bernoulli belief about one arm's hit rate.
struct BetaPosterior {
    double prior_alpha = 1.0;
    double prior_beta = 1.0;
    std::int64_t successes = 0;
    std::int64_t failures = 0;

    double alpha() const { return prior_alpha + static_cast<double>(successes); }
    double beta() const { return prior_beta + static_cast<double>(failures); }
    double sample(Rng& rng) const { return rng.beta(alpha(), beta()); }
    void validate() const;  // throws ConfigError
};

struct ArmSplit {
    int expansion = 0;
    int densification = 0;
};

// Slot-wise Thompson sampling: every slot draws one value from each arm's
// posterior and goes to the larger draw (expansion on exact ties).
ArmSplit thompson_split(const BetaPosterior& expansion, const BetaPosterior& densification,
                        int budget, Rng& rng);

// n distinct picks from the pool, uniformly without replacement; returns
// the whole pool when it is smaller than n. Callers rebalance the unused
// slots. Pool order does not influence the draw distribution.
std::vector<std::int32_t> expansion_sample(std::span<const std::int32_t> pool, int n,
                                           Rng& rng);

struct UcbParams {
    int k = 10;                 // neighbors per score
    double eta = 0.5;           // exploration weight on the spread term
    double epsilon_dist = 1e-3; // distance floor in the weighted average
    int cooldown_days = 3;      // days before an agent may be retested

    void validate() const;  // throws ConfigError
};

// A labeled embedding row: y is 1 for a positive test, 0 for a negative.
struct LabeledPoint {
    std::int32_t row;
    double y;
};

struct ScoredCandidate {
    std::int32_t row;  // table row of the candidate
    double mean;       // distance-weighted neighbor label average
    double spread;     // mean distance to those neighbors
    double score;      // mean + eta * spread
};

// Raised when scoring is requested before any test result exists; the
// caller should spend the budget on expansion instead.
struct NoLabelsError : std::runtime_error {
    explicit NoLabelsError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scores each candidate against its k nearest labeled rows: the label
// average weighs each neighbor by 1/max(distance, epsilon), the spread is
// the plain mean distance, and the final score adds eta times the spread
// as an optimism bonus. Fewer than k labeled rows means everyone scores
// against all of them.
std::vector<ScoredCandidate> ucb_scores(const EmbeddingTable& table,
                                        std::span<const std::int32_t> candidate_rows,
                                        std::span<const LabeledPoint> labeled,
                                        const UcbParams& params);

// The n best candidates by (score desc, row asc); the additive objective
// makes the greedy cut exactly optimal.
std::vector<std::int32_t> oracle_select(std::span<const ScoredCandidate> scored, int n);

struct ArmOutcome {
    Arm arm;
    bool positive;
};

// Folds one day of attributed results into the two posteriors.
void update_posteriors(BetaPosterior& expansion, BetaPosterior& densification,
                       std::span<const ArmOutcome> outcomes);

enum class PolicyKind { active_bandit, random_uniform, symptomatic_only, contact_tracing };

const char* policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);  // throws ConfigError

// Everything a policy may look at when picking today's tests. The full
// simulation is handed over, but policies only read observable facts:
// death, their own test history, the self-report queue, and the graph
// built from disclosed contacts.
struct PolicyContext {
    const Simulation& sim;
    const ObservedGraph& graph;
    int day = 0;
    int budget = 0;
};

// One day's reasoning trace, for the experiment log.
struct DecisionRecord {
    int day = -1;
    int expansion_slots = 0;
    int densification_slots = 0;
    std::vector<std::int32_t> selected;
    std::vector<ScoredCandidate> scored_picks;  // densification only, row = agent id
};

class TestingPolicy {
  public:
    virtual ~TestingPolicy() = default;
    virtual std::vector<std::int32_t> select(const PolicyContext& ctx) = 0;
    // Called after the lab returns; reports[i] belongs to results[i] and is
    // empty (subject -1) unless that test came back positive.
    virtual void observe(const PolicyContext& ctx, std::span<const TestResult> results,
                         std::span<const ContactReport> reports);
    const DecisionRecord& last_decision() const { return last_; }

  protected:
    DecisionRecord last_;
};

// Uniform draw over living agents.
class RandomPolicy : public TestingPolicy {
  public:
    explicit RandomPolicy(std::uint64_t seed) : seeds_(seed) {}
    std::vector<std::int32_t> select(const PolicyContext& ctx) override;

  private:
    SeedTree seeds_;
};

// First-come first-served on the self-report queue, nothing else.
class SymptomaticPolicy : public TestingPolicy {
  public:
    std::vector<std::int32_t> select(const PolicyContext& ctx) override;
};

// Self-reports first, then disclosed contacts of positives, freshest
// meetings first.
class ContactTracingPolicy : public TestingPolicy {
  public:
    std::vector<std::int32_t> select(const PolicyContext& ctx) override;
    void observe(const PolicyContext& ctx, std::span<const TestResult> results,
                 std::span<const ContactReport> reports) override;

  private:
    struct Lead {
        int report_day;
        int meeting_day;
        std::int32_t person;
    };
    std::deque<Lead> leads_;
};

// Corpus and trainer settings for the daily embedding refresh.
struct EmbeddingProfile {
    SkipGramParams skipgram;
    int walk_len = 20;
    int walks_uniform = 4;  // uniform walks from every node
    int walks_pattern = 3;  // per person, per type pattern (two patterns)

    void validate() const;  // throws ConfigError
};

struct BanditConfig {
    std::uint64_t seed = 1;
    UcbParams ucb;
    EmbeddingProfile embedding;
    // Days a positive agent stays enrolled in isolation; used to keep
    // densification away from people who cannot be out meeting anyone.
    int quarantine_days = 14;

    void validate() const;  // throws ConfigError
};

// The two-level adaptive policy: Thompson sampling splits the budget
// between expansion and densification, fresh embeddings of the observed
// graph feed a nearest-neighbor optimism score, and the day's results
// update the arm posteriors.
class ActiveBanditPolicy : public TestingPolicy {
  public:
    explicit ActiveBanditPolicy(const BanditConfig& cfg);
    std::vector<std::int32_t> select(const PolicyContext& ctx) override;
    void observe(const PolicyContext& ctx, std::span<const TestResult> results,
                 std::span<const ContactReport> reports) override;

    const BetaPosterior& posterior(Arm arm) const {
        return posteriors_[static_cast<int>(arm)];
    }
    const EmbeddingTable& table() const { return table_; }

  private:
    std::vector<std::int32_t> densification_candidates(const PolicyContext& ctx) const;
    void refresh_embeddings(const PolicyContext& ctx, const HeteroView& view);

    BanditConfig cfg_;
    SeedTree seeds_;
    BetaPosterior posteriors_[2];
    EmbeddingTable table_;
    bool table_ready_ = false;
    std::vector<std::pair<std::int32_t, Arm>> today_arms_;
};

std::unique_ptr<TestingPolicy> make_policy(PolicyKind kind, std::uint64_t seed,
                                           const BanditConfig& bandit_cfg);

}  // namespace episample
