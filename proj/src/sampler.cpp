#include "episample/sampler.hpp"

#include <algorithm>
#include <optional>

#include "episample/errors.hpp"

namespace episample {

const char* arm_name(Arm arm) {
    switch (arm) {
        case Arm::expansion: return "expansion";
        case Arm::densification: return "densification";
    }
    return "?";
}

void BetaPosterior::validate() const {
    if (!(prior_alpha > 0.0) || !(prior_beta > 0.0))
        throw ConfigError("beta priors must be positive");
    if (successes < 0 || failures < 0)
        throw ConfigError("posterior counts must be non-negative");
}

ArmSplit thompson_split(const BetaPosterior& expansion, const BetaPosterior& densification,
                        int budget, Rng& rng) {
    expansion.validate();
    densification.validate();
    if (budget < 0) throw ContractError("budget must be non-negative");
    ArmSplit split;
    for (int slot = 0; slot < budget; ++slot) {
        const double theta_e = expansion.sample(rng);
        const double theta_d = densification.sample(rng);
        if (theta_d > theta_e) {
            split.densification++;
        } else {
            split.expansion++;
        }
    }
    return split;
}

std::vector<std::int32_t> expansion_sample(std::span<const std::int32_t> pool, int n,
                                           Rng& rng) {
    if (n < 0) throw ContractError("sample size must be non-negative");
    std::vector<std::int32_t> scratch(pool.begin(), pool.end());
    if (static_cast<std::size_t>(n) >= scratch.size()) return scratch;
    // Partial Fisher-Yates: settle the first n positions only.
    for (int i = 0; i < n; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) + rng.uniform_int(scratch.size() - i);
        std::swap(scratch[static_cast<std::size_t>(i)], scratch[j]);
    }
    scratch.resize(static_cast<std::size_t>(n));
    return scratch;
}

void UcbParams::validate() const {
    if (k < 1) throw ConfigError("neighbor count k must be at least 1");
    if (eta < 0.0) throw ConfigError("exploration weight must be non-negative");
    if (!(epsilon_dist > 0.0)) throw ConfigError("distance floor must be positive");
    if (cooldown_days < 0) throw ConfigError("retest cooldown must be non-negative");
}

std::vector<ScoredCandidate> ucb_scores(const EmbeddingTable& table,
                                        std::span<const std::int32_t> candidate_rows,
                                        std::span<const LabeledPoint> labeled,
                                        const UcbParams& params) {
    params.validate();
    if (labeled.empty())
        throw NoLabelsError("no labeled nodes to score against; expand the observed set first");

    const std::int32_t n = static_cast<std::int32_t>(table.nodes.size());
    std::vector<std::pair<std::int32_t, double>> y_of;  // (row, label) sorted
    std::vector<std::int32_t> labeled_rows;
    y_of.reserve(labeled.size());
    labeled_rows.reserve(labeled.size());
    for (const LabeledPoint& lp : labeled) {
        if (lp.row < 0 || lp.row >= n) throw ContractError("labeled row out of range");
        y_of.emplace_back(lp.row, lp.y);
        labeled_rows.push_back(lp.row);
    }
    std::sort(y_of.begin(), y_of.end());
    for (std::size_t i = 1; i < y_of.size(); ++i)
        if (y_of[i].first == y_of[i - 1].first)
            throw ContractError("a labeled row appears twice");
    const auto label_of = [&](std::int32_t row) {
        auto it = std::lower_bound(y_of.begin(), y_of.end(),
                                   std::make_pair(row, -1.0));
        return it->second;
    };

    // The tree and the linear scan return identical neighbor lists; the
    // tree just makes many-query days affordable.
    std::optional<VpTree> tree;
    if (labeled_rows.size() > 64) tree.emplace(table, labeled_rows);

    std::vector<ScoredCandidate> out;
    out.reserve(candidate_rows.size());
    for (std::int32_t row : candidate_rows) {
        if (row < 0 || row >= n) throw ContractError("candidate row out of range");
        std::vector<KnnHit> hits;
        if (tree) {
            hits = tree->query(table.vec(row), params.k, row);
        } else {
            hits = knn(table, row, labeled_rows, params.k).hits;
        }
        ScoredCandidate sc{row, 0.0, 0.0, 0.0};
        if (!hits.empty()) {
            for (const KnnHit& h : hits) {
                sc.mean += label_of(h.node) / std::max(h.dist, params.epsilon_dist);
                sc.spread += h.dist;
            }
            sc.mean /= static_cast<double>(hits.size());
            sc.spread /= static_cast<double>(hits.size());
        }
        sc.score = sc.mean + params.eta * sc.spread;
        out.push_back(sc);
    }
    return out;
}

std::vector<std::int32_t> oracle_select(std::span<const ScoredCandidate> scored, int n) {
    if (n < 0) throw ContractError("selection size must be non-negative");
    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
        return scored[a].row < scored[b].row;
    });
    const std::size_t take = std::min(static_cast<std::size_t>(n), order.size());
    std::vector<std::int32_t> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(scored[order[i]].row);
    return out;
}

void update_posteriors(BetaPosterior& expansion, BetaPosterior& densification,
                       std::span<const ArmOutcome> outcomes) {
    for (const ArmOutcome& o : outcomes) {
        BetaPosterior* post = nullptr;
        switch (o.arm) {
            case Arm::expansion: post = &expansion; break;
            case Arm::densification: post = &densification; break;
        }
        if (!post) throw ContractError("test result not attributed to an arm");
        if (o.positive) {
            post->successes++;
        } else {
            post->failures++;
        }
    }
}

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::active_bandit: return "active_bandit";
        case PolicyKind::random_uniform: return "random";
        case PolicyKind::symptomatic_only: return "symptomatic_only";
        case PolicyKind::contact_tracing: return "contact_tracing";
    }
    return "?";
}

PolicyKind policy_from_name(const std::string& name) {
    if (name == "active_bandit" || name == "bandit") return PolicyKind::active_bandit;
    if (name == "random" || name == "random_uniform") return PolicyKind::random_uniform;
    if (name == "symptomatic_only" || name == "symptomatic")
        return PolicyKind::symptomatic_only;
    if (name == "contact_tracing" || name == "tracing") return PolicyKind::contact_tracing;
    throw ConfigError("unknown policy: " + name);
}

void TestingPolicy::observe(const PolicyContext&, std::span<const TestResult>,
                            std::span<const ContactReport>) {}

std::vector<std::int32_t> RandomPolicy::select(const PolicyContext& ctx) {
    last_ = DecisionRecord{};
    last_.day = ctx.day;
    if (ctx.budget <= 0) return {};
    std::vector<std::int32_t> pool;
    const std::int64_t n = ctx.sim.population_size();
    pool.reserve(static_cast<std::size_t>(n));
    for (std::int32_t a = 0; a < n; ++a)
        if (ctx.sim.alive(a)) pool.push_back(a);
    Rng rng = seeds_.stream("random-picks", static_cast<std::uint64_t>(ctx.day));
    last_.selected = expansion_sample(pool, ctx.budget, rng);
    return last_.selected;
}

std::vector<std::int32_t> SymptomaticPolicy::select(const PolicyContext& ctx) {
    last_ = DecisionRecord{};
    last_.day = ctx.day;
    if (ctx.budget <= 0) return {};
    last_.selected = ctx.sim.symptomatic_pending(static_cast<std::size_t>(ctx.budget));
    return last_.selected;
}

std::vector<std::int32_t> ContactTracingPolicy::select(const PolicyContext& ctx) {
    last_ = DecisionRecord{};
    last_.day = ctx.day;
    if (ctx.budget <= 0) return {};
    std::vector<std::int32_t> picks =
        ctx.sim.symptomatic_pending(static_cast<std::size_t>(ctx.budget));
    if (static_cast<int>(picks.size()) < ctx.budget && !leads_.empty()) {
        std::vector<Lead> order(leads_.begin(), leads_.end());
        // Freshest report first, then freshest meeting; stable so equal
        // leads keep their disclosure order.
        std::stable_sort(order.begin(), order.end(), [](const Lead& a, const Lead& b) {
            if (a.report_day != b.report_day) return a.report_day > b.report_day;
            return a.meeting_day > b.meeting_day;
        });
        std::vector<std::int32_t> chosen(picks);
        std::sort(chosen.begin(), chosen.end());
        for (const Lead& lead : order) {
            if (static_cast<int>(picks.size()) >= ctx.budget) break;
            if (std::binary_search(chosen.begin(), chosen.end(), lead.person)) continue;
            if (!ctx.sim.alive(lead.person)) continue;
            if (ctx.graph.label_of(lead.person) != TestLabel::untested) continue;
            picks.push_back(lead.person);
            chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), lead.person),
                          lead.person);
        }
    }
    last_.selected = picks;
    return picks;
}

void ContactTracingPolicy::observe(const PolicyContext& ctx,
                                   std::span<const TestResult> results,
                                   std::span<const ContactReport> reports) {
    (void)results;
    for (const ContactReport& report : reports) {
        if (report.subject < 0) continue;  // negative test, nothing disclosed
        for (const ReportedContact& rc : report.contacts)
            leads_.push_back({report.day, rc.day, rc.person});
    }
    // Leads older than the observation window cannot be acted on usefully.
    const int horizon = ctx.graph.window_days();
    while (!leads_.empty() && leads_.front().report_day <= ctx.day - horizon)
        leads_.pop_front();
}

void EmbeddingProfile::validate() const {
    skipgram.validate();
    if (walk_len < 2) throw ConfigError("walk length must be at least 2");
    if (walks_uniform < 0 || walks_pattern < 0)
        throw ConfigError("walk counts must be non-negative");
    if (walks_uniform + walks_pattern == 0)
        throw ConfigError("at least one walk per node is needed");
}

void BanditConfig::validate() const {
    ucb.validate();
    embedding.validate();
    if (quarantine_days < 0) throw ConfigError("isolation length must be non-negative");
}

ActiveBanditPolicy::ActiveBanditPolicy(const BanditConfig& cfg)
    : cfg_(cfg), seeds_(mix64(cfg.seed ^ fnv1a("active-bandit"))) {
    cfg_.validate();
}

std::vector<std::int32_t> ActiveBanditPolicy::densification_candidates(
    const PolicyContext& ctx) const {
    std::vector<std::int32_t> out;
    const std::int64_t n = ctx.sim.population_size();
    for (std::int32_t a = 0; a < n; ++a) {
        if (!ctx.graph.person_revealed(a)) continue;
        if (!ctx.sim.alive(a)) continue;
        // A known positive sits in isolation for a while; spending tests
        // there can't find anyone new.
        if (ctx.graph.label_of(a) == TestLabel::positive) {
            const int ld = ctx.graph.label_day(a);
            if (ld >= 0 && ld < ctx.day && ctx.day <= ld + cfg_.quarantine_days) continue;
        }
        const int lt = ctx.sim.last_tested_day(a);
        if (lt >= 0 && ctx.day - lt < cfg_.ucb.cooldown_days) continue;
        out.push_back(a);
    }
    return out;
}

void ActiveBanditPolicy::refresh_embeddings(const PolicyContext& ctx,
                                            const HeteroView& view) {
    EmbeddingGraph graph = build_embedding_graph(view);
    Rng walk_rng = seeds_.stream("walks", static_cast<std::uint64_t>(ctx.day));
    WalkCorpus corpus;
    if (cfg_.embedding.walks_uniform > 0)
        corpus = random_walks(graph, cfg_.embedding.walk_len, cfg_.embedding.walks_uniform,
                              walk_rng);
    if (cfg_.embedding.walks_pattern > 0) {
        static const MetaPath kVenuePath{NodeType::person, NodeType::location,
                                         NodeType::person};
        static const MetaPath kDistrictPath{NodeType::person, NodeType::location,
                                            NodeType::neighborhood, NodeType::location,
                                            NodeType::person};
        for (const MetaPath* path : {&kVenuePath, &kDistrictPath}) {
            WalkCorpus part = metapath_walks(graph, *path, cfg_.embedding.walk_len,
                                             cfg_.embedding.walks_pattern, walk_rng);
            for (auto& w : part.walks) corpus.walks.push_back(std::move(w));
        }
    }
    Rng train_rng = seeds_.stream("train", static_cast<std::uint64_t>(ctx.day));
    table_ = train_skipgram(graph, corpus, cfg_.embedding.skipgram, train_rng,
                            table_ready_ ? &table_ : nullptr);
    table_ready_ = true;
}

std::vector<std::int32_t> ActiveBanditPolicy::select(const PolicyContext& ctx) {
    last_ = DecisionRecord{};
    last_.day = ctx.day;
    today_arms_.clear();
    if (ctx.budget <= 0) return {};

    GraphSnapshot snap = ctx.graph.window_snapshot(ctx.day);
    // The regression has to track the moving front of the outbreak, so a
    // result only stays in the label set while it still says something
    // about today: a positive counts as an active case until its isolation
    // window closes, and anything older ages out entirely. Without this,
    // long-recovered clusters keep pumping scores and the densification
    // arm re-tests cold neighborhoods forever.
    std::vector<std::pair<std::int32_t, double>> labeled_agents;  // (agent, y)
    for (std::size_t i = 0; i < snap.persons.size(); ++i) {
        if (snap.labels[i] == TestLabel::untested) continue;
        if (ctx.day - snap.label_days[i] > cfg_.quarantine_days) continue;
        labeled_agents.emplace_back(snap.persons[i],
                                    snap.labels[i] == TestLabel::positive ? 1.0 : 0.0);
    }

    ArmSplit split;
    if (labeled_agents.empty()) {
        // Nothing to learn from yet: the whole budget goes to discovery.
        split.expansion = ctx.budget;
    } else {
        Rng split_rng = seeds_.stream("thompson", static_cast<std::uint64_t>(ctx.day));
        split = thompson_split(posteriors_[0], posteriors_[1], ctx.budget, split_rng);
    }

    std::vector<std::int32_t> pool;
    const std::int64_t n = ctx.sim.population_size();
    for (std::int32_t a = 0; a < n; ++a)
        if (ctx.sim.alive(a) && !ctx.graph.person_revealed(a)) pool.push_back(a);
    std::vector<std::int32_t> dense = densification_candidates(ctx);

    // Slots an arm cannot fill move to the other one.
    int want_exp = split.expansion;
    int want_dens = split.densification;
    if (static_cast<std::size_t>(want_exp) > pool.size()) {
        want_dens += want_exp - static_cast<int>(pool.size());
        want_exp = static_cast<int>(pool.size());
    }
    if (labeled_agents.empty()) want_dens = 0;
    if (static_cast<std::size_t>(want_dens) > dense.size()) {
        const int spare = want_dens - static_cast<int>(dense.size());
        want_dens = static_cast<int>(dense.size());
        want_exp = std::min(want_exp + spare, static_cast<int>(pool.size()));
    }

    Rng exp_rng = seeds_.stream("expansion", static_cast<std::uint64_t>(ctx.day));
    std::vector<std::int32_t> picks = expansion_sample(pool, want_exp, exp_rng);
    for (std::int32_t a : picks) today_arms_.emplace_back(a, Arm::expansion);

    if (want_dens > 0) {
        refresh_embeddings(ctx, hetero_view(snap, ctx.sim.population()));
        std::vector<LabeledPoint> labeled;
        labeled.reserve(labeled_agents.size());
        for (const auto& [agent, y] : labeled_agents) {
            const std::int32_t row = table_.row_of({NodeType::person, agent});
            if (row < 0) throw ContractError("labeled person missing from embedding table");
            labeled.push_back({row, y});
        }
        std::vector<std::int32_t> cand_rows;
        cand_rows.reserve(dense.size());
        for (std::int32_t a : dense) {
            const std::int32_t row = table_.row_of({NodeType::person, a});
            if (row < 0) throw ContractError("candidate missing from embedding table");
            cand_rows.push_back(row);
        }
        std::vector<ScoredCandidate> scored =
            ucb_scores(table_, cand_rows, labeled, cfg_.ucb);
        std::vector<std::int32_t> chosen_rows = oracle_select(scored, want_dens);

        std::vector<std::size_t> index_of_row(table_.nodes.size(), scored.size());
        for (std::size_t i = 0; i < scored.size(); ++i)
            index_of_row[static_cast<std::size_t>(scored[i].row)] = i;
        for (std::int32_t row : chosen_rows) {
            const std::int32_t agent = table_.nodes[static_cast<std::size_t>(row)].id;
            picks.push_back(agent);
            today_arms_.emplace_back(agent, Arm::densification);
            ScoredCandidate trace = scored[index_of_row[static_cast<std::size_t>(row)]];
            trace.row = agent;  // journal wants agent ids, not table rows
            last_.scored_picks.push_back(trace);
        }
    }

    last_.expansion_slots = want_exp;
    last_.densification_slots = want_dens;
    last_.selected = picks;
    return picks;
}

void ActiveBanditPolicy::observe(const PolicyContext& ctx,
                                 std::span<const TestResult> results,
                                 std::span<const ContactReport> reports) {
    (void)ctx;
    (void)reports;
    std::vector<ArmOutcome> outcomes;
    outcomes.reserve(results.size());
    for (const TestResult& r : results) {
        const auto it = std::find_if(
            today_arms_.begin(), today_arms_.end(),
            [&](const std::pair<std::int32_t, Arm>& e) { return e.first == r.agent; });
        if (it == today_arms_.end())
            throw ContractError("test result not attributed to an arm");
        outcomes.push_back({it->second, r.positive});
    }
    update_posteriors(posteriors_[static_cast<int>(Arm::expansion)],
                      posteriors_[static_cast<int>(Arm::densification)], outcomes);
}

std::unique_ptr<TestingPolicy> make_policy(PolicyKind kind, std::uint64_t seed,
                                           const BanditConfig& bandit_cfg) {
    switch (kind) {
        case PolicyKind::active_bandit: {
            BanditConfig cfg = bandit_cfg;
            cfg.seed = seed;
            return std::make_unique<ActiveBanditPolicy>(cfg);
        }
        case PolicyKind::random_uniform:
            return std::make_unique<RandomPolicy>(seed);
        case PolicyKind::symptomatic_only:
            return std::make_unique<SymptomaticPolicy>();
        case PolicyKind::contact_tracing:
            return std::make_unique<ContactTracingPolicy>();
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace episample
