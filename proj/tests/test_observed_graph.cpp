#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "episample/errors.hpp"
#include "episample/observed_graph.hpp"
#include "episample/population.hpp"
#include "episample/rng.hpp"
#include "episample/simulation.hpp"

using namespace episample;

namespace {

Location make_location(std::int32_t id, LocationKind kind, std::int16_t nta = 0) {
    Location loc;
    loc.id = id;
    loc.kind = kind;
    loc.nta = nta;
    loc.meeting_prob = 1.0;
    return loc;
}

// Agents and locations only; no propensities needed for graph-side tests.
Population bare_population(int n_agents, std::vector<Location> locations) {
    Population pop;
    pop.seed = 0;
    pop.scale = 1.0;
    for (int i = 0; i < n_agents; ++i) {
        Agent a;
        a.id = i;
        a.age = 30;
        a.age_band = 0;
        pop.agents.push_back(a);
    }
    pop.locations = std::move(locations);
    pop.build_index();
    return pop;
}

TestResult lab(std::int32_t agent, int day, bool positive) {
    TestResult r;
    r.agent = agent;
    r.day = day;
    r.positive = positive;
    return r;
}

}  // namespace

TEST_CASE("meeting index reproduces each agent's day contacts") {
    MeetingIndex index(5, 14);
    std::vector<Meeting> day1{{0, 1, 5}, {0, 2, 7}, {3, 4, 5}};
    index.add_day(1, day1);

    auto c0 = index.contacts_of(0, 1);
    REQUIRE(c0.size() == 2);
    CHECK(c0[0].partner == 1);
    CHECK(c0[0].location == 5);
    CHECK(c0[1].partner == 2);
    CHECK(c0[1].location == 7);

    auto c1 = index.contacts_of(1, 1);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].partner == 0);

    CHECK(index.contacts_of(2, 2).empty());  // day not loaded
    CHECK(index.contacts_of(3, 1).size() == 1);
    CHECK_THROWS_AS(index.contacts_of(9, 1), ContractError);

    // Slots recycle: loading day 15 evicts day 1 (same slot mod 14).
    index.add_day(15, {{1, 2, 7}});
    CHECK(index.contacts_of(0, 1).empty());
    CHECK(index.contacts_of(1, 15).size() == 1);
}

TEST_CASE("contact reports always include household meetings") {
    Population pop = bare_population(
        5, {make_location(0, LocationKind::household), make_location(1, LocationKind::workgroup)});
    MeetingIndex index(5, 14);
    index.add_day(3, {{0, 1, 0}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}});

    SUBCASE("full reporting returns the whole window contact set") {
        Rng rng(1);
        ContactReport rep = make_report(index, pop, 0, 3, 1.0, rng);
        CHECK(rep.subject == 0);
        REQUIRE(rep.contacts.size() == 3);
        CHECK(rep.contacts[0].person == 1);
        CHECK(rep.contacts[0].location == 0);
        CHECK(rep.contacts[0].day == 3);
        CHECK(rep.contacts[1].person == 2);
        CHECK(rep.contacts[1].location == 1);
        CHECK(rep.contacts[2].person == 3);
    }

    SUBCASE("zero reporting keeps only the forced household contacts") {
        Rng rng(1);
        ContactReport rep = make_report(index, pop, 0, 3, 0.0, rng);
        REQUIRE(rep.contacts.size() == 1);
        CHECK(rep.contacts[0].person == 1);
        CHECK(rep.contacts[0].location == 0);
    }

    SUBCASE("meetings at the window edge age out of reports") {
        Rng rng(1);
        CHECK(make_report(index, pop, 0, 16, 1.0, rng).contacts.size() == 3);
        CHECK(make_report(index, pop, 0, 17, 1.0, rng).contacts.empty());
    }
}

TEST_CASE("half reporting discloses half the non-household meetings") {
    std::vector<Location> locs{make_location(0, LocationKind::workgroup)};
    Population pop = bare_population(41, std::move(locs));
    MeetingIndex index(41, 14);
    std::vector<Meeting> meetings;
    for (std::int32_t k = 1; k <= 40; ++k) meetings.push_back({0, k, 0});
    index.add_day(2, meetings);

    Rng rng(20260825);
    double total = 0.0;
    const int reps = 1000;
    for (int i = 0; i < reps; ++i)
        total += static_cast<double>(make_report(index, pop, 0, 2, 0.5, rng).contacts.size());
    double mean = total / reps;
    CHECK(mean > 19.0);
    CHECK(mean < 21.0);
}

TEST_CASE("recording a positive reveals the reported structure") {
    Population pop = bare_population(10, {make_location(0, LocationKind::household)});
    ObservedGraph graph(10, 1);

    ContactReport rep;
    rep.subject = 9;
    rep.day = 5;
    rep.contacts = {{1, 0, 5, 1.0}, {2, 0, 5, 1.0}, {3, 0, 5, 1.0}};
    graph.record_test(lab(9, 5, true), &rep);

    CHECK(graph.label_of(9) == TestLabel::positive);
    CHECK(graph.label_day(9) == 5);
    CHECK(graph.revealed_person_count() == 4);
    CHECK(graph.labeled_person_count() == 1);
    // Contact persons become visible but stay unlabeled.
    CHECK(graph.person_revealed(2));
    CHECK(graph.label_of(2) == TestLabel::untested);
    CHECK(graph.label_day(2) == -1);

    GraphSnapshot snap = graph.window_snapshot(5);
    CHECK(snap.persons == std::vector<std::int32_t>{1, 2, 3, 9});
    REQUIRE(snap.edges.size() == 4);  // subject plus three contacts, all at loc 0
    for (const SnapshotEdge& e : snap.edges) {
        CHECK(e.location == 0);
        CHECK(e.weight == 1);
    }
    CHECK(snap.locations == std::vector<std::int32_t>{0});
}

TEST_CASE("recording a negative only labels the subject") {
    ObservedGraph graph(10, 14);
    graph.record_test(lab(4, 7, false), nullptr);
    CHECK(graph.label_of(4) == TestLabel::negative);
    CHECK(graph.label_day(4) == 7);
    CHECK(graph.edge_stamp_count() == 0);
    GraphSnapshot snap = graph.window_snapshot(7);
    CHECK(snap.persons == std::vector<std::int32_t>{4});
    CHECK(snap.edges.empty());
    CHECK(snap.locations.empty());
}

TEST_CASE("re-submitted reports do not inflate edge weights") {
    ObservedGraph graph(10, 14);
    ContactReport rep;
    rep.subject = 0;
    rep.day = 3;
    rep.contacts = {{1, 0, 3, 1.0}, {2, 0, 3, 1.0}};
    graph.record_test(lab(0, 3, true), &rep);
    std::int64_t stamps = graph.edge_stamp_count();

    // Same disclosures again two days later: label day moves, edges do not.
    rep.day = 5;
    graph.record_test(lab(0, 5, true), &rep);
    CHECK(graph.label_day(0) == 5);
    CHECK(graph.edge_stamp_count() == stamps);
    GraphSnapshot snap = graph.window_snapshot(5);
    for (const SnapshotEdge& e : snap.edges) CHECK(e.weight == 1);
}

TEST_CASE("record_test validates its inputs") {
    ObservedGraph graph(10, 5);
    ContactReport rep;
    rep.subject = 1;
    rep.day = 3;
    rep.contacts = {{2, 0, 3, 1.0}};
    // Subject mismatch.
    CHECK_THROWS_AS(graph.record_test(lab(0, 3, true), &rep), ContractError);
    // Contact day after the test day.
    rep.subject = 0;
    rep.contacts = {{2, 0, 9, 1.0}};
    CHECK_THROWS_AS(graph.record_test(lab(0, 3, true), &rep), ContractError);
    // Contact day older than the window.
    rep.contacts = {{2, 0, 5, 1.0}};
    CHECK_THROWS_AS(graph.record_test(lab(0, 20, true), &rep), ContractError);
    // Out-of-range ids.
    rep.contacts = {{12, 0, 3, 1.0}};
    CHECK_THROWS_AS(graph.record_test(lab(0, 3, true), &rep), ContractError);
    rep.contacts = {{2, 7, 3, 1.0}};
    CHECK_THROWS_AS(graph.record_test(lab(0, 3, true), &rep), ContractError);
}

TEST_CASE("snapshots cut a sliding window and keep labeled isolates") {
    ObservedGraph graph(10, 14);
    ContactReport rep;
    rep.subject = 0;
    rep.day = 3;
    rep.contacts = {{1, 0, 3, 1.0}};
    graph.record_test(lab(0, 3, true), &rep);

    CHECK(graph.window_snapshot(3).edges.size() == 2);
    CHECK(graph.window_snapshot(16).edges.size() == 2);  // day 3 still in (2, 16]
    GraphSnapshot late = graph.window_snapshot(17);      // (3, 17] excludes day 3
    CHECK(late.edges.empty());
    CHECK(late.locations.empty());
    // The tested person and the disclosed contact survive as nodes.
    CHECK(late.persons == std::vector<std::int32_t>{0, 1});
    CHECK(late.labels[0] == TestLabel::positive);
    CHECK(late.labels[1] == TestLabel::untested);

    CHECK_THROWS_AS(graph.window_snapshot(0), ContractError);
}

TEST_CASE("repeat visits accumulate day stamps into edge weight") {
    ObservedGraph graph(10, 14);
    for (int day = 1; day <= 14; ++day) {
        ContactReport rep;
        rep.subject = 0;
        rep.day = day;
        rep.contacts = {{1, 0, day, 1.0}};
        graph.record_test(lab(0, day, true), &rep);
    }
    GraphSnapshot snap = graph.window_snapshot(14);
    REQUIRE(snap.edges.size() == 2);
    CHECK(snap.edges[0].weight == 14);  // one shared location, 14 distinct days
    CHECK(snap.edges[1].weight == 14);
    // Half the stamps fall out of a later window.
    CHECK(graph.window_snapshot(21).edges[0].weight == 7);
}

TEST_CASE("district layer links revealed locations to shared nodes") {
    std::vector<Location> locs{make_location(0, LocationKind::household, 0),
                               make_location(1, LocationKind::workgroup, 0),
                               make_location(2, LocationKind::supermarket, 1)};
    Population pop = bare_population(5, std::move(locs));
    ObservedGraph graph(5, 14);
    ContactReport rep;
    rep.subject = 0;
    rep.day = 2;
    rep.contacts = {{1, 0, 2, 1.0}, {2, 1, 2, 1.0}, {3, 2, 1, 1.0}};
    graph.record_test(lab(0, 2, true), &rep);

    HeteroView view = hetero_view(graph.window_snapshot(2), pop);
    CHECK(view.neighborhoods == std::vector<std::int16_t>{0, 1});
    REQUIRE(view.location_neighborhood.size() == 3);
    CHECK(view.location_neighborhood[0] == std::pair<std::int32_t, std::int16_t>{0, 0});
    CHECK(view.location_neighborhood[1] == std::pair<std::int32_t, std::int16_t>{1, 0});
    CHECK(view.location_neighborhood[2] == std::pair<std::int32_t, std::int16_t>{2, 1});

    // An empty snapshot has no district layer at all.
    ObservedGraph empty(5, 14);
    HeteroView none = hetero_view(empty.window_snapshot(2), pop);
    CHECK(none.neighborhoods.empty());
    CHECK(none.location_neighborhood.empty());
}

TEST_CASE("edge list export writes one line per edge") {
    std::vector<Location> locs{make_location(0, LocationKind::household, 3)};
    Population pop = bare_population(3, std::move(locs));
    ObservedGraph graph(3, 14);
    ContactReport rep;
    rep.subject = 2;
    rep.day = 1;
    rep.contacts = {{0, 0, 1, 1.0}};
    graph.record_test(lab(2, 1, true), &rep);

    std::string path = "test_edge_list.tmp";
    write_edge_list(hetero_view(graph.window_snapshot(1), pop), path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    std::remove(path.c_str());

    REQUIRE(lines.size() == 3);  // two person-location edges, one district edge
    CHECK(lines[0] == "P 0 L 0 1 1");
    CHECK(lines[1] == "P 2 L 0 1 1");
    CHECK(lines[2] == "L 0 N 3 1 1");
}

TEST_CASE("a seeded run never fabricates contacts and snapshots stay exact") {
    PopulationConfig pc;
    pc.target_size = 2000;
    Population pop = generate_population(pc, 321);

    SimulationConfig cfg;
    cfg.initial_infected = 20;
    cfg.disease.beta_contact = 0.05;
    cfg.tests_per_day = 20;
    Simulation sim(pop, cfg, 321);

    ObservedGraph graph(pop.agents.size(), pop.locations.size());
    MeetingIndex index(pop.agents.size(), graph.window_days());
    Rng observation_rng(SeedTree(321).child("observation"));

    // Ground truth kept by the test: every realized meeting of the run as
    // (low id, high id, location, day), and every merged report triple.
    std::set<std::tuple<std::int32_t, std::int32_t, std::int32_t, int>> true_meetings;
    std::set<std::tuple<std::int32_t, std::int32_t, int>> shadow_stamps;
    long window_contacts_nonhh = 0;
    long reported_nonhh = 0;

    Simulation::SelectHook select = [](const Simulation& s, int day) {
        // Symptomatic self-reports first, then an arbitrary deterministic
        // sweep of untested living agents.
        std::vector<std::int32_t> picks = s.symptomatic_pending(10);
        for (std::int64_t k = 0; k < s.population_size() && picks.size() < 20; ++k) {
            auto a = static_cast<std::int32_t>((static_cast<std::int64_t>(day) * 997 + k * 13) %
                                               s.population_size());
            if (!s.alive(a) || s.last_tested_day(a) == day) continue;
            if (std::find(picks.begin(), picks.end(), a) != picks.end()) continue;
            picks.push_back(a);
        }
        return picks;
    };

    Simulation::ResultHook observe = [&](const Simulation& s, const std::vector<TestResult>& rs) {
        int day = s.current_day();
        index.add_day(day, s.meetings_on(day));
        for (const Meeting& m : s.meetings_on(day))
            true_meetings.insert({std::min(m.a, m.b), std::max(m.a, m.b), m.location, day});
        for (const TestResult& r : rs) {
            if (!r.positive) {
                graph.record_test(r, nullptr);
                continue;
            }
            // Tally ground truth for the partial-disclosure check.
            for (int d = std::max(1, day - index.retention_days() + 1); d <= day; ++d)
                for (const auto& c : index.contacts_of(r.agent, d))
                    if (s.population().locations[c.location].kind != LocationKind::household)
                        window_contacts_nonhh += 1;
            ContactReport rep = make_report(index, s.population(), r.agent, day, 0.8,
                                            observation_rng);
            for (const ReportedContact& c : rep.contacts) {
                // Soundness: everything disclosed really happened.
                auto key = std::make_tuple(std::min(r.agent, c.person),
                                           std::max(r.agent, c.person), c.location, c.day);
                CHECK(true_meetings.count(key) == 1);
                if (s.population().locations[c.location].kind != LocationKind::household)
                    reported_nonhh += 1;
                shadow_stamps.insert({r.agent, c.location, c.day});
                shadow_stamps.insert({c.person, c.location, c.day});
            }
            graph.record_test(r, &rep);
        }
    };

    for (int day = 1; day <= 60; ++day) {
        sim.step_day(select, observe);

        // The snapshot must equal a brute-force aggregation of the shadow
        // triples over the same window.
        GraphSnapshot snap = graph.window_snapshot(day);
        std::map<std::pair<std::int32_t, std::int32_t>, int> expect;
        for (const auto& [person, loc, d] : shadow_stamps)
            if (d > day - graph.window_days() && d <= day) expect[{person, loc}] += 1;
        REQUIRE(snap.edges.size() == expect.size());
        std::size_t i = 0;
        for (const auto& [key, weight] : expect) {
            CHECK(snap.edges[i].person == key.first);
            CHECK(snap.edges[i].location == key.second);
            CHECK(snap.edges[i].weight == weight);
            ++i;
        }
    }

    CHECK(graph.edge_stamp_count() == static_cast<std::int64_t>(shadow_stamps.size()));
    CHECK(graph.labeled_person_count() > 0);
    CHECK(graph.edge_stamp_count() > 0);

    // Partial disclosure: roughly the reporting rate of non-household
    // contacts shows up, clearly fewer than the truth.
    REQUIRE(window_contacts_nonhh > 500);
    double ratio = static_cast<double>(reported_nonhh) / window_contacts_nonhh;
    CHECK(ratio > 0.7);
    CHECK(ratio < 0.9);
}
