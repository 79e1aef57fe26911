#include "episample/observed_graph.hpp"

#include <algorithm>
#include <fstream>

#include "episample/errors.hpp"

namespace episample {

MeetingIndex::MeetingIndex(std::int64_t n_agents, int retention_days)
    : n_agents_(n_agents), retention_(retention_days), slots_(retention_days) {
    if (n_agents < 0) throw ContractError("meeting index needs a non-negative agent count");
    if (retention_days < 1) throw ContractError("meeting index retention must be >= 1");
}

void MeetingIndex::add_day(int day, const std::vector<Meeting>& meetings) {
    if (day < 1) throw ContractError("meeting index days start at 1");
    Slot& slot = slots_[day % retention_];
    slot.day = day;
    slot.offsets.assign(n_agents_ + 1, 0);
    for (const Meeting& m : meetings) {
        slot.offsets[m.a + 1] += 1;
        slot.offsets[m.b + 1] += 1;
    }
    for (std::int64_t a = 0; a < n_agents_; ++a) slot.offsets[a + 1] += slot.offsets[a];
    slot.contacts.resize(meetings.size() * 2);
    std::vector<std::int64_t> cursor(slot.offsets.begin(), slot.offsets.end() - 1);
    for (const Meeting& m : meetings) {
        slot.contacts[cursor[m.a]++] = {m.b, m.location};
        slot.contacts[cursor[m.b]++] = {m.a, m.location};
    }
}

std::span<const MeetingIndex::Contact> MeetingIndex::contacts_of(std::int32_t agent,
                                                                 int day) const {
    if (agent < 0 || agent >= n_agents_)
        throw ContractError("meeting index: agent id out of range");
    if (day < 1) return {};
    const Slot& slot = slots_[day % retention_];
    if (slot.day != day) return {};
    return {slot.contacts.data() + slot.offsets[agent],
            static_cast<std::size_t>(slot.offsets[agent + 1] - slot.offsets[agent])};
}

ContactReport make_report(const MeetingIndex& index, const Population& pop,
                          std::int32_t agent, int day, double reporting_rate, Rng& rng) {
    ContactReport report;
    report.subject = agent;
    report.day = day;
    int first = std::max(1, day - index.retention_days() + 1);
    for (int d = first; d <= day; ++d) {
        for (const MeetingIndex::Contact& c : index.contacts_of(agent, d)) {
            bool household =
                pop.locations[c.location].kind == LocationKind::household;
            if (household || rng.bernoulli(reporting_rate))
                report.contacts.push_back({c.partner, c.location, d, 1.0});
        }
    }
    return report;
}

const char* test_label_name(TestLabel label) {
    switch (label) {
        case TestLabel::untested: return "untested";
        case TestLabel::negative: return "negative";
        case TestLabel::positive: return "positive";
    }
    throw ContractError("test_label_name: bad label value");
}

ObservedGraph::ObservedGraph(std::int64_t n_agents, std::int64_t n_locations, int window_days)
    : n_agents_(n_agents), n_locations_(n_locations), window_(window_days) {
    if (window_days < 1) throw ContractError("observed graph window must be >= 1");
    labels_.assign(n_agents_, TestLabel::untested);
    label_days_.assign(n_agents_, -1);
    revealed_.assign(n_agents_, 0);
    edges_.resize(n_agents_);
}

void ObservedGraph::reveal_person(std::int32_t person) {
    if (!revealed_[person]) {
        revealed_[person] = 1;
        revealed_count_ += 1;
    }
}

void ObservedGraph::merge_edge(std::int32_t person, std::int32_t location, int day) {
    std::vector<int>& days = edges_[person][location];
    auto it = std::lower_bound(days.begin(), days.end(), day);
    if (it != days.end() && *it == day) return;  // already known
    days.insert(it, day);
    stamp_count_ += 1;
}

void ObservedGraph::record_test(const TestResult& result, const ContactReport* report) {
    if (result.agent < 0 || result.agent >= n_agents_)
        throw ContractError("record_test: agent id out of range");
    if (result.day < 1) throw ContractError("record_test: day must be >= 1");
    if (labels_[result.agent] == TestLabel::untested) labeled_count_ += 1;
    labels_[result.agent] = result.positive ? TestLabel::positive : TestLabel::negative;
    label_days_[result.agent] = result.day;
    reveal_person(result.agent);
    if (!result.positive || report == nullptr) return;

    if (report->subject != result.agent)
        throw ContractError("record_test: report subject does not match tested agent");
    for (const ReportedContact& c : report->contacts) {
        if (c.person < 0 || c.person >= n_agents_)
            throw ContractError("record_test: contact person out of range");
        if (c.location < 0 || c.location >= n_locations_)
            throw ContractError("record_test: contact location out of range");
        if (c.day <= result.day - window_ || c.day > result.day)
            throw ContractError("record_test: contact day outside the reporting window");
        reveal_person(c.person);
        merge_edge(result.agent, c.location, c.day);
        merge_edge(c.person, c.location, c.day);
    }
}

TestLabel ObservedGraph::label_of(std::int32_t agent) const {
    if (agent < 0 || agent >= n_agents_) throw ContractError("label_of: agent out of range");
    return labels_[agent];
}

int ObservedGraph::label_day(std::int32_t agent) const {
    if (agent < 0 || agent >= n_agents_) throw ContractError("label_day: agent out of range");
    return label_days_[agent];
}

bool ObservedGraph::person_revealed(std::int32_t agent) const {
    if (agent < 0 || agent >= n_agents_)
        throw ContractError("person_revealed: agent out of range");
    return revealed_[agent] != 0;
}

GraphSnapshot ObservedGraph::window_snapshot(int day) const {
    if (day < 1) throw ContractError("window_snapshot: day must be >= 1");
    GraphSnapshot snap;
    snap.day = day;
    snap.window_days = window_;
    const int lo = day - window_ + 1;

    std::vector<std::uint8_t> location_live(n_locations_, 0);
    for (std::int32_t p = 0; p < n_agents_; ++p) {
        if (revealed_[p]) {
            snap.persons.push_back(p);
            snap.labels.push_back(labels_[p]);
            snap.label_days.push_back(label_days_[p]);
        }
        for (const auto& [loc, days] : edges_[p]) {
            auto begin = std::lower_bound(days.begin(), days.end(), lo);
            auto end = std::upper_bound(begin, days.end(), day);
            int weight = static_cast<int>(end - begin);
            if (weight > 0) {
                snap.edges.push_back({p, loc, weight});
                location_live[loc] = 1;
            }
        }
    }
    for (std::int32_t loc = 0; loc < n_locations_; ++loc)
        if (location_live[loc]) snap.locations.push_back(loc);
    return snap;
}

HeteroView hetero_view(const GraphSnapshot& snapshot, const Population& pop) {
    HeteroView view;
    view.graph = snapshot;
    std::vector<std::uint8_t> nta_live;
    for (std::int32_t loc : snapshot.locations) {
        std::int16_t nta = pop.locations[loc].nta;
        if (nta < 0) throw ContractError("hetero_view: revealed location has no district");
        if (nta_live.size() <= static_cast<std::size_t>(nta)) nta_live.resize(nta + 1, 0);
        nta_live[nta] = 1;
        view.location_neighborhood.push_back({loc, nta});
    }
    for (std::size_t nta = 0; nta < nta_live.size(); ++nta)
        if (nta_live[nta]) view.neighborhoods.push_back(static_cast<std::int16_t>(nta));
    return view;
}

void write_edge_list(const HeteroView& view, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open edge list for writing: " + path);
    for (const SnapshotEdge& e : view.graph.edges)
        out << "P " << e.person << " L " << e.location << ' ' << e.weight << ' '
            << view.graph.day << '\n';
    for (const auto& [loc, nta] : view.location_neighborhood)
        out << "L " << loc << " N " << nta << " 1 " << view.graph.day << '\n';
    if (!out) throw IoError("failed writing edge list: " + path);
}

}  // namespace episample
