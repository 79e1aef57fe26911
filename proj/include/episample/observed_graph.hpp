#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "episample/population.hpp"
#include "episample/rng.hpp"
#include "episample/simulation.hpp"

namespace episample {

// Per-day contact lookup built from the simulator's meeting log. Each day
// is stored as a CSR over agents so reports can pull one agent's partners
// without rescanning the whole log; slots recycle after retention_days.
class MeetingIndex {
  public:
    struct Contact {
        std::int32_t partner;
        std::int32_t location;
    };

    MeetingIndex(std::int64_t n_agents, int retention_days);

    // Replaces the slot for `day`; call once per simulated day.
    void add_day(int day, const std::vector<Meeting>& meetings);

    // Contacts of one agent on one day; empty when the day is not held.
    std::span<const Contact> contacts_of(std::int32_t agent, int day) const;

    int retention_days() const { return retention_; }
    std::int64_t agent_count() const { return n_agents_; }

  private:
    struct Slot {
        int day = -1;
        std::vector<std::int64_t> offsets;
        std::vector<Contact> contacts;
    };

    std::int64_t n_agents_;
    int retention_;
    std::vector<Slot> slots_;
};

// What a freshly tested positive discloses: some of their meetings from
// the lookback window, each as (partner, where, when).
struct ReportedContact {
    std::int32_t person;
    std::int32_t location;
    int day;
    double intensity;  // carried for downstream display; 1 per meeting
};

struct ContactReport {
    std::int32_t subject = -1;
    int day = -1;
    std::vector<ReportedContact> contacts;
};

// Builds the disclosure for one positive agent: every household meeting in
// the window is always included, every other meeting independently with
// probability reporting_rate. Draws must come from an observation stream,
// never from the epidemic streams.
ContactReport make_report(const MeetingIndex& index, const Population& pop,
                          std::int32_t agent, int day, double reporting_rate, Rng& rng);

enum class TestLabel : std::uint8_t { untested = 0, negative = 1, positive = 2 };

const char* test_label_name(TestLabel label);

struct SnapshotEdge {
    std::int32_t person;
    std::int32_t location;
    int weight;  // distinct meeting days inside the window
};

// Windowed view of the revealed structure. Person nodes persist with
// their labels even when all their edges have aged out.
struct GraphSnapshot {
    int day = 0;
    int window_days = 0;
    std::vector<std::int32_t> persons;  // ascending agent ids
    std::vector<TestLabel> labels;      // parallel to persons
    std::vector<int> label_days;        // parallel, -1 when untested
    std::vector<std::int32_t> locations;  // ascending, only those with live edges
    std::vector<SnapshotEdge> edges;      // sorted by (person, location)
};

// Adds the neighborhood layer: one node per district that contains a
// revealed location, linked to each of its revealed locations.
struct HeteroView {
    GraphSnapshot graph;
    std::vector<std::int16_t> neighborhoods;  // ascending district indices
    std::vector<std::pair<std::int32_t, std::int16_t>> location_neighborhood;
};

// What the policy side knows about the contact fabric: test labels plus
// whatever meetings positives have disclosed, stamped by day so windowed
// snapshots can be cut. Merging the same (person, location, day) twice is
// a no-op, so re-submitted reports never inflate weights.
class ObservedGraph {
  public:
    ObservedGraph(std::int64_t n_agents, std::int64_t n_locations, int window_days = 14);

    // Records a lab result. For positives, the report's people and places
    // are merged into the revealed structure; negatives only label the
    // subject. A null report labels only.
    void record_test(const TestResult& result, const ContactReport* report);

    TestLabel label_of(std::int32_t agent) const;
    int label_day(std::int32_t agent) const;
    bool person_revealed(std::int32_t agent) const;
    std::int64_t revealed_person_count() const { return revealed_count_; }
    std::int64_t labeled_person_count() const { return labeled_count_; }

    // Total merged (person, location, day) stamps, i.e. the graph's size
    // before any windowing.
    std::int64_t edge_stamp_count() const { return stamp_count_; }

    int window_days() const { return window_; }

    GraphSnapshot window_snapshot(int day) const;

  private:
    void merge_edge(std::int32_t person, std::int32_t location, int day);
    void reveal_person(std::int32_t person);

    std::int64_t n_agents_;
    std::int64_t n_locations_;
    int window_;
    std::vector<TestLabel> labels_;
    std::vector<int> label_days_;
    std::vector<std::uint8_t> revealed_;
    std::int64_t revealed_count_ = 0;
    std::int64_t labeled_count_ = 0;
    std::int64_t stamp_count_ = 0;
    // Day-stamp lists per (person -> location), kept sorted and unique.
    std::vector<std::map<std::int32_t, std::vector<int>>> edges_;
};

HeteroView hetero_view(const GraphSnapshot& snapshot, const Population& pop);

// Debug/export format, one edge per line:
//   node_type node_id node_type node_id weight day
void write_edge_list(const HeteroView& view, const std::string& path);

}  // namespace episample
