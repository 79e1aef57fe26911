#pragma once

#include <string>
#include <vector>

namespace episample {

// Demographic and interaction parameters for the synthetic city. The
// canonical values are compiled in (builtin_*) and also shipped as CSV
// files under data/ so runs can override them via config paths.

struct AgeBand {
    std::string label;  // e.g. "<5", "25-34", ">85"
    int age_lo;         // inclusive
    int age_hi;         // inclusive
    double share;       // fraction of the population, not percent
};

struct AgeGenderTable {
    std::vector<AgeBand> bands;
    double male_share;
    double female_share;
};

struct NtaSpec {
    std::string name;
    double longitude;
    double latitude;
    long households;
    long schools;
    long stations;
    long supermarkets;
    long workplaces;
};

struct InteractionTable {
    double household_visit_prob;
    double household_meeting_prob;
    double share_singles;
    double share_couple_with_children;
    double share_couple_without_children;
    double share_single_with_children;
    int school_age_min;
    int school_age_max;
    double class_size_mean;
    double class_visit_prob;
    double class_meeting_prob;
    int work_age_min;
    int work_age_max;
    double employment_rate;
    double small_workplace_share;
    double small_workgroup_mean_size;
    double large_workgroup_mean_size;
    double workgroup_visit_prob;
    double workgroup_meeting_prob;
    double supermarket_visit_prob;
    double supermarket_meeting_prob;
    double supermarket_contacts_per_visit;
    double station_visit_prob;
    double station_meeting_prob;
    double station_contacts_per_visit;
    double mixing_visit_prob;
    double mixing_contacts_per_visit;
    int quarantine_days;
};

AgeGenderTable builtin_age_gender();
std::vector<NtaSpec> builtin_ntas();
InteractionTable builtin_interactions();

AgeGenderTable load_age_gender(const std::string& path);
std::vector<NtaSpec> load_ntas(const std::string& path);
InteractionTable load_interactions(const std::string& path);

/// Directory holding the bundled CSV copies of the tables above.
std::string default_data_dir();

/// Checks shares are non-negative and sum to 1 within 1e-6, then rescales
/// them to sum to exactly 1. Throws ConfigError otherwise.
void normalize_age_gender(AgeGenderTable& table);

/// Parses "0.25", "6.7e-4" or a rational like "2/7".
double parse_number(const std::string& text);

}  // namespace episample
