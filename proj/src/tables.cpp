#include "episample/tables.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

#include "episample/csv.hpp"
#include "episample/errors.hpp"

namespace episample {

std::string default_data_dir() {
#ifdef EPISAMPLE_DATA_DIR
    return EPISAMPLE_DATA_DIR;
#else
    return "data";
#endif
}

double parse_number(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        double num = parse_number(text.substr(0, slash));
        double den = parse_number(text.substr(slash + 1));
        if (den == 0.0) throw ConfigError("division by zero in '" + text + "'");
        return num / den;
    }
    std::size_t used = 0;
    double value;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("trailing junk in number: '" + text + "'");
    return value;
}

AgeGenderTable builtin_age_gender() {
    // Census-style age pyramid for Manhattan; shares in percent here,
    // converted to fractions below. The 77-84 row leaves 75 and 76
    // unpopulated; the source table is reproduced verbatim.
    static const struct { const char* label; int lo; int hi; double pct; } kBands[] = {
        {"<5", 0, 4, 6.8},    {"5-9", 5, 9, 7.0},    {"10-14", 10, 14, 6.6},
        {"15-19", 15, 19, 6.5}, {"20-24", 20, 24, 7.4}, {"25-34", 25, 34, 17.1},
        {"35-44", 35, 44, 15.8}, {"45-54", 45, 54, 12.6}, {"55-59", 55, 59, 4.6},
        {"60-64", 60, 64, 3.9}, {"65-74", 65, 74, 6.2},  {"77-84", 77, 84, 4.0},
        {">85", 86, 100, 1.5},
    };
    AgeGenderTable table;
    for (const auto& b : kBands) {
        table.bands.push_back({b.label, b.lo, b.hi, b.pct / 100.0});
    }
    table.male_share = 47.38 / 100.0;
    table.female_share = 52.62 / 100.0;
    return table;
}

std::vector<NtaSpec> builtin_ntas() {
    // Ten grouped Manhattan neighborhoods. Coordinates are kept exactly
    // as published even though the longitude/latitude columns are
    // plainly swapped; only planar distances between them matter here.
    return {
        {"Battery Park City, Greenwich Village & Soho", 40.86183, 73.92363, 61672, 170, 47, 35, 18626},
        {"Central Harlem", 40.8221, 73.92363, 48680, 170, 47, 28, 1270},
        {"Chelsea, Clinton & Midtown Business District", 40.8089, 73.9482, 59821, 170, 47, 34, 32137},
        {"Chinatown & Lower East Side", 40.7957, 73.9389, 67708, 170, 47, 39, 8573},
        {"East Harlem", 40.7736, 73.9566, 48174, 170, 47, 28, 1721},
        {"Hamilton Heights, Manhattanville & West Harlem", 40.787, 73.9754, 51826, 170, 47, 30, 1962},
        {"Murray Hill, Gramercy & Stuyvesant Town", 40.75507, 73.9924, 62339, 170, 47, 36, 22156},
        {"Upper East Side", 40.7388, 73.97933, 91671, 170, 47, 53, 8896},
        {"Upper West Side & West Side", 40.7154, 73.99065, 80736, 170, 47, 46, 6406},
        {"Washington Heights, Inwood & Marble Hill", 40.72283, 74.00717, 81367, 170, 47, 47, 3049},
    };
}

InteractionTable builtin_interactions() {
    InteractionTable t;
    t.household_visit_prob = 1.0;
    t.household_meeting_prob = 1.0;
    t.share_singles = 0.322;
    t.share_couple_with_children = 0.412;
    t.share_couple_without_children = 0.158;
    t.share_single_with_children = 0.108;
    t.school_age_min = 6;
    t.school_age_max = 18;
    t.class_size_mean = 26.0;
    t.class_visit_prob = 1.0;
    t.class_meeting_prob = 1.0;
    t.work_age_min = 20;
    t.work_age_max = 60;
    t.employment_rate = 0.959;
    t.small_workplace_share = 0.89;
    t.small_workgroup_mean_size = 3.0;
    t.large_workgroup_mean_size = 11.0;
    t.workgroup_visit_prob = 1.0;
    t.workgroup_meeting_prob = 1.0;
    t.supermarket_visit_prob = 2.0 / 7.0;
    t.supermarket_meeting_prob = 6.70e-4;
    t.supermarket_contacts_per_visit = 30.0;
    t.station_visit_prob = 1.0;
    t.station_meeting_prob = 4.09e-3;
    t.station_contacts_per_visit = 10.0;
    t.mixing_visit_prob = 0.05;
    t.mixing_contacts_per_visit = 10.0;
    t.quarantine_days = 14;
    return t;
}

namespace {

// "a-b" -> [a, b]; "<n" -> [0, n-1]; ">n" -> [n+1, 100].
std::pair<int, int> parse_band_label(const std::string& label) {
    try {
        if (label.size() > 1 && label[0] == '<') {
            return {0, std::stoi(label.substr(1)) - 1};
        }
        if (label.size() > 1 && label[0] == '>') {
            return {std::stoi(label.substr(1)) + 1, 100};
        }
        auto dash = label.find('-');
        if (dash != std::string::npos) {
            return {std::stoi(label.substr(0, dash)), std::stoi(label.substr(dash + 1))};
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("cannot parse age band label '" + label + "'");
}

}  // namespace

AgeGenderTable load_age_gender(const std::string& path) {
    CsvTable csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"attribute", "level", "percent"}) {
        throw IoError(path + ": expected header attribute,level,percent");
    }
    AgeGenderTable table;
    table.male_share = -1.0;
    table.female_share = -1.0;
    for (const auto& row : csv.rows) {
        const std::string& attr = row[0];
        const std::string& level = row[1];
        double share = parse_number(row[2]) / 100.0;
        if (attr == "age") {
            auto [lo, hi] = parse_band_label(level);
            table.bands.push_back({level, lo, hi, share});
        } else if (attr == "gender") {
            if (level == "male") table.male_share = share;
            else if (level == "female") table.female_share = share;
            else throw IoError(path + ": unknown gender level '" + level + "'");
        } else {
            throw IoError(path + ": unknown attribute '" + attr + "'");
        }
    }
    if (table.bands.empty()) throw IoError(path + ": no age rows");
    if (table.male_share < 0 || table.female_share < 0) {
        throw IoError(path + ": missing gender rows");
    }
    return table;
}

std::vector<NtaSpec> load_ntas(const std::string& path) {
    CsvTable csv = read_csv(path);
    const std::vector<std::string> expect = {"name", "longitude", "latitude", "households",
                                             "schools", "stations", "supermarkets", "workplaces"};
    if (csv.header != expect) throw IoError(path + ": unexpected header");
    std::vector<NtaSpec> ntas;
    for (const auto& row : csv.rows) {
        NtaSpec n;
        n.name = row[0];
        n.longitude = parse_number(row[1]);
        n.latitude = parse_number(row[2]);
        n.households = std::lround(parse_number(row[3]));
        n.schools = std::lround(parse_number(row[4]));
        n.stations = std::lround(parse_number(row[5]));
        n.supermarkets = std::lround(parse_number(row[6]));
        n.workplaces = std::lround(parse_number(row[7]));
        if (n.households < 0 || n.schools < 0 || n.stations < 0 ||
            n.supermarkets < 0 || n.workplaces < 0) {
            throw ConfigError(path + ": negative count for NTA '" + n.name + "'");
        }
        ntas.push_back(std::move(n));
    }
    if (ntas.empty()) throw IoError(path + ": no NTA rows");
    return ntas;
}

InteractionTable load_interactions(const std::string& path) {
    CsvTable csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"parameter", "value"}) {
        throw IoError(path + ": expected header parameter,value");
    }
    std::map<std::string, std::string> kv;
    for (const auto& row : csv.rows) {
        if (!kv.emplace(row[0], row[1]).second) {
            throw IoError(path + ": duplicate parameter '" + row[0] + "'");
        }
    }
    auto take = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError(std::string(path) + ": missing parameter '" + key + "'");
        double v = parse_number(it->second);
        kv.erase(it);
        return v;
    };
    InteractionTable t;
    t.household_visit_prob = take("household_visit_probability");
    t.household_meeting_prob = take("household_meeting_probability");
    t.share_singles = take("household_share_singles");
    t.share_couple_with_children = take("household_share_couple_with_children");
    t.share_couple_without_children = take("household_share_couple_without_children");
    t.share_single_with_children = take("household_share_single_with_children");
    t.school_age_min = static_cast<int>(take("school_age_min"));
    t.school_age_max = static_cast<int>(take("school_age_max"));
    t.class_size_mean = take("class_size_mean");
    t.class_visit_prob = take("class_visit_probability");
    t.class_meeting_prob = take("class_meeting_probability");
    t.work_age_min = static_cast<int>(take("work_age_min"));
    t.work_age_max = static_cast<int>(take("work_age_max"));
    t.employment_rate = take("employment_rate");
    t.small_workplace_share = take("small_workplace_share");
    t.small_workgroup_mean_size = take("small_workgroup_mean_size");
    t.large_workgroup_mean_size = take("large_workgroup_mean_size");
    t.workgroup_visit_prob = take("workgroup_visit_probability");
    t.workgroup_meeting_prob = take("workgroup_meeting_probability");
    t.supermarket_visit_prob = take("supermarket_visit_probability");
    t.supermarket_meeting_prob = take("supermarket_meeting_probability");
    t.supermarket_contacts_per_visit = take("supermarket_contacts_per_visit");
    t.station_visit_prob = take("station_visit_probability");
    t.station_meeting_prob = take("station_meeting_probability");
    t.station_contacts_per_visit = take("station_contacts_per_visit");
    t.mixing_visit_prob = take("mixing_visit_probability");
    t.mixing_contacts_per_visit = take("mixing_contacts_per_visit");
    t.quarantine_days = static_cast<int>(take("quarantine_days"));
    if (!kv.empty()) throw IoError(path + ": unknown parameter '" + kv.begin()->first + "'");
    return t;
}

void normalize_age_gender(AgeGenderTable& table) {
    double band_sum = 0.0;
    for (const auto& b : table.bands) {
        if (b.share < 0.0) throw ConfigError("negative share for age band '" + b.label + "'");
        band_sum += b.share;
    }
    if (std::abs(band_sum - 1.0) > 1e-6) {
        throw ConfigError("age band shares sum to " + std::to_string(band_sum) + ", expected 1");
    }
    for (auto& b : table.bands) b.share /= band_sum;
    if (table.male_share < 0.0 || table.female_share < 0.0) {
        throw ConfigError("negative gender share");
    }
    double gender_sum = table.male_share + table.female_share;
    if (std::abs(gender_sum - 1.0) > 1e-6) {
        throw ConfigError("gender shares sum to " + std::to_string(gender_sum) + ", expected 1");
    }
    table.male_share /= gender_sum;
    table.female_share /= gender_sum;
}

}  // namespace episample
