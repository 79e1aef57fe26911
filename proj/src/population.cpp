#include "episample/population.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "episample/errors.hpp"

namespace episample {

using ordered_json = nlohmann::ordered_json;

const char* location_kind_name(LocationKind kind) {
    switch (kind) {
        case LocationKind::household: return "household";
        case LocationKind::school: return "school";
        case LocationKind::school_class: return "school_class";
        case LocationKind::workplace: return "workplace";
        case LocationKind::workgroup: return "workgroup";
        case LocationKind::supermarket: return "supermarket";
        case LocationKind::station: return "station";
        case LocationKind::mixing: return "mixing";
    }
    throw ContractError("unknown location kind");
}

LocationKind location_kind_from_name(const std::string& name) {
    for (int k = 0; k <= static_cast<int>(LocationKind::mixing); ++k) {
        auto kind = static_cast<LocationKind>(k);
        if (name == location_kind_name(kind)) return kind;
    }
    throw ConfigError("unknown location kind '" + name + "'");
}

AgeGenderDraw sample_age_gender(const AgeGenderTable& table, Rng& rng) {
    std::vector<double> cumulative;
    cumulative.reserve(table.bands.size());
    double sum = 0.0;
    for (const auto& b : table.bands) {
        sum += b.share;
        cumulative.push_back(sum);
    }
    AgeGenderDraw draw;
    draw.band = static_cast<int>(rng.categorical(cumulative));
    const AgeBand& band = table.bands[draw.band];
    draw.age = band.age_lo + static_cast<int>(rng.uniform_int(band.age_hi - band.age_lo + 1));
    draw.gender = rng.bernoulli(table.female_share) ? Gender::female : Gender::male;
    return draw;
}

namespace {

constexpr double kTwoPi = 6.283185307179586;

double dist2(double ax, double ay, double bx, double by) {
    const double dx = ax - bx;
    const double dy = ay - by;
    return dx * dx + dy * dy;
}

long scaled_count(long full_count, double scale) {
    if (full_count <= 0) return 0;
    long long v = std::llround(scale * static_cast<double>(full_count));
    return static_cast<long>(std::max(1LL, v));
}

const Location* nearest(const std::vector<const Location*>& candidates, double x, double y) {
    const Location* best = nullptr;
    double best_d = 0.0;
    for (const Location* loc : candidates) {
        double d = dist2(loc->x, loc->y, x, y);
        if (!best || d < best_d) {
            best = loc;
            best_d = d;
        }
    }
    return best;
}

std::vector<const Location*> locations_of_kind(const std::vector<Location>& grid,
                                               LocationKind kind) {
    std::vector<const Location*> out;
    for (const auto& loc : grid) {
        if (loc.kind == kind) out.push_back(&loc);
    }
    return out;
}

}  // namespace

std::vector<Location> build_location_grid(const std::vector<NtaSpec>& ntas,
                                          const InteractionTable& inter, double scale,
                                          int mixing_per_nta, double radius, Rng& rng) {
    if (scale <= 0.0) throw ConfigError("location grid scale must be positive");
    if (mixing_per_nta < 0) throw ConfigError("mixing_locations_per_nta must be >= 0");
    std::vector<Location> grid;
    auto place = [&](LocationKind kind, std::int16_t nta, double meeting_prob) {
        const NtaSpec& spec = ntas[nta];
        Location loc;
        loc.id = static_cast<std::int32_t>(grid.size());
        loc.kind = kind;
        loc.nta = nta;
        // Uniform in a disk around the NTA center.
        double r = radius * std::sqrt(rng.uniform());
        double theta = kTwoPi * rng.uniform();
        loc.x = spec.longitude + r * std::cos(theta);
        loc.y = spec.latitude + r * std::sin(theta);
        loc.meeting_prob = meeting_prob;
        grid.push_back(loc);
    };
    for (std::size_t n = 0; n < ntas.size(); ++n) {
        auto nta = static_cast<std::int16_t>(n);
        const NtaSpec& spec = ntas[n];
        for (long i = 0; i < scaled_count(spec.households, scale); ++i)
            place(LocationKind::household, nta, inter.household_meeting_prob);
        for (long i = 0; i < scaled_count(spec.schools, scale); ++i)
            place(LocationKind::school, nta, 0.0);
        for (long i = 0; i < scaled_count(spec.stations, scale); ++i)
            place(LocationKind::station, nta, inter.station_meeting_prob);
        for (long i = 0; i < scaled_count(spec.supermarkets, scale); ++i)
            place(LocationKind::supermarket, nta, inter.supermarket_meeting_prob);
        for (long i = 0; i < scaled_count(spec.workplaces, scale); ++i)
            place(LocationKind::workplace, nta, 0.0);
    }
    for (std::size_t n = 0; n < ntas.size(); ++n) {
        for (int i = 0; i < mixing_per_nta; ++i) {
            // Meeting probability is derived later from assignment counts.
            place(LocationKind::mixing, static_cast<std::int16_t>(n), 0.0);
        }
    }
    return grid;
}

void assign_households(std::vector<Agent>& agents, const std::vector<Location>& grid,
                       const StructureMix& mix, Rng& rng,
                       std::vector<HouseholdInfo>* households_out) {
    StructureMix m = mix;
    double mix_sum = m.singles + m.couple_with_children + m.couple_without_children +
                     m.single_with_children;
    if (m.singles < 0 || m.couple_with_children < 0 || m.couple_without_children < 0 ||
        m.single_with_children < 0 || std::abs(mix_sum - 1.0) > 1e-6) {
        throw ConfigError("household structure mix must be non-negative and sum to 1");
    }
    m.singles /= mix_sum;
    m.couple_with_children /= mix_sum;
    m.couple_without_children /= mix_sum;
    m.single_with_children /= mix_sum;

    std::vector<int> adults;
    std::vector<int> children;
    for (const auto& a : agents) {
        (a.age >= 18 ? adults : children).push_back(a.id);
    }
    if (!children.empty() && adults.empty()) {
        throw GenerationError("cannot form households: " + std::to_string(children.size()) +
                              " children but no adults");
    }
    rng.shuffle(adults);
    rng.shuffle(children);

    const long n_adults = static_cast<long>(adults.size());
    const double adults_per_household = m.singles + 2.0 * m.couple_with_children +
                                        2.0 * m.couple_without_children + m.single_with_children;
    const long target_h = std::llround(static_cast<double>(n_adults) / adults_per_household);
    long n_cc = std::llround(target_h * m.couple_with_children);
    long n_co = std::llround(target_h * m.couple_without_children);
    long n_sp = std::llround(target_h * m.single_with_children);
    long n_single = n_adults - 2 * (n_cc + n_co) - n_sp;
    while (n_single < 0) {
        // Shrink couple demand until the adult supply covers it.
        if (n_cc > 0) { --n_cc; n_single += 2; }
        else if (n_co > 0) { --n_co; n_single += 2; }
        else { --n_sp; n_single += 1; }
    }
    const long n_households = n_single + n_cc + n_co + n_sp;

    if (!children.empty() && n_cc + n_sp == 0) {
        throw GenerationError("cannot place " + std::to_string(children.size()) +
                              " children: structure mix yields no with-children households");
    }

    std::vector<int> household_locs;
    for (const auto& loc : grid) {
        if (loc.kind == LocationKind::household) household_locs.push_back(loc.id);
    }
    if (n_households > static_cast<long>(household_locs.size())) {
        throw GenerationError("need " + std::to_string(n_households) +
                              " household locations but the grid has only " +
                              std::to_string(household_locs.size()));
    }
    rng.shuffle(household_locs);

    // Pair couples: pop the next male, match a female within ten years of
    // his age, widening to the closest available age if the window is dry.
    std::vector<int> males;
    std::array<std::vector<int>, 101> females_by_age;
    for (int id : adults) {
        if (agents[id].gender == Gender::male) males.push_back(id);
        else females_by_age[agents[id].age].push_back(id);
    }
    const long n_pairs = n_cc + n_co;
    auto take_from_bucket = [&](int age, std::uint64_t index) {
        auto& bucket = females_by_age[age];
        int id = bucket[index];
        bucket[index] = bucket.back();
        bucket.pop_back();
        return id;
    };
    auto pick_female = [&](int male_age) -> int {
        int lo = std::max(0, male_age - 10);
        int hi = std::min(100, male_age + 10);
        long total = 0;
        for (int a = lo; a <= hi; ++a) total += static_cast<long>(females_by_age[a].size());
        if (total > 0) {
            std::uint64_t r = rng.uniform_int(static_cast<std::uint64_t>(total));
            for (int a = lo; a <= hi; ++a) {
                if (r < females_by_age[a].size()) return take_from_bucket(a, r);
                r -= females_by_age[a].size();
            }
        }
        for (int d = 11; d <= 100; ++d) {
            int below = male_age - d;
            int above = male_age + d;
            if (below >= 0 && !females_by_age[below].empty()) {
                return take_from_bucket(below, rng.uniform_int(females_by_age[below].size()));
            }
            if (above <= 100 && !females_by_age[above].empty()) {
                return take_from_bucket(above, rng.uniform_int(females_by_age[above].size()));
            }
        }
        return -1;
    };

    struct Draft {
        HouseholdType type;
        std::vector<int> members;
    };
    std::vector<Draft> drafts;
    drafts.reserve(n_households);
    if (n_pairs > static_cast<long>(males.size())) {
        throw GenerationError("structure mix needs " + std::to_string(n_pairs) +
                              " couples but only " + std::to_string(males.size()) +
                              " adult males are available");
    }
    for (long i = 0; i < n_pairs; ++i) {
        int male = males[i];
        int female = pick_female(agents[male].age);
        if (female < 0) {
            throw GenerationError("structure mix needs " + std::to_string(n_pairs) +
                                  " couples but adult females ran out after " +
                                  std::to_string(i));
        }
        drafts.push_back({i < n_cc ? HouseholdType::couple_with_children
                                   : HouseholdType::couple_without_children,
                          {male, female}});
    }
    std::vector<int> leftover(males.begin() + n_pairs, males.end());
    for (const auto& bucket : females_by_age) {
        leftover.insert(leftover.end(), bucket.begin(), bucket.end());
    }
    rng.shuffle(leftover);
    for (long i = 0; i < static_cast<long>(leftover.size()); ++i) {
        drafts.push_back({i < n_sp ? HouseholdType::single_with_children : HouseholdType::single,
                          {leftover[i]}});
    }

    // Children: every with-children household gets one first, any surplus
    // is spread uniformly. With the bundled age pyramid the child supply
    // runs a few percent short of the with-children household count.
    std::vector<long> with_children_idx;
    for (long i = 0; i < static_cast<long>(drafts.size()); ++i) {
        if (drafts[i].type == HouseholdType::couple_with_children ||
            drafts[i].type == HouseholdType::single_with_children) {
            with_children_idx.push_back(i);
        }
    }
    rng.shuffle(with_children_idx);
    for (std::size_t c = 0; c < children.size(); ++c) {
        long target;
        if (c < with_children_idx.size()) {
            target = with_children_idx[c];
        } else {
            target = with_children_idx[rng.uniform_int(with_children_idx.size())];
        }
        drafts[target].members.push_back(children[c]);
    }

    if (households_out) households_out->clear();
    for (std::size_t h = 0; h < drafts.size(); ++h) {
        for (int id : drafts[h].members) {
            agents[id].household = household_locs[h];
        }
        if (households_out) {
            households_out->push_back(
                {household_locs[h], drafts[h].type, std::move(drafts[h].members)});
        }
    }
}

void assign_schools(std::vector<Agent>& agents, std::vector<Location>& grid,
                    const InteractionTable& inter, Rng& rng) {
    auto schools = locations_of_kind(grid, LocationKind::school);
    if (schools.empty()) throw GenerationError("grid has no schools");
    // cohorts keyed by (school, age band) so class sizes track the mean
    // rather than fragmenting into one class per single year of age
    std::map<std::pair<std::int32_t, std::int16_t>, std::vector<int>> cohorts;
    for (const auto& a : agents) {
        if (a.age < inter.school_age_min || a.age > inter.school_age_max) continue;
        const Location& home = grid[a.household];
        const Location* school = nearest(schools, home.x, home.y);
        cohorts[{school->id, a.age_band}].push_back(a.id);
    }
    for (auto& [key, kids] : cohorts) {
        rng.shuffle(kids);
        long n_classes = static_cast<long>(std::max(
            1LL, std::llround(static_cast<double>(kids.size()) / inter.class_size_mean)));
        std::vector<std::int32_t> class_ids;
        for (long c = 0; c < n_classes; ++c) {
            const Location& school = grid[key.first];
            Location cls;
            cls.id = static_cast<std::int32_t>(grid.size());
            cls.kind = LocationKind::school_class;
            cls.nta = school.nta;
            cls.parent = school.id;
            cls.x = school.x;
            cls.y = school.y;
            cls.meeting_prob = inter.class_meeting_prob;
            grid.push_back(cls);
            class_ids.push_back(cls.id);
        }
        for (std::size_t i = 0; i < kids.size(); ++i) {
            agents[kids[i]].school_class = class_ids[i % class_ids.size()];
        }
    }
}

void assign_work(std::vector<Agent>& agents, std::vector<Location>& grid,
                 const InteractionTable& inter, Rng& rng,
                 std::vector<bool>* small_workplace_out) {
    std::vector<std::int32_t> workplaces;
    for (const auto& loc : grid) {
        if (loc.kind == LocationKind::workplace) workplaces.push_back(loc.id);
    }
    if (workplaces.empty()) throw GenerationError("grid has no workplaces");
    std::vector<bool> is_small(grid.size(), false);
    for (std::int32_t wp : workplaces) {
        is_small[wp] = rng.bernoulli(inter.small_workplace_share);
    }
    if (small_workplace_out) *small_workplace_out = is_small;
    std::vector<int> workers;
    for (auto& a : agents) {
        if (a.age >= inter.work_age_min && a.age <= inter.work_age_max &&
            rng.bernoulli(inter.employment_rate)) {
            a.employed = true;
            workers.push_back(a.id);
        }
    }
    rng.shuffle(workers);
    rng.shuffle(workplaces);

    // Deal shuffled workers into workgroups. Every workplace hosts at
    // least one group (supply permitting), extra groups land uniformly;
    // group size follows the workplace's small/large mean.
    std::size_t next_worker = 0;
    std::size_t round_robin = 0;
    while (next_worker < workers.size()) {
        std::int32_t wp;
        if (round_robin < workplaces.size()) {
            wp = workplaces[round_robin++];
        } else {
            wp = workplaces[rng.uniform_int(workplaces.size())];
        }
        double mean = is_small[wp] ? inter.small_workgroup_mean_size
                                   : inter.large_workgroup_mean_size;
        long size = 1 + rng.poisson(mean - 1.0);
        const Location& parent = grid[wp];
        Location group;
        group.id = static_cast<std::int32_t>(grid.size());
        group.kind = LocationKind::workgroup;
        group.nta = parent.nta;
        group.parent = parent.id;
        group.x = parent.x;
        group.y = parent.y;
        group.meeting_prob = inter.workgroup_meeting_prob;
        grid.push_back(group);
        for (long i = 0; i < size && next_worker < workers.size(); ++i) {
            agents[workers[next_worker++]].workgroup = group.id;
        }
    }
}

void assign_supermarkets_stations(std::vector<Agent>& agents, const std::vector<Location>& grid,
                                  const InteractionTable& inter) {
    (void)inter;
    auto supermarkets = locations_of_kind(grid, LocationKind::supermarket);
    auto stations = locations_of_kind(grid, LocationKind::station);
    for (auto& a : agents) {
        if (a.age < 18) continue;
        const Location& home = grid[a.household];
        if (a.workgroup >= 0) {
            const Location& work = grid[grid[a.workgroup].parent];
            // Closest by combined commute: distance to home plus to work.
            const Location* best = nullptr;
            double best_d = 0.0;
            for (const Location* s : supermarkets) {
                double d = std::sqrt(dist2(s->x, s->y, home.x, home.y)) +
                           std::sqrt(dist2(s->x, s->y, work.x, work.y));
                if (!best || d < best_d) {
                    best = s;
                    best_d = d;
                }
            }
            if (best) a.supermarket = best->id;
            if (const Location* st = nearest(stations, home.x, home.y)) a.home_station = st->id;
            if (const Location* st = nearest(stations, work.x, work.y)) a.work_station = st->id;
        } else {
            if (const Location* s = nearest(supermarkets, home.x, home.y)) a.supermarket = s->id;
        }
    }
}

Population generate_population(const PopulationConfig& config, std::uint64_t seed) {
    if (config.target_size < 1) throw ConfigError("population target_size must be >= 1");
    Population pop;
    pop.config = config;
    pop.seed = seed;
    pop.age_gender = config.age_gender_csv.empty() ? builtin_age_gender()
                                                   : load_age_gender(config.age_gender_csv);
    normalize_age_gender(pop.age_gender);
    pop.ntas = config.ntas_csv.empty() ? builtin_ntas() : load_ntas(config.ntas_csv);
    pop.interactions = config.interactions_csv.empty()
                           ? builtin_interactions()
                           : load_interactions(config.interactions_csv);
    pop.scale = config.scale > 0.0
                    ? config.scale
                    : static_cast<double>(config.target_size) / kReferenceCityPopulation;

    SeedTree tree = SeedTree(seed).subtree("population");

    Rng age_rng = tree.stream("ages");
    pop.agents.resize(config.target_size);
    for (long i = 0; i < config.target_size; ++i) {
        AgeGenderDraw draw = sample_age_gender(pop.age_gender, age_rng);
        Agent& a = pop.agents[i];
        a.id = static_cast<std::int32_t>(i);
        a.age = static_cast<std::int16_t>(draw.age);
        a.age_band = static_cast<std::int16_t>(draw.band);
        a.gender = draw.gender;
    }

    Rng grid_rng = tree.stream("grid");
    pop.locations = build_location_grid(pop.ntas, pop.interactions, pop.scale,
                                        config.mixing_locations_per_nta, config.nta_radius,
                                        grid_rng);

    const InteractionTable& inter = pop.interactions;
    StructureMix mix{inter.share_singles, inter.share_couple_with_children,
                     inter.share_couple_without_children, inter.share_single_with_children};
    Rng household_rng = tree.stream("households");
    assign_households(pop.agents, pop.locations, mix, household_rng);

    Rng school_rng = tree.stream("schools");
    assign_schools(pop.agents, pop.locations, inter, school_rng);

    Rng work_rng = tree.stream("work");
    assign_work(pop.agents, pop.locations, inter, work_rng);

    assign_supermarkets_stations(pop.agents, pop.locations, inter);

    // Mixing venues: everyone may drop in at their home NTA's venue; the
    // pairwise meeting odds are sized so one visit yields the configured
    // number of random contacts given the expected crowd.
    std::vector<std::vector<std::int32_t>> mixing_by_nta(pop.ntas.size());
    for (const auto& loc : pop.locations) {
        if (loc.kind == LocationKind::mixing) mixing_by_nta[loc.nta].push_back(loc.id);
    }
    std::vector<long> assigned_count(pop.locations.size(), 0);
    for (auto& a : pop.agents) {
        const auto& venues = mixing_by_nta[pop.locations[a.household].nta];
        if (venues.empty()) continue;
        a.mixing = venues[a.id % venues.size()];
        ++assigned_count[a.mixing];
    }
    for (auto& loc : pop.locations) {
        if (loc.kind != LocationKind::mixing || assigned_count[loc.id] == 0) continue;
        double expected_visitors = inter.mixing_visit_prob * assigned_count[loc.id];
        loc.meeting_prob = std::min(
            1.0, inter.mixing_contacts_per_visit / std::max(1.0, expected_visitors - 1.0));
    }

    for (const auto& a : pop.agents) {
        auto add = [&](std::int32_t loc, double p) {
            if (loc >= 0 && p > 0.0) pop.propensities.push_back({a.id, loc, p});
        };
        add(a.household, inter.household_visit_prob);
        add(a.school_class, inter.class_visit_prob);
        add(a.workgroup, inter.workgroup_visit_prob);
        add(a.supermarket, inter.supermarket_visit_prob);
        add(a.home_station, inter.station_visit_prob);
        if (a.work_station != a.home_station) add(a.work_station, inter.station_visit_prob);
        add(a.mixing, inter.mixing_visit_prob);
    }
    std::sort(pop.propensities.begin(), pop.propensities.end(),
              [](const Propensity& lhs, const Propensity& rhs) {
                  return std::tie(lhs.agent, lhs.location) < std::tie(rhs.agent, rhs.location);
              });
    pop.build_index();
    return pop;
}

void Population::build_index() {
    for (std::size_t i = 0; i < locations.size(); ++i) {
        if (locations[i].id != static_cast<std::int32_t>(i)) {
            throw ContractError("location ids must be dense and ordered");
        }
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].id != static_cast<std::int32_t>(i)) {
            throw ContractError("agent ids must be dense and ordered");
        }
    }
    propensity_offsets.assign(agents.size() + 1, 0);
    for (const auto& p : propensities) ++propensity_offsets[p.agent + 1];
    for (std::size_t i = 1; i < propensity_offsets.size(); ++i) {
        propensity_offsets[i] += propensity_offsets[i - 1];
    }
}

namespace {

ordered_json interactions_to_json(const InteractionTable& t) {
    ordered_json j;
    j["household_visit_probability"] = t.household_visit_prob;
    j["household_meeting_probability"] = t.household_meeting_prob;
    j["household_share_singles"] = t.share_singles;
    j["household_share_couple_with_children"] = t.share_couple_with_children;
    j["household_share_couple_without_children"] = t.share_couple_without_children;
    j["household_share_single_with_children"] = t.share_single_with_children;
    j["school_age_min"] = t.school_age_min;
    j["school_age_max"] = t.school_age_max;
    j["class_size_mean"] = t.class_size_mean;
    j["class_visit_probability"] = t.class_visit_prob;
    j["class_meeting_probability"] = t.class_meeting_prob;
    j["work_age_min"] = t.work_age_min;
    j["work_age_max"] = t.work_age_max;
    j["employment_rate"] = t.employment_rate;
    j["small_workplace_share"] = t.small_workplace_share;
    j["small_workgroup_mean_size"] = t.small_workgroup_mean_size;
    j["large_workgroup_mean_size"] = t.large_workgroup_mean_size;
    j["workgroup_visit_probability"] = t.workgroup_visit_prob;
    j["workgroup_meeting_probability"] = t.workgroup_meeting_prob;
    j["supermarket_visit_probability"] = t.supermarket_visit_prob;
    j["supermarket_meeting_probability"] = t.supermarket_meeting_prob;
    j["supermarket_contacts_per_visit"] = t.supermarket_contacts_per_visit;
    j["station_visit_probability"] = t.station_visit_prob;
    j["station_meeting_probability"] = t.station_meeting_prob;
    j["station_contacts_per_visit"] = t.station_contacts_per_visit;
    j["mixing_visit_probability"] = t.mixing_visit_prob;
    j["mixing_contacts_per_visit"] = t.mixing_contacts_per_visit;
    j["quarantine_days"] = t.quarantine_days;
    return j;
}

InteractionTable interactions_from_json(const ordered_json& j) {
    InteractionTable t;
    t.household_visit_prob = j.at("household_visit_probability");
    t.household_meeting_prob = j.at("household_meeting_probability");
    t.share_singles = j.at("household_share_singles");
    t.share_couple_with_children = j.at("household_share_couple_with_children");
    t.share_couple_without_children = j.at("household_share_couple_without_children");
    t.share_single_with_children = j.at("household_share_single_with_children");
    t.school_age_min = j.at("school_age_min");
    t.school_age_max = j.at("school_age_max");
    t.class_size_mean = j.at("class_size_mean");
    t.class_visit_prob = j.at("class_visit_probability");
    t.class_meeting_prob = j.at("class_meeting_probability");
    t.work_age_min = j.at("work_age_min");
    t.work_age_max = j.at("work_age_max");
    t.employment_rate = j.at("employment_rate");
    t.small_workplace_share = j.at("small_workplace_share");
    t.small_workgroup_mean_size = j.at("small_workgroup_mean_size");
    t.large_workgroup_mean_size = j.at("large_workgroup_mean_size");
    t.workgroup_visit_prob = j.at("workgroup_visit_probability");
    t.workgroup_meeting_prob = j.at("workgroup_meeting_probability");
    t.supermarket_visit_prob = j.at("supermarket_visit_probability");
    t.supermarket_meeting_prob = j.at("supermarket_meeting_probability");
    t.supermarket_contacts_per_visit = j.at("supermarket_contacts_per_visit");
    t.station_visit_prob = j.at("station_visit_probability");
    t.station_meeting_prob = j.at("station_meeting_probability");
    t.station_contacts_per_visit = j.at("station_contacts_per_visit");
    t.mixing_visit_prob = j.at("mixing_visit_probability");
    t.mixing_contacts_per_visit = j.at("mixing_contacts_per_visit");
    t.quarantine_days = j.at("quarantine_days");
    return t;
}

}  // namespace

void save_population(const Population& pop, const std::string& path) {
    ordered_json j;
    j["format"] = "episample-population";
    j["version"] = 1;
    j["seed"] = pop.seed;
    j["scale"] = pop.scale;
    j["config"] = {
        {"target_size", pop.config.target_size},
        {"scale", pop.config.scale},
        {"mixing_locations_per_nta", pop.config.mixing_locations_per_nta},
        {"nta_radius", pop.config.nta_radius},
    };
    ordered_json bands = ordered_json::array();
    for (const auto& b : pop.age_gender.bands) {
        bands.push_back({b.label, b.age_lo, b.age_hi, b.share});
    }
    j["age_gender"] = {{"bands", std::move(bands)},
                       {"male_share", pop.age_gender.male_share},
                       {"female_share", pop.age_gender.female_share}};
    ordered_json ntas = ordered_json::array();
    for (const auto& n : pop.ntas) {
        ntas.push_back({n.name, n.longitude, n.latitude, n.households, n.schools, n.stations,
                        n.supermarkets, n.workplaces});
    }
    j["ntas"] = std::move(ntas);
    j["interactions"] = interactions_to_json(pop.interactions);

    ordered_json agents = ordered_json::array();
    for (const auto& a : pop.agents) {
        agents.push_back({a.id, a.age, a.age_band, static_cast<int>(a.gender),
                          a.employed ? 1 : 0, a.household, a.school_class, a.workgroup,
                          a.supermarket, a.home_station, a.work_station, a.mixing});
    }
    j["agents"] = {{"columns",
                    {"id", "age", "age_band", "gender", "employed", "household", "school_class",
                     "workgroup", "supermarket", "home_station", "work_station", "mixing"}},
                   {"rows", std::move(agents)}};

    ordered_json locations = ordered_json::array();
    for (const auto& l : pop.locations) {
        locations.push_back(
            {l.id, location_kind_name(l.kind), l.nta, l.parent, l.x, l.y, l.meeting_prob});
    }
    j["locations"] = {{"columns", {"id", "kind", "nta", "parent", "x", "y", "meeting_prob"}},
                      {"rows", std::move(locations)}};

    ordered_json props = ordered_json::array();
    for (const auto& p : pop.propensities) {
        props.push_back({p.agent, p.location, p.visit_prob});
    }
    j["propensities"] = {{"columns", {"agent", "location", "visit_prob"}},
                         {"rows", std::move(props)}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump() << '\n';
    if (!out) throw IoError("write failed for " + path);
}

Population load_population(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    if (j.value("format", "") != "episample-population" || j.value("version", 0) != 1) {
        throw IoError(path + ": not a version-1 population file");
    }
    Population pop;
    pop.seed = j.at("seed");
    pop.scale = j.at("scale");
    const auto& cfg = j.at("config");
    pop.config.target_size = cfg.at("target_size");
    pop.config.scale = cfg.at("scale");
    pop.config.mixing_locations_per_nta = cfg.at("mixing_locations_per_nta");
    pop.config.nta_radius = cfg.at("nta_radius");
    const auto& ag = j.at("age_gender");
    for (const auto& row : ag.at("bands")) {
        AgeBand band;
        band.label = row.at(0).get<std::string>();
        band.age_lo = row.at(1).get<int>();
        band.age_hi = row.at(2).get<int>();
        band.share = row.at(3).get<double>();
        pop.age_gender.bands.push_back(std::move(band));
    }
    pop.age_gender.male_share = ag.at("male_share");
    pop.age_gender.female_share = ag.at("female_share");
    for (const auto& row : j.at("ntas")) {
        NtaSpec n;
        n.name = row.at(0).get<std::string>();
        n.longitude = row.at(1).get<double>();
        n.latitude = row.at(2).get<double>();
        n.households = row.at(3).get<long>();
        n.schools = row.at(4).get<long>();
        n.stations = row.at(5).get<long>();
        n.supermarkets = row.at(6).get<long>();
        n.workplaces = row.at(7).get<long>();
        pop.ntas.push_back(std::move(n));
    }
    pop.interactions = interactions_from_json(j.at("interactions"));
    for (const auto& row : j.at("agents").at("rows")) {
        Agent a;
        a.id = row.at(0);
        a.age = row.at(1);
        a.age_band = row.at(2);
        a.gender = static_cast<Gender>(static_cast<int>(row.at(3)));
        a.employed = static_cast<int>(row.at(4)) != 0;
        a.household = row.at(5);
        a.school_class = row.at(6);
        a.workgroup = row.at(7);
        a.supermarket = row.at(8);
        a.home_station = row.at(9);
        a.work_station = row.at(10);
        a.mixing = row.at(11);
        pop.agents.push_back(a);
    }
    for (const auto& row : j.at("locations").at("rows")) {
        Location l;
        l.id = row.at(0);
        l.kind = location_kind_from_name(row.at(1));
        l.nta = row.at(2);
        l.parent = row.at(3);
        l.x = row.at(4);
        l.y = row.at(5);
        l.meeting_prob = row.at(6);
        pop.locations.push_back(l);
    }
    for (const auto& row : j.at("propensities").at("rows")) {
        Propensity p;
        p.agent = row.at(0).get<std::int32_t>();
        p.location = row.at(1).get<std::int32_t>();
        p.visit_prob = row.at(2).get<double>();
        pop.propensities.push_back(p);
    }
    pop.build_index();
    return pop;
}

}  // namespace episample
