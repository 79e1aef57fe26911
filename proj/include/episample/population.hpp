#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "episample/rng.hpp"
#include "episample/tables.hpp"

namespace episample {

enum class Gender : std::uint8_t { male = 0, female = 1 };

// household..mixing are contact kinds with a meeting probability.
// school and workplace are structural parents (meeting probability 0):
// the actual contact units are the classes and workgroups inside them.
enum class LocationKind : std::uint8_t {
    household = 0,
    school = 1,
    school_class = 2,
    workplace = 3,
    workgroup = 4,
    supermarket = 5,
    station = 6,
    mixing = 7,
};

const char* location_kind_name(LocationKind kind);
LocationKind location_kind_from_name(const std::string& name);

struct Agent {
    std::int32_t id = -1;
    std::int16_t age = 0;       // integer years, drawn uniformly inside the band
    std::int16_t age_band = -1; // index into AgeGenderTable.bands
    Gender gender = Gender::male;
    bool employed = false;
    std::int32_t household = -1;
    std::int32_t school_class = -1;
    std::int32_t workgroup = -1;
    std::int32_t supermarket = -1;
    std::int32_t home_station = -1;
    std::int32_t work_station = -1;
    std::int32_t mixing = -1;
};

struct Location {
    std::int32_t id = -1;
    LocationKind kind = LocationKind::household;
    std::int16_t nta = -1;
    std::int32_t parent = -1;   // school for a class, workplace for a workgroup
    double x = 0.0;
    double y = 0.0;
    double meeting_prob = 0.0;
};

struct Propensity {
    std::int32_t agent;
    std::int32_t location;
    double visit_prob;
};

struct StructureMix {
    double singles;
    double couple_with_children;
    double couple_without_children;
    double single_with_children;
};

enum class HouseholdType : std::uint8_t {
    single,
    couple_with_children,
    couple_without_children,
    single_with_children,
};

struct HouseholdInfo {
    std::int32_t location;
    HouseholdType type;
    std::vector<int> members;
};

struct PopulationConfig {
    long target_size = 20000;
    // Scale applied to the full-city location counts; negative means
    // derive from target_size against the reference city population.
    double scale = -1.0;
    int mixing_locations_per_nta = 1;
    double nta_radius = 0.01;  // scatter radius for locations, in degrees
    std::string age_gender_csv;  // empty: compiled-in table
    std::string ntas_csv;
    std::string interactions_csv;
};

// The full-city tables describe roughly this many inhabitants; used to
// derive the grid scale from a requested population size.
constexpr double kReferenceCityPopulation = 1300000.0;

struct Population {
    PopulationConfig config;
    std::uint64_t seed = 0;
    double scale = 0.0;
    AgeGenderTable age_gender;  // normalized
    std::vector<NtaSpec> ntas;
    InteractionTable interactions;
    std::vector<Agent> agents;
    std::vector<Location> locations;
    std::vector<Propensity> propensities;  // sorted by (agent, location)

    // CSR over propensities, by agent id: rows [offsets[a], offsets[a+1]).
    std::vector<std::int64_t> propensity_offsets;

    void build_index();
};

struct AgeGenderDraw {
    int band;
    int age;
    Gender gender;
};

AgeGenderDraw sample_age_gender(const AgeGenderTable& table, Rng& rng);

std::vector<Location> build_location_grid(const std::vector<NtaSpec>& ntas,
                                          const InteractionTable& inter, double scale,
                                          int mixing_per_nta, double radius, Rng& rng);

// households_out, when given, receives one entry per formed household
// with its target structure type and member list.
void assign_households(std::vector<Agent>& agents, const std::vector<Location>& grid,
                       const StructureMix& mix, Rng& rng,
                       std::vector<HouseholdInfo>* households_out = nullptr);

void assign_schools(std::vector<Agent>& agents, std::vector<Location>& grid,
                    const InteractionTable& inter, Rng& rng);

// small_workplace_out, when given, receives the per-location small/large
// draw (indexed by location id over the grid as it was on entry).
void assign_work(std::vector<Agent>& agents, std::vector<Location>& grid,
                 const InteractionTable& inter, Rng& rng,
                 std::vector<bool>* small_workplace_out = nullptr);

void assign_supermarkets_stations(std::vector<Agent>& agents, const std::vector<Location>& grid,
                                  const InteractionTable& inter);

Population generate_population(const PopulationConfig& config, std::uint64_t seed);

void save_population(const Population& pop, const std::string& path);
Population load_population(const std::string& path);

}  // namespace episample
