#pragma once

#include "scenelab/scene.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace scenelab {

enum class Predicate {
    count_eq,
    count_in_range,
    dominant_color,
    dominant_shape,
    occupancy_band,
    cluster_is,
    density_band,
};

constexpr int n_predicates = 7;

const char* name_of(Predicate p);
Predicate predicate_from(const std::string& s);

// One checkable claim about a scene. Only the fields belonging to the active
// predicate are meaningful; construct through the factories below so the
// inactive fields stay zeroed and default equality works.
struct EvidenceAtom {
    Predicate pred = Predicate::count_eq;
    ObjectClass cls = ObjectClass::vehicle; // count_eq, count_in_range
    int value = 0;                          // count_eq: n; count_in_range: lo
    int value2 = 0;                         // count_in_range: hi
    Color color = Color::red;               // dominant_color
    ShapeTag shape = ShapeTag::rectangular; // dominant_shape
    OccupancyBand occ = OccupancyBand::sparse;
    Clustering cluster = Clustering::grid;
    DensityBand dens = DensityBand::low;

    bool operator==(const EvidenceAtom&) const = default;
};

EvidenceAtom atom_count_eq(ObjectClass cls, int n);
EvidenceAtom atom_count_in_range(ObjectClass cls, int lo, int hi);
EvidenceAtom atom_dominant_color(Color c);
EvidenceAtom atom_dominant_shape(ShapeTag s);
EvidenceAtom atom_occupancy_band(OccupancyBand b);
EvidenceAtom atom_cluster_is(Clustering c);
EvidenceAtom atom_density_band(DensityBand b);

// throws MalformedAtom on arity/domain violations (negative counts, inverted
// ranges, out-of-enumeration values)
void validate_atom(const EvidenceAtom& atom, int count_max);

// exact truth of one validated atom against scene ground truth
bool atom_true(const EvidenceAtom& atom, const Scene& scene);

// compact textual form, e.g. COUNT_EQ(vehicle,3); also the JSONL wire name
std::string atom_to_string(const EvidenceAtom& atom);

// Answer texts an atom can stand for when read as the conclusion of a trace
// for a given question category. Empty when the atom cannot conclude that
// category. (An occupancy atom answers both the utilization and the spare
// capacity templates, hence a list.)
std::vector<std::string> atom_answer_texts(Category category, const EvidenceAtom& atom);

// display strings used as MCQ option contents
std::string occupancy_phrase(OccupancyBand b);
std::string spare_capacity_phrase(OccupancyBand b);
std::string zoning_phrase(Clustering c);
const char* scene_label_of(DensityBand b); // "rural" for low density, else "urban"

// ----------------------------- vocabulary -----------------------------

// Count-range buckets used by COUNT_IN_RANGE atoms, clipped to count_max.
std::vector<std::pair<int, int>> count_range_buckets(int count_max);

// The atom vocabulary the policy samples from: every well-formed predicate
// instantiation over the closed enumerations with counts bounded by
// count_max. Shared across all scenes of a build configuration so policy
// parameter shapes are fixed.
class AtomVocab {
public:
    AtomVocab() = default;
    explicit AtomVocab(std::vector<EvidenceAtom> atoms);

    static AtomVocab build(int count_max);

    int size() const { return static_cast<int>(atoms_.size()); }
    const EvidenceAtom& at(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
    const std::vector<EvidenceAtom>& atoms() const { return atoms_; }
    // -1 when absent
    int index_of(const EvidenceAtom& atom) const;

private:
    std::vector<EvidenceAtom> atoms_;
    std::unordered_map<std::uint64_t, int> index_;
};

// stable packing of an atom's active fields, used for hashing / indexing
std::uint64_t atom_key(const EvidenceAtom& atom);

} // namespace scenelab
