#include "scenelab/atoms.hpp"
#include "scenelab/errors.hpp"

namespace scenelab {

namespace {

const char* kPredicateNames[n_predicates] = {
    "COUNT_EQ", "COUNT_IN_RANGE", "DOMINANT_COLOR", "DOMINANT_SHAPE",
    "OCCUPANCY_BAND", "CLUSTER_IS", "DENSITY_BAND",
};

} // namespace

const char* name_of(Predicate p) { return kPredicateNames[static_cast<int>(p)]; }

Predicate predicate_from(const std::string& s) {
    for (int i = 0; i < n_predicates; ++i) {
        if (s == kPredicateNames[i]) return static_cast<Predicate>(i);
    }
    throw MalformedAtom("unknown predicate '" + s + "'");
}

EvidenceAtom atom_count_eq(ObjectClass cls, int n) {
    EvidenceAtom a;
    a.pred = Predicate::count_eq;
    a.cls = cls;
    a.value = n;
    return a;
}

EvidenceAtom atom_count_in_range(ObjectClass cls, int lo, int hi) {
    EvidenceAtom a;
    a.pred = Predicate::count_in_range;
    a.cls = cls;
    a.value = lo;
    a.value2 = hi;
    return a;
}

EvidenceAtom atom_dominant_color(Color c) {
    EvidenceAtom a;
    a.pred = Predicate::dominant_color;
    a.color = c;
    return a;
}

EvidenceAtom atom_dominant_shape(ShapeTag s) {
    EvidenceAtom a;
    a.pred = Predicate::dominant_shape;
    a.shape = s;
    return a;
}

EvidenceAtom atom_occupancy_band(OccupancyBand b) {
    EvidenceAtom a;
    a.pred = Predicate::occupancy_band;
    a.occ = b;
    return a;
}

EvidenceAtom atom_cluster_is(Clustering c) {
    EvidenceAtom a;
    a.pred = Predicate::cluster_is;
    a.cluster = c;
    return a;
}

EvidenceAtom atom_density_band(DensityBand b) {
    EvidenceAtom a;
    a.pred = Predicate::density_band;
    a.dens = b;
    return a;
}

namespace {

template <class E>
void check_enum(E value, int n, const char* what) {
    const int v = static_cast<int>(value);
    if (v < 0 || v >= n) throw MalformedAtom(std::string(what) + " out of range");
}

} // namespace

void validate_atom(const EvidenceAtom& atom, int count_max) {
    check_enum(atom.pred, n_predicates, "predicate");
    switch (atom.pred) {
        case Predicate::count_eq:
            check_enum(atom.cls, n_object_classes, "object class");
            if (atom.value < 0 || atom.value > count_max) throw MalformedAtom("count out of [0, count_max]");
            break;
        case Predicate::count_in_range:
            check_enum(atom.cls, n_object_classes, "object class");
            if (atom.value < 0 || atom.value2 < atom.value || atom.value2 > count_max)
                throw MalformedAtom("count range not within [0, count_max] or inverted");
            break;
        case Predicate::dominant_color:
            check_enum(atom.color, n_colors, "color");
            break;
        case Predicate::dominant_shape:
            check_enum(atom.shape, n_shape_tags, "shape tag");
            break;
        case Predicate::occupancy_band:
            check_enum(atom.occ, n_occupancy_bands, "occupancy band");
            break;
        case Predicate::cluster_is:
            check_enum(atom.cluster, n_clusterings, "clustering");
            break;
        case Predicate::density_band:
            check_enum(atom.dens, n_density_bands, "density band");
            break;
    }
}

bool atom_true(const EvidenceAtom& atom, const Scene& scene) {
    switch (atom.pred) {
        case Predicate::count_eq:
            return class_counts(scene)[static_cast<int>(atom.cls)] == atom.value;
        case Predicate::count_in_range: {
            const int c = class_counts(scene)[static_cast<int>(atom.cls)];
            return atom.value <= c && c <= atom.value2;
        }
        case Predicate::dominant_color: {
            const auto d = dominant_color(scene);
            return d.has_value() && *d == atom.color;
        }
        case Predicate::dominant_shape: {
            const auto d = dominant_shape(scene);
            return d.has_value() && *d == atom.shape;
        }
        case Predicate::occupancy_band: {
            const double r = static_cast<double>(scene.objects.size()) / static_cast<double>(scene.capacity);
            return occupancy_band_of(r) == atom.occ;
        }
        case Predicate::cluster_is: {
            std::vector<Vec2> centers;
            centers.reserve(scene.objects.size());
            for (const SceneObject& o : scene.objects) centers.push_back(o.center);
            return classify_clustering(centers) == atom.cluster;
        }
        case Predicate::density_band:
            return density_band_of(static_cast<double>(scene.objects.size()) / scene.area) == atom.dens;
    }
    return false;
}

std::string atom_to_string(const EvidenceAtom& atom) {
    switch (atom.pred) {
        case Predicate::count_eq:
            return std::string("COUNT_EQ(") + name_of(atom.cls) + "," + std::to_string(atom.value) + ")";
        case Predicate::count_in_range:
            return std::string("COUNT_IN_RANGE(") + name_of(atom.cls) + "," + std::to_string(atom.value) + "," +
                   std::to_string(atom.value2) + ")";
        case Predicate::dominant_color:
            return std::string("DOMINANT_COLOR(") + name_of(atom.color) + ")";
        case Predicate::dominant_shape:
            return std::string("DOMINANT_SHAPE(") + name_of(atom.shape) + ")";
        case Predicate::occupancy_band:
            return std::string("OCCUPANCY_BAND(") + name_of(atom.occ) + ")";
        case Predicate::cluster_is:
            return std::string("CLUSTER_IS(") + name_of(atom.cluster) + ")";
        case Predicate::density_band:
            return std::string("DENSITY_BAND(") + name_of(atom.dens) + ")";
    }
    return "?";
}

std::string occupancy_phrase(OccupancyBand b) {
    switch (b) {
        case OccupancyBand::sparse: return "sparsely used";
        case OccupancyBand::moderate: return "moderately used";
        case OccupancyBand::heavy: return "heavily used";
        case OccupancyBand::near_saturation: return "near saturation";
    }
    return "?";
}

std::string spare_capacity_phrase(OccupancyBand b) {
    switch (b) {
        case OccupancyBand::sparse: return "ample spare capacity";
        case OccupancyBand::moderate: return "substantial spare capacity";
        case OccupancyBand::heavy: return "limited spare capacity";
        case OccupancyBand::near_saturation: return "nearly no spare capacity";
    }
    return "?";
}

std::string zoning_phrase(Clustering c) {
    switch (c) {
        case Clustering::grid: return "grid-like residential blocks";
        case Clustering::linear: return "linear logistics corridor";
        case Clustering::scattered: return "scattered low-density development";
    }
    return "?";
}

const char* scene_label_of(DensityBand b) { return b == DensityBand::low ? "rural" : "urban"; }

std::vector<std::string> atom_answer_texts(Category category, const EvidenceAtom& atom) {
    switch (category) {
        case Category::count:
            if (atom.pred == Predicate::count_eq) return {std::to_string(atom.value)};
            return {};
        case Category::color:
            if (atom.pred == Predicate::dominant_color) return {name_of(atom.color)};
            return {};
        case Category::shape:
            if (atom.pred == Predicate::dominant_shape) return {name_of(atom.shape)};
            return {};
        case Category::scene:
            if (atom.pred == Predicate::density_band) return {scene_label_of(atom.dens)};
            return {};
        case Category::reason:
            if (atom.pred == Predicate::occupancy_band)
                return {occupancy_phrase(atom.occ), spare_capacity_phrase(atom.occ)};
            if (atom.pred == Predicate::cluster_is) return {zoning_phrase(atom.cluster)};
            return {};
    }
    return {};
}

std::vector<std::pair<int, int>> count_range_buckets(int count_max) {
    const std::pair<int, int> canonical[] = {{0, 2}, {3, 5}, {6, 9}, {10, 14}, {15, 24}};
    std::vector<std::pair<int, int>> buckets;
    for (auto [lo, hi] : canonical) {
        if (lo > count_max) break;
        buckets.emplace_back(lo, std::min(hi, count_max));
    }
    if (!buckets.empty()) buckets.back().second = count_max;
    return buckets;
}

std::uint64_t atom_key(const EvidenceAtom& atom) {
    // fields fit comfortably: pred(4b) cls(4b) value(10b) value2(10b) color(4b)
    // shape(4b) occ(4b) cluster(4b) dens(4b)
    std::uint64_t k = 0;
    k = (k << 4) | static_cast<std::uint64_t>(atom.pred);
    k = (k << 4) | static_cast<std::uint64_t>(atom.cls);
    k = (k << 10) | static_cast<std::uint64_t>(atom.value & 0x3ff);
    k = (k << 10) | static_cast<std::uint64_t>(atom.value2 & 0x3ff);
    k = (k << 4) | static_cast<std::uint64_t>(atom.color);
    k = (k << 4) | static_cast<std::uint64_t>(atom.shape);
    k = (k << 4) | static_cast<std::uint64_t>(atom.occ);
    k = (k << 4) | static_cast<std::uint64_t>(atom.cluster);
    k = (k << 4) | static_cast<std::uint64_t>(atom.dens);
    return k;
}

AtomVocab::AtomVocab(std::vector<EvidenceAtom> atoms) : atoms_(std::move(atoms)) {
    index_.reserve(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) index_[atom_key(atoms_[i])] = static_cast<int>(i);
}

AtomVocab AtomVocab::build(int count_max) {
    std::vector<EvidenceAtom> atoms;
    for (int c = 0; c < n_object_classes; ++c) {
        for (int n = 0; n <= count_max; ++n) atoms.push_back(atom_count_eq(static_cast<ObjectClass>(c), n));
    }
    for (int c = 0; c < n_object_classes; ++c) {
        for (auto [lo, hi] : count_range_buckets(count_max))
            atoms.push_back(atom_count_in_range(static_cast<ObjectClass>(c), lo, hi));
    }
    for (int c = 0; c < n_colors; ++c) atoms.push_back(atom_dominant_color(static_cast<Color>(c)));
    for (int s = 0; s < n_shape_tags; ++s) atoms.push_back(atom_dominant_shape(static_cast<ShapeTag>(s)));
    for (int b = 0; b < n_occupancy_bands; ++b) atoms.push_back(atom_occupancy_band(static_cast<OccupancyBand>(b)));
    for (int c = 0; c < n_clusterings; ++c) atoms.push_back(atom_cluster_is(static_cast<Clustering>(c)));
    for (int b = 0; b < n_density_bands; ++b) atoms.push_back(atom_density_band(static_cast<DensityBand>(b)));
    return AtomVocab(std::move(atoms));
}

int AtomVocab::index_of(const EvidenceAtom& atom) const {
    const auto it = index_.find(atom_key(atom));
    return it == index_.end() ? -1 : it->second;
}

} // namespace scenelab
