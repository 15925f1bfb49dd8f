#include "scenelab/scene.hpp"
#include "scenelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenelab {

namespace {

const char* kObjectClassNames[n_object_classes] = {"vehicle", "building", "storage-tank", "ship", "plane"};
const char* kColorNames[n_colors] = {"red", "white", "gray", "blue", "green", "dark"};
const char* kShapeNames[n_shape_tags] = {"rectangular", "circular", "linear", "L-shaped"};
const char* kRegionNames[n_region_types] = {"parking-lot", "residential", "logistics-hub", "port", "rural-field"};
const char* kClusteringNames[n_clusterings] = {"grid", "linear", "scattered"};
const char* kOccupancyNames[n_occupancy_bands] = {"sparse", "moderate", "heavy", "near-saturation"};
const char* kDensityNames[n_density_bands] = {"low", "mid", "high"};
const char* kCategoryNames[n_categories] = {"count", "color", "shape", "scene", "reason"};

template <class E>
E parse_enum(const std::string& s, const char* const* names, int n, const char* what) {
    for (int i = 0; i < n; ++i) {
        if (s == names[i]) return static_cast<E>(i);
    }
    throw MalformedAtom(std::string(what) + " has no value named '" + s + "'");
}

} // namespace

const char* name_of(ObjectClass c) { return kObjectClassNames[static_cast<int>(c)]; }
const char* name_of(Color c) { return kColorNames[static_cast<int>(c)]; }
const char* name_of(ShapeTag s) { return kShapeNames[static_cast<int>(s)]; }
const char* name_of(RegionType r) { return kRegionNames[static_cast<int>(r)]; }
const char* name_of(Clustering c) { return kClusteringNames[static_cast<int>(c)]; }
const char* name_of(OccupancyBand b) { return kOccupancyNames[static_cast<int>(b)]; }
const char* name_of(DensityBand b) { return kDensityNames[static_cast<int>(b)]; }
const char* name_of(Category c) { return kCategoryNames[static_cast<int>(c)]; }

ObjectClass object_class_from(const std::string& s) { return parse_enum<ObjectClass>(s, kObjectClassNames, n_object_classes, "object class"); }
Color color_from(const std::string& s) { return parse_enum<Color>(s, kColorNames, n_colors, "color"); }
ShapeTag shape_tag_from(const std::string& s) { return parse_enum<ShapeTag>(s, kShapeNames, n_shape_tags, "shape tag"); }
RegionType region_type_from(const std::string& s) { return parse_enum<RegionType>(s, kRegionNames, n_region_types, "region type"); }
Clustering clustering_from(const std::string& s) { return parse_enum<Clustering>(s, kClusteringNames, n_clusterings, "clustering"); }
OccupancyBand occupancy_band_from(const std::string& s) { return parse_enum<OccupancyBand>(s, kOccupancyNames, n_occupancy_bands, "occupancy band"); }
DensityBand density_band_from(const std::string& s) { return parse_enum<DensityBand>(s, kDensityNames, n_density_bands, "density band"); }
Category category_from(const std::string& s) { return parse_enum<Category>(s, kCategoryNames, n_categories, "category"); }

OccupancyBand occupancy_band_of(double r) {
    if (r < 0.25) return OccupancyBand::sparse;
    if (r < 0.6) return OccupancyBand::moderate;
    if (r < 0.9) return OccupancyBand::heavy;
    return OccupancyBand::near_saturation;
}

DensityBand density_band_of(double d) {
    if (d < 4.0) return DensityBand::low;
    if (d < 12.0) return DensityBand::mid;
    return DensityBand::high;
}

namespace {

// 1D gap clustering: sorted coordinates are split wherever consecutive values
// differ by more than delta; returns cluster means.
std::vector<double> gap_cluster(std::vector<double> coords, double delta) {
    std::sort(coords.begin(), coords.end());
    std::vector<double> centers;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= coords.size(); ++i) {
        if (i == coords.size() || coords[i] - coords[i - 1] > delta) {
            double sum = 0.0;
            for (std::size_t j = begin; j < i; ++j) sum += coords[j];
            centers.push_back(sum / static_cast<double>(i - begin));
            begin = i;
        }
    }
    return centers;
}

double nearest(const std::vector<double>& centers, double v) {
    double best = centers.front();
    double best_d = std::abs(v - best);
    for (double c : centers) {
        const double d = std::abs(v - c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

constexpr double kGapDelta = 0.06; // row/column separation assumed > this, jitter < half of it

} // namespace

Clustering classify_clustering(const std::vector<Vec2>& centers) {
    const std::size_t n = centers.size();
    if (n < 3) return Clustering::scattered;

    // lattice fit
    {
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = centers[i].x;
            ys[i] = centers[i].y;
        }
        const std::vector<double> cx = gap_cluster(xs, kGapDelta);
        const std::vector<double> cy = gap_cluster(ys, kGapDelta);
        const std::size_t kx = cx.size(), ky = cy.size();
        if (kx >= 2 && ky >= 2 && kx * ky <= 2 * n) {
            double ss = 0.0;
            for (const Vec2& p : centers) {
                const double dx = p.x - nearest(cx, p.x);
                const double dy = p.y - nearest(cy, p.y);
                ss += dx * dx + dy * dy;
            }
            if (std::sqrt(ss / static_cast<double>(n)) <= tau_grid) return Clustering::grid;
        }
    }

    // total-least-squares line fit: RMS perpendicular distance is sqrt of the
    // smaller eigenvalue of the covariance matrix
    {
        double mx = 0.0, my = 0.0;
        for (const Vec2& p : centers) {
            mx += p.x;
            my += p.y;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (const Vec2& p : centers) {
            const double dx = p.x - mx, dy = p.y - my;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        sxx /= static_cast<double>(n);
        sxy /= static_cast<double>(n);
        syy /= static_cast<double>(n);
        const double mean = 0.5 * (sxx + syy);
        const double det = std::sqrt(std::max(0.0, 0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy));
        const double lambda_min = std::max(0.0, mean - det);
        const double lambda_max = mean + det;
        const bool spread = std::sqrt(lambda_max) > 0.05; // a tight clump is not a line
        if (spread && std::sqrt(lambda_min) <= tau_line) return Clustering::linear;
    }

    return Clustering::scattered;
}

MorphoStats compute_morphostats(const Scene& scene) {
    MorphoStats st;
    st.count = static_cast<int>(scene.objects.size());
    st.density = static_cast<double>(st.count) / scene.area;
    st.occupancy_ratio = static_cast<double>(st.count) / static_cast<double>(scene.capacity);

    if (st.count >= 2) {
        double total = 0.0;
        for (std::size_t i = 0; i < scene.objects.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < scene.objects.size(); ++j) {
                if (i == j) continue;
                const double dx = scene.objects[i].center.x - scene.objects[j].center.x;
                const double dy = scene.objects[i].center.y - scene.objects[j].center.y;
                best = std::min(best, std::sqrt(dx * dx + dy * dy));
            }
            total += best;
        }
        st.mean_nn_spacing = total / static_cast<double>(st.count);
    }

    std::vector<Vec2> centers;
    centers.reserve(scene.objects.size());
    for (const SceneObject& o : scene.objects) centers.push_back(o.center);
    st.clustering_label = classify_clustering(centers);
    return st;
}

std::array<int, n_object_classes> class_counts(const Scene& scene) {
    std::array<int, n_object_classes> counts{};
    for (const SceneObject& o : scene.objects) counts[static_cast<int>(o.class_label)]++;
    return counts;
}

namespace {

template <class E, int N, class Get>
std::optional<E> dominant(const Scene& scene, Get&& get) {
    if (scene.objects.empty()) return std::nullopt;
    int counts[N] = {};
    for (const SceneObject& o : scene.objects) counts[static_cast<int>(get(o))]++;
    int best = 0;
    for (int i = 1; i < N; ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return static_cast<E>(best);
}

} // namespace

std::optional<ObjectClass> dominant_class(const Scene& scene) {
    return dominant<ObjectClass, n_object_classes>(scene, [](const SceneObject& o) { return o.class_label; });
}

std::optional<Color> dominant_color(const Scene& scene) {
    return dominant<Color, n_colors>(scene, [](const SceneObject& o) { return o.color; });
}

std::optional<ShapeTag> dominant_shape(const Scene& scene) {
    return dominant<ShapeTag, n_shape_tags>(scene, [](const SceneObject& o) { return o.shape_tag; });
}

} // namespace scenelab
