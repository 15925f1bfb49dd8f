#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scenelab {

// ----------------------------- closed enumerations -----------------------------

enum class ObjectClass { vehicle, building, storage_tank, ship, plane };
enum class Color { red, white, gray, blue, green, dark };
enum class ShapeTag { rectangular, circular, linear, l_shaped };
enum class RegionType { parking_lot, residential, logistics_hub, port, rural_field };
enum class Clustering { grid, linear, scattered };
enum class OccupancyBand { sparse, moderate, heavy, near_saturation };
enum class DensityBand { low, mid, high };
enum class Category { count, color, shape, scene, reason };

constexpr int n_object_classes = 5;
constexpr int n_colors = 6;
constexpr int n_shape_tags = 4;
constexpr int n_region_types = 5;
constexpr int n_clusterings = 3;
constexpr int n_occupancy_bands = 4;
constexpr int n_density_bands = 3;
constexpr int n_categories = 5;

const char* name_of(ObjectClass c);
const char* name_of(Color c);
const char* name_of(ShapeTag s);
const char* name_of(RegionType r);
const char* name_of(Clustering c);
const char* name_of(OccupancyBand b);
const char* name_of(DensityBand b);
const char* name_of(Category c);

// exact-name parsers; throw MalformedAtom / ConfigError style std::runtime_error on bad input
ObjectClass object_class_from(const std::string& s);
Color color_from(const std::string& s);
ShapeTag shape_tag_from(const std::string& s);
RegionType region_type_from(const std::string& s);
Clustering clustering_from(const std::string& s);
OccupancyBand occupancy_band_from(const std::string& s);
DensityBand density_band_from(const std::string& s);
Category category_from(const std::string& s);

// ----------------------------- scene types -----------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct SceneObject {
    ObjectClass class_label = ObjectClass::vehicle;
    Vec2 center;                 // both components in [0,1]
    Vec2 size;                   // width, height in scene units, > 0
    double orientation = 0.0;    // radians in [0, pi)
    Color color = Color::gray;
    ShapeTag shape_tag = ShapeTag::rectangular;
};

struct Scene {
    std::string id;
    RegionType region_type = RegionType::parking_lot;
    double area = 1.0;           // scene units^2, > 0
    int capacity = 1;            // maximum object slots, > 0
    std::vector<SceneObject> objects;
    std::uint64_t seed = 0;
};

struct MorphoStats {
    int count = 0;
    double density = 0.0;          // count / area
    double mean_nn_spacing = 0.0;  // 0 when count < 2
    double occupancy_ratio = 0.0;  // count / capacity
    Clustering clustering_label = Clustering::scattered;
};

// ----------------------------- band thresholds -----------------------------

// occupancy: sparse [0,0.25) moderate [0.25,0.6) heavy [0.6,0.9) near-saturation [0.9,1]
OccupancyBand occupancy_band_of(double occupancy_ratio);
// density (objects per unit area): low [0,4) mid [4,12) high [12,inf)
DensityBand density_band_of(double density);

// ----------------------------- morphology -----------------------------

// clustering thresholds in scene units
constexpr double tau_grid = 0.02;
constexpr double tau_line = 0.02;

// Label rules, checked in order:
//   grid — an axis-aligned lattice fitted by 1D gap clustering per axis has
//          RMS point-to-node residual <= tau_grid, with at least 2 rows and
//          2 columns and an economical node count (kx*ky <= 2n);
//   linear — total-least-squares line fit has RMS perpendicular residual
//          <= tau_line and the points actually spread along the line;
//   scattered — everything else, and any input with fewer than 3 points.
Clustering classify_clustering(const std::vector<Vec2>& centers);

MorphoStats compute_morphostats(const Scene& scene);

std::array<int, n_object_classes> class_counts(const Scene& scene);
// most frequent, ties broken by enum order; nullopt on empty scene
std::optional<ObjectClass> dominant_class(const Scene& scene);
std::optional<Color> dominant_color(const Scene& scene);
std::optional<ShapeTag> dominant_shape(const Scene& scene);

} // namespace scenelab
