#pragma once

#include "scenelab/policy.hpp"
#include "scenelab/scene_forge.hpp"

#include <string>
#include <vector>

namespace scenelab::testing {

// a scene with explicit objects; capacity defaults to object count (or 1)
inline Scene make_scene(std::vector<SceneObject> objects, double area = 1.0, int capacity = -1) {
    Scene s;
    s.id = "scene-test";
    s.region_type = RegionType::parking_lot;
    s.area = area;
    s.capacity = capacity > 0 ? capacity : std::max<int>(1, static_cast<int>(objects.size()));
    s.objects = std::move(objects);
    s.seed = 0;
    return s;
}

inline SceneObject make_object(double x, double y, ObjectClass cls = ObjectClass::vehicle,
                               Color color = Color::gray, ShapeTag shape = ShapeTag::rectangular) {
    SceneObject o;
    o.class_label = cls;
    o.center = {x, y};
    o.size = {0.02, 0.04};
    o.orientation = 0.5;
    o.color = color;
    o.shape_tag = shape;
    return o;
}

inline McqSample make_question(std::vector<std::string> options, std::string gold,
                               std::vector<EvidenceAtom> trace = {}, Category category = Category::color) {
    McqSample q;
    q.id = "mcq-test";
    q.scene_id = "scene-test";
    q.category = category;
    q.stem = "test stem";
    q.options = std::move(options);
    q.gold_content = std::move(gold);
    q.gold_trace = std::move(trace);
    q.subset = Subset::rl;
    return q;
}

// two-atom vocabulary + K=2 question, the smallest enumerable instance
struct TinyInstance {
    Scene scene;
    McqSample question;
    AtomVocab vocab;
    PolicyDims dims;
};

inline TinyInstance make_tiny_instance(int l_max = 1, int k = 2) {
    TinyInstance t;
    t.scene = make_scene({make_object(0.25, 0.25, ObjectClass::vehicle, Color::red)}, 1.0, 4);
    std::vector<std::string> options;
    const char* names[] = {"red", "white", "gray", "blue"};
    for (int i = 0; i < k; ++i) options.emplace_back(names[i]);
    t.question = make_question(options, "red", {atom_dominant_color(Color::red)}, Category::color);
    t.vocab = AtomVocab(std::vector<EvidenceAtom>{atom_dominant_color(Color::red), atom_cluster_is(Clustering::grid)});
    t.dims.vocab_size = t.vocab.size();
    t.dims.max_options = k;
    t.dims.l_max = l_max;
    t.dims.count_max = 4;
    return t;
}

// generation parameters small enough for exhaustive-ish gradient checks
inline GenParams small_gen_params() {
    GenParams gen;
    gen.count_max = 6;
    for (auto& region : gen.regions) {
        region.cap_lo = 4;
        region.cap_hi = 8;
        region.count_lo = 1;
        region.count_hi = 5;
    }
    return gen;
}

inline bool scenes_equal(const Scene& a, const Scene& b) {
    if (a.id != b.id || a.region_type != b.region_type || a.area != b.area || a.capacity != b.capacity ||
        a.seed != b.seed || a.objects.size() != b.objects.size())
        return false;
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
        const SceneObject& x = a.objects[i];
        const SceneObject& y = b.objects[i];
        if (x.class_label != y.class_label || x.center.x != y.center.x || x.center.y != y.center.y ||
            x.size.x != y.size.x || x.size.y != y.size.y || x.orientation != y.orientation || x.color != y.color ||
            x.shape_tag != y.shape_tag)
            return false;
    }
    return true;
}

inline bool samples_equal(const McqSample& a, const McqSample& b) {
    return a.id == b.id && a.scene_id == b.scene_id && a.category == b.category && a.stem == b.stem &&
           a.options == b.options && a.gold_content == b.gold_content && a.gold_trace == b.gold_trace &&
           a.subset == b.subset;
}

inline bool params_equal(const PolicyParams& a, const PolicyParams& b) {
    return a.dims == b.dims && a.trace_head == b.trace_head &&
           a.answer_content_weights == b.answer_content_weights &&
           a.answer_position_weights == b.answer_position_weights;
}

inline bool trajectories_equal(const Trajectory& a, const Trajectory& b) {
    return a.trace == b.trace && a.answer_slot == b.answer_slot && a.answer_content == b.answer_content &&
           a.step_logprobs == b.step_logprobs && a.total_logprob == b.total_logprob && a.well_formed == b.well_formed;
}

} // namespace scenelab::testing
