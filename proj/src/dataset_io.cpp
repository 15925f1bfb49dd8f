#include "scenelab/dataset_io.hpp"
#include "scenelab/errors.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace scenelab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json atom_to_json(const EvidenceAtom& atom) {
    ordered_json j;
    j["predicate"] = name_of(atom.pred);
    switch (atom.pred) {
        case Predicate::count_eq: j["args"] = {name_of(atom.cls), atom.value}; break;
        case Predicate::count_in_range: j["args"] = {name_of(atom.cls), atom.value, atom.value2}; break;
        case Predicate::dominant_color: j["args"] = {name_of(atom.color)}; break;
        case Predicate::dominant_shape: j["args"] = {name_of(atom.shape)}; break;
        case Predicate::occupancy_band: j["args"] = {name_of(atom.occ)}; break;
        case Predicate::cluster_is: j["args"] = {name_of(atom.cluster)}; break;
        case Predicate::density_band: j["args"] = {name_of(atom.dens)}; break;
    }
    return j;
}

EvidenceAtom atom_from_json(const json& j) {
    const Predicate pred = predicate_from(j.at("predicate").get<std::string>());
    const json& args = j.at("args");
    const auto expect_arity = [&](std::size_t n) {
        if (args.size() != n) throw MalformedAtom(std::string(name_of(pred)) + " expects " + std::to_string(n) + " args");
    };
    switch (pred) {
        case Predicate::count_eq:
            expect_arity(2);
            return atom_count_eq(object_class_from(args.at(0).get<std::string>()), args.at(1).get<int>());
        case Predicate::count_in_range:
            expect_arity(3);
            return atom_count_in_range(object_class_from(args.at(0).get<std::string>()), args.at(1).get<int>(),
                                       args.at(2).get<int>());
        case Predicate::dominant_color:
            expect_arity(1);
            return atom_dominant_color(color_from(args.at(0).get<std::string>()));
        case Predicate::dominant_shape:
            expect_arity(1);
            return atom_dominant_shape(shape_tag_from(args.at(0).get<std::string>()));
        case Predicate::occupancy_band:
            expect_arity(1);
            return atom_occupancy_band(occupancy_band_from(args.at(0).get<std::string>()));
        case Predicate::cluster_is:
            expect_arity(1);
            return atom_cluster_is(clustering_from(args.at(0).get<std::string>()));
        case Predicate::density_band:
            expect_arity(1);
            return atom_density_band(density_band_from(args.at(0).get<std::string>()));
    }
    throw MalformedAtom("unreachable predicate");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

void check_header(const std::string& line, const char* schema, const std::string& path) {
    const json j = json::parse(line);
    if (j.at("schema").get<std::string>() != schema || j.at("version").get<int>() != dataset_schema_version)
        throw IoError(path + ": expected schema '" + schema + "' version " + std::to_string(dataset_schema_version));
}

} // namespace

void write_scenes_jsonl(std::span<const Scene> scenes, const std::string& path) {
    std::ofstream out = open_out(path);
    out << R"({"schema":"scenes","version":1})" << "\n";
    for (const Scene& s : scenes) {
        ordered_json j;
        j["id"] = s.id;
        j["region_type"] = name_of(s.region_type);
        j["area"] = s.area;
        j["capacity"] = s.capacity;
        j["seed"] = s.seed;
        ordered_json objs = ordered_json::array();
        for (const SceneObject& o : s.objects) {
            ordered_json jo;
            jo["class_label"] = name_of(o.class_label);
            jo["center"] = {o.center.x, o.center.y};
            jo["size"] = {o.size.x, o.size.y};
            jo["orientation"] = o.orientation;
            jo["color"] = name_of(o.color);
            jo["shape_tag"] = name_of(o.shape_tag);
            objs.push_back(std::move(jo));
        }
        j["objects"] = std::move(objs);
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

std::vector<Scene> read_scenes_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": missing header line");
    check_header(line, "scenes", path);

    std::vector<Scene> scenes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        Scene s;
        s.id = j.at("id").get<std::string>();
        s.region_type = region_type_from(j.at("region_type").get<std::string>());
        s.area = j.at("area").get<double>();
        s.capacity = j.at("capacity").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
        for (const json& jo : j.at("objects")) {
            SceneObject o;
            o.class_label = object_class_from(jo.at("class_label").get<std::string>());
            o.center = {jo.at("center").at(0).get<double>(), jo.at("center").at(1).get<double>()};
            o.size = {jo.at("size").at(0).get<double>(), jo.at("size").at(1).get<double>()};
            o.orientation = jo.at("orientation").get<double>();
            o.color = color_from(jo.at("color").get<std::string>());
            o.shape_tag = shape_tag_from(jo.at("shape_tag").get<std::string>());
            s.objects.push_back(std::move(o));
        }
        scenes.push_back(std::move(s));
    }
    return scenes;
}

void write_samples_jsonl(std::span<const McqSample> samples, const std::string& path) {
    std::ofstream out = open_out(path);
    out << R"({"schema":"samples","version":1})" << "\n";
    for (const McqSample& s : samples) {
        ordered_json j;
        j["id"] = s.id;
        j["scene_id"] = s.scene_id;
        j["category"] = name_of(s.category);
        j["stem"] = s.stem;
        j["options"] = s.options;
        j["gold_content"] = s.gold_content;
        ordered_json trace = ordered_json::array();
        for (const EvidenceAtom& a : s.gold_trace) trace.push_back(atom_to_json(a));
        j["gold_trace"] = std::move(trace);
        j["subset"] = name_of(s.subset);
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

std::vector<McqSample> read_samples_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": missing header line");
    check_header(line, "samples", path);

    std::vector<McqSample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        McqSample s;
        s.id = j.at("id").get<std::string>();
        s.scene_id = j.at("scene_id").get<std::string>();
        s.category = category_from(j.at("category").get<std::string>());
        s.stem = j.at("stem").get<std::string>();
        s.options = j.at("options").get<std::vector<std::string>>();
        s.gold_content = j.at("gold_content").get<std::string>();
        for (const json& ja : j.at("gold_trace")) s.gold_trace.push_back(atom_from_json(ja));
        s.subset = subset_from(j.at("subset").get<std::string>());
        samples.push_back(std::move(s));
    }
    return samples;
}

void DatasetBundle::build_index() {
    scene_index.clear();
    scene_index.reserve(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) scene_index[scenes[i].id] = i;
}

const Scene& DatasetBundle::scene_of(const McqSample& sample) const {
    const auto it = scene_index.find(sample.scene_id);
    if (it == scene_index.end()) throw IoError("sample " + sample.id + " references unknown scene " + sample.scene_id);
    return scenes[it->second];
}

DatasetBundle load_bundle(const std::string& scenes_path, const std::string& samples_path) {
    DatasetBundle b;
    b.scenes = read_scenes_jsonl(scenes_path);
    b.samples = read_samples_jsonl(samples_path);
    b.build_index();
    return b;
}

DatasetBundle make_bundle(std::vector<Scene> scenes, std::vector<McqSample> samples) {
    DatasetBundle b;
    b.scenes = std::move(scenes);
    b.samples = std::move(samples);
    b.build_index();
    return b;
}

void write_forge_meta(const ForgeMeta& meta, const std::string& path) {
    ordered_json j;
    j["schema"] = "forge_meta";
    j["version"] = 1;
    j["count_max"] = meta.count_max;
    j["k_options"] = meta.k_options;
    j["n_total"] = meta.n_total;
    j["n_sft"] = meta.n_sft;
    j["n_eval"] = meta.n_eval;
    j["seed"] = meta.seed;
    j["gold_slot_bias"] = meta.gold_slot_bias;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

ForgeMeta read_forge_meta(const std::string& path) {
    std::ifstream in = open_in(path);
    json j;
    in >> j;
    if (j.at("schema").get<std::string>() != "forge_meta") throw IoError(path + ": not a forge_meta file");
    ForgeMeta m;
    m.count_max = j.at("count_max").get<int>();
    m.k_options = j.at("k_options").get<int>();
    m.n_total = j.at("n_total").get<std::uint64_t>();
    m.n_sft = j.at("n_sft").get<std::uint64_t>();
    m.n_eval = j.at("n_eval").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.gold_slot_bias = j.at("gold_slot_bias").get<double>();
    return m;
}

DatasetPaths DatasetPaths::in_dir(const std::string& dir) {
    DatasetPaths p;
    p.scenes = dir + "/scenes.jsonl";
    p.samples_sft = dir + "/samples_sft.jsonl";
    p.samples_rl = dir + "/samples_rl.jsonl";
    p.scenes_eval = dir + "/scenes_eval.jsonl";
    p.samples_eval = dir + "/samples_eval.jsonl";
    p.meta = dir + "/forge_meta.json";
    return p;
}

std::vector<std::string> write_forged_dataset(const ForgedDataset& data, const ForgeConfig& cfg,
                                              const std::string& dir) {
    std::filesystem::create_directories(dir);
    const DatasetPaths paths = DatasetPaths::in_dir(dir);
    const std::size_t n_sft = sft_count(cfg);

    std::vector<McqSample> sft(data.samples.begin(), data.samples.begin() + static_cast<std::ptrdiff_t>(n_sft));
    std::vector<McqSample> rl(data.samples.begin() + static_cast<std::ptrdiff_t>(n_sft), data.samples.end());

    std::vector<std::string> written;
    write_scenes_jsonl(data.scenes, paths.scenes);
    written.push_back(paths.scenes);
    write_samples_jsonl(sft, paths.samples_sft);
    written.push_back(paths.samples_sft);
    write_samples_jsonl(rl, paths.samples_rl);
    written.push_back(paths.samples_rl);
    if (!data.eval_samples.empty()) {
        write_scenes_jsonl(data.eval_scenes, paths.scenes_eval);
        written.push_back(paths.scenes_eval);
        write_samples_jsonl(data.eval_samples, paths.samples_eval);
        written.push_back(paths.samples_eval);
    }
    ForgeMeta meta;
    meta.count_max = cfg.gen.count_max;
    meta.k_options = cfg.k_options;
    meta.n_total = cfg.n_total;
    meta.n_sft = n_sft;
    meta.n_eval = cfg.n_eval;
    meta.seed = cfg.seed;
    meta.gold_slot_bias = cfg.gold_slot_bias;
    write_forge_meta(meta, paths.meta);
    written.push_back(paths.meta);
    return written;
}

} // namespace scenelab
