#include "scenelab/config.hpp"
#include "scenelab/errors.hpp"
#include "scenelab/rng.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace scenelab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + value + "' is not a number");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(key + ": '" + value + "' is not an integer");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(key + ": '" + value + "' is not an unsigned integer");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

// "count:1,color:1,shape:1,scene:1,reason:2" — every category exactly once
std::array<double, n_categories> parse_category_weights(const std::string& value) {
    std::array<double, n_categories> weights{};
    std::array<bool, n_categories> seen{};
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("category_weights: entry '" + item + "' is not name:weight");
        const Category cat = category_from(trim(item.substr(0, colon)));
        const double w = parse_double("category_weights", trim(item.substr(colon + 1)));
        if (seen[static_cast<int>(cat)]) throw ConfigError("category_weights: duplicate " + item.substr(0, colon));
        seen[static_cast<int>(cat)] = true;
        weights[static_cast<int>(cat)] = w;
    }
    for (int c = 0; c < n_categories; ++c) {
        if (!seen[c]) throw ConfigError(std::string("category_weights: missing ") + name_of(static_cast<Category>(c)));
    }
    return weights;
}

} // namespace

void RunConfig::validate() const {
    if (run_id.empty()) throw ConfigError("run_id must be nonempty");
    forge.validate();
    sft.validate();
    grpo.validate();
    if (eval.n_perms < 1) throw ConfigError("eval n_perms must be at least 1");
}

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = line.substr(1, line.size() - 2);
            if (section != "forge" && section != "sft" && section != "grpo" && section != "eval")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (section.empty()) {
            if (key == "run_id") cfg.run_id = value;
            else if (key == "master_seed") cfg.master_seed = parse_u64(key, value);
            else throw ConfigError("unknown top-level key '" + key + "'");
        } else if (section == "forge") {
            if (key == "n") cfg.forge.n_total = parse_u64(key, value);
            else if (key == "split_ratio") cfg.forge.split_ratio = parse_double(key, value);
            else if (key == "eval_n") cfg.forge.n_eval = parse_u64(key, value);
            else if (key == "k_options") cfg.forge.k_options = static_cast<int>(parse_int(key, value));
            else if (key == "gold_slot_bias") cfg.forge.gold_slot_bias = parse_double(key, value);
            else if (key == "category_weights") cfg.forge.category_weights = parse_category_weights(value);
            else throw ConfigError("unknown key '" + key + "' in [forge]");
        } else if (section == "sft") {
            if (key == "learning_rate") cfg.sft.learning_rate = parse_double(key, value);
            else if (key == "epochs") cfg.sft.epochs = static_cast<int>(parse_int(key, value));
            else if (key == "batch_size") cfg.sft.batch_size = static_cast<int>(parse_int(key, value));
            else throw ConfigError("unknown key '" + key + "' in [sft]");
        } else if (section == "grpo") {
            if (key == "group_size") cfg.grpo.group_size = static_cast<int>(parse_int(key, value));
            else if (key == "clip_epsilon") cfg.grpo.clip_epsilon = parse_double(key, value);
            else if (key == "kl_beta") cfg.grpo.kl_beta = parse_double(key, value);
            else if (key == "learning_rate") cfg.grpo.learning_rate = parse_double(key, value);
            else if (key == "steps") cfg.grpo.steps = static_cast<int>(parse_int(key, value));
            else if (key == "inner_epochs") cfg.grpo.inner_epochs = static_cast<int>(parse_int(key, value));
            else if (key == "alpha") cfg.grpo.reward.alpha = parse_double(key, value);
            else if (key == "eta") cfg.grpo.reward.eta = parse_double(key, value);
            else if (key == "acc_value") cfg.grpo.reward.acc_value = parse_double(key, value);
            else if (key == "fmt_value") cfg.grpo.reward.fmt_value = parse_double(key, value);
            else if (key == "lcr_enabled") cfg.grpo.lcr_enabled = parse_bool(key, value);
            else throw ConfigError("unknown key '" + key + "' in [grpo]");
        } else { // eval
            if (key == "n_perms") cfg.eval.n_perms = static_cast<int>(parse_int(key, value));
            else throw ConfigError("unknown key '" + key + "' in [eval]");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config_text(buf.str());
}

std::uint64_t stage_seed(std::uint64_t master_seed, const char* stage) {
    return mix_seed(master_seed, {hash_tag(stage)});
}

} // namespace scenelab
