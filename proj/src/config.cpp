#include "sinai/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sinai {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ConfigView
// ---------------------------------------------------------------------------

ConfigView::ConfigView(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j_->is_object()) {
        throw ConfigError(path_ + ": expected an object");
    }
}

void ConfigView::fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

bool ConfigView::has(const std::string& key) const { return j_->contains(key); }

const json& ConfigView::need(const std::string& key) const {
    auto it = j_->find(key);
    if (it == j_->end()) {
        throw ConfigError(path_ + "." + key + ": missing required key");
    }
    return *it;
}

ConfigView ConfigView::child(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_object()) {
        throw ConfigError(path_ + "." + key + ": expected an object");
    }
    return ConfigView(v, path_ + "." + key);
}

std::string ConfigView::str(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_string()) throw ConfigError(path_ + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::string ConfigView::str(const std::string& key, const std::string& dflt) const {
    return has(key) ? str(key) : dflt;
}

double ConfigView::num(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
    return v.get<double>();
}

double ConfigView::num(const std::string& key, double dflt) const {
    return has(key) ? num(key) : dflt;
}

std::int64_t ConfigView::integer(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_number_integer()) {
        throw ConfigError(path_ + "." + key + ": expected an integer");
    }
    return v.get<std::int64_t>();
}

std::int64_t ConfigView::integer(const std::string& key, std::int64_t dflt) const {
    return has(key) ? integer(key) : dflt;
}

bool ConfigView::boolean(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const json& v = need(key);
    if (!v.is_boolean()) throw ConfigError(path_ + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::vector<long> ConfigView::longs(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_array()) throw ConfigError(path_ + "." + key + ": expected an array");
    std::vector<long> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) {
            throw ConfigError(path_ + "." + key + "[" + std::to_string(i) +
                              "]: expected an integer");
        }
        out.push_back(v[i].get<long>());
    }
    return out;
}

std::vector<long> ConfigView::longs(const std::string& key,
                                    const std::vector<long>& dflt) const {
    return has(key) ? longs(key) : dflt;
}

std::vector<double> ConfigView::doubles(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_array()) throw ConfigError(path_ + "." + key + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            throw ConfigError(path_ + "." + key + "[" + std::to_string(i) +
                              "]: expected a number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<double> ConfigView::doubles(const std::string& key,
                                        const std::vector<double>& dflt) const {
    return has(key) ? doubles(key) : dflt;
}

std::vector<std::vector<double>> ConfigView::vector_list(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_array()) throw ConfigError(path_ + "." + key + ": expected an array");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path_ + "." + key + "[" + std::to_string(i) + "]";
        if (!v[i].is_array()) throw ConfigError(p + ": expected an array");
        std::vector<double> row;
        for (std::size_t a = 0; a < v[i].size(); ++a) {
            if (!v[i][a].is_number()) {
                throw ConfigError(p + "[" + std::to_string(a) + "]: expected a number");
            }
            row.push_back(v[i][a].get<double>());
        }
        out.push_back(std::move(row));
    }
    return out;
}

void ConfigView::allow_only(std::initializer_list<const char*> allowed) const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) {
            if (it.key() == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError(path_ + "." + it.key() + ": unknown key");
        }
    }
}

// ---------------------------------------------------------------------------
// ExperimentConfig
// ---------------------------------------------------------------------------

json ExperimentConfig::canonical() const {
    json c;
    c["experiment"] = experiment;
    c["table"] = table;
    c["seed"] = seed;
    c["samples"] = samples;
    c["stream_base"] = stream_base;
    c["params"] = params;
    return c;
}

std::string ExperimentConfig::hash() const {
    const std::string s = canonical().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_experiment_config(const json& root, const std::string& experiment) {
    ConfigView v(root, "config");
    v.allow_only({"experiment", "table", "seed", "samples", "stream_base", "workers",
                  "out", "params"});
    ExperimentConfig cfg;
    cfg.experiment = v.str("experiment", experiment);
    if (!experiment.empty() && cfg.experiment != experiment) {
        v.fail("experiment '" + cfg.experiment + "' does not match the subcommand '" +
               experiment + "'");
    }
    if (cfg.experiment.empty()) v.fail("no experiment selected");
    if (v.has("table")) {
        const json& t = root.at("table");
        if (!t.is_string() && !t.is_object()) {
            v.fail("table: expected \"reference\" or an object with disks");
        }
        cfg.table = t;
    }
    const std::int64_t seed = v.integer("seed", 1);
    if (seed < 0) v.fail("seed: must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.samples = v.integer("samples", 1000000);
    if (cfg.samples < 1) v.fail("samples: must be >= 1");
    const std::int64_t base = v.integer("stream_base", 10000);
    if (base < 0) v.fail("stream_base: must be non-negative");
    cfg.stream_base = static_cast<std::uint64_t>(base);
    const std::int64_t workers = v.integer("workers", 0);
    if (workers < 0 || workers > 4096) v.fail("workers: must be in [0, 4096]");
    cfg.workers = static_cast<int>(workers);
    cfg.out_dir = v.str("out", "out");
    if (v.has("params")) {
        if (!root.at("params").is_object()) v.fail("params: expected an object");
        cfg.params = root.at("params");
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& file, const std::string& experiment) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    json root;
    try {
        root = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(file + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(file + ": top level must be an object");
    return parse_experiment_config(root, experiment);
}

// ---------------------------------------------------------------------------
// Table construction
// ---------------------------------------------------------------------------

std::vector<Scatterer> scatterers_from_spec(const json& spec) {
    if (spec.is_string()) {
        if (spec.get<std::string>() == "reference") return reference_scatterers();
        throw ConfigError("table: unknown table name '" + spec.get<std::string>() +
                          "' (only \"reference\" is predefined)");
    }
    ConfigView v(spec, "table");
    v.allow_only({"disks", "p_max", "n_rays"});
    const json& disks = spec.contains("disks") ? spec.at("disks") : json();
    if (!disks.is_array() || disks.empty()) {
        throw ConfigError("table.disks: expected a non-empty array");
    }
    std::vector<Scatterer> out;
    for (std::size_t i = 0; i < disks.size(); ++i) {
        const std::string p = "table.disks[" + std::to_string(i) + "]";
        if (!disks[i].is_object()) throw ConfigError(p + ": expected an object");
        ConfigView d(disks[i], p);
        d.allow_only({"center", "radius"});
        const std::vector<double> c = d.doubles("center");
        if (c.size() != 2) throw ConfigError(p + ".center: expected [x, y]");
        const double r = d.num("radius");
        if (!(r > 0.0)) throw ConfigError(p + ".radius: must be positive");
        out.push_back(Scatterer{Vec2{c[0], c[1]}, r, static_cast<int>(i)});
    }
    return out;
}

BilliardTable build_table(const json& spec) {
    if (spec.is_string() && spec.get<std::string>() == "reference") {
        return reference_table();
    }
    int p_max = 5;
    std::int64_t n_rays = 200000;
    if (spec.is_object()) {
        ConfigView v(spec, "table");
        p_max = static_cast<int>(v.integer("p_max", 5));
        n_rays = v.integer("n_rays", 200000);
        if (p_max < 1) v.fail("p_max: must be >= 1");
        if (n_rays < 1) v.fail("n_rays: must be >= 1");
    }
    return make_validated_table(scatterers_from_spec(spec), p_max, n_rays).first;
}

BilliardTable build_raw_table(const json& spec, double horizon_bound) {
    return BilliardTable(scatterers_from_spec(spec), horizon_bound);
}

} // namespace sinai
