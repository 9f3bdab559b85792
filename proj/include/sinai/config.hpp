#pragma once

#include "sinai/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sinai {

inline constexpr const char* kCodeVersion = "1.0.0";

/// Checked view into a JSON configuration tree. Every accessor validates
/// presence and type; every failure throws ConfigError naming the full
/// key path (e.g. "params.schedule[2]").
class ConfigView {
  public:
    ConfigView(const nlohmann::json& j, std::string path);

    const std::string& path() const { return path_; }
    const nlohmann::json& raw() const { return *j_; }
    bool has(const std::string& key) const;

    ConfigView child(const std::string& key) const;

    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& dflt) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double dflt) const;
    std::int64_t integer(const std::string& key) const;
    std::int64_t integer(const std::string& key, std::int64_t dflt) const;
    bool boolean(const std::string& key, bool dflt) const;
    std::vector<long> longs(const std::string& key) const;
    std::vector<long> longs(const std::string& key, const std::vector<long>& dflt) const;
    std::vector<double> doubles(const std::string& key) const;
    std::vector<double> doubles(const std::string& key,
                                const std::vector<double>& dflt) const;
    /// List of equal-length numeric vectors (e.g. frequency vectors).
    std::vector<std::vector<double>> vector_list(const std::string& key) const;

    /// Rejects any key not in `allowed` (unknown-key strictness).
    void allow_only(std::initializer_list<const char*> allowed) const;

    [[noreturn]] void fail(const std::string& msg) const;

  private:
    const nlohmann::json* j_;
    std::string path_;

    const nlohmann::json& need(const std::string& key) const;
};

/// Parsed top-level run configuration. `params` stays as JSON and is
/// validated by the experiment that consumes it.
struct ExperimentConfig {
    std::string experiment;
    nlohmann::json table = "reference";
    std::uint64_t seed = 1;
    std::int64_t samples = 1000000;
    std::uint64_t stream_base = 10000;
    int workers = 0; ///< 0 = SINAI_WORKERS env, else hardware
    std::string out_dir = "out";
    nlohmann::json params = nlohmann::json::object();

    /// Deterministic serialization of everything that affects results
    /// (drops workers and out_dir, which may not).
    nlohmann::json canonical() const;
    /// FNV-1a 64-bit hash of the canonical dump, as fixed-width hex.
    std::string hash() const;
};

/// Parses a top-level config object. `experiment` selects the experiment
/// when the file omits it; a conflicting file value is a ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& root,
                                         const std::string& experiment);
ExperimentConfig load_config_file(const std::string& file,
                                  const std::string& experiment);

/// Table spec: the string "reference" or an object
/// {"disks": [{"center": [x, y], "radius": r}, ...], "p_max"?, "n_rays"?}.
std::vector<Scatterer> scatterers_from_spec(const nlohmann::json& spec);

/// Builds and validates the configured table (throws
/// InfiniteHorizonDetected / OverlappingScatterers on bad layouts).
BilliardTable build_table(const nlohmann::json& spec);

/// Unvalidated build with a provisional horizon bound, for the validate
/// subcommand which wants the report rather than a throw.
BilliardTable build_raw_table(const nlohmann::json& spec, double horizon_bound);

} // namespace sinai
