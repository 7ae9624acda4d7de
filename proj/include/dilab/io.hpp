#pragma once

// JSON and CSV serialization, registries for config-described objects, and report provenance.

#include "dilab/bump.hpp"
#include "dilab/measures.hpp"
#include "dilab/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>

namespace dilab::io {

using Json = nlohmann::json;

/// Typed access to one JSON object of a config. Every key that is read is remembered;
/// finish() rejects the rest. Errors carry the dotted path of the offending key.
class ObjectReader {
public:
    ObjectReader(const Json& json, std::string path);

    bool has(const std::string& key) const;
    const Json& at(const std::string& key);
    std::string path_of(const std::string& key) const { return path_ + "." + key; }

    double number(const std::string& key, double fallback);
    std::int64_t integer(const std::string& key, std::int64_t fallback);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
    std::string string(const std::string& key, const std::string& fallback);
    std::vector<int> int_list(const std::string& key, std::vector<int> fallback);

    /// Throws ConfigError naming every key that was not read.
    void finish() const;

private:
    const Json& json_;
    std::string path_;
    std::set<std::string> seen_;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// 16 hex digits of fnv1a64 over the canonical (sorted-key, compact) dump.
std::string config_hash(const Json& config);

/// Commit id captured at configure time, or "unknown".
std::string build_id();

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double value);

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& path);

Json to_json(const NetParams& net);
NetParams net_from_json(const Json& j);

Json to_json(const BasisSpec& basis);
BasisSpec basis_from_json(const Json& j);
std::string basis_hash(const BasisSpec& basis);

/// {"encoder": {"tag", "rows"}, "net", "decoder": {"elements"}, "basis_hash"}.
Json checkpoint_to_json(const EdaModel& model, const BasisSpec& basis);
/// Throws ConfigError when the stored basis hash differs from basis.
EdaModel checkpoint_from_json(const Json& j, const BasisSpec& basis);

/// Eigenvalue lists accept arrays or the power-law shorthand "i^-s".
GaussianSpec gaussian_from_json(const Json& j, int ambient_dim, const std::string& path);
BaseMeasure base_measure_from_json(const Json& j, int ambient_dim, const std::string& path);

/// {"input": base, "directions": base (defaults to input), "k", "mass", "coupling"}.
MeasureSampler measure_from_json(const Json& j, int ambient_dim, const std::string& path);

/// {"shape": "box" | "ellipsoid", "c0"} (radii c0 / i^2) or {"shape", "radii": [...]}.
CompactSpec compact_from_json(const Json& j, int ambient_dim, const std::string& path);

/// Registry keys "identity", "zero", "diagonal", "quadratic", "nemytskii", with an optional
/// "cylindrical": {"d", "m"} wrapper.
TargetOperator target_from_json(const Json& j, int ambient_dim, const std::string& path);

/// "hgno", "projection", "deeponet", "pcanet".
EdaModel model_from_json(const Json& j, int ambient_dim, const std::string& path,
                         const MeasureSampler* input_measure = nullptr);

TrainConfig train_config_from_json(const Json& j, const std::string& path);
Json to_json(const TrainConfig& cfg);
Json to_json(const TrainReport& report);
Json to_json(const NormEstimate& estimate);

/// iteration,loss,best_so_far
void write_history_csv(std::ostream& out, const TrainReport& report);

} // namespace dilab::io
