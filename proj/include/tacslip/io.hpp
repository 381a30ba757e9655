#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tacslip/classifiers.hpp"
#include "tacslip/dataset.hpp"
#include "tacslip/online.hpp"

namespace tacslip {

inline constexpr int kRunSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;

// Run files are JSONL. The first record is a header carrying the schema
// version, seed, generator config hash and metadata; frame records are
// {"t_ms":..,"sensor":..,"pins":[[x,y] x 30]}, height records
// {"t_ms":..,"height_mm":..}. Records of unknown type are skipped on read.
void write_run_jsonl(const LabeledRun& run, std::ostream& os);
void write_run_file(const LabeledRun& run, const std::filesystem::path& path);
LabeledRun read_run_jsonl(std::istream& is);
LabeledRun read_run_file(const std::filesystem::path& path);

// All *.jsonl files in the directory, sorted by filename.
std::vector<LabeledRun> read_runs_dir(const std::filesystem::path& dir);

struct ModelMetadata {
    std::string feature_layout = kFeatureLayout;
    std::string dataset_hash;
    std::uint64_t seed = 0;
    double d = 1.0;
    int n_slip = 13;
    std::int64_t created_unix_ms = 0;  // excluded from the checksum
};

// Versioned self-describing JSON with an integrity checksum over the model
// payload. Loading verifies the checksum and version and reproduces
// bit-exact predictions.
void save_model(const ClassifierModel& model, const ModelMetadata& meta,
                const std::filesystem::path& path);

struct LoadedModel {
    ClassifierModel model;
    ModelMetadata meta;
};

LoadedModel load_model(const std::filesystem::path& path,
                       std::optional<ClassifierKind> expected_kind = std::nullopt);

// One JSONL record per decision: {t_ms, sensor, label, score, count, trigger}.
void write_decision_log(const std::vector<DecisionRecord>& decisions, std::ostream& os);

// Key-value configuration files: one `key = value` per line, '#' comments.
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    static KeyValueConfig load(const std::filesystem::path& path);
    static KeyValueConfig parse(std::istream& is);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace tacslip
