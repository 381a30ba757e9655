#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tacslip/types.hpp"

namespace tacslip {

struct HeightSample {
    std::int64_t t_ms = 0;
    double height_mm = 0.0;
};

struct RunMeta {
    std::string object_name = "synthetic";
    std::string grasp_tag;        // stratification key for splits; may be empty
    double release_speed = 0.0;   // mm/s (rail) or grip fraction per frame (grasp)
    std::int64_t onset_t_ms = -1; // marker-rule slip onset; -1 when the run never slips
    int onset_frame = -1;         // frame index of the onset on sensor 0
    std::int64_t motion_onset_t_ms = -1;  // first frame the object body actually moved
    std::uint64_t seed = 0;
    std::string config_hash;
};

// One recorded trial: per-sensor frame streams plus the tracked object height.
struct LabeledRun {
    std::string run_id;
    std::vector<std::vector<PinFrame>> sensors;
    std::vector<HeightSample> height;
    RunMeta meta;
};

struct SampleOrigin {
    std::string run_id;
    int sensor_id = 0;
    int frame_index = 0;
};

struct Dataset {
    std::vector<FeatureSample> samples;
    std::vector<SampleOrigin> provenance;
    std::size_t static_count = 0;
    std::size_t slip_count = 0;
    bool onset_found = false;
};

struct LabelConfig {
    int n_slip = 13;                // frames kept in the slip class after onset
    double fall_threshold_mm = 2.0; // drop below the baseline that marks the onset
};

// First height-trace timestamp where the object sits more than
// fall_threshold_mm below the baseline (median of the first 10 samples),
// or -1 when it never does. Throws InputError on an empty trace.
std::int64_t find_onset(std::span<const HeightSample> height, double fall_threshold_mm);

// Featurize consecutive frames of every sensor stream and label them against
// the height trace: samples strictly before the onset are static, the first
// n_slip samples at/after the onset per sensor are slip, anything later is
// dropped.
Dataset label_run(const LabeledRun& run, const LabelConfig& config);

Dataset label_runs(std::span<const LabeledRun> runs, const LabelConfig& config);

// Keeps floor(d * static_count) static samples chosen uniformly without
// replacement and every slip sample. Deterministic per seed.
Dataset downsample_static(const Dataset& ds, double d, std::uint64_t seed);

struct RunSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// 50/50 split at run granularity, stratified by grasp_tag when present.
// Frames of one run never straddle the split. Throws InputError below 2 runs.
RunSplit split_runs(std::span<const LabeledRun> runs, std::uint64_t seed);

struct DesignMatrix {
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    std::vector<double> speeds;  // per-sample mean velocity norms
};

DesignMatrix to_matrix(const Dataset& ds);

}  // namespace tacslip
