#include "tacslip/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tacslip/errors.hpp"
#include "tacslip/features.hpp"
#include "tacslip/rng.hpp"

namespace tacslip {

std::int64_t find_onset(std::span<const HeightSample> height, double fall_threshold_mm) {
    if (height.empty()) {
        throw InputError("find_onset: empty height trace");
    }
    if (fall_threshold_mm <= 0.0) {
        throw InputError("find_onset: fall threshold must be positive");
    }
    const std::size_t n_base = std::min<std::size_t>(10, height.size());
    std::vector<double> base(n_base);
    for (std::size_t i = 0; i < n_base; ++i) {
        base[i] = height[i].height_mm;
    }
    std::sort(base.begin(), base.end());
    const double baseline = n_base % 2 == 1
                                ? base[n_base / 2]
                                : 0.5 * (base[n_base / 2 - 1] + base[n_base / 2]);
    for (const HeightSample& h : height) {
        if (h.height_mm < baseline - fall_threshold_mm) {
            return h.t_ms;
        }
    }
    return -1;
}

Dataset label_run(const LabeledRun& run, const LabelConfig& config) {
    if (config.n_slip < 1 || config.n_slip > 15) {
        throw InputError("label_run: n_slip must be in [1, 15]");
    }
    const std::int64_t onset = find_onset(run.height, config.fall_threshold_mm);

    Dataset ds;
    ds.onset_found = onset >= 0;
    for (const auto& stream : run.sensors) {
        if (stream.empty()) {
            continue;
        }
        if (stream.size() < 2) {
            throw InputError("label_run: sensor stream needs at least 2 frames");
        }
        int slip_taken = 0;
        for (std::size_t k = 1; k < stream.size(); ++k) {
            FeatureSample s = featurize(stream[k - 1], stream[k]);
            if (onset < 0 || s.t_ms < onset) {
                s.label = Label::kStatic;
            } else if (slip_taken < config.n_slip) {
                s.label = Label::kSlip;
                ++slip_taken;
            } else {
                continue;  // past the slip window; the tail is not labeled
            }
            ds.provenance.push_back(
                {run.run_id, stream[k].sensor_id, static_cast<int>(k)});
            if (*s.label == Label::kStatic) {
                ++ds.static_count;
            } else {
                ++ds.slip_count;
            }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

Dataset label_runs(std::span<const LabeledRun> runs, const LabelConfig& config) {
    Dataset all;
    for (const LabeledRun& run : runs) {
        Dataset one = label_run(run, config);
        all.onset_found |= one.onset_found;
        all.static_count += one.static_count;
        all.slip_count += one.slip_count;
        all.samples.insert(all.samples.end(),
                           std::make_move_iterator(one.samples.begin()),
                           std::make_move_iterator(one.samples.end()));
        all.provenance.insert(all.provenance.end(), one.provenance.begin(),
                              one.provenance.end());
    }
    return all;
}

Dataset downsample_static(const Dataset& ds, double d, std::uint64_t seed) {
    if (!(d > 0.0 && d <= 1.0)) {
        throw InputError("downsample_static: d must be in (0, 1]");
    }
    if (d == 1.0) {
        return ds;
    }
    std::vector<std::size_t> static_idx;
    static_idx.reserve(ds.static_count);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        if (ds.samples[i].label == Label::kStatic) {
            static_idx.push_back(i);
        }
    }
    const std::size_t keep =
        static_cast<std::size_t>(std::floor(d * static_cast<double>(static_idx.size())));

    // Partial Fisher-Yates; the first `keep` entries are the retained set.
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + rng.below(static_idx.size() - i);
        std::swap(static_idx[i], static_idx[j]);
    }
    std::vector<bool> keep_mask(ds.samples.size(), false);
    for (std::size_t i = 0; i < keep; ++i) {
        keep_mask[static_idx[i]] = true;
    }

    Dataset out;
    out.onset_found = ds.onset_found;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const bool is_static = ds.samples[i].label == Label::kStatic;
        if (is_static && !keep_mask[i]) {
            continue;
        }
        out.samples.push_back(ds.samples[i]);
        out.provenance.push_back(ds.provenance[i]);
        if (is_static) {
            ++out.static_count;
        } else {
            ++out.slip_count;
        }
    }
    return out;
}

RunSplit split_runs(std::span<const LabeledRun> runs, std::uint64_t seed) {
    if (runs.size() < 2) {
        throw InputError("split_runs: need at least 2 runs");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        groups[runs[i].meta.grasp_tag].push_back(i);
    }
    Rng rng(seed);
    RunSplit split;
    for (auto& [tag, idx] : groups) {
        rng.shuffle(idx);
        const std::size_t n_train = idx.size() / 2;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            (k < n_train ? split.train : split.test).push_back(idx[k]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

DesignMatrix to_matrix(const Dataset& ds) {
    DesignMatrix m;
    m.x.reserve(ds.samples.size());
    m.y.reserve(ds.samples.size());
    m.speeds.reserve(ds.samples.size());
    for (const FeatureSample& s : ds.samples) {
        if (!s.label) {
            throw InputError("to_matrix: unlabeled sample");
        }
        m.x.emplace_back(s.features.begin(), s.features.end());
        m.y.push_back(*s.label);
        m.speeds.push_back(s.mean_speed);
    }
    return m;
}

}  // namespace tacslip
