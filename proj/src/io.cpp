#include "tacslip/io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "tacslip/errors.hpp"
#include "tacslip/hash.hpp"

namespace tacslip {

using nlohmann::json;

namespace {

json meta_to_json(const RunMeta& m) {
    return json{{"object", m.object_name},
                {"grasp_tag", m.grasp_tag},
                {"release_speed", m.release_speed},
                {"onset_t_ms", m.onset_t_ms},
                {"onset_frame", m.onset_frame},
                {"motion_onset_t_ms", m.motion_onset_t_ms}};
}

RunMeta meta_from_json(const json& j) {
    RunMeta m;
    m.object_name = j.value("object", "");
    m.grasp_tag = j.value("grasp_tag", "");
    m.release_speed = j.value("release_speed", 0.0);
    m.onset_t_ms = j.value("onset_t_ms", static_cast<std::int64_t>(-1));
    m.onset_frame = j.value("onset_frame", -1);
    m.motion_onset_t_ms = j.value("motion_onset_t_ms", static_cast<std::int64_t>(-1));
    return m;
}

}  // namespace

void write_run_jsonl(const LabeledRun& run, std::ostream& os) {
    json header{{"schema", "tacslip/run"},
                {"version", kRunSchemaVersion},
                {"run_id", run.run_id},
                {"seed", run.meta.seed},
                {"config_hash", run.meta.config_hash},
                {"metadata", meta_to_json(run.meta)}};
    os << header.dump() << '\n';

    // Global time order, height records before frames at equal timestamps.
    struct Row {
        std::int64_t t;
        int kind;  // 0 height, 1 frame
        int sensor;
        std::size_t index;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < run.height.size(); ++i) {
        rows.push_back({run.height[i].t_ms, 0, -1, i});
    }
    for (std::size_t s = 0; s < run.sensors.size(); ++s) {
        for (std::size_t i = 0; i < run.sensors[s].size(); ++i) {
            rows.push_back({run.sensors[s][i].t_ms, 1, static_cast<int>(s), i});
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.sensor < b.sensor;
    });

    for (const Row& row : rows) {
        if (row.kind == 0) {
            const HeightSample& h = run.height[row.index];
            os << json{{"t_ms", h.t_ms}, {"height_mm", h.height_mm}}.dump() << '\n';
        } else {
            const PinFrame& f = run.sensors[row.sensor][row.index];
            json pins = json::array();
            for (const Vec2& p : f.pins) {
                pins.push_back(json::array({p.x, p.y}));
            }
            os << json{{"t_ms", f.t_ms}, {"sensor", f.sensor_id}, {"pins", pins}}.dump()
               << '\n';
        }
    }
}

void write_run_file(const LabeledRun& run, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw InputError("cannot open for writing: " + path.string());
    }
    write_run_jsonl(run, os);
}

LabeledRun read_run_jsonl(std::istream& is) {
    LabeledRun run;
    std::string line;
    bool header_seen = false;
    std::vector<std::int64_t> last_t;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw InputError(std::string("run file: bad JSONL line: ") + e.what());
        }
        if (!header_seen) {
            if (!j.contains("schema") || j["schema"] != "tacslip/run") {
                throw InputError("run file: missing or wrong schema header");
            }
            const int version = j.value("version", -1);
            if (version != kRunSchemaVersion) {
                throw InputError("run file: unsupported schema version " +
                                 std::to_string(version));
            }
            run.run_id = j.value("run_id", "");
            run.meta = meta_from_json(j.value("metadata", json::object()));
            run.meta.seed = j.value("seed", static_cast<std::uint64_t>(0));
            run.meta.config_hash = j.value("config_hash", "");
            header_seen = true;
            continue;
        }
        if (j.contains("pins")) {
            PinFrame f;
            f.t_ms = j.at("t_ms").get<std::int64_t>();
            f.sensor_id = j.at("sensor").get<int>();
            const json& pins = j.at("pins");
            if (!pins.is_array() || pins.size() != kPinCount) {
                throw InputError("run file: pins array must have exactly 30 entries");
            }
            for (int i = 0; i < kPinCount; ++i) {
                f.pins[i].x = pins[i].at(0).get<double>();
                f.pins[i].y = pins[i].at(1).get<double>();
            }
            if (f.sensor_id < 0 || f.sensor_id > 15) {
                throw InputError("run file: sensor id out of range");
            }
            if (run.sensors.size() <= static_cast<std::size_t>(f.sensor_id)) {
                run.sensors.resize(f.sensor_id + 1);
                last_t.resize(f.sensor_id + 1, std::numeric_limits<std::int64_t>::min());
            }
            if (f.t_ms < last_t[f.sensor_id]) {
                throw InputError("run file: frame timestamps must be non-decreasing per sensor");
            }
            last_t[f.sensor_id] = f.t_ms;
            run.sensors[f.sensor_id].push_back(f);
        } else if (j.contains("height_mm")) {
            run.height.push_back(
                {j.at("t_ms").get<std::int64_t>(), j.at("height_mm").get<double>()});
        }
        // other record types (e.g. scenario summaries) are skipped
    }
    if (!header_seen) {
        throw InputError("run file: empty or missing header");
    }
    return run;
}

LabeledRun read_run_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open run file: " + path.string());
    }
    try {
        return read_run_jsonl(is);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::vector<LabeledRun> read_runs_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw InputError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<LabeledRun> runs;
    runs.reserve(files.size());
    for (const auto& f : files) {
        runs.push_back(read_run_file(f));
    }
    return runs;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

json model_payload(const ClassifierModel& model, const ModelMetadata& meta) {
    json m;
    if (const auto* t = std::get_if<ThresholdModel>(&model)) {
        m["kind"] = to_string(ClassifierKind::kThreshold);
        m["threshold"] = t->threshold;
    } else if (const auto* lr = std::get_if<LogRegModel>(&model)) {
        m["kind"] = to_string(ClassifierKind::kLogReg);
        m["theta"] = lr->theta;
        m["c"] = lr->c;
        m["converged"] = lr->converged;
        m["iterations"] = lr->iterations;
    } else {
        const auto& svm = std::get<SvmModel>(model);
        m["kind"] = to_string(kind_of(model));
        m["kernel"] = svm.kernel == KernelKind::kLinear ? "linear" : "gaussian";
        m["gamma"] = svm.gamma;
        m["c"] = svm.c;
        m["bias"] = svm.bias;
        m["support_vectors"] = svm.support_vectors;
        m["coeffs"] = svm.coeffs;
        m["converged"] = svm.converged;
        m["iterations"] = svm.iterations;
    }
    m["training"] = json{{"dataset_hash", meta.dataset_hash},
                         {"seed", meta.seed},
                         {"d", meta.d},
                         {"n_slip", meta.n_slip}};
    m["preprocessing"] = meta.feature_layout;
    return m;
}

ClassifierModel model_from_payload(const json& m) {
    const ClassifierKind kind = classifier_kind_from_string(m.at("kind").get<std::string>());
    switch (kind) {
        case ClassifierKind::kThreshold: {
            ThresholdModel t;
            t.threshold = m.at("threshold").get<double>();
            return t;
        }
        case ClassifierKind::kLogReg: {
            LogRegModel lr;
            lr.theta = m.at("theta").get<std::vector<double>>();
            lr.c = m.at("c").get<double>();
            lr.converged = m.value("converged", true);
            lr.iterations = m.value("iterations", 0);
            return lr;
        }
        default: {
            SvmModel svm;
            svm.kernel = m.at("kernel").get<std::string>() == "linear"
                             ? KernelKind::kLinear
                             : KernelKind::kGaussian;
            svm.gamma = m.at("gamma").get<double>();
            svm.c = m.at("c").get<double>();
            svm.bias = m.at("bias").get<double>();
            svm.support_vectors =
                m.at("support_vectors").get<std::vector<std::vector<double>>>();
            svm.coeffs = m.at("coeffs").get<std::vector<double>>();
            svm.converged = m.value("converged", true);
            svm.iterations = m.value("iterations", 0LL);
            return svm;
        }
    }
}

}  // namespace

void save_model(const ClassifierModel& model, const ModelMetadata& meta,
                const std::filesystem::path& path) {
    const json payload = model_payload(model, meta);
    json file{{"schema", "tacslip/model"},
              {"version", kModelSchemaVersion},
              {"created_unix_ms", meta.created_unix_ms},
              {"model", payload},
              {"checksum", hex64(fnv1a(payload.dump()))}};
    std::ofstream os(path);
    if (!os) {
        throw InputError("cannot open for writing: " + path.string());
    }
    os << file.dump(2) << '\n';
}

LoadedModel load_model(const std::filesystem::path& path,
                       std::optional<ClassifierKind> expected_kind) {
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open model file: " + path.string());
    }
    json file;
    try {
        is >> file;
    } catch (const json::exception&) {
        throw InputError("model file corrupt (unparseable): " + path.string());
    }
    if (file.value("schema", "") != "tacslip/model") {
        throw InputError("not a model file: " + path.string());
    }
    const int version = file.value("version", -1);
    if (version != kModelSchemaVersion) {
        throw InputError("unsupported model file version " + std::to_string(version));
    }
    if (!file.contains("model") || !file.contains("checksum")) {
        throw InputError("model file corrupt (missing fields): " + path.string());
    }
    const std::string expected = hex64(fnv1a(file["model"].dump()));
    if (file["checksum"].get<std::string>() != expected) {
        throw InputError("model file checksum mismatch: " + path.string());
    }

    LoadedModel loaded;
    loaded.model = model_from_payload(file["model"]);
    const json& payload = file["model"];
    loaded.meta.feature_layout = payload.value("preprocessing", "");
    if (payload.contains("training")) {
        const json& t = payload["training"];
        loaded.meta.dataset_hash = t.value("dataset_hash", "");
        loaded.meta.seed = t.value("seed", static_cast<std::uint64_t>(0));
        loaded.meta.d = t.value("d", 1.0);
        loaded.meta.n_slip = t.value("n_slip", 13);
    }
    loaded.meta.created_unix_ms = file.value("created_unix_ms", static_cast<std::int64_t>(0));

    if (expected_kind && kind_of(loaded.model) != *expected_kind) {
        throw InputError("model kind mismatch: expected " + to_string(*expected_kind) +
                         ", file holds " + to_string(kind_of(loaded.model)));
    }
    if (loaded.meta.feature_layout != kFeatureLayout &&
        kind_of(loaded.model) != ClassifierKind::kThreshold) {
        throw InputError("model was trained on an incompatible feature layout: " +
                         loaded.meta.feature_layout);
    }
    return loaded;
}

void write_decision_log(const std::vector<DecisionRecord>& decisions, std::ostream& os) {
    for (const DecisionRecord& d : decisions) {
        os << json{{"t_ms", d.t_ms},
                   {"sensor", d.sensor},
                   {"label", d.label == Label::kSlip ? "slip" : "static"},
                   {"score", d.score},
                   {"count", d.count},
                   {"trigger", d.trigger}}
                  .dump()
           << '\n';
    }
}

// ---------------------------------------------------------------------------
// Key-value config files

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open config file: " + path.string());
    }
    return parse(is);
}

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
    KeyValueConfig cfg;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("config line " + std::to_string(line_no) +
                             ": expected key = value");
        }
        cfg.entries_.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return true;
    }
    return false;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            try {
                return std::stod(v);
            } catch (const std::exception&) {
                throw InputError("config key '" + key + "': not a number: " + v);
            }
        }
    }
    return fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            try {
                return std::stoll(v);
            } catch (const std::exception&) {
                throw InputError("config key '" + key + "': not an integer: " + v);
            }
        }
    }
    return fallback;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return fallback;
}

}  // namespace tacslip
