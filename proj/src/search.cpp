#include "tacslip/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "tacslip/errors.hpp"
#include "tacslip/metrics.hpp"
#include "tacslip/rng.hpp"

namespace tacslip {

ClassifierModel train_classifier(ClassifierKind kind, const DesignMatrix& m,
                                 const Hyperparams& hp, bool* converged) {
    bool ok = true;
    ClassifierModel model;
    switch (kind) {
        case ClassifierKind::kThreshold:
            model = fit_threshold(m.speeds, m.y, hp.threshold_candidates);
            break;
        case ClassifierKind::kLogReg: {
            LogRegTrainConfig cfg;
            cfg.c = hp.c;
            cfg.tol = hp.logreg_tol;
            cfg.max_iters = hp.logreg_max_iters;
            LogRegTrainResult r = logreg_train(m.x, m.y, cfg);
            ok = r.model.converged;
            model = std::move(r.model);
            break;
        }
        case ClassifierKind::kSvmLinear:
        case ClassifierKind::kSvmGaussian: {
            SvmTrainConfig cfg;
            cfg.kernel = kind == ClassifierKind::kSvmLinear ? KernelKind::kLinear
                                                            : KernelKind::kGaussian;
            cfg.c = hp.c;
            cfg.gamma = hp.gamma;
            cfg.tol = hp.svm_tol;
            cfg.max_passes = hp.svm_max_passes;
            SvmModel svm = svm_train(m.x, m.y, cfg);
            ok = svm.converged;
            model = std::move(svm);
            break;
        }
    }
    if (converged) {
        *converged = ok;
    }
    return model;
}

double evaluate_model(const ClassifierModel& model, const Dataset& ds) {
    std::vector<Label> pred;
    std::vector<Label> truth;
    pred.reserve(ds.samples.size());
    truth.reserve(ds.samples.size());
    for (const FeatureSample& s : ds.samples) {
        pred.push_back(classify(model, s).label);
        truth.push_back(*s.label);
    }
    return macro_f1(pred, truth);
}

const SweepCell* best_cell(const SweepReport& report) {
    const SweepCell* best = nullptr;
    for (const SweepCell& cell : report.cells) {
        if (cell.failed) continue;
        if (!best || cell.macro_f1 > best->macro_f1) {
            best = &cell;
        }
    }
    return best;
}

SweepReport sweep(std::span<const LabeledRun> runs, ClassifierKind kind,
                  std::span<const double> d_values, std::span<const int> n_slip_values,
                  const Hyperparams& hp, const LabelConfig& base_label,
                  std::uint64_t seed, int jobs) {
    if (d_values.empty() || n_slip_values.empty()) {
        throw InputError("sweep: empty grid");
    }
    std::vector<double> ds(d_values.begin(), d_values.end());
    std::vector<int> ns(n_slip_values.begin(), n_slip_values.end());
    std::sort(ds.begin(), ds.end());
    std::sort(ns.begin(), ns.end());

    // One split for the whole grid so cells differ only in labeling and
    // downsampling.
    const RunSplit split = split_runs(runs, derive_seed(seed, 0x5e1ec7));
    std::vector<LabeledRun> train_runs;
    std::vector<LabeledRun> test_runs;
    for (std::size_t i : split.train) train_runs.push_back(runs[i]);
    for (std::size_t i : split.test) test_runs.push_back(runs[i]);

    SweepReport report;
    report.kind = kind;
    report.cells.resize(ds.size() * ns.size());

    auto run_cell = [&](std::size_t index) {
        const double d = ds[index / ns.size()];
        const int n_slip = ns[index % ns.size()];
        SweepCell cell;
        cell.d = d;
        cell.n_slip = n_slip;
        try {
            LabelConfig label = base_label;
            label.n_slip = n_slip;
            Dataset train = label_runs(train_runs, label);
            const std::uint64_t cell_seed = derive_seed(
                seed, static_cast<std::uint64_t>(std::llround(d * 10000.0)) * 1000 +
                          static_cast<std::uint64_t>(n_slip));
            train = downsample_static(train, d, cell_seed);
            cell.train_size = train.samples.size();
            const DesignMatrix m = to_matrix(train);
            ClassifierModel model = train_classifier(kind, m, hp, &cell.converged);
            const Dataset test = label_runs(test_runs, label);
            cell.macro_f1 = evaluate_model(model, test);
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
        report.cells[index] = std::move(cell);
    };

    const std::size_t total = report.cells.size();
    if (jobs <= 1 || total == 1) {
        for (std::size_t i = 0; i < total; ++i) {
            run_cell(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
                run_cell(i);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(total));
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return report;
}

void write_sweep_csv(const SweepReport& report, std::ostream& os) {
    os << "classifier,d,n_slip,macro_f1,converged\n";
    for (const SweepCell& cell : report.cells) {
        os << to_string(report.kind) << ',' << cell.d << ',' << cell.n_slip << ','
           << cell.macro_f1 << ',' << (cell.converged ? "true" : "false") << '\n';
    }
}

double cross_val_score(std::span<const LabeledRun> runs, ClassifierKind kind,
                       const Hyperparams& hp, const LabelConfig& label, double d,
                       int folds, std::uint64_t seed) {
    if (folds < 2) {
        throw InputError("cross_val_score: need at least 2 folds");
    }
    if (runs.size() < static_cast<std::size_t>(folds)) {
        throw InputError("cross_val_score: fewer runs than folds");
    }
    std::vector<std::size_t> order(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0xf01d5));
    rng.shuffle(order);

    double total = 0.0;
    int scored = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<LabeledRun> fit_runs;
        std::vector<LabeledRun> val_runs;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (static_cast<int>(i % folds) == f) {
                val_runs.push_back(runs[order[i]]);
            } else {
                fit_runs.push_back(runs[order[i]]);
            }
        }
        Dataset train = label_runs(fit_runs, label);
        train = downsample_static(train, d, derive_seed(seed, 0xd0f0 + f));
        const DesignMatrix m = to_matrix(train);
        ClassifierModel model = train_classifier(kind, m, hp, nullptr);
        const Dataset val = label_runs(val_runs, label);
        total += evaluate_model(model, val);
        ++scored;
    }
    return total / scored;
}

SearchResult hyperparam_search(std::span<const LabeledRun> runs, ClassifierKind kind,
                               const SearchSpace& space, int budget, int folds,
                               const LabelConfig& label, double d, std::uint64_t seed) {
    if (budget < 1) {
        throw InputError("hyperparam_search: budget must be >= 1");
    }
    if (kind == ClassifierKind::kThreshold) {
        throw InputError("hyperparam_search: the threshold classifier has no search space");
    }
    if (space.gamma_min > space.gamma_max || space.c_min > space.c_max ||
        space.gamma_min <= 0.0 || space.c_min <= 0.0) {
        throw InputError("hyperparam_search: empty or invalid search space");
    }

    Rng rng(derive_seed(seed, 0x5ea6c4));
    SearchResult result;
    for (int b = 0; b < budget; ++b) {
        SearchCandidate cand;
        cand.gamma = rng.log_uniform(space.gamma_min, space.gamma_max);
        cand.c = rng.log_uniform(space.c_min, space.c_max);
        Hyperparams hp;
        hp.gamma = cand.gamma;
        hp.c = cand.c;
        cand.score = cross_val_score(runs, kind, hp, label, d, folds, seed);
        result.evaluated.push_back(cand);
        if (b == 0 || cand.score > result.best.score) {
            result.best = cand;
        }
    }
    return result;
}

}  // namespace tacslip
