#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tacslip/classifiers.hpp"
#include "tacslip/dataset.hpp"

namespace tacslip {

struct Hyperparams {
    double gamma = 0.02;  // kernel scale matched to the feature magnitudes
    double c = 4.0;
    int threshold_candidates = 10;
    double logreg_tol = 1e-6;
    int logreg_max_iters = 5000;
    double svm_tol = 1e-3;
    int svm_max_passes = 200;
};

// Train one classifier of the given kind on a labeled design matrix.
ClassifierModel train_classifier(ClassifierKind kind, const DesignMatrix& m,
                                 const Hyperparams& hp, bool* converged = nullptr);

// Macro-F1 of a trained model over a labeled dataset.
double evaluate_model(const ClassifierModel& model, const Dataset& ds);

struct SweepCell {
    double d = 1.0;
    int n_slip = 13;
    double macro_f1 = 0.0;
    bool converged = true;
    std::size_t train_size = 0;
    bool failed = false;
    std::string error;
};

struct SweepReport {
    ClassifierKind kind = ClassifierKind::kSvmGaussian;
    std::vector<SweepCell> cells;  // d ascending, then n_slip ascending
};

const SweepCell* best_cell(const SweepReport& report);

// For every (d, n_slip): label, split once per seed at run granularity,
// downsample the training half, train, and score on the full test half.
// Cell failures are recorded, not fatal. jobs > 1 runs cells in parallel;
// results are identical either way.
SweepReport sweep(std::span<const LabeledRun> runs, ClassifierKind kind,
                  std::span<const double> d_values, std::span<const int> n_slip_values,
                  const Hyperparams& hp, const LabelConfig& base_label,
                  std::uint64_t seed, int jobs = 1);

// Header: classifier,d,n_slip,macro_f1,converged
void write_sweep_csv(const SweepReport& report, std::ostream& os);

struct SearchSpace {
    double gamma_min = 1e-2;
    double gamma_max = 1e2;
    double c_min = 1e-2;
    double c_max = 1e2;
};

struct SearchCandidate {
    double gamma = 1.0;
    double c = 1.0;
    double score = 0.0;
};

struct SearchResult {
    SearchCandidate best;
    std::vector<SearchCandidate> evaluated;  // in sampling order
};

// k-fold cross-validated macro-F1 of one hyperparameter point, folds cut at
// run granularity; the training folds are downsampled, the validation fold
// is not.
double cross_val_score(std::span<const LabeledRun> runs, ClassifierKind kind,
                       const Hyperparams& hp, const LabelConfig& label, double d,
                       int folds, std::uint64_t seed);

// Random search: budget points sampled log-uniformly from the space,
// scored by cross_val_score, best returned. Deterministic per seed.
SearchResult hyperparam_search(std::span<const LabeledRun> runs, ClassifierKind kind,
                               const SearchSpace& space, int budget, int folds,
                               const LabelConfig& label, double d, std::uint64_t seed);

}  // namespace tacslip
