#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tacslip/types.hpp"

namespace tacslip {

enum class ClassifierKind { kThreshold, kLogReg, kSvmLinear, kSvmGaussian };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& s);

enum class KernelKind { kLinear, kGaussian };

// ---------------------------------------------------------------------------
// Threshold on the norm of the mean pin velocity.

struct ThresholdModel {
    double threshold = 0.13;  // pixels per frame, > 0
};

Prediction threshold_classify(const VelocityField& dxy, const ThresholdModel& model);
Prediction threshold_classify_speed(double mean_speed, const ThresholdModel& model);

// Evaluates n_candidates evenly spaced thresholds between the per-class mean
// speeds and keeps the one with the best training macro-F1; ties go to the
// lowest threshold. Throws InputError when a class is missing.
ThresholdModel fit_threshold(std::span<const double> mean_speeds,
                             std::span<const Label> labels,
                             int n_candidates = 10);

// ---------------------------------------------------------------------------
// L2-regularized logistic regression.

struct LogRegModel {
    std::vector<double> theta;  // theta[0] is the bias, then one weight per feature
    double c = 1.0;             // regularization strength; larger = weaker penalty
    bool converged = true;
    int iterations = 0;
};

// score = theta0 + sum theta_j x_j; slip iff score >= 0.
Prediction logreg_predict(std::span<const double> x, const LogRegModel& model);

double sigmoid(double score);

// Objective: (1 / 2c) * ||theta_1..m||^2 + sum_i logloss_i (bias unpenalized).
double logreg_loss(const std::vector<std::vector<double>>& x,
                   std::span<const Label> y,
                   std::span<const double> theta,
                   double c);

void logreg_gradient(const std::vector<std::vector<double>>& x,
                     std::span<const Label> y,
                     std::span<const double> theta,
                     double c,
                     std::span<double> grad_out);

struct LogRegTrainConfig {
    double c = 1.0;
    int max_iters = 1000;
    double tol = 1e-6;  // stop when the gradient infinity-norm drops below
};

struct LogRegTrainResult {
    LogRegModel model;
    std::vector<double> loss_trace;  // objective before each accepted step
};

// Full-batch gradient descent with backtracking line search from theta = 0.
// Deterministic. Throws InputError for single-class data, NumericError if
// the objective turns non-finite.
LogRegTrainResult logreg_train(const std::vector<std::vector<double>>& x,
                               std::span<const Label> y,
                               const LogRegTrainConfig& config = {});

// ---------------------------------------------------------------------------
// Soft-margin SVM, dual problem solved by pairwise coordinate ascent.

struct SvmModel {
    KernelKind kernel = KernelKind::kGaussian;
    double gamma = 1.0;  // kernel scale, gaussian only
    double c = 1.0;      // box constraint
    double bias = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coeffs;  // alpha_i * y_i per support vector, nonzero
    bool converged = true;
    long long iterations = 0;
};

double kernel_eval(KernelKind kernel, double gamma,
                   std::span<const double> u, std::span<const double> v);

// score = sum_i coeff_i K(sv_i, x) + bias; slip iff score >= 0.
Prediction svm_predict(std::span<const double> x, const SvmModel& model);

// Dual objective sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij,
// computed from the stored support vectors (zero alphas contribute nothing).
double svm_dual_objective(const SvmModel& model);

struct SvmTrainConfig {
    KernelKind kernel = KernelKind::kGaussian;
    double c = 1.0;
    double gamma = 1.0;
    double tol = 1e-3;      // maximal-violating-pair stopping tolerance
    int max_passes = 200;   // iteration budget, scaled by the sample count
    std::uint64_t seed = 0; // recorded for provenance; pair selection is deterministic
};

// Maximizes the dual via maximal-violating-pair updates. On hitting the
// iteration budget the best-so-far model is returned with converged = false.
// Throws InputError for single-class data.
SvmModel svm_train(const std::vector<std::vector<double>>& x,
                   std::span<const Label> y,
                   const SvmTrainConfig& config = {});

// ---------------------------------------------------------------------------
// Uniform decision interface.

using ClassifierModel = std::variant<ThresholdModel, LogRegModel, SvmModel>;

ClassifierKind kind_of(const ClassifierModel& model);

// Threshold models decide on sample.mean_speed, the others on the features.
Prediction classify(const ClassifierModel& model, const FeatureSample& sample);

}  // namespace tacslip
