#include "tacslip/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tacslip/errors.hpp"
#include "tacslip/metrics.hpp"

namespace tacslip {

std::string to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::kThreshold: return "threshold";
        case ClassifierKind::kLogReg: return "logreg";
        case ClassifierKind::kSvmLinear: return "svm-linear";
        case ClassifierKind::kSvmGaussian: return "svm-gaussian";
    }
    return "unknown";
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "threshold") return ClassifierKind::kThreshold;
    if (s == "logreg") return ClassifierKind::kLogReg;
    if (s == "svm-linear") return ClassifierKind::kSvmLinear;
    if (s == "svm-gaussian" || s == "svm") return ClassifierKind::kSvmGaussian;
    throw InputError("unknown classifier kind: " + s);
}

namespace {

Prediction from_score(double score) {
    return Prediction{score >= 0.0 ? Label::kSlip : Label::kStatic, score};
}

void require_both_classes(std::span<const Label> y, const char* who) {
    bool has_static = false;
    bool has_slip = false;
    for (Label l : y) {
        has_static |= l == Label::kStatic;
        has_slip |= l == Label::kSlip;
    }
    if (!has_static || !has_slip) {
        throw InputError(std::string(who) + ": training data must contain both classes");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Threshold

Prediction threshold_classify(const VelocityField& dxy, const ThresholdModel& model) {
    double mx = 0.0;
    double my = 0.0;
    for (const Vec2& v : dxy) {
        mx += v.x;
        my += v.y;
    }
    return threshold_classify_speed(std::hypot(mx / kPinCount, my / kPinCount), model);
}

Prediction threshold_classify_speed(double mean_speed, const ThresholdModel& model) {
    return from_score(mean_speed - model.threshold);
}

ThresholdModel fit_threshold(std::span<const double> mean_speeds,
                             std::span<const Label> labels,
                             int n_candidates) {
    if (mean_speeds.size() != labels.size() || mean_speeds.empty()) {
        throw InputError("fit_threshold: bad input sizes");
    }
    if (n_candidates < 2) {
        throw InputError("fit_threshold: need at least 2 candidates");
    }
    require_both_classes(labels, "fit_threshold");

    double sum_static = 0.0;
    double sum_slip = 0.0;
    std::size_t n_static = 0;
    std::size_t n_slip = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Label::kStatic) {
            sum_static += mean_speeds[i];
            ++n_static;
        } else {
            sum_slip += mean_speeds[i];
            ++n_slip;
        }
    }
    const double lo = sum_static / n_static;
    const double hi = sum_slip / n_slip;

    std::vector<double> candidates(n_candidates);
    for (int k = 0; k < n_candidates; ++k) {
        candidates[k] = lo + (hi - lo) * k / (n_candidates - 1);
    }
    std::sort(candidates.begin(), candidates.end());

    double best_t = candidates.front();
    double best_f1 = -1.0;
    std::vector<Label> pred(labels.size());
    for (double t : candidates) {
        for (std::size_t i = 0; i < mean_speeds.size(); ++i) {
            pred[i] = mean_speeds[i] >= t ? Label::kSlip : Label::kStatic;
        }
        const double f1 = macro_f1(pred, labels);
        if (f1 > best_f1) {  // ties keep the lowest threshold
            best_f1 = f1;
            best_t = t;
        }
    }
    // The model invariant demands a strictly positive threshold.
    if (best_t <= 0.0) {
        best_t = std::numeric_limits<double>::min();
    }
    return ThresholdModel{best_t};
}

// ---------------------------------------------------------------------------
// Logistic regression

double sigmoid(double score) { return 1.0 / (1.0 + std::exp(-score)); }

Prediction logreg_predict(std::span<const double> x, const LogRegModel& model) {
    if (x.size() + 1 != model.theta.size()) {
        throw InputError("logreg_predict: feature dimension mismatch");
    }
    double score = model.theta[0];
    for (std::size_t j = 0; j < x.size(); ++j) {
        score += model.theta[j + 1] * x[j];
    }
    return from_score(score);
}

namespace {

double raw_score(const std::vector<double>& theta, const std::vector<double>& xi) {
    double s = theta[0];
    for (std::size_t j = 0; j < xi.size(); ++j) {
        s += theta[j + 1] * xi[j];
    }
    return s;
}

// log(1 + exp(s)) without overflow
double softplus(double s) {
    return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s)));
}

}  // namespace

double logreg_loss(const std::vector<std::vector<double>>& x,
                   std::span<const Label> y,
                   std::span<const double> theta,
                   double c) {
    const std::vector<double> th(theta.begin(), theta.end());
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = raw_score(th, x[i]);
        const double yi = y[i] == Label::kSlip ? 1.0 : 0.0;
        // -[y log p + (1-y) log(1-p)] = softplus(s) - y*s
        loss += softplus(s) - yi * s;
    }
    double penalty = 0.0;
    for (std::size_t j = 1; j < th.size(); ++j) {
        penalty += th[j] * th[j];
    }
    return loss + penalty / (2.0 * c);
}

void logreg_gradient(const std::vector<std::vector<double>>& x,
                     std::span<const Label> y,
                     std::span<const double> theta,
                     double c,
                     std::span<double> grad_out) {
    const std::vector<double> th(theta.begin(), theta.end());
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = raw_score(th, x[i]);
        const double yi = y[i] == Label::kSlip ? 1.0 : 0.0;
        const double resid = sigmoid(s) - yi;
        grad_out[0] += resid;
        for (std::size_t j = 0; j < x[i].size(); ++j) {
            grad_out[j + 1] += resid * x[i][j];
        }
    }
    for (std::size_t j = 1; j < th.size(); ++j) {
        grad_out[j] += th[j] / c;
    }
}

LogRegTrainResult logreg_train(const std::vector<std::vector<double>>& x,
                               std::span<const Label> y,
                               const LogRegTrainConfig& config) {
    if (x.empty() || x.size() != y.size()) {
        throw InputError("logreg_train: bad input sizes");
    }
    require_both_classes(y, "logreg_train");
    if (config.c <= 0.0) {
        throw InputError("logreg_train: c must be positive");
    }
    const std::size_t dim = x[0].size() + 1;
    for (const auto& row : x) {
        if (row.size() + 1 != dim) {
            throw InputError("logreg_train: ragged feature matrix");
        }
    }

    LogRegTrainResult result;
    std::vector<double> theta(dim, 0.0);
    std::vector<double> grad(dim, 0.0);
    std::vector<double> trial(dim, 0.0);
    double loss = logreg_loss(x, y, theta, config.c);
    double step = 1.0;
    bool converged = false;
    int iter = 0;

    for (; iter < config.max_iters; ++iter) {
        result.loss_trace.push_back(loss);
        logreg_gradient(x, y, theta, config.c, grad);

        double gmax = 0.0;
        double gsq = 0.0;
        for (double g : grad) {
            gmax = std::max(gmax, std::abs(g));
            gsq += g * g;
        }
        if (gmax < config.tol) {
            converged = true;
            break;
        }

        // Backtracking line search with the Armijo condition.
        step = std::min(step * 2.0, 1e6);
        double new_loss = std::numeric_limits<double>::infinity();
        while (true) {
            for (std::size_t j = 0; j < dim; ++j) {
                trial[j] = theta[j] - step * grad[j];
            }
            new_loss = logreg_loss(x, y, trial, config.c);
            if (new_loss <= loss - 1e-4 * step * gsq) {
                break;
            }
            step *= 0.5;
            if (step < 1e-18) {
                break;  // no descent step found; gradient is numerically flat
            }
        }
        if (!std::isfinite(new_loss)) {
            throw NumericError("logreg_train: objective became non-finite");
        }
        if (new_loss >= loss && step < 1e-18) {
            break;
        }
        theta.swap(trial);
        loss = new_loss;
    }

    result.model.theta = std::move(theta);
    result.model.c = config.c;
    result.model.converged = converged;
    result.model.iterations = iter;
    return result;
}

// ---------------------------------------------------------------------------
// SVM

double kernel_eval(KernelKind kernel, double gamma,
                   std::span<const double> u, std::span<const double> v) {
    if (kernel == KernelKind::kLinear) {
        double dot = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            dot += u[j] * v[j];
        }
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double d = u[j] - v[j];
        dist2 += d * d;
    }
    return std::exp(-gamma * dist2);
}

Prediction svm_predict(std::span<const double> x, const SvmModel& model) {
    if (!model.support_vectors.empty() && model.support_vectors[0].size() != x.size()) {
        throw InputError("svm_predict: feature dimension mismatch");
    }
    double score = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        score += model.coeffs[i] * kernel_eval(model.kernel, model.gamma, model.support_vectors[i], x);
    }
    return from_score(score);
}

double svm_dual_objective(const SvmModel& model) {
    double sum_alpha = 0.0;
    for (double c : model.coeffs) {
        sum_alpha += std::abs(c);
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        for (std::size_t j = 0; j < model.support_vectors.size(); ++j) {
            quad += model.coeffs[i] * model.coeffs[j] *
                    kernel_eval(model.kernel, model.gamma,
                                model.support_vectors[i], model.support_vectors[j]);
        }
    }
    return sum_alpha - 0.5 * quad;
}

SvmModel svm_train(const std::vector<std::vector<double>>& x,
                   std::span<const Label> y,
                   const SvmTrainConfig& config) {
    if (x.empty() || x.size() != y.size()) {
        throw InputError("svm_train: bad input sizes");
    }
    require_both_classes(y, "svm_train");
    if (config.c <= 0.0) {
        throw InputError("svm_train: c must be positive");
    }
    if (config.kernel == KernelKind::kGaussian && config.gamma <= 0.0) {
        throw InputError("svm_train: gamma must be positive for the gaussian kernel");
    }

    const std::size_t n = x.size();
    const double c = config.c;
    std::vector<double> sign(n);
    for (std::size_t i = 0; i < n; ++i) {
        sign[i] = y[i] == Label::kSlip ? 1.0 : -1.0;
    }

    // Dense kernel matrix; the training sets here stay in the low thousands.
    if (n > 8000) {
        throw NumericError("svm_train: training set too large for the dense solver");
    }
    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = kernel_eval(config.kernel, config.gamma, x[i], x[j]);
            kmat[i * n + j] = k;
            kmat[j * n + i] = k;
        }
    }
    auto q = [&](std::size_t i, std::size_t j) {
        return sign[i] * sign[j] * kmat[i * n + j];
    };

    // Minimize 1/2 a'Qa - e'a subject to 0 <= a <= C, sum a_i y_i = 0,
    // picking the maximal violating pair each round.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    const long long max_iter =
        std::max<long long>(1000, static_cast<long long>(config.max_passes) * static_cast<long long>(n));
    long long iter = 0;
    bool converged = false;
    double m_up = 0.0;
    double m_low = 0.0;

    auto in_up = [&](std::size_t i) {
        return (sign[i] > 0 && alpha[i] < c) || (sign[i] < 0 && alpha[i] > 0);
    };
    auto in_low = [&](std::size_t i) {
        return (sign[i] > 0 && alpha[i] > 0) || (sign[i] < 0 && alpha[i] < c);
    };

    for (; iter < max_iter; ++iter) {
        std::size_t i_up = n;
        std::size_t i_low = n;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = -sign[i] * grad[i];
            if (in_up(i) && v > m_up) {
                m_up = v;
                i_up = i;
            }
            if (in_low(i) && v < m_low) {
                m_low = v;
                i_low = i;
            }
        }
        if (i_up == n || i_low == n || m_up - m_low < config.tol) {
            converged = true;
            break;
        }

        const std::size_t i = i_up;
        const std::size_t j = i_low;
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];

        // Either branch's curvature is ||phi_i - phi_j||^2.
        if (sign[i] != sign[j]) {
            double quad = kmat[i * n + i] + kmat[j * n + j] - 2.0 * kmat[i * n + j];
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            double quad = kmat[i * n + i] + kmat[j * n + j] - 2.0 * kmat[i * n + j];
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = sum;
                }
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) {
            break;  // no representable progress left; converged stays false
        }
        for (std::size_t k = 0; k < n; ++k) {
            grad[k] += q(k, i) * dai + q(k, j) * daj;
        }
    }

    // Bias from the free support vectors, else from the violation bounds.
    double bias_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-8 && alpha[i] < c - 1e-8) {
            bias_sum += -sign[i] * grad[i];
            ++n_free;
        }
    }
    double bias = 0.0;
    if (n_free > 0) {
        bias = bias_sum / n_free;
    } else if (std::isfinite(m_up) && std::isfinite(m_low)) {
        bias = (m_up + m_low) / 2.0;
    }

    SvmModel model;
    model.kernel = config.kernel;
    model.gamma = config.gamma;
    model.c = c;
    model.bias = bias;
    model.converged = converged;
    model.iterations = iter;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-8) {
            model.support_vectors.push_back(x[i]);
            model.coeffs.push_back(alpha[i] * sign[i]);
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Uniform interface

ClassifierKind kind_of(const ClassifierModel& model) {
    if (std::holds_alternative<ThresholdModel>(model)) return ClassifierKind::kThreshold;
    if (std::holds_alternative<LogRegModel>(model)) return ClassifierKind::kLogReg;
    const auto& svm = std::get<SvmModel>(model);
    return svm.kernel == KernelKind::kLinear ? ClassifierKind::kSvmLinear
                                             : ClassifierKind::kSvmGaussian;
}

Prediction classify(const ClassifierModel& model, const FeatureSample& sample) {
    if (const auto* t = std::get_if<ThresholdModel>(&model)) {
        return threshold_classify_speed(sample.mean_speed, *t);
    }
    if (const auto* lr = std::get_if<LogRegModel>(&model)) {
        return logreg_predict(sample.features, *lr);
    }
    return svm_predict(sample.features, std::get<SvmModel>(model));
}

}  // namespace tacslip
