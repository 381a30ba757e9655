#include <doctest.h>

#include <cmath>
#include <vector>

#include "tacslip/classifiers.hpp"
#include "tacslip/errors.hpp"
#include "tacslip/rng.hpp"

using namespace tacslip;

namespace {

VelocityField uniform_field(double x, double y) {
    VelocityField v;
    for (auto& d : v) {
        d = {x, y};
    }
    return v;
}

struct TinyProblem {
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
};

TinyProblem random_3pt_problem(Rng& rng) {
    TinyProblem p;
    for (int i = 0; i < 3; ++i) {
        p.x.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    }
    p.y = {Label::kStatic, Label::kSlip, rng.below(2) ? Label::kSlip : Label::kStatic};
    return p;
}

// Brute-force oracle for the 3-point dual: grid over two alphas, the third
// pinned by the equality constraint.
double grid_dual_max(const TinyProblem& p, KernelKind kernel, double gamma, double c,
                     int steps) {
    double kmat[3][3];
    double sign[3];
    for (int i = 0; i < 3; ++i) {
        sign[i] = p.y[i] == Label::kSlip ? 1.0 : -1.0;
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            kmat[i][j] = kernel_eval(kernel, gamma, p.x[i], p.x[j]);
        }
    }
    double best = -1e300;
    for (int a = 0; a <= steps; ++a) {
        for (int b = 0; b <= steps; ++b) {
            double alpha[3];
            alpha[0] = c * a / steps;
            alpha[1] = c * b / steps;
            // constraint: sum alpha_i y_i = 0
            alpha[2] = -(alpha[0] * sign[0] + alpha[1] * sign[1]) * sign[2];
            if (alpha[2] < 0.0 || alpha[2] > c) continue;
            double quad = 0.0;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    quad += alpha[i] * alpha[j] * sign[i] * sign[j] * kmat[i][j];
                }
            }
            const double obj = alpha[0] + alpha[1] + alpha[2] - 0.5 * quad;
            best = std::max(best, obj);
        }
    }
    return best;
}

}  // namespace

TEST_SUITE_BEGIN("classifiers");

// ---------------------------------------------------------------------------
// Threshold

TEST_CASE("threshold decisions on simple fields") {
    const ThresholdModel model{0.13};

    const Prediction slip = threshold_classify(uniform_field(1.0, 0.0), model);
    CHECK(slip.label == Label::kSlip);
    CHECK(slip.score == doctest::Approx(0.87));

    VelocityField opposed{};
    for (int i = 0; i < kPinCount; ++i) {
        opposed[i] = {i < 15 ? 1.0 : -1.0, 0.0};
    }
    const Prediction cancelled = threshold_classify(opposed, ThresholdModel{1e-9});
    CHECK(cancelled.label == Label::kStatic);  // co-linear cancellation

    const Prediction still = threshold_classify(uniform_field(0.0, 0.0), model);
    CHECK(still.label == Label::kStatic);
    CHECK(still.score == doctest::Approx(-0.13));
}

TEST_CASE("zero mean velocity is static for every positive threshold") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        VelocityField v{};
        double sx = 0.0, sy = 0.0;
        for (int i = 0; i + 1 < kPinCount; ++i) {
            v[i] = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            sx += v[i].x;
            sy += v[i].y;
        }
        v[kPinCount - 1] = {-sx, -sy};  // force exact cancellation
        const double t = rng.uniform(1e-6, 5.0);
        CHECK(threshold_classify(v, ThresholdModel{t}).label == Label::kStatic);
    }
}

TEST_CASE("threshold fit separates a separable set") {
    std::vector<double> v;
    std::vector<Label> y;
    for (int i = 0; i < 40; ++i) {
        v.push_back(0.0);
        y.push_back(Label::kStatic);
    }
    for (int i = 0; i < 10; ++i) {
        v.push_back(1.0);
        y.push_back(Label::kSlip);
    }
    const ThresholdModel model = fit_threshold(v, y, 10);
    CHECK(model.threshold > 0.0);
    CHECK(model.threshold < 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(threshold_classify_speed(v[i], model).label == y[i]);
    }
}

TEST_CASE("threshold fit tie-break is deterministic") {
    // Identical class distributions: every candidate collapses to one value.
    std::vector<double> v{0.5, 0.5, 0.5, 0.5};
    std::vector<Label> y{Label::kStatic, Label::kSlip, Label::kStatic, Label::kSlip};
    const ThresholdModel a = fit_threshold(v, y, 10);
    const ThresholdModel b = fit_threshold(v, y, 10);
    CHECK(a.threshold == b.threshold);
    CHECK(a.threshold > 0.0);
}

TEST_CASE("threshold fit equals an exhaustive scan over the candidate grid") {
    Rng rng(17);
    std::vector<double> v;
    std::vector<Label> y;
    for (int i = 0; i < 200; ++i) {
        const bool slip = rng.below(4) == 0;
        v.push_back(slip ? rng.uniform(0.5, 3.0) : rng.uniform(0.0, 1.0));
        y.push_back(slip ? Label::kSlip : Label::kStatic);
    }
    const ThresholdModel model = fit_threshold(v, y, 10);

    // Oracle: rebuild the same candidate set and scan with an independent F1.
    double mean_static = 0.0, mean_slip = 0.0;
    int n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (y[i] == Label::kStatic) {
            mean_static += v[i];
            ++n0;
        } else {
            mean_slip += v[i];
            ++n1;
        }
    }
    mean_static /= n0;
    mean_slip /= n1;
    double best_f1 = -1.0, best_t = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double t = mean_static + (mean_slip - mean_static) * k / 9.0;
        int tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
        for (std::size_t i = 0; i < v.size(); ++i) {
            const int pred = v[i] >= t ? 1 : 0;
            const int truth = y[i] == Label::kSlip ? 1 : 0;
            for (int cls = 0; cls < 2; ++cls) {
                tp[cls] += pred == cls && truth == cls;
                fp[cls] += pred == cls && truth != cls;
                fn[cls] += pred != cls && truth == cls;
            }
        }
        double f1sum = 0.0;
        for (int cls = 0; cls < 2; ++cls) {
            const double p = tp[cls] + fp[cls] ? double(tp[cls]) / (tp[cls] + fp[cls]) : 0.0;
            const double r = tp[cls] + fn[cls] ? double(tp[cls]) / (tp[cls] + fn[cls]) : 0.0;
            f1sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        }
        const double f1 = f1sum / 2.0;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_t = t;
        }
    }
    CHECK(model.threshold == doctest::Approx(best_t));
}

TEST_CASE("threshold fit rejects single-class data") {
    std::vector<double> v{1.0, 2.0};
    std::vector<Label> y{Label::kSlip, Label::kSlip};
    CHECK_THROWS_AS(fit_threshold(v, y, 10), InputError);
}

// ---------------------------------------------------------------------------
// Logistic regression

TEST_CASE("logreg score and probability") {
    LogRegModel zero;
    zero.theta.assign(kFeatureDim + 1, 0.0);
    FeatureSample s;
    const Prediction p = logreg_predict(s.features, zero);
    CHECK(p.label == Label::kSlip);  // boundary goes to slip
    CHECK(p.score == 0.0);
    CHECK(sigmoid(p.score) == doctest::Approx(0.5));

    LogRegModel m;
    m.theta.assign(3, 0.0);
    m.theta[0] = -1.0;
    m.theta[1] = 1.0;
    std::vector<double> x{2.0, 0.0};
    const Prediction q = logreg_predict(x, m);
    CHECK(q.score == doctest::Approx(1.0));
    CHECK(q.label == Label::kSlip);
    CHECK(sigmoid(q.score) == doctest::Approx(0.7310585786300049));
}

TEST_CASE("logreg predict rejects dimension mismatch") {
    LogRegModel m;
    m.theta.assign(4, 0.0);
    std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(logreg_predict(x, m), InputError);
}

TEST_CASE("logreg symmetric 1-d problem has its boundary at zero") {
    std::vector<std::vector<double>> x{{-1.0}, {1.0}};
    std::vector<Label> y{Label::kStatic, Label::kSlip};
    LogRegTrainConfig cfg;
    cfg.c = 1.0;
    const LogRegTrainResult r = logreg_train(x, y, cfg);
    CHECK(std::abs(r.model.theta[0]) < 1e-6);  // bias vanishes by symmetry
    CHECK(logreg_predict(x[0], r.model).label == Label::kStatic);
    CHECK(logreg_predict(x[1], r.model).label == Label::kSlip);
}

TEST_CASE("initial loss at theta zero is n log 2") {
    Rng rng(5);
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    for (int i = 0; i < 37; ++i) {
        x.push_back({rng.normal(), rng.normal(), rng.normal()});
        y.push_back(rng.below(2) ? Label::kSlip : Label::kStatic);
    }
    std::vector<double> theta(4, 0.0);
    CHECK(logreg_loss(x, y, theta, 1.0) == doctest::Approx(37.0 * std::log(2.0)));
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(1234);
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> row(8);
        for (double& v : row) {
            v = rng.normal();
        }
        const bool slip = rng.below(2) == 1;
        x.push_back(std::move(row));
        y.push_back(slip ? Label::kSlip : Label::kStatic);
    }
    const double c = 2.5;
    for (int point = 0; point < 10; ++point) {
        std::vector<double> theta(9);
        for (double& t : theta) {
            t = rng.normal(0.0, 0.7);
        }
        std::vector<double> grad(9);
        logreg_gradient(x, y, theta, c, grad);
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(theta[j]));
            std::vector<double> lo = theta, hi = theta;
            lo[j] -= h;
            hi[j] += h;
            const double fd =
                (logreg_loss(x, y, hi, c) - logreg_loss(x, y, lo, c)) / (2.0 * h);
            const double denom = std::max(std::abs(fd), 1e-8);
            CHECK(std::abs(grad[j] - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("logreg loss trace never increases") {
    Rng rng(66);
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    for (int i = 0; i < 120; ++i) {
        const bool slip = rng.below(2) == 1;
        x.push_back({rng.normal(slip ? 1.0 : -1.0, 1.0), rng.normal(0.0, 1.0)});
        y.push_back(slip ? Label::kSlip : Label::kStatic);
    }
    const LogRegTrainResult r = logreg_train(x, y, {1.0, 2000, 1e-6});
    REQUIRE(r.loss_trace.size() > 2);
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) {
        CHECK(r.loss_trace[i] <= r.loss_trace[i - 1] + 1e-12);
    }
    CHECK(r.model.converged);
}

TEST_CASE("logreg trained labels match an independent gradient-descent oracle") {
    Rng rng(4242);
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    for (int i = 0; i < 80; ++i) {
        const bool slip = i % 2 == 0;
        x.push_back({rng.normal(slip ? 1.2 : -1.2, 0.8), rng.normal(slip ? 0.5 : -0.5, 0.8)});
        y.push_back(slip ? Label::kSlip : Label::kStatic);
    }
    const double c = 1.0;
    const LogRegTrainResult r = logreg_train(x, y, {c, 500, 1e-6});

    // Oracle: plain fixed-step gradient descent on the same objective,
    // written out longhand.
    std::vector<double> theta(3, 0.0);
    const double step = 0.01;
    for (int iter = 0; iter < 20000; ++iter) {
        std::vector<double> g(3, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double s = theta[0] + theta[1] * x[i][0] + theta[2] * x[i][1];
            const double resid = 1.0 / (1.0 + std::exp(-s)) -
                                 (y[i] == Label::kSlip ? 1.0 : 0.0);
            g[0] += resid;
            g[1] += resid * x[i][0];
            g[2] += resid * x[i][1];
        }
        g[1] += theta[1] / c;
        g[2] += theta[2] / c;
        for (int j = 0; j < 3; ++j) {
            theta[j] -= step * g[j];
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double oracle_score = theta[0] + theta[1] * x[i][0] + theta[2] * x[i][1];
        const Label oracle = oracle_score >= 0 ? Label::kSlip : Label::kStatic;
        CHECK(logreg_predict(x[i], r.model).label == oracle);
    }
}

TEST_CASE("logreg rejects single-class data") {
    std::vector<std::vector<double>> x{{1.0}, {2.0}};
    std::vector<Label> y{Label::kSlip, Label::kSlip};
    CHECK_THROWS_AS(logreg_train(x, y, {}), InputError);
}

// ---------------------------------------------------------------------------
// SVM

TEST_CASE("svm analytic hard-margin solution in 1-d") {
    std::vector<std::vector<double>> x{{0.0}, {2.0}};
    std::vector<Label> y{Label::kStatic, Label::kSlip};
    SvmTrainConfig cfg;
    cfg.kernel = KernelKind::kLinear;
    cfg.c = 10.0;
    cfg.tol = 1e-6;
    const SvmModel m = svm_train(x, y, cfg);
    REQUIRE(m.converged);

    // decision surface at x = 1, canonical margins at 0 and 2
    CHECK(svm_predict(std::vector<double>{0.0}, m).score == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(svm_predict(std::vector<double>{2.0}, m).score == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(svm_predict(std::vector<double>{1.0}, m).score ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-4));
    CHECK(m.bias == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("svm manual linear model scores") {
    SvmModel m;
    m.kernel = KernelKind::kLinear;
    m.bias = -1.0;
    m.support_vectors = {{1.0, 0.0}};
    m.coeffs = {1.0};
    CHECK(svm_predict(std::vector<double>{2.0, 0.0}, m).score == doctest::Approx(1.0));
    CHECK(svm_predict(std::vector<double>{2.0, 0.0}, m).label == Label::kSlip);
    CHECK(svm_predict(std::vector<double>{0.0, 0.0}, m).score == doctest::Approx(-1.0));
    CHECK(svm_predict(std::vector<double>{0.0, 0.0}, m).label == Label::kStatic);
}

TEST_CASE("gaussian kernel at a support vector dominates for large gamma") {
    SvmModel m;
    m.kernel = KernelKind::kGaussian;
    m.gamma = 1e6;
    m.bias = 0.25;
    m.support_vectors = {{0.0, 0.0}, {1.0, 1.0}};
    m.coeffs = {2.0, -3.0};
    const Prediction p = svm_predict(std::vector<double>{0.0, 0.0}, m);
    // K(s0, x) = 1, K(s1, x) ~ 0 => score ~ coeff0 + bias
    CHECK(p.score == doctest::Approx(2.25).epsilon(1e-9));
}

TEST_CASE("svm solves xor with the gaussian kernel") {
    std::vector<std::vector<double>> x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    std::vector<Label> y{Label::kStatic, Label::kStatic, Label::kSlip, Label::kSlip};
    SvmTrainConfig cfg;
    cfg.kernel = KernelKind::kGaussian;
    cfg.gamma = 1.0;
    cfg.c = 10.0;
    cfg.tol = 1e-6;
    const SvmModel m = svm_train(x, y, cfg);
    REQUIRE(m.converged);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(svm_predict(x[i], m).label == y[i]);
    }
}

TEST_CASE("svm dual objective matches the brute-force grid oracle") {
    Rng rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        const TinyProblem p = random_3pt_problem(rng);
        SvmTrainConfig cfg;
        cfg.kernel = KernelKind::kLinear;
        cfg.c = 1.0;
        cfg.tol = 1e-6;
        const SvmModel m = svm_train(p.x, p.y, cfg);
        const double solver_obj = svm_dual_objective(m);
        const double oracle_obj = grid_dual_max(p, KernelKind::kLinear, 1.0, 1.0, 500);
        CHECK(std::abs(solver_obj - oracle_obj) < 1e-4);
    }
}

TEST_CASE("svm dual feasibility invariants hold after training") {
    Rng rng(909);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<std::vector<double>> x;
        std::vector<Label> y;
        const double c = rep % 2 ? 1.0 : 5.0;
        for (int i = 0; i < 60; ++i) {
            const bool slip = i % 2 == 0;
            x.push_back({rng.normal(slip ? 0.8 : -0.8, 1.0), rng.normal(0.0, 1.0)});
            y.push_back(slip ? Label::kSlip : Label::kStatic);
        }
        SvmTrainConfig cfg;
        cfg.kernel = KernelKind::kGaussian;
        cfg.gamma = 0.7;
        cfg.c = c;
        const SvmModel m = svm_train(x, y, cfg);

        double sum_signed = 0.0;
        bool has_pos = false, has_neg = false;
        for (double coeff : m.coeffs) {
            const double alpha = std::abs(coeff);
            CHECK(alpha > 0.0);
            CHECK(alpha <= c + 1e-9);
            sum_signed += coeff;
            has_pos |= coeff > 0;
            has_neg |= coeff < 0;
        }
        CHECK(std::abs(sum_signed) < 1e-6);
        CHECK(has_pos);
        CHECK(has_neg);
    }
}

TEST_CASE("separable data with large c satisfies the margin property") {
    Rng rng(31);
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    for (int i = 0; i < 40; ++i) {
        const bool slip = i % 2 == 0;
        x.push_back({rng.uniform(0.0, 1.0) + (slip ? 2.0 : -2.0), rng.uniform(-1.0, 1.0)});
        y.push_back(slip ? Label::kSlip : Label::kStatic);
    }
    SvmTrainConfig cfg;
    cfg.kernel = KernelKind::kLinear;
    cfg.c = 1000.0;
    cfg.tol = 1e-6;
    const SvmModel m = svm_train(x, y, cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double score = svm_predict(x[i], m).score;
        const double sign = y[i] == Label::kSlip ? 1.0 : -1.0;
        CHECK(sign * score >= 1.0 - 1e-3);
    }
}

TEST_CASE("svm rejects degenerate input") {
    std::vector<std::vector<double>> x{{0.0}, {1.0}};
    std::vector<Label> y{Label::kSlip, Label::kSlip};
    CHECK_THROWS_AS(svm_train(x, y, {}), InputError);

    SvmModel m;
    m.support_vectors = {{1.0, 2.0}};
    m.coeffs = {1.0};
    CHECK_THROWS_AS(svm_predict(std::vector<double>{1.0}, m), InputError);
}

// ---------------------------------------------------------------------------
// Shared decision interface

TEST_CASE("every model kind maps score sign to the label") {
    Rng rng(808);
    std::vector<ClassifierModel> models;
    models.push_back(ThresholdModel{0.3});
    LogRegModel lr;
    lr.theta.assign(kFeatureDim + 1, 0.0);
    for (double& t : lr.theta) {
        t = rng.normal(0.0, 0.2);
    }
    models.push_back(lr);
    SvmModel svm;
    svm.kernel = KernelKind::kGaussian;
    svm.gamma = 0.5;
    svm.bias = rng.normal();
    for (int i = 0; i < 5; ++i) {
        std::vector<double> sv(kFeatureDim);
        for (double& v : sv) {
            v = rng.normal();
        }
        svm.support_vectors.push_back(std::move(sv));
        svm.coeffs.push_back(rng.normal());
    }
    models.push_back(svm);

    for (const ClassifierModel& model : models) {
        for (int rep = 0; rep < 200; ++rep) {
            FeatureSample s;
            for (double& f : s.features) {
                f = rng.normal(0.0, 1.0);
            }
            s.mean_speed = std::abs(rng.normal(0.3, 0.3));
            const Prediction p = classify(model, s);
            CHECK((p.score >= 0.0) == (p.label == Label::kSlip));
        }
    }
}

TEST_CASE("threshold decision statistic scales linearly with the field") {
    Rng rng(515);
    for (int rep = 0; rep < 50; ++rep) {
        VelocityField v{};
        for (auto& d : v) {
            d = {rng.normal(0.2, 0.5), rng.normal(0.0, 0.5)};
        }
        const double c = rng.uniform(0.1, 10.0);
        VelocityField scaled = v;
        for (auto& d : scaled) {
            d.x *= c;
            d.y *= c;
        }
        const ThresholdModel zero{1e-300};
        const double v0 = threshold_classify(v, zero).score;
        const double v1 = threshold_classify(scaled, zero).score;
        CHECK(v1 == doctest::Approx(c * v0).epsilon(1e-9));
    }
}

TEST_SUITE_END();
