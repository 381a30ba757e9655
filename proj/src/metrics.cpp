#include "tacslip/metrics.hpp"

#include "tacslip/errors.hpp"

namespace tacslip {

double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    const double p = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double macro_f1(std::span<const Label> predictions, std::span<const Label> labels) {
    if (predictions.empty()) {
        throw InputError("macro_f1: empty input");
    }
    if (predictions.size() != labels.size()) {
        throw InputError("macro_f1: prediction/label length mismatch");
    }
    double total = 0.0;
    for (const Label positive : {Label::kStatic, Label::kSlip}) {
        std::int64_t tp = 0;
        std::int64_t fp = 0;
        std::int64_t fn = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const bool pred_pos = predictions[i] == positive;
            const bool true_pos = labels[i] == positive;
            tp += pred_pos && true_pos;
            fp += pred_pos && !true_pos;
            fn += !pred_pos && true_pos;
        }
        total += f1_score(tp, fp, fn);
    }
    return total / 2.0;
}

}  // namespace tacslip
