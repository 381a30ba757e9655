#pragma once

#include <cstdint>
#include <span>

#include "tacslip/types.hpp"

namespace tacslip {

// F1 = 2PR / (P + R) with P = tp/(tp+fp) and R = tp/(tp+fn).
// Any 0/0 is defined as 0.
double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn);

// Unweighted mean of the per-class F1 scores over {static, slip}.
// Throws InputError on empty or mismatched inputs.
double macro_f1(std::span<const Label> predictions, std::span<const Label> labels);

}  // namespace tacslip
