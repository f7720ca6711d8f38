#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "engage/models/classifier.hpp"

namespace engage::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;  // "param[index]"
  std::size_t checked = 0;
};

// Compares accumulate() gradients of the mean batch loss with central
// differences. Dropout masks are frozen by re-seeding the mask generator with
// dropout_seed for every evaluation. Relative error is
// |a - n| / max(|a|, |n|, floor).
GradCheckResult finite_difference_check(Classifier& model, std::span<const ModelInput> x,
                                        std::span<const int> y, std::uint64_t dropout_seed,
                                        double h = 1e-5, double floor = 1e-6);

}  // namespace engage::testing
