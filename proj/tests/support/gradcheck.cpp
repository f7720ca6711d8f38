#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace engage::testing {

namespace {
double batch_loss(const Classifier& model, std::span<const ModelInput> x, std::span<const int> y,
                  std::uint64_t seed) {
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += model.loss(x[i], y[i], &rng);
  return total / static_cast<double>(x.size());
}
}  // namespace

GradCheckResult finite_difference_check(Classifier& model, std::span<const ModelInput> x,
                                        std::span<const int> y, std::uint64_t dropout_seed, double h,
                                        double floor) {
  model.params().zero_grad();
  {
    Rng rng(dropout_seed);
    for (std::size_t i = 0; i < x.size(); ++i)
      model.accumulate(x[i], y[i], 1.0 / static_cast<double>(x.size()), &rng);
  }
  GradCheckResult out;
  for (auto& p : model.params()) {
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      double& v = p.value.data()[k];
      const double keep = v;
      v = keep + h;
      const double up = batch_loss(model, x, y, dropout_seed);
      v = keep - h;
      const double down = batch_loss(model, x, y, dropout_seed);
      v = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p.grad.data()[k];
      const double err =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++out.checked;
      if (err > out.max_relative_error) {
        out.max_relative_error = err;
        out.worst = p.name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return out;
}

}  // namespace engage::testing
