#include "hypervae/nn/gradcheck.hpp"

#include "hypervae/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hypervae::nn {

namespace {

std::vector<std::size_t> pick_coordinates(std::size_t size, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= size) return idx;
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                        const ParameterList& params,
                                        const ConstParameterList& analytic,
                                        const GradCheckOptions& options) {
  if (options.stencil != 3 && options.stencil != 5) {
    fail(ErrorCode::invalid_argument, "finite_difference_check: stencil must be 3 or 5");
  }
  if (params.size() != analytic.size()) {
    fail(ErrorCode::dimension_mismatch, "finite_difference_check: tensor count mismatch");
  }
  GradCheckReport report;
  report.tolerance = options.tolerance;
  Rng rng(options.seed);
  const double h = options.step;
  const double base = loss_fn();
  // Below this gradient magnitude, rounding in the loss alone (an ulp of
  // |loss| per evaluation, scaled by the stencil weights and 1/h, summed
  // over a tensor's coordinates) can exceed the tolerance, so comparisons
  // against it are absolute. The factor 10 covers weights up to 1.5 and
  // norms over a few dozen noisy coordinates.
  const double floor =
      std::max(options.scale_floor, 10.0 * std::numeric_limits<double>::epsilon() *
                                        std::abs(base) / (h * options.tolerance));

  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != analytic[t].size()) {
      fail(ErrorCode::dimension_mismatch,
           "finite_difference_check: tensor " + std::to_string(t) + " size mismatch");
    }
    double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0;
    for (std::size_t i : pick_coordinates(params[t].size(), options.max_per_tensor, rng)) {
      double& p = params[t][i];
      const double saved = p;
      auto at = [&](double x) {
        p = x;
        const double v = loss_fn();
        p = saved;
        return v;
      };
      auto estimate = [&](double step) {
        const double d1 = at(saved + step) - at(saved - step);
        if (options.stencil == 3) return d1 / (2.0 * step);
        return (8.0 * d1 - (at(saved + 2.0 * step) - at(saved - 2.0 * step))) / (12.0 * step);
      };
      p = saved + h;
      const double up = loss_fn();
      p = saved - h;
      const double down = loss_fn();
      double up2 = 0.0, down2 = 0.0;
      if (options.stencil == 5) {
        p = saved + 2.0 * h;
        up2 = loss_fn();
        p = saved - 2.0 * h;
        down2 = loss_fn();
      }
      p = saved;

      GradCheckEntry e;
      e.tensor = t;
      e.index = i;
      e.analytic = analytic[t][i];
      e.numeric = options.stencil == 5 ? (8.0 * (up - down) - (up2 - down2)) / (12.0 * h)
                                       : (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(e.analytic), std::abs(e.numeric), floor});
      e.relative_error = std::abs(e.analytic - e.numeric) / scale;
      if (e.relative_error >= options.tolerance) {
        // Smoothness probe. For a twice-differentiable loss the symmetric
        // second difference s(h) = f(x+h) + f(x-h) - 2 f(x) scales as h^2,
        // so s(h) ~ 4 s(h/2). A slope discontinuity within reach of the
        // probes breaks that ratio for at least one step pair.
        auto second = [&](double step) {
          p = saved + step;
          const double a = loss_fn();
          p = saved - step;
          const double b = loss_fn();
          p = saved;
          return a + b - 2.0 * base;
        };
        const double s1 = up + down - 2.0 * base;
        const double s2 = second(h / 2.0);
        const double s4 = second(h / 4.0);
        // Deviations at the rounding level of the loss say nothing: a
        // locally linear loss has second differences that are pure noise.
        const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(base);
        auto broken = [&](double coarse, double fine) {
          return std::abs(coarse - 4.0 * fine) > options.kink_ratio * std::abs(coarse) + noise;
        };
        e.kink = broken(s1, s2) || broken(s2, s4);
        if (options.stencil == 5) e.kink = e.kink || broken(up2 + down2 - 2.0 * base, s1);
        // Convergence probe. Away from kinks the estimate is already settled
        // at this step and halving it moves it far less than the observed
        // error; a wrong analytic gradient stays wrong at every step.
        const double refined = estimate(h / 2.0);
        e.kink = e.kink || std::abs(refined - e.numeric) >
                               options.kink_ratio * std::abs(e.analytic - e.numeric);
      }
      if (e.kink) {
        ++report.kinks;
      } else {
        ++report.checked;
        diff_sq += (e.analytic - e.numeric) * (e.analytic - e.numeric);
        analytic_sq += e.analytic * e.analytic;
        numeric_sq += e.numeric * e.numeric;
      }
      report.entries.push_back(e);
    }
    const double norm_scale = std::max({std::sqrt(analytic_sq), std::sqrt(numeric_sq), floor});
    report.tensor_errors.push_back(std::sqrt(diff_sq) / norm_scale);
    report.max_relative_error = std::max(report.max_relative_error, report.tensor_errors.back());
  }
  return report;
}

}  // namespace hypervae::nn
