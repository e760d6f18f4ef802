#include "requant/search.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "requant/error.hpp"

namespace requant {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_alpha(double alpha) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, alpha);
  return std::string(buf, end);
}

// counts calls, rejects non-finite objective values, optionally records probes
class Prober {
 public:
  Prober(const Objective& objective, GoldenTrace* trace)
      : objective_(objective), trace_(trace) {}

  double operator()(double alpha) {
    const double value = objective_(alpha);
    ++evals_;
    if (!std::isfinite(value))
      throw Error(ErrorCode::kSearchAborted,
                  "objective returned a non-finite value at alpha = " + format_alpha(alpha),
                  format_alpha(alpha));
    if (trace_ != nullptr) {
      trace_->probe_alphas.push_back(alpha);
      trace_->probe_losses.push_back(value);
    }
    return value;
  }

  int64_t evals() const noexcept { return evals_; }

 private:
  const Objective& objective_;
  GoldenTrace* trace_;
  int64_t evals_ = 0;
};

double clamp_unit(double x, double lo) { return std::clamp(x, lo, 1.0); }

}  // namespace

std::string_view to_string(SearchMethod m) {
  switch (m) {
    case SearchMethod::kGolden: return "golden";
    case SearchMethod::kBisection: return "bisection";
    case SearchMethod::kNelderMead: return "nelder-mead";
    case SearchMethod::kGrid: return "grid";
  }
  return "unknown";
}

SearchMethod search_method_from_string(std::string_view name) {
  if (name == "golden") return SearchMethod::kGolden;
  if (name == "bisection") return SearchMethod::kBisection;
  if (name == "nelder-mead") return SearchMethod::kNelderMead;
  if (name == "grid") return SearchMethod::kGrid;
  throw Error(ErrorCode::kInvalidInput, "unknown search method: " + std::string(name));
}

void SearchSettings::validate() const {
  if (!(phi > 0.0) || !(phi < 1.0))
    throw Error(ErrorCode::kInvalidInput, "phi must lie in (0, 1)");
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw Error(ErrorCode::kInvalidInput, "epsilon must lie in (0, 1)");
  if (!(alpha_min > 0.0) || !(alpha_min < 1.0))
    throw Error(ErrorCode::kInvalidInput, "alpha_min must lie in (0, 1)");
}

SearchResult golden_section(const Objective& objective, const SearchSettings& settings,
                            GoldenTrace* trace) {
  settings.validate();
  const auto start = Clock::now();
  const double phi = settings.phi;
  Prober probe(objective, trace);

  double c = settings.alpha_min;
  double d = 1.0;
  double x1 = d - phi * (d - c);
  double x2 = c + phi * (d - c);
  double f1 = probe(x1);
  double f2 = probe(x2);
  // Each iteration contracts the bracket to exactly phi times its width and
  // reuses the surviving probe, so the loop costs one evaluation. The new
  // endpoint coincides with the discarded probe whenever that probe was
  // freshly placed (and always, for the exact golden ratio).
  while (std::fabs(d - c) > settings.epsilon) {
    const double width = d - c;
    if (f1 < f2) {
      d = c + phi * width;
      x2 = x1;  // keep the smaller error as the new right probe
      f2 = f1;
      x1 = d - phi * (d - c);
      f1 = probe(x1);
    } else {
      c = d - phi * width;
      x1 = x2;  // keep the smaller error as the new left probe
      f1 = f2;
      x2 = c + phi * (d - c);
      f2 = probe(x2);
    }
    if (trace != nullptr) trace->bracket_widths.push_back(d - c);
  }

  SearchResult result;
  result.method = SearchMethod::kGolden;
  if (f1 <= f2) {
    result.alpha = x1;
    result.loss = f1;
  } else {
    result.alpha = x2;
    result.loss = f2;
  }
  result.evals = probe.evals();
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SearchResult bisection(const Objective& objective, const SearchSettings& settings) {
  settings.validate();
  const auto start = Clock::now();
  Prober probe(objective, nullptr);
  const double h = settings.epsilon / 4.0;

  double c = settings.alpha_min;
  double d = 1.0;
  while (d - c > settings.epsilon) {
    const double m = 0.5 * (c + d);
    const double rise = probe(m + h) - probe(m - h);
    if (rise > 0.0)
      d = m;  // ascending at m: the minimum is on the left
    else
      c = m;
  }

  SearchResult result;
  result.method = SearchMethod::kBisection;
  result.alpha = 0.5 * (c + d);
  result.loss = probe(result.alpha);
  result.evals = probe.evals();
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SearchResult nelder_mead_1d(const Objective& objective, const SearchSettings& settings) {
  settings.validate();
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;
  constexpr int64_t kBudget = 200;

  const auto start = Clock::now();
  Prober probe(objective, nullptr);
  const double lo = settings.alpha_min;

  double best = clamp_unit(0.5, lo);
  double worst = clamp_unit(0.95, lo);
  double f_best = probe(best);
  double f_worst = probe(worst);
  if (f_worst < f_best) {
    std::swap(best, worst);
    std::swap(f_best, f_worst);
  }

  while (std::fabs(best - worst) > settings.epsilon && probe.evals() < kBudget) {
    // the centroid of all points but the worst is just the best point
    const double reflected = clamp_unit(best + kReflect * (best - worst), lo);
    const double f_reflected = probe(reflected);
    double candidate;
    double f_candidate;
    if (f_reflected < f_best) {
      if (probe.evals() < kBudget) {
        const double expanded = clamp_unit(best + kExpand * (best - worst), lo);
        const double f_expanded = probe(expanded);
        if (f_expanded < f_reflected) {
          candidate = expanded;
          f_candidate = f_expanded;
        } else {
          candidate = reflected;
          f_candidate = f_reflected;
        }
      } else {
        candidate = reflected;
        f_candidate = f_reflected;
      }
    } else if (probe.evals() >= kBudget) {
      break;
    } else if (f_reflected < f_worst) {
      // outside contraction, between the best and the reflection
      const double contracted = clamp_unit(best + kContract * (reflected - best), lo);
      const double f_contracted = probe(contracted);
      if (f_contracted <= f_reflected) {
        candidate = contracted;
        f_candidate = f_contracted;
      } else {
        candidate = best + kShrink * (worst - best);
        f_candidate = probe(candidate);
      }
    } else {
      // inside contraction, between the best and the worst
      const double contracted = clamp_unit(best - kContract * (best - worst), lo);
      const double f_contracted = probe(contracted);
      if (f_contracted < f_worst) {
        candidate = contracted;
        f_candidate = f_contracted;
      } else {
        candidate = best + kShrink * (worst - best);
        f_candidate = probe(candidate);
      }
    }
    worst = candidate;
    f_worst = f_candidate;
    if (f_worst < f_best) {
      std::swap(best, worst);
      std::swap(f_best, f_worst);
    }
  }

  SearchResult result;
  result.method = SearchMethod::kNelderMead;
  result.alpha = best;
  result.loss = f_best;
  result.evals = probe.evals();
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SearchResult grid_oracle(const Objective& objective, const SearchSettings& settings,
                         int64_t points) {
  settings.validate();
  if (points < 2) throw Error(ErrorCode::kInvalidInput, "grid search needs at least 2 points");
  const auto start = Clock::now();
  Prober probe(objective, nullptr);

  double best_alpha = settings.alpha_min;
  double best_loss = std::numeric_limits<double>::infinity();
  const double denom = static_cast<double>(points - 1);
  for (int64_t i = 0; i < points; ++i) {
    const double alpha = std::lerp(settings.alpha_min, 1.0, static_cast<double>(i) / denom);
    const double loss = probe(alpha);
    if (loss <= best_loss) {  // <= breaks ties toward the larger alpha
      best_loss = loss;
      best_alpha = alpha;
    }
  }

  SearchResult result;
  result.method = SearchMethod::kGrid;
  result.alpha = best_alpha;
  result.loss = best_loss;
  result.evals = probe.evals();
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SearchResult run_search(const Objective& objective, const SearchSettings& settings,
                        int64_t grid_points) {
  switch (settings.method) {
    case SearchMethod::kGolden: return golden_section(objective, settings);
    case SearchMethod::kBisection: return bisection(objective, settings);
    case SearchMethod::kNelderMead: return nelder_mead_1d(objective, settings);
    case SearchMethod::kGrid: return grid_oracle(objective, settings, grid_points);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown search method");
}

}  // namespace requant
