#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace requant {

enum class SearchMethod { kGolden, kBisection, kNelderMead, kGrid };

std::string_view to_string(SearchMethod m);
SearchMethod search_method_from_string(std::string_view name);

struct SearchSettings {
  double epsilon = 1e-4;    // termination width of the bracket
  double phi = 0.618;       // golden contraction factor
  double alpha_min = 1e-3;  // left edge of the search interval [alpha_min, 1]
  SearchMethod method = SearchMethod::kGolden;

  void validate() const;  // 0 < phi < 1, 0 < epsilon < 1, 0 < alpha_min < 1
};

struct SearchResult {
  double alpha = 1.0;
  double loss = 0.0;          // objective value at alpha
  int64_t evals = 0;          // objective evaluations performed
  double wall_time_ms = 0.0;
  SearchMethod method = SearchMethod::kGolden;
};

/// Per-iteration record of a golden-section run, for verification:
/// bracket widths contract exactly by phi each iteration, and every probe
/// value bounds the returned loss from above.
struct GoldenTrace {
  std::vector<double> bracket_widths;  // |d - c| after each iteration
  std::vector<double> probe_alphas;    // every alpha handed to the objective
  std::vector<double> probe_losses;
};

using Objective = std::function<double(double)>;

/// Golden-section search over [alpha_min, 1]:
///   x1 = d - phi(d-c), x2 = c + phi(d-c); the bracket contracts to exactly
///   phi times its width each iteration and the better probe survives and is
///   reused, so the loop costs one evaluation per iteration after the
///   initial two. Stops once |d - c| <= epsilon and returns the better of
///   the two live probes (x1 on ties).
/// Throws kSearchAborted (carrying the alpha) if the objective returns a
/// non-finite value.
SearchResult golden_section(const Objective& objective, const SearchSettings& settings,
                            GoldenTrace* trace = nullptr);

/// Bisection on the sign of the central difference
/// objective(m + h) - objective(m - h) with h = epsilon / 4, halving
/// [alpha_min, 1] until its width is <= epsilon.
SearchResult bisection(const Objective& objective, const SearchSettings& settings);

/// One-dimensional Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5) from the initial simplex {0.5, 0.95}, iterates clamped into
/// [alpha_min, 1]. Stops when the simplex width is <= epsilon or after 200
/// evaluations.
SearchResult nelder_mead_1d(const Objective& objective, const SearchSettings& settings);

/// Brute-force scan of `points` evenly spaced alphas across [alpha_min, 1]
/// (both ends included). Ties break toward the larger alpha.
SearchResult grid_oracle(const Objective& objective, const SearchSettings& settings,
                         int64_t points);

/// Dispatch on settings.method; grid_points only applies to kGrid.
SearchResult run_search(const Objective& objective, const SearchSettings& settings,
                        int64_t grid_points = 100001);

}  // namespace requant
