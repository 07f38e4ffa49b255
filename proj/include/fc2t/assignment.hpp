#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace fc2t {

// Minimum-cost assignment on a dense n x m cost matrix (row-major).  Returns
// min(n, m) (row, col) pairs sorted by row; every row and column is used at most
// once and the total cost is minimal among all matchings of that size.
// Shortest augmenting path with potentials, O(min^2 * max).
inline std::vector<std::pair<std::size_t, std::size_t>> min_cost_assignment(const std::vector<double>& cost,
                                                                            std::size_t n, std::size_t m) {
  std::vector<std::pair<std::size_t, std::size_t>> result;
  if (n == 0 || m == 0) return result;
  const bool transposed = n > m;
  const std::size_t rows = transposed ? m : n, cols = transposed ? n : m;
  auto c = [&](std::size_t i, std::size_t j) { return transposed ? cost[j * m + i] : cost[i * m + j]; };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] == 0) continue;
    if (transposed)
      result.emplace_back(j - 1, p[j] - 1);
    else
      result.emplace_back(p[j] - 1, j - 1);
  }
  std::sort(result.begin(), result.end());
  return result;
}

// Correctly rounded sum (Shewchuk partials, as in Python's math.fsum).  Makes the
// cost of an assignment independent of the order its pairs are visited, so two
// matchings with the same exact total report the same double.
inline double exact_sum(const std::vector<double>& xs) {
  std::vector<double> partials;
  for (double x : xs) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  double hi = partials[--n], lo = 0.0;
  while (n > 0) {
    const double x = hi, y = partials[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Half-way case: round according to the sign of the next partial.
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

}  // namespace fc2t
