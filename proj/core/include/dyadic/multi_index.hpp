#pragma once

#include <numeric>
#include <vector>

namespace dyadic {

// Exponent multi-index beta in Z_+^n.
using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& beta) {
  return std::accumulate(beta.begin(), beta.end(), 0);
}

namespace detail {
inline void emit_degree(int axes_left, int degree, MultiIndex& cur,
                        std::vector<MultiIndex>& out) {
  if (axes_left == 1) {
    cur.push_back(degree);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= degree; ++k) {
    cur.push_back(k);
    emit_degree(axes_left - 1, degree - k, cur, out);
    cur.pop_back();
  }
}
}  // namespace detail

// All beta with |beta| < kappa, graded lexicographic (degree first, then
// ascending lex within a degree). The zero index always comes first.
inline std::vector<MultiIndex> multi_indices_below(int dimension, int kappa) {
  std::vector<MultiIndex> out;
  MultiIndex cur;
  for (int d = 0; d < kappa; ++d) detail::emit_degree(dimension, d, cur, out);
  return out;
}

}  // namespace dyadic
