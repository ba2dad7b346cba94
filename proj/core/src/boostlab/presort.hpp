#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "valfind/boostlab.hpp"

namespace valfind::boostlab::detail {

// Column-major copy of the design plus, per feature, the row order sorted by
// (value, row). Built once per training set and shared by every tree.
struct Presorted {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> column;    // column[f * n + r]
  std::vector<std::uint32_t> order;  // order[f * n + i]

  explicit Presorted(const Matrix& x);
  double value(std::size_t f, std::size_t r) const { return column[f * n + r]; }
};

RegressionTree build_tree(const Presorted& sorted, std::span<const GradientPair> grad,
                          const TreeParams& params);

}  // namespace valfind::boostlab::detail
