#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace prosody {

// 2-D principal-component projection of feature rows. rank reports how
// many non-degenerate components were available (eigenvalue > 1e-12);
// missing coordinates are zero-filled.
struct Projection2D {
  std::vector<std::array<double, 2>> coords;
  int rank = 0;
  std::array<double, 2> explained_variance{};
};

Projection2D pca_project_2d(std::span<const std::vector<double>> rows);

}  // namespace prosody
