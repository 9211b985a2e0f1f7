#include "prosody/pca.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "prosody/error.hpp"

namespace prosody {

namespace {

constexpr double kDegenerateEigenvalue = 1e-12;

// Cyclic Jacobi eigen-decomposition of a symmetric matrix (row-major).
// Small fixed dimension, so convergence is quick and deterministic.
void jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigvals,
                  std::vector<double>& eigvecs) {
  eigvecs.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eigvecs[i * n + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i * n + p];
          const double aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p * n + i];
          const double aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = eigvecs[i * n + p];
          const double viq = eigvecs[i * n + q];
          eigvecs[i * n + p] = c * vip - s * viq;
          eigvecs[i * n + q] = s * vip + c * viq;
        }
      }
    }
  }

  eigvals.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigvals[i] = a[i * n + i];
}

}  // namespace

Projection2D pca_project_2d(std::span<const std::vector<double>> rows) {
  if (rows.size() < 3) throw InvalidInputError("pca_project_2d: need at least 3 rows");
  const std::size_t dim = rows.front().size();
  if (dim == 0) throw InvalidInputError("pca_project_2d: empty feature rows");
  for (const auto& r : rows)
    if (r.size() != dim) throw InvalidInputError("pca_project_2d: inconsistent row widths");

  std::vector<double> mean(dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += r[d];
  for (auto& m : mean) m /= static_cast<double>(rows.size());

  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        cov[i * dim + j] += (r[i] - mean[i]) * (r[j] - mean[j]);
  for (auto& c : cov) c /= static_cast<double>(rows.size());

  std::vector<double> eigvals, eigvecs;
  jacobi_eigen(cov, dim, eigvals, eigvecs);

  // Column indices ordered by descending eigenvalue; ties by index.
  std::vector<std::size_t> order(dim);
  for (std::size_t i = 0; i < dim; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eigvals[a] > eigvals[b]; });

  Projection2D out;
  out.coords.assign(rows.size(), {0.0, 0.0});
  for (int comp = 0; comp < 2; ++comp) {
    const std::size_t col = order[comp];
    if (eigvals[col] <= kDegenerateEigenvalue) break;
    out.rank = comp + 1;
    out.explained_variance[comp] = eigvals[col];

    std::vector<double> axis(dim);
    for (std::size_t d = 0; d < dim; ++d) axis[d] = eigvecs[d * dim + col];
    // Fix the sign: the entry of largest magnitude is positive.
    std::size_t imax = 0;
    for (std::size_t d = 1; d < dim; ++d)
      if (std::abs(axis[d]) > std::abs(axis[imax])) imax = d;
    if (axis[imax] < 0.0)
      for (auto& v : axis) v = -v;

    for (std::size_t r = 0; r < rows.size(); ++r) {
      double proj = 0.0;
      for (std::size_t d = 0; d < dim; ++d) proj += (rows[r][d] - mean[d]) * axis[d];
      out.coords[r][comp] = proj;
    }
  }
  return out;
}

}  // namespace prosody
