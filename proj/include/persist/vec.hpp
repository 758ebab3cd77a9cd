#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace persist {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(std::span<const double> a, double s) {
  Vec out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

inline Vec normalized(std::span<const double> a) { return scaled(a, 1.0 / norm(a)); }

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Orthonormal basis whose first vector is `first` (normalised), completed by Gram-Schmidt
// against the coordinate axes.
std::vector<Vec> orthonormal_frame(std::span<const double> first);

}  // namespace persist
