#include <limits>

#include "persist/kernels.hpp"

namespace persist::kernels::scalar {

void polytope_inside(const PolytopeView& P, const double* const* s, std::size_t count, double k, std::uint8_t* inside) {
  for (std::size_t p = 0; p < count; ++p) {
    double h = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < P.m; ++r) {
      const double* a = P.a + static_cast<std::size_t>(r) * P.d;
      double acc = a[0] * s[0][p];
      for (int j = 1; j < P.d; ++j) acc = acc + a[j] * s[j][p];
      acc = acc + P.b[r] * k;
      h = acc > h ? acc : h;
    }
    inside[p] = h <= 0.0;
  }
}

void ball_inside(const BallView& B, const double* const* s, std::size_t count, double k, std::uint8_t* inside) {
  const double lim = (k * B.rho) * (k * B.rho);
  for (std::size_t p = 0; p < count; ++p) {
    double acc = 0.0;
    for (int j = 0; j < B.d; ++j) {
      const double t = s[j][p] - k * B.c[j];
      acc = acc + t * t;
    }
    inside[p] = acc <= lim;
  }
}

}  // namespace persist::kernels::scalar
