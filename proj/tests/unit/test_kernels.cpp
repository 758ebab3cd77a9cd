#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "persist/kernels.hpp"
#include "persist/rng.hpp"

using namespace persist;
using namespace persist::kernels;

namespace {

struct Particles {
  std::vector<std::vector<double>> coords;
  std::vector<const double*> ptrs;
  Particles(int d, std::size_t n) : coords(static_cast<std::size_t>(d), std::vector<double>(n)) {
    for (auto& c : coords) ptrs.push_back(c.data());
  }
};

}  // namespace

TEST_CASE("polytope kernels agree bit for bit") {
  if (!avx2_supported()) {
    MESSAGE("AVX2 unavailable; comparing scalar with itself");
  }
  Rng rng(21, 0, 0);
  for (int d : {1, 2, 3, 5, 8}) {
    const int m = d + 3;
    std::vector<double> a(static_cast<std::size_t>(m * d)), b(static_cast<std::size_t>(m));
    for (double& x : a) x = rng.normal();
    for (double& x : b) x = rng.normal();
    const PolytopeView P{d, m, a.data(), b.data()};
    const std::size_t n = 1003;
    Particles s(d, n);
    const double k = 1 + std::floor(50 * rng.uniform());
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) s.coords[static_cast<std::size_t>(j)][i] = k * rng.normal() * 0.5;
    // a few points exactly on a facet: <a_0, s> + b_0 k = 0 along axis 0
    for (std::size_t i = 0; i < n; i += 97)
      if (a[0] != 0) {
        double rest = 0;
        for (int j = 1; j < d; ++j) rest += a[static_cast<std::size_t>(j)] * s.coords[static_cast<std::size_t>(j)][i];
        s.coords[0][i] = -(rest + b[0] * k) / a[0];
      }
    std::vector<std::uint8_t> o1(n), o2(n);
    scalar::polytope_inside(P, s.ptrs.data(), n, k, o1.data());
    avx2::polytope_inside(P, s.ptrs.data(), n, k, o2.data());
    CHECK(o1 == o2);
    // naive oracle away from ties
    for (std::size_t i = 0; i < n; ++i) {
      double worst = -INFINITY;
      for (int r = 0; r < m; ++r) {
        double v = b[static_cast<std::size_t>(r)] * k;
        for (int j = 0; j < d; ++j) v += a[static_cast<std::size_t>(r * d + j)] * s.coords[static_cast<std::size_t>(j)][i];
        worst = std::max(worst, v);
      }
      if (std::abs(worst) > 1e-9) CHECK(static_cast<bool>(o1[i]) == (worst <= 0));
    }
  }
}

TEST_CASE("ball kernels agree bit for bit") {
  Rng rng(22, 0, 0);
  for (int d : {1, 2, 4, 7}) {
    std::vector<double> c(static_cast<std::size_t>(d));
    for (double& x : c) x = 3 * rng.normal();
    const BallView B{d, c.data(), 1.5};
    const std::size_t n = 517;
    Particles s(d, n);
    const double k = 7;
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        s.coords[static_cast<std::size_t>(j)][i] = k * (c[static_cast<std::size_t>(j)] + 1.2 * rng.normal());
    std::vector<std::uint8_t> o1(n), o2(n), o3(n);
    scalar::ball_inside(B, s.ptrs.data(), n, k, o1.data());
    avx2::ball_inside(B, s.ptrs.data(), n, k, o2.data());
    ball_inside(B, s.ptrs.data(), n, k, o3.data());
    CHECK(o1 == o2);
    CHECK(o1 == o3);
    std::size_t in = 0;
    for (auto v : o1) in += v;
    CHECK(in > 0);
    CHECK(in < n);
  }
}

TEST_CASE("isa selection") {
  set_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  set_isa(Isa::avx2);
  CHECK(active_isa() == (avx2_supported() ? Isa::avx2 : Isa::scalar));
  CHECK(std::string(isa_name(Isa::scalar)) == "scalar");
}
