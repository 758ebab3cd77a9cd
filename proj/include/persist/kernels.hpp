#pragma once

#include <cstddef>
#include <cstdint>

// Batched membership tests for walk particles stored coordinate-major (one array per axis).
// A particle at time k with partial sum s is inside k o A when
//   polytope: max_r (<a_r, s> + b_r k) <= 0
//   ball:     |s - k c|^2 <= (k rho)^2
// Scalar and AVX2 variants evaluate in the same operation order and agree bit for bit.
namespace persist::kernels {

enum class Isa { scalar, avx2 };

struct PolytopeView {
  int d = 0;
  int m = 0;
  const double* a = nullptr;  // m x d, row-major
  const double* b = nullptr;  // m
};

struct BallView {
  int d = 0;
  const double* c = nullptr;
  double rho = 0.0;
};

bool avx2_supported();
Isa active_isa();
// Forces a variant; requesting avx2 on a machine without it falls back to scalar.
void set_isa(Isa isa);
const char* isa_name(Isa isa);

void polytope_inside(const PolytopeView& P, const double* const* s, std::size_t count, double k, std::uint8_t* inside);
void ball_inside(const BallView& B, const double* const* s, std::size_t count, double k, std::uint8_t* inside);

namespace scalar {
void polytope_inside(const PolytopeView& P, const double* const* s, std::size_t count, double k, std::uint8_t* inside);
void ball_inside(const BallView& B, const double* const* s, std::size_t count, double k, std::uint8_t* inside);
}  // namespace scalar

namespace avx2 {
void polytope_inside(const PolytopeView& P, const double* const* s, std::size_t count, double k, std::uint8_t* inside);
void ball_inside(const BallView& B, const double* const* s, std::size_t count, double k, std::uint8_t* inside);
}  // namespace avx2

}  // namespace persist::kernels
