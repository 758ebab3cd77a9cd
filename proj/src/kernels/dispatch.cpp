#include <atomic>

#include "persist/kernels.hpp"

namespace persist::kernels {

namespace {

Isa detect() { return avx2_supported() ? Isa::avx2 : Isa::scalar; }

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void polytope_inside(const PolytopeView& P, const double* const* s, std::size_t count, double k, std::uint8_t* inside) {
  if (active_isa() == Isa::avx2)
    avx2::polytope_inside(P, s, count, k, inside);
  else
    scalar::polytope_inside(P, s, count, k, inside);
}

void ball_inside(const BallView& B, const double* const* s, std::size_t count, double k, std::uint8_t* inside) {
  if (active_isa() == Isa::avx2)
    avx2::ball_inside(B, s, count, k, inside);
  else
    scalar::ball_inside(B, s, count, k, inside);
}

}  // namespace persist::kernels
