#pragma once

// Vector kernels behind the convolution and normalization layers.
//
// Every kernel has a scalar reference implementation. AVX2+FMA (x86-64) and
// NEON (aarch64) variants are compiled when the target supports them and one
// is picked at runtime. The active ISA is process-wide; results are
// deterministic for a fixed ISA, and the variants agree with the scalar
// reference up to floating-point reassociation in reductions.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace seismonet::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

/// Best ISA this build and CPU support. Honors SEISMONET_ISA=scalar|avx2|neon.
Isa detect_isa();

Isa active_isa();

/// Throws std::invalid_argument if `isa` is not available.
void set_active_isa(Isa isa);

// Dispatched entry points. Spans must have equal length.
float dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// y = scale * x + shift
void affine(float scale, float shift, std::span<const float> x, std::span<float> y);
void affine(double scale, double shift, std::span<const double> x, std::span<double> y);

float sum(std::span<const float> x);
double sum(std::span<const double> x);

// Per-ISA implementations, exposed for equivalence testing.
#define SEISMONET_DECLARE_KERNELS                                                      \
  float dot(const float* a, const float* b, std::size_t n);                            \
  double dot(const double* a, const double* b, std::size_t n);                         \
  void axpy(float alpha, const float* x, float* y, std::size_t n);                     \
  void axpy(double alpha, const double* x, double* y, std::size_t n);                  \
  void affine(float scale, float shift, const float* x, float* y, std::size_t n);      \
  void affine(double scale, double shift, const double* x, double* y, std::size_t n);  \
  float sum(const float* x, std::size_t n);                                            \
  double sum(const double* x, std::size_t n);

namespace scalar {
SEISMONET_DECLARE_KERNELS
}

#if defined(SEISMONET_HAVE_AVX2)
namespace avx2 {
SEISMONET_DECLARE_KERNELS
}
#endif

#if defined(SEISMONET_HAVE_NEON)
namespace neon {
SEISMONET_DECLARE_KERNELS
}
#endif

#undef SEISMONET_DECLARE_KERNELS

}  // namespace seismonet::simd
