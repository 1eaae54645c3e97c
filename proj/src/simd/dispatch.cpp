#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "seismonet/simd.hpp"

namespace seismonet::simd {

namespace {

struct KernelTable {
  Isa isa;
  float (*dot_f)(const float*, const float*, std::size_t);
  double (*dot_d)(const double*, const double*, std::size_t);
  void (*axpy_f)(float, const float*, float*, std::size_t);
  void (*axpy_d)(double, const double*, double*, std::size_t);
  void (*affine_f)(float, float, const float*, float*, std::size_t);
  void (*affine_d)(double, double, const double*, double*, std::size_t);
  float (*sum_f)(const float*, std::size_t);
  double (*sum_d)(const double*, std::size_t);
};

#define SEISMONET_TABLE(ns, tag)                                                        \
  KernelTable {                                                                         \
    tag, static_cast<float (*)(const float*, const float*, std::size_t)>(ns::dot),      \
        static_cast<double (*)(const double*, const double*, std::size_t)>(ns::dot),    \
        static_cast<void (*)(float, const float*, float*, std::size_t)>(ns::axpy),      \
        static_cast<void (*)(double, const double*, double*, std::size_t)>(ns::axpy),   \
        static_cast<void (*)(float, float, const float*, float*, std::size_t)>(         \
            ns::affine),                                                                \
        static_cast<void (*)(double, double, const double*, double*, std::size_t)>(     \
            ns::affine),                                                                \
        static_cast<float (*)(const float*, std::size_t)>(ns::sum),                     \
        static_cast<double (*)(const double*, std::size_t)>(ns::sum)                    \
  }

const KernelTable kScalarTable = SEISMONET_TABLE(scalar, Isa::Scalar);
#if defined(SEISMONET_HAVE_AVX2)
const KernelTable kAvx2Table = SEISMONET_TABLE(avx2, Isa::Avx2);
#endif
#if defined(SEISMONET_HAVE_NEON)
const KernelTable kNeonTable = SEISMONET_TABLE(neon, Isa::Neon);
#endif

#undef SEISMONET_TABLE

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(SEISMONET_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(SEISMONET_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
#if defined(SEISMONET_HAVE_AVX2)
    case Isa::Avx2:
      return &kAvx2Table;
#endif
#if defined(SEISMONET_HAVE_NEON)
    case Isa::Neon:
      return &kNeonTable;
#endif
    default:
      return &kScalarTable;
  }
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{table_for(detect_isa())};
  return table;
}

const KernelTable& kernels() { return *active_table().load(std::memory_order_relaxed); }

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

Isa detect_isa() {
  if (const char* env = std::getenv("SEISMONET_ISA")) {
    const std::string want(env);
    for (Isa isa : available_isas()) {
      if (isa_name(isa) == want) return isa;
    }
  }
  return available_isas().back();
}

Isa active_isa() { return kernels().isa; }

void set_active_isa(Isa isa) {
  if (!cpu_supports(isa)) {
    throw std::invalid_argument("ISA not available: " + std::string(isa_name(isa)));
  }
  active_table().store(table_for(isa), std::memory_order_relaxed);
}

float dot(std::span<const float> a, std::span<const float> b) {
  assert(a.size() == b.size());
  return kernels().dot_f(a.data(), b.data(), a.size());
}
double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return kernels().dot_d(a.data(), b.data(), a.size());
}
void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  assert(x.size() == y.size());
  kernels().axpy_f(alpha, x.data(), y.data(), x.size());
}
void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  kernels().axpy_d(alpha, x.data(), y.data(), x.size());
}
void affine(float scale, float shift, std::span<const float> x, std::span<float> y) {
  assert(x.size() == y.size());
  kernels().affine_f(scale, shift, x.data(), y.data(), x.size());
}
void affine(double scale, double shift, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  kernels().affine_d(scale, shift, x.data(), y.data(), x.size());
}
float sum(std::span<const float> x) { return kernels().sum_f(x.data(), x.size()); }
double sum(std::span<const double> x) { return kernels().sum_d(x.data(), x.size()); }

}  // namespace seismonet::simd
