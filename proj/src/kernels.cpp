#include "tfqkd/kernels.hpp"

#include <cassert>

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace tfqkd::kern {

namespace ref {

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> y) {
  for (double& v : y) v *= a;
}

}  // namespace ref

#if defined(__x86_64__) || defined(__i386__)

namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> y);
}  // namespace avx2

namespace {
bool have_avx2() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}
}  // namespace

const char* backend() { return have_avx2() ? "avx2" : "scalar"; }

double dot(std::span<const double> x, std::span<const double> y) {
  return have_avx2() ? avx2::dot(x, y) : ref::dot(x, y);
}

double sum(std::span<const double> x) {
  return have_avx2() ? avx2::sum(x) : ref::sum(x);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (have_avx2())
    avx2::axpy(a, x, y);
  else
    ref::axpy(a, x, y);
}

void scale(double a, std::span<double> y) {
  if (have_avx2())
    avx2::scale(a, y);
  else
    ref::scale(a, y);
}

#elif defined(__aarch64__)

// NEON is baseline on aarch64, so the vector path is unconditional.
const char* backend() { return "neon"; }

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  std::size_t n = x.size(), i = 0;
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(&x[i]), vld1q_f64(&y[i]));
    acc1 = vfmaq_f64(acc1, vld1q_f64(&x[i + 2]), vld1q_f64(&y[i + 2]));
  }
  double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum(std::span<const double> x) {
  std::size_t n = x.size(), i = 0;
  float64x2_t acc = vdupq_n_f64(0.0);
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(&x[i]));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  std::size_t n = x.size(), i = 0;
  float64x2_t va = vdupq_n_f64(a);
  for (; i + 2 <= n; i += 2)
    vst1q_f64(&y[i], vfmaq_f64(vld1q_f64(&y[i]), va, vld1q_f64(&x[i])));
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> y) {
  std::size_t n = y.size(), i = 0;
  float64x2_t va = vdupq_n_f64(a);
  for (; i + 2 <= n; i += 2) vst1q_f64(&y[i], vmulq_f64(va, vld1q_f64(&y[i])));
  for (; i < n; ++i) y[i] *= a;
}

#else

const char* backend() { return "scalar"; }
double dot(std::span<const double> x, std::span<const double> y) { return ref::dot(x, y); }
double sum(std::span<const double> x) { return ref::sum(x); }
void axpy(double a, std::span<const double> x, std::span<double> y) { ref::axpy(a, x, y); }
void scale(double a, std::span<double> y) { ref::scale(a, y); }

#endif

}  // namespace tfqkd::kern
