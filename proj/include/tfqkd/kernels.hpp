#pragma once

#include <cstddef>
#include <span>

// Small dense-vector kernels used by the simplex solver and the sector-matrix
// assembly. A scalar reference implementation is always available; on x86 an
// AVX2+FMA variant is selected at runtime when the CPU supports it, on aarch64
// a NEON variant is selected at compile time. Backends are interchangeable up
// to floating-point reassociation and are equivalence-tested against ref::.

namespace tfqkd::kern {

// Name of the backend the dispatched entry points run on: "avx2", "neon" or
// "scalar".
const char* backend();

double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// y *= a
void scale(double a, std::span<double> y);

namespace ref {
double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> y);
}  // namespace ref

}  // namespace tfqkd::kern
