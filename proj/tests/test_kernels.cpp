#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "tfqkd/kernels.hpp"

using namespace tfqkd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

const std::size_t lengths[] = {0, 1, 3, 7, 8, 9, 31, 100, 1000};

}  // namespace

TEST_CASE("backend reports a known name") {
  const std::string b = kern::backend();
  CHECK((b == "avx2" || b == "neon" || b == "scalar"));
}

TEST_CASE("dot and sum match the scalar reference") {
  std::mt19937_64 rng(7);
  for (std::size_t n : lengths) {
    CAPTURE(n);
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    const double scale = 1.0 + static_cast<double>(n);
    CHECK(kern::dot(x, y) == doctest::Approx(kern::ref::dot(x, y)).epsilon(1e-13 * scale));
    CHECK(kern::sum(x) == doctest::Approx(kern::ref::sum(x)).epsilon(1e-13 * scale));
  }
}

TEST_CASE("axpy matches the scalar reference elementwise") {
  std::mt19937_64 rng(11);
  for (std::size_t n : lengths) {
    CAPTURE(n);
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    auto dispatched = y;
    auto reference = y;
    kern::axpy(1.7, x, dispatched);
    kern::ref::axpy(1.7, x, reference);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(dispatched[i] == doctest::Approx(reference[i]).epsilon(1e-14));
  }
}

TEST_CASE("scale matches the scalar reference elementwise") {
  std::mt19937_64 rng(13);
  for (std::size_t n : lengths) {
    CAPTURE(n);
    auto dispatched = random_vec(rng, n);
    auto reference = dispatched;
    kern::scale(-0.37, dispatched);
    kern::ref::scale(-0.37, reference);
    for (std::size_t i = 0; i < n; ++i) CHECK(dispatched[i] == reference[i]);
  }
}

TEST_CASE("empty spans are no-ops") {
  CHECK(kern::dot({}, {}) == 0.0);
  CHECK(kern::sum({}) == 0.0);
  std::vector<double> empty;
  kern::axpy(2.0, empty, empty);
  kern::scale(2.0, empty);
  CHECK(empty.empty());
}
