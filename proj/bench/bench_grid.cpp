#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "qsemi/evolve.hpp"
#include "qsemi/fixtures.hpp"

namespace {

template <typename F>
double seconds(F&& f, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
  return d.count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qsemi;
  const int points = argc > 1 ? std::atoi(argv[1]) : 64;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const GaussianKernel k = kernel(fixtures::heat(2), 0.1);
  const GaussianState u = GaussianState::centered(2, 1.0);
  const GridFunction g = GridFunction::sample(2, Axis{-8.0, 8.0, points}, [&](const RVector& x) { return u(x); });

  GridFunction a, b;
  const double ts = seconds([&] { a = apply_kernel_grid_serial(k, g); }, reps);
  const double tp = seconds([&] { b = apply_kernel_grid(k, g); }, reps);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a.samples[i] - b.samples[i]));
  std::printf("grid %dx%d  threads %d\n", points, points, omp_get_max_threads());
  std::printf("serial   %.4f s\n", ts);
  std::printf("openmp   %.4f s  speedup %.2f\n", tp, ts / tp);
  std::printf("max |serial - openmp| = %.3g\n", diff);
  return 0;
}
