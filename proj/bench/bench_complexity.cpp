// Compares the OpenMP window-shape kernel with the serial packed-bit
// reference on random images.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "probevo/complexity.hpp"

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
  std::mt19937_64 rng(7);
  std::bernoulli_distribution bit(0.5);
#ifdef _OPENMP
  std::printf("threads %d\n", omp_get_max_threads());
#else
  std::printf("threads 1 (built without OpenMP)\n");
#endif
  std::printf("%-8s %12s %12s %8s\n", "size", "kernel ms", "serial ms", "speedup");
  for (std::size_t n : {8, 12, 16, 20, 24, 32}) {
    std::vector<probevo::BinaryImage> images;
    for (int i = 0; i < reps; ++i) {
      probevo::BinaryImage img(n, n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) img.set(r, c, bit(rng));
      images.push_back(img);
    }
    using clock = std::chrono::steady_clock;
    std::vector<double> fast_logs, serial_logs;
    auto t0 = clock::now();
    for (const auto& img : images) fast_logs.push_back(probevo::complexity_2d(img).log_value);
    auto t1 = clock::now();
    for (const auto& img : images)
      serial_logs.push_back(probevo::complexity_2d_serial(img).log_value);
    auto t2 = clock::now();
    const double fast = std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
    const double slow = std::chrono::duration<double, std::milli>(t2 - t1).count() / reps;
    std::printf("%2zux%-5zu %12.3f %12.3f %8.2f%s\n", n, n, fast, slow, slow / fast,
                fast_logs == serial_logs ? "" : "  MISMATCH");
  }
}
