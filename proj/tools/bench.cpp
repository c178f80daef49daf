// Compares the OpenMP likelihood evaluation against the serial
// reference on synthetic data of increasing size.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lifetail/likelihood.hpp"
#include "lifetail/sampling.hpp"

using namespace lifetail;

namespace {

double time_loglik(const Dataset& d, const ParamVector& p, bool serial, int reps,
                   double* value) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  double acc = 0.0;
  for (int r = 0; r < reps; ++r)
    acc = serial ? loglik_serial(d, p) : loglik(d, p);
  const auto t1 = clock::now();
  *value = acc;
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled\n");
#endif
  const ParamVector p{Family::gomp, {1.5, 0.2}, {}};
  std::printf("%10s %12s %12s %8s %10s\n", "n", "serial ms", "parallel ms",
              "speedup", "match");
  for (std::size_t n : {1000u, 10000u, 100000u, 1000000u}) {
    auto d = sample_elife(n, p, SamplingScheme::ltrc(0.2, 6.0), 42);
    const int reps = n >= 100000 ? 5 : 50;
    double v_ser = 0.0, v_par = 0.0;
    const double ms_ser = time_loglik(d, p, true, reps, &v_ser);
    const double ms_par = time_loglik(d, p, false, reps, &v_par);
    std::printf("%10zu %12.3f %12.3f %8.2fx %10s\n", n, ms_ser, ms_par,
                ms_ser / ms_par, v_ser == v_par ? "exact" : "DIFFER");
  }
  return 0;
}
