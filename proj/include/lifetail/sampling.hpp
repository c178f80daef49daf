#pragma once

#include <cstdint>
#include <vector>

#include "lifetail/data_model.hpp"
#include "lifetail/families.hpp"

namespace lifetail {

/// Deterministic per-stream generator: SplitMix64 keyed by (seed,
/// stream), so parallel replicates draw from independent reproducible
/// streams regardless of scheduling or platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next_u64();

 private:
  std::uint64_t state_;
};

enum class SamplingKind { none, ltrt, ltrc, ditrunc };

/// Truncation/censoring scheme for the sampler. Bound vectors are
/// recyclable: length 1 applies to every draw, length n is per draw.
struct SamplingScheme {
  SamplingKind kind = SamplingKind::none;
  std::vector<double> lower;   // ltrt/ditrunc window start, ltrc entry age
  std::vector<double> upper;   // ltrt/ditrunc window end, ltrc censoring cap
  std::vector<double> lower2;  // second window (ditrunc)
  std::vector<double> upper2;

  static SamplingScheme none_scheme() { return {}; }
  static SamplingScheme ltrt(double lo, double hi);
  static SamplingScheme ltrc(double lo, double cap);
};

/// Draws n lifetimes from family p under the scheme, by inversion of the
/// truncated distribution function. Returned records carry the event
/// flag (exact or right-censored for ltrc) and the truncation bounds
/// used, so the output feeds straight into the fitting routines.
Dataset sample_elife(std::size_t n, const ParamVector& p, const SamplingScheme& scheme,
                     std::uint64_t seed, std::uint64_t stream = 0);

/// One cohort of an aggregated bootstrap template: right truncation
/// bound (exceedance scale) and the number of individuals.
struct CohortTemplate {
  double rtrunc;
  double count;
};

/// Aggregates an exceedance dataset into per-cohort totals keyed by the
/// right truncation bound.
std::vector<CohortTemplate> cohort_template(const Dataset& exc);

struct BootstrapLrtResult {
  double observed = 0.0;
  double pvalue = 1.0;
  std::vector<double> replicates;  // successful replicate statistics
  int n_failed = 0;
  bool failure_warning = false;  // more than 1% of replicates failed
};

struct BootstrapLrtOptions {
  double granularity = 1.0;  // age-band width for discretization; <= 0 keeps
                             // exact times
  int n_jitter = 2;          // jittered starts per replicate fit
};

/// Parametric bootstrap of the deviance statistic comparing nested
/// families, conditioning on cohort totals and truncation bounds. Each
/// replicate simulates right-truncated lifetimes from the fitted null,
/// discretizes them to age bands, refits both families and records the
/// deviance difference. The p-value is the rank of the observed
/// statistic among the B+1 values.
BootstrapLrtResult bootstrap_lrt(const Dataset& exc, Family null_family,
                                 Family alt_family, int B, std::uint64_t seed,
                                 const BootstrapLrtOptions& opts = {});

}  // namespace lifetail
