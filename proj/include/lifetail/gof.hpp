#pragma once

#include <string>
#include <vector>

#include "lifetail/data_model.hpp"
#include "lifetail/npmle.hpp"
#include "lifetail/optim_fit.hpp"

namespace lifetail {

enum class PlotKind { pp, qq, tmd, exp_scale, erp };

PlotKind plot_kind_from_string(const std::string& name);
const std::string& plot_kind_name(PlotKind kind);

/// Coordinates of one diagnostic plot. Censored records enter the
/// plotting positions through the nonparametric estimator but produce no
/// displayed point. Band arrays, when present, give a pointwise
/// confidence envelope indexed by band_x.
struct PlotData {
  PlotKind kind = PlotKind::pp;
  std::vector<double> x, y;
  std::vector<double> band_x, band_lower, band_upper;
  std::string xlab, ylab;
};

/// Truncation-adjusted diagnostic positions for a fitted family. Each
/// observed failure y_i is mapped through its own truncated distribution
/// function F_i(y) = {F(y) - F(a_i)} / {F(b_i) - F(a_i)}; the empirical
/// side uses the nonparametric maximum likelihood estimator computed
/// from all records. Pointwise bands come from beta order-statistic
/// quantiles on the uniform scale, pushed through the same transform as
/// the plotted coordinates. Throws NoObservedFailuresError when no
/// record is an exact failure.
PlotData plotting_positions(const FitResult& fr, const Dataset& exc, PlotKind kind,
                            double band_level = 0.95);

}  // namespace lifetail
