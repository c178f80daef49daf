#pragma once

#include <string>

#include "lifetail/gof.hpp"
#include "lifetail/inference.hpp"
#include "lifetail/npmle.hpp"

namespace lifetail {

// Standalone SVG 1.1 files, 640x480 viewBox, deterministic byte output
// for a fixed input. Throws IoError when the file cannot be written.

/// Scatter of plotting positions with the pointwise band as a shaded
/// region and a reference diagonal (horizontal zero line for difference
/// plots).
void emit_svg(const PlotData& pd, const std::string& path);

/// Distribution function as a step curve; mass intervals drawn as
/// segments under the interpolate convention.
void emit_svg(const StepCDF& scdf, const std::string& path);

/// Profile log likelihood curve on the 2 {l_p - l_hat} scale with the
/// confidence cutoff as a dashed line.
void emit_svg(const ProfileCurve& pc, const std::string& path);

/// Per-threshold estimates with vertical interval whiskers.
void emit_svg(const ThresholdDiag& diag, const std::string& path);

/// Plot coordinates as CSV: x,y,band_x,band_lower,band_upper (band
/// columns empty when absent).
void write_plotdata_csv(const PlotData& pd, const std::string& path);

}  // namespace lifetail
