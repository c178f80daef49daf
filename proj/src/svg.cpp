#include "lifetail/svg.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lifetail/errors.hpp"

namespace lifetail {

namespace {

constexpr double kW = 640.0, kH = 480.0;
constexpr double kMargin = 52.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Canvas {
  double x0, x1, y0, y1;  // data ranges
  std::ostringstream out;

  Canvas(double xa, double xb, double ya, double yb) : x0(xa), x1(xb), y0(ya), y1(yb) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
           "viewBox=\"0 0 640 480\" width=\"640\" height=\"480\">\n"
        << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  }

  double px(double x) const {
    return kMargin + (x - x0) / (x1 - x0) * (kW - 2.0 * kMargin);
  }
  double py(double y) const {
    return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2.0 * kMargin);
  }

  void axes(const std::string& xlab, const std::string& ylab) {
    out << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\""
        << num(kW - 2 * kMargin) << "\" height=\"" << num(kH - 2 * kMargin)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0 + (x1 - x0) * i / 4.0;
      const double fy = y0 + (y1 - y0) * i / 4.0;
      out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kH - kMargin + 18)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
      out << "<text x=\"" << num(kMargin - 8) << "\" y=\"" << num(py(fy) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }
    out << "<text x=\"" << num(kW / 2) << "\" y=\"" << num(kH - 12)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << xlab << "</text>\n";
    out << "<text x=\"14\" y=\"" << num(kH / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num(kH / 2) << ")\">" << ylab << "</text>\n";
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& style) {
    out << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      out << num(px(xs[i])) << "," << num(py(ys[i])) << " ";
    out << "\"/>\n";
  }

  void band(const std::vector<double>& xs, const std::vector<double>& lo,
            const std::vector<double>& hi) {
    out << "<polygon fill=\"#c8d8ef\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      out << num(px(xs[i])) << "," << num(py(lo[i])) << " ";
    for (std::size_t i = xs.size(); i > 0; --i)
      out << num(px(xs[i - 1])) << "," << num(py(hi[i - 1])) << " ";
    out << "\"/>\n";
  }

  void points(const std::vector<double>& xs, const std::vector<double>& ys) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      out << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i]))
          << "\" r=\"2.5\" fill=\"black\"/>\n";
  }

  void line(double xa, double ya, double xb, double yb, const std::string& style) {
    out << "<line x1=\"" << num(px(xa)) << "\" y1=\"" << num(py(ya)) << "\" x2=\""
        << num(px(xb)) << "\" y2=\"" << num(py(yb)) << "\" " << style << "/>\n";
  }

  void save(const std::string& path) {
    out << "</svg>\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << out.str();
    if (!f) throw IoError("failed writing " + path);
  }
};

void extend(double& lo, double& hi, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
}

}  // namespace

void emit_svg(const PlotData& pd, const std::string& path) {
  double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
  extend(xlo, xhi, pd.x);
  extend(xlo, xhi, pd.band_x);
  extend(ylo, yhi, pd.y);
  extend(ylo, yhi, pd.band_lower);
  extend(ylo, yhi, pd.band_upper);
  Canvas c(xlo, xhi, ylo, yhi);
  if (!pd.band_x.empty()) c.band(pd.band_x, pd.band_lower, pd.band_upper);
  if (pd.kind == PlotKind::tmd)
    c.line(xlo, 0.0, xhi, 0.0, "stroke=\"gray\" stroke-dasharray=\"4 3\"");
  else
    c.line(std::max(xlo, ylo), std::max(xlo, ylo), std::min(xhi, yhi),
           std::min(xhi, yhi), "stroke=\"gray\" stroke-dasharray=\"4 3\"");
  c.points(pd.x, pd.y);
  c.axes(pd.xlab, pd.ylab);
  c.save(path);
}

void emit_svg(const StepCDF& scdf, const std::string& path) {
  std::vector<double> xs, ys;
  double cum = 0.0;
  for (std::size_t j = 0; j < scdf.intervals.size(); ++j) {
    const auto& iv = scdf.intervals.intervals[j];
    if (!std::isfinite(iv.b)) break;
    xs.push_back(iv.a);
    ys.push_back(cum);
    cum += scdf.masses[j];
    xs.push_back(iv.b);
    ys.push_back(cum);
  }
  if (xs.empty()) throw DomainError("distribution has no finite support to draw");
  Canvas c(xs.front(), xs.back(), 0.0, 1.0);
  c.polyline(xs, ys, "stroke=\"black\"");
  c.axes("time", "distribution function");
  c.save(path);
}

void emit_svg(const ProfileCurve& pc, const std::string& path) {
  std::vector<double> xs, ys;
  double ylo = 0.0;
  for (std::size_t i = 0; i < pc.psi.size(); ++i) {
    if (!std::isfinite(pc.loglik[i])) continue;
    xs.push_back(pc.psi[i]);
    ys.push_back(2.0 * (pc.loglik[i] - pc.loglik_hat));
    ylo = std::min(ylo, ys.back());
  }
  if (xs.empty()) throw DomainError("profile curve has no finite values");
  ylo = std::max(ylo, -25.0);
  Canvas c(xs.front(), xs.back(), ylo, 0.5);
  const double cutoff =
      -boost::math::quantile(boost::math::chi_squared(1), pc.level);
  c.line(xs.front(), cutoff, xs.back(), cutoff,
         "stroke=\"gray\" stroke-dasharray=\"4 3\"");
  c.polyline(xs, ys, "stroke=\"black\"");
  if (std::isfinite(pc.psi_hat))
    c.line(pc.psi_hat, ylo, pc.psi_hat, 0.0,
           "stroke=\"gray\" stroke-dasharray=\"2 3\"");
  c.axes("endpoint", "2 (profile - maximum) log likelihood");
  c.save(path);
}

void emit_svg(const ThresholdDiag& diag, const std::string& path) {
  std::vector<double> xs, ys, lo, hi;
  for (const auto& e : diag.entries) {
    if (!e.ok) continue;
    xs.push_back(e.thresh);
    if (std::isnan(e.shape)) continue;
    ys.push_back(e.shape);
    lo.push_back(e.lower);
    hi.push_back(e.upper);
  }
  if (xs.empty()) throw DomainError("no successful thresholds to draw");
  const bool pvals = ys.empty();
  if (pvals)
    for (const auto& e : diag.entries)
      if (e.ok) ys.push_back(e.pvalue);

  double ylo = kInf, yhi = -kInf;
  extend(ylo, yhi, ys);
  extend(ylo, yhi, lo);
  extend(ylo, yhi, hi);
  Canvas c(xs.front() - 0.5, xs.back() + 0.5, std::min(ylo, 0.0), yhi + 0.1);
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (std::isfinite(lo[i]) && std::isfinite(hi[i]))
      c.line(xs[i], lo[i], xs[i], hi[i], "stroke=\"black\"");
  c.points(xs, ys);
  c.axes("threshold", pvals ? "p-value" : "shape estimate");
  c.save(path);
}

void write_plotdata_csv(const PlotData& pd, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "x,y,band_x,band_lower,band_upper\n";
  char buf[160];
  for (std::size_t i = 0; i < pd.x.size(); ++i) {
    if (i < pd.band_x.size())
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g\n", pd.x[i],
                    pd.y[i], pd.band_x[i], pd.band_lower[i], pd.band_upper[i]);
    else
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,,,\n", pd.x[i], pd.y[i]);
    f << buf;
  }
  if (!f) throw IoError("failed writing " + path);
}

}  // namespace lifetail
