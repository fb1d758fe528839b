#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgm {

/// Minimal self-contained SVG log-log plot: one polyline per labelled series
/// plus an optional fitted reference line, no display server needed.
class LogLogPlot {
 public:
  LogLogPlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add_series(const std::vector<double>& x, const std::vector<double>& y) {
    Series s;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
      if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
        s.lx.push_back(std::log10(x[i]));
        s.ly.push_back(std::log10(y[i]));
      }
    }
    if (!s.lx.empty()) series_.push_back(std::move(s));
  }

  /// Reference line y = exp(intercept) * x^{-exponent}; drawn across the
  /// full x-range and announced in the legend.
  void set_fit(double exponent, double log_intercept) {
    has_fit_ = true;
    fit_exponent_ = exponent;
    fit_log_intercept_ = log_intercept;
  }

  bool has_data() const { return !series_.empty(); }

  void write(const std::string& path) const {
    if (series_.empty()) throw std::runtime_error("plot: no positive data to draw");
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series_) {
      for (double v : s.lx) { xlo = std::min(xlo, v); xhi = std::max(xhi, v); }
      for (double v : s.ly) { ylo = std::min(ylo, v); yhi = std::max(yhi, v); }
    }
    if (xhi - xlo < 1e-12) xhi = xlo + 1.0;
    if (yhi - ylo < 1e-12) yhi = ylo + 1.0;

    const double W = 760, H = 520, ml = 70, mr = 20, mt = 40, mb = 50;
    auto px = [&](double lx) { return ml + (lx - xlo) / (xhi - xlo) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - ylo) / (yhi - ylo) * (H - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' viewBox='0 0 " << W << " " << H << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << W / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title_
        << "</text>\n";

    // axes + decade ticks
    svg << "<rect x='" << ml << "' y='" << mt << "' width='" << W - ml - mr << "' height='"
        << H - mt - mb << "' fill='none' stroke='black'/>\n";
    for (int e = static_cast<int>(std::ceil(xlo)); e <= static_cast<int>(std::floor(xhi)); ++e) {
      double x = px(e);
      svg << "<line x1='" << x << "' y1='" << mt << "' x2='" << x << "' y2='" << H - mb
          << "' stroke='#dddddd'/>\n"
          << "<text x='" << x << "' y='" << H - mb + 18
          << "' text-anchor='middle' font-size='11'>1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ylo)); e <= static_cast<int>(std::floor(yhi)); ++e) {
      double y = py(e);
      svg << "<line x1='" << ml << "' y1='" << y << "' x2='" << W - mr << "' y2='" << y
          << "' stroke='#dddddd'/>\n"
          << "<text x='" << ml - 6 << "' y='" << y + 4
          << "' text-anchor='end' font-size='11'>1e" << e << "</text>\n";
    }
    svg << "<text x='" << W / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='12'>"
        << xlabel_ << "</text>\n"
        << "<text x='16' y='" << H / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 " << H / 2 << ")'>"
        << ylabel_ << "</text>\n";

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      svg << "<polyline fill='none' stroke='" << palette[k % 10]
          << "' stroke-width='1' stroke-opacity='0.55' points='";
      for (std::size_t i = 0; i < s.lx.size(); ++i)
        svg << px(s.lx[i]) << "," << py(s.ly[i]) << " ";
      svg << "'/>\n";
    }

    if (has_fit_) {
      const double l10 = std::log(10.0);
      auto fit_ly = [&](double lx) {
        return (fit_log_intercept_ - fit_exponent_ * lx * l10) / l10;
      };
      svg << "<line x1='" << px(xlo) << "' y1='" << py(fit_ly(xlo)) << "' x2='" << px(xhi)
          << "' y2='" << py(fit_ly(xhi))
          << "' stroke='black' stroke-width='1.5' stroke-dasharray='6,4'/>\n";
      std::ostringstream leg;
      leg.precision(4);
      leg << "fitted slope " << -fit_exponent_;
      svg << "<text x='" << W - mr - 8 << "' y='" << mt + 16
          << "' text-anchor='end' font-size='12'>" << leg.str() << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << svg.str();
    if (!out) throw std::runtime_error("write failed: " + path);
  }

 private:
  struct Series {
    std::vector<double> lx, ly;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  bool has_fit_ = false;
  double fit_exponent_ = 0.0, fit_log_intercept_ = 0.0;
};

}  // namespace sgm
