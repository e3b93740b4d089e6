#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "koalition/date.hpp"
#include "koalition/electoral.hpp"
#include "koalition/error.hpp"
#include "koalition/forecast.hpp"
#include "koalition/poe_engine.hpp"
#include "koalition/poll_ingest.hpp"
#include "koalition/registry.hpp"
#include "koalition/svg.hpp"

// Renderers turn engine results into SVG. They compute geometry only; every
// statistic they show arrives precomputed.

namespace koalition {

struct Theme {
  double width = 800.0;
  double height = 500.0;
  std::string font_family = "Helvetica, Arial, sans-serif";
  double font_size = 12.0;
  std::string majority_color = "3a75c4";
  std::string ci_color = "f28e2b";
  std::string subset_color = "d3d3d3";
  std::string quartile_color = "808080";
  std::string text_color = "222222";
  std::string background = "ffffff";

  void validate() const {
    if (!(width > 0.0 && height > 0.0)) throw Error("bad-theme", "figure size must be positive");
    if (!(font_size > 0.0)) throw Error("bad-theme", "font size must be positive");
    for (const auto* c :
         {&majority_color, &ci_color, &subset_color, &quartile_color, &text_color, &background}) {
      if (!is_hex_color(*c)) throw Error("bad-theme", "invalid color '" + *c + "'");
    }
  }
};

/// Reproducibility stamp written into every figure.
struct Provenance {
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::optional<Date> as_of;

  std::string comment() const {
    return fmt::format("koalition seed={} m={} as_of={}", seed, m,
                       as_of ? as_of->str() : std::string("none"));
  }
};

struct SvgDocument {
  std::string xml;

  friend bool operator==(const SvgDocument&, const SvgDocument&) = default;
};

/// One row of the PoE bar chart.
struct CoalitionPoE {
  std::string label;
  std::vector<std::string> parties;
  PoEResult result;
};

namespace viz_detail {

inline std::string color(std::string_view hex) {
  std::string out = "#";
  out += hex.front() == '#' ? hex.substr(1) : hex;
  return out;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

/// "17%" for whole percentages, one decimal otherwise.
inline std::string percent_label(double fraction) {
  const double pct = fraction * 100.0;
  if (std::abs(pct - std::round(pct)) < 0.05) return fmt::format("{:.0f}%", std::round(pct));
  return fmt::format("{:.1f}%", pct);
}

struct Frame {
  double left;
  double top;
  double right;
  double bottom;
  double width() const { return right - left; }
  double height() const { return bottom - top; }
};

inline Frame frame(const Theme& t, double left = 110.0, double right = 30.0, double top = 45.0,
                   double bottom = 45.0) {
  return {left, top, std::max(left + 1.0, t.width - right),
          std::max(top + 1.0, t.height - bottom)};
}

inline svg::Writer begin(const Theme& theme, const Provenance& prov, std::string_view title) {
  theme.validate();
  svg::Writer w(theme.width, theme.height);
  w.comment(prov.comment());
  w.element("rect", {{"x", "0"}, {"y", "0"}, {"width", svg::num(theme.width)},
                     {"height", svg::num(theme.height)}, {"fill", color(theme.background)}});
  w.open("g", {{"font-family", theme.font_family}, {"font-size", svg::num(theme.font_size)},
               {"fill", color(theme.text_color)}});
  if (!title.empty()) {
    w.text(theme.width / 2.0, 24.0, title,
           {{"class", "title"}, {"text-anchor", "middle"},
            {"font-size", svg::num(theme.font_size * 1.25)}});
  }
  return w;
}

inline void vline(svg::Writer& w, double x, double y0, double y1, std::string_view cls,
                  std::string_view stroke, std::string_view dash = {}, double width = 1.0) {
  if (dash.empty()) {
    w.element("line", {{"class", std::string(cls)}, {"x1", svg::num(x)}, {"y1", svg::num(y0)},
                       {"x2", svg::num(x)}, {"y2", svg::num(y1)}, {"stroke", std::string(stroke)},
                       {"stroke-width", svg::num(width)}});
  } else {
    w.element("line", {{"class", std::string(cls)}, {"x1", svg::num(x)}, {"y1", svg::num(y0)},
                       {"x2", svg::num(x)}, {"y2", svg::num(y1)}, {"stroke", std::string(stroke)},
                       {"stroke-width", svg::num(width)},
                       {"stroke-dasharray", std::string(dash)}});
  }
}

inline void hline(svg::Writer& w, double x0, double x1, double y, std::string_view cls,
                  std::string_view stroke) {
  w.element("line", {{"class", std::string(cls)}, {"x1", svg::num(x0)}, {"y1", svg::num(y)},
                     {"x2", svg::num(x1)}, {"y2", svg::num(y)}, {"stroke", std::string(stroke)},
                     {"stroke-width", "1.00"}});
}

inline void rect(svg::Writer& w, std::string_view cls, double x, double y, double width,
                 double height, std::string_view fill, std::string_view party = {}) {
  if (party.empty()) {
    w.element("rect", {{"class", std::string(cls)}, {"x", svg::num(x)}, {"y", svg::num(y)},
                       {"width", svg::num(std::max(0.0, width))},
                       {"height", svg::num(std::max(0.0, height))}, {"fill", std::string(fill)}});
  } else {
    w.element("rect", {{"class", std::string(cls)}, {"data-party", std::string(party)},
                       {"x", svg::num(x)}, {"y", svg::num(y)},
                       {"width", svg::num(std::max(0.0, width))},
                       {"height", svg::num(std::max(0.0, height))}, {"fill", std::string(fill)}});
  }
}

/// Visible x-range of one or more densities: grid points whose height
/// exceeds 1e-4 of the peak, widened to keep 50% in view.
inline std::pair<std::size_t, std::size_t> density_window(
    std::span<const SeatShareDistribution* const> dists) {
  const std::size_t n = dists.front()->density.x.size();
  std::size_t lo = n - 1;
  std::size_t hi = 0;
  for (const auto* d : dists) {
    const auto& h = d->density.height;
    const double peak = *std::max_element(h.begin(), h.end());
    for (std::size_t g = 0; g < n; ++g) {
      if (h[g] >= 1e-4 * peak) {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
    }
  }
  const auto at = [&](double x) {
    return static_cast<std::size_t>(std::round(x * static_cast<double>(n - 1)));
  };
  const double x_lo = std::min(dists.front()->density.x[lo] - 0.02, 0.45);
  const double x_hi = std::max(dists.front()->density.x[hi] + 0.02, 0.55);
  return {at(std::max(0.0, x_lo)), at(std::min(1.0, x_hi))};
}

/// The estimator sampled across [lo, hi] about every two pixels (never more
/// coarsely than the grid), so narrow densities still render smoothly.
inline std::vector<std::pair<double, double>> density_curve(const DensityGrid& g, std::size_t lo,
                                                            std::size_t hi, double pixels) {
  const auto per_pixel = static_cast<std::size_t>(std::ceil(std::max(pixels, 2.0) / 2.0));
  const std::size_t n = std::max<std::size_t>({1, hi - lo, per_pixel});
  const double x0 = g.x[lo];
  const double x1 = g.x[hi];
  std::vector<std::pair<double, double>> out;
  out.reserve(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = j == n ? x1 : x0 + (x1 - x0) * static_cast<double>(j) / static_cast<double>(n);
    out.emplace_back(x, g.at(x));
  }
  return out;
}

inline double curve_peak(std::span<const SeatShareDistribution* const> dists, std::size_t lo,
                         std::size_t hi, double pixels) {
  double peak = 1e-12;
  for (const auto* d : dists) {
    for (const auto& [x, y] : density_curve(d->density, lo, hi, pixels)) peak = std::max(peak, y);
  }
  return peak;
}

/// Density area and its majority part, mapped by sx / sy into pixels.
template <typename SX, typename SY>
std::pair<svg::PathData, svg::PathData> density_paths(const SeatShareDistribution& dist,
                                                      std::size_t lo, std::size_t hi,
                                                      double pixels, SX sx, SY sy) {
  const auto& g = dist.density;
  const auto curve = density_curve(g, lo, hi, pixels);
  svg::PathData area;
  area.move(sx(g.x[lo]), sy(0.0));
  for (const auto& [x, y] : curve) area.line(sx(x), sy(y));
  area.line(sx(g.x[hi]), sy(0.0)).close();

  svg::PathData fill;
  const double cut = std::max(dist.majority_cutoff, g.x[lo]);
  if (dist.majority_mass > 0.0 && g.x[hi] > cut) {
    fill.move(sx(cut), sy(0.0)).line(sx(cut), sy(g.at(cut)));
    for (const auto& [x, y] : curve) {
      if (x > cut) fill.line(sx(x), sy(y));
    }
    fill.line(sx(g.x[hi]), sy(0.0)).close();
  }
  return {area, fill};
}

struct RidgeLayout {
  double top;
  double bottom;
  double width;  // pane width; x runs from 0 inside the pane group
  std::size_t lo;
  std::size_t hi;
  double peak;  // density value mapped to full ridge height
};

inline std::vector<std::pair<Date, const SeatShareDistribution*>> sorted_series(
    std::span<const std::pair<Date, SeatShareDistribution>> series) {
  std::vector<std::pair<Date, const SeatShareDistribution*>> out;
  for (const auto& [d, dist] : series) out.emplace_back(d, &dist);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

/// Ridge baselines: oldest on top, newest at the bottom.
inline std::vector<double> ridge_baselines(std::size_t n, double top, double bottom,
                                           double& ridge_height) {
  std::vector<double> base(n);
  const double h = bottom - top;
  if (n == 1) {
    ridge_height = 0.8 * h;
    base[0] = bottom;
    return base;
  }
  const double row = h / (static_cast<double>(n) + 1.5);
  ridge_height = 2.5 * row;
  for (std::size_t i = 0; i < n; ++i) base[i] = top + ridge_height + static_cast<double>(i) * row;
  return base;
}

/// Draws ridges in pane-local coordinates. Later (newer) ridges are drawn
/// last and occlude the ones above them.
inline void draw_ridges(svg::Writer& w,
                        const std::vector<std::pair<Date, const SeatShareDistribution*>>& series,
                        const RidgeLayout& layout, const Theme& theme) {
  double ridge_h = 0.0;
  const auto base = ridge_baselines(series.size(), layout.top, layout.bottom, ridge_h);
  const auto& g0 = series.front().second->density;
  const double x0 = g0.x[layout.lo];
  const double x1 = g0.x[layout.hi];
  auto sx = [&](double x) { return (x - x0) / (x1 - x0) * layout.width; };
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& dist = *series[i].second;
    auto sy = [&](double v) { return base[i] - std::min(v / layout.peak, 1.0) * ridge_h; };
    auto [area, fill] = density_paths(dist, layout.lo, layout.hi, layout.width, sx, sy);
    w.open("g", {{"class", "ridge"}, {"data-date", series[i].first.str()}});
    w.element("path", {{"class", "ridge-area"}, {"d", area.str()}, {"fill", "#ffffff"},
                       {"stroke", "#333333"}, {"stroke-width", "1.00"}});
    if (!fill.empty()) {
      w.element("path", {{"class", "majority-fill"}, {"d", fill.str()},
                         {"fill", color(theme.majority_color)}, {"stroke", "none"}});
    }
    const double ci_lo = sx(std::clamp(dist.ci95.first, x0, x1));
    const double ci_hi = sx(std::clamp(dist.ci95.second, x0, x1));
    rect(w, "ci95", ci_lo, base[i] - 1.5, ci_hi - ci_lo, 3.0, color(theme.ci_color));
    w.close();
  }
  vline(w, sx(0.5), layout.top, layout.bottom, "ref-50", "#000000", {}, 1.5);
}

inline void share_axis(svg::Writer& w, double left, double width, double y, double x0,
                       double x1) {
  hline(w, left, left + width, y, "axis", "#333333");
  const double step = (x1 - x0) > 0.4 ? 0.1 : 0.05;
  for (double t = std::ceil(x0 / step - 1e-9) * step; t <= x1 + 1e-9; t += step) {
    const double x = left + (t - x0) / (x1 - x0) * width;
    w.text(x, y + 16.0, percent_label(t), {{"class", "tick"}, {"text-anchor", "middle"}});
  }
}

}  // namespace viz_detail

/// Plain bar chart of one poll's reported shares, one bar per registry party.
inline SvgDocument render_classic_bars(const Poll& poll, const PartyRegistry& registry,
                                       const Theme& theme, const Provenance& prov) {
  using namespace viz_detail;
  if (poll.shares.size() != registry.size()) throw Error("shape", "poll does not match registry");
  auto w = begin(theme, prov,
                 fmt::format("{} ({}, n={})", poll.pollster, poll.publish_date.str(),
                             poll.sample_size));
  const Frame f = frame(theme, 40.0, 20.0, 50.0, 40.0);
  double top_share = 0.0;
  for (double s : poll.shares) top_share = std::max(top_share, s);
  const double y_max = std::max(0.1, std::ceil(top_share * 10.0 - 1e-9) / 10.0);
  const double slot = f.width() / static_cast<double>(registry.size());
  for (std::size_t k = 0; k < registry.size(); ++k) {
    const double h = poll.shares[k] / y_max * f.height();
    const double x = f.left + static_cast<double>(k) * slot + 0.15 * slot;
    rect(w, "bar", x, f.bottom - h, 0.7 * slot, h, color(registry[k].color), registry[k].id);
    w.text(x + 0.35 * slot, f.bottom - h - 5.0, percent_label(poll.shares[k]),
           {{"class", "bar-label"}, {"text-anchor", "middle"}});
    w.text(x + 0.35 * slot, f.bottom + 16.0, registry[k].name,
           {{"class", "party-label"}, {"text-anchor", "middle"}});
  }
  hline(w, f.left, f.right, f.bottom, "axis", "#333333");
  return {w.finish()};
}

/// Horizontal PoE bars. Bar color is the coalition member with the largest
/// posterior mean share; the light-gray overlay is the subset probability.
inline SvgDocument render_poe_bars(std::span<const CoalitionPoE> bars,
                                   const PartyRegistry& registry,
                                   std::span<const double> mean_shares, const Theme& theme,
                                   const Provenance& prov) {
  using namespace viz_detail;
  if (mean_shares.size() != registry.size()) {
    throw Error("shape", "mean shares do not match registry");
  }
  auto w = begin(theme, prov, "Probability of a seat majority");
  const Frame f = frame(theme, 150.0, 70.0, 50.0, 40.0);
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double x = f.left + t * f.width();
    vline(w, x, f.top, f.bottom, "grid", "#e0e0e0");
    w.text(x, f.bottom + 16.0, percent_label(t), {{"class", "tick"}, {"text-anchor", "middle"}});
  }
  const double row = f.height() / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& bar = bars[i];
    const auto members = registry.indices_of(bar.parties);
    std::size_t strongest = members.front();
    for (std::size_t k : members) {
      if (mean_shares[k] > mean_shares[strongest]) strongest = k;
    }
    const double y = f.top + static_cast<double>(i) * row + 0.2 * row;
    const double h = 0.6 * row;
    const double p = std::clamp(bar.result.probability, 0.0, 1.0);
    const double sub = std::clamp(bar.result.subset_probability, 0.0, p);
    w.open("g", {{"class", "poe-row"}, {"data-coalition", bar.label}});
    w.text(f.left - 8.0, y + h / 2.0 + 4.0, bar.label,
           {{"class", "row-label"}, {"text-anchor", "end"}});
    rect(w, "poe-bar", f.left, y, p * f.width(), h, color(registry[strongest].color),
         registry[strongest].id);
    if (sub > 0.0) rect(w, "poe-subset", f.left, y, sub * f.width(), h, color(theme.subset_color));
    w.text(f.left + p * f.width() + 6.0, y + h / 2.0 + 4.0, percent_label(p),
           {{"class", "value-label"}});
    w.close();
  }
  return {w.finish()};
}

/// Density of a coalition's joint seat share with the majority region in
/// blue, the 95% interval as an orange bar, and a line at 50%.
inline SvgDocument render_seat_density(const SeatShareDistribution& dist, const Theme& theme,
                                       const Provenance& prov, std::string_view label = {}) {
  using namespace viz_detail;
  if (dist.density.x.size() < 2) throw Error("shape", "density grid is empty");
  auto w = begin(theme, prov, label.empty() ? "Seat share distribution" : label);
  const Frame f = frame(theme, 40.0, 30.0, 45.0, 55.0);
  const SeatShareDistribution* one[] = {&dist};
  const auto [lo, hi] = density_window(one);
  const auto& g = dist.density;
  const double x0 = g.x[lo];
  const double x1 = g.x[hi];
  const auto samples = density_curve(g, lo, hi, f.width());
  double peak = 1e-12;
  for (const auto& [x, y] : samples) peak = std::max(peak, y);
  const double ci_band = 14.0;
  const double plot_bottom = f.bottom - ci_band;
  auto sx = [&](double x) { return f.left + (x - x0) / (x1 - x0) * f.width(); };
  auto sy = [&](double v) { return plot_bottom - v / (1.05 * peak) * (plot_bottom - f.top); };

  auto [area, fill] = density_paths(dist, lo, hi, f.width(), sx, sy);
  w.element("path", {{"class", "density-area"}, {"d", area.str()}, {"fill", "#eeeeee"},
                     {"stroke", "none"}});
  if (!fill.empty()) {
    w.element("path", {{"class", "majority-fill"}, {"d", fill.str()},
                       {"fill", color(theme.majority_color)}, {"stroke", "none"}});
  }
  svg::PathData curve;
  for (const auto& [x, y] : samples) {
    if (x == samples.front().first) {
      curve.move(sx(x), sy(y));
    } else {
      curve.line(sx(x), sy(y));
    }
  }
  w.element("path", {{"class", "density"}, {"d", curve.str()}, {"fill", "none"},
                     {"stroke", "#333333"}, {"stroke-width", "1.50"}});
  const double ci_lo = sx(std::clamp(dist.ci95.first, x0, x1));
  const double ci_hi = sx(std::clamp(dist.ci95.second, x0, x1));
  rect(w, "ci95", ci_lo, plot_bottom + 4.0, ci_hi - ci_lo, 6.0, color(theme.ci_color));
  vline(w, sx(0.5), f.top, f.bottom, "ref-50", "#000000", {}, 1.5);
  share_axis(w, f.left, f.width(), f.bottom, x0, x1);
  w.text(f.right, f.top, "P(majority) " + percent_label(dist.majority_mass),
         {{"class", "majority-label"}, {"text-anchor", "end"}});
  return {w.finish()};
}

/// One stacked bar per simulated parliament, coalition parties first in the
/// given order, with dashed quartile lines.
inline SvgDocument render_parliaments(std::span<const SeatAllocation> allocs,
                                      std::span<const std::string> coalition,
                                      const PartyRegistry& registry, const Theme& theme,
                                      const Provenance& prov) {
  using namespace viz_detail;
  const auto members = registry.indices_of(coalition);
  std::vector<std::size_t> order = members;
  for (std::size_t k = 0; k < registry.size(); ++k) {
    if (std::find(members.begin(), members.end(), k) == members.end()) order.push_back(k);
  }
  auto w = begin(theme, prov, "Simulated parliaments");
  const Frame f = frame(theme, 60.0, 90.0, 45.0, 30.0);
  const double row = f.height() / static_cast<double>(std::max<std::size_t>(allocs.size(), 1));
  for (std::size_t r = 0; r < allocs.size(); ++r) {
    const auto& alloc = allocs[r];
    if (alloc.seats.size() != registry.size()) {
      throw Error("shape", "allocation does not match registry");
    }
    const double y = f.top + static_cast<double>(r) * row + 0.15 * row;
    const double h = 0.7 * row;
    w.open("g", {{"class", "parliament"}, {"data-index", std::to_string(r + 1)}});
    w.text(f.left - 8.0, y + h / 2.0 + 4.0, fmt::format("#{}", r + 1),
           {{"class", "row-label"}, {"text-anchor", "end"}});
    if (alloc.hung()) {
      w.element("rect", {{"class", "hung-bar"}, {"x", svg::num(f.left)}, {"y", svg::num(y)},
                         {"width", svg::num(f.width())}, {"height", svg::num(h)},
                         {"fill", "none"}, {"stroke", "#999999"}});
      w.text(f.left + f.width() / 2.0, y + h / 2.0 + 4.0, "hung",
             {{"class", "hung"}, {"text-anchor", "middle"}});
      w.close();
      continue;
    }
    int total = 0;
    for (int s : alloc.seats) total += s;
    int cum = 0;
    for (std::size_t k : order) {
      const int s = alloc.seats[k];
      if (s == 0) continue;
      // Rounded edges telescope, so the segments tile the bar exactly.
      const double xa = round2(f.left + f.width() * cum / total);
      const double xb = round2(f.left + f.width() * (cum + s) / total);
      rect(w, "seat-segment", xa, y, xb - xa, h, color(registry[k].color), registry[k].id);
      cum += s;
    }
    const int joint = coalition_seats(alloc, members);
    w.text(f.right + 6.0, y + h / 2.0 + 4.0, fmt::format("{} / {}", joint, total),
           {{"class", "coalition-seats"}});
    w.close();
  }
  for (double q : {0.25, 0.5, 0.75}) {
    vline(w, f.left + q * f.width(), f.top, f.bottom, "quartile", color(theme.quartile_color),
          "4,3");
  }
  return {w.finish()};
}

/// Stacked densities over time: oldest ridge at the top, newest at the
/// bottom and drawn last. Blue marks majorities; the black line is 50%.
inline SvgDocument render_ridgeline(std::span<const std::pair<Date, SeatShareDistribution>> series,
                                    const Theme& theme, const Provenance& prov) {
  using namespace viz_detail;
  if (series.empty()) throw Error("empty-request", "ridgeline needs at least one date");
  const auto sorted = sorted_series(series);
  std::vector<const SeatShareDistribution*> dists;
  for (const auto& [d, dist] : sorted) dists.push_back(dist);
  const auto [lo, hi] = density_window(dists);
  auto w = begin(theme, prov, "Seat share over time");
  const Frame f = frame(theme, 100.0, 30.0, 45.0, 45.0);
  const double peak = curve_peak(dists, lo, hi, f.width());

  double ridge_h = 0.0;
  const auto base = ridge_baselines(sorted.size(), f.top, f.bottom - 10.0, ridge_h);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    w.text(f.left - 8.0, base[i], sorted[i].first.str(),
           {{"class", "date-label"}, {"text-anchor", "end"}});
  }
  w.open("g", {{"class", "pane"}, {"transform", fmt::format("translate({},0)", svg::num(f.left))}});
  draw_ridges(w, sorted, {f.top, f.bottom - 10.0, f.width(), lo, hi, peak}, theme);
  w.close();
  share_axis(w, f.left, f.width(), f.bottom, dists.front()->density.x[lo],
             dists.front()->density.x[hi]);
  return {w.finish()};
}

/// y position of a probability on the timeline axis, as a fraction of the
/// plot height from the bottom. Logit scale clamps to [1%, 99%].
inline double poe_axis_position(double p, bool logit) {
  if (!logit) return std::clamp(p, 0.0, 1.0);
  const auto lg = [](double q) { return std::log(q / (1.0 - q)); };
  const double q = std::clamp(p, 0.01, 0.99);
  return (lg(q) - lg(0.01)) / (lg(0.99) - lg(0.01));
}

/// PoE over time. The y axis is logit by default (pass logit = false for a
/// linear axis); labels always show true probabilities.
inline SvgDocument render_poe_timeline(std::span<const std::pair<Date, PoEResult>> series,
                                       const Theme& theme, const Provenance& prov,
                                       bool logit = true) {
  using namespace viz_detail;
  if (series.empty()) throw Error("empty-request", "timeline needs at least one date");
  std::vector<std::pair<Date, double>> pts;
  for (const auto& [d, r] : series) pts.emplace_back(d, r.probability);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  auto w = begin(theme, prov, "Probability of a majority over time");
  const Frame f = frame(theme, 60.0, 30.0, 45.0, 45.0);
  const long d0 = pts.front().first.serial();
  const long d1 = pts.back().first.serial();
  auto sx = [&](Date d) {
    if (d1 == d0) return f.left + f.width() / 2.0;
    return f.left + static_cast<double>(d.serial() - d0) / static_cast<double>(d1 - d0) *
                        f.width();
  };
  auto sy = [&](double p) { return f.bottom - poe_axis_position(p, logit) * f.height(); };

  for (double level : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
    const double y = sy(level);
    hline(w, f.left, f.right, y, level == 0.5 ? "grid grid-50" : "grid", "#d0d0d0");
    w.text(f.left - 6.0, y + 4.0, percent_label(level),
           {{"class", "tick"}, {"text-anchor", "end"}});
  }
  svg::PathData line;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == 0) {
      line.move(sx(pts[i].first), sy(pts[i].second));
    } else {
      line.line(sx(pts[i].first), sy(pts[i].second));
    }
  }
  w.element("path", {{"class", "poe-line"}, {"d", line.str()}, {"fill", "none"},
                     {"stroke", color(theme.majority_color)}, {"stroke-width", "2.00"}});
  for (const auto& [d, p] : pts) {
    w.element("circle", {{"class", "poe-point"}, {"data-date", d.str()}, {"cx", svg::num(sx(d))},
                         {"cy", svg::num(sy(p))}, {"r", "3.00"},
                         {"fill", color(theme.majority_color)}});
  }
  w.text(f.left, f.bottom + 18.0, pts.front().first.str(), {{"class", "tick"}});
  if (pts.size() > 1) {
    w.text(f.right, f.bottom + 18.0, pts.back().first.str(),
           {{"class", "tick"}, {"text-anchor", "end"}});
  }
  return {w.finish()};
}

/// Party shares over time with 95% bands, poll dots, a vertical line at
/// as_of, and election day at the right edge of the x axis.
inline SvgDocument render_fan_chart(const FanChart& fan, std::span<const Poll> polls,
                                    const PartyRegistry& registry, const Theme& theme,
                                    const Provenance& prov) {
  using namespace viz_detail;
  if (fan.series.empty() || fan.series.front().empty()) {
    throw Error("empty-request", "fan chart has no points");
  }
  const auto party_idx = registry.indices_of(fan.parties);
  Date start = fan.series.front().front().date;
  double top_share = 0.0;
  for (const auto& s : fan.series) {
    for (const auto& p : s) top_share = std::max(top_share, p.high);
  }
  for (const auto& poll : polls) {
    if (poll.publish_date > fan.election_date) continue;
    start = std::min(start, poll.publish_date);
    for (std::size_t k : party_idx) top_share = std::max(top_share, poll.shares.at(k));
  }
  const double y_max = std::max(0.1, std::ceil(top_share * 10.0 - 1e-9) / 10.0);
  auto w = begin(theme, prov, "Poll-based forecast to election day");
  const Frame f = frame(theme, 50.0, 30.0, 45.0, 45.0);
  const double span_days = std::max(1, fan.election_date - start);
  auto sx = [&](Date d) { return f.left + (d - start) / span_days * f.width(); };
  auto sy = [&](double s) { return f.bottom - std::clamp(s / y_max, 0.0, 1.0) * f.height(); };

  for (double t = 0.0; t <= y_max + 1e-9; t += 0.1) {
    hline(w, f.left, f.right, sy(t), "grid", "#e6e6e6");
    w.text(f.left - 6.0, sy(t) + 4.0, percent_label(t),
           {{"class", "tick"}, {"text-anchor", "end"}});
  }
  for (std::size_t j = 0; j < fan.parties.size(); ++j) {
    const auto& pts = fan.series[j];
    const auto& party = registry[party_idx[j]];
    svg::PathData band;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == 0) {
        band.move(sx(pts[i].date), sy(pts[i].high));
      } else {
        band.line(sx(pts[i].date), sy(pts[i].high));
      }
    }
    for (std::size_t i = pts.size(); i-- > 0;) band.line(sx(pts[i].date), sy(pts[i].low));
    band.close();
    svg::PathData mean;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == 0) {
        mean.move(sx(pts[i].date), sy(pts[i].mean));
      } else {
        mean.line(sx(pts[i].date), sy(pts[i].mean));
      }
    }
    w.open("g", {{"class", "party"}, {"data-party", party.id}});
    w.element("path", {{"class", "band"}, {"d", band.str()}, {"fill", color(party.color)},
                       {"fill-opacity", "0.25"}, {"stroke", "none"}});
    w.element("path", {{"class", "mean-line"}, {"d", mean.str()}, {"fill", "none"},
                       {"stroke", color(party.color)}, {"stroke-width", "1.50"}});
    for (const auto& poll : polls) {
      if (poll.publish_date > fan.election_date) continue;
      w.element("circle", {{"class", "poll-dot"}, {"cx", svg::num(sx(poll.publish_date))},
                           {"cy", svg::num(sy(poll.shares[party_idx[j]]))}, {"r", "2.00"},
                           {"fill", color(party.color)}});
    }
    w.close();
  }
  vline(w, sx(fan.as_of), f.top, f.bottom, "today", "#000000", {}, 1.5);
  hline(w, f.left, f.right, f.bottom, "axis", "#333333");
  w.text(f.left, f.bottom + 18.0, start.str(), {{"class", "tick"}});
  w.text(f.right, f.bottom + 18.0, fan.election_date.str(),
         {{"class", "tick election-day"}, {"text-anchor", "end"}});
  return {w.finish()};
}

/// Nowcast ridges (left) next to forecasts made on the same dates for
/// election day (right). Both panes share the x range and the density
/// scale, so equal inputs produce equal path data.
inline SvgDocument render_forecast_ridgeline(
    std::span<const std::pair<Date, SeatShareDistribution>> nowcast,
    std::span<const std::pair<Date, SeatShareDistribution>> forecast, const Theme& theme,
    const Provenance& prov) {
  using namespace viz_detail;
  if (nowcast.empty() || forecast.empty()) {
    throw Error("empty-request", "both panes need at least one date");
  }
  const auto now_sorted = sorted_series(nowcast);
  const auto fc_sorted = sorted_series(forecast);
  std::vector<const SeatShareDistribution*> dists;
  for (const auto* s : {&now_sorted, &fc_sorted}) {
    for (const auto& [d, dist] : *s) dists.push_back(dist);
  }
  const auto [lo, hi] = density_window(dists);
  auto w = begin(theme, prov, "Nowcast and forecast");
  const Frame f = frame(theme, 100.0, 30.0, 60.0, 45.0);
  const double gap = 30.0;
  const double pane_w = (f.width() - gap) / 2.0;
  const double peak = curve_peak(dists, lo, hi, pane_w);

  double ridge_h = 0.0;
  const auto base = ridge_baselines(now_sorted.size(), f.top, f.bottom - 10.0, ridge_h);
  for (std::size_t i = 0; i < now_sorted.size(); ++i) {
    w.text(f.left - 8.0, base[i], now_sorted[i].first.str(),
           {{"class", "date-label"}, {"text-anchor", "end"}});
  }
  const RidgeLayout layout{f.top, f.bottom - 10.0, pane_w, lo, hi, peak};
  const double x0 = dists.front()->density.x[lo];
  const double x1 = dists.front()->density.x[hi];
  const std::pair<const char*, const std::vector<std::pair<Date, const SeatShareDistribution*>>*>
      panes[] = {{"nowcast", &now_sorted}, {"forecast", &fc_sorted}};
  for (std::size_t p = 0; p < 2; ++p) {
    const double left = f.left + static_cast<double>(p) * (pane_w + gap);
    w.text(left + pane_w / 2.0, f.top - 12.0, p == 0 ? "Nowcast" : "Forecast",
           {{"class", "pane-title"}, {"text-anchor", "middle"}});
    w.open("g", {{"class", "pane"}, {"data-pane", panes[p].first},
                 {"transform", fmt::format("translate({},0)", svg::num(left))}});
    draw_ridges(w, *panes[p].second, layout, theme);
    w.close();
    share_axis(w, left, pane_w, f.bottom, x0, x1);
  }
  return {w.finish()};
}

}  // namespace koalition
