#pragma once

// Hand-emitted SVG charts. All coordinates are printed with three decimals so
// output is byte-stable.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tcsl/budget.hpp"
#include "tcsl/domain.hpp"
#include "tcsl/laws.hpp"
#include "tcsl/powerlaw.hpp"
#include "tcsl/stats.hpp"

namespace tcsl::svg {

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double norm(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }
};

inline Axis make_axis(double lo, double hi, bool log) {
  if (log) {
    lo = std::pow(10.0, std::floor(std::log10(lo) * 4.0) / 4.0);
    hi = std::pow(10.0, std::ceil(std::log10(hi) * 4.0) / 4.0);
  } else {
    const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5;
    lo -= pad;
    hi += pad;
  }
  if (!(hi > lo)) hi = lo * (log ? 10.0 : 1.0) + 1.0;
  return {lo, hi, log};
}

/// A plot area with margins; maps data coordinates to pixels.
class Canvas {
 public:
  Canvas(double width, double height, Axis x, Axis y) : w_(width), h_(height), x_(x), y_(y) {}

  double px(double v) const { return kLeft + x_.norm(v) * (w_ - kLeft - kRight); }
  double py(double v) const { return h_ - kBottom - y_.norm(v) * (h_ - kTop - kBottom); }

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
          << "\" " << style << "/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "middle", int size = 11) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size << "\" text-anchor=\"" << anchor
          << "\">" << escape(s) << "</text>\n";
  }
  void polyline(const std::vector<Point>& pts, const std::string& style) {
    if (pts.empty()) return;
    body_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) body_ << (i ? " " : "") << num(px(pts[i].x)) << ',' << num(py(pts[i].y));
    body_ << "\"/>\n";
  }
  void marker(double x, double y, const std::string& fill, double r = 3.0) {
    body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << num(r) << "\" fill=\"" << fill
          << "\"/>\n";
  }
  void raw(const std::string& s) { body_ << s; }

  void axes(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    const double x0 = kLeft, x1 = w_ - kRight, y0 = h_ - kBottom, y1 = kTop;
    line(x0, y0, x1, y0, "stroke=\"black\"");
    line(x0, y0, x0, y1, "stroke=\"black\"");
    ticks(x_, true);
    ticks(y_, false);
    text(w_ / 2.0, 18.0, title, "middle", 13);
    text(w_ / 2.0, h_ - 8.0, xlabel);
    body_ << "<text x=\"14.000\" y=\"" << num(h_ / 2.0) << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14.000 "
          << num(h_ / 2.0) << ")\">" << escape(ylabel) << "</text>\n";
  }

  std::string finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_) << "\" viewBox=\"0 0 "
        << num(w_) << ' ' << num(h_) << "\">\n"
        << "<rect x=\"0.000\" y=\"0.000\" width=\"" << num(w_) << "\" height=\"" << num(h_) << "\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

  static constexpr double kLeft = 70.0;
  static constexpr double kRight = 130.0;
  static constexpr double kTop = 30.0;
  static constexpr double kBottom = 45.0;

 private:
  void ticks(const Axis& a, bool horizontal) {
    std::vector<double> at;
    if (a.log) {
      for (int e = static_cast<int>(std::floor(std::log10(a.lo))); e <= static_cast<int>(std::ceil(std::log10(a.hi))); ++e) {
        for (double m : {1.0, 2.0, 5.0}) {
          const double v = m * std::pow(10.0, e);
          if (v >= a.lo * (1 - 1e-9) && v <= a.hi * (1 + 1e-9)) at.push_back(v);
        }
      }
    } else {
      for (int i = 0; i <= 5; ++i) at.push_back(a.lo + (a.hi - a.lo) * i / 5.0);
    }
    for (double v : at) {
      char label[32];
      std::snprintf(label, sizeof(label), a.log ? "%g" : "%.3f", v);
      if (horizontal) {
        const double x = px(v);
        line(x, h_ - kBottom, x, h_ - kBottom + 4.0, "stroke=\"black\"");
        text(x, h_ - kBottom + 16.0, label);
      } else {
        const double y = py(v);
        line(kLeft - 4.0, y, kLeft, y, "stroke=\"black\"");
        text(kLeft - 6.0, y + 4.0, label, "end");
      }
    }
  }

  double w_, h_;
  Axis x_, y_;
  std::ostringstream body_;
};

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string budget_label(double minutes) {
  char buf[32];
  if (minutes >= 60.0 && std::fmod(minutes, 60.0) == 0.0) {
    std::snprintf(buf, sizeof(buf), "%gh", minutes / 60.0);
  } else {
    std::snprintf(buf, sizeof(buf), "%gm", minutes);
  }
  return buf;
}

/// BPB against model size, one curve per budget; optima highlighted.
inline std::string u_curves(const RunGrid& grid, const TiePolicy& tie = {}) {
  double xmin = 1e300, xmax = 0, ymin = 1e300, ymax = -1e300;
  for (const auto& r : grid.records()) {
    xmin = std::min(xmin, r.params_m);
    xmax = std::max(xmax, r.params_m);
    ymin = std::min(ymin, r.val_bpb);
    ymax = std::max(ymax, r.val_bpb);
  }
  Canvas c(760, 460, make_axis(xmin, xmax, true), make_axis(ymin, ymax, false));
  c.axes("Validation BPB vs model size", "parameters (M)", "val BPB");
  const auto& budgets = grid.budgets();
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    const std::string color = kPalette[i % kPalette.size()];
    std::map<double, std::vector<double>> by_size;
    for (const auto& r : grid.at_budget(budgets[i])) by_size[r.params_m].push_back(r.val_bpb);
    std::vector<Point> pts;
    for (const auto& [p, vals] : by_size) pts.push_back({p, stats::mean(vals)});
    c.polyline(pts, "stroke=\"" + color + "\" stroke-width=\"1.5\"");
    for (const auto& p : pts) c.marker(p.x, p.y, color, 2.5);
    const auto opt = optimum_at_budget(grid, budgets[i], tie);
    for (const auto& p : pts) {
      if (std::fabs(p.y - opt.bpb) <= tie.epsilon_bpb + 1e-12) {
        c.raw("<circle cx=\"" + num(c.px(p.x)) + "\" cy=\"" + num(c.py(p.y)) +
              "\" r=\"6.000\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n");
      }
    }
    const double ly = Canvas::kTop + 14.0 + 16.0 * static_cast<double>(i);
    c.line(760 - Canvas::kRight + 12, ly - 4, 760 - Canvas::kRight + 32, ly - 4, "stroke=\"" + color + "\" stroke-width=\"2\"");
    c.text(760 - Canvas::kRight + 38, ly, budget_label(budgets[i]), "start");
  }
  return c.finish();
}

namespace detail {

inline std::vector<Point> law_curve(const PowerLawFit& f, double lo, double hi, int n = 64) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    const double t = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    pts.push_back({t, evaluate(f, t)});
  }
  return pts;
}

inline std::string fit_label(const PowerLawFit& f) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fit: a=%.4g, alpha=%.4f", f.coeff_a, f.exponent_alpha);
  return buf;
}

}  // namespace detail

/// Optimal size against budget (log-log) with the fitted law and an
/// alpha = 0.50 reference through the first anchor.
inline std::string size_law(const SizeLawResult& r) {
  const auto& anchors = r.anchors;
  double xmin = 1e300, xmax = 0, ymin = 1e300, ymax = 0;
  for (const auto& a : anchors) {
    xmin = std::min(xmin, a.budget_min);
    xmax = std::max(xmax, a.budget_min);
    ymin = std::min(ymin, a.params_m);
    ymax = std::max(ymax, a.params_m);
  }
  const double ref0 = anchors.front().params_m;
  const double t0 = anchors.front().budget_min;
  auto chin = [&](double t) { return ref0 * std::sqrt(t / t0); };
  ymin = std::min({ymin, chin(xmin), evaluate(r.fit, xmin)});
  ymax = std::max({ymax, chin(xmax), evaluate(r.fit, xmax)});
  Canvas c(760, 460, make_axis(xmin, xmax, true), make_axis(ymin, ymax, true));
  c.axes("Optimal model size vs training time", "budget (minutes)", "optimal params (M)");
  c.polyline(detail::law_curve(r.fit, xmin, xmax), "stroke=\"#d62728\" stroke-width=\"2\"");
  std::vector<Point> ref;
  for (const auto& p : detail::law_curve(r.fit, xmin, xmax)) ref.push_back({p.x, chin(p.x)});
  c.polyline(ref, "stroke=\"#1f77b4\" stroke-width=\"1.5\" stroke-dasharray=\"2,3\"");
  for (const auto& a : anchors) c.marker(a.budget_min, a.params_m, "black", 3.5);
  const double lx = 760 - Canvas::kRight + 8;
  c.line(lx, 44, lx + 20, 44, "stroke=\"#d62728\" stroke-width=\"2\"");
  c.text(lx + 24, 48, "fitted", "start");
  c.line(lx, 62, lx + 20, 62, "stroke=\"#1f77b4\" stroke-width=\"1.5\" stroke-dasharray=\"2,3\"");
  c.text(lx + 24, 66, "alpha = 0.50", "start");
  c.text(Canvas::kLeft + 8, Canvas::kTop + 14, detail::fit_label(r.fit), "start");
  return c.finish();
}

/// Best BPB against budget with the fitted loss law.
inline std::string loss_law(const std::vector<Optimum>& anchors, const PowerLawFit& fit) {
  double xmin = 1e300, xmax = 0, ymin = 1e300, ymax = 0;
  for (const auto& a : anchors) {
    xmin = std::min(xmin, a.budget_min);
    xmax = std::max(xmax, a.budget_min);
    ymin = std::min(ymin, a.bpb);
    ymax = std::max(ymax, a.bpb);
  }
  ymin = std::min(ymin, evaluate(fit, xmax));
  ymax = std::max(ymax, evaluate(fit, xmin));
  Canvas c(760, 460, make_axis(xmin, xmax, true), make_axis(ymin, ymax, false));
  c.axes("Best validation BPB vs training time", "budget (minutes)", "best val BPB");
  c.polyline(detail::law_curve(fit, xmin, xmax), "stroke=\"#2ca02c\" stroke-width=\"2\"");
  for (const auto& a : anchors) c.marker(a.budget_min, a.bpb, "black", 3.5);
  c.text(Canvas::kLeft + 8, Canvas::kTop + 14, detail::fit_label(fit), "start");
  return c.finish();
}

/// Linear blue-to-red ramp through five stops, t in [0, 1].
inline std::string ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {49, 54, 149}, {116, 173, 209}, {255, 255, 191}, {244, 109, 67}, {165, 0, 38}}};
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * 4.0;
  const std::size_t i = std::min<std::size_t>(3, static_cast<std::size_t>(s));
  const double f = s - static_cast<double>(i);
  char buf[16];
  std::array<int, 3> rgb{};
  for (std::size_t k = 0; k < 3; ++k) rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

/// Model x budget grid coloured by BPB; optima outlined in gold, missing cells grey.
inline std::string heatmap(const RunGrid& grid, const TiePolicy& tie = {}) {
  const auto& budgets = grid.budgets();
  std::vector<std::pair<double, std::string>> models;  // (params_m, id), ascending size
  for (const auto& r : grid.records()) {
    std::pair<double, std::string> key{r.params_m, r.model_id};
    if (std::find(models.begin(), models.end(), key) == models.end()) models.push_back(key);
  }
  std::sort(models.begin(), models.end());
  double lo = 1e300, hi = -1e300;
  for (const auto& r : grid.records()) {
    lo = std::min(lo, r.val_bpb);
    hi = std::max(hi, r.val_bpb);
  }
  const double cell_w = 70.0, cell_h = 30.0, left = 80.0, top = 40.0;
  const double width = left + cell_w * static_cast<double>(budgets.size()) + 120.0;
  const double height = top + cell_h * static_cast<double>(models.size()) + 50.0;
  Canvas c(width, height, Axis{}, Axis{});
  c.text(width / 2.0, 20.0, "Validation BPB by model and budget", "middle", 13);

  for (std::size_t j = 0; j < budgets.size(); ++j) {
    const auto opt = optimum_at_budget(grid, budgets[j], tie);
    c.text(left + cell_w * (static_cast<double>(j) + 0.5), top + cell_h * static_cast<double>(models.size()) + 18.0,
           budget_label(budgets[j]));
    for (std::size_t i = 0; i < models.size(); ++i) {
      const double x = left + cell_w * static_cast<double>(j);
      const double y = top + cell_h * static_cast<double>(models.size() - 1 - i);
      std::vector<double> vals;
      for (const auto& r : grid.at_budget(budgets[j])) {
        if (r.model_id == models[i].second) vals.push_back(r.val_bpb);
      }
      std::string fill = "#bdbdbd";
      std::string label;
      if (!vals.empty()) {
        const double v = stats::mean(vals);
        fill = ramp(hi > lo ? (v - lo) / (hi - lo) : 0.5);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        label = buf;
      }
      c.raw("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell_w) + "\" height=\"" + num(cell_h) +
            "\" fill=\"" + fill + "\" stroke=\"white\"/>\n");
      if (!label.empty()) c.text(x + cell_w / 2.0, y + cell_h / 2.0 + 4.0, label, "middle", 10);
      if (std::find(opt.models.begin(), opt.models.end(), models[i].second) != opt.models.end()) {
        c.raw("<rect x=\"" + num(x + 1.5) + "\" y=\"" + num(y + 1.5) + "\" width=\"" + num(cell_w - 3.0) + "\" height=\"" +
              num(cell_h - 3.0) + "\" fill=\"none\" stroke=\"#d4a017\" stroke-width=\"3\"/>\n");
      }
    }
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double y = top + cell_h * (static_cast<double>(models.size() - 1 - i) + 0.5) + 4.0;
    c.text(left - 8.0, y, models[i].second, "end");
  }
  // Colour bar.
  const double bx = left + cell_w * static_cast<double>(budgets.size()) + 30.0;
  const double bh = cell_h * static_cast<double>(models.size());
  for (int k = 0; k < 20; ++k) {
    const double t = (k + 0.5) / 20.0;
    c.raw("<rect x=\"" + num(bx) + "\" y=\"" + num(top + bh * (1.0 - (k + 1) / 20.0)) + "\" width=\"16.000\" height=\"" +
          num(bh / 20.0) + "\" fill=\"" + ramp(t) + "\"/>\n");
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", hi);
  c.text(bx + 22.0, top + 10.0, buf, "start", 10);
  std::snprintf(buf, sizeof(buf), "%.3f", lo);
  c.text(bx + 22.0, top + bh, buf, "start", 10);
  return c.finish();
}

}  // namespace tcsl::svg
