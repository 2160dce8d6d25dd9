#include "flowvs/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "flowvs/csv.hpp"
#include "flowvs/errors.hpp"

namespace flowvs {

namespace {

constexpr double kWidth = 640;
constexpr double kPanelHeight = 260;
constexpr double kLeft = 70, kRight = 150, kTop = 30, kBottom = 40;
constexpr int kTicks = 5;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (lo > hi) {
      lo = 0;
      hi = 1;
    } else if (lo == hi) {
      const double pad = lo == 0 ? 1.0 : 0.5 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

void render_panel(std::string& out, const Chart& c, double y0) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kPanelHeight - kTop - kBottom;
  const double top = y0 + kTop;

  Range xr, yr;
  for (const Series& s : c.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(s.y[i]);
    }
  }
  xr.finish();
  if (c.y_min < c.y_max) {
    yr.lo = c.y_min;
    yr.hi = c.y_max;
  }
  yr.finish();
  auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  out += "<g>\n";
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(y0 + 18) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + escape(c.title) + "</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double f = static_cast<double>(i) / kTicks;
    const double xv = xr.lo + f * (xr.hi - xr.lo);
    const double yv = yr.lo + f * (yr.hi - yr.lo);
    const double px = sx(xv), py = sy(yv);
    out += "<line x1=\"" + num(px) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(px) +
           "\" y2=\"" + num(top + ph + 4) + "\" stroke=\"#000\"/>\n";
    out += "<text x=\"" + num(px) + "\" y=\"" + num(top + ph + 16) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + tick_label(xv) + "</text>\n";
    out += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(py) + "\" stroke=\"#000\"/>\n";
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py + 3) +
           "\" text-anchor=\"end\" font-size=\"10\">" + tick_label(yv) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(top + ph + 32) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + escape(c.x_label) + "</text>\n";
  out += "<text x=\"14\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" font-size=\"11\" " +
         "transform=\"rotate(-90 14 " + num(top + ph / 2) + ")\">" + escape(c.y_label) +
         "</text>\n";

  for (std::size_t si = 0; si < c.series.size(); ++si) {
    const Series& s = c.series[si];
    const char* color = kColors[si % std::size(kColors)];
    std::string pts;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(sx(s.x[i])) + ',' + num(sy(s.y[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = top + 12 + 16 * static_cast<double>(si);
    out += "<line x1=\"" + num(kLeft + pw + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kLeft + pw + 28) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kLeft + pw + 32) + "\" y=\"" + num(ly + 4) +
           "\" font-size=\"10\">" + escape(s.label) + "</text>\n";
  }
  out += "</g>\n";
}

std::vector<double> column(const CsvTable& t, std::string_view name) {
  const int c = t.column(name);
  if (c < 0) throw FormatError("plot: missing column " + std::string(name), 1);
  std::vector<double> out;
  out.reserve(t.rows.size());
  std::size_t line = t.comments.size() + 1;
  for (const auto& row : t.rows) out.push_back(parse_number(row[static_cast<std::size_t>(c)], ++line));
  return out;
}

std::vector<Chart> trajectory_charts(const CsvTable& t) {
  const auto it = column(t, "iter");
  Chart err{"Pose error", "iteration", "error", {}};
  err.series.push_back({"t_err [m]", it, column(t, "t_err")});
  err.series.push_back({"r_err [deg]", it, column(t, "r_err")});
  Chart lin{"Translational velocity", "iteration", "m/s", {}};
  Chart ang{"Rotational velocity", "iteration", "rad/s", {}};
  const char* axes[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    lin.series.push_back({std::string("v") + axes[i], it, column(t, "v" + std::to_string(i + 1))});
    ang.series.push_back({std::string("w") + axes[i], it, column(t, "v" + std::to_string(i + 4))});
  }
  std::vector<Chart> out{err, lin, ang};
  const auto photo = column(t, "photo_err");
  if (std::any_of(photo.begin(), photo.end(), [](double v) { return std::isfinite(v); })) {
    Chart ph{"Photometric error", "iteration", "mean |I - I*|", {}};
    ph.series.push_back({"photo_err", it, photo});
    out.push_back(ph);
  }
  return out;
}

std::vector<Chart> sweep_charts(const CsvTable& t) {
  Chart c{"Convergence ratio", "per-axis offset [m]", "ratio", {}, 0.0, 1.0};
  const auto off = column(t, "offset_m");
  for (const auto& h : t.header)
    if (h.rfind("ratio_", 0) == 0) c.series.push_back({h.substr(6), off, column(t, h)});
  return {c};
}

std::vector<Chart> report_charts(const CsvTable& t) {
  const int mc = t.column("method");
  std::vector<std::string> methods;
  for (const auto& row : t.rows) {
    const auto& m = row[static_cast<std::size_t>(mc)];
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
  }
  const auto ft = column(t, "final_t_err");
  const auto fr = column(t, "final_r_err");
  Chart ct{"Final translation error per task", "task index", "t_err [m]", {}};
  Chart cr{"Final rotation error per task", "task index", "r_err [deg]", {}};
  for (const auto& m : methods) {
    Series st{m, {}, {}}, sr{m, {}, {}};
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i][static_cast<std::size_t>(mc)] != m) continue;
      const double idx = static_cast<double>(st.x.size());
      st.x.push_back(idx);
      st.y.push_back(ft[i]);
      sr.x.push_back(idx);
      sr.y.push_back(fr[i]);
    }
    ct.series.push_back(std::move(st));
    cr.series.push_back(std::move(sr));
  }
  return {ct, cr};
}

}  // namespace

std::string render_svg(const std::vector<Chart>& panels) {
  const double height = kPanelHeight * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(kWidth) + ' ' + num(height) +
         "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    render_panel(out, panels[i], kPanelHeight * static_cast<double>(i));
  out += "</svg>\n";
  return out;
}

std::string render_plots(std::string_view csv) {
  const CsvTable t = parse_csv(csv);
  if (t.column("iter") >= 0 && t.column("t_err") >= 0) return render_svg(trajectory_charts(t));
  if (t.column("offset_m") >= 0) return render_svg(sweep_charts(t));
  if (t.column("final_t_err") >= 0 && t.column("method") >= 0)
    return render_svg(report_charts(t));
  throw FormatError("plot: unrecognised CSV header", t.comments.size() + 1);
}

}  // namespace flowvs
