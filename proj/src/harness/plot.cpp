#include "deepex/harness/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "deepex/errors.hpp"
#include "deepex/harness/csv.hpp"

namespace deepex::harness {
namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 60, kRight = 180, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_learning_curve(const MetricsTable& table, const std::string& title) {
  std::size_t points = 0;
  double y_max = 1.0;
  for (const auto& a : table.agents) {
    points = std::max(points, a.curve_mean.size());
    for (std::size_t i = 0; i < a.curve_mean.size(); ++i) y_max = std::max(y_max, a.curve_mean[i] + a.curve_std_err[i]);
  }
  if (table.agents.empty() || points == 0) throw ValidationError("nothing to plot");

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](std::size_t i) {
    return points == 1 ? kLeft + plot_w / 2 : kLeft + plot_w * static_cast<double>(i) / static_cast<double>(points - 1);
  };
  const auto y_of = [&](double v) { return kTop + plot_h * (1.0 - v / y_max); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    svg << "<text x=\"" << num(kLeft) << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";

  // Axes, ticks and labels.
  svg << "<g stroke=\"black\" fill=\"none\">\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(kLeft + plot_w)
      << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kTop + plot_h) << "\"/>\n";
  svg << "</g>\n<g fill=\"black\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y_max * k / 4.0;
    svg << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y_of(v) + 4) << "\" text-anchor=\"end\">" << num(v)
        << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, points / 5);
  for (std::size_t i = 0; i < points; i += step)
    svg << "<text x=\"" << num(x_of(i)) << "\" y=\"" << num(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
        << i + 1 << "</text>\n";
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">life-cycle</text>\n";
  svg << "<text x=\"16\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(kTop + plot_h / 2) << ")\">mean life-cycle reward</text>\n";
  svg << "</g>\n";

  for (std::size_t a = 0; a < table.agents.size(); ++a) {
    const auto& m = table.agents[a];
    const char* color = kPalette[a % std::size(kPalette)];
    std::ostringstream band, line;
    for (std::size_t i = 0; i < m.curve_mean.size(); ++i)
      band << (i ? " " : "") << num(x_of(i)) << ',' << num(y_of(m.curve_mean[i] + m.curve_std_err[i]));
    for (std::size_t i = m.curve_mean.size(); i-- > 0;)
      band << ' ' << num(x_of(i)) << ',' << num(y_of(m.curve_mean[i] - m.curve_std_err[i]));
    for (std::size_t i = 0; i < m.curve_mean.size(); ++i)
      line << (i ? " " : "") << num(x_of(i)) << ',' << num(y_of(m.curve_mean[i]));
    svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\""
        << band.str() << "\"/>\n";
    svg << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << line.str() << "\"/>\n";

    const double ly = kTop + 10 + 20.0 * static_cast<double>(a);
    const double lx = kLeft + plot_w + 16;
    svg << "<g class=\"legend\"><line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << num(lx + 26)
        << "\" y=\"" << num(ly + 4) << "\">" << escape(m.agent) << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::filesystem::path& records_csv, const std::filesystem::path& svg_out) {
  const auto records = read_records(records_csv);
  if (records.empty()) throw ValidationError(records_csv.string() + " has no records");
  const auto svg = render_learning_curve(compute_metrics(records), records.front().run_id);
  std::ofstream out(svg_out, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + svg_out.string());
  out << svg;
}

}  // namespace deepex::harness
