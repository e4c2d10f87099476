#include "qsvm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsvm {
namespace {

const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string register_svg(const Register& reg, const HardwareConstraints& constraints) {
  const double size = 400.0;
  const double half = size / 2.0;
  const double extent = constraints.max_radius * 1.1;
  const double px = half / extent;
  const Eigen::RowVector2d c = reg.size() > 0 ? reg.centroid() : Eigen::RowVector2d::Zero();

  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<circle cx=\"" << half << "\" cy=\"" << half << "\" r=\"" << constraints.max_radius * px
      << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  for (Eigen::Index i = 0; i < reg.size(); ++i) {
    const double x = half + (reg.coords(i, 0) - c[0]) * px;
    const double y = half - (reg.coords(i, 1) - c[1]) * px;
    out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << constraints.min_distance / 2.0 * px
        << "\" fill=\"#4C72B0\" fill-opacity=\"0.35\" stroke=\"#4C72B0\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << y + 4 << "\" font-size=\"11\" text-anchor=\"middle\">" << i << "</text>\n";
  }
  out << "<text x=\"8\" y=\"16\" font-size=\"12\">" << reg.size() << " atoms, r_max " << constraints.max_radius
      << " um</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string grouped_bar_svg(const std::string& title, const std::vector<std::string>& series,
                            const std::vector<BarGroup>& groups) {
  const double left = 50, right = 20, top = 40, bottom = 120;
  const double bar = 14, gap = 16;
  const double group_width = bar * std::max<std::size_t>(series.size(), 1) + gap;
  const double plot_w = std::max(200.0, group_width * groups.size());
  const double plot_h = 260;
  const double width = left + plot_w + right;
  const double height = top + plot_h + bottom;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << escape(title)
      << "</text>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    out << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(v) << "\" y2=\"" << y_of(v)
        << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << y_of(v) + 4 << "\" font-size=\"10\" text-anchor=\"end\">" << v
        << "</text>\n";
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = left + g * group_width + gap / 2;
    for (std::size_t s = 0; s < groups[g].means.size() && s < series.size(); ++s) {
      const double m = groups[g].means[s];
      if (!std::isfinite(m)) continue;
      const double x = x0 + s * bar;
      out << "<rect x=\"" << x << "\" y=\"" << y_of(m) << "\" width=\"" << bar - 2 << "\" height=\""
          << y_of(0) - y_of(m) << "\" fill=\"" << kPalette[s % 6] << "\"/>\n";
      const double sd = s < groups[g].stds.size() ? groups[g].stds[s] : 0.0;
      if (sd > 0.0) {
        const double cx = x + (bar - 2) / 2;
        out << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y_of(m + sd) << "\" y2=\"" << y_of(m - sd)
            << "\" stroke=\"black\"/>\n";
      }
    }
    const double lx = x0 + bar * series.size() / 2;
    out << "<text transform=\"translate(" << lx << ',' << top + plot_h + 10
        << ") rotate(45)\" font-size=\"10\">" << escape(groups[g].label) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double x = left + s * 90;
    out << "<rect x=\"" << x << "\" y=\"" << height - 18 << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[s % 6]
        << "\"/>\n";
    out << "<text x=\"" << x + 14 << "\" y=\"" << height - 9 << "\" font-size=\"11\">" << escape(series[s])
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace qsvm
