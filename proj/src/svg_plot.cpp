#include "crowdbqp/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace crowdbqp {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::string render_line_plot(const std::vector<Series>& series, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 55;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::min(y0, 0.0);
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5, yv = y0 + (y1 - y0) * i / 5;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n"
       << "<line x1=\"" << L << "\" y1=\"" << py(yv) << "\" x2=\"" << W - R << "\" y2=\"" << py(yv)
       << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n"
     << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << W - R + 38 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string plot_csv(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("plot: empty input");
  const auto header = split(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("plot: missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  if (header.size() >= 2 && header[0] == "threshold" && header[1] == "accuracy") {
    Series s{"accuracy", {}, {}};
    while (std::getline(csv, line)) {
      const auto cells = split(line);
      if (cells.size() < 2) continue;
      s.x.push_back(std::stod(cells[0]));
      s.y.push_back(std::stod(cells[1]));
    }
    return render_line_plot({s}, "Tracking accuracy", "pixel error threshold", "accuracy");
  }
  const std::size_t size_col = column("size"), var_col = column("variant"), it_col = column("iterations");
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  while (std::getline(csv, line)) {
    const auto cells = split(line);
    if (cells.size() <= std::max({size_col, var_col, it_col})) continue;
    auto& slot = acc[cells[var_col]][std::stod(cells[size_col])];
    slot.first += std::stod(cells[it_col]);
    slot.second += 1;
  }
  std::vector<Series> series;
  for (const auto& [variant, by_size] : acc) {
    if (variant == "exact") continue;
    Series s{variant, {}, {}};
    for (const auto& [size, sum] : by_size) {
      s.x.push_back(size);
      s.y.push_back(sum.first / sum.second);
    }
    series.push_back(std::move(s));
  }
  return render_line_plot(series, "Solver iterations", "targets", "mean iterations");
}

}  // namespace crowdbqp
