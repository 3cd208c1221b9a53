// Self-contained SVG line plots of accuracy curves and benchmark tables.
#ifndef CROWDBQP_SVG_PLOT_HPP
#define CROWDBQP_SVG_PLOT_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdbqp {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

std::string render_line_plot(const std::vector<Series>& series, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel);

/// threshold,accuracy files plot one curve; bench files plot mean iterations per variant
/// against size.
std::string plot_csv(std::istream& csv);

}  // namespace crowdbqp

#endif  // CROWDBQP_SVG_PLOT_HPP
