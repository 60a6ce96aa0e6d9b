#pragma once

#include <string>
#include <vector>

namespace structeval {

// Minimal line/scatter chart writer; enough for sweep curves and the
// accuracy-vs-effect scatter, with no rendering dependency.
class SvgChart {
public:
  SvgChart(std::string title, std::string x_label, std::string y_label);

  void add_line(const std::string& name, const std::vector<double>& x,
                const std::vector<double>& y);
  void add_scatter(const std::string& name, const std::vector<double>& x,
                   const std::vector<double>& y);

  std::string render() const;

private:
  struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool line = true;
  };

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> series_;
};

} // namespace structeval
