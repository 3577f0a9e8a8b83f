#include "unotb/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "unotb/error.hpp"

namespace unotb {

void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterLayer>& layers, int width,
                       int height) {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const ScatterLayer& layer : layers) {
    if (layer.points.empty()) continue;
    if (layer.points.cols() != 2)
      throw IoError("scatter layer '" + layer.name + "' is not 2-D: " +
                    layer.points.shape_str());
    for (int64_t i = 0; i < layer.points.rows(); ++i) {
      lo_x = std::min(lo_x, layer.points.at(i, 0));
      hi_x = std::max(hi_x, layer.points.at(i, 0));
      lo_y = std::min(lo_y, layer.points.at(i, 1));
      hi_y = std::max(hi_y, layer.points.at(i, 1));
    }
  }
  if (lo_x > hi_x) throw IoError("nothing to plot");
  const double pad_x = std::max(1e-9, 0.05 * (hi_x - lo_x));
  const double pad_y = std::max(1e-9, 0.05 * (hi_y - lo_y));
  lo_x -= pad_x, hi_x += pad_x, lo_y -= pad_y, hi_y += pad_y;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  out << buf
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\" "
         "stroke=\"#444\"/>\n";

  const auto px = [&](double x) {
    return (x - lo_x) / (hi_x - lo_x) * (width - 20) + 10.0;
  };
  const auto py = [&](double y) {  // flip: SVG y grows downward
    return (hi_y - y) / (hi_y - lo_y) * (height - 20) + 10.0;
  };

  for (const ScatterLayer& layer : layers) {
    out << "<g fill=\"" << layer.color << "\" fill-opacity=\"0.6\">\n";
    for (int64_t i = 0; i < layer.points.rows(); ++i) {
      std::snprintf(buf, sizeof buf,
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n",
                    px(layer.points.at(i, 0)), py(layer.points.at(i, 1)),
                    layer.radius);
      out << buf;
    }
    out << "</g>\n";
  }

  double ly = 22.0;
  for (const ScatterLayer& layer : layers) {
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"18\" cy=\"%.0f\" r=\"4\" fill=\"%s\"/>"
                  "<text x=\"28\" y=\"%.0f\" font-size=\"13\" "
                  "font-family=\"sans-serif\">%s</text>\n",
                  ly - 4.0, layer.color.c_str(), ly, layer.name.c_str());
    out << buf;
    ly += 18.0;
  }
  out << "</svg>\n";
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace unotb
