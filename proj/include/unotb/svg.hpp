#pragma once

#include <string>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

// Minimal scatter rendering: each layer is a point cloud with a name (for
// the legend), a CSS color and a dot radius. Bounds are shared across
// layers; output is a self-contained SVG file.
struct ScatterLayer {
  std::string name;
  Tensor points;  // [n, 2]
  std::string color = "#1f77b4";
  double radius = 2.0;
};

void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterLayer>& layers,
                       int width = 640, int height = 640);

}  // namespace unotb
