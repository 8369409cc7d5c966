#pragma once

#include <string>

#include "vorosense/fortune.hpp"

namespace vorosense {

struct RenderStyle {
  double stroke_width = 1.0;
  double site_radius = 2.5;
  std::string color_scheme = "pastel";  // "pastel" or "mono"
  int image_size = 800;                 // pixels along the longer box side

  void validate() const;
};

/// One polygon per cell, one line per Voronoi edge, one circle per site.
/// The viewBox is the clip box scaled to the pixel size, y pointing down.
std::string render_svg(const VoronoiDiagram& diagram, const RenderStyle& style = {});

}  // namespace vorosense
