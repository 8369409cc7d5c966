#include "vorosense/svg.hpp"

#include <fmt/format.h>

#include "vorosense/rng.hpp"

namespace vorosense {

void RenderStyle::validate() const {
  if (!(stroke_width > 0.0) || !(site_radius > 0.0) || image_size <= 0) {
    throw Error(ErrorCode::InvalidParams, "render style dimensions must be positive");
  }
  if (color_scheme != "pastel" && color_scheme != "mono") {
    throw Error(ErrorCode::InvalidParams, "unknown color scheme '" + color_scheme + "'");
  }
}

namespace {

std::string fill_for(SiteId id, const std::string& scheme) {
  if (scheme == "mono") return "#f2f2f2";
  const std::uint64_t h = splitmix64(id);
  const auto channel = [&](int shift) { return 160 + static_cast<int>((h >> shift) & 0x5F); };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(0), channel(8), channel(16));
}

}  // namespace

std::string render_svg(const VoronoiDiagram& diagram, const RenderStyle& style) {
  style.validate();
  const BoundingBox& box = diagram.clip_box();
  const double scale = static_cast<double>(style.image_size) / std::max(box.width(), box.height());
  const double w = box.width() * scale;
  const double h = box.height() * scale;
  const auto px = [&](Point p) {
    return Point{(p.x - box.min().x) * scale, (box.max().y - p.y) * scale};
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.3f}\" height=\"{:.3f}\" "
      "viewBox=\"0 0 {:.3f} {:.3f}\">\n",
      w, h, w, h);
  out += fmt::format(
      "<rect class=\"frame\" x=\"0\" y=\"0\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"white\" "
      "stroke=\"black\" stroke-width=\"{:.3f}\"/>\n",
      w, h, style.stroke_width);

  out += "<g class=\"cells\">\n";
  for (const VoronoiCell& cell : diagram.cells()) {
    std::string pts;
    for (Point p : cell.polygon) {
      const Point q = px(p);
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.3f},{:.3f}", q.x, q.y);
    }
    out += fmt::format("<polygon class=\"cell\" data-site=\"{}\" points=\"{}\" fill=\"{}\"/>\n",
                       cell.site, pts, fill_for(cell.site, style.color_scheme));
  }
  out += "</g>\n";

  out += fmt::format("<g class=\"edges\" stroke=\"#333333\" stroke-width=\"{:.3f}\">\n",
                     style.stroke_width);
  for (const VoronoiEdge& e : diagram.edges()) {
    const Point a = px(e.a);
    const Point b = px(e.b);
    out += fmt::format(
        "<line class=\"edge\" data-sites=\"{} {}\" x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" "
        "y2=\"{:.3f}\"/>\n",
        e.left, e.right, a.x, a.y, b.x, b.y);
  }
  out += "</g>\n";

  out += "<g class=\"sites\" fill=\"#c0392b\">\n";
  for (const Site& s : diagram.sites()) {
    const Point p = px(s.position);
    out += fmt::format("<circle class=\"site\" data-site=\"{}\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{:.3f}\"/>\n",
                       s.id, p.x, p.y, style.site_radius);
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace vorosense
