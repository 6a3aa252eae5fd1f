#pragma once

#include "vcut/kernels.hpp"

namespace vcut::detail {

// Squared SLIC distance: colour term plus spatial term scaled by (m / S)^2.
inline double slic_distance(const SlicCenter& c, Rgb p, int x, int y, double spatial_scale) {
    const double dr = c.r - p.r, dg = c.g - p.g, db = c.b - p.b;
    const double dx = c.x - x, dy = c.y - y;
    const double color = dr * dr + dg * dg + db * db;
    const double space = dx * dx + dy * dy;
    return color + space * spatial_scale;
}

inline bool covers(const SlicCenter& c, int x, int y, int window) {
    return std::abs(c.x - x) <= window && std::abs(c.y - y) <= window;
}

inline bool offset_fits(const Window& w, int dx, int dy, int width, int height) {
    return w.x + dx >= 0 && w.y + dy >= 0 && w.x + dx + w.w <= width && w.y + dy + w.h <= height;
}

}  // namespace vcut::detail
