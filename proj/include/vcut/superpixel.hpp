#pragma once

#include <cstdint>
#include <vector>

#include "vcut/core.hpp"

namespace vcut {

struct SuperpixelStats {
    double mean_r = 0.0;
    double mean_g = 0.0;
    double mean_b = 0.0;
    Point2 centroid;
    int area = 0;

    double color_distance(const SuperpixelStats& o) const;
};

/// Per-pixel superpixel ids 0..count-1 plus per-superpixel statistics.
/// Every superpixel is nonempty and 4-connected.
class SuperpixelMap {
public:
    SuperpixelMap() = default;
    /// Builds statistics from `ids` and `frame`; ids must already be dense 0..count-1.
    SuperpixelMap(int width, int height, std::vector<int> ids, const Frame& frame);

    int width() const { return width_; }
    int height() const { return height_; }
    int count() const { return int(stats_.size()); }

    int id(int x, int y) const { return ids_[std::size_t(y) * width_ + x]; }
    int operator[](std::size_t i) const { return ids_[i]; }
    std::span<const int> ids() const { return ids_; }

    const SuperpixelStats& stats(int id) const { return stats_[std::size_t(id)]; }
    std::span<const SuperpixelStats> stats() const { return stats_; }

    /// Sorted ids of superpixels touching `id` under 8-connectivity.
    std::span<const int> neighbors(int id) const { return adjacency_[std::size_t(id)]; }

    friend bool operator==(const SuperpixelMap& a, const SuperpixelMap& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.ids_ == b.ids_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<int> ids_;
    std::vector<SuperpixelStats> stats_;
    std::vector<std::vector<int>> adjacency_;
};

struct SlicParams {
    int target_count = 100;
    double compactness = 10.0;
    int iterations = 10;
};

/// SLIC clustering in RGB followed by connectivity enforcement: every 4-connected
/// fragment becomes its own superpixel and fragments below a quarter of the nominal
/// cell area are absorbed by their largest neighbour.
SuperpixelMap slic_segment(const Frame& frame, const SlicParams& params);

/// 1 iff the superpixel holds strictly more foreground than background pixels.
std::vector<std::uint8_t> superpixel_labels(const SuperpixelMap& map, const Mask& mask);

/// Per-pixel view of per-superpixel values.
template <typename T>
std::vector<T> rasterize(const SuperpixelMap& map, std::span<const T> values) {
    std::vector<T> out(map.ids().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[std::size_t(map[i])];
    return out;
}

}  // namespace vcut
