#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "vcut/config.hpp"
#include "vcut/core.hpp"
#include "vcut/superpixel.hpp"

namespace vcut {

/// Uniform RGB quantiser: bin = floor(channel / (256 / bins)) per channel.
class ColorQuantizer {
public:
    explicit ColorQuantizer(int bins_per_channel);

    int bins_per_channel() const { return bins_; }
    std::uint32_t bin_count() const { return std::uint32_t(bins_) * bins_ * bins_; }
    std::uint32_t bin(Rgb c) const;
    /// Bin of a real-valued mean colour.
    std::uint32_t bin(double r, double g, double b) const;

private:
    int bins_;
    int step_;
};

/// Cell layout of one pyramid level.
struct GridLevel {
    int cells_x = 1;
    int cells_y = 1;

    int cell_count() const { return cells_x * cells_y; }
    int cell_of(double x, double y, int width, int height) const;
};

GridLevel grid_level(int level, PyramidGrid grid);

using SparseHistogram = std::unordered_map<std::uint32_t, std::uint32_t>;

/// Foreground/background colour histograms per pyramid cell, built from the
/// annotated frames. Read-only after construction.
class PyramidModel {
public:
    PyramidModel(int levels, int bins_per_channel, PyramidGrid grid, int width, int height);

    /// Adds every pixel of an annotated frame at every level.
    void add(const Frame& frame, const Mask& mask);

    int levels() const { return levels_; }
    const ColorQuantizer& quantizer() const { return quantizer_; }
    const GridLevel& level(int l) const { return grid_[std::size_t(l)]; }
    int width() const { return width_; }
    int height() const { return height_; }

    std::uint32_t foreground(int level, int cell, std::uint32_t bin) const;
    std::uint32_t background(int level, int cell, std::uint32_t bin) const;
    /// Sum of all counts (fg + bg) over the cells of a level.
    std::uint64_t total(int level) const;

    /// H_F / (H_F + H_B) for the cell containing (x, y), 0.5 without evidence.
    double level_term(int level, Point2 position, std::uint32_t bin) const;

private:
    struct Cell {
        SparseHistogram fg;
        SparseHistogram bg;
    };
    int levels_;
    ColorQuantizer quantizer_;
    std::vector<GridLevel> grid_;
    std::vector<std::vector<Cell>> cells_;  // [level][cell]
    int width_;
    int height_;
};

struct AnnotatedFrame {
    const Frame* frame = nullptr;
    const Mask* mask = nullptr;
};

PyramidModel build_pyramid_model(std::span<const AnnotatedFrame> annotated, int levels, int bins_per_channel,
                                 PyramidGrid grid = PyramidGrid::per_axis);

/// Mean over levels 1..L of the pyramid term at each superpixel's centroid and mean
/// colour. With L = 0 the single level-0 cell is used.
std::vector<double> static_confidence(const PyramidModel& model, const SuperpixelMap& map);

struct GraphEdge {
    int to = 0;
    double weight = 0.0;
};

/// Superpixels of frames t-1 (nodes 0..prev_count-1) and t (the rest). Spatial edges
/// join 8-adjacent superpixels of one frame, temporal edges join superpixels whose
/// footprints overlap. Weight is the RGB distance of the mean colours.
class InterframeGraph {
public:
    InterframeGraph() = default;
    explicit InterframeGraph(int node_count) : adjacency_(std::size_t(node_count)) {}
    /// Empty graph over previous_count nodes of frame t-1 followed by current_count of frame t.
    InterframeGraph(int previous_count, int current_count)
        : previous_count_(previous_count), adjacency_(std::size_t(previous_count + current_count)) {}

    int node_count() const { return int(adjacency_.size()); }
    int previous_count() const { return previous_count_; }
    int current_node(int superpixel) const { return previous_count_ + superpixel; }

    /// Adds an undirected edge; duplicates are ignored.
    void add_edge(int a, int b, double weight);
    std::span<const GraphEdge> edges(int node) const { return adjacency_[std::size_t(node)]; }
    bool has_edge(int a, int b) const;
    double weight(int a, int b) const;

private:
    friend InterframeGraph build_interframe_graph(const SuperpixelMap&, const SuperpixelMap&);
    int previous_count_ = 0;
    std::vector<std::vector<GraphEdge>> adjacency_;
};

InterframeGraph build_interframe_graph(const SuperpixelMap& previous, const SuperpixelMap& current);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Multi-source shortest-path distances (Dijkstra); +inf where unreachable.
std::vector<double> geodesic_distance_field(const InterframeGraph& graph, std::span<const int> sources);

/// D_F, D_B for the current-frame superpixels and the resulting probability.
struct DynamicConfidence {
    std::vector<double> to_foreground;
    std::vector<double> to_background;
    std::vector<double> confidence;
};

/// D_B / (D_F + D_B) per current-frame superpixel given the previous frame's
/// superpixel labels.
DynamicConfidence dynamic_confidence(const InterframeGraph& graph, std::span<const std::uint8_t> previous_labels);

/// Elementwise product.
std::vector<double> combine_confidence(std::span<const double> static_conf, std::span<const double> dynamic_conf);

/// Pixel is 1 iff its confidence exceeds the mean of the per-pixel map.
Mask coarse_mask(std::span<const double> pixel_confidence, int width, int height);
Mask coarse_mask(const SuperpixelMap& map, std::span<const double> confidence);

}  // namespace vcut
