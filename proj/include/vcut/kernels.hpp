#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation in
// vcut::kernels and a plain serial one in vcut::kernels::reference; the two
// produce bit-identical output and the tests hold them to it.

#include <cstdint>
#include <span>
#include <vector>

#include "vcut/core.hpp"

namespace vcut {

/// Axis-aligned classifier window; w, h are cropped at the frame border.
struct Window {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    int scale = 0;

    friend bool operator==(const Window&, const Window&) = default;
};

/// Offset from a window to its best match in the previous frame.
struct WindowMatch {
    int dx = 0;
    int dy = 0;
    /// Match score in fixed point, kScoreUnit per label disagreement.
    std::int64_t score = 0;

    friend bool operator==(const WindowMatch&, const WindowMatch&) = default;
};

/// Fixed-point unit of the window match score. One label flip costs one unit and
/// the colour term of a pixel is its RGB distance / (255 sqrt 3) in the same units.
inline constexpr std::int64_t kScoreUnit = 1 << 16;

/// Per-pixel match cost |label_a - label_b| + |a - b| / (255 sqrt 3), in kScoreUnit.
std::int64_t match_cost(std::uint8_t label_a, std::uint8_t label_b, Rgb a, Rgb b);

/// Colour part of match_cost indexed by squared RGB distance (3 * 255^2 + 1 entries).
const std::int32_t* color_cost_table();

struct SlicCenter {
    double x = 0.0;
    double y = 0.0;
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

/// One superpixel's links to its temporal neighbours for the error model.
struct HopEntry {
    int area = 0;
    int back_match = -1;  ///< best match in frame t-1, -1 for the first frame
    double q_back = 0.0;  ///< mislabel probability of the hop t-1 -> t
    int fwd_match = -1;   ///< best match in frame t+1, -1 for the last frame
    double q_fwd = 0.0;   ///< mislabel probability of the hop t+1 -> t
};
using HopTable = std::vector<HopEntry>;

/// Row-major square matrix, 0-based.
struct SquareMatrix {
    int n = 0;
    std::vector<double> values;

    explicit SquareMatrix(int size = 0) : n(size), values(std::size_t(size) * size, 0.0) {}
    double& operator()(int r, int c) { return values[std::size_t(r) * n + c]; }
    double operator()(int r, int c) const { return values[std::size_t(r) * n + c]; }
};

/// Inputs shared by the window kernels.
struct WindowMatchInput {
    const Frame* current = nullptr;
    const Mask* coarse = nullptr;  ///< coarse labels of the current frame
    const Frame* previous = nullptr;
    const Mask* previous_mask = nullptr;
    int radius_x = 0;  ///< |dx| bound of candidate offsets
    int radius_y = 0;
};

namespace kernels {

/// Per-pixel RGB distance between co-located pixels.
std::vector<double> color_difference(const Frame& a, const Frame& b);

/// One SLIC assignment sweep: each pixel takes the nearest centre among those whose
/// (2*window+1)^2 box covers it; pixels covered by none keep their label.
void slic_assign(const Frame& frame, std::span<const SlicCenter> centers, double spatial_norm, double compactness,
                 int window, std::span<int> labels);

/// Best offset per window under the tie order: lowest score, then smallest
/// displacement, then lexicographic (dx, dy).
std::vector<WindowMatch> match_windows(const WindowMatchInput& in, std::span<const Window> windows);

/// Per-pixel label votes from every window: for each uncertain pixel covered by a
/// window, the label of the colour-nearest pixel of its matched window.
/// Returns (votes for 1, votes for 0) per pixel.
struct Votes {
    std::vector<std::uint16_t> ones;
    std::vector<std::uint16_t> zeros;
};
Votes window_votes(const WindowMatchInput& in, std::span<const Window> windows, std::span<const WindowMatch> matches,
                   std::span<const std::uint8_t> uncertain);

/// S(t', t) = sum_i |Y_i^t| Q(Y_i^t, t', t) for all ordered pairs, following
/// repeated best matches. Entry (row t', col t); diagonal 0.
SquareMatrix propagation_error_sums(std::span<const HopTable> hops);

namespace reference {

std::vector<double> color_difference(const Frame& a, const Frame& b);
void slic_assign(const Frame& frame, std::span<const SlicCenter> centers, double spatial_norm, double compactness,
                 int window, std::span<int> labels);
std::vector<WindowMatch> match_windows(const WindowMatchInput& in, std::span<const Window> windows);
Votes window_votes(const WindowMatchInput& in, std::span<const Window> windows, std::span<const WindowMatch> matches,
                   std::span<const std::uint8_t> uncertain);
SquareMatrix propagation_error_sums(std::span<const HopTable> hops);

}  // namespace reference
}  // namespace kernels

/// Tie order used by window matching: true when a beats b.
bool better_match(const WindowMatch& a, const WindowMatch& b);

/// Colour-nearest pixel search inside one window of a frame. Ties go to the pixel
/// closest to `anchor`, then the first in row-major order.
class ColorIndex {
public:
    ColorIndex(const Frame& frame, const Window& region);

    /// Returns the linear pixel index in the frame.
    std::size_t nearest(Rgb query, int anchor_x, int anchor_y) const;

private:
    static constexpr int kShift = 4;  // 16 levels per channel
    static constexpr int kCells = 256 >> kShift;

    struct Entry {
        Rgb color;
        int x;
        int y;
    };
    int frame_width_ = 0;
    std::vector<int> cell_start_;  // kCells^3 + 1 offsets into entries_
    std::vector<Entry> entries_;
    std::vector<int> nonempty_;    // occupied cell ids
};

/// Brute force counterpart of ColorIndex::nearest.
std::size_t nearest_color_brute(const Frame& frame, const Window& region, Rgb query, int anchor_x, int anchor_y);

}  // namespace vcut
