#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vcut/core.hpp"
#include "vcut/kernels.hpp"

namespace vcut {

struct UncertaintyField {
    int width = 0;
    int height = 0;
    std::vector<double> values;         ///< E(x)
    std::vector<std::uint8_t> uncertain;  ///< 1 in U, 0 in C

    std::size_t uncertain_count() const;
};

/// E(x): RGB distance between co-located pixels of consecutive frames.
std::vector<double> propagation_uncertainty(const Frame& previous, const Frame& current);

/// x is uncertain iff the coarse label differs from the previous mask or E(x) > mean(E).
UncertaintyField partition_certainty(const Mask& coarse, const Mask& previous_mask, std::vector<double> values);

/// Half-overlapping window grid at one scale covering a width x height frame.
std::vector<Window> window_grid(int width, int height, int size);

/// Windows of every scale that contain at least one uncertain pixel.
std::vector<Window> enabled_windows(const UncertaintyField& field, std::span<const int> sizes);

struct SearchArea {
    int radius_x = 0;
    int radius_y = 0;
};

/// +- (fraction * dim) / 2 around the window position.
SearchArea search_area(int width, int height, double fraction);

/// Exhaustive search of one window's best match in the previous frame.
WindowMatch match_window(const Window& window, const Frame& current, const Mask& coarse, const Frame& previous,
                         const Mask& previous_mask, SearchArea area);

/// Score of one candidate offset (fixed point, see kScoreUnit).
std::int64_t window_score(const Window& window, int dx, int dy, const Frame& current, const Mask& coarse,
                          const Frame& previous, const Mask& previous_mask);

/// Label of pixel (x, y) of the current frame from its matched window.
std::uint8_t local_classify(int x, int y, const Window& window, const WindowMatch& match, const Frame& current,
                            const Frame& previous, const Mask& previous_mask);

/// Majority of window votes on uncertain pixels, ties and uncovered pixels keep the coarse label.
std::vector<std::uint8_t> resolve_votes(const kernels::Votes& votes, const Mask& coarse);

/// Coarse label on certain pixels, local label on uncertain ones.
Mask fuse_masks(const Mask& coarse, std::span<const std::uint8_t> local_labels,
                std::span<const std::uint8_t> uncertain);

/// Distance-weighted merge of the two propagation directions, thresholded:
/// 0 iff value < threshold.
Mask merge_bidirectional(const Mask& left, const Mask& right, int left_index, int right_index, int t,
                         double threshold = 0.5);

/// Background regions not 4-connected to the border become foreground.
Mask fill_holes(const Mask& mask);

struct RefineResult {
    Mask mask;
    UncertaintyField field;
    std::vector<Window> windows;
    std::vector<WindowMatch> matches;
};

struct RefineParams {
    std::vector<int> window_sizes = {30, 50, 80};
    double search_area_fraction = 0.25;
};

/// Uncertainty partition, window matching and local labelling of one frame.
RefineResult refine_frame(const Frame& previous, const Mask& previous_mask, const Frame& current, const Mask& coarse,
                          const RefineParams& params);

}  // namespace vcut
