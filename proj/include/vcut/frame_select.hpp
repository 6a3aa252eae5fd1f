#pragma once

#include <span>
#include <utility>
#include <vector>

#include "vcut/config.hpp"
#include "vcut/core.hpp"
#include "vcut/kernels.hpp"
#include "vcut/superpixel.hpp"

namespace vcut {

/// Best matches between the superpixels of two adjacent frames, in both directions.
struct SuperpixelMatchField {
    /// For superpixel i of the earlier frame: id in the later frame.
    std::vector<int> forward;
    /// For superpixel j of the later frame: id in the earlier frame.
    std::vector<int> backward;
    /// Centroid displacement to the forward / backward match.
    std::vector<Point2> forward_flow;
    std::vector<Point2> backward_flow;
};

/// Best match of each superpixel of `from` among those of `to`: smallest mean-colour
/// distance among superpixels whose centroid lies within `radius`, ties to the nearer
/// centroid then the lower id. Falls back to all of `to` when none is in range.
std::vector<int> best_matches(const SuperpixelMap& from, const SuperpixelMap& to, double radius);

SuperpixelMatchField match_superpixels(const SuperpixelMap& earlier, const SuperpixelMap& later, double radius);

/// 1 - exp(-(d_app + d_occ)).
double hop_mislabel_prob(double d_app, Point2 flow_out, Point2 flow_back);
/// |f1 + f2| / (|f1| + |f2|), 0 when both vanish.
double occlusion_distance(Point2 flow_out, Point2 flow_back);

/// Probability along a chain of hops via the recursion Q <- Q + (1 - Q) q.
double accumulate_error(std::span<const double> hop_probabilities);

/// L1-normalised per-cell colour histograms of a whole frame, levels 0..L. Each
/// level is a sorted list of (cell * bins^3 + bin, weight).
struct FrameDescriptor {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> levels;
};

FrameDescriptor frame_descriptor(const Frame& frame, int levels, int bins_per_channel,
                                 PyramidGrid grid = PyramidGrid::per_axis);

/// Sum over levels of the L1 distance between level histograms.
double adjustment_coefficient(const FrameDescriptor& a, const FrameDescriptor& b);

/// N x N predicted propagation error, 1-based access (source, target).
class ErrorMatrix {
public:
    ErrorMatrix() = default;
    explicit ErrorMatrix(int n) : m_(n) {}
    explicit ErrorMatrix(SquareMatrix m) : m_(std::move(m)) {}

    int size() const { return m_.n; }
    double operator()(int source, int target) const { return m_(source - 1, target - 1); }
    double& operator()(int source, int target) { return m_(source - 1, target - 1); }
    const SquareMatrix& raw() const { return m_; }

private:
    SquareMatrix m_;
};

/// Per-superpixel hop tables for every frame (index 0 = frame 1).
std::vector<HopTable> build_hop_tables(std::span<const SuperpixelMap> maps, double match_radius);

/// E(t', t) = alpha(t', t) * sum_i |Y_i^t| Q(Y_i^t, t', t).
ErrorMatrix propagation_error_matrix(std::span<const Frame> frames, std::span<const SuperpixelMap> maps,
                                     const RunConfig& config);

/// Total predicted error of an annotation set (sorted 1-based indices).
double selection_objective(const ErrorMatrix& error, std::span<const int> selected);

/// Relative tolerance under which two objectives count as tied.
inline constexpr double kObjectiveTieTolerance = 1e-12;

struct FrameSelection {
    std::vector<int> frames;
    double objective = 0.0;
};

/// K frames minimising selection_objective by dynamic programming; among (near-)ties
/// the lexicographically smallest set wins.
FrameSelection select_frames(const ErrorMatrix& error, int k);

}  // namespace vcut
