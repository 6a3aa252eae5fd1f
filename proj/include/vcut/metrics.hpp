#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vcut/core.hpp"

namespace vcut {

/// Intersection over union; 1 when both masks are empty.
double region_similarity(const Mask& m, const Mask& g);

enum class ContourMatching {
    dilation,   ///< a contour pixel counts when the other contour lies within tolerance
    bipartite,  ///< one-to-one maximum matching under the tolerance (slow)
};

/// Foreground pixels that are 4-adjacent to background or to the frame border.
Mask contour_pixels(const Mask& mask);

/// Contour F-measure. Both empty -> 1; one empty -> 0.
double contour_accuracy(const Mask& m, const Mask& g, double tolerance_px,
                        ContourMatching mode = ContourMatching::dilation);

/// |M xor G| / |G|. Throws DataError for an empty ground truth.
double jumpcut_error(const Mask& m, const Mask& g);

struct FrameScore {
    int frame = 0;
    double j = 0.0;
    double f = 0.0;
};

struct VideoReport {
    std::string name;
    std::vector<FrameScore> frames;
    double mean_j = 0.0;
    double mean_f = 0.0;
    /// JumpCut protocol: mean error rate per transfer distance.
    std::vector<std::pair<int, double>> error_by_distance;
};

struct EvalReport {
    std::string protocol;
    std::vector<VideoReport> videos;
    double mean_j = 0.0;
    double mean_f = 0.0;
    std::vector<std::pair<int, double>> error_by_distance;

    void finalize();
    void write_csv(std::ostream& os) const;
    void write_table(std::ostream& os) const;
};

}  // namespace vcut
