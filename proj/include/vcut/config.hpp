#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vcut {

/// How the pyramid grid grows with level.
enum class PyramidGrid {
    per_axis,  ///< 2^l x 2^l cells at level l
    total,     ///< 2^l cells at level l, split as evenly as possible between the axes
};

struct RunConfig {
    int pyramid_levels = 3;
    int bins_per_channel = 32;
    PyramidGrid pyramid_grid = PyramidGrid::per_axis;

    double superpixels_per_megapixel = 2000.0 / (1280.0 * 720.0 / 1e6);
    double slic_compactness = 10.0;
    int slic_iterations = 10;

    std::vector<int> window_sizes = {30, 50, 80};
    double search_area_fraction = 0.25;

    int annotation_budget = 2;
    double merge_threshold = 0.5;

    /// Superpixel match search radius as a fraction of the frame diagonal.
    double match_radius_fraction = 0.25;

    /// Contour tolerance in pixels; 0 derives it from contour_tolerance_fraction.
    double contour_tolerance = 0.0;
    double contour_tolerance_fraction = 0.008;

    /// OpenMP thread count; 0 keeps the runtime default.
    int threads = 0;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    int superpixel_target(int width, int height) const;
    double contour_tolerance_px(int width, int height) const;

    /// Applies one key=value override. Unknown keys and malformed values throw std::invalid_argument.
    void set(const std::string& key, const std::string& value);

    std::map<std::string, std::string> to_map() const;
    std::string to_text() const;
};

/// Parses a flat "key = value" file; '#' starts a comment.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_config(const std::string& text, RunConfig base = {});

}  // namespace vcut
