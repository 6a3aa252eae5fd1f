#include "vcut/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vcut/core.hpp"

namespace vcut {
namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
    }
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (pyramid_levels < 0) fail("pyramid_levels must be >= 0");
    if (bins_per_channel < 1 || bins_per_channel > 256 || 256 % bins_per_channel != 0)
        fail("bins_per_channel must divide 256");
    if (!(superpixels_per_megapixel > 0)) fail("superpixels_per_megapixel must be positive");
    if (!(slic_compactness >= 0)) fail("slic_compactness must be >= 0");
    if (slic_iterations < 1) fail("slic_iterations must be >= 1");
    if (window_sizes.empty()) fail("window_sizes must not be empty");
    for (int w : window_sizes)
        if (w < 1) fail("window sizes must be positive");
    if (!(search_area_fraction >= 0 && search_area_fraction <= 2)) fail("search_area_fraction must be in [0,2]");
    if (annotation_budget < 1) fail("annotation_budget must be >= 1");
    if (!(merge_threshold > 0 && merge_threshold <= 1)) fail("merge_threshold must be in (0,1]");
    if (!(match_radius_fraction > 0)) fail("match_radius_fraction must be positive");
    if (!(contour_tolerance >= 0)) fail("contour_tolerance must be >= 0");
    if (!(contour_tolerance_fraction >= 0)) fail("contour_tolerance_fraction must be >= 0");
    if (threads < 0) fail("threads must be >= 0");
}

int RunConfig::superpixel_target(int width, int height) const {
    const double pixels = double(width) * double(height);
    const long target = std::lround(superpixels_per_megapixel * pixels / 1e6);
    return int(std::clamp<long>(target, 1, long(pixels)));
}

double RunConfig::contour_tolerance_px(int width, int height) const {
    if (contour_tolerance > 0) return contour_tolerance;
    return std::ceil(contour_tolerance_fraction * std::hypot(double(width), double(height)));
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);
    if (key == "pyramid_levels") pyramid_levels = to_int(key, v);
    else if (key == "bins_per_channel") bins_per_channel = to_int(key, v);
    else if (key == "pyramid_grid") {
        if (v == "per_axis") pyramid_grid = PyramidGrid::per_axis;
        else if (v == "total") pyramid_grid = PyramidGrid::total;
        else throw std::invalid_argument("config: pyramid_grid must be per_axis or total");
    } else if (key == "superpixels_per_megapixel") superpixels_per_megapixel = to_double(key, v);
    else if (key == "slic_compactness") slic_compactness = to_double(key, v);
    else if (key == "slic_iterations") slic_iterations = to_int(key, v);
    else if (key == "window_sizes") {
        std::vector<int> sizes;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) sizes.push_back(to_int(key, trim(item)));
        window_sizes = std::move(sizes);
    } else if (key == "search_area_fraction") search_area_fraction = to_double(key, v);
    else if (key == "annotation_budget" || key == "K") annotation_budget = to_int(key, v);
    else if (key == "merge_threshold") merge_threshold = to_double(key, v);
    else if (key == "match_radius_fraction") match_radius_fraction = to_double(key, v);
    else if (key == "contour_tolerance") contour_tolerance = to_double(key, v);
    else if (key == "contour_tolerance_fraction") contour_tolerance_fraction = to_double(key, v);
    else if (key == "threads") threads = to_int(key, v);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::to_map() const {
    std::string sizes;
    for (std::size_t i = 0; i < window_sizes.size(); ++i) sizes += (i ? "," : "") + std::to_string(window_sizes[i]);
    return {
        {"pyramid_levels", std::to_string(pyramid_levels)},
        {"bins_per_channel", std::to_string(bins_per_channel)},
        {"pyramid_grid", pyramid_grid == PyramidGrid::per_axis ? "per_axis" : "total"},
        {"superpixels_per_megapixel", fmt_double(superpixels_per_megapixel)},
        {"slic_compactness", fmt_double(slic_compactness)},
        {"slic_iterations", std::to_string(slic_iterations)},
        {"window_sizes", sizes},
        {"search_area_fraction", fmt_double(search_area_fraction)},
        {"annotation_budget", std::to_string(annotation_budget)},
        {"merge_threshold", fmt_double(merge_threshold)},
        {"match_radius_fraction", fmt_double(match_radius_fraction)},
        {"contour_tolerance", fmt_double(contour_tolerance)},
        {"contour_tolerance_fraction", fmt_double(contour_tolerance_fraction)},
        {"threads", std::to_string(threads)},
    };
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
    return out;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        base.set(line.substr(0, eq), line.substr(eq + 1));
    }
    base.validate();
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

}  // namespace vcut
