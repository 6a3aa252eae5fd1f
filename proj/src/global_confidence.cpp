#include "vcut/global_confidence.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace vcut {

ColorQuantizer::ColorQuantizer(int bins_per_channel) : bins_(bins_per_channel), step_(0) {
    if (bins_ < 1 || bins_ > 256 || 256 % bins_ != 0)
        throw std::invalid_argument("bins_per_channel must divide 256, got " + std::to_string(bins_));
    step_ = 256 / bins_;
}

std::uint32_t ColorQuantizer::bin(Rgb c) const {
    return (std::uint32_t(c.r / step_) * bins_ + std::uint32_t(c.g / step_)) * bins_ + std::uint32_t(c.b / step_);
}

std::uint32_t ColorQuantizer::bin(double r, double g, double b) const {
    auto q = [this](double v) { return std::uint32_t(std::clamp(int(std::floor(v / step_)), 0, bins_ - 1)); };
    return (q(r) * bins_ + q(g)) * bins_ + q(b);
}

int GridLevel::cell_of(double x, double y, int width, int height) const {
    const int cx = std::clamp(int(std::floor(x * cells_x / width)), 0, cells_x - 1);
    const int cy = std::clamp(int(std::floor(y * cells_y / height)), 0, cells_y - 1);
    return cy * cells_x + cx;
}

GridLevel grid_level(int level, PyramidGrid grid) {
    if (grid == PyramidGrid::per_axis) return GridLevel{1 << level, 1 << level};
    return GridLevel{1 << ((level + 1) / 2), 1 << (level / 2)};
}

PyramidModel::PyramidModel(int levels, int bins_per_channel, PyramidGrid grid, int width, int height)
    : levels_(levels), quantizer_(bins_per_channel), width_(width), height_(height) {
    if (levels < 0) throw std::invalid_argument("pyramid levels must be >= 0");
    if (levels > 12) throw std::invalid_argument("pyramid levels above 12 are not supported");
    for (int l = 0; l <= levels; ++l) {
        grid_.push_back(grid_level(l, grid));
        cells_.emplace_back(std::size_t(grid_.back().cell_count()));
    }
}

void PyramidModel::add(const Frame& frame, const Mask& mask) {
    if (frame.width() != width_ || frame.height() != height_ || !mask.same_shape(frame))
        throw std::invalid_argument("PyramidModel::add: dimension mismatch");
    for (int l = 0; l <= levels_; ++l) {
        const GridLevel& g = grid_[std::size_t(l)];
        auto& cells = cells_[std::size_t(l)];
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) {
                Cell& c = cells[std::size_t(g.cell_of(x, y, width_, height_))];
                const std::uint32_t b = quantizer_.bin(frame.at(x, y));
                ++(mask.at(x, y) ? c.fg : c.bg)[b];
            }
    }
}

namespace {
std::uint32_t lookup(const SparseHistogram& h, std::uint32_t bin) {
    auto it = h.find(bin);
    return it == h.end() ? 0 : it->second;
}
}  // namespace

std::uint32_t PyramidModel::foreground(int level, int cell, std::uint32_t bin) const {
    return lookup(cells_.at(std::size_t(level)).at(std::size_t(cell)).fg, bin);
}

std::uint32_t PyramidModel::background(int level, int cell, std::uint32_t bin) const {
    return lookup(cells_.at(std::size_t(level)).at(std::size_t(cell)).bg, bin);
}

std::uint64_t PyramidModel::total(int level) const {
    std::uint64_t sum = 0;
    for (const Cell& c : cells_.at(std::size_t(level))) {
        for (const auto& [bin, n] : c.fg) sum += n;
        for (const auto& [bin, n] : c.bg) sum += n;
    }
    return sum;
}

double PyramidModel::level_term(int level, Point2 position, std::uint32_t bin) const {
    if (position.x < 0 || position.y < 0 || position.x >= width_ || position.y >= height_)
        throw std::logic_error("pyramid lookup outside the frame");
    const int cell = grid_[std::size_t(level)].cell_of(position.x, position.y, width_, height_);
    const double hf = foreground(level, cell, bin), hb = background(level, cell, bin);
    if (hf + hb == 0) return 0.5;
    return hf / (hf + hb);
}

PyramidModel build_pyramid_model(std::span<const AnnotatedFrame> annotated, int levels, int bins_per_channel,
                                 PyramidGrid grid) {
    if (annotated.empty()) throw std::invalid_argument("build_pyramid_model: no annotated frames");
    const Frame& first = *annotated.front().frame;
    PyramidModel model(levels, bins_per_channel, grid, first.width(), first.height());
    for (const auto& a : annotated) model.add(*a.frame, *a.mask);
    return model;
}

std::vector<double> static_confidence(const PyramidModel& model, const SuperpixelMap& map) {
    if (map.width() != model.width() || map.height() != model.height())
        throw std::invalid_argument("static_confidence: superpixel map does not match the model");
    const int first = model.levels() == 0 ? 0 : 1;
    const int used = model.levels() - first + 1;
    std::vector<double> out(std::size_t(map.count()));
    for (int s = 0; s < map.count(); ++s) {
        const SuperpixelStats& st = map.stats(s);
        const std::uint32_t bin = model.quantizer().bin(st.mean_r, st.mean_g, st.mean_b);
        double sum = 0.0;
        for (int l = first; l <= model.levels(); ++l) sum += model.level_term(l, st.centroid, bin);
        out[std::size_t(s)] = sum / used;
    }
    return out;
}

void InterframeGraph::add_edge(int a, int b, double weight) {
    if (a < 0 || b < 0 || a >= node_count() || b >= node_count()) throw std::out_of_range("add_edge: bad node");
    if (weight < 0) throw std::invalid_argument("add_edge: negative weight");
    if (a == b || has_edge(a, b)) return;
    adjacency_[std::size_t(a)].push_back(GraphEdge{b, weight});
    adjacency_[std::size_t(b)].push_back(GraphEdge{a, weight});
}

bool InterframeGraph::has_edge(int a, int b) const {
    const auto& e = adjacency_.at(std::size_t(a));
    return std::any_of(e.begin(), e.end(), [b](const GraphEdge& g) { return g.to == b; });
}

double InterframeGraph::weight(int a, int b) const {
    for (const GraphEdge& g : adjacency_.at(std::size_t(a)))
        if (g.to == b) return g.weight;
    throw std::out_of_range("no edge between the nodes");
}

InterframeGraph build_interframe_graph(const SuperpixelMap& previous, const SuperpixelMap& current) {
    if (previous.width() != current.width() || previous.height() != current.height())
        throw std::invalid_argument("build_interframe_graph: dimension mismatch");
    const int np = previous.count();
    InterframeGraph g(np + current.count());
    g.previous_count_ = np;

    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < np; ++a)
        for (int b : previous.neighbors(a))
            if (a < b) edges.emplace_back(a, b);
    for (int a = 0; a < current.count(); ++a)
        for (int b : current.neighbors(a))
            if (a < b) edges.emplace_back(np + a, np + b);
    std::vector<std::pair<int, int>> temporal;
    temporal.reserve(previous.ids().size());
    for (std::size_t p = 0; p < previous.ids().size(); ++p) temporal.emplace_back(previous[p], np + current[p]);
    std::sort(temporal.begin(), temporal.end());
    temporal.erase(std::unique(temporal.begin(), temporal.end()), temporal.end());
    edges.insert(edges.end(), temporal.begin(), temporal.end());

    auto stats = [&](int node) -> const SuperpixelStats& {
        return node < np ? previous.stats(node) : current.stats(node - np);
    };
    for (const auto& [a, b] : edges) {
        const double w = stats(a).color_distance(stats(b));
        g.adjacency_[std::size_t(a)].push_back(GraphEdge{b, w});
        g.adjacency_[std::size_t(b)].push_back(GraphEdge{a, w});
    }
    return g;
}

std::vector<double> geodesic_distance_field(const InterframeGraph& graph, std::span<const int> sources) {
    if (sources.empty()) throw std::invalid_argument("geodesic_distance_field: empty source set");
    std::vector<double> dist(std::size_t(graph.node_count()), kUnreachable);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int s : sources) {
        if (s < 0 || s >= graph.node_count()) throw std::out_of_range("geodesic_distance_field: bad source");
        if (dist[std::size_t(s)] != 0.0) {
            dist[std::size_t(s)] = 0.0;
            heap.emplace(0.0, s);
        }
    }
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[std::size_t(u)]) continue;
        for (const GraphEdge& e : graph.edges(u)) {
            const double nd = d + e.weight;
            if (nd < dist[std::size_t(e.to)]) {
                dist[std::size_t(e.to)] = nd;
                heap.emplace(nd, e.to);
            }
        }
    }
    return dist;
}

DynamicConfidence dynamic_confidence(const InterframeGraph& graph, std::span<const std::uint8_t> previous_labels) {
    const int np = graph.previous_count();
    if (int(previous_labels.size()) != np)
        throw std::invalid_argument("dynamic_confidence: label count does not match the previous frame");
    std::vector<int> fg, bg;
    for (int i = 0; i < np; ++i) (previous_labels[std::size_t(i)] ? fg : bg).push_back(i);

    const int nc = graph.node_count() - np;
    DynamicConfidence out;
    out.to_foreground.assign(std::size_t(nc), kUnreachable);
    out.to_background.assign(std::size_t(nc), kUnreachable);
    out.confidence.assign(std::size_t(nc), 0.0);
    if (!fg.empty()) {
        const auto d = geodesic_distance_field(graph, fg);
        std::copy(d.begin() + np, d.end(), out.to_foreground.begin());
    }
    if (!bg.empty()) {
        const auto d = geodesic_distance_field(graph, bg);
        std::copy(d.begin() + np, d.end(), out.to_background.begin());
    }
    for (int i = 0; i < nc; ++i) {
        const double df = out.to_foreground[std::size_t(i)], db = out.to_background[std::size_t(i)];
        double c;
        if (fg.empty()) c = 0.0;
        else if (bg.empty()) c = 1.0;
        else if ((df == 0 && db == 0) || (std::isinf(df) && std::isinf(db))) c = 0.5;
        else if (std::isinf(df)) c = 0.0;
        else if (std::isinf(db)) c = 1.0;
        else c = db / (df + db);
        out.confidence[std::size_t(i)] = c;
    }
    return out;
}

std::vector<double> combine_confidence(std::span<const double> static_conf, std::span<const double> dynamic_conf) {
    if (static_conf.size() != dynamic_conf.size())
        throw std::invalid_argument("combine_confidence: superpixel sets differ");
    std::vector<double> out(static_conf.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_conf[i] * dynamic_conf[i];
    return out;
}

Mask coarse_mask(std::span<const double> pixel_confidence, int width, int height) {
    if (pixel_confidence.size() != std::size_t(width) * height)
        throw std::invalid_argument("coarse_mask: confidence size does not match the frame");
    Mask out(width, height);
    if (pixel_confidence.empty()) return out;
    const auto [lo, hi] = std::minmax_element(pixel_confidence.begin(), pixel_confidence.end());
    if (*lo == *hi) return out;
    long double sum = 0;
    for (double v : pixel_confidence) sum += v;
    const double mean = double(sum / pixel_confidence.size());
    for (std::size_t i = 0; i < pixel_confidence.size(); ++i) out[i] = pixel_confidence[i] > mean ? 1 : 0;
    return out;
}

Mask coarse_mask(const SuperpixelMap& map, std::span<const double> confidence) {
    const auto pixels = rasterize<double>(map, confidence);
    return coarse_mask(pixels, map.width(), map.height());
}

}  // namespace vcut
