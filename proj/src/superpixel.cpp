#include "vcut/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vcut/kernels.hpp"

namespace vcut {

double SuperpixelStats::color_distance(const SuperpixelStats& o) const {
    const double dr = mean_r - o.mean_r;
    const double dg = mean_g - o.mean_g;
    const double db = mean_b - o.mean_b;
    return std::sqrt(dr * dr + dg * dg + db * db);
}

SuperpixelMap::SuperpixelMap(int width, int height, std::vector<int> ids, const Frame& frame)
    : width_(width), height_(height), ids_(std::move(ids)) {
    if (ids_.size() != std::size_t(width) * height || frame.width() != width || frame.height() != height)
        throw std::invalid_argument("SuperpixelMap: dimension mismatch");
    const int count = ids_.empty() ? 0 : *std::max_element(ids_.begin(), ids_.end()) + 1;

    struct Acc {
        std::int64_t r = 0, g = 0, b = 0, x = 0, y = 0, n = 0;
    };
    std::vector<Acc> acc{std::size_t(count)};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const int id = ids_[std::size_t(y) * width + x];
            if (id < 0) throw std::invalid_argument("SuperpixelMap: negative id");
            const Rgb c = frame.at(x, y);
            auto& a = acc[std::size_t(id)];
            a.r += c.r;
            a.g += c.g;
            a.b += c.b;
            a.x += x;
            a.y += y;
            ++a.n;
        }
    stats_.resize(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        const auto& a = acc[std::size_t(i)];
        if (a.n == 0) throw std::invalid_argument("SuperpixelMap: ids are not dense");
        const double n = double(a.n);
        stats_[std::size_t(i)] = SuperpixelStats{double(a.r) / n, double(a.g) / n, double(a.b) / n,
                                                 Point2{double(a.x) / n, double(a.y) / n}, int(a.n)};
    }

    adjacency_.assign(std::size_t(count), {});
    auto link = [&](int a, int b) {
        if (a == b) return;
        adjacency_[std::size_t(a)].push_back(b);
        adjacency_[std::size_t(b)].push_back(a);
    };
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const int a = id(x, y);
            if (x + 1 < width) link(a, id(x + 1, y));
            if (y + 1 < height) {
                link(a, id(x, y + 1));
                if (x + 1 < width) link(a, id(x + 1, y + 1));
                if (x > 0) link(a, id(x - 1, y + 1));
            }
        }
    for (auto& n : adjacency_) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
}

namespace {

int gradient(const Frame& f, int x, int y) {
    const int xl = std::max(x - 1, 0), xr = std::min(x + 1, f.width() - 1);
    const int yu = std::max(y - 1, 0), yd = std::min(y + 1, f.height() - 1);
    return squared_distance(f.at(xr, y), f.at(xl, y)) + squared_distance(f.at(x, yd), f.at(x, yu));
}

struct UnionFind {
    std::vector<int> parent;
    std::vector<int> area;

    int find(int a) {
        while (parent[std::size_t(a)] != a) {
            parent[std::size_t(a)] = parent[std::size_t(parent[std::size_t(a)])];
            a = parent[std::size_t(a)];
        }
        return a;
    }
};

// Splits labels into 4-connected fragments and folds small fragments into their
// largest neighbour. Returns dense ids ordered by first pixel.
std::vector<int> enforce_connectivity(std::span<const int> labels, int width, int height, int min_area) {
    const std::size_t n = labels.size();
    std::vector<int> comp(n, -1);
    std::vector<int> areas;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        const int c = int(areas.size());
        areas.push_back(0);
        comp[start] = c;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++areas.back();
            const int x = int(p % std::size_t(width)), y = int(p / std::size_t(width));
            auto visit = [&](int qx, int qy) {
                const std::size_t q = std::size_t(qy) * width + qx;
                if (comp[q] < 0 && labels[q] == labels[p]) {
                    comp[q] = c;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(x - 1, y);
            if (x + 1 < width) visit(x + 1, y);
            if (y > 0) visit(x, y - 1);
            if (y + 1 < height) visit(x, y + 1);
        }
    }

    const int comps = int(areas.size());
    std::vector<std::vector<int>> adj{std::size_t(comps)};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const int a = comp[std::size_t(y) * width + x];
            if (x + 1 < width) {
                const int b = comp[std::size_t(y) * width + x + 1];
                if (a != b) adj[std::size_t(a)].push_back(b), adj[std::size_t(b)].push_back(a);
            }
            if (y + 1 < height) {
                const int b = comp[std::size_t(y + 1) * width + x];
                if (a != b) adj[std::size_t(a)].push_back(b), adj[std::size_t(b)].push_back(a);
            }
        }

    UnionFind uf{std::vector<int>(std::size_t(comps)), areas};
    std::iota(uf.parent.begin(), uf.parent.end(), 0);
    for (int c = 0; c < comps; ++c) {
        const int rc = uf.find(c);
        if (uf.area[std::size_t(rc)] >= min_area) continue;
        int best = -1;
        for (int nb : adj[std::size_t(c)]) {
            const int r = uf.find(nb);
            if (r == rc) continue;
            if (best < 0 || uf.area[std::size_t(r)] > uf.area[std::size_t(best)] ||
                (uf.area[std::size_t(r)] == uf.area[std::size_t(best)] && r < best))
                best = r;
        }
        if (best < 0) continue;
        uf.parent[std::size_t(rc)] = best;
        uf.area[std::size_t(best)] += uf.area[std::size_t(rc)];
    }

    std::vector<int> dense(std::size_t(comps), -1);
    std::vector<int> out(n);
    int next = 0;
    for (std::size_t p = 0; p < n; ++p) {
        const int r = uf.find(comp[p]);
        if (dense[std::size_t(r)] < 0) dense[std::size_t(r)] = next++;
        out[p] = dense[std::size_t(r)];
    }
    return out;
}

}  // namespace

SuperpixelMap slic_segment(const Frame& frame, const SlicParams& params) {
    const int width = frame.width(), height = frame.height();
    const long pixels = long(width) * height;
    if (params.target_count < 1 || params.target_count > pixels)
        throw std::invalid_argument("slic_segment: target_count " + std::to_string(params.target_count) +
                                    " outside 1.." + std::to_string(pixels));
    if (params.iterations < 0) throw std::invalid_argument("slic_segment: negative iteration count");

    const double s = std::sqrt(double(pixels) / params.target_count);
    const int nx = std::clamp(int(std::lround(width / s)), 1, width);
    const int ny = std::clamp(int(std::lround(height / s)), 1, height);
    const double step_x = double(width) / nx, step_y = double(height) / ny;
    const double spatial_norm = std::sqrt(step_x * step_y);
    const int window = int(std::ceil(std::max(step_x, step_y)));

    std::vector<SlicCenter> centers;
    centers.reserve(std::size_t(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int cx = std::min(int((i + 0.5) * step_x), width - 1);
            int cy = std::min(int((j + 0.5) * step_y), height - 1);
            // Seed on the lowest-gradient pixel of the 3x3 neighbourhood.
            int best = gradient(frame, cx, cy), bx = cx, by = cy;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = cx + dx, y = cy + dy;
                    if (x < 0 || y < 0 || x >= width || y >= height) continue;
                    const int g = gradient(frame, x, y);
                    if (g < best) best = g, bx = x, by = y;
                }
            const Rgb c = frame.at(bx, by);
            centers.push_back(SlicCenter{double(bx), double(by), double(c.r), double(c.g), double(c.b)});
        }

    std::vector<int> labels(std::size_t(pixels), 0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const int i = std::min(int(x / step_x), nx - 1), j = std::min(int(y / step_y), ny - 1);
            labels[std::size_t(y) * width + x] = j * nx + i;
        }

    struct Acc {
        std::int64_t x = 0, y = 0, r = 0, g = 0, b = 0, n = 0;
    };
    std::vector<Acc> acc(centers.size());
    for (int it = 0; it < params.iterations; ++it) {
        kernels::slic_assign(frame, centers, spatial_norm, params.compactness, window, labels);
        std::fill(acc.begin(), acc.end(), Acc{});
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                auto& a = acc[std::size_t(labels[std::size_t(y) * width + x])];
                const Rgb c = frame.at(x, y);
                a.x += x, a.y += y, a.r += c.r, a.g += c.g, a.b += c.b, ++a.n;
            }
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const auto& a = acc[k];
            if (a.n == 0) continue;
            const double n = double(a.n);
            centers[k] = SlicCenter{double(a.x) / n, double(a.y) / n, double(a.r) / n, double(a.g) / n,
                                    double(a.b) / n};
        }
    }

    const int min_area = std::max(1, int(std::lround(step_x * step_y / 4.0)));
    return SuperpixelMap(width, height, enforce_connectivity(labels, width, height, min_area), frame);
}

std::vector<std::uint8_t> superpixel_labels(const SuperpixelMap& map, const Mask& mask) {
    if (mask.width() != map.width() || mask.height() != map.height())
        throw std::invalid_argument("superpixel_labels: mask dimensions do not match the superpixel map");
    std::vector<int> fg(std::size_t(map.count()), 0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) ++fg[std::size_t(map[i])];
    std::vector<std::uint8_t> out(std::size_t(map.count()));
    for (int s = 0; s < map.count(); ++s) out[std::size_t(s)] = 2 * fg[std::size_t(s)] > map.stats(s).area ? 1 : 0;
    return out;
}

}  // namespace vcut
