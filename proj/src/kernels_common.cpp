#include <algorithm>
#include <climits>
#include <cmath>
#include <tuple>

#include "vcut/kernels.hpp"

namespace vcut {
namespace {

const std::vector<std::int32_t>& distance_lut() {
    static const std::vector<std::int32_t> lut = [] {
        std::vector<std::int32_t> v(3 * 255 * 255 + 1);
        for (std::size_t d2 = 0; d2 < v.size(); ++d2)
            v[d2] = std::int32_t(std::llround(std::sqrt(double(d2)) / kMaxColorDistance * double(kScoreUnit)));
        return v;
    }();
    return lut;
}

}  // namespace

std::int64_t match_cost(std::uint8_t label_a, std::uint8_t label_b, Rgb a, Rgb b) {
    return (label_a != label_b ? kScoreUnit : 0) + distance_lut()[std::size_t(squared_distance(a, b))];
}

const std::int32_t* color_cost_table() { return distance_lut().data(); }

bool better_match(const WindowMatch& a, const WindowMatch& b) {
    if (a.score != b.score) return a.score < b.score;
    const int da = a.dx * a.dx + a.dy * a.dy, db = b.dx * b.dx + b.dy * b.dy;
    if (da != db) return da < db;
    return std::tie(a.dx, a.dy) < std::tie(b.dx, b.dy);
}

ColorIndex::ColorIndex(const Frame& frame, const Window& region) : frame_width_(frame.width()) {
    constexpr int cells = kCells * kCells * kCells;
    auto cell_of = [](Rgb c) { return ((c.r >> kShift) * kCells + (c.g >> kShift)) * kCells + (c.b >> kShift); };
    cell_start_.assign(cells + 1, 0);
    for (int y = region.y; y < region.y + region.h; ++y)
        for (int x = region.x; x < region.x + region.w; ++x) ++cell_start_[std::size_t(cell_of(frame.at(x, y))) + 1];
    for (int c = 0; c < cells; ++c) {
        if (cell_start_[std::size_t(c) + 1] > 0) nonempty_.push_back(c);
        cell_start_[std::size_t(c) + 1] += cell_start_[std::size_t(c)];
    }
    entries_.resize(std::size_t(region.w) * std::size_t(region.h));
    std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (int y = region.y; y < region.y + region.h; ++y)
        for (int x = region.x; x < region.x + region.w; ++x) {
            const Rgb c = frame.at(x, y);
            entries_[std::size_t(fill[std::size_t(cell_of(c))]++)] = Entry{c, x, y};
        }
}

std::size_t ColorIndex::nearest(Rgb query, int anchor_x, int anchor_y) const {
    int best_d2 = INT_MAX;
    long best_sp = LONG_MAX;
    std::size_t best_idx = 0;
    auto scan = [&](int cell) {
        for (int e = cell_start_[std::size_t(cell)]; e < cell_start_[std::size_t(cell) + 1]; ++e) {
            const Entry& en = entries_[std::size_t(e)];
            const int d2 = squared_distance(query, en.color);
            if (d2 > best_d2) continue;
            const long sx = en.x - anchor_x, sy = en.y - anchor_y;
            const long sp = sx * sx + sy * sy;
            const std::size_t idx = std::size_t(en.y) * frame_width_ + en.x;
            if (std::tie(d2, sp, idx) < std::tie(best_d2, best_sp, best_idx)) {
                best_d2 = d2;
                best_sp = sp;
                best_idx = idx;
            }
        }
    };
    const int own = ((query.r >> kShift) * kCells + (query.g >> kShift)) * kCells + (query.b >> kShift);
    scan(own);
    auto axis_gap = [](int v, int cell) {
        const int lo = cell << kShift, hi = lo + (1 << kShift) - 1;
        const int d = v < lo ? lo - v : (v > hi ? v - hi : 0);
        return d * d;
    };
    for (int cell : nonempty_) {
        if (cell == own) continue;
        const int cb = cell % kCells, cg = (cell / kCells) % kCells, cr = cell / (kCells * kCells);
        const int lb = axis_gap(query.r, cr) + axis_gap(query.g, cg) + axis_gap(query.b, cb);
        if (lb <= best_d2) scan(cell);
    }
    return best_idx;
}

std::size_t nearest_color_brute(const Frame& frame, const Window& region, Rgb query, int anchor_x, int anchor_y) {
    int best_d2 = INT_MAX;
    long best_sp = LONG_MAX;
    std::size_t best_idx = 0;
    for (int y = region.y; y < region.y + region.h; ++y)
        for (int x = region.x; x < region.x + region.w; ++x) {
            const int d2 = squared_distance(query, frame.at(x, y));
            const long sx = x - anchor_x, sy = y - anchor_y;
            const long sp = sx * sx + sy * sy;
            const std::size_t idx = std::size_t(y) * frame.width() + x;
            if (std::tie(d2, sp, idx) < std::tie(best_d2, best_sp, best_idx)) {
                best_d2 = d2;
                best_sp = sp;
                best_idx = idx;
            }
        }
    return best_idx;
}

}  // namespace vcut
