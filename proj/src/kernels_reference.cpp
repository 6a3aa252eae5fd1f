// Serial reference kernels. Straightforward loops kept for testing the OpenMP
// versions and for benchmarking against them.

#include <cmath>
#include <limits>

#include "kernel_detail.hpp"

namespace vcut::kernels::reference {

std::vector<double> color_difference(const Frame& a, const Frame& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(double(squared_distance(a[i], b[i])));
    return out;
}

void slic_assign(const Frame& frame, std::span<const SlicCenter> centers, double spatial_norm, double compactness,
                 int window, std::span<int> labels) {
    const int width = frame.width(), height = frame.height();
    const double scale = (compactness * compactness) / (spatial_norm * spatial_norm);
    std::vector<double> dist(labels.size(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const SlicCenter& c = centers[k];
        const int x0 = std::max(0, int(std::ceil(c.x - window))), x1 = std::min(width - 1, int(std::floor(c.x + window)));
        const int y0 = std::max(0, int(std::ceil(c.y - window))), y1 = std::min(height - 1, int(std::floor(c.y + window)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const std::size_t p = std::size_t(y) * width + x;
                const double d = detail::slic_distance(c, frame[p], x, y, scale);
                if (d < dist[p]) {
                    dist[p] = d;
                    labels[p] = int(k);
                }
            }
    }
}

std::vector<WindowMatch> match_windows(const WindowMatchInput& in, std::span<const Window> windows) {
    const Frame& cur = *in.current;
    const Frame& prev = *in.previous;
    const Mask& coarse = *in.coarse;
    const Mask& prev_mask = *in.previous_mask;
    std::vector<WindowMatch> out;
    out.reserve(windows.size());
    for (const Window& w : windows) {
        WindowMatch best{0, 0, std::numeric_limits<std::int64_t>::max()};
        for (int dy = -in.radius_y; dy <= in.radius_y; ++dy)
            for (int dx = -in.radius_x; dx <= in.radius_x; ++dx) {
                if (!detail::offset_fits(w, dx, dy, cur.width(), cur.height())) continue;
                std::int64_t score = 0;
                for (int y = w.y; y < w.y + w.h; ++y)
                    for (int x = w.x; x < w.x + w.w; ++x)
                        score += match_cost(coarse.at(x, y), prev_mask.at(x + dx, y + dy), cur.at(x, y),
                                            prev.at(x + dx, y + dy));
                const WindowMatch cand{dx, dy, score};
                if (better_match(cand, best)) best = cand;
            }
        out.push_back(best);
    }
    return out;
}

Votes window_votes(const WindowMatchInput& in, std::span<const Window> windows, std::span<const WindowMatch> matches,
                   std::span<const std::uint8_t> uncertain) {
    const Frame& cur = *in.current;
    const Frame& prev = *in.previous;
    const Mask& prev_mask = *in.previous_mask;
    Votes v{std::vector<std::uint16_t>(cur.size(), 0), std::vector<std::uint16_t>(cur.size(), 0)};
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const Window& w = windows[i];
        const WindowMatch& m = matches[i];
        const Window src{w.x + m.dx, w.y + m.dy, w.w, w.h, w.scale};
        for (int y = w.y; y < w.y + w.h; ++y)
            for (int x = w.x; x < w.x + w.w; ++x) {
                const std::size_t p = std::size_t(y) * cur.width() + x;
                if (!uncertain[p]) continue;
                const std::size_t q = nearest_color_brute(prev, src, cur[p], x + m.dx, y + m.dy);
                if (prev_mask[q])
                    ++v.ones[p];
                else
                    ++v.zeros[p];
            }
    }
    return v;
}

SquareMatrix propagation_error_sums(std::span<const HopTable> hops) {
    const int n = int(hops.size());
    SquareMatrix s(n);
    for (int t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < hops[std::size_t(t)].size(); ++i) {
            const double area = hops[std::size_t(t)][i].area;
            double q = 0.0;
            int sp = int(i);
            for (int src = t - 1; src >= 0; --src) {
                const HopEntry& h = hops[std::size_t(src) + 1][std::size_t(sp)];
                q = q + (1.0 - q) * h.q_back;
                sp = h.back_match;
                s(src, t) += area * q;
            }
            q = 0.0;
            sp = int(i);
            for (int src = t + 1; src < n; ++src) {
                const HopEntry& h = hops[std::size_t(src) - 1][std::size_t(sp)];
                q = q + (1.0 - q) * h.q_fwd;
                sp = h.fwd_match;
                s(src, t) += area * q;
            }
        }
    }
    return s;
}

}  // namespace vcut::kernels::reference
