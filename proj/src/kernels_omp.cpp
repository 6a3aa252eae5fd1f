// OpenMP kernels. Results match kernels::reference bit for bit: every reduction is
// either over integers or kept in the serial order.

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernel_detail.hpp"

namespace vcut::kernels {

std::vector<double> color_difference(const Frame& a, const Frame& b) {
    std::vector<double> out(a.size());
    const long n = long(out.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[std::size_t(i)] = std::sqrt(double(squared_distance(a[std::size_t(i)], b[std::size_t(i)])));
    return out;
}

void slic_assign(const Frame& frame, std::span<const SlicCenter> centers, double spatial_norm, double compactness,
                 int window, std::span<int> labels) {
    const int width = frame.width(), height = frame.height();
    const double scale = (compactness * compactness) / (spatial_norm * spatial_norm);

    // Bucket centres on a grid of `window`-sized cells; a centre covering a pixel
    // lies in the pixel's bucket or one of its 8 neighbours.
    const int bucket = std::max(1, window);
    const int bw = width / bucket + 1, bh = height / bucket + 1;
    std::vector<std::vector<int>> buckets(std::size_t(bw) * bh);
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const int bx = std::clamp(int(centers[k].x) / bucket, 0, bw - 1);
        const int by = std::clamp(int(centers[k].y) / bucket, 0, bh - 1);
        buckets[std::size_t(by) * bw + bx].push_back(int(k));
    }

#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        const int by = y / bucket;
        for (int x = 0; x < width; ++x) {
            const int bx = x / bucket;
            const std::size_t p = std::size_t(y) * width + x;
            double best = std::numeric_limits<double>::infinity();
            int best_k = -1;
            for (int ny = std::max(0, by - 1); ny <= std::min(bh - 1, by + 1); ++ny)
                for (int nx = std::max(0, bx - 1); nx <= std::min(bw - 1, bx + 1); ++nx)
                    for (int k : buckets[std::size_t(ny) * bw + nx]) {
                        const SlicCenter& c = centers[std::size_t(k)];
                        if (!detail::covers(c, x, y, window)) continue;
                        const double d = detail::slic_distance(c, frame[p], x, y, scale);
                        if (d < best || (d == best && k < best_k)) {
                            best = d;
                            best_k = k;
                        }
                    }
            if (best_k >= 0) labels[p] = best_k;
        }
    }
}

std::vector<WindowMatch> match_windows(const WindowMatchInput& in, std::span<const Window> windows) {
    const int nwin = int(windows.size());
    std::vector<WindowMatch> result(windows.size(), WindowMatch{0, 0, std::numeric_limits<std::int64_t>::max()});
    if (nwin == 0) return result;

    const Frame& cur = *in.current;
    const Frame& prev = *in.previous;
    const Mask& coarse = *in.coarse;
    const Mask& prev_mask = *in.previous_mask;
    const int width = cur.width(), height = cur.height();

    int bx0 = width, by0 = height, bx1 = 0, by1 = 0;
    for (const Window& w : windows) {
        bx0 = std::min(bx0, w.x), by0 = std::min(by0, w.y);
        bx1 = std::max(bx1, w.x + w.w), by1 = std::max(by1, w.y + w.h);
    }
    const int bw = bx1 - bx0, bh = by1 - by0;
    const int ox = 2 * in.radius_x + 1;
    const long offsets = long(ox) * (2 * in.radius_y + 1);

    // Packed pixels: colour in the low 24 bits, label in bit 24.
    auto pack = [](Rgb c, std::uint8_t label) {
        return std::uint32_t(c.r) | std::uint32_t(c.g) << 8 | std::uint32_t(c.b) << 16 | std::uint32_t(label != 0) << 24;
    };
    std::vector<std::uint32_t> prev_px(prev.size());
    for (std::size_t i = 0; i < prev_px.size(); ++i) prev_px[i] = pack(prev[i], prev_mask[i]);
    // Only pixels inside some window contribute; each row keeps its covered spans.
    std::vector<std::uint8_t> covered(std::size_t(bw) * std::size_t(bh), 0);
    for (const Window& w : windows)
        for (int y = w.y; y < w.y + w.h; ++y)
            std::fill_n(covered.begin() + std::ptrdiff_t(std::size_t(y - by0) * bw + std::size_t(w.x - bx0)), w.w, 1);
    std::vector<std::uint32_t> cur_px(covered.size());
    std::vector<std::vector<std::pair<int, int>>> spans(static_cast<std::size_t>(bh));
    for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) {
            const std::size_t i = std::size_t(y) * bw + x;
            cur_px[i] = pack(cur.at(bx0 + x, by0 + y), coarse.at(bx0 + x, by0 + y));
            if (!covered[i]) continue;
            auto& row = spans[std::size_t(y)];
            if (!row.empty() && row.back().second == x) ++row.back().second;
            else row.emplace_back(x, x + 1);
        }
    const std::int32_t* lut = color_cost_table();

    // Each offset gets a summed-area table of per-pixel costs over the bounding box of
    // all windows; every window that fits under the offset reads its score from it.
#pragma omp parallel
    {
        std::vector<WindowMatch> local(result);
        std::vector<std::int64_t> sat(std::size_t(bw + 1) * std::size_t(bh + 1), 0);
        std::vector<std::int64_t> cost(std::size_t(bw), 0);
        const std::size_t stride = std::size_t(bw) + 1;
#pragma omp for schedule(dynamic, 4)
        for (long o = 0; o < offsets; ++o) {
            const int dx = int(o % ox) - in.radius_x;
            const int dy = int(o / ox) - in.radius_y;
            bool any = false;
            for (const Window& w : windows) any = any || detail::offset_fits(w, dx, dy, width, height);
            if (!any) continue;
            for (int y = 0; y < bh; ++y) {
                const int qy = by0 + y + dy;
                std::fill(cost.begin(), cost.end(), 0);
                if (qy >= 0 && qy < height) {
                    const std::uint32_t* a = cur_px.data() + std::size_t(y) * bw;
                    const std::uint32_t* b = prev_px.data() + std::size_t(qy) * width + (bx0 + dx);
                    for (const auto& [s0, s1] : spans[std::size_t(y)]) {
                        const int lo = std::max(s0, -(bx0 + dx)), hi = std::min(s1, width - (bx0 + dx));
                        for (int x = lo; x < hi; ++x) {
                            const std::uint32_t pa = a[x], pb = b[x];
                            const int dr = int(pa & 0xff) - int(pb & 0xff);
                            const int dg = int(pa >> 8 & 0xff) - int(pb >> 8 & 0xff);
                            const int db = int(pa >> 16 & 0xff) - int(pb >> 16 & 0xff);
                            cost[std::size_t(x)] = std::int64_t((pa ^ pb) >> 24) * kScoreUnit + lut[dr * dr + dg * dg + db * db];
                        }
                    }
                }
                std::int64_t row = 0;
                const std::int64_t* above = sat.data() + std::size_t(y) * stride;
                std::int64_t* here = sat.data() + std::size_t(y + 1) * stride;
                for (int x = 0; x < bw; ++x) {
                    row += cost[std::size_t(x)];
                    here[x + 1] = above[x + 1] + row;
                }
            }
            for (int i = 0; i < nwin; ++i) {
                const Window& w = windows[std::size_t(i)];
                if (!detail::offset_fits(w, dx, dy, width, height)) continue;
                const std::size_t x0 = std::size_t(w.x - bx0), y0 = std::size_t(w.y - by0);
                const std::size_t x1 = x0 + std::size_t(w.w), y1 = y0 + std::size_t(w.h);
                const std::int64_t score =
                    sat[y1 * stride + x1] - sat[y0 * stride + x1] - sat[y1 * stride + x0] + sat[y0 * stride + x0];
                const WindowMatch cand{dx, dy, score};
                if (better_match(cand, local[std::size_t(i)])) local[std::size_t(i)] = cand;
            }
        }
#pragma omp critical
        for (int i = 0; i < nwin; ++i)
            if (better_match(local[std::size_t(i)], result[std::size_t(i)])) result[std::size_t(i)] = local[std::size_t(i)];
    }
    return result;
}

Votes window_votes(const WindowMatchInput& in, std::span<const Window> windows, std::span<const WindowMatch> matches,
                   std::span<const std::uint8_t> uncertain) {
    const Frame& cur = *in.current;
    const Frame& prev = *in.previous;
    const Mask& prev_mask = *in.previous_mask;
    const int nwin = int(windows.size());

    struct Vote {
        std::uint32_t pixel;
        std::uint8_t label;
    };
    std::vector<std::vector<Vote>> per_window(windows.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nwin; ++i) {
        const Window& w = windows[std::size_t(i)];
        const WindowMatch& m = matches[std::size_t(i)];
        bool any = false;
        for (int y = w.y; y < w.y + w.h && !any; ++y)
            for (int x = w.x; x < w.x + w.w && !any; ++x) any = uncertain[std::size_t(y) * cur.width() + x] != 0;
        if (!any) continue;
        const ColorIndex index(prev, Window{w.x + m.dx, w.y + m.dy, w.w, w.h, w.scale});
        auto& out = per_window[std::size_t(i)];
        for (int y = w.y; y < w.y + w.h; ++y)
            for (int x = w.x; x < w.x + w.w; ++x) {
                const std::size_t p = std::size_t(y) * cur.width() + x;
                if (!uncertain[p]) continue;
                const std::size_t q = index.nearest(cur[p], x + m.dx, y + m.dy);
                out.push_back(Vote{std::uint32_t(p), prev_mask[q]});
            }
    }

    Votes v{std::vector<std::uint16_t>(cur.size(), 0), std::vector<std::uint16_t>(cur.size(), 0)};
    for (const auto& list : per_window)
        for (const Vote& vote : list) {
            if (vote.label)
                ++v.ones[vote.pixel];
            else
                ++v.zeros[vote.pixel];
        }
    return v;
}

SquareMatrix propagation_error_sums(std::span<const HopTable> hops) {
    const int n = int(hops.size());
    SquareMatrix s(n);
#pragma omp parallel for schedule(dynamic)
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

}  // namespace vcut::kernels
