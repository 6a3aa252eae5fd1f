#include "vcut/frame_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "vcut/global_confidence.hpp"

namespace vcut {

std::vector<int> best_matches(const SuperpixelMap& from, const SuperpixelMap& to, double radius) {
    if (to.count() == 0) throw std::invalid_argument("best_matches: empty target frame");
    const double r2 = radius * radius;
    std::vector<int> out(std::size_t(from.count()));
    auto color2 = [](const SuperpixelStats& a, const SuperpixelStats& b) {
        const double dr = a.mean_r - b.mean_r, dg = a.mean_g - b.mean_g, db = a.mean_b - b.mean_b;
        return dr * dr + dg * dg + db * db;
    };
    for (int i = 0; i < from.count(); ++i) {
        const SuperpixelStats& a = from.stats(i);
        using Key = std::tuple<double, double, int>;
        Key best{std::numeric_limits<double>::infinity(), 0.0, -1};
        Key fallback = best;
        for (int j = 0; j < to.count(); ++j) {
            const SuperpixelStats& b = to.stats(j);
            const double dx = b.centroid.x - a.centroid.x, dy = b.centroid.y - a.centroid.y;
            const double d2 = dx * dx + dy * dy;
            const Key k{color2(a, b), d2, j};
            if (k < fallback) fallback = k;
            if (d2 <= r2 && k < best) best = k;
        }
        out[std::size_t(i)] = std::get<2>(best) >= 0 ? std::get<2>(best) : std::get<2>(fallback);
    }
    return out;
}

SuperpixelMatchField match_superpixels(const SuperpixelMap& earlier, const SuperpixelMap& later, double radius) {
    if (earlier.width() != later.width() || earlier.height() != later.height())
        throw std::invalid_argument("match_superpixels: dimension mismatch");
    SuperpixelMatchField f;
    f.forward = best_matches(earlier, later, radius);
    f.backward = best_matches(later, earlier, radius);
    auto flow = [](const SuperpixelStats& a, const SuperpixelStats& b) {
        return Point2{b.centroid.x - a.centroid.x, b.centroid.y - a.centroid.y};
    };
    for (int i = 0; i < earlier.count(); ++i)
        f.forward_flow.push_back(flow(earlier.stats(i), later.stats(f.forward[std::size_t(i)])));
    for (int j = 0; j < later.count(); ++j)
        f.backward_flow.push_back(flow(later.stats(j), earlier.stats(f.backward[std::size_t(j)])));
    return f;
}

double occlusion_distance(Point2 flow_out, Point2 flow_back) {
    const double den = std::hypot(flow_out.x, flow_out.y) + std::hypot(flow_back.x, flow_back.y);
    if (den == 0.0) return 0.0;
    return std::hypot(flow_out.x + flow_back.x, flow_out.y + flow_back.y) / den;
}

double hop_mislabel_prob(double d_app, Point2 flow_out, Point2 flow_back) {
    return 1.0 - std::exp(-(d_app + occlusion_distance(flow_out, flow_back)));
}

double accumulate_error(std::span<const double> hop_probabilities) {
    double q = 0.0;
    for (double hop : hop_probabilities) q = q + (1.0 - q) * hop;
    return q;
}

FrameDescriptor frame_descriptor(const Frame& frame, int levels, int bins_per_channel, PyramidGrid grid) {
    if (levels < 0) throw std::invalid_argument("frame_descriptor: levels must be >= 0");
    const ColorQuantizer quant(bins_per_channel);
    FrameDescriptor d;
    const double n = double(frame.size());
    std::vector<std::uint32_t> keys(frame.size());
    for (int l = 0; l <= levels; ++l) {
        const GridLevel g = grid_level(l, grid);
        if (double(g.cell_count()) * quant.bin_count() > double(std::numeric_limits<std::uint32_t>::max()))
            throw std::invalid_argument("frame_descriptor: too many pyramid cells for the bin count");
        for (int y = 0; y < frame.height(); ++y)
            for (int x = 0; x < frame.width(); ++x)
                keys[std::size_t(y) * frame.width() + x] =
                    std::uint32_t(g.cell_of(x, y, frame.width(), frame.height())) * quant.bin_count() +
                    quant.bin(frame.at(x, y));
        std::sort(keys.begin(), keys.end());
        auto& level = d.levels.emplace_back();
        for (std::size_t i = 0; i < keys.size();) {
            std::size_t j = i;
            while (j < keys.size() && keys[j] == keys[i]) ++j;
            level.emplace_back(keys[i], double(j - i) / n);
            i = j;
        }
    }
    return d;
}

double adjustment_coefficient(const FrameDescriptor& a, const FrameDescriptor& b) {
    if (a.levels.size() != b.levels.size()) throw std::invalid_argument("adjustment_coefficient: level counts differ");
    double alpha = 0.0;
    for (std::size_t l = 0; l < a.levels.size(); ++l) {
        const auto& x = a.levels[l];
        const auto& y = b.levels[l];
        std::size_t i = 0, j = 0;
        double sum = 0.0;
        while (i < x.size() || j < y.size()) {
            if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) sum += x[i++].second;
            else if (i == x.size() || y[j].first < x[i].first) sum += y[j++].second;
            else sum += std::abs(x[i++].second - y[j++].second);
        }
        alpha += sum;
    }
    return alpha;
}

std::vector<HopTable> build_hop_tables(std::span<const SuperpixelMap> maps, double match_radius) {
    const int n = int(maps.size());
    std::vector<HopTable> hops(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        hops[std::size_t(t)].resize(std::size_t(maps[std::size_t(t)].count()));
        for (int i = 0; i < maps[std::size_t(t)].count(); ++i)
            hops[std::size_t(t)][std::size_t(i)].area = maps[std::size_t(t)].stats(i).area;
    }
    std::vector<SuperpixelMatchField> fields(std::size_t(std::max(0, n - 1)));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n - 1; ++t)
        fields[std::size_t(t)] = match_superpixels(maps[std::size_t(t)], maps[std::size_t(t) + 1], match_radius);

    for (int t = 0; t + 1 < n; ++t) {
        const SuperpixelMatchField& f = fields[std::size_t(t)];
        const SuperpixelMap& early = maps[std::size_t(t)];
        const SuperpixelMap& late = maps[std::size_t(t) + 1];
        // Later frame, hop from the earlier one.
        for (int j = 0; j < late.count(); ++j) {
            const int m = f.backward[std::size_t(j)];
            const double d_app = late.stats(j).color_distance(early.stats(m)) / kMaxColorDistance;
            auto& h = hops[std::size_t(t) + 1][std::size_t(j)];
            h.back_match = m;
            h.q_back = hop_mislabel_prob(d_app, f.forward_flow[std::size_t(m)], f.backward_flow[std::size_t(j)]);
        }
        // Earlier frame, hop from the later one.
        for (int i = 0; i < early.count(); ++i) {
            const int m = f.forward[std::size_t(i)];
            const double d_app = early.stats(i).color_distance(late.stats(m)) / kMaxColorDistance;
            auto& h = hops[std::size_t(t)][std::size_t(i)];
            h.fwd_match = m;
            h.q_fwd = hop_mislabel_prob(d_app, f.backward_flow[std::size_t(m)], f.forward_flow[std::size_t(i)]);
        }
    }
    return hops;
}

ErrorMatrix propagation_error_matrix(std::span<const Frame> frames, std::span<const SuperpixelMap> maps,
                                     const RunConfig& config) {
    if (frames.size() != maps.size()) throw std::invalid_argument("propagation_error_matrix: frame/map count mismatch");
    const int n = int(frames.size());
    if (n == 0) return ErrorMatrix(0);
    const double radius =
        config.match_radius_fraction * std::hypot(double(frames.front().width()), double(frames.front().height()));
    SquareMatrix sums = kernels::propagation_error_sums(build_hop_tables(maps, radius));

    std::vector<FrameDescriptor> desc(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n; ++t)
        desc[std::size_t(t)] =
            frame_descriptor(frames[std::size_t(t)], config.pyramid_levels, config.bins_per_channel, config.pyramid_grid);

    const long pairs = long(n) * n;
#pragma omp parallel for schedule(dynamic, 8)
    for (long p = 0; p < pairs; ++p) {
        const int a = int(p / n), b = int(p % n);
        if (a >= b) continue;
        const double alpha = adjustment_coefficient(desc[std::size_t(a)], desc[std::size_t(b)]);
        sums(a, b) *= alpha;
        sums(b, a) *= alpha;
    }
    for (int t = 0; t < n; ++t) sums(t, t) = 0.0;
    return ErrorMatrix(std::move(sums));
}

double selection_objective(const ErrorMatrix& error, std::span<const int> selected) {
    const int n = error.size();
    if (selected.empty()) throw std::invalid_argument("selection_objective: empty selection");
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i] < 1 || selected[i] > n) throw std::invalid_argument("selection_objective: index out of range");
        if (i && selected[i] <= selected[i - 1]) throw std::invalid_argument("selection_objective: indices not increasing");
    }
    double total = 0.0;
    std::size_t next = 0;
    for (int t = 1; t <= n; ++t) {
        while (next < selected.size() && selected[next] < t) ++next;
        if (next < selected.size() && selected[next] == t) continue;
        if (next == 0) {
            total += error(selected.front(), t);
        } else if (next == selected.size()) {
            total += error(selected.back(), t);
        } else {
            const int l = selected[next - 1], r = selected[next];
            total += ((r - t) * error(l, t) + (t - l) * error(r, t)) / double(r - l);
        }
    }
    return total;
}

FrameSelection select_frames(const ErrorMatrix& error, int k) {
    const int n = error.size();
    if (k < 1) throw std::invalid_argument("select_frames: K must be >= 1");
    if (k > n) throw std::invalid_argument("select_frames: K = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
    const SquareMatrix& e = error.raw();

    // Costs of the frames before the first / after the last selected frame.
    std::vector<double> pre(std::size_t(n), 0.0), suf(std::size_t(n), 0.0);
    for (int a = 0; a < n; ++a) {
        for (int t = 0; t < a; ++t) pre[std::size_t(a)] += e(a, t);
        for (int t = a + 1; t < n; ++t) suf[std::size_t(a)] += e(a, t);
    }

    // gap(a, b) = sum_{a<t<b} ((b-t) e(a,t) + (t-a) e(b,t)) / (b-a), built from running
    // sums of nonnegative terms so nothing cancels.
    SquareMatrix left(n), right(n);
    for (int a = 0; a < n; ++a) {
        double run = 0.0, acc = 0.0;  // acc = sum_{a<t<b} (b-t) e(a,t)
        for (int b = a + 1; b < n; ++b) {
            acc += run;
            left(a, b) = acc;
            run += e(a, b);
        }
    }
    for (int b = 0; b < n; ++b) {
        double run = 0.0, acc = 0.0;  // acc = sum_{a<t<b} (t-a) e(b,t)
        for (int a = b - 1; a >= 0; --a) {
            acc += run;
            right(a, b) = acc;
            run += e(b, a);
        }
    }
    auto gap = [&](int a, int b) { return (left(a, b) + right(a, b)) / double(b - a); };

    const double inf = std::numeric_limits<double>::infinity();
    // best[j][a]: minimum cost of the frames after a when a is selected and j more follow.
    std::vector<std::vector<double>> best(std::size_t(k), std::vector<double>(std::size_t(n), inf));
    best[0] = suf;
    for (int j = 1; j < k; ++j)
        for (int a = 0; a + j < n; ++a) {
            double v = inf;
            for (int b = a + 1; b + j - 1 < n; ++b) v = std::min(v, gap(a, b) + best[std::size_t(j) - 1][std::size_t(b)]);
            best[std::size_t(j)][std::size_t(a)] = v;
        }

    auto within = [](double v, double target) { return v <= target + kObjectiveTieTolerance * std::abs(target); };

    double total = inf;
    for (int a = 0; a + k - 1 < n; ++a) total = std::min(total, pre[std::size_t(a)] + best[std::size_t(k) - 1][std::size_t(a)]);
    FrameSelection out;
    int a = 0;
    while (!within(pre[std::size_t(a)] + best[std::size_t(k) - 1][std::size_t(a)], total)) ++a;
    out.frames.push_back(a + 1);
    for (int j = k - 1; j >= 1; --j) {
        const double target = best[std::size_t(j)][std::size_t(a)];
        int b = a + 1;
        while (!within(gap(a, b) + best[std::size_t(j) - 1][std::size_t(b)], target)) ++b;
        out.frames.push_back(b + 1);
        a = b;
    }
    out.objective = selection_objective(error, out.frames);
    return out;
}

}  // namespace vcut
