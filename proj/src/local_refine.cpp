#include "vcut/local_refine.hpp"

#include <algorithm>
#include <stdexcept>

#include "kernel_detail.hpp"

namespace vcut {

std::size_t UncertaintyField::uncertain_count() const {
    return std::size_t(std::count(uncertain.begin(), uncertain.end(), 1));
}

std::vector<double> propagation_uncertainty(const Frame& previous, const Frame& current) {
    if (previous.width() != current.width() || previous.height() != current.height())
        throw std::invalid_argument("propagation_uncertainty: frame dimensions differ");
    return kernels::color_difference(previous, current);
}

UncertaintyField partition_certainty(const Mask& coarse, const Mask& previous_mask, std::vector<double> values) {
    if (!coarse.same_shape(previous_mask) || values.size() != coarse.size())
        throw std::invalid_argument("partition_certainty: inputs are not aligned");
    UncertaintyField f{coarse.width(), coarse.height(), std::move(values), std::vector<std::uint8_t>(coarse.size())};
    double mean = 0.0;
    bool constant = true;
    if (!f.values.empty()) {
        long double sum = 0;
        for (double v : f.values) {
            sum += v;
            constant = constant && v == f.values.front();
        }
        mean = double(sum / f.values.size());
    }
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const bool changed = coarse[i] != previous_mask[i];
        const bool unstable = !constant && f.values[i] > mean;
        f.uncertain[i] = (changed || unstable) ? 1 : 0;
    }
    return f;
}

std::vector<Window> window_grid(int width, int height, int size) {
    if (size < 1) throw std::invalid_argument("window size must be positive");
    const int step = (size + 1) / 2;
    auto anchors = [&](int extent) {
        std::vector<int> a;
        for (int p = 0;; p += step) {
            a.push_back(p);
            if (p + size >= extent) break;
        }
        return a;
    };
    std::vector<Window> out;
    if (width <= 0 || height <= 0) return out;
    const auto xs = anchors(width), ys = anchors(height);
    for (int y : ys)
        for (int x : xs) out.push_back(Window{x, y, std::min(size, width - x), std::min(size, height - y), size});
    return out;
}

std::vector<Window> enabled_windows(const UncertaintyField& field, std::span<const int> sizes) {
    const int w = field.width, h = field.height;
    std::vector<int> sat(std::size_t(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        int row = 0;
        for (int x = 0; x < w; ++x) {
            row += field.uncertain[std::size_t(y) * w + x];
            sat[std::size_t(y + 1) * (w + 1) + x + 1] = sat[std::size_t(y) * (w + 1) + x + 1] + row;
        }
    }
    auto count = [&](const Window& win) {
        const std::size_t s = std::size_t(w) + 1;
        const std::size_t x0 = win.x, y0 = win.y, x1 = win.x + win.w, y1 = win.y + win.h;
        return sat[y1 * s + x1] - sat[y0 * s + x1] - sat[y1 * s + x0] + sat[y0 * s + x0];
    };
    std::vector<Window> out;
    for (int size : sizes)
        for (const Window& win : window_grid(w, h, size))
            if (count(win) > 0) out.push_back(win);
    return out;
}

SearchArea search_area(int width, int height, double fraction) {
    return SearchArea{int(fraction * width / 2.0), int(fraction * height / 2.0)};
}

std::int64_t window_score(const Window& window, int dx, int dy, const Frame& current, const Mask& coarse,
                          const Frame& previous, const Mask& previous_mask) {
    if (!detail::offset_fits(window, dx, dy, previous.width(), previous.height()))
        throw std::out_of_range("window_score: offset leaves the frame");
    std::int64_t score = 0;
    for (int y = window.y; y < window.y + window.h; ++y)
        for (int x = window.x; x < window.x + window.w; ++x)
            score += match_cost(coarse.at(x, y), previous_mask.at(x + dx, y + dy), current.at(x, y),
                                previous.at(x + dx, y + dy));
    return score;
}

WindowMatch match_window(const Window& window, const Frame& current, const Mask& coarse, const Frame& previous,
                         const Mask& previous_mask, SearchArea area) {
    const WindowMatchInput in{&current, &coarse, &previous, &previous_mask, area.radius_x, area.radius_y};
    const Window one[] = {window};
    return kernels::reference::match_windows(in, one).front();
}

std::uint8_t local_classify(int x, int y, const Window& window, const WindowMatch& match, const Frame& current,
                            const Frame& previous, const Mask& previous_mask) {
    const Window src{window.x + match.dx, window.y + match.dy, window.w, window.h, window.scale};
    const std::size_t q = nearest_color_brute(previous, src, current.at(x, y), x + match.dx, y + match.dy);
    return previous_mask[q];
}

std::vector<std::uint8_t> resolve_votes(const kernels::Votes& votes, const Mask& coarse) {
    std::vector<std::uint8_t> out(coarse.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (votes.ones[i] > votes.zeros[i]) out[i] = 1;
        else if (votes.zeros[i] > votes.ones[i]) out[i] = 0;
        else out[i] = coarse[i];
    }
    return out;
}

Mask fuse_masks(const Mask& coarse, std::span<const std::uint8_t> local_labels,
                std::span<const std::uint8_t> uncertain) {
    if (local_labels.size() != coarse.size() || uncertain.size() != coarse.size())
        throw std::invalid_argument("fuse_masks: inputs are not aligned");
    Mask out = coarse;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (uncertain[i]) out[i] = local_labels[i] ? 1 : 0;
    return out;
}

Mask merge_bidirectional(const Mask& left, const Mask& right, int left_index, int right_index, int t,
                         double threshold) {
    if (left_index >= right_index) throw std::invalid_argument("merge_bidirectional: left index must precede right");
    if (t <= left_index || t >= right_index)
        throw std::invalid_argument("merge_bidirectional: frame must lie strictly between the annotations");
    if (!left.same_shape(right)) throw std::invalid_argument("merge_bidirectional: mask dimensions differ");
    const double span = right_index - left_index;
    const double wl = right_index - t, wr = t - left_index;
    Mask out(left.width(), left.height(), 0, t);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = (wl * left[i] + wr * right[i]) / span;
        out[i] = v < threshold ? 0 : 1;
    }
    return out;
}

Mask fill_holes(const Mask& mask) {
    const int w = mask.width(), h = mask.height();
    std::vector<std::uint8_t> outside(mask.size(), 0);
    std::vector<std::size_t> stack;
    auto seed = [&](int x, int y) {
        const std::size_t p = std::size_t(y) * w + x;
        if (!mask[p] && !outside[p]) {
            outside[p] = 1;
            stack.push_back(p);
        }
    };
    for (int x = 0; x < w; ++x) seed(x, 0), seed(x, h - 1);
    for (int y = 0; y < h; ++y) seed(0, y), seed(w - 1, y);
    while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        const int x = int(p % std::size_t(w)), y = int(p / std::size_t(w));
        if (x > 0) seed(x - 1, y);
        if (x + 1 < w) seed(x + 1, y);
        if (y > 0) seed(x, y - 1);
        if (y + 1 < h) seed(x, y + 1);
    }
    Mask out = mask;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!outside[i]) out[i] = 1;
    return out;
}

RefineResult refine_frame(const Frame& previous, const Mask& previous_mask, const Frame& current, const Mask& coarse,
                          const RefineParams& params) {
    RefineResult r;
    r.field = partition_certainty(coarse, previous_mask, propagation_uncertainty(previous, current));
    r.windows = enabled_windows(r.field, params.window_sizes);
    const SearchArea area = search_area(current.width(), current.height(), params.search_area_fraction);
    const WindowMatchInput in{&current, &coarse, &previous, &previous_mask, area.radius_x, area.radius_y};
    r.matches = kernels::match_windows(in, r.windows);
    const auto votes = kernels::window_votes(in, r.windows, r.matches, r.field.uncertain);
    r.mask = fuse_masks(coarse, resolve_votes(votes, coarse), r.field.uncertain);
    r.mask.set_frame_index(coarse.frame_index());
    return r;
}

}  // namespace vcut
