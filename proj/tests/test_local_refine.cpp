#include <doctest.h>

#include "support.hpp"
#include "vcut/local_refine.hpp"

using namespace vcut;

namespace {

// Pair (previous, current) where current(x, y) = previous(x + dx, y + dy) wherever that is inside the frame.
struct Shifted {
    Frame previous, current;
    Mask previous_mask, coarse;
};

Shifted shifted_pair(int w, int h, int dx, int dy, std::mt19937& rng) {
    Shifted s;
    s.previous = testing::random_frame(w, h, rng);
    s.previous_mask = testing::random_mask(w, h, rng, 0.4);
    s.current = Frame(w, h);
    s.coarse = Mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
            s.current.at(x, y) = s.previous.at(sx, sy);
            s.coarse.at(x, y) = s.previous_mask.at(sx, sy);
        }
    return s;
}

bool contains(const Window& w, int x, int y) { return x >= w.x && x < w.x + w.w && y >= w.y && y < w.y + w.h; }

}  // namespace

TEST_CASE("propagation uncertainty is the co-located RGB distance") {
    std::mt19937 rng(1);
    const Frame a = testing::random_frame(7, 5, rng), b = testing::random_frame(7, 5, rng);
    const auto e = propagation_uncertainty(a, b);
    for (double v : propagation_uncertainty(a, a)) CHECK(v == 0.0);
    CHECK(e == propagation_uncertainty(b, a));
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(color_distance(a[i], b[i])));

    const Frame black(1, 1, Rgb{0, 0, 0}), other(1, 1, Rgb{30, 40, 0});
    CHECK(propagation_uncertainty(black, other)[0] == doctest::Approx(50.0));
    CHECK_THROWS_AS(propagation_uncertainty(a, Frame(5, 7)), std::invalid_argument);
}

TEST_CASE("partition_certainty examples") {
    const Mask m(4, 3, {0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0});
    SUBCASE("identical masks and frames") {
        const auto f = partition_certainty(m, m, std::vector<double>(12, 0.0));
        CHECK(f.uncertain_count() == 0);
    }
    SUBCASE("one flipped label") {
        Mask c = m;
        c.at(3, 2) = 1;
        const auto f = partition_certainty(c, m, std::vector<double>(12, 0.0));
        CHECK(f.uncertain_count() == 1);
        CHECK(f.uncertain[11] == 1);
    }
    SUBCASE("one pixel above the mean") {
        std::vector<double> e(12, 0.0);
        e[5] = 3.0;  // mean 0.25
        const auto f = partition_certainty(m, m, e);
        CHECK(f.uncertain_count() == 1);
        CHECK(f.uncertain[5] == 1);
    }
    SUBCASE("misaligned inputs") {
        CHECK_THROWS_AS(partition_certainty(m, Mask(3, 4), std::vector<double>(12)), std::invalid_argument);
        CHECK_THROWS_AS(partition_certainty(m, m, std::vector<double>(11)), std::invalid_argument);
    }
}

TEST_CASE("uncertain set follows the disjunction on random inputs") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Mask a = testing::random_mask(9, 6, rng), b = testing::random_mask(9, 6, rng);
        std::vector<double> e(a.size());
        double mean = 0.0;
        for (double& v : e) mean += (v = u(rng));
        mean /= double(e.size());
        const auto f = partition_certainty(a, b, e);
        std::size_t certain = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const bool expect = a[i] != b[i] || e[i] > mean;
            CHECK(bool(f.uncertain[i]) == expect);
            certain += f.uncertain[i] == 0;
        }
        CHECK(certain + f.uncertain_count() == a.size());
    }
}

TEST_CASE("window grid overlaps by half and tiles the frame") {
    for (auto [w, h, s] : {std::tuple{64, 48, 16}, std::tuple{100, 37, 30}, std::tuple{20, 20, 80}, std::tuple{31, 9, 5}}) {
        CAPTURE(w);
        CAPTURE(s);
        const auto grid = window_grid(w, h, s);
        std::vector<int> cover(std::size_t(w) * h, 0);
        for (const Window& win : grid) {
            CHECK(win.x >= 0);
            CHECK(win.y >= 0);
            CHECK(win.x + win.w <= w);
            CHECK(win.y + win.h <= h);
            CHECK(win.x % ((s + 1) / 2) == 0);
            CHECK(win.y % ((s + 1) / 2) == 0);
            CHECK(win.scale == s);
            for (int y = win.y; y < win.y + win.h; ++y)
                for (int x = win.x; x < win.x + win.w; ++x) ++cover[std::size_t(y) * w + x];
        }
        for (int c : cover) {
            CHECK(c >= 1);
            CHECK(c <= 4);
        }
    }
    CHECK_THROWS_AS(window_grid(10, 10, 0), std::invalid_argument);
}

TEST_CASE("enabled windows are the grid windows touching the uncertain set") {
    const int w = 70, h = 50;
    const std::vector<int> sizes = {10, 20, 40};
    UncertaintyField f{w, h, std::vector<double>(std::size_t(w) * h), std::vector<std::uint8_t>(std::size_t(w) * h, 0)};
    SUBCASE("empty set") { CHECK(enabled_windows(f, sizes).empty()); }
    SUBCASE("every pixel") {
        std::fill(f.uncertain.begin(), f.uncertain.end(), 1);
        std::size_t total = 0;
        for (int s : sizes) total += window_grid(w, h, s).size();
        CHECK(enabled_windows(f, sizes).size() == total);
    }
    SUBCASE("single pixels") {
        std::mt19937 rng(8);
        for (int trial = 0; trial < 40; ++trial) {
            std::fill(f.uncertain.begin(), f.uncertain.end(), 0);
            const int x = int(rng() % w), y = int(rng() % h);
            f.uncertain[std::size_t(y) * w + x] = 1;
            const auto on = enabled_windows(f, sizes);
            for (int s : sizes) {
                int n = 0;
                for (const Window& win : on)
                    if (win.scale == s) {
                        CHECK(contains(win, x, y));
                        ++n;
                    }
                CHECK(n >= 1);
                CHECK(n <= 4);
            }
        }
    }
    SUBCASE("random sets match a brute-force filter") {
        std::mt19937 rng(9);
        const Mask u = testing::random_mask(w, h, rng, 0.002);
        f.uncertain.assign(u.labels().begin(), u.labels().end());
        std::vector<Window> expect;
        for (int s : sizes)
            for (const Window& win : window_grid(w, h, s)) {
                bool hit = false;
                for (int y = win.y; y < win.y + win.h; ++y)
                    for (int x = win.x; x < win.x + win.w; ++x) hit = hit || f.uncertain[std::size_t(y) * w + x];
                if (hit) expect.push_back(win);
            }
        CHECK(enabled_windows(f, sizes) == expect);
    }
}

TEST_CASE("search area is half the configured fraction each way") {
    const SearchArea a = search_area(320, 240, 0.25);
    CHECK(a.radius_x == 40);
    CHECK(a.radius_y == 30);
}

TEST_CASE("static scene matches at zero offset with zero score") {
    std::mt19937 rng(4);
    const Frame f = testing::random_frame(40, 30, rng);
    const Mask m = testing::random_mask(40, 30, rng);
    for (const Window& win : window_grid(40, 30, 10)) {
        const WindowMatch r = match_window(win, f, m, f, m, search_area(40, 30, 0.25));
        CHECK(r == WindowMatch{0, 0, 0});
    }
}

TEST_CASE("pure translations are recovered exactly") {
    std::mt19937 rng(12);
    const int w = 96, h = 80, s = 16;
    const SearchArea area = search_area(w, h, 0.25);
    std::uniform_int_distribution<int> ox(-area.radius_x, area.radius_x), oy(-area.radius_y, area.radius_y);
    int recovered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int dx = ox(rng), dy = oy(rng);
        const Shifted p = shifted_pair(w, h, dx, dy, rng);
        // Keep the window and its true source inside the frame.
        const int x = area.radius_x + int(rng() % unsigned(w - s - 2 * area.radius_x + 1));
        const int y = area.radius_y + int(rng() % unsigned(h - s - 2 * area.radius_y + 1));
        const Window win{x, y, s, s, s};
        const WindowMatch r = match_window(win, p.current, p.coarse, p.previous, p.previous_mask, area);
        recovered += r.dx == dx && r.dy == dy;
        CHECK(r.score == 0);
        if (trial < 5) {
            // Exhaustive: the generating offset is the global minimum of the score.
            const std::int64_t truth = window_score(win, dx, dy, p.current, p.coarse, p.previous, p.previous_mask);
            for (int ey = -area.radius_y; ey <= area.radius_y; ++ey)
                for (int ex = -area.radius_x; ex <= area.radius_x; ++ex)
                    if (ex != dx || ey != dy)
                        CHECK(window_score(win, ex, ey, p.current, p.coarse, p.previous, p.previous_mask) > truth);
        }
    }
    CHECK(recovered == 100);
}

TEST_CASE("candidates that leave the frame are skipped") {
    std::mt19937 rng(5);
    const Frame f = testing::random_frame(30, 30, rng);
    const Mask m(30, 30);
    const Window corner{0, 0, 10, 10, 10};
    CHECK_THROWS_AS(window_score(corner, -1, 0, f, m, f, m), std::out_of_range);
    const Shifted p = shifted_pair(30, 30, -3, 0, rng);
    const WindowMatch r = match_window(corner, p.current, p.coarse, p.previous, p.previous_mask, SearchArea{5, 5});
    CHECK(r.dx >= 0);
    CHECK(r.dy >= 0);
}

TEST_CASE("inverted labels score worse than a slight colour change") {
    const int n = 6;
    std::mt19937 rng(6);
    const Frame cur = testing::random_frame(n, n, rng);
    const Mask labels = testing::random_mask(n, n, rng);
    Mask inverted(n, n);
    Frame tinted(n, n);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        inverted[i] = 1 - labels[i];
        const Rgb c = cur[i];
        tinted[i] = Rgb{std::uint8_t(std::min(255, c.r + 3)), std::uint8_t(std::max(0, c.g - 3)), c.b};
    }
    const Window win{0, 0, n, n, n};
    const std::int64_t flipped = window_score(win, 0, 0, cur, labels, cur, inverted);
    const std::int64_t tint = window_score(win, 0, 0, cur, labels, tinted, labels);
    CHECK(flipped == std::int64_t(n * n) * kScoreUnit);
    CHECK(tint > 0);
    CHECK(flipped > tint);
}

TEST_CASE("match cost units") {
    const Rgb black{0, 0, 0}, white{255, 255, 255};
    CHECK(match_cost(0, 1, black, black) == kScoreUnit);
    CHECK(match_cost(1, 1, black, white) == kScoreUnit);
    CHECK(match_cost(1, 0, black, white) == 2 * kScoreUnit);
    CHECK(match_cost(0, 0, Rgb{1, 2, 3}, Rgb{1, 2, 3}) == 0);
    const double half = std::sqrt(3.0 * 100 * 100) / kMaxColorDistance;
    CHECK(double(match_cost(0, 0, black, Rgb{100, 100, 100})) / kScoreUnit == doctest::Approx(half).epsilon(1e-4));
}

TEST_CASE("tie order prefers small displacement then lexicographic offset") {
    CHECK(better_match({3, 3, 1}, {0, 0, 2}));
    CHECK(better_match({0, 1, 5}, {2, 0, 5}));
    CHECK(better_match({-1, 0, 5}, {0, -1, 5}));
    CHECK(better_match({0, -1, 5}, {0, 1, 5}));
    CHECK_FALSE(better_match({0, 0, 5}, {0, 0, 5}));
}

TEST_CASE("local_classify takes the label of the colour-nearest matched pixel") {
    std::mt19937 rng(10);
    const Frame prev = testing::random_frame(12, 12, rng);
    const Window win{2, 2, 6, 6, 6};
    SUBCASE("uniform foreground source") {
        const Mask fg = testing::rect_mask(12, 12, 0, 0, 12, 12);
        const Frame cur = testing::random_frame(12, 12, rng);
        for (int y = 2; y < 8; ++y)
            for (int x = 2; x < 8; ++x) CHECK(local_classify(x, y, win, WindowMatch{1, 2, 0}, cur, prev, fg) == 1);
    }
    SUBCASE("unique exact colour") {
        Frame p(12, 12, Rgb{10, 10, 10});
        Mask pm(12, 12);
        p.at(6, 5) = Rgb{200, 100, 50};
        pm.at(6, 5) = 1;
        Frame cur(12, 12, Rgb{0, 0, 0});
        cur.at(3, 3) = Rgb{200, 100, 50};
        CHECK(local_classify(3, 3, win, WindowMatch{1, 1, 0}, cur, p, pm) == 1);
        CHECK(local_classify(4, 4, win, WindowMatch{1, 1, 0}, cur, p, pm) == 0);
    }
}

TEST_CASE("two-against-two window votes fall back to the coarse label") {
    // Previous frame: uniform colour, top half foreground.
    const int w = 40, h = 40;
    const Frame prev(w, h, Rgb{80, 80, 80});
    const Mask prev_mask = testing::rect_mask(w, h, 0, 0, w, 20);
    const Frame cur(w, h, Rgb{80, 80, 80});
    const int px = 20, py = 30;
    // Four windows covering (px, py); two matched into the foreground half, two into the background half.
    const std::vector<Window> windows = {{18, 28, 4, 4, 4}, {19, 29, 4, 4, 4}, {17, 27, 5, 5, 5}, {16, 26, 6, 6, 6}};
    const std::vector<WindowMatch> matches = {{0, -25, 0}, {1, -26, 0}, {0, 0, 0}, {2, 1, 0}};
    std::vector<std::uint8_t> uncertain(std::size_t(w) * h, 0);
    uncertain[std::size_t(py) * w + px] = 1;
    for (Mask coarse : {Mask(w, h, 0), Mask(w, h, 1)}) {
        const WindowMatchInput in{&cur, &coarse, &prev, &prev_mask, 0, 0};
        const auto votes = kernels::reference::window_votes(in, windows, matches, uncertain);
        const std::size_t p = std::size_t(py) * w + px;
        CHECK(votes.ones[p] == 2);
        CHECK(votes.zeros[p] == 2);
        CHECK(resolve_votes(votes, coarse)[p] == coarse[p]);
    }
}

TEST_CASE("resolve_votes takes the majority") {
    const kernels::Votes v{{3, 0, 1, 0}, {1, 2, 1, 0}};
    const Mask coarse(4, 1, {0, 1, 0, 1});
    CHECK(resolve_votes(v, coarse) == std::vector<std::uint8_t>{1, 0, 0, 1});
}

TEST_CASE("fuse_masks selects per pixel") {
    const Mask coarse(4, 1, {1, 0, 1, 0});
    const std::vector<std::uint8_t> local = {0, 1, 1, 0};
    CHECK(fuse_masks(coarse, local, std::vector<std::uint8_t>(4, 0)) == coarse);
    CHECK(fuse_masks(coarse, local, std::vector<std::uint8_t>(4, 1)) == Mask(4, 1, local));
    CHECK(fuse_masks(coarse, local, std::vector<std::uint8_t>{1, 1, 0, 0}) == Mask(4, 1, {0, 1, 1, 0}));
    CHECK_THROWS_AS(fuse_masks(coarse, local, std::vector<std::uint8_t>(3)), std::invalid_argument);
}

TEST_CASE("merge_bidirectional examples") {
    const Mask one(1, 1, 1), zero(1, 1, 0);
    CHECK(merge_bidirectional(one, zero, 0, 10, 5)[0] == 1);   // exactly 0.5
    CHECK(merge_bidirectional(zero, one, 0, 10, 2)[0] == 0);   // 0.2
    CHECK(merge_bidirectional(zero, one, 0, 10, 8)[0] == 1);   // 0.8
    CHECK(merge_bidirectional(one, one, 3, 9, 4)[0] == 1);
    CHECK(merge_bidirectional(zero, zero, 3, 9, 4)[0] == 0);
    CHECK(merge_bidirectional(one, zero, 0, 10, 5).frame_index() == 5);
    CHECK_THROWS_AS(merge_bidirectional(one, zero, 4, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(merge_bidirectional(one, zero, 5, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(merge_bidirectional(one, zero, 0, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(merge_bidirectional(one, Mask(2, 1), 0, 4, 2), std::invalid_argument);
}

TEST_CASE("merge_bidirectional matches the weighted threshold for all small spans") {
    const Mask left(4, 1, {0, 0, 1, 1}), right(4, 1, {0, 1, 0, 1});
    for (int l = 1; l <= 8; ++l)
        for (int r = l + 1; r <= l + 6; ++r)
            for (int t = l + 1; t < r; ++t) {
                const Mask m = merge_bidirectional(left, right, l, r, t);
                for (std::size_t i = 0; i < 4; ++i) {
                    // Integer form of ((r - t) L + (t - l) R) / (r - l) >= 1/2.
                    const int num = (r - t) * left[i] + (t - l) * right[i];
                    CHECK(m[i] == (2 * num >= (r - l) ? 1 : 0));
                }
            }
}

TEST_CASE("fill_holes") {
    SUBCASE("ring interior is filled") {
        Mask ring = testing::rect_mask(7, 7, 1, 1, 5, 5);
        ring.at(3, 3) = 0;
        ring.at(2, 3) = 0;
        CHECK(fill_holes(ring) == testing::rect_mask(7, 7, 1, 1, 5, 5));
    }
    SUBCASE("background touching the border is kept") {
        Mask c = testing::rect_mask(7, 7, 1, 1, 5, 5);
        c.at(3, 3) = 0;
        c.at(3, 2) = 0;
        c.at(3, 1) = 0;  // channel to the border row 0
        CHECK(fill_holes(c) == c);
    }
    SUBCASE("diagonal contact does not connect") {
        Mask c = testing::rect_mask(5, 5, 0, 0, 3, 3);
        c.at(1, 1) = 0;
        CHECK(fill_holes(c).at(1, 1) == 1);
    }
    SUBCASE("empty and full masks") {
        CHECK(fill_holes(Mask(5, 4, 0)) == Mask(5, 4, 0));
        CHECK(fill_holes(Mask(5, 4, 1)) == Mask(5, 4, 1));
    }
    SUBCASE("idempotent and only adds foreground") {
        std::mt19937 rng(13);
        for (int trial = 0; trial < 50; ++trial) {
            const Mask m = testing::random_mask(20, 15, rng, 0.6);
            const Mask once = fill_holes(m);
            CHECK(fill_holes(once) == once);
            for (std::size_t i = 0; i < m.size(); ++i)
                if (m[i]) CHECK(once[i] == 1);
        }
    }
}

TEST_CASE("refine_frame leaves a static frame unchanged") {
    std::mt19937 rng(14);
    const Frame f = testing::textured_background(60, 40, 3);
    const Mask m = testing::rect_mask(60, 40, 10, 8, 20, 15, 4);
    const RefineResult r = refine_frame(f, m, f, m, RefineParams{});
    CHECK(r.field.uncertain_count() == 0);
    CHECK(r.windows.empty());
    CHECK(r.mask == m);
    CHECK(r.mask.frame_index() == 4);
}

TEST_CASE("refine_frame corrects a stale coarse mask on a translation") {
    const auto s = testing::translating_square(96, 72, 2, 20, 30, 20, 3, 2);
    const Mask stale = s.truth[0];  // coarse mask assumed to have not moved
    RefineParams params;
    params.window_sizes = {16, 24};
    const RefineResult r = refine_frame(s.frames[0], s.truth[0], s.frames[1], stale, params);
    CHECK(r.mask == s.truth[1]);
}
