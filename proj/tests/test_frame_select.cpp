#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>

#include "support.hpp"
#include "vcut/frame_select.hpp"

using namespace vcut;

namespace {

// Map of vertical stripes with the given colours, one superpixel per stripe.
SuperpixelMap stripes(const std::vector<Rgb>& colors, int stripe_w, int h, int shift = 0) {
    const int n = int(colors.size()), w = n * stripe_w;
    Frame f(w, h);
    std::vector<int> ids(std::size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int id = ((x + shift) % w + w) % w / stripe_w;
            ids[std::size_t(y) * w + x] = id;
            f.at(x, y) = colors[std::size_t(id)];
        }
    return SuperpixelMap(w, h, ids, f);
}

std::vector<int> brute_matches(const SuperpixelMap& from, const SuperpixelMap& to, double radius) {
    std::vector<int> out;
    for (int i = 0; i < from.count(); ++i) {
        std::tuple<double, double, int> best{std::numeric_limits<double>::infinity(), 0, -1}, any = best;
        for (int j = 0; j < to.count(); ++j) {
            const double c = from.stats(i).color_distance(to.stats(j));
            const double d = std::hypot(to.stats(j).centroid.x - from.stats(i).centroid.x,
                                        to.stats(j).centroid.y - from.stats(i).centroid.y);
            const std::tuple<double, double, int> key{c, d, j};
            any = std::min(any, key);
            if (d <= radius) best = std::min(best, key);
        }
        out.push_back(std::get<2>(std::get<2>(best) >= 0 ? best : any));
    }
    return out;
}

ErrorMatrix random_matrix(int n, std::mt19937& rng, bool integral) {
    ErrorMatrix e(n);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int s = 1; s <= n; ++s)
        for (int t = 1; t <= n; ++t)
            if (s != t) e(s, t) = integral ? double(rng() % 4) : u(rng);
    return e;
}

// Lexicographically smallest subset whose objective is within the tie tolerance of the minimum.
std::vector<int> exhaustive(const ErrorMatrix& e, int k) {
    const int n = e.size();
    std::vector<std::vector<int>> all;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int from) -> void {
        if (int(cur.size()) == k) {
            all.push_back(cur);
            return;
        }
        for (int t = from; t <= n; ++t) {
            cur.push_back(t);
            self(self, t + 1);
            cur.pop_back();
        }
    };
    rec(rec, 1);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : all) best = std::min(best, selection_objective(e, s));
    for (const auto& s : all)
        if (selection_objective(e, s) <= best + kObjectiveTieTolerance * std::abs(best)) return s;
    return {};
}

}  // namespace

TEST_CASE("identical frames match their own twins") {
    const SuperpixelMap a = stripes({{10, 10, 10}, {90, 20, 20}, {20, 90, 20}, {20, 20, 90}}, 5, 6);
    const auto f = match_superpixels(a, a, 100.0);
    for (int i = 0; i < a.count(); ++i) {
        CHECK(f.forward[std::size_t(i)] == i);
        CHECK(f.backward[std::size_t(i)] == i);
        CHECK(f.forward_flow[std::size_t(i)].x == doctest::Approx(-f.backward_flow[std::size_t(i)].x));
        CHECK(f.forward_flow[std::size_t(i)].y == doctest::Approx(-f.backward_flow[std::size_t(i)].y));
    }
}

TEST_CASE("a unique colour matches its translated twin") {
    const std::vector<Rgb> gray(6, Rgb{120, 120, 120});
    std::vector<Rgb> colors = gray;
    colors[2] = Rgb{230, 10, 10};
    const SuperpixelMap before = stripes(colors, 4, 4);
    std::vector<Rgb> moved = gray;
    moved[3] = Rgb{230, 10, 10};
    const SuperpixelMap after = stripes(moved, 4, 4);
    const auto f = match_superpixels(before, after, 100.0);
    CHECK(f.forward[2] == 3);
    CHECK(f.backward[3] == 2);
    CHECK(f.forward_flow[2].x == doctest::Approx(4.0));
}

TEST_CASE("best_matches equals a brute-force search") {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Frame a = testing::random_frame(30, 20, rng), b = testing::random_frame(30, 20, rng);
        const SuperpixelMap ma = slic_segment(a, SlicParams{12}), mb = slic_segment(b, SlicParams{15});
        for (double radius : {0.5, 6.0, 12.0, 100.0}) {
            CHECK(best_matches(ma, mb, radius) == brute_matches(ma, mb, radius));
            CHECK(best_matches(mb, ma, radius) == brute_matches(mb, ma, radius));
        }
    }
}

TEST_CASE("hop mislabel probability examples") {
    CHECK(hop_mislabel_prob(0.0, {3, 1}, {-3, -1}) == doctest::Approx(0.0));
    CHECK(hop_mislabel_prob(0.0, {3, 1}, {3, 1}) == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(hop_mislabel_prob(0.0, {0, 0}, {0, 0}) == 0.0);
    CHECK(occlusion_distance({0, 0}, {0, 0}) == 0.0);
    CHECK(occlusion_distance({2, 0}, {0, 2}) == doctest::Approx(std::sqrt(8.0) / 4.0));
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-5, 5), a(0, 1);
    for (int i = 0; i < 200; ++i) {
        const double q = hop_mislabel_prob(a(rng), {u(rng), u(rng)}, {u(rng), u(rng)});
        CHECK(q >= 0.0);
        CHECK(q < 1.0);
    }
}

TEST_CASE("accumulated error recursion") {
    const double one[] = {0.3}, two[] = {0.5, 0.5};
    CHECK(accumulate_error(one) == doctest::Approx(0.3));
    CHECK(accumulate_error(two) == doctest::Approx(0.75));
    CHECK(accumulate_error(std::span<const double>{}) == 0.0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> q(1 + rng() % 20);
        double keep = 1.0;
        for (double& v : q) keep *= 1.0 - (v = u(rng));
        CHECK(std::abs(accumulate_error(q) - (1.0 - keep)) <= 1e-12);
        for (std::size_t n = 1; n < q.size(); ++n)
            CHECK(accumulate_error(std::span(q).first(n)) <= accumulate_error(std::span(q).first(n + 1)));
    }
}

TEST_CASE("frame descriptors") {
    std::mt19937 rng(4);
    const Frame f = testing::random_frame(17, 11, rng);
    const FrameDescriptor d = frame_descriptor(f, 3, 8);
    CHECK(d.levels.size() == 4);
    for (const auto& level : d.levels) {
        double sum = 0.0;
        for (const auto& [key, w] : level) sum += w;
        CHECK(sum == doctest::Approx(1.0));
    }
    CHECK(adjustment_coefficient(d, frame_descriptor(f, 3, 8)) == 0.0);

    const FrameDescriptor u = frame_descriptor(Frame(8, 8, Rgb{10, 20, 30}), 2, 32);
    for (int l = 0; l <= 2; ++l) {
        const std::size_t cells = std::size_t(1) << (2 * l);
        REQUIRE(u.levels[std::size_t(l)].size() == cells);
        const std::uint32_t bin = u.levels[std::size_t(l)][0].first % (32 * 32 * 32);
        for (const auto& [key, w] : u.levels[std::size_t(l)]) {
            CHECK(key % (32 * 32 * 32) == bin);
            CHECK(w == doctest::Approx(1.0 / double(cells)));
        }
    }
    CHECK_THROWS_AS(frame_descriptor(f, -1, 8), std::invalid_argument);
}

TEST_CASE("adjustment coefficient is symmetric and 2 for disjoint uniform frames") {
    const Frame a(6, 4, Rgb{0, 0, 0}), b(6, 4, Rgb{255, 255, 255});
    CHECK(adjustment_coefficient(frame_descriptor(a, 0, 32), frame_descriptor(b, 0, 32)) == doctest::Approx(2.0));
    std::mt19937 rng(5);
    const auto x = frame_descriptor(testing::random_frame(9, 9, rng), 2, 16);
    const auto y = frame_descriptor(testing::random_frame(9, 9, rng), 2, 16);
    CHECK(adjustment_coefficient(x, y) == doctest::Approx(adjustment_coefficient(y, x)));
    CHECK_THROWS_AS(adjustment_coefficient(x, frame_descriptor(Frame(2, 2), 1, 16)), std::invalid_argument);
}

TEST_CASE("constant video has zero predicted error") {
    const Frame f = testing::textured_background(40, 30, 2);
    const std::vector<Frame> frames(5, f);
    const SuperpixelMap m = slic_segment(f, SlicParams{12});
    const std::vector<SuperpixelMap> maps(5, m);
    const ErrorMatrix e = propagation_error_matrix(frames, maps, RunConfig{});
    CHECK(e.size() == 5);
    for (double v : e.raw().values) CHECK(v == 0.0);
}

TEST_CASE("two-frame error equals pixels times hop probability times alpha") {
    // Left 2x2 block changes colour, right block is unchanged.
    const int w = 4, h = 2;
    Frame f1(w, h), f2(w, h);
    const std::vector<int> ids = {0, 0, 1, 1, 0, 0, 1, 1};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            f1.at(x, y) = x < 2 ? Rgb{10, 10, 10} : Rgb{200, 200, 200};
            f2.at(x, y) = x < 2 ? Rgb{10, 10, 40} : Rgb{200, 200, 200};
        }
    const std::vector<Frame> frames = {f1, f2};
    const std::vector<SuperpixelMap> maps = {SuperpixelMap(w, h, ids, f1), SuperpixelMap(w, h, ids, f2)};
    RunConfig config;
    config.pyramid_levels = 0;
    const ErrorMatrix e = propagation_error_matrix(frames, maps, config);
    // Global 32-bin histograms: half the mass moves between bins, so alpha = 1.
    const double q = 1.0 - std::exp(-30.0 / kMaxColorDistance);
    CHECK(e(1, 2) == doctest::Approx(4.0 * q * 1.0));
    CHECK(e(2, 1) == doctest::Approx(4.0 * q * 1.0));
    CHECK(e(1, 1) == 0.0);
    CHECK(e(2, 2) == 0.0);
}

TEST_CASE("accumulated sums grow with distance from the target") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> q(0.0, 0.4);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + int(rng() % 10);
        std::vector<HopTable> hops(static_cast<std::size_t>(n));
        const int count = 4;
        for (int t = 0; t < n; ++t)
            for (int i = 0; i < count; ++i) {
                HopEntry e;
                e.area = 5;
                if (t > 0) e.back_match = int(rng() % count), e.q_back = q(rng);
                if (t + 1 < n) e.fwd_match = int(rng() % count), e.q_fwd = q(rng);
                hops[std::size_t(t)].push_back(e);
            }
        const SquareMatrix s = kernels::propagation_error_sums(hops);
        for (int t = 0; t < n; ++t) {
            for (int src = t - 1; src > 0; --src) CHECK(s(src - 1, t) >= s(src, t));
            for (int src = t + 1; src + 1 < n; ++src) CHECK(s(src + 1, t) >= s(src, t));
        }
    }
}

TEST_CASE("selection objective costs boundary frames with one direction") {
    ErrorMatrix e(5);
    for (int s = 1; s <= 5; ++s)
        for (int t = 1; t <= 5; ++t)
            if (s != t) e(s, t) = 10.0 * s + t;
    const int sel[] = {2, 5};
    // t=1 from 2; t=3,4 between 2 and 5.
    const double expect = e(2, 1) + (2 * e(2, 3) + 1 * e(5, 3)) / 3.0 + (1 * e(2, 4) + 2 * e(5, 4)) / 3.0;
    CHECK(selection_objective(e, sel) == doctest::Approx(expect));
    const int bad[] = {3, 2};
    CHECK_THROWS_AS(selection_objective(e, bad), std::invalid_argument);
}

TEST_CASE("select_frames equals exhaustive enumeration") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + int(rng() % 8);
        const ErrorMatrix e = random_matrix(n, rng, trial % 3 == 0);
        for (int k = 1; k <= std::min(3, n); ++k) {
            CAPTURE(n);
            CAPTURE(k);
            const FrameSelection s = select_frames(e, k);
            CHECK(s.frames == exhaustive(e, k));
            CHECK(s.objective == doctest::Approx(selection_objective(e, s.frames)));
        }
    }
}

TEST_CASE("select_frames edge cases") {
    std::mt19937 rng(8);
    const ErrorMatrix e = random_matrix(6, rng, false);
    SUBCASE("K = N") {
        const FrameSelection s = select_frames(e, 6);
        CHECK(s.frames == std::vector<int>{1, 2, 3, 4, 5, 6});
        CHECK(s.objective == 0.0);
    }
    SUBCASE("zero matrix picks the first K") { CHECK(select_frames(ErrorMatrix(7), 3).frames == std::vector<int>{1, 2, 3}); }
    SUBCASE("scaling invariance") {
        ErrorMatrix scaled = e;
        for (int a = 1; a <= 6; ++a)
            for (int b = 1; b <= 6; ++b) scaled(a, b) *= 37.5;
        for (int k = 1; k <= 4; ++k) CHECK(select_frames(scaled, k).frames == select_frames(e, k).frames);
    }
    SUBCASE("bad K") {
        CHECK_THROWS_AS(select_frames(e, 7), std::invalid_argument);
        CHECK_THROWS_AS(select_frames(e, 0), std::invalid_argument);
    }
}

TEST_CASE("select_frames handles long sequences quickly") {
    std::mt19937 rng(9);
    const ErrorMatrix e = random_matrix(300, rng, false);
    const auto start = std::chrono::steady_clock::now();
    const FrameSelection s = select_frames(e, 8);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(s.frames.size() == 8);
    CHECK(std::is_sorted(s.frames.begin(), s.frames.end()));
    CHECK(seconds < 2.0);
}
