// Serial reference vs OpenMP kernels, plus end-to-end stages.
// Arguments: the OpenMP team size for the omp variants (reference variants ignore it).

#include <benchmark/benchmark.h>
#include <omp.h>

#include "support.hpp"
#include "vcut/kernels.hpp"
#include "vcut/local_refine.hpp"
#include "vcut/pipeline.hpp"

using namespace vcut;

namespace {

constexpr int kW = 320, kH = 240;

struct WindowCase {
    Frame previous, current;
    Mask previous_mask, coarse, uncertain;
    std::vector<Window> windows;
    WindowMatchInput input;
};

// Square translated by a few pixels at half resolution; every grid window of every scale is enabled.
const WindowCase& window_case() {
    static const WindowCase c = [] {
        constexpr int w2 = kW / 2, h2 = kH / 2;
        WindowCase w;
        const auto s = testing::translating_square(w2, h2, 2, 30, 50, 40, 3, 2);
        w.previous = s.frames[0];
        w.current = s.frames[1];
        w.previous_mask = s.truth[0];
        w.coarse = s.truth[0];
        std::mt19937 rng(5);
        w.uncertain = testing::random_mask(w2, h2, rng, 0.2);
        for (int size : RunConfig{}.window_sizes) {
            const auto g = window_grid(w2, h2, size);
            w.windows.insert(w.windows.end(), g.begin(), g.end());
        }
        const SearchArea area = search_area(w2, h2, RunConfig{}.search_area_fraction);
        w.input = WindowMatchInput{&w.current, &w.coarse, &w.previous, &w.previous_mask, area.radius_x, area.radius_y};
        return w;
    }();
    return c;
}

void color_difference_ref(benchmark::State& st) {
    std::mt19937 rng(1);
    const Frame a = testing::random_frame(kW, kH, rng), b = testing::random_frame(kW, kH, rng);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::reference::color_difference(a, b));
}

void color_difference_omp(benchmark::State& st) {
    omp_set_num_threads(int(st.range(0)));
    std::mt19937 rng(1);
    const Frame a = testing::random_frame(kW, kH, rng), b = testing::random_frame(kW, kH, rng);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::color_difference(a, b));
}

template <bool Omp>
void slic_sweep(benchmark::State& st) {
    if (Omp) omp_set_num_threads(int(st.range(0)));
    std::mt19937 rng(2);
    const Frame f = testing::random_frame(kW, kH, rng);
    const int step = 12;
    std::vector<SlicCenter> centers;
    for (int y = step / 2; y < kH; y += step)
        for (int x = step / 2; x < kW; x += step) {
            const Rgb c = f.at(x, y);
            centers.push_back(SlicCenter{double(x), double(y), double(c.r), double(c.g), double(c.b)});
        }
    std::vector<int> labels(f.size(), 0);
    for (auto _ : st) {
        if (Omp) kernels::slic_assign(f, centers, double(step), 10.0, step, labels);
        else kernels::reference::slic_assign(f, centers, double(step), 10.0, step, labels);
        benchmark::DoNotOptimize(labels.data());
    }
}

template <bool Omp>
void match_windows(benchmark::State& st) {
    if (Omp) omp_set_num_threads(int(st.range(0)));
    const WindowCase& c = window_case();
    for (auto _ : st)
        benchmark::DoNotOptimize(Omp ? kernels::match_windows(c.input, c.windows)
                                     : kernels::reference::match_windows(c.input, c.windows));
    st.counters["windows"] = double(c.windows.size());
}

template <bool Omp>
void window_votes(benchmark::State& st) {
    if (Omp) omp_set_num_threads(int(st.range(0)));
    const WindowCase& c = window_case();
    const auto matches = kernels::match_windows(c.input, c.windows);
    for (auto _ : st)
        benchmark::DoNotOptimize(Omp ? kernels::window_votes(c.input, c.windows, matches, c.uncertain.labels())
                                     : kernels::reference::window_votes(c.input, c.windows, matches, c.uncertain.labels()));
}

std::vector<HopTable> chain_hops(int frames, int per_frame) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> q(0.0, 0.2);
    std::vector<HopTable> hops(static_cast<std::size_t>(frames), HopTable(static_cast<std::size_t>(per_frame)));
    for (int t = 0; t < frames; ++t)
        for (auto& e : hops[std::size_t(t)]) {
            e.area = 1 + int(rng() % 400);
            if (t > 0) e.back_match = int(rng() % unsigned(per_frame)), e.q_back = q(rng);
            if (t + 1 < frames) e.fwd_match = int(rng() % unsigned(per_frame)), e.q_fwd = q(rng);
        }
    return hops;
}

template <bool Omp>
void error_sums(benchmark::State& st) {
    if (Omp) omp_set_num_threads(int(st.range(0)));
    const auto hops = chain_hops(60, 300);
    for (auto _ : st)
        benchmark::DoNotOptimize(Omp ? kernels::propagation_error_sums(hops) : kernels::reference::propagation_error_sums(hops));
}

// DP selection cost as N grows, K fixed.
void select_frames_n(benchmark::State& st) {
    const int n = int(st.range(0));
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    ErrorMatrix e(n);
    for (int s = 1; s <= n; ++s)
        for (int t = 1; t <= n; ++t)
            if (s != t) e(s, t) = u(rng) * std::abs(s - t);
    for (auto _ : st) benchmark::DoNotOptimize(select_frames(e, 8));
    st.SetComplexityN(n);
}

void propagate_sequence(benchmark::State& st) {
    omp_set_num_threads(int(st.range(0)));
    const auto s = testing::translating_square(kW, kH, 8, 40, 60, 100, 2, 0);
    const VideoSequence seq(s.frames);
    AnnotationSet ann;
    ann.set(1, s.truth[0]);
    PropagateOptions opt;
    opt.forward_only = true;
    for (auto _ : st) benchmark::DoNotOptimize(propagate(seq, ann, RunConfig{}, opt));
}

const int kMaxThreads = std::max(1, omp_get_num_procs());

void thread_args(benchmark::internal::Benchmark* b) {
    for (int t = 1; t <= kMaxThreads; t *= 2) b->Arg(t);
    if ((kMaxThreads & (kMaxThreads - 1)) != 0) b->Arg(kMaxThreads);
}

}  // namespace

BENCHMARK(color_difference_ref)->Unit(benchmark::kMicrosecond);
BENCHMARK(color_difference_omp)->Apply(thread_args)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(slic_sweep<false>)->Name("slic_assign_ref")->Unit(benchmark::kMillisecond);
BENCHMARK(slic_sweep<true>)->Name("slic_assign_omp")->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(match_windows<false>)->Name("match_windows_ref")->Unit(benchmark::kMillisecond);
BENCHMARK(match_windows<true>)->Name("match_windows_omp")->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(window_votes<false>)->Name("window_votes_ref")->Unit(benchmark::kMillisecond);
BENCHMARK(window_votes<true>)->Name("window_votes_omp")->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(error_sums<false>)->Name("error_sums_ref")->Unit(benchmark::kMillisecond);
BENCHMARK(error_sums<true>)->Name("error_sums_omp")->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(select_frames_n)->RangeMultiplier(2)->Range(16, 512)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(propagate_sequence)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(1);

BENCHMARK_MAIN();
