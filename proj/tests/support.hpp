#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vcut/core.hpp"
#include "vcut/io.hpp"

namespace vcut::testing {

inline Frame uniform_frame(int w, int h, Rgb c) { return Frame(w, h, c); }

inline Frame random_frame(int w, int h, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(0, 255);
    Frame f(w, h);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = Rgb{std::uint8_t(d(rng)), std::uint8_t(d(rng)), std::uint8_t(d(rng))};
    return f;
}

inline Mask random_mask(int w, int h, std::mt19937& rng, double p = 0.5) {
    std::bernoulli_distribution d(p);
    Mask m(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = d(rng) ? 1 : 0;
    return m;
}

inline Mask rect_mask(int w, int h, int x0, int y0, int rw, int rh, int frame_index = 0) {
    Mask m(w, h, 0, frame_index);
    for (int y = std::max(0, y0); y < std::min(h, y0 + rh); ++y)
        for (int x = std::max(0, x0); x < std::min(w, x0 + rw); ++x) m.at(x, y) = 1;
    return m;
}

/// Textured background with low-amplitude noise so superpixels and windows are not degenerate.
inline Frame textured_background(int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> n(-6, 6);
    Frame f(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int base_r = 40 + (x * 60) / std::max(1, w);
            const int base_g = 90 + (y * 50) / std::max(1, h);
            f.at(x, y) = Rgb{std::uint8_t(std::clamp(base_r + n(rng), 0, 255)), std::uint8_t(std::clamp(base_g + n(rng), 0, 255)),
                             std::uint8_t(std::clamp(160 + n(rng), 0, 255))};
        }
    return f;
}

struct Synthetic {
    std::vector<Frame> frames;
    std::vector<Mask> truth;
};

/// A size x size square of a distinct colour moving (vx, vy) px/frame over a fixed background.
inline Synthetic translating_square(int w, int h, int n, int size, int x0, int y0, int vx, int vy,
                                    Rgb color = {220, 60, 40}, unsigned seed = 7) {
    Synthetic s;
    const Frame bg = textured_background(w, h, seed);
    for (int t = 0; t < n; ++t) {
        Frame f = bg;
        Mask m = rect_mask(w, h, x0 + vx * t, y0 + vy * t, size, size, t + 1);
        for (std::size_t i = 0; i < f.size(); ++i)
            if (m[i]) f[i] = color;
        s.frames.push_back(std::move(f));
        s.truth.push_back(std::move(m));
    }
    return s;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("vcut_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

/// Writes `<root>/frames/%05d.png` (0-based) and, for every truth mask, `<root>/masks/%05d.png`.
inline void write_layout(const std::filesystem::path& root, const Synthetic& s, bool with_truth = true) {
    const SequenceLayout layout{root};
    std::filesystem::create_directories(layout.frames_dir());
    for (std::size_t i = 0; i < s.frames.size(); ++i)
        save_frame(s.frames[i], layout.frames_dir() / numbered_name("%05d.png", int(i)));
    if (!with_truth) return;
    std::filesystem::create_directories(layout.masks_dir());
    for (std::size_t i = 0; i < s.truth.size(); ++i)
        save_mask(s.truth[i], layout.masks_dir() / numbered_name("%05d.png", int(i)));
}

}  // namespace vcut::testing
