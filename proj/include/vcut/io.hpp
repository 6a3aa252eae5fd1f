#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vcut/core.hpp"

namespace vcut {

/// Loads numbered frames from `directory`. `pattern` is printf-like with one zero-padded
/// integer field, e.g. "%05d.png"; an extension of ".*" accepts png, jpg, jpeg and bmp.
/// Frames are ordered by their number; frame index t maps to the t-th smallest number.
VideoSequence load_sequence(const std::filesystem::path& directory, const std::string& pattern = "%05d.*");

/// Reads an 8-bit mask. Single-channel pixels >= 128 are foreground; for colour
/// files (e.g. palette PNGs) the largest channel is thresholded instead.
Mask load_mask(const std::filesystem::path& path, int frame_index = 0);
Mask load_mask(const std::filesystem::path& path, int frame_index, int width, int height);

/// Writes an 8-bit single-channel PNG with 1 -> 255, 0 -> 0.
void save_mask(const Mask& mask, const std::filesystem::path& path);

Frame load_frame(const std::filesystem::path& path);
void save_frame(const Frame& frame, const std::filesystem::path& path);

/// PNG codecs for in-memory payloads (HTTP bodies).
std::string encode_mask_png(const Mask& mask);
Mask decode_mask_png(const std::string& bytes, int frame_index = 0);
std::string encode_frame_png(const Frame& frame);
Frame decode_frame_png(const std::string& bytes);

/// 8-bit grayscale dump of values in [0,1] (value * 255, rounded).
void save_unit_map(std::span<const double> values, int width, int height, const std::filesystem::path& path);
/// 16-bit id map dump.
void save_id_map(std::span<const int> ids, int width, int height, const std::filesystem::path& path);

/// Blends the mask over the frame in red.
Frame overlay(const Frame& frame, const Mask& mask, double opacity = 0.5);

/// File name for number n under a "%0Nd.ext" pattern.
std::string numbered_name(const std::string& pattern, int n);

struct SequenceLayout {
    std::filesystem::path root;
    std::filesystem::path frames_dir() const { return root / "frames"; }
    std::filesystem::path masks_dir() const { return root / "masks"; }
};

/// Loads whatever ground-truth masks exist under `<seq>/masks` for the given sequence;
/// entries are keyed by 1-based frame index.
AnnotationSet load_ground_truth(const SequenceLayout& layout, const VideoSequence& seq);

}  // namespace vcut
