#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcut {

/// Raised for problems with input data (files, dimensions, annotations).
/// The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline int squared_distance(Rgb a, Rgb b) {
    const int dr = int(a.r) - int(b.r);
    const int dg = int(a.g) - int(b.g);
    const int db = int(a.b) - int(b.b);
    return dr * dr + dg * dg + db * db;
}

inline double color_distance(Rgb a, Rgb b) { return std::sqrt(double(squared_distance(a, b))); }

/// Largest RGB Euclidean distance, used to normalise colour terms to [0,1].
inline const double kMaxColorDistance = 255.0 * std::sqrt(3.0);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Row-major RGB image.
class Frame {
public:
    Frame() = default;
    Frame(int width, int height, Rgb fill = {});
    Frame(int width, int height, std::vector<Rgb> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }

    Rgb at(int x, int y) const { return pixels_[std::size_t(y) * width_ + x]; }
    Rgb& at(int x, int y) { return pixels_[std::size_t(y) * width_ + x]; }
    Rgb operator[](std::size_t i) const { return pixels_[i]; }
    Rgb& operator[](std::size_t i) { return pixels_[i]; }

    std::span<const Rgb> pixels() const { return pixels_; }

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Per-pixel binary labels (1 = foreground) aligned to one frame.
class Mask {
public:
    Mask() = default;
    Mask(int width, int height, std::uint8_t fill = 0, int frame_index = 0);
    Mask(int width, int height, std::vector<std::uint8_t> labels, int frame_index = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return labels_.size(); }
    int frame_index() const { return frame_index_; }
    void set_frame_index(int t) { frame_index_ = t; }

    std::uint8_t at(int x, int y) const { return labels_[std::size_t(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return labels_[std::size_t(y) * width_ + x]; }
    std::uint8_t operator[](std::size_t i) const { return labels_[i]; }
    std::uint8_t& operator[](std::size_t i) { return labels_[i]; }

    std::span<const std::uint8_t> labels() const { return labels_; }
    std::size_t count() const;

    bool same_shape(const Mask& o) const { return width_ == o.width_ && height_ == o.height_; }
    bool same_shape(const Frame& f) const { return width_ == f.width() && height_ == f.height(); }

    /// Label equality; the frame index is metadata and is not compared.
    friend bool operator==(const Mask& a, const Mask& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.labels_ == b.labels_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int frame_index_ = 0;
    std::vector<std::uint8_t> labels_;
};

/// Ordered frames with shared dimensions. Frame indices are 1-based.
class VideoSequence {
public:
    VideoSequence() = default;
    explicit VideoSequence(std::vector<Frame> frames, std::vector<int> file_numbers = {});

    int frame_count() const { return int(frames_.size()); }
    int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
    int height() const { return frames_.empty() ? 0 : frames_.front().height(); }

    /// 1-based access.
    const Frame& frame(int t) const;
    std::span<const Frame> frames() const { return frames_; }

    /// File number the t-th frame was loaded from (t-1 when built in memory).
    int file_number(int t) const { return file_numbers_.at(std::size_t(t - 1)); }
    /// Inverse of file_number; 0 when no frame has that number.
    int index_of_file_number(int number) const;

    bool has_index(int t) const { return t >= 1 && t <= frame_count(); }

private:
    std::vector<Frame> frames_;
    std::vector<int> file_numbers_;
};

struct Annotation {
    int frame = 0;
    Mask mask;
};

/// Human-provided masks, kept sorted by frame index with at most one per frame.
class AnnotationSet {
public:
    /// Inserts or replaces the annotation of frame t.
    void set(int t, Mask mask);
    void erase(int t);
    bool contains(int t) const;
    const Mask* find(int t) const;

    std::span<const Annotation> entries() const { return entries_; }
    std::vector<int> frames() const;
    int size() const { return int(entries_.size()); }
    bool empty() const { return entries_.empty(); }

    /// Throws DataError unless nonempty, all indices in 1..N and masks are width x height.
    void validate(int frame_count, int width, int height) const;

private:
    std::vector<Annotation> entries_;
};

}  // namespace vcut
