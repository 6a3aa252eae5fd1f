#include "vcut/core.hpp"

#include <algorithm>
#include <numeric>

namespace vcut {

Frame::Frame(int width, int height, Rgb fill)
    : width_(width), height_(height), pixels_(std::size_t(width) * std::size_t(height), fill) {
    if (width < 0 || height < 0) throw std::invalid_argument("Frame: negative dimensions");
}

Frame::Frame(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != std::size_t(width) * std::size_t(height))
        throw std::invalid_argument("Frame: pixel count does not match width x height");
}

Mask::Mask(int width, int height, std::uint8_t fill, int frame_index)
    : width_(width), height_(height), frame_index_(frame_index),
      labels_(std::size_t(width) * std::size_t(height), fill ? 1 : 0) {}

Mask::Mask(int width, int height, std::vector<std::uint8_t> labels, int frame_index)
    : width_(width), height_(height), frame_index_(frame_index), labels_(std::move(labels)) {
    if (labels_.size() != std::size_t(width) * std::size_t(height))
        throw std::invalid_argument("Mask: label count does not match width x height");
    if (std::any_of(labels_.begin(), labels_.end(), [](std::uint8_t v) { return v > 1; }))
        throw std::invalid_argument("Mask: labels must be 0 or 1");
}

std::size_t Mask::count() const { return std::size_t(std::count(labels_.begin(), labels_.end(), 1)); }

VideoSequence::VideoSequence(std::vector<Frame> frames, std::vector<int> file_numbers)
    : frames_(std::move(frames)), file_numbers_(std::move(file_numbers)) {
    if (frames_.empty()) throw DataError("sequence has no frames");
    for (const auto& f : frames_) {
        if (f.width() != frames_.front().width() || f.height() != frames_.front().height())
            throw DataError("sequence has mixed dimensions");
    }
    if (file_numbers_.empty()) {
        file_numbers_.resize(frames_.size());
        std::iota(file_numbers_.begin(), file_numbers_.end(), 0);
    }
    if (file_numbers_.size() != frames_.size()) throw std::invalid_argument("file number count mismatch");
}

const Frame& VideoSequence::frame(int t) const {
    if (!has_index(t)) throw std::out_of_range("frame index " + std::to_string(t) + " outside 1.." +
                                               std::to_string(frame_count()));
    return frames_[std::size_t(t - 1)];
}

int VideoSequence::index_of_file_number(int number) const {
    auto it = std::find(file_numbers_.begin(), file_numbers_.end(), number);
    return it == file_numbers_.end() ? 0 : int(it - file_numbers_.begin()) + 1;
}

void AnnotationSet::set(int t, Mask mask) {
    mask.set_frame_index(t);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                               [](const Annotation& a, int f) { return a.frame < f; });
    if (it != entries_.end() && it->frame == t)
        it->mask = std::move(mask);
    else
        entries_.insert(it, Annotation{t, std::move(mask)});
}

void AnnotationSet::erase(int t) {
    std::erase_if(entries_, [t](const Annotation& a) { return a.frame == t; });
}

bool AnnotationSet::contains(int t) const { return find(t) != nullptr; }

const Mask* AnnotationSet::find(int t) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                               [](const Annotation& a, int f) { return a.frame < f; });
    return (it != entries_.end() && it->frame == t) ? &it->mask : nullptr;
}

std::vector<int> AnnotationSet::frames() const {
    std::vector<int> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.frame);
    return out;
}

void AnnotationSet::validate(int frame_count, int width, int height) const {
    if (entries_.empty()) throw DataError("no annotations given");
    for (const auto& e : entries_) {
        if (e.frame < 1 || e.frame > frame_count)
            throw DataError("annotation frame " + std::to_string(e.frame) + " outside 1.." +
                            std::to_string(frame_count));
        if (e.mask.width() != width || e.mask.height() != height)
            throw DataError("annotation of frame " + std::to_string(e.frame) + " has dimensions " +
                            std::to_string(e.mask.width()) + "x" + std::to_string(e.mask.height()) +
                            ", expected " + std::to_string(width) + "x" + std::to_string(height));
    }
}

}  // namespace vcut
