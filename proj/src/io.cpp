#include "vcut/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace fs = std::filesystem;

namespace vcut {
namespace {

struct NumberPattern {
    int digits = 0;  // 0 = any width
    std::string extension;  // ".*" = any image extension

    bool matches(const fs::path& p, int& number) const {
        const std::string stem = p.stem().string();
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); }))
            return false;
        if (digits > 0 && int(stem.size()) != digits) return false;
        std::string ext = p.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (extension == ".*") {
            if (ext != ".png" && ext != ".jpg" && ext != ".jpeg" && ext != ".bmp") return false;
        } else if (ext != extension) {
            return false;
        }
        number = std::stoi(stem);
        return true;
    }
};

NumberPattern parse_pattern(const std::string& pattern) {
    // %d, %5d or %05d followed by an extension.
    NumberPattern out;
    if (pattern.empty() || pattern[0] != '%') throw std::invalid_argument("pattern must start with '%': " + pattern);
    std::size_t i = 1;
    while (i < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[i]))) ++i;
    if (i >= pattern.size() || pattern[i] != 'd') throw std::invalid_argument("pattern needs a %0Nd field: " + pattern);
    const std::string width = pattern.substr(1, i - 1);
    out.digits = width.empty() ? 0 : std::stoi(width);
    out.extension = pattern.substr(i + 1);
    std::transform(out.extension.begin(), out.extension.end(), out.extension.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (out.extension.empty() || out.extension[0] != '.')
        throw std::invalid_argument("pattern needs an extension: " + pattern);
    return out;
}

Frame frame_from_bgr(const cv::Mat& bgr) {
    Frame f(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) f.at(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};
    }
    return f;
}

cv::Mat bgr_from_frame(const Frame& f) {
    cv::Mat out(f.height(), f.width(), CV_8UC3);
    for (int y = 0; y < f.height(); ++y) {
        auto* row = out.ptr<cv::Vec3b>(y);
        for (int x = 0; x < f.width(); ++x) {
            const Rgb c = f.at(x, y);
            row[x] = cv::Vec3b(c.b, c.g, c.r);
        }
    }
    return out;
}

Mask mask_from_mat(const cv::Mat& img, int frame_index) {
    cv::Mat m8;
    if (img.depth() == CV_16U)
        img.convertTo(m8, CV_8U, 1.0 / 257.0);
    else
        m8 = img;
    Mask mask(m8.cols, m8.rows, 0, frame_index);
    const int ch = m8.channels();
    for (int y = 0; y < m8.rows; ++y) {
        const std::uint8_t* row = m8.ptr<std::uint8_t>(y);
        for (int x = 0; x < m8.cols; ++x) {
            int v = 0;
            const int colour_channels = ch == 4 ? 3 : ch;
            for (int c = 0; c < colour_channels; ++c) v = std::max<int>(v, row[x * ch + c]);
            mask.at(x, y) = v >= 128 ? 1 : 0;
        }
    }
    return mask;
}

cv::Mat mat_from_mask(const Mask& mask) {
    cv::Mat out(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = out.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) row[x] = mask.at(x, y) ? 255 : 0;
    }
    return out;
}

void write_png(const cv::Mat& img, const fs::path& path) {
    bool ok = false;
    try {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        ok = cv::imwrite(path.string(), img);
    } catch (const std::exception&) {
        ok = false;
    }
    if (!ok) throw DataError("cannot write " + path.string());
}

std::string encode_png(const cv::Mat& img) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", img, buf)) throw DataError("PNG encoding failed");
    return std::string(buf.begin(), buf.end());
}

}  // namespace

std::string numbered_name(const std::string& pattern, int n) {
    const NumberPattern p = parse_pattern(pattern);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*d", p.digits, n);
    return std::string(buf) + (p.extension == ".*" ? ".png" : p.extension);
}

VideoSequence load_sequence(const fs::path& directory, const std::string& pattern) {
    const NumberPattern pat = parse_pattern(pattern);
    if (!fs::is_directory(directory)) throw DataError("missing directory: " + directory.string());

    std::vector<std::pair<int, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(directory)) {
        int number = 0;
        if (entry.is_regular_file() && pat.matches(entry.path(), number)) files.emplace_back(number, entry.path());
    }
    if (files.empty()) throw DataError("no frames matching " + pattern + " in " + directory.string());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 1; i < files.size(); ++i)
        if (files[i].first == files[i - 1].first)
            throw DataError("duplicate frame number " + std::to_string(files[i].first) + " in " + directory.string());

    std::vector<Frame> frames;
    std::vector<int> numbers;
    frames.reserve(files.size());
    for (const auto& [number, path] : files) {
        Frame f = load_frame(path);
        if (!frames.empty() && (f.width() != frames.front().width() || f.height() != frames.front().height())) {
            throw DataError("mixed dimensions: " + path.filename().string() + " is " + std::to_string(f.width()) +
                            "x" + std::to_string(f.height()) + ", expected " +
                            std::to_string(frames.front().width()) + "x" + std::to_string(frames.front().height()));
        }
        frames.push_back(std::move(f));
        numbers.push_back(number);
    }
    return VideoSequence(std::move(frames), std::move(numbers));
}

Frame load_frame(const fs::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (img.empty()) throw DataError("cannot decode " + path.string());
    return frame_from_bgr(img);
}

void save_frame(const Frame& frame, const fs::path& path) { write_png(bgr_from_frame(frame), path); }

Mask load_mask(const fs::path& path, int frame_index) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (img.empty()) throw DataError("cannot read mask " + path.string());
    return mask_from_mat(img, frame_index);
}

Frame decode_frame_png(const std::string& bytes) {
    std::vector<std::uint8_t> buf(bytes.begin(), bytes.end());
    cv::Mat img;
    if (!buf.empty()) img = cv::imdecode(buf, cv::IMREAD_COLOR);
    if (img.empty()) throw DataError("malformed image");
    return frame_from_bgr(img);
}

Mask load_mask(const fs::path& path, int frame_index, int width, int height) {
    Mask m = load_mask(path, frame_index);
    if (m.width() != width || m.height() != height)
        throw DataError("mask " + path.filename().string() + " is " + std::to_string(m.width()) + "x" +
                        std::to_string(m.height()) + ", expected " + std::to_string(width) + "x" +
                        std::to_string(height));
    return m;
}

void save_mask(const Mask& mask, const fs::path& path) { write_png(mat_from_mask(mask), path); }

std::string encode_mask_png(const Mask& mask) { return encode_png(mat_from_mask(mask)); }

std::string encode_frame_png(const Frame& frame) { return encode_png(bgr_from_frame(frame)); }

Mask decode_mask_png(const std::string& bytes, int frame_index) {
    std::vector<std::uint8_t> buf(bytes.begin(), bytes.end());
    cv::Mat img;
    if (!buf.empty()) img = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    if (img.empty()) throw DataError("malformed mask image");
    return mask_from_mat(img, frame_index);
}

void save_unit_map(std::span<const double> values, int width, int height, const fs::path& path) {
    cv::Mat out(height, width, CV_8UC1);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double v = std::clamp(values[std::size_t(y) * width + x], 0.0, 1.0);
            out.at<std::uint8_t>(y, x) = std::uint8_t(std::lround(v * 255.0));
        }
    write_png(out, path);
}

void save_id_map(std::span<const int> ids, int width, int height, const fs::path& path) {
    cv::Mat out(height, width, CV_16UC1);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out.at<std::uint16_t>(y, x) = std::uint16_t(std::clamp(ids[std::size_t(y) * width + x], 0, 65535));
    write_png(out, path);
}

Frame overlay(const Frame& frame, const Mask& mask, double opacity) {
    Frame out = frame;
    const double a = std::clamp(opacity, 0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!mask[i]) continue;
        Rgb& c = out[i];
        c.r = std::uint8_t(std::lround(c.r * (1 - a) + 255 * a));
        c.g = std::uint8_t(std::lround(c.g * (1 - a)));
        c.b = std::uint8_t(std::lround(c.b * (1 - a)));
    }
    return out;
}

AnnotationSet load_ground_truth(const SequenceLayout& layout, const VideoSequence& seq) {
    AnnotationSet truth;
    const fs::path dir = layout.masks_dir();
    if (!fs::is_directory(dir)) return truth;
    const NumberPattern pat = parse_pattern("%d.png");
    for (const auto& entry : fs::directory_iterator(dir)) {
        int number = 0;
        if (!entry.is_regular_file() || !pat.matches(entry.path(), number)) continue;
        const int t = seq.index_of_file_number(number);
        if (t == 0) continue;
        truth.set(t, load_mask(entry.path(), t, seq.width(), seq.height()));
    }
    return truth;
}

}  // namespace vcut
