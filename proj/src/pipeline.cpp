#include "vcut/pipeline.hpp"

#include <algorithm>
#include <future>
#include <mutex>
#include <omp.h>
#include <stdexcept>

#include "vcut/io.hpp"

namespace vcut {

FrameStep propagate_step(const Frame& previous, const SuperpixelMap& previous_sp, const Mask& previous_mask,
                         const Frame& current, const SuperpixelMap& current_sp, const PyramidModel& model,
                         const RunConfig& config) {
    FrameStep s;
    s.static_conf = static_confidence(model, current_sp);
    const InterframeGraph graph = build_interframe_graph(previous_sp, current_sp);
    const auto labels = superpixel_labels(previous_sp, previous_mask);
    s.dynamic = dynamic_confidence(graph, labels);
    s.confidence = combine_confidence(s.static_conf, s.dynamic.confidence);
    s.coarse = coarse_mask(current_sp, s.confidence);
    s.refined = refine_frame(previous, previous_mask, current, s.coarse,
                             RefineParams{config.window_sizes, config.search_area_fraction});
    return s;
}

std::vector<SuperpixelMap> oversegment(const VideoSequence& sequence, const RunConfig& config) {
    const SlicParams params{config.superpixel_target(sequence.width(), sequence.height()), config.slic_compactness,
                            config.slic_iterations};
    std::vector<SuperpixelMap> maps;
    maps.reserve(std::size_t(sequence.frame_count()));
    for (const Frame& f : sequence.frames()) maps.push_back(slic_segment(f, params));
    return maps;
}

CutoutEngine::CutoutEngine(const VideoSequence& sequence, RunConfig config)
    : sequence_(&sequence), config_(std::move(config)) {
    config_.validate();
    if (sequence.frame_count() < 1) throw DataError("sequence has no frames");
    if (config_.threads > 0) omp_set_num_threads(config_.threads);
    superpixels_ = oversegment(sequence, config_);
}

ErrorMatrix CutoutEngine::error_matrix() const {
    return propagation_error_matrix(sequence_->frames(), superpixels_, config_);
}

FrameSelection CutoutEngine::recommend(int k) const {
    if (k < 1 || k > sequence_->frame_count())
        throw DataError("annotation budget must be in 1.." + std::to_string(sequence_->frame_count()));
    return select_frames(error_matrix(), k);
}

std::vector<std::optional<Mask>> CutoutEngine::run_direction(const AnnotationSet& annotations,
                                                             const PyramidModel& model, Direction direction,
                                                             const PropagateOptions& options, std::atomic<int>& done,
                                                             int total, std::string& diagnostic) const {
    const int n = sequence_->frame_count();
    std::vector<std::optional<Mask>> out(static_cast<std::size_t>(n));
    const auto frames = annotations.frames();
    const bool forward = direction == Direction::forward;
    const int start = forward ? frames.front() : frames.back();
    const int step = forward ? 1 : -1;
    const int stop = forward ? n + 1 : 0;

    Mask previous = *annotations.find(start);
    out[std::size_t(start - 1)] = previous;
    for (int t = start + step; t != stop; t += step) {
        if (const Mask* a = annotations.find(t)) {
            previous = *a;
            out[std::size_t(t - 1)] = previous;
            continue;
        }
        const int p = t - step;
        try {
            FrameStep s = propagate_step(sequence_->frame(p), superpixels_[std::size_t(p - 1)], previous,
                                         sequence_->frame(t), superpixels_[std::size_t(t - 1)], model, config_);
            s.refined.mask.set_frame_index(t);
            previous = s.refined.mask;
            out[std::size_t(t - 1)] = previous;
            if (options.inspect) options.inspect(t, direction, s);
        } catch (const std::exception& e) {
            diagnostic = std::string(forward ? "forward" : "backward") + " pass aborted at frame " +
                         std::to_string(t) + ": " + e.what();
            break;
        }
        const int finished = ++done;
        if (options.progress) options.progress(finished, total);
    }
    return out;
}

PropagationResult CutoutEngine::propagate(const AnnotationSet& annotations, const PropagateOptions& options) const {
    const int n = sequence_->frame_count();
    annotations.validate(n, sequence_->width(), sequence_->height());

    std::vector<AnnotatedFrame> annotated;
    for (const Annotation& a : annotations.entries()) annotated.push_back(AnnotatedFrame{&sequence_->frame(a.frame), &a.mask});
    const PyramidModel model =
        build_pyramid_model(annotated, config_.pyramid_levels, config_.bins_per_channel, config_.pyramid_grid);

    const auto frames = annotations.frames();
    const int unannotated_fwd = (n - frames.front() + 1) - int(frames.size());
    const int unannotated_bwd = frames.back() - int(frames.size());
    const int total = unannotated_fwd + (options.forward_only ? 0 : unannotated_bwd);

    // Progress and inspection callbacks may otherwise fire from both passes at once.
    std::mutex callback_mutex;
    PropagateOptions serialized;
    if (options.progress)
        serialized.progress = [&](int d, int t) {
            std::lock_guard lock(callback_mutex);
            options.progress(d, t);
        };
    if (options.inspect)
        serialized.inspect = [&](int t, Direction dir, const FrameStep& s) {
            std::lock_guard lock(callback_mutex);
            options.inspect(t, dir, s);
        };

    std::atomic<int> done{0};
    std::string fwd_diag, bwd_diag;
    PropagationResult r;
    if (options.forward_only) {
        r.left = run_direction(annotations, model, Direction::forward, serialized, done, total, fwd_diag);
        r.right.assign(std::size_t(n), std::nullopt);
    } else {
        auto backward = std::async(std::launch::async, [&] {
            return run_direction(annotations, model, Direction::backward, serialized, done, total, bwd_diag);
        });
        r.left = run_direction(annotations, model, Direction::forward, serialized, done, total, fwd_diag);
        r.right = backward.get();
    }
    for (auto* d : {&fwd_diag, &bwd_diag})
        if (!d->empty()) r.diagnostics.push_back(*d);

    r.masks.assign(std::size_t(n), std::nullopt);
    for (int t = 1; t <= n; ++t) {
        const std::size_t i = std::size_t(t - 1);
        if (const Mask* a = annotations.find(t)) {
            r.masks[i] = *a;
            continue;
        }
        auto lt = std::upper_bound(frames.begin(), frames.end(), t);
        const int l = lt == frames.begin() ? 0 : *std::prev(lt);
        const int rt = lt == frames.end() ? 0 : *lt;
        const auto& left = r.left[i];
        const auto& right = r.right[i];
        Mask merged;
        if (left && right && l > 0 && rt > 0)
            merged = merge_bidirectional(*left, *right, l, rt, t, config_.merge_threshold);
        else if (left)
            merged = *left;
        else if (right)
            merged = *right;
        else
            continue;
        merged = fill_holes(merged);
        merged.set_frame_index(t);
        r.masks[i] = std::move(merged);
    }
    return r;
}

std::vector<int> recommend(const VideoSequence& sequence, int k, const RunConfig& config) {
    return CutoutEngine(sequence, config).recommend(k).frames;
}

PropagationResult propagate(const VideoSequence& sequence, const AnnotationSet& annotations, const RunConfig& config,
                            const PropagateOptions& options) {
    return CutoutEngine(sequence, config).propagate(annotations, options);
}

Protocol parse_protocol(const std::string& name) {
    if (name == "davis") return Protocol::davis;
    if (name == "jumpcut") return Protocol::jumpcut;
    throw std::invalid_argument("unknown protocol '" + name + "' (expected davis or jumpcut)");
}

Segmenter engine_segmenter(const RunConfig& config) {
    return [config](const VideoSequence& seq, const AnnotationSet& ann, bool forward_only) {
        PropagateOptions opt;
        opt.forward_only = forward_only;
        return CutoutEngine(seq, config).propagate(ann, opt).masks;
    };
}

namespace {

Mask or_empty(const std::optional<Mask>& m, int width, int height) {
    return m ? *m : Mask(width, height);
}

VideoSequence subsequence(const VideoSequence& seq, int first, int last) {
    std::vector<Frame> frames;
    std::vector<int> numbers;
    for (int t = first; t <= last; ++t) {
        frames.push_back(seq.frame(t));
        numbers.push_back(seq.file_number(t));
    }
    return VideoSequence(std::move(frames), std::move(numbers));
}

}  // namespace

VideoReport evaluate_sequence(const std::string& name, const VideoSequence& sequence, const AnnotationSet& truth,
                              Protocol protocol, const RunConfig& config, const Segmenter& segmenter) {
    const Segmenter run = segmenter ? segmenter : engine_segmenter(config);
    const int w = sequence.width(), h = sequence.height();
    VideoReport report;
    report.name = name;
    if (protocol == Protocol::davis) {
        const Mask* first = truth.find(1);
        if (!first) throw DataError(name + ": missing ground truth for the first frame");
        AnnotationSet ann;
        ann.set(1, *first);
        const auto masks = run(sequence, ann, true);
        const double tol = config.contour_tolerance_px(w, h);
        for (const Annotation& g : truth.entries()) {
            if (g.frame == 1) continue;
            const Mask m = or_empty(masks.at(std::size_t(g.frame - 1)), w, h);
            report.frames.push_back(FrameScore{g.frame, region_similarity(m, g.mask), contour_accuracy(m, g.mask, tol)});
        }
        return report;
    }

    for (int d : kJumpcutDistances) {
        double sum = 0.0;
        int count = 0;
        for (int s0 : kJumpcutStarts) {
            const int a = s0 + 1, b = s0 + d + 1;
            if (b > sequence.frame_count()) continue;
            const Mask* ga = truth.find(a);
            const Mask* gb = truth.find(b);
            if (!ga || !gb || gb->count() == 0) continue;
            AnnotationSet ann;
            ann.set(1, *ga);
            const auto masks = run(subsequence(sequence, a, b), ann, true);
            sum += jumpcut_error(or_empty(masks.back(), w, h), *gb);
            ++count;
        }
        if (count > 0) report.error_by_distance.emplace_back(d, sum / count);
    }
    if (report.error_by_distance.empty()) throw DataError(name + ": no ground-truth pairs for the jumpcut protocol");
    return report;
}

EvalReport benchmark(const std::filesystem::path& root, Protocol protocol, const RunConfig& config,
                     const Segmenter& segmenter) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw DataError("dataset root not found: " + root.string());
    std::vector<fs::path> dirs;
    if (fs::is_directory(root / "frames")) {
        dirs.push_back(root);
    } else {
        for (const auto& e : fs::directory_iterator(root))
            if (e.is_directory() && fs::is_directory(e.path() / "frames")) dirs.push_back(e.path());
        std::sort(dirs.begin(), dirs.end());
    }
    if (dirs.empty()) throw DataError("no <seq>/frames directories under " + root.string());

    const Segmenter run = segmenter ? segmenter : engine_segmenter(config);
    EvalReport report;
    report.protocol = protocol == Protocol::davis ? "davis" : "jumpcut";
    for (const fs::path& dir : dirs) {
        const SequenceLayout layout{dir};
        const VideoSequence seq = load_sequence(layout.frames_dir());
        const AnnotationSet truth = load_ground_truth(layout, seq);
        if (truth.empty()) throw DataError(dir.filename().string() + ": missing ground truth");
        report.videos.push_back(evaluate_sequence(dir.filename().string(), seq, truth, protocol, config, run));
    }
    report.finalize();
    return report;
}

}  // namespace vcut
