#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vcut/config.hpp"
#include "vcut/core.hpp"
#include "vcut/frame_select.hpp"
#include "vcut/global_confidence.hpp"
#include "vcut/local_refine.hpp"
#include "vcut/metrics.hpp"
#include "vcut/superpixel.hpp"

namespace vcut {

enum class Direction { forward, backward };

/// Everything computed while propagating one frame from its neighbour.
struct FrameStep {
    std::vector<double> static_conf;
    DynamicConfidence dynamic;
    std::vector<double> confidence;
    Mask coarse;
    RefineResult refined;
};

/// One propagation step from a labelled neighbour frame to `current`.
FrameStep propagate_step(const Frame& previous, const SuperpixelMap& previous_sp, const Mask& previous_mask,
                         const Frame& current, const SuperpixelMap& current_sp, const PyramidModel& model,
                         const RunConfig& config);

struct PropagateOptions {
    bool forward_only = false;
    /// Called after each propagated frame with (frames done, frames to do).
    std::function<void(int, int)> progress;
    /// Called for each propagated frame with its intermediate results.
    std::function<void(int, Direction, const FrameStep&)> inspect;
};

struct PropagationResult {
    /// Index t-1 holds frame t; empty where no direction reached the frame.
    std::vector<std::optional<Mask>> left;
    std::vector<std::optional<Mask>> right;
    std::vector<std::optional<Mask>> masks;
    /// One line per direction that aborted early.
    std::vector<std::string> diagnostics;
};

/// Per-sequence state shared by recommendation and propagation. Superpixel maps are
/// computed once on construction.
class CutoutEngine {
public:
    CutoutEngine(const VideoSequence& sequence, RunConfig config);

    const VideoSequence& sequence() const { return *sequence_; }
    const RunConfig& config() const { return config_; }
    std::span<const SuperpixelMap> superpixels() const { return superpixels_; }

    ErrorMatrix error_matrix() const;
    FrameSelection recommend(int k) const;
    PropagationResult propagate(const AnnotationSet& annotations, const PropagateOptions& options = {}) const;

private:
    std::vector<std::optional<Mask>> run_direction(const AnnotationSet& annotations, const PyramidModel& model,
                                                   Direction direction, const PropagateOptions& options,
                                                   std::atomic<int>& done, int total,
                                                   std::string& diagnostic) const;

    const VideoSequence* sequence_;
    RunConfig config_;
    std::vector<SuperpixelMap> superpixels_;
};

std::vector<SuperpixelMap> oversegment(const VideoSequence& sequence, const RunConfig& config);

std::vector<int> recommend(const VideoSequence& sequence, int k, const RunConfig& config);
PropagationResult propagate(const VideoSequence& sequence, const AnnotationSet& annotations, const RunConfig& config,
                            const PropagateOptions& options = {});

enum class Protocol { davis, jumpcut };
Protocol parse_protocol(const std::string& name);

/// Produces per-frame masks for a sequence given annotations (forward-only flag).
using Segmenter = std::function<std::vector<std::optional<Mask>>(const VideoSequence&, const AnnotationSet&, bool)>;

/// The engine's own propagation as a Segmenter.
Segmenter engine_segmenter(const RunConfig& config);

/// Scores one sequence with ground truth for every evaluated frame.
VideoReport evaluate_sequence(const std::string& name, const VideoSequence& sequence, const AnnotationSet& truth,
                              Protocol protocol, const RunConfig& config, const Segmenter& segmenter = {});

/// Runs every `<root>/<seq>/{frames,masks}` sequence under the protocol.
EvalReport benchmark(const std::filesystem::path& root, Protocol protocol, const RunConfig& config,
                     const Segmenter& segmenter = {});

/// Frame starts and transfer distances of the JumpCut protocol (0-based starts).
inline constexpr int kJumpcutStarts[] = {0, 16, 32, 48, 64, 80, 96};
inline constexpr int kJumpcutDistances[] = {1, 4, 8, 16};

}  // namespace vcut
