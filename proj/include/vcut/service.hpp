#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vcut/pipeline.hpp"

namespace httplib {
class Server;
}

namespace vcut::service {

enum class SessionState { created, recommended, annotating, propagating, done };

std::string to_string(SessionState s);

/// Error carrying the HTTP status it maps to.
class ApiError : public std::runtime_error {
public:
    ApiError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

struct Session {
    std::string id;
    std::filesystem::path sequence_path;
    int k = 1;
    VideoSequence sequence;
    AnnotationSet truth;
    std::unique_ptr<CutoutEngine> engine;

    std::mutex mutex;
    SessionState state = SessionState::created;
    std::optional<FrameSelection> recommendation;
    AnnotationSet annotations;
    std::vector<std::optional<Mask>> results;

    int job_id = 0;
    std::atomic<int> done{0};
    std::atomic<int> total{0};
    std::string job_error;
    std::thread job;
};

/// In-memory session store behind the HTTP routes. Every method throws ApiError.
class SessionManager {
public:
    SessionManager() = default;
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;
    ~SessionManager();

    /// Body: {"sequence": dir, "k": K, "config": {key: value}} or {"snapshot": dir}.
    nlohmann::json create(const nlohmann::json& body);
    nlohmann::json describe(const std::string& id);
    nlohmann::json recommendations(const std::string& id);

    std::string frame_png(const std::string& id, int t);
    nlohmann::json put_annotation(const std::string& id, int t, const std::string& png);
    std::string annotation_png(const std::string& id, int t);
    void delete_annotation(const std::string& id, int t);

    nlohmann::json start_propagation(const std::string& id);
    nlohmann::json status(const std::string& id);
    /// Blocks until the session's running job (if any) finishes.
    void wait(const std::string& id);

    std::string result_png(const std::string& id, int t, bool overlay);
    nlohmann::json metrics(const std::string& id);

    /// Writes session.json, annotations/ and results/ under `directory`.
    nlohmann::json save_snapshot(const std::string& id, const std::filesystem::path& directory);

private:
    std::shared_ptr<Session> find(const std::string& id);
    static void require_frame(const Session& s, int t);

    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    int next_id_ = 1;
};

/// Registers the /api/v1 routes and, when `ui_dir` is set, serves it at /.
void register_routes(httplib::Server& server, SessionManager& sessions,
                     const std::optional<std::filesystem::path>& ui_dir = std::nullopt);

}  // namespace vcut::service
