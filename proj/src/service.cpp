#include "vcut/service.hpp"

#include <fstream>
#include <httplib.h>
#include <sstream>

#include "vcut/io.hpp"

namespace vcut::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(SessionState s) {
    switch (s) {
        case SessionState::created: return "created";
        case SessionState::recommended: return "recommended";
        case SessionState::annotating: return "annotating";
        case SessionState::propagating: return "propagating";
        case SessionState::done: return "done";
    }
    return "unknown";
}

namespace {

std::string config_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + config_value(v[i]);
        return out;
    }
    return v.dump();
}

RunConfig config_from(const json& body) {
    RunConfig config;
    if (!body.contains("config")) return config;
    const json& c = body["config"];
    if (!c.is_object()) throw ApiError(400, "config must be an object");
    try {
        for (const auto& [key, value] : c.items()) config.set(key, config_value(value));
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ApiError(400, e.what());
    }
    return config;
}

json config_json(const RunConfig& config) {
    json out = json::object();
    for (const auto& [k, v] : config.to_map()) out[k] = v;
    return out;
}

std::string frame_file(int t) { return numbered_name("%05d.png", t); }

}  // namespace

SessionManager::~SessionManager() {
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : sessions_)
        if (s->job.joinable()) s->job.join();
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown session " + id);
    return it->second;
}

void SessionManager::require_frame(const Session& s, int t) {
    if (!s.sequence.has_index(t)) throw ApiError(404, "frame " + std::to_string(t) + " out of range");
}

json SessionManager::create(const json& body) {
    if (!body.is_object()) throw ApiError(400, "body must be a JSON object");
    json params = body;
    fs::path snapshot;
    if (body.contains("snapshot")) {
        snapshot = body["snapshot"].get<std::string>();
        std::ifstream in(snapshot / "session.json");
        if (!in) throw ApiError(400, "no session.json under " + snapshot.string());
        try {
            params = json::parse(in);
        } catch (const json::exception& e) {
            throw ApiError(400, std::string("bad session.json: ") + e.what());
        }
    }
    if (!params.contains("sequence") || !params["sequence"].is_string()) throw ApiError(400, "missing sequence path");

    auto s = std::make_shared<Session>();
    s->sequence_path = params["sequence"].get<std::string>();
    const RunConfig config = config_from(params);
    s->k = params.contains("k") ? params["k"].get<int>() : config.annotation_budget;
    try {
        const SequenceLayout layout{s->sequence_path};
        const bool has_layout = fs::is_directory(layout.frames_dir());
        s->sequence = load_sequence(has_layout ? layout.frames_dir() : s->sequence_path);
        if (has_layout) s->truth = load_ground_truth(layout, s->sequence);
    } catch (const DataError& e) {
        throw ApiError(400, e.what());
    }
    if (s->k < 1 || s->k > s->sequence.frame_count())
        throw ApiError(400, "k must be in 1.." + std::to_string(s->sequence.frame_count()));
    s->engine = std::make_unique<CutoutEngine>(s->sequence, config);

    if (!snapshot.empty()) {
        for (int t : params.value("annotations", std::vector<int>{})) {
            require_frame(*s, t);
            try {
                s->annotations.set(t, load_mask(snapshot / "annotations" / frame_file(t), t, s->sequence.width(),
                                                s->sequence.height()));
            } catch (const DataError& e) {
                throw ApiError(400, e.what());
            }
        }
        if (!s->annotations.empty()) s->state = SessionState::annotating;
    }

    {
        std::lock_guard lock(mutex_);
        s->id = std::to_string(next_id_++);
        sessions_[s->id] = s;
    }
    return describe(s->id);
}

json SessionManager::describe(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    json out{{"id", s->id},
             {"sequence", s->sequence_path.string()},
             {"frame_count", s->sequence.frame_count()},
             {"width", s->sequence.width()},
             {"height", s->sequence.height()},
             {"k", s->k},
             {"state", to_string(s->state)},
             {"annotations", s->annotations.frames()},
             {"has_ground_truth", !s->truth.empty()},
             {"config", config_json(s->engine->config())}};
    if (s->recommendation) out["recommendations"] = s->recommendation->frames;
    return out;
}

json SessionManager::recommendations(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (!s->recommendation) {
        try {
            s->recommendation = s->engine->recommend(s->k);
        } catch (const DataError& e) {
            throw ApiError(400, e.what());
        }
        if (s->state == SessionState::created) s->state = SessionState::recommended;
    }
    return json{{"frames", s->recommendation->frames}, {"objective", s->recommendation->objective}, {"k", s->k}};
}

std::string SessionManager::frame_png(const std::string& id, int t) {
    auto s = find(id);
    require_frame(*s, t);
    return encode_frame_png(s->sequence.frame(t));
}

json SessionManager::put_annotation(const std::string& id, int t, const std::string& png) {
    auto s = find(id);
    require_frame(*s, t);
    Mask mask;
    try {
        mask = decode_mask_png(png, t);
    } catch (const DataError& e) {
        throw ApiError(400, std::string("malformed mask: ") + e.what());
    }
    if (mask.width() != s->sequence.width() || mask.height() != s->sequence.height())
        throw ApiError(400, "mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                                ", frame is " + std::to_string(s->sequence.width()) + "x" +
                                std::to_string(s->sequence.height()));
    std::lock_guard lock(s->mutex);
    if (s->state == SessionState::propagating) throw ApiError(409, "propagation is running");
    s->annotations.set(t, std::move(mask));
    s->state = SessionState::annotating;
    return json{{"frame", t}, {"annotations", s->annotations.frames()}};
}

std::string SessionManager::annotation_png(const std::string& id, int t) {
    auto s = find(id);
    require_frame(*s, t);
    std::lock_guard lock(s->mutex);
    const Mask* m = s->annotations.find(t);
    if (!m) throw ApiError(404, "frame " + std::to_string(t) + " has no annotation");
    return encode_mask_png(*m);
}

void SessionManager::delete_annotation(const std::string& id, int t) {
    auto s = find(id);
    require_frame(*s, t);
    std::lock_guard lock(s->mutex);
    if (s->state == SessionState::propagating) throw ApiError(409, "propagation is running");
    if (!s->annotations.contains(t)) throw ApiError(404, "frame " + std::to_string(t) + " has no annotation");
    s->annotations.erase(t);
    s->state = SessionState::annotating;
}

json SessionManager::start_propagation(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->state == SessionState::propagating) throw ApiError(409, "propagation is already running");
    if (s->annotations.empty()) throw ApiError(400, "no annotations to propagate");
    if (s->job.joinable()) s->job.join();

    const int job = ++s->job_id;
    s->state = SessionState::propagating;
    s->done = 0;
    s->total = 0;
    s->job_error.clear();
    s->job = std::thread([s, annotations = s->annotations] {
        PropagateOptions opt;
        opt.progress = [&s](int done, int total) {
            s->total = total;
            s->done = done;
        };
        PropagationResult r;
        std::string error;
        try {
            r = s->engine->propagate(annotations, opt);
            for (const auto& d : r.diagnostics) error += (error.empty() ? "" : "; ") + d;
        } catch (const std::exception& e) {
            error = e.what();
        }
        std::lock_guard lock(s->mutex);
        if (!r.masks.empty()) s->results = std::move(r.masks);
        s->job_error = error;
        s->state = SessionState::done;
    });
    return json{{"job", job}, {"state", to_string(s->state)}};
}

json SessionManager::status(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    const int done = s->done, total = s->total;
    const bool running = s->state == SessionState::propagating;
    double progress = 0.0;
    if (!running && s->job_id > 0) progress = 1.0;
    else if (total > 0) progress = double(done) / total;
    json frames = json::array();
    for (int t = 1; t <= s->sequence.frame_count(); ++t) {
        std::string state = "pending";
        if (s->annotations.contains(t)) state = "annotated";
        else if (std::size_t(t) <= s->results.size() && s->results[std::size_t(t - 1)]) state = "propagated";
        frames.push_back(state);
    }
    json out{{"state", to_string(s->state)}, {"job", s->job_id}, {"done", done},
             {"total", total},                {"progress", progress}, {"frames", frames}};
    if (!s->job_error.empty()) out["error"] = s->job_error;
    return out;
}

void SessionManager::wait(const std::string& id) {
    auto s = find(id);
    std::thread job;
    {
        std::lock_guard lock(s->mutex);
        job = std::move(s->job);
    }
    if (job.joinable()) job.join();
}

std::string SessionManager::result_png(const std::string& id, int t, bool overlay_mode) {
    auto s = find(id);
    require_frame(*s, t);
    std::lock_guard lock(s->mutex);
    if (std::size_t(t) > s->results.size() || !s->results[std::size_t(t - 1)])
        throw ApiError(404, "no result for frame " + std::to_string(t));
    const Mask& m = *s->results[std::size_t(t - 1)];
    return overlay_mode ? encode_frame_png(overlay(s->sequence.frame(t), m)) : encode_mask_png(m);
}

json SessionManager::metrics(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->truth.empty()) throw ApiError(404, "sequence has no ground truth");
    const RunConfig& config = s->engine->config();
    const double tol = config.contour_tolerance_px(s->sequence.width(), s->sequence.height());
    json frames = json::array();
    double sj = 0.0, sf = 0.0;
    int n = 0;
    for (const Annotation& g : s->truth.entries()) {
        if (std::size_t(g.frame) > s->results.size() || !s->results[std::size_t(g.frame - 1)]) continue;
        const Mask& m = *s->results[std::size_t(g.frame - 1)];
        const double j = region_similarity(m, g.mask), f = contour_accuracy(m, g.mask, tol);
        frames.push_back(json{{"frame", g.frame}, {"J", j}, {"F", f}, {"annotated", s->annotations.contains(g.frame)}});
        sj += j, sf += f, ++n;
    }
    json out{{"frames", frames}, {"count", n}};
    out["mean_j"] = n ? sj / n : 0.0;
    out["mean_f"] = n ? sf / n : 0.0;
    return out;
}

json SessionManager::save_snapshot(const std::string& id, const fs::path& directory) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->state == SessionState::propagating) throw ApiError(409, "propagation is running");
    try {
        fs::create_directories(directory / "annotations");
        for (const Annotation& a : s->annotations.entries())
            save_mask(a.mask, directory / "annotations" / frame_file(a.frame));
        int saved = 0;
        if (!s->results.empty()) {
            fs::create_directories(directory / "results");
            for (std::size_t i = 0; i < s->results.size(); ++i)
                if (s->results[i]) save_mask(*s->results[i], directory / "results" / frame_file(int(i) + 1)), ++saved;
        }
        const json session{{"sequence", fs::absolute(s->sequence_path).string()},
                           {"k", s->k},
                           {"config", config_json(s->engine->config())},
                           {"annotations", s->annotations.frames()}};
        std::ofstream out(directory / "session.json");
        if (!out) throw DataError("cannot write " + (directory / "session.json").string());
        out << session.dump(2) << '\n';
        return json{{"path", directory.string()}, {"annotations", s->annotations.size()}, {"results", saved}};
    } catch (const fs::filesystem_error& e) {
        throw ApiError(400, e.what());
    } catch (const DataError& e) {
        throw ApiError(400, e.what());
    }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, json{{"error", message}}, status);
}

template <typename F>
httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ApiError& e) {
            send_error(res, e.status(), e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("bad JSON: ") + e.what());
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

int frame_arg(const httplib::Request& req, std::size_t i) {
    const std::string s = req.matches[i];
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw ApiError(404, "bad frame index " + s);
    }
}

json body_json(const httplib::Request& req) { return req.body.empty() ? json::object() : json::parse(req.body); }

}  // namespace

void register_routes(httplib::Server& server, SessionManager& sm, const std::optional<fs::path>& ui_dir) {
    const std::string base = "/api/v1/sessions";
    const std::string sid = R"(/([^/]+))";
    const std::string frame = R"(/(\d+))";

    server.Post(base, guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, sm.create(body_json(req)), 201);
                }));
    server.Get(base + sid, guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, sm.describe(req.matches[1]));
               }));
    server.Get(base + sid + "/recommendations", guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, sm.recommendations(req.matches[1]));
               }));
    server.Get(base + sid + "/frames" + frame, guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   res.set_content(sm.frame_png(req.matches[1], frame_arg(req, 2)), "image/png");
               }));
    server.Put(base + sid + "/annotations" + frame, guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, sm.put_annotation(req.matches[1], frame_arg(req, 2), req.body));
               }));
    server.Get(base + sid + "/annotations" + frame, guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   res.set_content(sm.annotation_png(req.matches[1], frame_arg(req, 2)), "image/png");
               }));
    server.Delete(base + sid + "/annotations" + frame,
                  guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                      sm.delete_annotation(req.matches[1], frame_arg(req, 2));
                      res.status = 204;
                  }));
    server.Post(base + sid + "/propagate", guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, sm.start_propagation(req.matches[1]), 202);
                }));
    server.Get(base + sid + "/status", guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, sm.status(req.matches[1]));
               }));
    server.Get(base + sid + "/results" + frame + "/mask",
               guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   res.set_content(sm.result_png(req.matches[1], frame_arg(req, 2), false), "image/png");
               }));
    server.Get(base + sid + "/results" + frame + "/overlay",
               guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   res.set_content(sm.result_png(req.matches[1], frame_arg(req, 2), true), "image/png");
               }));
    server.Get(base + sid + "/metrics", guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, sm.metrics(req.matches[1]));
               }));
    server.Post(base + sid + "/snapshot", guarded([&sm](const httplib::Request& req, httplib::Response& res) {
                    const json body = body_json(req);
                    if (!body.contains("path") || !body["path"].is_string()) throw ApiError(400, "missing path");
                    send_json(res, sm.save_snapshot(req.matches[1], body["path"].get<std::string>()));
                }));
    if (ui_dir && !server.set_mount_point("/", ui_dir->string()))
        throw DataError("cannot serve UI directory " + ui_dir->string());
}

}  // namespace vcut::service
