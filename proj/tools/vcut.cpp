// vcut: frame recommendation, mask propagation, benchmarking and the annotation server.
//
// Exit codes: 0 ok, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "vcut/io.hpp"
#include "vcut/pipeline.hpp"
#include "vcut/service.hpp"

namespace fs = std::filesystem;
using namespace vcut;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sequence given either as a layout root (with frames/) or as the frame directory.
VideoSequence open_sequence(const fs::path& dir) {
    const SequenceLayout layout{dir};
    return load_sequence(fs::is_directory(layout.frames_dir()) ? layout.frames_dir() : dir);
}

RunConfig build_config(const std::string& config_file, const std::vector<std::string>& overrides) {
    RunConfig config;
    if (!config_file.empty()) config = load_config(config_file);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    config.validate();
    return config;
}

void write_error_csv(const ErrorMatrix& e, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out.precision(17);
    for (int s = 1; s <= e.size(); ++s) {
        for (int t = 1; t <= e.size(); ++t) out << (t > 1 ? "," : "") << e(s, t);
        out << '\n';
    }
}

httplib::Server* g_server = nullptr;
void stop_server(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive video cutout: recommend annotation frames and propagate masks"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> overrides;
    app.add_option("--config", config_file, "Flat key = value config file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "Override one config value (key=value)");

    // recommend
    auto* rec = app.add_subcommand("recommend", "Print the K frames to annotate");
    std::string rec_seq, rec_csv;
    int rec_k = 0;
    rec->add_option("--seq", rec_seq, "Sequence directory")->required();
    rec->add_option("-k,--k", rec_k, "Annotation budget (default: annotation_budget)");
    rec->add_option("--error-csv", rec_csv, "Write the predicted error matrix (row = source, col = target)");

    // propagate
    auto* prop = app.add_subcommand("propagate", "Propagate annotation masks to every frame");
    std::string prop_seq, prop_out, dump_sp, dump_conf, dump_unc;
    std::vector<std::string> prop_ann;
    bool forward_only = false;
    prop->add_option("--seq", prop_seq, "Sequence directory")->required();
    prop->add_option("--ann", prop_ann, "Annotation as IDX=PATH with a 1-based frame index")->required();
    prop->add_option("--out", prop_out, "Output directory for masks")->required();
    prop->add_flag("--forward-only", forward_only, "Propagate forward from the first annotation only");
    prop->add_option("--dump-superpixels", dump_sp, "Write 16-bit superpixel id maps here");
    prop->add_option("--dump-confidence", dump_conf, "Write static/dynamic/combined confidence maps here");
    prop->add_option("--dump-uncertainty", dump_unc, "Write uncertainty fields and uncertain-set overlays here");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "Score propagation against ground truth");
    std::string bench_root, bench_protocol = "davis", bench_csv;
    bench->add_option("--root", bench_root, "Dataset root holding <seq>/frames and <seq>/masks")->required();
    bench->add_option("--protocol", bench_protocol, "davis or jumpcut")->check(CLI::IsMember({"davis", "jumpcut"}));
    bench->add_option("--csv", bench_csv, "Write per-frame (davis) or per-distance (jumpcut) rows");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1", ui_dir;
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--ui", ui_dir, "Static UI bundle served at /")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const RunConfig config = build_config(config_file, overrides);

        if (*rec) {
            const VideoSequence seq = open_sequence(rec_seq);
            const CutoutEngine engine(seq, config);
            const int k = rec_k > 0 ? rec_k : config.annotation_budget;
            const FrameSelection sel = engine.recommend(k);
            for (std::size_t i = 0; i < sel.frames.size(); ++i) std::cout << (i ? " " : "") << sel.frames[i];
            std::cout << '\n';
            std::cerr << "objective " << sel.objective << '\n';
            if (!rec_csv.empty()) write_error_csv(engine.error_matrix(), rec_csv);
            return 0;
        }

        if (*prop) {
            const VideoSequence seq = open_sequence(prop_seq);
            AnnotationSet ann;
            for (const std::string& spec : prop_ann) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos) throw UsageError("--ann expects IDX=PATH, got '" + spec + "'");
                int t = 0;
                try {
                    t = std::stoi(spec.substr(0, eq));
                } catch (const std::exception&) {
                    throw UsageError("--ann index is not a number: '" + spec + "'");
                }
                if (!seq.has_index(t))
                    throw DataError("annotation frame " + std::to_string(t) + " outside 1.." +
                                    std::to_string(seq.frame_count()));
                ann.set(t, load_mask(spec.substr(eq + 1), t, seq.width(), seq.height()));
            }
            const CutoutEngine engine(seq, config);
            const int w = seq.width(), h = seq.height();
            for (const auto& dir : {dump_sp, dump_conf, dump_unc})
                if (!dir.empty()) fs::create_directories(dir);
            if (!dump_sp.empty())
                for (int t = 1; t <= seq.frame_count(); ++t)
                    save_id_map(engine.superpixels()[std::size_t(t - 1)].ids(), w, h,
                                fs::path(dump_sp) / numbered_name("%05d.png", seq.file_number(t)));

            PropagateOptions opt;
            opt.forward_only = forward_only;
            opt.progress = [](int done, int total) { std::fprintf(stderr, "\rpropagated %d/%d", done, total); };
            if (!dump_conf.empty() || !dump_unc.empty())
                opt.inspect = [&](int t, Direction dir, const FrameStep& s) {
                    const std::string tag = dir == Direction::forward ? "fwd" : "bwd";
                    const std::string num = numbered_name("%05d.png", seq.file_number(t));
                    const SuperpixelMap& sp = engine.superpixels()[std::size_t(t - 1)];
                    if (!dump_conf.empty()) {
                        const fs::path d(dump_conf);
                        save_unit_map(rasterize<double>(sp, s.static_conf), w, h, d / ("static_" + tag + "_" + num));
                        save_unit_map(rasterize<double>(sp, s.dynamic.confidence), w, h,
                                      d / ("dynamic_" + tag + "_" + num));
                        save_unit_map(rasterize<double>(sp, s.confidence), w, h, d / ("combined_" + tag + "_" + num));
                    }
                    if (!dump_unc.empty()) {
                        const fs::path d(dump_unc);
                        std::vector<double> e(s.refined.field.values);
                        for (double& v : e) v /= kMaxColorDistance;
                        save_unit_map(e, w, h, d / ("field_" + tag + "_" + num));
                        const Mask u(w, h, s.refined.field.uncertain);
                        save_frame(overlay(seq.frame(t), u, 0.6), d / ("uncertain_" + tag + "_" + num));
                    }
                };
            const PropagationResult r = engine.propagate(ann, opt);
            std::fprintf(stderr, "\n");
            for (const auto& d : r.diagnostics) std::cerr << "warning: " << d << '\n';
            fs::create_directories(prop_out);
            int written = 0;
            for (int t = 1; t <= seq.frame_count(); ++t)
                if (const auto& m = r.masks[std::size_t(t - 1)]) {
                    save_mask(*m, fs::path(prop_out) / numbered_name("%05d.png", seq.file_number(t)));
                    ++written;
                }
            std::cout << "wrote " << written << " masks to " << prop_out << '\n';
            return r.diagnostics.empty() ? 0 : 2;
        }

        if (*bench) {
            const EvalReport report = benchmark(bench_root, parse_protocol(bench_protocol), config);
            report.write_table(std::cout);
            if (!bench_csv.empty()) {
                std::ofstream out(bench_csv);
                if (!out) throw DataError("cannot write " + bench_csv);
                report.write_csv(out);
            }
            return 0;
        }

        if (*serve) {
            service::SessionManager sessions;
            httplib::Server server;
            service::register_routes(server, sessions,
                                     ui_dir.empty() ? std::nullopt : std::optional<fs::path>(ui_dir));
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            std::cerr << "listening on http://" << host << ":" << port << "/api/v1/\n";
            if (!server.listen(host, port)) throw DataError("cannot listen on " + host + ":" + std::to_string(port));
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
