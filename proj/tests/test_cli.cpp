#include <doctest.h>
#include <httplib.h>
#include <sys/wait.h>

#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "vcut/pipeline.hpp"
#include "vcut/service.hpp"

using namespace vcut;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run_cli(const std::string& args) {
    static int n = 0;
    const fs::path dir = fs::temp_directory_path() / ("vcut_cli_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const fs::path out = dir / ("out" + std::to_string(n)), err = dir / ("err" + std::to_string(n));
    ++n;
    const std::string cmd = std::string(VCUT_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

const char* kSmall = "--set window_sizes=16,24,40";

struct Fixture {
    fs::path root;
    testing::Synthetic data;
    fs::path mask;
};

Fixture make_fixture(const std::string& name) {
    Fixture f{testing::temp_dir(name), testing::translating_square(80, 60, 6, 18, 10, 12, 3, 1), {}};
    testing::write_layout(f.root / "square", f.data);
    f.mask = f.root / "ann.png";
    save_mask(f.data.truth[0], f.mask);
    return f;
}

}  // namespace

TEST_CASE("usage and help") {
    CHECK(run_cli("").code == 1);
    const Run help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("recommend") != std::string::npos);
    CHECK(run_cli("nonsense").code == 1);
    CHECK(run_cli("recommend").code == 1);  // --seq required
    CHECK(run_cli("--config /nonexistent.cfg recommend --seq .").code == 1);
}

TEST_CASE("recommend prints K indices and the error matrix") {
    const Fixture f = make_fixture("cli_rec");
    const fs::path csv = f.root / "err.csv";
    const Run r = run_cli(std::string(kSmall) + " recommend --seq " + (f.root / "square").string() + " -k 2 --error-csv " +
                       csv.string());
    REQUIRE(r.code == 0);
    std::istringstream is(r.out);
    int a = 0, b = 0;
    is >> a >> b;
    CHECK(a >= 1);
    CHECK(a < b);
    CHECK(b <= 6);
    CHECK(r.err.find("objective") != std::string::npos);

    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
        ++rows;
    }
    CHECK(rows == 6);

    // Indices agree with the library.
    RunConfig config;
    config.window_sizes = {16, 24, 40};
    CHECK(recommend(VideoSequence(f.data.frames), 2, config) == std::vector<int>{a, b});

    CHECK(run_cli("recommend --seq " + (f.root / "square").string() + " -k 9").code == 2);
    CHECK(run_cli("recommend --seq /nonexistent/seq").code == 2);
    CHECK(run_cli("--set no_such_key=1 recommend --seq " + (f.root / "square").string()).code == 1);
    CHECK(run_cli("--set pyramid_levels recommend --seq " + (f.root / "square").string()).code == 1);
}

TEST_CASE("propagate writes masks identical to the service results") {
    const Fixture f = make_fixture("cli_prop");
    const fs::path out = f.root / "masks_out", dumps = f.root / "dumps";
    const Run r = run_cli(std::string(kSmall) + " propagate --seq " + (f.root / "square").string() + " --ann 1=" +
                       f.mask.string() + " --out " + out.string() + " --dump-superpixels " + (dumps / "sp").string() +
                       " --dump-confidence " + (dumps / "conf").string() + " --dump-uncertainty " +
                       (dumps / "unc").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("wrote 6 masks") != std::string::npos);
    CHECK(fs::exists(dumps / "sp" / "00000.png"));
    CHECK(fs::exists(dumps / "conf" / "combined_fwd_00003.png"));
    CHECK(fs::exists(dumps / "unc" / "uncertain_fwd_00005.png"));

    service::SessionManager sm;
    const auto info = sm.create({{"sequence", (f.root / "square").string()}, {"config", {{"window_sizes", "16,24,40"}}}});
    const std::string id = info["id"];
    sm.put_annotation(id, 1, encode_mask_png(load_mask(f.mask)));
    sm.start_propagation(id);
    sm.wait(id);
    for (int t = 1; t <= 6; ++t) {
        const fs::path file = out / numbered_name("%05d.png", t - 1);
        REQUIRE(fs::exists(file));
        CHECK(load_mask(file) == decode_mask_png(sm.result_png(id, t, false)));
    }

    SUBCASE("forward only from a later frame") {
        save_mask(f.data.truth[2], f.root / "ann3.png");
        const fs::path fwd = f.root / "fwd_out";
        const Run o = run_cli(std::string(kSmall) + " propagate --forward-only --seq " + (f.root / "square").string() +
                           " --ann 3=" + (f.root / "ann3.png").string() + " --out " + fwd.string());
        CHECK(o.code == 0);
        CHECK_FALSE(fs::exists(fwd / "00000.png"));
        CHECK(fs::exists(fwd / "00005.png"));
    }
}

TEST_CASE("propagate argument errors") {
    const Fixture f = make_fixture("cli_prop_err");
    const std::string seq = " --seq " + (f.root / "square").string() + " --out " + (f.root / "o").string();
    CHECK(run_cli("propagate" + seq).code == 1);                                      // --ann required
    CHECK(run_cli("propagate" + seq + " --ann " + f.mask.string()).code == 1);        // missing index
    CHECK(run_cli("propagate" + seq + " --ann x=" + f.mask.string()).code == 1);      // not a number
    CHECK(run_cli("propagate" + seq + " --ann 7=" + f.mask.string()).code == 2);      // out of range
    CHECK(run_cli("propagate" + seq + " --ann 1=/nonexistent.png").code == 2);        // unreadable
    save_mask(Mask(10, 10), f.root / "small.png");
    CHECK(run_cli("propagate" + seq + " --ann 1=" + (f.root / "small.png").string()).code == 2);  // wrong size
}

TEST_CASE("benchmark prints a table and writes CSV") {
    const Fixture f = make_fixture("cli_bench");
    const fs::path csv = f.root / "report.csv";
    const Run r = run_cli(std::string(kSmall) + " benchmark --root " + f.root.string() + " --csv " + csv.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("square") != std::string::npos);
    CHECK(r.out.find("Avg.") != std::string::npos);
    const std::string rows = slurp(csv);
    CHECK(rows.rfind("video,frame,J,F\n", 0) == 0);
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 6);

    const Run j = run_cli(std::string(kSmall) + " benchmark --protocol jumpcut --root " + (f.root / "square").string());
    CHECK(j.code == 0);
    CHECK(j.out.find("d=1") != std::string::npos);
    CHECK(j.out.find("d=4") != std::string::npos);

    CHECK(run_cli("benchmark --protocol other --root " + f.root.string()).code == 1);
    CHECK(run_cli("benchmark --root /nonexistent/root").code == 2);
}

TEST_CASE("serve answers on the API and stops on SIGTERM") {
    // Reserve a free port, then release it for the child.
    int port = 0;
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        socklen_t len = sizeof(addr);
        REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) == 0);
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port = ntohs(addr.sin_port);
        ::close(fd);
    }
    const fs::path pidfile = testing::temp_dir("cli_serve") / "pid";
    const std::string cmd = std::string(VCUT_CLI) + " serve --port " + std::to_string(port) +
                            " >/dev/null 2>&1 & echo $! > " + pidfile.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::string pid = slurp(pidfile);
    while (!pid.empty() && std::isspace(static_cast<unsigned char>(pid.back()))) pid.pop_back();
    httplib::Client c("127.0.0.1", port);
    int status = -1;
    for (int i = 0; i < 200 && status < 0; ++i) {
        if (auto r = c.Get("/api/v1/sessions/1")) status = r->status;
        else std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    CHECK(status == 404);
    CHECK(std::system(("kill -TERM " + pid).c_str()) == 0);
    bool gone = false;
    for (int i = 0; i < 200 && !gone; ++i) {
        gone = std::system(("kill -0 " + pid + " 2>/dev/null").c_str()) != 0;
        if (!gone) std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    CHECK(gone);
}
