#include "vcut/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <opencv2/imgproc.hpp>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace vcut {
namespace {

void require_aligned(const Mask& m, const Mask& g, const char* what) {
    if (!m.same_shape(g)) throw std::invalid_argument(std::string(what) + ": mask dimensions differ");
}

// Distance from every pixel to the nearest contour pixel of `contour`.
cv::Mat distance_to(const Mask& contour) {
    cv::Mat src(contour.height(), contour.width(), CV_8UC1);
    for (int y = 0; y < contour.height(); ++y)
        for (int x = 0; x < contour.width(); ++x) src.at<std::uint8_t>(y, x) = contour.at(x, y) ? 0 : 255;
    cv::Mat dist;
    cv::distanceTransform(src, dist, cv::DIST_L2, cv::DIST_MASK_PRECISE, CV_32F);
    return dist;
}

double fraction_within(const Mask& from, const cv::Mat& dist_to_other, double tol) {
    std::size_t total = 0, hit = 0;
    for (int y = 0; y < from.height(); ++y)
        for (int x = 0; x < from.width(); ++x) {
            if (!from.at(x, y)) continue;
            ++total;
            if (double(dist_to_other.at<float>(y, x)) <= tol + 1e-6) ++hit;
        }
    return total ? double(hit) / double(total) : 0.0;
}

// Hopcroft-Karp maximum matching between contour pixels within tolerance.
std::size_t bipartite_matches(const Mask& a, const Mask& b, double tol) {
    std::vector<std::pair<int, int>> pa, pb;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            if (a.at(x, y)) pa.emplace_back(x, y);
            if (b.at(x, y)) pb.emplace_back(x, y);
        }
    std::vector<int> index_b(b.size(), -1);
    for (std::size_t j = 0; j < pb.size(); ++j) index_b[std::size_t(pb[j].second) * b.width() + pb[j].first] = int(j);

    const int r = int(std::floor(tol + 1e-9));
    const double tol2 = tol * tol + 1e-9;
    std::vector<std::vector<int>> adj(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > tol2) continue;
                const int x = pa[i].first + dx, y = pa[i].second + dy;
                if (x < 0 || y < 0 || x >= b.width() || y >= b.height()) continue;
                const int j = index_b[std::size_t(y) * b.width() + x];
                if (j >= 0) adj[i].push_back(j);
            }

    const int na = int(pa.size()), nb = int(pb.size());
    std::vector<int> match_a(std::size_t(na), -1), match_b(std::size_t(nb), -1), layer(static_cast<std::size_t>(na));
    const int inf = std::numeric_limits<int>::max();
    auto bfs = [&] {
        std::queue<int> q;
        bool found = false;
        for (int i = 0; i < na; ++i) {
            if (match_a[std::size_t(i)] < 0) {
                layer[std::size_t(i)] = 0;
                q.push(i);
            } else {
                layer[std::size_t(i)] = inf;
            }
        }
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            for (int j : adj[std::size_t(i)]) {
                const int k = match_b[std::size_t(j)];
                if (k < 0) found = true;
                else if (layer[std::size_t(k)] == inf) {
                    layer[std::size_t(k)] = layer[std::size_t(i)] + 1;
                    q.push(k);
                }
            }
        }
        return found;
    };
    std::function<bool(int)> dfs = [&](int i) {
        for (int j : adj[std::size_t(i)]) {
            const int k = match_b[std::size_t(j)];
            if (k < 0 || (layer[std::size_t(k)] == layer[std::size_t(i)] + 1 && dfs(k))) {
                match_a[std::size_t(i)] = j;
                match_b[std::size_t(j)] = i;
                return true;
            }
        }
        layer[std::size_t(i)] = inf;
        return false;
    };
    std::size_t matched = 0;
    while (bfs())
        for (int i = 0; i < na; ++i)
            if (match_a[std::size_t(i)] < 0 && dfs(i)) ++matched;
    return matched;
}

double f_measure(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

double region_similarity(const Mask& m, const Mask& g) {
    require_aligned(m, g, "region_similarity");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        inter += m[i] & g[i];
        uni += m[i] | g[i];
    }
    return uni == 0 ? 1.0 : double(inter) / double(uni);
}

Mask contour_pixels(const Mask& mask) {
    const int w = mask.width(), h = mask.height();
    Mask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !mask.at(x - 1, y) ||
                              !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
            out.at(x, y) = edge ? 1 : 0;
        }
    return out;
}

double contour_accuracy(const Mask& m, const Mask& g, double tolerance_px, ContourMatching mode) {
    require_aligned(m, g, "contour_accuracy");
    if (tolerance_px < 0) throw std::invalid_argument("contour_accuracy: negative tolerance");
    const Mask cm = contour_pixels(m), cg = contour_pixels(g);
    const std::size_t nm = cm.count(), ng = cg.count();
    if (nm == 0 && ng == 0) return 1.0;
    if (nm == 0 || ng == 0) return 0.0;
    if (mode == ContourMatching::bipartite) {
        const double matched = double(bipartite_matches(cm, cg, tolerance_px));
        return f_measure(matched / double(nm), matched / double(ng));
    }
    const double precision = fraction_within(cm, distance_to(cg), tolerance_px);
    const double recall = fraction_within(cg, distance_to(cm), tolerance_px);
    return f_measure(precision, recall);
}

double jumpcut_error(const Mask& m, const Mask& g) {
    require_aligned(m, g, "jumpcut_error");
    std::size_t wrong = 0, fg = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        wrong += m[i] != g[i];
        fg += g[i];
    }
    if (fg == 0) throw DataError("jumpcut_error: ground truth has no foreground");
    return double(wrong) / double(fg);
}

void EvalReport::finalize() {
    mean_j = mean_f = 0.0;
    std::map<int, std::pair<double, int>> by_distance;
    int scored = 0;
    for (auto& v : videos) {
        if (!v.frames.empty()) {
            double sj = 0, sf = 0;
            for (const auto& f : v.frames) sj += f.j, sf += f.f;
            v.mean_j = sj / double(v.frames.size());
            v.mean_f = sf / double(v.frames.size());
            mean_j += v.mean_j;
            mean_f += v.mean_f;
            ++scored;
        }
        for (const auto& [d, e] : v.error_by_distance) {
            by_distance[d].first += e;
            ++by_distance[d].second;
        }
    }
    if (scored) mean_j /= scored, mean_f /= scored;
    error_by_distance.clear();
    for (const auto& [d, acc] : by_distance) error_by_distance.emplace_back(d, acc.first / acc.second);
}

void EvalReport::write_csv(std::ostream& os) const {
    os << std::setprecision(6);
    if (protocol == "jumpcut") {
        os << "video,distance,error\n";
        for (const auto& v : videos)
            for (const auto& [d, e] : v.error_by_distance) os << v.name << ',' << d << ',' << e << '\n';
        return;
    }
    os << "video,frame,J,F\n";
    for (const auto& v : videos)
        for (const auto& f : v.frames) os << v.name << ',' << f.frame << ',' << f.j << ',' << f.f << '\n';
}

void EvalReport::write_table(std::ostream& os) const {
    os << std::fixed << std::setprecision(3);
    std::size_t wname = 5;
    for (const auto& v : videos) wname = std::max(wname, v.name.size());
    if (protocol == "jumpcut") {
        os << std::left << std::setw(int(wname)) << "Video";
        for (const auto& [d, e] : error_by_distance) os << "  d=" << std::setw(6) << d;
        os << '\n';
        for (const auto& v : videos) {
            os << std::setw(int(wname)) << v.name;
            for (const auto& [d, e] : v.error_by_distance) os << "  " << std::setw(8) << e * 100.0;
            os << '\n';
        }
        os << std::setw(int(wname)) << "Avg.";
        for (const auto& [d, e] : error_by_distance) os << "  " << std::setw(8) << e * 100.0;
        os << "\n(error rates in percent)\n";
        return;
    }
    os << std::left << std::setw(int(wname)) << "Video" << "  " << std::setw(7) << "J" << "  F\n";
    for (const auto& v : videos)
        os << std::setw(int(wname)) << v.name << "  " << std::setw(7) << v.mean_j << "  " << v.mean_f << '\n';
    os << std::setw(int(wname)) << "Avg." << "  " << std::setw(7) << mean_j << "  " << mean_f << '\n';
}

}  // namespace vcut
