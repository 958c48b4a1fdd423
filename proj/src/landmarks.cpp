#include "stylize/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stylize {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

LandmarkSet synthesize_border_points(std::vector<Point2> face_points,
                                     int width, int height) {
    const double xmax = width - 1;
    const double ymax = height - 1;
    face_points.push_back({0.0, 0.0});
    face_points.push_back({xmax, 0.0});
    face_points.push_back({xmax, ymax});
    face_points.push_back({0.0, ymax});
    face_points.push_back({xmax / 2.0, 0.0});
    face_points.push_back({xmax, ymax / 2.0});
    face_points.push_back({xmax / 2.0, ymax});
    face_points.push_back({0.0, ymax / 2.0});
    return LandmarkSet{std::move(face_points)};
}

LandmarkSet load_landmarks(const std::string& path, int width, int height) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read landmark file: " + path);

    std::vector<Point2> pts;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::replace(t.begin(), t.end(), ',', ' ');
        std::istringstream ls(t);
        double x, y;
        if (!(ls >> x >> y))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'x y' pair");
        pts.push_back({x, y});
    }
    if (static_cast<int>(pts.size()) != kFaceLandmarkCount)
        throw std::runtime_error(path + ": expected " +
                                 std::to_string(kFaceLandmarkCount) +
                                 " landmarks, found " + std::to_string(pts.size()));
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const auto& p = pts[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::runtime_error(path + ": non-finite coordinate at landmark " +
                                     std::to_string(i));
        if (p.x < 0.0 || p.x > width - 1 || p.y < 0.0 || p.y > height - 1)
            throw std::runtime_error(path + ": landmark " + std::to_string(i) +
                                     " (" + std::to_string(p.x) + ", " +
                                     std::to_string(p.y) + ") outside image bounds");
    }
    return synthesize_border_points(std::move(pts), width, height);
}

LandmarkSet scale_landmarks(const LandmarkSet& lm, double scale,
                            int new_width, int new_height) {
    if (lm.size() != kFaceLandmarkCount + kBorderLandmarkCount)
        throw std::invalid_argument("scale_landmarks: malformed landmark set");
    std::vector<Point2> pts(lm.points.begin(),
                            lm.points.begin() + kFaceLandmarkCount);
    for (auto& p : pts) {
        p.x = std::clamp(p.x * scale, 0.0, static_cast<double>(new_width - 1));
        p.y = std::clamp(p.y * scale, 0.0, static_cast<double>(new_height - 1));
    }
    return synthesize_border_points(std::move(pts), new_width, new_height);
}

CollectionManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read manifest file: " + path);

    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    CollectionManifest m;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.rfind("style_name=", 0) == 0) {
            m.style_name = trim(t.substr(11));
            continue;
        }
        if (t.rfind("image=", 0) == 0) {
            auto sep = t.find(';');
            if (sep == std::string::npos || t.find("landmarks=", sep + 1) == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected 'image=...;landmarks=...'");
            std::string img = trim(t.substr(6, sep - 6));
            std::string lmk = trim(t.substr(t.find("landmarks=", sep) + 10));
            if (img.empty() || lmk.empty())
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": empty path in exemplar entry");
            m.exemplars.push_back({resolve(img), resolve(lmk)});
            continue;
        }
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": unrecognized manifest line");
    }
    if (m.exemplars.empty())
        throw std::runtime_error(path + ": no exemplars");
    return m;
}

} // namespace stylize
