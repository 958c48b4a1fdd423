#pragma once

#include <string>
#include <vector>

namespace stylize {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr int kFaceLandmarkCount = 68;
inline constexpr int kBorderLandmarkCount = 8;

/// Ordered landmark list: 68 facial points followed by 8 synthesized frame
/// points (corners TL,TR,BR,BL then edge midpoints T,R,B,L). Index i refers
/// to the same anatomical point across every image in a run.
struct LandmarkSet {
    std::vector<Point2> points;

    int size() const { return static_cast<int>(points.size()); }
    const Point2& operator[](int i) const { return points[i]; }
};

/// Parse 68 "x y" (or "x,y") pairs, one per line. Coordinates must be finite
/// and inside [0,width-1] x [0,height-1]; violations are reported with their
/// point index. The 8 frame points for the given image size are appended.
LandmarkSet load_landmarks(const std::string& path, int width, int height);

/// Append the 8 frame points to a validated 68-point list.
LandmarkSet synthesize_border_points(std::vector<Point2> face_points,
                                     int width, int height);

/// Scale facial coordinates by `scale` and re-synthesize the frame points
/// for the scaled image size.
LandmarkSet scale_landmarks(const LandmarkSet& lm, double scale,
                            int new_width, int new_height);

/// One style collection: a name plus (image, landmarks) path pairs.
struct CollectionManifest {
    std::string style_name;
    struct Entry {
        std::string image_path;
        std::string landmark_path;
    };
    std::vector<Entry> exemplars;

    int exemplar_count() const { return static_cast<int>(exemplars.size()); }
};

/// Parse a manifest file:
///   style_name=<name>
///   image=<path>;landmarks=<path>     (one line per exemplar)
/// Relative paths are resolved against the manifest's directory.
/// '#' lines and blank lines are ignored. At least one exemplar is required.
CollectionManifest load_manifest(const std::string& path);

} // namespace stylize
