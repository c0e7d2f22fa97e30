#include "dtwin/source_prep.hpp"

#include <algorithm>
#include <cmath>

namespace dtwin {

std::optional<double> pose_score(const HeadPose& pose) {
    if (!pose.detected) return std::nullopt;
    return pose.yaw * pose.yaw + pose.pitch * pose.pitch;
}

SourceSelection select_source_frame(const VideoClip& clip, PoseDetector& detector) {
    SourceSelection sel;
    sel.pose_scores.reserve(clip.frames.size());

    std::optional<double> best;
    int best_index = -1;
    for (size_t i = 0; i < clip.frames.size(); ++i) {
        const auto score = pose_score(detector.estimate(clip.frames[i]));
        sel.pose_scores.push_back(score);
        if (!score) {
            ++sel.num_undetected;
            continue;
        }
        if (!best || *score < *best) {
            best = score;
            best_index = static_cast<int>(i);
        }
    }
    if (best_index < 0) {
        throw NoDetectableFaceError("no frame with a detectable face in clip '" +
                                    clip.clip_id + "'");
    }
    sel.frame_index = best_index;
    return sel;
}

namespace {

double polygon_area(const FaceContour& contour) {
    double acc = 0.0;
    const auto& pts = contour.points;
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(acc);
}

double bbox_area(const FaceContour& contour) {
    double min_x = contour.points.front()[0], max_x = min_x;
    double min_y = contour.points.front()[1], max_y = min_y;
    for (const auto& p : contour.points) {
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
    }
    return (max_x - min_x) * (max_y - min_y);
}

bool on_segment(double px, double py, const std::array<double, 2>& a,
                const std::array<double, 2>& b) {
    const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
    if (cross != 0.0) return false;
    return px >= std::min(a[0], b[0]) && px <= std::max(a[0], b[0]) &&
           py >= std::min(a[1], b[1]) && py <= std::max(a[1], b[1]);
}

}  // namespace

bool pixel_center_in_polygon(const FaceContour& contour, int px, int py) {
    const double x = px + 0.5;
    const double y = py + 0.5;
    const auto& pts = contour.points;

    for (size_t i = 0; i < pts.size(); ++i) {
        if (on_segment(x, y, pts[i], pts[(i + 1) % pts.size()])) return true;
    }
    // Even-odd rule with a horizontal ray towards +x.
    bool inside = false;
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        if ((a[1] > y) != (b[1] > y)) {
            const double x_cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if (x < x_cross) inside = !inside;
        }
    }
    return inside;
}

ContourResult detect_face_contour(const FrameImage& frame, ContourDetector& detector) {
    auto contours = detector.detect(frame);
    if (contours.empty()) {
        throw NoFaceDetectedError("no face contour detected in frame " +
                                  std::to_string(frame.frame_index));
    }
    ContourResult result;
    if (contours.size() == 1) {
        result.contour = std::move(contours.front());
        return result;
    }
    size_t largest = 0;
    double largest_area = -1.0;
    for (size_t i = 0; i < contours.size(); ++i) {
        const double area = bbox_area(contours[i]);
        if (area > largest_area) {
            largest_area = area;
            largest = i;
        }
    }
    result.warnings.push_back(std::to_string(contours.size()) +
                              " faces detected; using the largest one");
    result.contour = std::move(contours[largest]);
    return result;
}

FaceMask build_mask(const FaceContour& contour, int width, int height, int dilation_px) {
    if (contour.points.size() < 3) {
        throw DegenerateContourError("contour needs at least 3 points");
    }
    if (dilation_px < 0) {
        throw Error("dilation_px must be non-negative");
    }
    for (const auto& p : contour.points) {
        if (p[0] < 0.0 || p[0] > width || p[1] < 0.0 || p[1] > height) {
            throw Error("contour point outside frame bounds");
        }
    }
    if (polygon_area(contour) == 0.0) {
        throw DegenerateContourError("zero-area contour polygon");
    }

    FaceMask mask(width, height);
    mask.dilation_px = dilation_px;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (pixel_center_in_polygon(contour, x, y)) mask.set(x, y, 1);
        }
    }
    if (mask.area() == 0) {
        throw DegenerateContourError("contour covers no pixel centers");
    }

    // Chebyshev dilation, one ring per iteration.
    for (int step = 0; step < dilation_px; ++step) {
        FaceMask grown = mask;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                if (mask.at(x, y)) continue;
                bool hit = false;
                for (int dy = -1; dy <= 1 && !hit; ++dy) {
                    for (int dx = -1; dx <= 1 && !hit; ++dx) {
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx >= 0 && nx < width && ny >= 0 && ny < height &&
                            mask.at(nx, ny)) {
                            hit = true;
                        }
                    }
                }
                if (hit) grown.set(x, y, 1);
            }
        }
        mask = std::move(grown);
        mask.dilation_px = dilation_px;
    }
    return mask;
}

int default_dilation(const FaceContour& contour) {
    double min_x = contour.points.front()[0], max_x = min_x;
    double min_y = contour.points.front()[1], max_y = min_y;
    for (const auto& p : contour.points) {
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
    }
    const double diag = std::hypot(max_x - min_x, max_y - min_y);
    return static_cast<int>(std::ceil(0.03 * diag));
}

}  // namespace dtwin
