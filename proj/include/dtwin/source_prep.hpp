#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtwin/backends.hpp"
#include "dtwin/core.hpp"

namespace dtwin {

struct NoDetectableFaceError : Error { using Error::Error; };
struct NoFaceDetectedError : Error { using Error::Error; };
struct DegenerateContourError : Error { using Error::Error; };

/// Outcome of the frontal-frame search over a clip.
struct SourceSelection {
    int frame_index = 0;
    std::vector<std::optional<double>> pose_scores;  // one per frame, absent = undetected
    int num_undetected = 0;
};

/// yaw^2 + pitch^2 in squared degrees; absent when no face was detected.
std::optional<double> pose_score(const HeadPose& pose);

/// Picks the frame with the minimal pose score; ties go to the lowest index.
/// Throws NoDetectableFaceError when no frame has a detectable face.
SourceSelection select_source_frame(const VideoClip& clip, PoseDetector& detector);

struct ContourResult {
    FaceContour contour;
    std::vector<std::string> warnings;
};

/// Largest-area face wins when several are detected; a warning is recorded.
ContourResult detect_face_contour(const FrameImage& frame, ContourDetector& detector);

/// Rasterizes the filled contour polygon (pixel-center even-odd rule,
/// boundary pixels included) and dilates it by dilation_px (Chebyshev).
FaceMask build_mask(const FaceContour& contour, int width, int height, int dilation_px);

/// Default dilation: ceil(3% of the contour bounding-box diagonal).
int default_dilation(const FaceContour& contour);

/// True when the pixel center (px + 0.5, py + 0.5) is inside or on the polygon.
bool pixel_center_in_polygon(const FaceContour& contour, int px, int py);

}  // namespace dtwin
