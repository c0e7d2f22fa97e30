#pragma once

#include <string>
#include <vector>

#include "dtwin/backends.hpp"
#include "dtwin/core.hpp"
#include "dtwin/source_prep.hpp"

namespace dtwin {

struct EmptyCaptionError : Error { using Error::Error; };
struct MaskMismatchError : Error { using Error::Error; };
struct EmptyDrivingError : Error { using Error::Error; };

/// Runs the captioning backend; rejects blank captions.
Caption caption_image(const FrameImage& frame, Captioner& captioner);

/// Inpaints through the mask with a seed-incremented retry policy. The
/// backend output is composited so pixels outside the mask always equal the
/// source frame, whatever the backend returned.
DTwin inpaint_face(const FrameImage& frame, const FaceMask& mask,
                   const Caption& caption, const GenerationParams& params,
                   Inpainter& inpainter);

/// Drives the still twin image with the clip's motion.
VideoClip reenact(const DTwin& dtwin, const VideoClip& driving, Reenactor& reenactor);

struct DTwinBundle {
    DTwin dtwin;
    SourceSelection selection;
    FaceMask mask;
    Caption caption;
    std::vector<std::string> warnings;
};

/// Frontal-frame selection -> contour -> mask -> caption -> inpainting.
/// dilation_px < 0 selects the default bounding-box-derived dilation.
DTwinBundle generate_dtwin(const VideoClip& clip, const GenerationParams& params,
                           PoseDetector& pose_detector,
                           ContourDetector& contour_detector, Captioner& captioner,
                           Inpainter& inpainter, int dilation_px = -1);

}  // namespace dtwin
