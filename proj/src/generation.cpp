#include "dtwin/generation.hpp"

#include <algorithm>
#include <cctype>

namespace dtwin {

namespace {

std::string trimmed(const std::string& s) {
    auto begin = s.begin();
    auto end = s.end();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
    return std::string(begin, end);
}

}  // namespace

Caption caption_image(const FrameImage& frame, Captioner& captioner) {
    const std::string text = trimmed(captioner.caption(frame));
    if (text.empty()) {
        throw EmptyCaptionError("captioning backend returned a blank caption");
    }
    return Caption{text, CaptionSource::generated};
}

DTwin inpaint_face(const FrameImage& frame, const FaceMask& mask,
                   const Caption& caption, const GenerationParams& params,
                   Inpainter& inpainter) {
    if (mask.width != frame.width || mask.height != frame.height) {
        throw MaskMismatchError("mask dimensions do not match the frame");
    }
    if (mask.area() == 0) {
        throw MaskMismatchError("mask marks no pixels to regenerate");
    }
    if (trimmed(caption.text).empty()) {
        throw EmptyCaptionError("inpainting requires a non-empty caption");
    }

    FrameImage generated;
    std::uint64_t used_seed = params.seed;
    std::string last_error;
    bool ok = false;
    for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
        used_seed = params.seed + static_cast<std::uint64_t>(attempt);
        try {
            generated = inpainter.inpaint(frame, mask, caption, used_seed);
            ok = true;
            break;
        } catch (const BackendFailure& e) {
            last_error = e.what();
        }
    }
    if (!ok) {
        throw BackendFailure("inpainting failed after " +
                             std::to_string(params.max_retries + 1) +
                             " attempts; last error: " + last_error);
    }
    if (generated.width != frame.width || generated.height != frame.height) {
        throw BackendFailure("inpainting backend returned wrong dimensions");
    }

    DTwin dtwin;
    dtwin.image = frame;
    dtwin.image.frame_index = frame.frame_index;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            if (!mask.at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                dtwin.image.at(x, y, c) = generated.at(x, y, c);
            }
        }
    }
    dtwin.seed = used_seed;
    dtwin.caption_used = caption;
    dtwin.source_frame_index = frame.frame_index;
    return dtwin;
}

VideoClip reenact(const DTwin& dtwin, const VideoClip& driving, Reenactor& reenactor) {
    if (driving.frames.empty()) {
        throw EmptyDrivingError("driving clip has no frames");
    }
    if (!dtwin.image.valid()) {
        throw Error("twin image is not a valid frame");
    }
    VideoClip out = reenactor.reenact(dtwin, driving);
    if (out.frames.size() != driving.frames.size()) {
        throw BackendFailure("re-enactment backend changed the frame count");
    }
    out.fps = driving.fps;
    return out;
}

DTwinBundle generate_dtwin(const VideoClip& clip, const GenerationParams& params,
                           PoseDetector& pose_detector,
                           ContourDetector& contour_detector, Captioner& captioner,
                           Inpainter& inpainter, int dilation_px) {
    DTwinBundle bundle;
    bundle.selection = select_source_frame(clip, pose_detector);
    const FrameImage& source = clip.frames[bundle.selection.frame_index];

    auto contour_result = detect_face_contour(source, contour_detector);
    bundle.warnings = contour_result.warnings;

    const int dilation =
        dilation_px >= 0 ? dilation_px : default_dilation(contour_result.contour);
    bundle.mask = build_mask(contour_result.contour, source.width, source.height, dilation);

    bundle.caption = caption_image(source, captioner);
    if (!params.prompt_prefix.empty()) {
        bundle.caption.text = params.prompt_prefix + " " + bundle.caption.text;
    }

    bundle.dtwin = inpaint_face(source, bundle.mask, bundle.caption, params, inpainter);
    return bundle;
}

}  // namespace dtwin
