#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/core.hpp"

namespace dtwin {

struct BackendFailure : Error { using Error::Error; };
struct UnknownBackendError : Error { using Error::Error; };

/// Head rotation in degrees; detected=false when no face was found.
struct HeadPose {
    double yaw = 0.0;    // horizontal rotation
    double pitch = 0.0;  // vertical rotation
    bool detected = false;
};

/// Closed face-outline polygon in pixel coordinates.
struct FaceContour {
    std::vector<std::array<double, 2>> points;
};

struct GenerationParams {
    std::uint64_t seed = 0;
    std::string prompt_prefix;
    int max_retries = 2;
};

/// Inpainted source frame carrying a new identity, with provenance.
struct DTwin {
    FrameImage image;
    std::uint64_t seed = 0;
    Caption caption_used;
    int source_frame_index = 0;
};

class PoseDetector {
public:
    virtual ~PoseDetector() = default;
    virtual HeadPose estimate(const FrameImage& frame) = 0;
};

class ContourDetector {
public:
    virtual ~ContourDetector() = default;
    // One contour per detected face; empty when no face is found.
    virtual std::vector<FaceContour> detect(const FrameImage& frame) = 0;
};

class Captioner {
public:
    virtual ~Captioner() = default;
    virtual std::string caption(const FrameImage& frame) = 0;
};

class Inpainter {
public:
    virtual ~Inpainter() = default;
    // Returns a full frame; the framework composites it through the mask.
    virtual FrameImage inpaint(const FrameImage& frame, const FaceMask& mask,
                               const Caption& caption, std::uint64_t seed) = 0;
};

class Reenactor {
public:
    virtual ~Reenactor() = default;
    virtual VideoClip reenact(const DTwin& dtwin, const VideoClip& driving) = 0;
};

class FaceCropper {
public:
    virtual ~FaceCropper() = default;
    // nullopt when no face is present in the frame.
    virtual std::optional<FrameImage> crop(const FrameImage& frame) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingKind kind() const = 0;
    virtual EmbeddingVector embed(const FrameImage& face) = 0;
};

/// Name -> factory maps for every adapter category. Immutable after startup.
class BackendRegistry {
public:
    template <class T>
    using Factory = std::function<std::unique_ptr<T>()>;

    void register_pose_detector(const std::string& name, Factory<PoseDetector> f);
    void register_contour_detector(const std::string& name, Factory<ContourDetector> f);
    void register_captioner(const std::string& name, Factory<Captioner> f);
    void register_inpainter(const std::string& name, Factory<Inpainter> f);
    void register_reenactor(const std::string& name, Factory<Reenactor> f);
    void register_face_cropper(const std::string& name, Factory<FaceCropper> f);
    void register_identity_embedder(const std::string& name, Factory<Embedder> f);
    void register_expression_embedder(const std::string& name, Factory<Embedder> f);

    std::unique_ptr<PoseDetector> make_pose_detector(const std::string& name) const;
    std::unique_ptr<ContourDetector> make_contour_detector(const std::string& name) const;
    std::unique_ptr<Captioner> make_captioner(const std::string& name) const;
    std::unique_ptr<Inpainter> make_inpainter(const std::string& name) const;
    std::unique_ptr<Reenactor> make_reenactor(const std::string& name) const;
    std::unique_ptr<FaceCropper> make_face_cropper(const std::string& name) const;
    std::unique_ptr<Embedder> make_identity_embedder(const std::string& name) const;
    std::unique_ptr<Embedder> make_expression_embedder(const std::string& name) const;

    bool has_pose_detector(const std::string& name) const { return pose_detectors_.count(name) > 0; }
    bool has_contour_detector(const std::string& name) const { return contour_detectors_.count(name) > 0; }
    bool has_captioner(const std::string& name) const { return captioners_.count(name) > 0; }
    bool has_inpainter(const std::string& name) const { return inpainters_.count(name) > 0; }
    bool has_reenactor(const std::string& name) const { return reenactors_.count(name) > 0; }
    bool has_face_cropper(const std::string& name) const { return face_croppers_.count(name) > 0; }
    bool has_identity_embedder(const std::string& name) const { return identity_embedders_.count(name) > 0; }
    bool has_expression_embedder(const std::string& name) const { return expression_embedders_.count(name) > 0; }

private:
    template <class T>
    static std::unique_ptr<T> resolve(const std::map<std::string, Factory<T>>& m,
                                      const std::string& name, const char* category);

    std::map<std::string, Factory<PoseDetector>> pose_detectors_;
    std::map<std::string, Factory<ContourDetector>> contour_detectors_;
    std::map<std::string, Factory<Captioner>> captioners_;
    std::map<std::string, Factory<Inpainter>> inpainters_;
    std::map<std::string, Factory<Reenactor>> reenactors_;
    std::map<std::string, Factory<FaceCropper>> face_croppers_;
    std::map<std::string, Factory<Embedder>> identity_embedders_;
    std::map<std::string, Factory<Embedder>> expression_embedders_;
};

/// Registry with the built-in synthetic backends already registered.
BackendRegistry& default_registry();

}  // namespace dtwin
