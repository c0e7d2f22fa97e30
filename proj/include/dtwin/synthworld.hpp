#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtwin/backends.hpp"
#include "dtwin/core.hpp"
#include "dtwin/media_io.hpp"

namespace dtwin::synth {

struct DimsTooSmallError : Error { using Error::Error; };

constexpr int kIdentityLatentDim = 8;
constexpr int kExpressionLatentDim = 4;
constexpr int kMinRenderDim = 32;
constexpr double kMaxYawDeg = 45.0;
constexpr double kMaxPitchDeg = 30.0;
// Minimum latent-space separation the synthetic inpainter enforces between
// the new identity and the source identity.
constexpr double kMinIdentityDistance = 0.5;
// 8-bit fiducial quantization step; the global tolerance for synthetic tests.
constexpr double kQuantStep = 1.0 / 255.0;

/// 8-d identity code, entries in [0,1].
struct IdentityLatent {
    std::array<double, kIdentityLatentDim> z{};
};

/// Head pose plus a 4-d expression code.
struct MotionLatent {
    double yaw = 0.0;    // [-45, 45] degrees
    double pitch = 0.0;  // [-30, 30] degrees
    std::array<double, kExpressionLatentDim> expression{};  // entries in [0,1]
};

struct AppearanceAttrs {
    bool glasses = false;
    bool round_head = false;
    bool light_skin = true;
};

struct AvatarTrajectory {
    IdentityLatent identity;
    std::vector<MotionLatent> motion;
    AppearanceAttrs attrs;
};

/// Head-ellipse placement for a given motion; shared by the renderer and the
/// synthetic contour detector.
struct FaceGeometry {
    double cx = 0.0, cy = 0.0;  // ellipse center
    double ax = 0.0, by = 0.0;  // semi-axes
    double eye_left_x = 0.0, eye_right_x = 0.0, eye_y = 0.0;
};

FaceGeometry face_geometry(const MotionLatent& motion, int width, int height);

/// Appearance attributes are a fixed function of the identity latent, so the
/// renderer and the captioner always agree.
AppearanceAttrs derive_attrs(const IdentityLatent& identity);

/// Draws the schematic face and writes both latents into a fiducial pixel
/// strip (8-bit quantized). Deterministic; minimum dims 32x32.
FrameImage render_frame(const IdentityLatent& identity, const MotionLatent& motion,
                        int width, int height, int frame_index = 0);

/// Exact inverse of render_frame's fiducial encoding; absent when the frame
/// carries no valid fiducials (the synthetic "no face" signal).
std::optional<std::pair<IdentityLatent, MotionLatent>> decode_latents(
    const FrameImage& frame);

/// All fiducial strips in the frame, for multi-face test scenes.
std::vector<std::pair<IdentityLatent, MotionLatent>> decode_all_latents(
    const FrameImage& frame);

IdentityLatent quantize(const IdentityLatent& identity);
MotionLatent quantize(const MotionLatent& motion);

AvatarTrajectory make_trajectory(BehaviorTag behavior, int num_frames,
                                 std::uint64_t seed);

VideoClip render_clip(const AvatarTrajectory& trajectory, int width, int height,
                      double fps, const std::string& clip_id);

/// Deterministic identity draw used by make_trajectory and the inpainter.
IdentityLatent draw_identity(std::uint64_t seed);

std::string caption_for(const AppearanceAttrs& attrs);

EmbeddingVector identity_embedding(const IdentityLatent& identity);
EmbeddingVector expression_embedding(const MotionLatent& motion);

/// Registers every synthetic adapter under the name "synthetic".
void register_synthetic_backends(BackendRegistry& registry);

}  // namespace dtwin::synth
