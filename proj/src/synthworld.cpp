#include "dtwin/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dtwin/generation.hpp"

namespace dtwin::synth {

namespace {

constexpr int kFiducialLen = 16;   // 2 magic + 14 payload pixels
constexpr int kPayloadLen = 14;    // 8 identity + yaw + pitch + 4 expression
constexpr std::array<int, 3> kMagicA{255, 0, 255};
constexpr std::array<int, 3> kMagicB{0, 255, 255};
constexpr int kPayloadBlueTag = 77;

int quant01(double v) {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}
double dequant01(int q) { return q / 255.0; }

int quant_yaw(double yaw) {
    return quant01((std::clamp(yaw, -kMaxYawDeg, kMaxYawDeg) + kMaxYawDeg) /
                   (2.0 * kMaxYawDeg));
}
double dequant_yaw(int q) { return dequant01(q) * 2.0 * kMaxYawDeg - kMaxYawDeg; }

int quant_pitch(double pitch) {
    return quant01((std::clamp(pitch, -kMaxPitchDeg, kMaxPitchDeg) + kMaxPitchDeg) /
                   (2.0 * kMaxPitchDeg));
}
double dequant_pitch(int q) { return dequant01(q) * 2.0 * kMaxPitchDeg - kMaxPitchDeg; }

struct Rgb { int r, g, b; };

void put(std::vector<std::uint8_t>& buf, int width, int x, int y, Rgb c) {
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    buf[i] = static_cast<std::uint8_t>(c.r);
    buf[i + 1] = static_cast<std::uint8_t>(c.g);
    buf[i + 2] = static_cast<std::uint8_t>(c.b);
}

void fill_ellipse(std::vector<std::uint8_t>& buf, int width, int height, double cx,
                  double cy, double ax, double ay, Rgb c) {
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ay)) - 1);
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + ay)) + 1);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - ax)) - 1);
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + ax)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x + 0.5 - cx) / ax;
            const double dy = (y + 0.5 - cy) / ay;
            if (dx * dx + dy * dy <= 1.0) put(buf, width, x, y, c);
        }
    }
}

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct FiducialHit {
    int x0 = 0, y0 = 0;
    IdentityLatent identity;
    MotionLatent motion;
    double ax = 0.0, by = 0.0;
};

int pixel_q(const FrameImage& frame, int x, int y, int c) {
    return static_cast<int>(std::lround(frame.at(x, y, c) * 255.0));
}

std::vector<FiducialHit> scan_fiducials(const FrameImage& frame) {
    std::vector<FiducialHit> hits;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x + kFiducialLen <= frame.width; ++x) {
            if (pixel_q(frame, x, y, 0) != kMagicA[0] ||
                pixel_q(frame, x, y, 1) != kMagicA[1] ||
                pixel_q(frame, x, y, 2) != kMagicA[2] ||
                pixel_q(frame, x + 1, y, 0) != kMagicB[0] ||
                pixel_q(frame, x + 1, y, 1) != kMagicB[1] ||
                pixel_q(frame, x + 1, y, 2) != kMagicB[2]) {
                continue;
            }
            std::array<int, kPayloadLen> q{};
            bool valid = true;
            for (int i = 0; i < kPayloadLen && valid; ++i) {
                const int px = x + 2 + i;
                q[i] = pixel_q(frame, px, y, 0);
                if (pixel_q(frame, px, y, 1) != 255 - q[i]) valid = false;
                if (i >= 2 && pixel_q(frame, px, y, 2) != kPayloadBlueTag) valid = false;
            }
            if (!valid) continue;

            FiducialHit hit;
            hit.x0 = x;
            hit.y0 = y;
            for (int i = 0; i < kIdentityLatentDim; ++i) {
                hit.identity.z[i] = dequant01(q[i]);
            }
            hit.motion.yaw = dequant_yaw(q[8]);
            hit.motion.pitch = dequant_pitch(q[9]);
            for (int i = 0; i < kExpressionLatentDim; ++i) {
                hit.motion.expression[i] = dequant01(q[10 + i]);
            }
            hit.ax = pixel_q(frame, x + 2, y, 2);
            hit.by = pixel_q(frame, x + 3, y, 2);
            hits.push_back(hit);
            x += kFiducialLen - 1;
        }
    }
    return hits;
}

FaceContour ellipse_contour(double cx, double cy, double ax, double by, int width,
                            int height) {
    FaceContour contour;
    constexpr int kVertices = 36;
    contour.points.reserve(kVertices);
    for (int i = 0; i < kVertices; ++i) {
        const double theta = 2.0 * M_PI * i / kVertices;
        double x = cx + ax * std::cos(theta);
        double y = cy + by * std::sin(theta);
        x = std::clamp(x, 0.0, static_cast<double>(width));
        y = std::clamp(y, 0.0, static_cast<double>(height));
        contour.points.push_back({x, y});
    }
    return contour;
}

double latent_distance(const IdentityLatent& a, const IdentityLatent& b) {
    double acc = 0.0;
    for (int i = 0; i < kIdentityLatentDim; ++i) {
        const double d = a.z[i] - b.z[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

IdentityLatent quantize(const IdentityLatent& identity) {
    IdentityLatent out;
    for (int i = 0; i < kIdentityLatentDim; ++i) {
        out.z[i] = dequant01(quant01(identity.z[i]));
    }
    return out;
}

MotionLatent quantize(const MotionLatent& motion) {
    MotionLatent out;
    out.yaw = dequant_yaw(quant_yaw(motion.yaw));
    out.pitch = dequant_pitch(quant_pitch(motion.pitch));
    for (int i = 0; i < kExpressionLatentDim; ++i) {
        out.expression[i] = dequant01(quant01(motion.expression[i]));
    }
    return out;
}

AppearanceAttrs derive_attrs(const IdentityLatent& identity) {
    AppearanceAttrs attrs;
    attrs.glasses = identity.z[0] > 0.5;
    attrs.round_head = identity.z[1] > 0.5;
    attrs.light_skin = identity.z[2] > 0.5;
    return attrs;
}

FaceGeometry face_geometry(const MotionLatent& motion, int width, int height) {
    FaceGeometry g;
    g.cx = width / 2.0 + (motion.yaw / kMaxYawDeg) * (width / 8.0);
    g.cy = height / 2.0 + (motion.pitch / kMaxPitchDeg) * (height / 12.0);
    g.ax = width / 4.0;
    g.by = height / 3.0;
    const double gaze_shift = (motion.yaw / kMaxYawDeg) * 0.15 * g.ax;
    g.eye_left_x = g.cx - 0.45 * g.ax + gaze_shift;
    g.eye_right_x = g.cx + 0.45 * g.ax + gaze_shift;
    g.eye_y = g.cy - 0.30 * g.by;
    return g;
}

FrameImage render_frame(const IdentityLatent& identity, const MotionLatent& motion,
                        int width, int height, int frame_index) {
    if (width < kMinRenderDim || height < kMinRenderDim) {
        throw DimsTooSmallError("render dims must be at least 32x32, got " +
                                std::to_string(width) + "x" + std::to_string(height));
    }
    const IdentityLatent qi = quantize(identity);
    const MotionLatent qm = quantize(motion);
    const AppearanceAttrs attrs = derive_attrs(qi);
    const FaceGeometry g = face_geometry(qm, width, height);

    std::vector<std::uint8_t> buf(static_cast<size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            put(buf, width, x, y, Rgb{210, 215, 225});
        }
    }

    const Rgb skin = attrs.light_skin ? Rgb{235, 205, 180} : Rgb{150, 110, 90};
    const double head_by = attrs.round_head ? g.by * 0.9 : g.by;
    fill_ellipse(buf, width, height, g.cx, g.cy, g.ax, head_by, skin);

    // Eyes; openness is driven by expression channel 2.
    const double eye_r = std::max(1.0, width / 24.0);
    const double eye_ry = std::max(1.0, eye_r * (0.3 + 0.7 * qm.expression[2]));
    fill_ellipse(buf, width, height, g.eye_left_x, g.eye_y, eye_r, eye_ry, Rgb{30, 30, 30});
    fill_ellipse(buf, width, height, g.eye_right_x, g.eye_y, eye_r, eye_ry, Rgb{30, 30, 30});

    if (attrs.glasses) {
        const int gy0 = static_cast<int>(g.eye_y - eye_r - 1);
        const int gy1 = static_cast<int>(g.eye_y + eye_r + 1);
        for (const double ex : {g.eye_left_x, g.eye_right_x}) {
            const int gx0 = static_cast<int>(ex - eye_r - 1);
            const int gx1 = static_cast<int>(ex + eye_r + 1);
            for (int x = std::max(0, gx0); x <= std::min(width - 1, gx1); ++x) {
                if (gy0 >= 0) put(buf, width, x, gy0, Rgb{60, 60, 60});
                if (gy1 < height) put(buf, width, x, gy1, Rgb{60, 60, 60});
            }
            for (int y = std::max(0, gy0); y <= std::min(height - 1, gy1); ++y) {
                if (gx0 >= 0) put(buf, width, gx0, y, Rgb{60, 60, 60});
                if (gx1 < width) put(buf, width, gx1, y, Rgb{60, 60, 60});
            }
        }
    }

    // Brows move with expression channel 1.
    const int brow_y = static_cast<int>(g.eye_y - 2.0 * eye_ry - 1.0 - 3.0 * qm.expression[1]);
    if (brow_y >= 0 && brow_y < height) {
        for (const double ex : {g.eye_left_x, g.eye_right_x}) {
            for (int x = static_cast<int>(ex - eye_r); x <= static_cast<int>(ex + eye_r); ++x) {
                if (x >= 0 && x < width) put(buf, width, x, brow_y, Rgb{70, 50, 40});
            }
        }
    }

    // Mouth: channel 0 opens it, channel 3 widens it.
    const double mouth_cy = g.cy + 0.45 * head_by;
    const double mouth_ax = g.ax * 0.35 * (0.5 + 0.5 * qm.expression[3]);
    const double mouth_ay = std::max(1.0, head_by * 0.12 * (0.15 + 0.85 * qm.expression[0]));
    fill_ellipse(buf, width, height, g.cx, mouth_cy, mouth_ax, mouth_ay, Rgb{180, 70, 70});

    // Fiducial strip through the face center: 2 magic pixels then the
    // quantized payload. Blue of the first two payload pixels carries the
    // head-ellipse semi-axes for the synthetic contour detector.
    std::array<int, kPayloadLen> q{};
    for (int i = 0; i < kIdentityLatentDim; ++i) q[i] = quant01(qi.z[i]);
    q[8] = quant_yaw(qm.yaw);
    q[9] = quant_pitch(qm.pitch);
    for (int i = 0; i < kExpressionLatentDim; ++i) q[10 + i] = quant01(qm.expression[i]);

    const int fy = static_cast<int>(std::lround(g.cy));
    const int fx = static_cast<int>(std::lround(g.cx)) - kFiducialLen / 2;
    put(buf, width, fx, fy, Rgb{kMagicA[0], kMagicA[1], kMagicA[2]});
    put(buf, width, fx + 1, fy, Rgb{kMagicB[0], kMagicB[1], kMagicB[2]});
    for (int i = 0; i < kPayloadLen; ++i) {
        int blue = kPayloadBlueTag;
        if (i == 0) blue = static_cast<int>(std::lround(g.ax));
        if (i == 1) blue = static_cast<int>(std::lround(head_by));
        put(buf, width, fx + 2 + i, fy, Rgb{q[i], 255 - q[i], blue});
    }

    FrameImage frame(width, height, frame_index);
    for (size_t i = 0; i < buf.size(); ++i) {
        frame.pixels[i] = buf[i] / 255.0f;
    }
    return frame;
}

std::optional<std::pair<IdentityLatent, MotionLatent>> decode_latents(
    const FrameImage& frame) {
    const auto hits = scan_fiducials(frame);
    if (hits.empty()) return std::nullopt;
    return std::make_pair(hits.front().identity, hits.front().motion);
}

std::vector<std::pair<IdentityLatent, MotionLatent>> decode_all_latents(
    const FrameImage& frame) {
    std::vector<std::pair<IdentityLatent, MotionLatent>> out;
    for (const auto& hit : scan_fiducials(frame)) {
        out.emplace_back(hit.identity, hit.motion);
    }
    return out;
}

IdentityLatent draw_identity(std::uint64_t seed) {
    std::mt19937_64 rng(mix(seed ^ 0x1d2e3f4a5b6c7d8eULL));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    IdentityLatent identity;
    for (auto& z : identity.z) z = uniform(rng);
    return identity;
}

AvatarTrajectory make_trajectory(BehaviorTag behavior, int num_frames,
                                 std::uint64_t seed) {
    if (num_frames < 1) throw Error("trajectory needs at least one frame");

    AvatarTrajectory traj;
    traj.identity = draw_identity(seed);
    traj.attrs = derive_attrs(quantize(traj.identity));

    std::mt19937_64 rng(mix(seed ^ (0x9ULL + static_cast<std::uint64_t>(behavior))));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::array<double, kExpressionLatentDim> base_expr{};
    for (auto& e : base_expr) e = uniform(rng);
    std::array<double, kExpressionLatentDim> phase{};
    for (auto& p : phase) p = uniform(rng) * 2.0 * M_PI;

    traj.motion.reserve(num_frames);
    const double T = static_cast<double>(num_frames);
    for (int t = 0; t < num_frames; ++t) {
        MotionLatent m;
        m.expression = base_expr;
        switch (behavior) {
            case BehaviorTag::gaze_variation:
                m.yaw = 30.0 * std::sin(2.0 * M_PI * t / T);
                m.pitch = 0.0;
                break;
            case BehaviorTag::expression_variation:
                m.yaw = 0.0;
                m.pitch = 0.0;
                for (int j = 0; j < kExpressionLatentDim; ++j) {
                    m.expression[j] = 0.5 + 0.5 * std::sin(2.0 * M_PI * t / T + phase[j]);
                }
                break;
            case BehaviorTag::speech_head_motion:
                m.yaw = 8.0 * std::sin(2.0 * M_PI * t / T);
                m.pitch = 5.0 * std::sin(4.0 * M_PI * t / T);
                m.expression[0] = 0.5 + 0.5 * std::sin(2.0 * M_PI * 0.45 * t);
                break;
            case BehaviorTag::rapid_pose_change:
                if (t == 0) {
                    m.yaw = 0.0;
                    m.pitch = 0.0;
                } else {
                    m.yaw = (t % 2 == 1) ? 25.0 : -25.0;
                    m.pitch = (t % 2 == 1) ? 12.0 : -12.0;
                }
                break;
            case BehaviorTag::unspecified:
                m.yaw = 10.0 * std::sin(2.0 * M_PI * t / T);
                m.pitch = 6.0 * std::sin(2.0 * M_PI * t / T);
                m.expression[0] = 0.5 + 0.5 * std::sin(2.0 * M_PI * t / T);
                break;
        }
        m.yaw = std::clamp(m.yaw, -kMaxYawDeg, kMaxYawDeg);
        m.pitch = std::clamp(m.pitch, -kMaxPitchDeg, kMaxPitchDeg);
        for (auto& e : m.expression) e = std::clamp(e, 0.0, 1.0);
        traj.motion.push_back(m);
    }
    return traj;
}

VideoClip render_clip(const AvatarTrajectory& trajectory, int width, int height,
                      double fps, const std::string& clip_id) {
    VideoClip clip;
    clip.clip_id = clip_id;
    clip.fps = fps;
    clip.frames.reserve(trajectory.motion.size());
    for (size_t t = 0; t < trajectory.motion.size(); ++t) {
        clip.frames.push_back(render_frame(trajectory.identity, trajectory.motion[t],
                                           width, height, static_cast<int>(t)));
    }
    return clip;
}

std::string caption_for(const AppearanceAttrs& attrs) {
    std::string text = "a person with ";
    text += attrs.round_head ? "a round head" : "an oval head";
    text += attrs.light_skin ? " and light skin" : " and dark skin";
    if (attrs.glasses) text += ", wearing glasses";
    return text;
}

EmbeddingVector identity_embedding(const IdentityLatent& identity) {
    EmbeddingVector v;
    v.kind = EmbeddingKind::identity;
    v.values.assign(kIdentityDim, 0.0);
    for (int i = 0; i < kIdentityLatentDim; ++i) v.values[i] = identity.z[i];
    return v;
}

EmbeddingVector expression_embedding(const MotionLatent& motion) {
    EmbeddingVector v;
    v.kind = EmbeddingKind::expression;
    v.values.assign(kExpressionDim, 0.0);
    v.values[0] = motion.yaw / kMaxYawDeg;
    v.values[1] = motion.pitch / kMaxPitchDeg;
    for (int i = 0; i < kExpressionLatentDim; ++i) {
        v.values[2 + i] = motion.expression[i];
    }
    return v;
}

namespace {

class SynthPoseDetector final : public PoseDetector {
public:
    HeadPose estimate(const FrameImage& frame) override {
        const auto decoded = decode_latents(frame);
        if (!decoded) return HeadPose{};
        return HeadPose{decoded->second.yaw, decoded->second.pitch, true};
    }
};

class SynthContourDetector final : public ContourDetector {
public:
    std::vector<FaceContour> detect(const FrameImage& frame) override {
        std::vector<FaceContour> contours;
        for (const auto& hit : scan_fiducials(frame)) {
            const double cx = hit.x0 + kFiducialLen / 2.0;
            const double cy = hit.y0;
            contours.push_back(
                ellipse_contour(cx, cy, hit.ax, hit.by, frame.width, frame.height));
        }
        return contours;
    }
};

class SynthCaptioner final : public Captioner {
public:
    std::string caption(const FrameImage& frame) override {
        const auto decoded = decode_latents(frame);
        if (!decoded) {
            throw BackendFailure("synthetic captioner found no face fiducials");
        }
        return caption_for(derive_attrs(decoded->first));
    }
};

class SynthInpainter final : public Inpainter {
public:
    FrameImage inpaint(const FrameImage& frame, const FaceMask& mask,
                       const Caption& caption, std::uint64_t seed) override {
        (void)caption;  // appearance is carried by the latents, not the prompt
        (void)mask;     // compositing is the framework's job
        const auto decoded = decode_latents(frame);
        if (!decoded) {
            throw BackendFailure("synthetic inpainter found no face fiducials");
        }
        const IdentityLatent source = decoded->first;
        IdentityLatent fresh;
        std::uint64_t draw_seed = seed;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 1000) {
                throw BackendFailure("could not draw a distant identity latent");
            }
            fresh = quantize(draw_identity(draw_seed));
            if (latent_distance(fresh, source) >= kMinIdentityDistance) break;
            draw_seed = mix(draw_seed + 1);
        }
        return render_frame(fresh, decoded->second, frame.width, frame.height,
                            frame.frame_index);
    }
};

class SynthReenactor final : public Reenactor {
public:
    VideoClip reenact(const DTwin& dtwin, const VideoClip& driving) override {
        const auto decoded = decode_latents(dtwin.image);
        if (!decoded) {
            throw BackendFailure("synthetic reenactor found no fiducials in the twin image");
        }
        const IdentityLatent identity = decoded->first;

        VideoClip out;
        out.clip_id = driving.clip_id;
        out.fps = driving.fps;
        out.frames.reserve(driving.frames.size());
        MotionLatent last_motion;  // neutral fallback for undetected frames
        for (size_t t = 0; t < driving.frames.size(); ++t) {
            if (const auto m = decode_latents(driving.frames[t])) {
                last_motion = m->second;
            }
            out.frames.push_back(render_frame(identity, last_motion,
                                              dtwin.image.width, dtwin.image.height,
                                              static_cast<int>(t)));
        }
        return out;
    }
};

class SynthFaceCropper final : public FaceCropper {
public:
    std::optional<FrameImage> crop(const FrameImage& frame) override {
        // The schematic frame is already face-sized; the crop is the frame
        // itself, gated on fiducial presence.
        if (!decode_latents(frame)) return std::nullopt;
        return frame;
    }
};

class SynthIdentityEmbedder final : public Embedder {
public:
    EmbeddingKind kind() const override { return EmbeddingKind::identity; }
    EmbeddingVector embed(const FrameImage& face) override {
        const auto decoded = decode_latents(face);
        if (!decoded) {
            throw BackendFailure("synthetic identity embedder found no fiducials");
        }
        return identity_embedding(decoded->first);
    }
};

class SynthExpressionEmbedder final : public Embedder {
public:
    EmbeddingKind kind() const override { return EmbeddingKind::expression; }
    EmbeddingVector embed(const FrameImage& face) override {
        const auto decoded = decode_latents(face);
        if (!decoded) {
            throw BackendFailure("synthetic expression embedder found no fiducials");
        }
        return expression_embedding(decoded->second);
    }
};

}  // namespace

void register_synthetic_backends(BackendRegistry& registry) {
    registry.register_pose_detector("synthetic", [] { return std::make_unique<SynthPoseDetector>(); });
    registry.register_contour_detector("synthetic", [] { return std::make_unique<SynthContourDetector>(); });
    registry.register_captioner("synthetic", [] { return std::make_unique<SynthCaptioner>(); });
    registry.register_inpainter("synthetic", [] { return std::make_unique<SynthInpainter>(); });
    registry.register_reenactor("synthetic", [] { return std::make_unique<SynthReenactor>(); });
    registry.register_face_cropper("synthetic", [] { return std::make_unique<SynthFaceCropper>(); });
    registry.register_identity_embedder("synthetic", [] { return std::make_unique<SynthIdentityEmbedder>(); });
    registry.register_expression_embedder("synthetic", [] { return std::make_unique<SynthExpressionEmbedder>(); });
}

}  // namespace dtwin::synth
