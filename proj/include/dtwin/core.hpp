#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtwin {

// Base for all library errors; subclasses name the failure mode.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KindMismatchError : Error { using Error::Error; };
struct ZeroVectorError : Error { using Error::Error; };

constexpr int kIdentityDim = 512;
constexpr int kExpressionDim = 16;

/// One video frame: H x W x 3 RGB, intensities in [0,1].
struct FrameImage {
    int width = 0;
    int height = 0;
    int frame_index = 0;
    std::vector<float> pixels;  // row-major, 3 channels per pixel

    FrameImage() = default;
    FrameImage(int w, int h, int index = 0)
        : width(w), height(h), frame_index(index),
          pixels(static_cast<size_t>(w) * h * 3, 0.0f) {}

    float& at(int x, int y, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    float at(int x, int y, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    bool valid() const;
};

/// Ordered frame sequence with a frame rate.
struct VideoClip {
    std::string clip_id;
    double fps = 25.0;
    std::vector<FrameImage> frames;

    int length() const { return static_cast<int>(frames.size()); }
};

/// Binary raster marking the region to regenerate (1 = regenerate).
struct FaceMask {
    int width = 0;
    int height = 0;
    int dilation_px = 0;
    std::vector<std::uint8_t> bits;  // row-major, 0 or 1

    FaceMask() = default;
    FaceMask(int w, int h)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const {
        return bits[static_cast<size_t>(y) * width + x];
    }
    void set(int x, int y, std::uint8_t v) {
        bits[static_cast<size_t>(y) * width + x] = v;
    }
    size_t area() const;
};

enum class CaptionSource { generated, user_override };

struct Caption {
    std::string text;
    CaptionSource source = CaptionSource::generated;
};

enum class EmbeddingKind { identity, expression };

/// Fixed-dimension face descriptor: identity (512) or expression (16).
struct EmbeddingVector {
    EmbeddingKind kind = EmbeddingKind::identity;
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }
};

enum class DistanceMetric { cosine, euclidean };

constexpr int expected_dim(EmbeddingKind kind) {
    return kind == EmbeddingKind::identity ? kIdentityDim : kExpressionDim;
}

/// Returns the list of invariant violations; empty means the clip is valid.
std::vector<std::string> validate_clip(const VideoClip& clip);

/// Throws if the embedding breaks its dimension/finiteness invariants.
void check_embedding(const EmbeddingVector& v);

/// cosine: 1 - a.b / (|a||b|), in [0,2]; euclidean: |a - b|_2.
double embedding_distance(const EmbeddingVector& a, const EmbeddingVector& b,
                          DistanceMetric metric);

/// Scales to unit L2 norm; throws ZeroVectorError on a zero vector.
EmbeddingVector l2_normalize(const EmbeddingVector& v);

const char* to_string(DistanceMetric m);
const char* to_string(EmbeddingKind k);

}  // namespace dtwin
