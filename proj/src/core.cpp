#include "dtwin/core.hpp"

#include <algorithm>
#include <numeric>

namespace dtwin {

bool FrameImage::valid() const {
    if (width < 1 || height < 1) return false;
    if (pixels.size() != static_cast<size_t>(width) * height * 3) return false;
    return std::all_of(pixels.begin(), pixels.end(), [](float v) {
        return std::isfinite(v) && v >= 0.0f && v <= 1.0f;
    });
}

size_t FaceMask::area() const {
    return static_cast<size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<std::string> validate_clip(const VideoClip& clip) {
    std::vector<std::string> violations;
    if (clip.frames.empty()) {
        violations.push_back("empty clip");
    }
    if (!(clip.fps > 0.0) || !std::isfinite(clip.fps)) {
        violations.push_back("non-positive fps");
    }
    if (!clip.frames.empty()) {
        const int h = clip.frames.front().height;
        const int w = clip.frames.front().width;
        bool dims_consistent = true;
        for (const auto& f : clip.frames) {
            if (f.height != h || f.width != w) dims_consistent = false;
        }
        if (!dims_consistent) violations.push_back("inconsistent frame dimensions");
        for (size_t i = 0; i < clip.frames.size(); ++i) {
            if (!clip.frames[i].valid()) {
                violations.push_back("invalid frame at index " + std::to_string(i));
            }
        }
    }
    return violations;
}

void check_embedding(const EmbeddingVector& v) {
    if (v.dim() != expected_dim(v.kind)) {
        throw Error(std::string("embedding dimension ") + std::to_string(v.dim()) +
                    " does not match kind " + to_string(v.kind));
    }
    for (double x : v.values) {
        if (!std::isfinite(x)) throw Error("non-finite embedding entry");
    }
}

namespace {

double norm2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

double embedding_distance(const EmbeddingVector& a, const EmbeddingVector& b,
                          DistanceMetric metric) {
    if (a.kind != b.kind) {
        throw KindMismatchError("cannot compare identity and expression embeddings");
    }
    if (a.dim() != b.dim()) {
        throw KindMismatchError("embedding dimension mismatch: " +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    if (metric == DistanceMetric::euclidean) {
        double acc = 0.0;
        for (int i = 0; i < a.dim(); ++i) {
            const double d = a.values[i] - b.values[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    const double na = norm2(a.values);
    const double nb = norm2(b.values);
    if (na == 0.0 || nb == 0.0) {
        throw ZeroVectorError("cosine distance undefined for a zero vector");
    }
    const double dot = std::inner_product(a.values.begin(), a.values.end(),
                                          b.values.begin(), 0.0);
    // Clamp against round-off so the result stays in [0,2].
    const double sim = std::clamp(dot / (na * nb), -1.0, 1.0);
    return 1.0 - sim;
}

EmbeddingVector l2_normalize(const EmbeddingVector& v) {
    const double n = norm2(v.values);
    if (n == 0.0) throw ZeroVectorError("cannot normalize a zero vector");
    EmbeddingVector out = v;
    for (double& x : out.values) x /= n;
    return out;
}

const char* to_string(DistanceMetric m) {
    return m == DistanceMetric::cosine ? "cosine" : "euclidean";
}

const char* to_string(EmbeddingKind k) {
    return k == EmbeddingKind::identity ? "identity" : "expression";
}

}  // namespace dtwin
