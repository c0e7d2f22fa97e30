#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/backends.hpp"
#include "dtwin/core.hpp"

namespace dtwin {

struct MediaNotFoundError : Error { using Error::Error; };
struct DecodeFailureError : Error { using Error::Error; };
struct EmptyMediaError : Error { using Error::Error; };
struct WriteFailureError : Error { using Error::Error; };
struct ParseFailureError : Error { using Error::Error; };
struct DuplicateClipIdError : Error { using Error::Error; };
struct StorageFailureError : Error { using Error::Error; };

enum class BehaviorTag {
    gaze_variation,
    expression_variation,
    speech_head_motion,
    rapid_pose_change,
    unspecified,
};

const char* to_string(BehaviorTag tag);
std::optional<BehaviorTag> behavior_tag_from_string(const std::string& s);

struct ManifestEntry {
    std::string clip_id;
    std::string media_path;
    std::string subject_id;
    BehaviorTag behavior_tag = BehaviorTag::unspecified;
};

struct DatasetManifest {
    std::string dataset_name;
    std::vector<ManifestEntry> entries;
};

/// Decodes a video file or an ordered image-sequence directory.
VideoClip load_clip(const std::string& path, std::optional<int> max_frames = std::nullopt);

/// Image-sequence directories are lossless; container video is best-effort.
void save_clip(const VideoClip& clip, const std::string& path);

/// Tab-separated manifest with a fixed header line.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

enum class ArtifactStage { source_frame, mask, caption, dtwin, deid_video, metrics };

const char* to_string(ArtifactStage stage);

struct ArtifactKey {
    ArtifactStage stage;
    std::string clip_id;
    std::string config_digest;
};

/// Content-addressed file cache, one file per artifact under
/// <root>/<stage>/<clip_id>/<config_digest>.
class ArtifactCache {
public:
    explicit ArtifactCache(std::string root) : root_(std::move(root)) {}

    void store(const ArtifactKey& key, const std::vector<std::uint8_t>& payload) const;
    std::optional<std::vector<std::uint8_t>> fetch(const ArtifactKey& key) const;
    std::string path_for(const ArtifactKey& key) const;
    const std::string& root() const { return root_; }

private:
    std::string root_;
};

// Binary (de)serialization for cached stage outputs.
class ByteWriter {
public:
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f32(float v);
    void str(const std::string& s);
    void bytes(const void* data, size_t n);
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    float f32();
    std::string str();
    void bytes(void* out, size_t n);

private:
    const std::vector<std::uint8_t>& buf_;
    size_t pos_ = 0;
};

std::vector<std::uint8_t> encode_frame(const FrameImage& frame);
FrameImage decode_frame(const std::vector<std::uint8_t>& payload);
std::vector<std::uint8_t> encode_mask(const FaceMask& mask);
FaceMask decode_mask(const std::vector<std::uint8_t>& payload);
std::vector<std::uint8_t> encode_caption(const Caption& caption);
Caption decode_caption(const std::vector<std::uint8_t>& payload);
std::vector<std::uint8_t> encode_dtwin(const DTwin& dtwin);
DTwin decode_dtwin(const std::vector<std::uint8_t>& payload);
std::vector<std::uint8_t> encode_clip(const VideoClip& clip);
VideoClip decode_clip(const std::vector<std::uint8_t>& payload);

}  // namespace dtwin
