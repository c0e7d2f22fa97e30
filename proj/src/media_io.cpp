#include "dtwin/media_io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <json.hpp>

namespace fs = std::filesystem;

namespace dtwin {

const char* to_string(BehaviorTag tag) {
    switch (tag) {
        case BehaviorTag::gaze_variation: return "gaze_variation";
        case BehaviorTag::expression_variation: return "expression_variation";
        case BehaviorTag::speech_head_motion: return "speech_head_motion";
        case BehaviorTag::rapid_pose_change: return "rapid_pose_change";
        case BehaviorTag::unspecified: return "unspecified";
    }
    return "unspecified";
}

std::optional<BehaviorTag> behavior_tag_from_string(const std::string& s) {
    if (s == "gaze_variation") return BehaviorTag::gaze_variation;
    if (s == "expression_variation") return BehaviorTag::expression_variation;
    if (s == "speech_head_motion") return BehaviorTag::speech_head_motion;
    if (s == "rapid_pose_change") return BehaviorTag::rapid_pose_change;
    if (s == "unspecified" || s.empty()) return BehaviorTag::unspecified;
    return std::nullopt;
}

namespace {

constexpr const char* kManifestHeader = "clip_id\tmedia_path\tsubject_id\tbehavior_tag";
constexpr const char* kClipMetaFile = "clip.json";

bool is_image_file(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

FrameImage mat_to_frame(const cv::Mat& bgr, int index) {
    FrameImage frame(bgr.cols, bgr.rows, index);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            frame.at(x, y, 0) = row[x][2] / 255.0f;
            frame.at(x, y, 1) = row[x][1] / 255.0f;
            frame.at(x, y, 2) = row[x][0] / 255.0f;
        }
    }
    return frame;
}

cv::Mat frame_to_mat(const FrameImage& frame) {
    cv::Mat bgr(frame.height, frame.width, CV_8UC3);
    for (int y = 0; y < frame.height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < frame.width; ++x) {
            row[x][2] = static_cast<uchar>(std::lround(frame.at(x, y, 0) * 255.0f));
            row[x][1] = static_cast<uchar>(std::lround(frame.at(x, y, 1) * 255.0f));
            row[x][0] = static_cast<uchar>(std::lround(frame.at(x, y, 2) * 255.0f));
        }
    }
    return bgr;
}

VideoClip load_image_sequence(const fs::path& dir, std::optional<int> max_frames) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw EmptyMediaError("no image files in " + dir.string());
    }

    VideoClip clip;
    clip.clip_id = dir.filename().string();
    const fs::path meta = dir / kClipMetaFile;
    if (fs::exists(meta)) {
        std::ifstream in(meta);
        nlohmann::json j;
        in >> j;
        clip.fps = j.value("fps", 25.0);
        clip.clip_id = j.value("clip_id", clip.clip_id);
    }

    int index = 0;
    for (const auto& file : files) {
        if (max_frames && index >= *max_frames) break;
        cv::Mat bgr = cv::imread(file.string(), cv::IMREAD_COLOR);
        if (bgr.empty()) {
            throw DecodeFailureError("failed to decode image " + file.string());
        }
        clip.frames.push_back(mat_to_frame(bgr, index));
        ++index;
    }
    return clip;
}

VideoClip load_video_file(const fs::path& path, std::optional<int> max_frames) {
    cv::VideoCapture cap(path.string());
    if (!cap.isOpened()) {
        throw DecodeFailureError("failed to open video " + path.string());
    }
    VideoClip clip;
    clip.clip_id = path.stem().string();
    const double fps = cap.get(cv::CAP_PROP_FPS);
    clip.fps = fps > 0.0 ? fps : 25.0;

    cv::Mat bgr;
    int index = 0;
    while (cap.read(bgr)) {
        if (max_frames && index >= *max_frames) break;
        clip.frames.push_back(mat_to_frame(bgr, index));
        ++index;
    }
    if (clip.frames.empty()) {
        throw EmptyMediaError("video has no decodable frames: " + path.string());
    }
    return clip;
}

bool is_video_extension(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    return ext == ".avi" || ext == ".mp4" || ext == ".mkv" || ext == ".mov";
}

}  // namespace

VideoClip load_clip(const std::string& path, std::optional<int> max_frames) {
    const fs::path p(path);
    if (!fs::exists(p)) {
        throw MediaNotFoundError("media not found: " + path);
    }
    return fs::is_directory(p) ? load_image_sequence(p, max_frames)
                               : load_video_file(p, max_frames);
}

void save_clip(const VideoClip& clip, const std::string& path) {
    auto violations = validate_clip(clip);
    if (!violations.empty()) {
        throw WriteFailureError("refusing to save invalid clip: " + violations.front());
    }
    const fs::path p(path);
    if (is_video_extension(p)) {
        std::error_code ec;
        if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
        cv::VideoWriter writer(
            path, cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), clip.fps,
            cv::Size(clip.frames.front().width, clip.frames.front().height));
        if (!writer.isOpened()) {
            throw WriteFailureError("failed to open video writer for " + path);
        }
        for (const auto& frame : clip.frames) writer.write(frame_to_mat(frame));
        return;
    }

    std::error_code ec;
    fs::create_directories(p, ec);
    if (!fs::is_directory(p)) {
        throw WriteFailureError("cannot create output directory " + path);
    }
    for (size_t i = 0; i < clip.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.png", i);
        const fs::path file = p / name;
        if (!cv::imwrite(file.string(), frame_to_mat(clip.frames[i]))) {
            throw WriteFailureError("failed to write " + file.string());
        }
    }
    nlohmann::json meta{{"fps", clip.fps},
                        {"clip_id", clip.clip_id},
                        {"frame_count", clip.frames.size()}};
    std::ofstream out(p / kClipMetaFile);
    if (!out) throw WriteFailureError("failed to write clip metadata in " + path);
    out << meta.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MediaNotFoundError("manifest not found: " + path);

    DatasetManifest manifest;
    manifest.dataset_name = fs::path(path).stem().string();

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseFailureError("manifest is empty: " + path);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader) {
        throw ParseFailureError("line 1: expected manifest header '" +
                                std::string(kManifestHeader) + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            const size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos
                                                    ? std::string::npos
                                                    : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 4) {
            throw ParseFailureError("line " + std::to_string(line_no) +
                                    ": expected 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
        }
        ManifestEntry entry;
        entry.clip_id = fields[0];
        entry.media_path = fields[1];
        entry.subject_id = fields[2];
        if (entry.clip_id.empty()) {
            throw ParseFailureError("line " + std::to_string(line_no) + ": empty clip_id");
        }
        if (entry.media_path.empty()) {
            throw ParseFailureError("line " + std::to_string(line_no) + ": empty media_path");
        }
        const auto tag = behavior_tag_from_string(fields[3]);
        if (!tag) {
            throw ParseFailureError("line " + std::to_string(line_no) +
                                    ": unknown behavior tag '" + fields[3] + "'");
        }
        entry.behavior_tag = *tag;
        for (const auto& existing : manifest.entries) {
            if (existing.clip_id == entry.clip_id) {
                throw DuplicateClipIdError("duplicate clip_id '" + entry.clip_id +
                                           "' at line " + std::to_string(line_no));
            }
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(path);
    if (!out) throw WriteFailureError("cannot write manifest " + path);
    out << kManifestHeader << "\n";
    for (const auto& e : manifest.entries) {
        out << e.clip_id << '\t' << e.media_path << '\t' << e.subject_id << '\t'
            << to_string(e.behavior_tag) << "\n";
    }
}

const char* to_string(ArtifactStage stage) {
    switch (stage) {
        case ArtifactStage::source_frame: return "source_frame";
        case ArtifactStage::mask: return "mask";
        case ArtifactStage::caption: return "caption";
        case ArtifactStage::dtwin: return "dtwin";
        case ArtifactStage::deid_video: return "deid_video";
        case ArtifactStage::metrics: return "metrics";
    }
    return "unknown";
}

std::string ArtifactCache::path_for(const ArtifactKey& key) const {
    return (fs::path(root_) / to_string(key.stage) / key.clip_id /
            (key.config_digest + ".bin"))
        .string();
}

void ArtifactCache::store(const ArtifactKey& key,
                          const std::vector<std::uint8_t>& payload) const {
    const fs::path file(path_for(key));
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageFailureError("cannot open cache file " + file.string());
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) throw StorageFailureError("short write to cache file " + file.string());
}

std::optional<std::vector<std::uint8_t>> ArtifactCache::fetch(const ArtifactKey& key) const {
    const fs::path file(path_for(key));
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    std::vector<std::uint8_t> payload((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>());
    return payload;
}

void ByteWriter::u32(std::uint32_t v) { bytes(&v, sizeof(v)); }
void ByteWriter::u64(std::uint64_t v) { bytes(&v, sizeof(v)); }
void ByteWriter::f64(double v) { bytes(&v, sizeof(v)); }
void ByteWriter::f32(float v) { bytes(&v, sizeof(v)); }
void ByteWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
}
void ByteWriter::bytes(const void* data, size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
}

std::uint32_t ByteReader::u32() { std::uint32_t v; bytes(&v, sizeof(v)); return v; }
std::uint64_t ByteReader::u64() { std::uint64_t v; bytes(&v, sizeof(v)); return v; }
double ByteReader::f64() { double v; bytes(&v, sizeof(v)); return v; }
float ByteReader::f32() { float v; bytes(&v, sizeof(v)); return v; }
std::string ByteReader::str() {
    const auto n = u32();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
}
void ByteReader::bytes(void* out, size_t n) {
    if (pos_ + n > buf_.size()) {
        throw StorageFailureError("truncated cached artifact");
    }
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
}

std::vector<std::uint8_t> encode_frame(const FrameImage& frame) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(frame.width));
    w.u32(static_cast<std::uint32_t>(frame.height));
    w.u32(static_cast<std::uint32_t>(frame.frame_index));
    w.bytes(frame.pixels.data(), frame.pixels.size() * sizeof(float));
    return w.take();
}

FrameImage decode_frame(const std::vector<std::uint8_t>& payload) {
    ByteReader r(payload);
    const int w = static_cast<int>(r.u32());
    const int h = static_cast<int>(r.u32());
    const int index = static_cast<int>(r.u32());
    FrameImage frame(w, h, index);
    r.bytes(frame.pixels.data(), frame.pixels.size() * sizeof(float));
    return frame;
}

std::vector<std::uint8_t> encode_mask(const FaceMask& mask) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(mask.width));
    w.u32(static_cast<std::uint32_t>(mask.height));
    w.u32(static_cast<std::uint32_t>(mask.dilation_px));
    w.bytes(mask.bits.data(), mask.bits.size());
    return w.take();
}

FaceMask decode_mask(const std::vector<std::uint8_t>& payload) {
    ByteReader r(payload);
    const int w = static_cast<int>(r.u32());
    const int h = static_cast<int>(r.u32());
    FaceMask mask(w, h);
    mask.dilation_px = static_cast<int>(r.u32());
    r.bytes(mask.bits.data(), mask.bits.size());
    return mask;
}

std::vector<std::uint8_t> encode_caption(const Caption& caption) {
    ByteWriter w;
    w.str(caption.text);
    w.u32(caption.source == CaptionSource::generated ? 0u : 1u);
    return w.take();
}

Caption decode_caption(const std::vector<std::uint8_t>& payload) {
    ByteReader r(payload);
    Caption c;
    c.text = r.str();
    c.source = r.u32() == 0 ? CaptionSource::generated : CaptionSource::user_override;
    return c;
}

std::vector<std::uint8_t> encode_dtwin(const DTwin& dtwin) {
    ByteWriter w;
    const auto frame = encode_frame(dtwin.image);
    w.u32(static_cast<std::uint32_t>(frame.size()));
    w.bytes(frame.data(), frame.size());
    w.u64(dtwin.seed);
    w.str(dtwin.caption_used.text);
    w.u32(dtwin.caption_used.source == CaptionSource::generated ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(dtwin.source_frame_index));
    return w.take();
}

DTwin decode_dtwin(const std::vector<std::uint8_t>& payload) {
    ByteReader r(payload);
    const auto frame_size = r.u32();
    std::vector<std::uint8_t> frame_bytes(frame_size);
    r.bytes(frame_bytes.data(), frame_bytes.size());
    DTwin d;
    d.image = decode_frame(frame_bytes);
    d.seed = r.u64();
    d.caption_used.text = r.str();
    d.caption_used.source = r.u32() == 0 ? CaptionSource::generated
                                         : CaptionSource::user_override;
    d.source_frame_index = static_cast<int>(r.u32());
    return d;
}

std::vector<std::uint8_t> encode_clip(const VideoClip& clip) {
    ByteWriter w;
    w.str(clip.clip_id);
    w.f64(clip.fps);
    w.u32(static_cast<std::uint32_t>(clip.frames.size()));
    for (const auto& frame : clip.frames) {
        const auto bytes = encode_frame(frame);
        w.u32(static_cast<std::uint32_t>(bytes.size()));
        w.bytes(bytes.data(), bytes.size());
    }
    return w.take();
}

VideoClip decode_clip(const std::vector<std::uint8_t>& payload) {
    ByteReader r(payload);
    VideoClip clip;
    clip.clip_id = r.str();
    clip.fps = r.f64();
    const auto n = r.u32();
    clip.frames.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::vector<std::uint8_t> frame_bytes(r.u32());
        r.bytes(frame_bytes.data(), frame_bytes.size());
        clip.frames.push_back(decode_frame(frame_bytes));
    }
    return clip;
}

}  // namespace dtwin
