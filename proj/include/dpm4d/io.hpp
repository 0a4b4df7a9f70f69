#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dpm4d/types.hpp"

namespace dpm4d {

namespace fs = std::filesystem;

// --- rasters -------------------------------------------------------------

RgbImage read_rgb(const fs::path& path);
DepthImage read_depth(const fs::path& path);  // expects a 16-bit single-channel file
void write_rgb(const fs::path& path, const RgbImage& image);
void write_depth(const fs::path& path, const DepthImage& image);
void write_mask(const fs::path& path, const Mask& mask);  // 1-bit PNG

// --- frame sequences -----------------------------------------------------

struct ManifestEntry {
    std::string rgb;
    std::string depth;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries);

// Streams the frames listed in a manifest (`<rgb>\t<depth>` per line). Frame
// indices follow manifest order starting at 0. Each call to next() decodes
// one pair; a reader holds no state shared with other readers.
class SequenceReader {
public:
    SequenceReader(fs::path directory, const std::string& manifest_name);

    std::size_t size() const { return entries_.size(); }
    bool done() const { return cursor_ >= entries_.size(); }
    RgbdFrame next();
    RgbdFrame load(std::size_t index) const;

private:
    fs::path directory_;
    std::vector<ManifestEntry> entries_;
    std::size_t cursor_ = 0;
};

std::vector<RgbdFrame> load_sequence(const fs::path& directory, const std::string& manifest_name);

// Writes frames as rgb_%05d.png / depth_%05d.png plus the manifest.
void write_sequence(const fs::path& directory, const std::string& manifest_name,
                    const std::vector<RgbdFrame>& frames);

// --- annotations ---------------------------------------------------------

AnnotationSet load_annotations(const fs::path& path, const SkeletonDef& skeleton = full14_skeleton());
AnnotationSet parse_annotations(const std::string& json_text,
                                const SkeletonDef& skeleton = full14_skeleton());
void write_annotations(const fs::path& path, const AnnotationSet& annotations,
                       const SkeletonDef& skeleton = full14_skeleton());

// --- pose files ----------------------------------------------------------

// One frame of pipeline output. `z` is either empty (2D only) or holds one
// optional depth per joint. A non-empty `error` marks a frame whose
// processing failed; such records carry no pose.
struct PoseRecord {
    int frame = 0;
    Pose pose;
    std::vector<std::optional<double>> z;
    std::string error;

    bool operator==(const PoseRecord&) const = default;
};

std::string pose_records_to_json(const std::vector<PoseRecord>& records);
std::vector<PoseRecord> pose_records_from_json(const std::string& json_text);
void write_pose_json(const fs::path& path, const std::vector<PoseRecord>& records);
std::vector<PoseRecord> read_pose_json(const fs::path& path);

// Part naming used by pose files. Custom skeletons use "p<id>".
std::string part_name(SkeletonKind kind, int part);
int part_index(SkeletonKind kind, const std::string& name);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace dpm4d
