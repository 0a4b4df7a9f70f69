#include "dpm4d/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace dpm4d {

using ojson = nlohmann::ordered_json;

namespace {

cv::Mat read_unchanged(const fs::path& path) {
    if (!fs::exists(path))
        throw IoError("missing file: " + path.string());
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty())
        throw IoError("cannot decode image: " + path.string());
    return m;
}

void write_mat(const fs::path& path, const cv::Mat& m, const std::vector<int>& params = {}) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m, params);
    } catch (const cv::Exception&) {
        ok = false;
    }
    if (!ok)
        throw IoError("cannot write image: " + path.string());
}

}  // namespace

RgbImage read_rgb(const fs::path& path) {
    cv::Mat m = read_unchanged(path);
    if (m.depth() != CV_8U)
        throw FormatError("rgb image must be 8-bit: " + path.string());
    cv::Mat rgb;
    switch (m.channels()) {
    case 1: cv::cvtColor(m, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(m, rgb, cv::COLOR_BGRA2RGB); break;
    default: throw FormatError("unsupported channel count: " + path.string());
    }
    RgbImage out(rgb.cols, rgb.rows, 3);
    for (int y = 0; y < rgb.rows; ++y) {
        const auto* row = rgb.ptr<std::uint8_t>(y);
        std::copy(row, row + rgb.cols * 3, out.data().begin() + static_cast<std::ptrdiff_t>(y) * rgb.cols * 3);
    }
    return out;
}

DepthImage read_depth(const fs::path& path) {
    cv::Mat m = read_unchanged(path);
    if (m.channels() != 1 || m.depth() != CV_16U)
        throw FormatError("depth image must be 16-bit single channel: " + path.string());
    DepthImage out(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint16_t>(y);
        std::copy(row, row + m.cols, out.data().begin() + static_cast<std::ptrdiff_t>(y) * m.cols);
    }
    return out;
}

void write_rgb(const fs::path& path, const RgbImage& image) {
    cv::Mat rgb(image.height(), image.width(), CV_8UC3,
                const_cast<std::uint8_t*>(image.data().data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    write_mat(path, bgr);
}

void write_depth(const fs::path& path, const DepthImage& image) {
    cv::Mat m(image.height(), image.width(), CV_16UC1,
              const_cast<std::uint16_t*>(image.data().data()));
    write_mat(path, m);
}

void write_mask(const fs::path& path, const Mask& mask) {
    cv::Mat m(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            m.at<std::uint8_t>(y, x) = mask.at(x, y) ? 255 : 0;
    write_mat(path, m, {cv::IMWRITE_PNG_BILEVEL, 1});
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("missing file: " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected '<rgb>\\t<depth>'");
        entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return entries;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
    std::string text;
    for (const auto& e : entries)
        text += e.rgb + "\t" + e.depth + "\n";
    write_text_file(path, text);
}

SequenceReader::SequenceReader(fs::path directory, const std::string& manifest_name)
    : directory_(std::move(directory)), entries_(read_manifest(directory_ / manifest_name)) {}

RgbdFrame SequenceReader::load(std::size_t index) const {
    const auto& e = entries_.at(index);
    const fs::path rgb_path = directory_ / e.rgb;
    const fs::path depth_path = directory_ / e.depth;
    // Check both files before decoding so the error names the absent one.
    for (const auto& p : {rgb_path, depth_path})
        if (!fs::exists(p))
            throw IoError("missing file: " + p.string());
    return RgbdFrame(read_rgb(rgb_path), read_depth(depth_path), static_cast<int>(index));
}

RgbdFrame SequenceReader::next() {
    if (done())
        throw ArgumentError("sequence exhausted");
    return load(cursor_++);
}

std::vector<RgbdFrame> load_sequence(const fs::path& directory, const std::string& manifest_name) {
    SequenceReader reader(directory, manifest_name);
    std::vector<RgbdFrame> frames;
    frames.reserve(reader.size());
    while (!reader.done())
        frames.push_back(reader.next());
    return frames;
}

void write_sequence(const fs::path& directory, const std::string& manifest_name,
                    const std::vector<RgbdFrame>& frames) {
    fs::create_directories(directory);
    std::vector<ManifestEntry> entries;
    for (const auto& f : frames) {
        char rgb_name[32];
        char depth_name[32];
        std::snprintf(rgb_name, sizeof rgb_name, "rgb_%05d.png", f.index);
        std::snprintf(depth_name, sizeof depth_name, "depth_%05d.png", f.index);
        write_rgb(directory / rgb_name, f.rgb);
        write_depth(directory / depth_name, f.depth);
        entries.push_back({rgb_name, depth_name});
    }
    write_manifest(directory / manifest_name, entries);
}

// --- annotations ---------------------------------------------------------

AnnotationSet parse_annotations(const std::string& json_text, const SkeletonDef& skeleton) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("annotation file is not valid JSON: ") + e.what());
    }
    if (!root.is_array())
        throw ParseError("annotation file must be a JSON array");

    AnnotationSet set;
    std::size_t position = 0;
    for (const auto& rec : root) {
        const std::string where = "annotation record " + std::to_string(position++);
        if (!rec.is_object() || !rec.contains("frame") || !rec["frame"].is_number_integer())
            throw ParseError(where + ": missing integer 'frame'");
        Annotation a;
        a.frame = rec["frame"].get<int>();
        const std::string at_frame = "frame " + std::to_string(a.frame);
        try {
            const auto& bbox = rec.at("bbox");
            a.bbox.h = bbox.at("h").get<int>();
            a.bbox.w = bbox.at("w").get<int>();
        } catch (const ojson::exception&) {
            throw ParseError(at_frame + ": malformed bbox");
        }
        if (a.bbox.h <= 0 || a.bbox.w <= 0)
            throw SchemaError(at_frame + ": bbox dimensions must be positive");
        if (!set.entries.empty() && a.frame <= set.entries.back().frame)
            throw SchemaError(at_frame + ": frame indices must be strictly increasing");
        if (!rec.contains("joints") || !rec["joints"].is_array())
            throw ParseError(at_frame + ": missing joints array");
        const auto& joints = rec["joints"];
        if (static_cast<int>(joints.size()) != skeleton.part_count())
            throw SchemaError(at_frame + ": expected " + std::to_string(skeleton.part_count()) +
                              " joints, found " + std::to_string(joints.size()));
        a.pose.skeleton_kind = kind_of(skeleton);
        a.pose.joints.assign(skeleton.part_count(), Joint{});
        std::vector<bool> seen(skeleton.part_count(), false);
        for (const auto& j : joints) {
            std::string name;
            double x = 0.0;
            double y = 0.0;
            try {
                name = j.at("part").get<std::string>();
                x = j.at("x").get<double>();
                y = j.at("y").get<double>();
            } catch (const ojson::exception&) {
                throw ParseError(at_frame + ": malformed joint record");
            }
            auto idx = skeleton.find(name);
            if (!idx)
                throw SchemaError(at_frame + ": unknown part '" + name + "'");
            if (seen[*idx])
                throw SchemaError(at_frame + ": duplicate part '" + name + "'");
            seen[*idx] = true;
            a.pose.joints[*idx] = Joint{*idx, x, y, 0, 0.0};
        }
        set.entries.push_back(std::move(a));
    }
    return set;
}

AnnotationSet load_annotations(const fs::path& path, const SkeletonDef& skeleton) {
    return parse_annotations(read_text_file(path), skeleton);
}

void write_annotations(const fs::path& path, const AnnotationSet& annotations,
                       const SkeletonDef& skeleton) {
    ojson root = ojson::array();
    for (const auto& a : annotations.entries) {
        ojson rec;
        rec["frame"] = a.frame;
        rec["bbox"] = {{"h", a.bbox.h}, {"w", a.bbox.w}};
        ojson joints = ojson::array();
        for (const auto& j : a.pose.joints)
            joints.push_back({{"part", skeleton.name(j.part_id)}, {"x", j.x}, {"y", j.y}});
        rec["joints"] = std::move(joints);
        root.push_back(std::move(rec));
    }
    write_text_file(path, root.dump(1) + "\n");
}

// --- pose files ----------------------------------------------------------

std::string part_name(SkeletonKind kind, int part) {
    if (kind == SkeletonKind::custom)
        return "p" + std::to_string(part);
    return skeleton_for(kind).name(part);
}

int part_index(SkeletonKind kind, const std::string& name) {
    if (kind != SkeletonKind::custom)
        return skeleton_for(kind).index_of(name);
    if (name.size() < 2 || name[0] != 'p')
        throw SchemaError("unknown part name '" + name + "'");
    try {
        std::size_t used = 0;
        int idx = std::stoi(name.substr(1), &used);
        if (used + 1 != name.size() || idx < 0)
            throw SchemaError("unknown part name '" + name + "'");
        return idx;
    } catch (const std::logic_error&) {
        throw SchemaError("unknown part name '" + name + "'");
    }
}

std::string pose_records_to_json(const std::vector<PoseRecord>& records) {
    ojson root = ojson::array();
    for (const auto& r : records) {
        ojson rec;
        rec["frame"] = r.frame;
        if (!r.error.empty()) {
            rec["error"] = r.error;
            root.push_back(std::move(rec));
            continue;
        }
        if (!r.z.empty() && r.z.size() != r.pose.joints.size())
            throw ArgumentError("pose record z list does not match joint count");
        rec["skeleton"] = std::string(to_string(r.pose.skeleton_kind));
        rec["score"] = r.pose.total_score;
        ojson joints = ojson::array();
        for (std::size_t i = 0; i < r.pose.joints.size(); ++i) {
            const Joint& j = r.pose.joints[i];
            ojson jr;
            jr["part"] = part_name(r.pose.skeleton_kind, j.part_id);
            jr["x"] = j.x;
            jr["y"] = j.y;
            if (!r.z.empty() && r.z[i])
                jr["z"] = *r.z[i];
            jr["type"] = j.type_id;
            jr["score"] = j.score;
            joints.push_back(std::move(jr));
        }
        rec["joints"] = std::move(joints);
        root.push_back(std::move(rec));
    }
    return root.dump(1) + "\n";
}

std::vector<PoseRecord> pose_records_from_json(const std::string& json_text) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("pose file is not valid JSON: ") + e.what());
    }
    if (!root.is_array())
        throw ParseError("pose file must be a JSON array");
    std::vector<PoseRecord> records;
    for (const auto& rec : root) {
        PoseRecord r;
        try {
            r.frame = rec.at("frame").get<int>();
            if (rec.contains("error")) {
                r.error = rec["error"].get<std::string>();
                records.push_back(std::move(r));
                continue;
            }
            r.pose.skeleton_kind = skeleton_kind_from_string(rec.at("skeleton").get<std::string>());
            r.pose.total_score = rec.at("score").get<double>();
            const auto& joints = rec.at("joints");
            const std::size_t n = joints.size();
            if (r.pose.skeleton_kind != SkeletonKind::custom &&
                static_cast<int>(n) != skeleton_for(r.pose.skeleton_kind).part_count())
                throw SchemaError("frame " + std::to_string(r.frame) + ": joint count " +
                                  std::to_string(n) + " does not match skeleton");
            r.pose.joints.assign(n, Joint{});
            std::vector<std::optional<double>> z(n);
            std::vector<bool> seen(n, false);
            bool any_z = false;
            for (const auto& jr : joints) {
                int idx = part_index(r.pose.skeleton_kind, jr.at("part").get<std::string>());
                if (idx >= static_cast<int>(n) || seen[idx])
                    throw SchemaError("frame " + std::to_string(r.frame) + ": bad or duplicate part");
                seen[idx] = true;
                Joint& j = r.pose.joints[idx];
                j.part_id = idx;
                j.x = jr.at("x").get<double>();
                j.y = jr.at("y").get<double>();
                j.type_id = jr.at("type").get<int>();
                j.score = jr.at("score").get<double>();
                if (jr.contains("z")) {
                    z[idx] = jr["z"].get<double>();
                    any_z = true;
                }
            }
            if (any_z)
                r.z = std::move(z);
        } catch (const ojson::exception& e) {
            throw ParseError("malformed pose record for frame " + std::to_string(r.frame) + ": " +
                             e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_pose_json(const fs::path& path, const std::vector<PoseRecord>& records) {
    write_text_file(path, pose_records_to_json(records));
}

std::vector<PoseRecord> read_pose_json(const fs::path& path) {
    return pose_records_from_json(read_text_file(path));
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("missing file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write file: " + path.string());
    out << text;
    if (!out)
        throw IoError("cannot write file: " + path.string());
}

}  // namespace dpm4d
