#include "dpm4d/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dpm4d {

using ojson = nlohmann::ordered_json;

namespace {

constexpr char magic[] = "4DDPM";
constexpr std::size_t magic_len = 5;

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k)
        out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
    if (pos + 4 > in.size())
        throw FormatError("model file truncated");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
    return v;
}

const char* channel_name(Channel ch) { return ch == Channel::monocular ? "monocular" : "depth"; }

}  // namespace

std::string serialize_model(const PartsModel& model) {
    ojson header;
    const auto& sk = model.skeleton();
    header["skeleton"]["names"] = sk.names();
    ojson edges = ojson::array();
    for (auto [p, c] : sk.edges())
        edges.push_back({p, c});
    header["skeleton"]["edges"] = edges;
    header["cell_size"] = model.cell_size();
    header["bins"] = model.bins();
    header["type_counts"] = model.type_counts();
    ojson shapes = ojson::array();
    for (const auto& s : model.filter_shapes())
        shapes.push_back({s.rows, s.cols});
    header["filter_shapes"] = shapes;
    ojson tensors = ojson::array();
    for (int i = 0; i < model.part_count(); ++i)
        for (int t = 0; t < model.type_count(i); ++t)
            for (Channel ch : {Channel::monocular, Channel::depth}) {
                const auto s = model.filter_shape(i);
                tensors.push_back({{"part", i},
                                   {"type", t},
                                   {"channel", channel_name(ch)},
                                   {"offset", model.filter_offset(i, t, ch)},
                                   {"shape", {s.rows, s.cols, model.feature_dims()}}});
            }
    header["filters"] = tensors;
    header["weight_count"] = model.weights().size();
    const std::string text = header.dump();

    std::string out(magic, magic_len);
    put_u32(out, model_format_version);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (double w : model.weights()) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(w));
        put_u32(out, bits);
    }
    return out;
}

PartsModel deserialize_model(const std::string& bytes) {
    if (bytes.size() < magic_len || bytes.compare(0, magic_len, magic) != 0)
        throw FormatError("not a 4DDPM model file");
    const std::uint32_t version = get_u32(bytes, magic_len);
    if (version != model_format_version)
        throw FormatError("unsupported model format version " + std::to_string(version));
    const std::uint32_t len = get_u32(bytes, magic_len + 4);
    const std::size_t start = magic_len + 8;
    if (start + len > bytes.size())
        throw FormatError("model header truncated");
    try {
        const ojson header = ojson::parse(bytes.substr(start, len));
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : header.at("skeleton").at("edges"))
            edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        SkeletonDef sk(header.at("skeleton").at("names").get<std::vector<std::string>>(), edges);
        std::vector<FilterShape> shapes;
        for (const auto& s : header.at("filter_shapes"))
            shapes.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
        PartsModel model(sk, header.at("type_counts").get<std::vector<int>>(), shapes,
                         header.at("cell_size").get<int>(), header.at("bins").get<int>());
        const auto count = header.at("weight_count").get<std::size_t>();
        if (count != model.weights().size())
            throw FormatError("weight count in header does not match the model layout");
        std::size_t pos = start + len;
        if (pos + 4 * count != bytes.size())
            throw FormatError("model payload size mismatch");
        for (std::size_t k = 0; k < count; ++k, pos += 4)
            model.weights()[k] = std::bit_cast<float>(get_u32(bytes, pos));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad model header: ") + e.what());
    }
}

void save_model(const PartsModel& model, const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write model: " + path.string());
    const std::string bytes = serialize_model(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("cannot write model: " + path.string());
}

PartsModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open model: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace dpm4d
