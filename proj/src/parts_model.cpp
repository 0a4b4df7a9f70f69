#include "dpm4d/parts_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <opencv2/imgproc.hpp>

#include "dpm4d/distance_transform.hpp"

namespace dpm4d {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

int channel_index(Channel ch) { return ch == Channel::monocular ? 0 : 1; }

}  // namespace

std::array<double, 4> deformation_feature(Point2d xi, Point2d xj) {
    const double dx = xi.x - xj.x;
    const double dy = xi.y - xj.y;
    return {dx, dx * dx, dy, dy * dy};
}

PartsModel::PartsModel(SkeletonDef skeleton, std::vector<int> type_counts, std::vector<FilterShape> shapes,
                       int cell_size, int bins)
    : skeleton_(std::move(skeleton)), type_counts_(std::move(type_counts)), shapes_(std::move(shapes)),
      cell_size_(cell_size), bins_(bins) {
    const auto n = static_cast<std::size_t>(skeleton_.part_count());
    if (type_counts_.size() != n || shapes_.size() != n)
        throw ArgumentError("model needs one type count and one filter shape per part");
    for (int t : type_counts_)
        if (t < 1)
            throw ArgumentError("every part needs at least one type");
    for (const auto& s : shapes_)
        if (s.rows < 1 || s.cols < 1)
            throw ArgumentError("filter shapes must be positive");
    if (cell_size_ < 1 || bins_ < 1)
        throw ArgumentError("cell size and bin count must be positive");
    layout();
}

HogParams PartsModel::hog_params() const {
    HogParams p;
    p.cell_size = cell_size_;
    p.bins = bins_;
    return p;
}

void PartsModel::layout() {
    const int n = part_count();
    part_offsets_.assign(n, 0);
    edge_offsets_.assign(n, 0);
    std::size_t offset = 0;
    for (int i = 0; i < n; ++i) {
        part_offsets_[i] = offset;
        offset += static_cast<std::size_t>(type_counts_[i]) * 2 * (filter_size(i) + 1);
    }
    for (int i = 0; i < n; ++i) {
        edge_offsets_[i] = offset;
        const int parent = skeleton_.parent(i);
        if (parent < 0)
            continue;
        offset += static_cast<std::size_t>(type_counts_[i]) * type_counts_[parent] * 10;
    }
    weights_.assign(offset, 0.0);
}

std::size_t PartsModel::filter_size(int part) const {
    const auto& s = shapes_.at(part);
    return static_cast<std::size_t>(s.rows) * s.cols * feature_dims();
}

std::size_t PartsModel::filter_offset(int part, int type, Channel ch) const {
    if (type < 0 || type >= type_count(part))
        throw ArgumentError("type " + std::to_string(type) + " out of range for part " + std::to_string(part));
    const std::size_t block = filter_size(part) + 1;
    return part_offsets_[part] + (static_cast<std::size_t>(type) * 2 + channel_index(ch)) * block;
}

std::size_t PartsModel::bias_offset(int part, int type, Channel ch) const {
    return filter_offset(part, type, ch) + filter_size(part);
}

std::size_t PartsModel::deformation_offset(int child, int child_type, int parent_type, Channel ch) const {
    const int parent = skeleton_.parent(child);
    if (parent < 0)
        throw ArgumentError("the root part has no deformation");
    if (child_type < 0 || child_type >= type_count(child) || parent_type < 0 || parent_type >= type_count(parent))
        throw ArgumentError("type pair out of range for part " + std::to_string(child));
    const std::size_t pair = static_cast<std::size_t>(child_type) * type_count(parent) + parent_type;
    return edge_offsets_[child] + pair * 10 + channel_index(ch) * 5;
}

std::size_t PartsModel::pair_bias_offset(int child, int child_type, int parent_type, Channel ch) const {
    return deformation_offset(child, child_type, parent_type, ch) + 4;
}

std::span<double> PartsModel::filter(int part, int type, Channel ch) {
    return {weights_.data() + filter_offset(part, type, ch), filter_size(part)};
}

std::span<const double> PartsModel::filter(int part, int type, Channel ch) const {
    return {weights_.data() + filter_offset(part, type, ch), filter_size(part)};
}

std::span<double> PartsModel::deformation(int child, int child_type, int parent_type, Channel ch) {
    return {weights_.data() + deformation_offset(child, child_type, parent_type, ch), 4};
}

std::span<const double> PartsModel::deformation(int child, int child_type, int parent_type, Channel ch) const {
    return {weights_.data() + deformation_offset(child, child_type, parent_type, ch), 4};
}

std::array<double, 4> PartsModel::combined_deformation(int child, int child_type, int parent_type) const {
    auto m = deformation(child, child_type, parent_type, Channel::monocular);
    auto d = deformation(child, child_type, parent_type, Channel::depth);
    return {m[0] + d[0], m[1] + d[1], m[2] + d[2], m[3] + d[3]};
}

double PartsModel::combined_pair_bias(int child, int child_type, int parent_type) const {
    return pair_bias(child, child_type, parent_type, Channel::monocular) +
           pair_bias(child, child_type, parent_type, Channel::depth);
}

double PartsModel::deformation_score(int child, int child_type, int parent_type, int dx, int dy) const {
    const auto w = combined_deformation(child, child_type, parent_type);
    return (w[0] * dx + w[1] * static_cast<double>(dx) * dx) + (w[2] * dy + w[3] * static_cast<double>(dy) * dy);
}

std::vector<std::size_t> PartsModel::quadratic_indices() const {
    std::vector<std::size_t> out;
    for (int i = 0; i < part_count(); ++i) {
        const int parent = skeleton_.parent(i);
        if (parent < 0)
            continue;
        for (int ti = 0; ti < type_count(i); ++ti)
            for (int tj = 0; tj < type_count(parent); ++tj)
                for (Channel ch : {Channel::monocular, Channel::depth}) {
                    const std::size_t o = deformation_offset(i, ti, tj, ch);
                    out.push_back(o + 1);
                    out.push_back(o + 3);
                }
    }
    return out;
}

namespace {

void check_grids(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd) {
    if (fm.rows() != fd.rows() || fm.cols() != fd.cols())
        throw DimensionError("monocular and depth feature grids differ in size");
    if (fm.dims() != model.feature_dims() || fd.dims() != model.feature_dims())
        throw DimensionError("feature dimension " + std::to_string(fm.dims()) + " does not match model (" +
                             std::to_string(model.feature_dims()) + ")");
    for (int i = 0; i < model.part_count(); ++i) {
        const auto s = model.filter_shape(i);
        if (s.rows > fm.rows() || s.cols > fm.cols())
            throw DimensionError("feature grid " + std::to_string(fm.rows()) + "x" + std::to_string(fm.cols()) +
                                 " smaller than filter of part " + std::to_string(i) + " (" +
                                 std::to_string(s.rows) + "x" + std::to_string(s.cols) + ")");
    }
}

ScoreGrid correlate(std::span<const double> filter, FilterShape shape, double bias, const FeatureGrid& f) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const int rows = f.rows();
    const int cols = f.cols();
    const int dims = f.dims();
    const int taps = shape.rows * shape.cols;
    const int r0 = shape.rows / 2;
    const int c0 = shape.cols / 2;
    // every tap against every cell in one product, then shift and add
    const Eigen::Map<const RowMat> feat(f.values().data(), static_cast<Eigen::Index>(rows) * cols, dims);
    const Eigen::Map<const RowMat> w(filter.data(), taps, dims);
    const RowMat prod = feat * w.transpose();
    ScoreGrid out(rows, cols, bias);
    for (int u = 0; u < shape.rows; ++u) {
        for (int v = 0; v < shape.cols; ++v) {
            const int tap = u * shape.cols + v;
            const int dr = u - r0;
            const int dc = v - c0;
            for (int r = std::max(0, -dr); r < std::min(rows, rows - dr); ++r)
                for (int c = std::max(0, -dc); c < std::min(cols, cols - dc); ++c)
                    out.at(r, c) += prod(static_cast<Eigen::Index>(r + dr) * cols + (c + dc), tap);
        }
    }
    return out;
}

}  // namespace

ChannelScores score_part_appearance(const PartsModel& model, int part, int type, const FeatureGrid& fm,
                                    const FeatureGrid& fd) {
    check_grids(model, fm, fd);
    const auto shape = model.filter_shape(part);
    return {correlate(model.filter(part, type, Channel::monocular), shape, model.bias(part, type, Channel::monocular), fm),
            correlate(model.filter(part, type, Channel::depth), shape, model.bias(part, type, Channel::depth), fd)};
}

ScoreGrid local_score(const PartsModel& model, int part, int type, const FeatureGrid& fm, const FeatureGrid& fd,
                      const std::map<int, ScoreGrid>& child_messages) {
    auto app = score_part_appearance(model, part, type, fm, fd);
    ScoreGrid out(fm.rows(), fm.cols());
    for (std::size_t k = 0; k < out.values().size(); ++k)
        out.values()[k] = app.monocular.values()[k] + app.depth.values()[k];
    for (int child : model.skeleton().children(part)) {
        auto it = child_messages.find(child);
        if (it == child_messages.end())
            throw ContractError("missing message from child part " + std::to_string(child) + " of part " +
                                std::to_string(part));
        if (it->second.rows() != out.rows() || it->second.cols() != out.cols())
            throw DimensionError("message grid size differs from the feature grid");
        for (std::size_t k = 0; k < out.values().size(); ++k)
            out.values()[k] += it->second.values()[k];
    }
    return out;
}

Message pass_message(const PartsModel& model, int child, int parent_type, const std::vector<ScoreGrid>& child_scores,
                     MessageMethod method) {
    const int types = model.type_count(child);
    if (static_cast<int>(child_scores.size()) != types)
        throw ContractError("expected " + std::to_string(types) + " score grids for part " + std::to_string(child));
    const int rows = child_scores.front().rows();
    const int cols = child_scores.front().cols();

    Message msg;
    msg.values = ScoreGrid(rows, cols, neg_inf);
    const std::size_t cells = static_cast<std::size_t>(rows) * cols;
    msg.best_type.assign(cells, -1);
    msg.best_row.assign(cells, -1);
    msg.best_col.assign(cells, -1);

    std::vector<double> line_in;
    std::vector<double> line_out;
    std::vector<int> line_arg;
    ScoreGrid pass1(rows, cols);
    std::vector<int> col_arg(cells);
    std::vector<int> row_arg(cells);

    for (int ti = 0; ti < types; ++ti) {
        const ScoreGrid& s = child_scores[ti];
        if (s.rows() != rows || s.cols() != cols)
            throw DimensionError("child score grids differ in size");
        const auto w = model.combined_deformation(child, ti, parent_type);
        const bool concave = w[1] < 0.0 && w[3] < 0.0;
        if (method == MessageMethod::distance_transform && !concave)
            throw ArgumentError("distance transform needs strictly negative quadratic deformation weights (part " +
                                std::to_string(child) + ")");
        const bool use_dt = method != MessageMethod::exhaustive && concave;
        auto transform = [&](double lin, double quad) {
            if (use_dt)
                max_envelope_1d(line_in, lin, quad, line_out, line_arg);
            else
                max_exhaustive_1d(line_in, lin, quad, line_out, line_arg);
        };

        // Along columns (dx), then along rows (dy).
        line_in.resize(cols);
        line_out.resize(cols);
        line_arg.resize(cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c)
                line_in[c] = s.at(r, c);
            transform(w[0], w[1]);
            for (int c = 0; c < cols; ++c) {
                pass1.at(r, c) = line_out[c];
                col_arg[static_cast<std::size_t>(r) * cols + c] = line_arg[c];
            }
        }
        line_in.resize(rows);
        line_out.resize(rows);
        line_arg.resize(rows);
        for (int c = 0; c < cols; ++c) {
            for (int r = 0; r < rows; ++r)
                line_in[r] = pass1.at(r, c);
            transform(w[2], w[3]);
            for (int r = 0; r < rows; ++r)
                row_arg[static_cast<std::size_t>(r) * cols + c] = line_arg[r];
        }

        const double bias = model.combined_pair_bias(child, ti, parent_type);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const std::size_t k = static_cast<std::size_t>(r) * cols + c;
                const int br = row_arg[k];
                if (br < 0)
                    continue;
                const int bc = col_arg[static_cast<std::size_t>(br) * cols + c];
                if (bc < 0)
                    continue;
                const double v =
                    bias + (s.at(br, bc) + model.deformation_score(child, ti, parent_type, bc - c, br - r));
                if (msg.best_type[k] < 0 || v > msg.values.at(r, c)) {
                    msg.values.at(r, c) = v;
                    msg.best_type[k] = ti;
                    msg.best_row[k] = br;
                    msg.best_col[k] = bc;
                }
            }
        }
    }
    return msg;
}

ScoreMaps compute_score_maps(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                             MessageMethod method) {
    check_grids(model, fm, fd);
    const auto& sk = model.skeleton();
    const int n = model.part_count();
    ScoreMaps maps;
    maps.local.resize(n);
    maps.messages.resize(n);
    auto order = sk.root_to_leaf();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int part = *it;
        for (int t = 0; t < model.type_count(part); ++t) {
            std::map<int, ScoreGrid> msgs;
            for (int child : sk.children(part))
                msgs.emplace(child, maps.messages[child][t].values);
            maps.local[part].push_back(local_score(model, part, t, fm, fd, msgs));
        }
        const int parent = sk.parent(part);
        if (parent < 0)
            continue;
        for (int tj = 0; tj < model.type_count(parent); ++tj)
            maps.messages[part].push_back(pass_message(model, part, tj, maps.local[part], method));
    }
    return maps;
}

Configuration backtrack(const PartsModel& model, const ScoreMaps& maps, PartState root) {
    const auto& sk = model.skeleton();
    Configuration config(model.part_count());
    config[0] = root;
    for (int part : sk.root_to_leaf()) {
        const PartState& p = config[part];
        for (int child : sk.children(part)) {
            const Message& m = maps.messages[child][p.type];
            const std::size_t k = static_cast<std::size_t>(p.row) * m.values.cols() + p.col;
            if (m.best_type[k] < 0)
                throw ContractError("no finite placement for part " + std::to_string(child));
            config[child] = {m.best_type[k], m.best_row[k], m.best_col[k]};
        }
    }
    return config;
}

namespace {

// Appearance (filter . features) of one placement, cells outside read as 0.
template <typename Visit>
void visit_window(const PartsModel& model, int part, const FeatureGrid& f, PartState s, Visit&& visit) {
    const auto shape = model.filter_shape(part);
    const int dims = f.dims();
    for (int u = 0; u < shape.rows; ++u) {
        const int fr = s.row - shape.rows / 2 + u;
        if (fr < 0 || fr >= f.rows())
            continue;
        for (int v = 0; v < shape.cols; ++v) {
            const int fc = s.col - shape.cols / 2 + v;
            if (fc < 0 || fc >= f.cols())
                continue;
            visit((static_cast<std::size_t>(u) * shape.cols + v) * dims, f.cell(fr, fc));
        }
    }
}

void check_config(const PartsModel& model, const FeatureGrid& fm, const Configuration& config) {
    if (static_cast<int>(config.size()) != model.part_count())
        throw ArgumentError("configuration has " + std::to_string(config.size()) + " parts, model has " +
                            std::to_string(model.part_count()));
    for (int i = 0; i < model.part_count(); ++i) {
        const auto& s = config[i];
        if (s.type < 0 || s.type >= model.type_count(i) || s.row < 0 || s.col < 0 || s.row >= fm.rows() ||
            s.col >= fm.cols())
            throw ArgumentError("part " + std::to_string(i) + " placed outside the grid or with a bad type");
    }
}

}  // namespace

double score_configuration(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                           const Configuration& config) {
    check_grids(model, fm, fd);
    check_config(model, fm, config);
    double total = 0.0;
    for (int i = 0; i < model.part_count(); ++i) {
        const auto& s = config[i];
        for (Channel ch : {Channel::monocular, Channel::depth}) {
            const auto w = model.filter(i, s.type, ch);
            double app = 0.0;
            visit_window(model, i, ch == Channel::monocular ? fm : fd, s, [&](std::size_t off, auto cell) {
                for (std::size_t k = 0; k < cell.size(); ++k)
                    app += w[off + k] * cell[k];
            });
            total += app + model.bias(i, s.type, ch);
        }
        const int parent = model.skeleton().parent(i);
        if (parent < 0)
            continue;
        const auto& p = config[parent];
        const auto psi = deformation_feature({double(s.col), double(s.row)}, {double(p.col), double(p.row)});
        for (Channel ch : {Channel::monocular, Channel::depth}) {
            const auto w = model.deformation(i, s.type, p.type, ch);
            total += w[0] * psi[0] + w[1] * psi[1] + w[2] * psi[2] + w[3] * psi[3];
            total += model.pair_bias(i, s.type, p.type, ch);
        }
    }
    return total;
}

JointFeature joint_feature(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                           const Configuration& config) {
    check_grids(model, fm, fd);
    check_config(model, fm, config);
    JointFeature phi;
    for (int i = 0; i < model.part_count(); ++i) {
        const auto& s = config[i];
        for (Channel ch : {Channel::monocular, Channel::depth}) {
            FeatureSegment seg;
            seg.offset = model.filter_offset(i, s.type, ch);
            seg.values.assign(model.filter_size(i) + 1, 0.0);
            visit_window(model, i, ch == Channel::monocular ? fm : fd, s, [&](std::size_t off, auto cell) {
                std::copy(cell.begin(), cell.end(), seg.values.begin() + static_cast<std::ptrdiff_t>(off));
            });
            seg.values.back() = 1.0;
            phi.push_back(std::move(seg));
        }
        const int parent = model.skeleton().parent(i);
        if (parent < 0)
            continue;
        const auto& p = config[parent];
        const auto psi = deformation_feature({double(s.col), double(s.row)}, {double(p.col), double(p.row)});
        for (Channel ch : {Channel::monocular, Channel::depth}) {
            FeatureSegment seg;
            seg.offset = model.deformation_offset(i, s.type, p.type, ch);
            seg.values = {psi[0], psi[1], psi[2], psi[3], 1.0};
            phi.push_back(std::move(seg));
        }
    }
    return phi;
}

double dot(const std::vector<double>& weights, const JointFeature& phi) {
    double total = 0.0;
    for (const auto& seg : phi) {
        if (seg.offset + seg.values.size() > weights.size())
            throw DimensionError("joint feature exceeds weight vector");
        for (std::size_t k = 0; k < seg.values.size(); ++k)
            total += weights[seg.offset + k] * seg.values[k];
    }
    return total;
}

double squared_norm(const JointFeature& phi) {
    double total = 0.0;
    for (const auto& seg : phi)
        for (double v : seg.values)
            total += v * v;
    return total;
}

void InferenceParams::validate() const {
    if (max_detections < 1)
        throw ConfigError("max_detections must be >= 1");
    if (nms_overlap < 0.0 || nms_overlap > 1.0)
        throw ConfigError("nms overlap must lie in [0, 1]");
    if (octaves < 0 || levels_per_octave < 1)
        throw ConfigError("pyramid needs octaves >= 0 and levels_per_octave >= 1");
}

Point2d cell_center(int row, int col, int cell_size, double scale) {
    return {(col + 0.5) * cell_size / scale, (row + 0.5) * cell_size / scale};
}

PartState pixel_to_cell(double x, double y, int cell_size, int rows, int cols, double scale) {
    const int c = static_cast<int>(std::floor(x * scale / cell_size));
    const int r = static_cast<int>(std::floor(y * scale / cell_size));
    return {0, std::clamp(r, 0, rows - 1), std::clamp(c, 0, cols - 1)};
}

namespace {

struct Box {
    double x0, y0, x1, y1;
};

Box pose_box(const PartsModel& model, const Detection& d) {
    Box b{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};
    const double cs = model.cell_size() / d.scale;
    for (int i = 0; i < model.part_count(); ++i) {
        const auto shape = model.filter_shape(i);
        const auto& s = d.config[i];
        const double x0 = (s.col - shape.cols / 2) * cs;
        const double y0 = (s.row - shape.rows / 2) * cs;
        b.x0 = std::min(b.x0, x0);
        b.y0 = std::min(b.y0, y0);
        b.x1 = std::max(b.x1, x0 + shape.cols * cs);
        b.y1 = std::max(b.y1, y0 + shape.rows * cs);
    }
    return b;
}

double iou(const Box& a, const Box& b) {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (w <= 0.0 || h <= 0.0)
        return 0.0;
    const double inter = w * h;
    const double uni = (a.x1 - a.x0) * (a.y1 - a.y0) + (b.x1 - b.x0) * (b.y1 - b.y0) - inter;
    return inter / uni;
}

Pose to_pose(const PartsModel& model, const Configuration& config, double score, double scale) {
    Pose pose;
    pose.skeleton_kind = kind_of(model.skeleton());
    pose.total_score = score;
    for (int i = 0; i < model.part_count(); ++i) {
        const auto p = cell_center(config[i].row, config[i].col, model.cell_size(), scale);
        pose.joints.push_back({i, p.x, p.y, config[i].type, score});
    }
    return pose;
}

struct Candidate {
    double score;
    int level;
    PartState root;
};

struct Level {
    double scale;
    ScoreMaps maps;
};

std::vector<Detection> select(const PartsModel& model, const std::vector<Level>& levels,
                              const InferenceParams& params) {
    std::vector<Candidate> cands;
    for (int l = 0; l < static_cast<int>(levels.size()); ++l) {
        const auto& root_maps = levels[l].maps.local[0];
        for (int t = 0; t < static_cast<int>(root_maps.size()); ++t) {
            const auto& g = root_maps[t];
            for (int r = 0; r < g.rows(); ++r)
                for (int c = 0; c < g.cols(); ++c) {
                    const double v = g.at(r, c);
                    if (std::isfinite(v) && v >= params.threshold)
                        cands.push_back({v, l, {t, r, c}});
                }
        }
    }
    // Ties keep level, type, row, col order for determinism.
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    std::vector<Detection> out;
    std::vector<Box> kept;
    for (const auto& cand : cands) {
        if (static_cast<int>(out.size()) >= params.max_detections)
            break;
        Detection d;
        d.score = cand.score;
        d.level = cand.level;
        d.scale = levels[cand.level].scale;
        d.config = backtrack(model, levels[cand.level].maps, cand.root);
        const Box box = pose_box(model, d);
        bool suppressed = false;
        for (const auto& k : kept)
            if (iou(box, k) > params.nms_overlap) {
                suppressed = true;
                break;
            }
        if (suppressed)
            continue;
        d.pose = to_pose(model, d.config, d.score, d.scale);
        kept.push_back(box);
        out.push_back(std::move(d));
    }
    return out;
}

template <typename T>
Image<T> resize_image(const Image<T>& src, int width, int height, bool nearest) {
    const int type = CV_MAKETYPE(cv::DataType<T>::depth, src.channels());
    cv::Mat in(src.height(), src.width(), type, const_cast<T*>(src.data().data()));
    cv::Mat out;
    cv::resize(in, out, cv::Size(width, height), 0, 0, nearest ? cv::INTER_NEAREST : cv::INTER_AREA);
    Image<T> dst(width, height, src.channels());
    std::copy(out.ptr<T>(0), out.ptr<T>(0) + dst.data().size(), dst.data().begin());
    return dst;
}

}  // namespace

std::vector<Detection> infer_poses(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                                   const InferenceParams& params) {
    params.validate();
    std::vector<Level> levels;
    levels.push_back({1.0, compute_score_maps(model, fm, fd, params.method)});
    return select(model, levels, params);
}

std::vector<Detection> infer_poses(const PartsModel& model, const RgbdFrame& frame, const InferenceParams& params) {
    params.validate();
    const auto hog = model.hog_params();
    std::vector<Level> levels;
    const int steps = params.pyramid ? params.octaves * params.levels_per_octave : 0;
    for (int k = 0; k <= steps; ++k) {
        const double scale = std::pow(2.0, -static_cast<double>(k) / params.levels_per_octave);
        const int w = static_cast<int>(std::lround(frame.width() * scale));
        const int h = static_cast<int>(std::lround(frame.height() * scale));
        if (k == 0) {
            levels.push_back({1.0, compute_score_maps(model, compute_hog(frame.rgb, hog), compute_hog(frame.depth, hog),
                                                      params.method)});
            continue;
        }
        if (w < 3 * hog.cell_size || h < 3 * hog.cell_size)
            break;
        const auto rgb = resize_image(frame.rgb, w, h, false);
        const auto depth = resize_image(frame.depth, w, h, true);
        const auto fm = compute_hog(rgb, hog);
        const auto fd = compute_hog(depth, hog);
        bool fits = true;
        for (const auto& s : model.filter_shapes())
            fits = fits && s.rows <= fm.rows() && s.cols <= fm.cols();
        if (!fits)
            break;
        // Pixel positions map back through the actual resized width.
        levels.push_back({static_cast<double>(w) / frame.width(), compute_score_maps(model, fm, fd, params.method)});
    }
    return select(model, levels, params);
}

}  // namespace dpm4d
