#pragma once
// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dpm4d/parts_model.hpp"

namespace dpm4d::testing {

inline FeatureGrid random_grid(int rows, int cols, int bins, std::mt19937_64& rng) {
    FeatureGrid g(rows, cols, 4 * bins, 8, bins);
    std::uniform_real_distribution<double> u(0.0, 0.2);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            for (double& v : g.cell(r, c))
                v = u(rng);
    return g;
}

// Random tree over `parts` nodes, parents drawn from earlier nodes.
inline SkeletonDef random_tree(int parts, std::mt19937_64& rng) {
    std::vector<std::string> names;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < parts; ++i) {
        names.push_back("p" + std::to_string(i));
        if (i > 0)
            edges.emplace_back(std::uniform_int_distribution<int>(0, i - 1)(rng), i);
    }
    return SkeletonDef(names, edges);
}

// Random weights. Quadratic deformation terms are negative unless
// `allow_convex`, in which case some pairs get a positive one.
inline void randomize(PartsModel& m, std::mt19937_64& rng, bool allow_convex = false) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (double& w : m.weights())
        w = n(rng);
    std::uniform_real_distribution<double> q(0.05, 0.8);
    std::bernoulli_distribution flip(0.3);
    for (std::size_t i : m.quadratic_indices()) {
        m.weights()[i] = -q(rng);
        if (allow_convex && flip(rng))
            m.weights()[i] = q(rng);
    }
}

// Filter response computed cell by cell, filter anchored at (rows/2, cols/2),
// zero features off the grid.
inline double appearance(const PartsModel& m, int part, int type, const FeatureGrid& fm, const FeatureGrid& fd,
                         int row, int col) {
    const FilterShape s = m.filter_shape(part);
    const int d = fm.dims();
    double total = m.bias(part, type, Channel::monocular) + m.bias(part, type, Channel::depth);
    for (auto [ch, grid] : {std::pair{Channel::monocular, &fm}, std::pair{Channel::depth, &fd}}) {
        const auto f = m.filter(part, type, ch);
        for (int a = 0; a < s.rows; ++a)
            for (int b = 0; b < s.cols; ++b) {
                const int r = row + a - s.rows / 2;
                const int c = col + b - s.cols / 2;
                if (r < 0 || c < 0 || r >= grid->rows() || c >= grid->cols())
                    continue;
                const auto cell = grid->cell(r, c);
                for (int k = 0; k < d; ++k)
                    total += f[(a * s.cols + b) * d + k] * cell[k];
            }
    }
    return total;
}

// Pairwise term of child i at (ri, ci, ti) against its parent at (rj, cj, tj):
// both channels, displacement child minus parent in cells.
inline double pairwise(const PartsModel& m, int child, int ti, int tj, int ri, int ci, int rj, int cj) {
    const double dx = ci - cj, dy = ri - rj;
    const double psi[4] = {dx, dx * dx, dy, dy * dy};
    double s = 0.0;
    for (Channel ch : {Channel::monocular, Channel::depth}) {
        const auto w = m.deformation(child, ti, tj, ch);
        for (int k = 0; k < 4; ++k)
            s += w[k] * psi[k];
        s += m.pair_bias(child, ti, tj, ch);
    }
    return s;
}

struct BruteResult {
    double score = -std::numeric_limits<double>::infinity();
    Configuration config;
    long long evaluated = 0;
};

// Every joint assignment of (type, row, col) to every part, scored term by term.
inline BruteResult brute_force(const PartsModel& m, const FeatureGrid& fm, const FeatureGrid& fd) {
    const int P = m.part_count();
    const int R = fm.rows(), C = fm.cols();
    std::vector<std::vector<PartState>> states(P);
    std::vector<std::vector<double>> app(P);
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < m.type_count(p); ++t)
            for (int r = 0; r < R; ++r)
                for (int c = 0; c < C; ++c) {
                    states[p].push_back({t, r, c});
                    app[p].push_back(appearance(m, p, t, fm, fd, r, c));
                }
    BruteResult best;
    std::vector<std::size_t> idx(P, 0);
    Configuration cfg(P);
    while (true) {
        double s = 0.0;
        for (int p = 0; p < P; ++p) {
            cfg[p] = states[p][idx[p]];
            s += app[p][idx[p]];
        }
        for (int p = 1; p < P; ++p) {
            const int q = m.skeleton().parent(p);
            s += pairwise(m, p, cfg[p].type, cfg[q].type, cfg[p].row, cfg[p].col, cfg[q].row, cfg[q].col);
        }
        ++best.evaluated;
        if (s > best.score) {
            best.score = s;
            best.config = cfg;
        }
        int p = 0;
        while (p < P && ++idx[p] == states[p].size()) {
            idx[p] = 0;
            ++p;
        }
        if (p == P)
            break;
    }
    return best;
}

// Same maximum without enumerating the product space: every child state is
// tried against every parent state (no distance transform), recursively.
inline BruteResult tree_exhaustive(const PartsModel& m, const FeatureGrid& fm, const FeatureGrid& fd) {
    const int P = m.part_count();
    const int R = fm.rows(), C = fm.cols();
    const auto& sk = m.skeleton();
    std::vector<std::vector<PartState>> states(P);
    std::vector<std::vector<double>> value(P);  // subtree score per state
    std::vector<std::vector<std::size_t>> arg(P);  // best own state per parent state
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < m.type_count(p); ++t)
            for (int r = 0; r < R; ++r)
                for (int c = 0; c < C; ++c) {
                    states[p].push_back({t, r, c});
                    value[p].push_back(appearance(m, p, t, fm, fd, r, c));
                }
    const auto& order = sk.root_to_leaf();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int p = *it;
        if (p == 0)
            continue;
        const int q = sk.parent(p);
        arg[p].assign(states[q].size(), 0);
        for (std::size_t j = 0; j < states[q].size(); ++j) {
            const PartState& sq = states[q][j];
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < states[p].size(); ++i) {
                const PartState& sp = states[p][i];
                const double v = value[p][i] + pairwise(m, p, sp.type, sq.type, sp.row, sp.col, sq.row, sq.col);
                if (v > best) {
                    best = v;
                    arg[p][j] = i;
                }
            }
            value[q][j] += best;
        }
    }
    BruteResult out;
    std::size_t root = 0;
    for (std::size_t j = 0; j < states[0].size(); ++j)
        if (value[0][j] > out.score) {
            out.score = value[0][j];
            root = j;
        }
    std::vector<std::size_t> chosen(P, 0);
    chosen[0] = root;
    out.config.assign(P, {});
    for (int p : order) {
        if (p != 0)
            chosen[p] = arg[p][chosen[sk.parent(p)]];
        out.config[p] = states[p][chosen[p]];
    }
    out.evaluated = 0;
    return out;
}

inline long long state_product(const PartsModel& m, int rows, int cols) {
    long long prod = 1;
    for (int p = 0; p < m.part_count(); ++p)
        prod *= static_cast<long long>(m.type_count(p)) * rows * cols;
    return prod;
}

}  // namespace dpm4d::testing
