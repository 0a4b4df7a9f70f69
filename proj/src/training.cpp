#include "dpm4d/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace dpm4d {

void TrainConfig::validate() const {
    if (!(C > 0.0) || !std::isfinite(C))
        throw ConfigError("training C must be a positive finite number");
    if (max_iterations < 1 || solver_passes < 1)
        throw ConfigError("training iteration counts must be >= 1");
    if (tolerance < 0.0)
        throw ConfigError("training tolerance must be non-negative");
    if (quadratic_bound < 0.0)
        throw ConfigError("quadratic bound must be non-negative");
    if (negatives_per_image < 1)
        throw ConfigError("negatives_per_image must be >= 1");
}

namespace {

double negative_best(const PartsModel& model, const NegativeSample& n) {
    auto maps = compute_score_maps(model, n.fm, n.fd);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& g : maps.local[0])
        for (double v : g.values())
            best = std::max(best, v);
    return best;
}

double half_norm2(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w)
        s += v * v;
    return 0.5 * s;
}

}  // namespace

ObjectiveReport svm_objective(const PartsModel& model, const std::vector<LabeledSample>& positives,
                              const std::vector<NegativeSample>& negatives, double C) {
    ObjectiveReport rep;
    rep.regularizer = half_norm2(model.weights());
    for (const auto& p : positives) {
        const double s = score_configuration(model, p.fm, p.fd, p.config);
        const double xi = std::max(0.0, 1.0 - s);
        rep.positive_slack.push_back(xi);
        rep.loss += xi;
        rep.violations += xi > 0.0;
    }
    for (const auto& n : negatives) {
        const double xi = std::max(0.0, 1.0 + negative_best(model, n));
        rep.negative_slack.push_back(xi);
        rep.loss += xi;
        rep.violations += xi > 0.0;
    }
    rep.value = rep.regularizer + C * rep.loss;
    return rep;
}

std::vector<std::vector<int>> assign_types(const SkeletonDef& skeleton,
                                           const std::vector<std::vector<Point2d>>& joints, int types,
                                           std::uint64_t seed) {
    if (types < 1)
        throw ArgumentError("type count must be >= 1");
    const int n = skeleton.part_count();
    const std::size_t samples = joints.size();
    for (const auto& j : joints)
        if (static_cast<int>(j.size()) != n)
            throw ArgumentError("every sample needs one joint per part");
    std::vector<std::vector<int>> out(samples, std::vector<int>(n, 0));
    std::mt19937_64 rng(seed);

    for (int part = 0; part < n; ++part) {
        std::vector<std::vector<double>> pts(samples);
        for (std::size_t s = 0; s < samples; ++s) {
            const int parent = skeleton.parent(part);
            if (parent >= 0) {
                pts[s] = {joints[s][part].x - joints[s][parent].x, joints[s][part].y - joints[s][parent].y};
            } else {
                for (int k : skeleton.children(part)) {
                    pts[s].push_back(joints[s][k].x - joints[s][part].x);
                    pts[s].push_back(joints[s][k].y - joints[s][part].y);
                }
            }
        }
        if (samples == 0 || pts[0].empty())
            continue;
        auto dist2 = [](const std::vector<double>& a, const std::vector<double>& b) {
            double d = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k)
                d += (a[k] - b[k]) * (a[k] - b[k]);
            return d;
        };
        const int k = std::min<int>(types, static_cast<int>(samples));
        // k-means++ seeding
        std::vector<std::vector<double>> centres;
        centres.push_back(pts[std::uniform_int_distribution<std::size_t>(0, samples - 1)(rng)]);
        std::vector<double> d2(samples);
        while (static_cast<int>(centres.size()) < k) {
            double total = 0.0;
            for (std::size_t s = 0; s < samples; ++s) {
                d2[s] = std::numeric_limits<double>::max();
                for (const auto& c : centres)
                    d2[s] = std::min(d2[s], dist2(pts[s], c));
                total += d2[s];
            }
            if (total <= 0.0)
                break;
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            std::size_t pick = 0;
            for (; pick + 1 < samples; ++pick) {
                r -= d2[pick];
                if (r <= 0.0)
                    break;
            }
            centres.push_back(pts[pick]);
        }
        std::vector<int> label(samples, 0);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (std::size_t s = 0; s < samples; ++s) {
                int best = 0;
                double bd = std::numeric_limits<double>::max();
                for (int c = 0; c < static_cast<int>(centres.size()); ++c) {
                    const double d = dist2(pts[s], centres[c]);
                    if (d < bd) {
                        bd = d;
                        best = c;
                    }
                }
                changed = changed || label[s] != best;
                label[s] = best;
            }
            if (!changed && iter > 0)
                break;
            for (int c = 0; c < static_cast<int>(centres.size()); ++c) {
                std::vector<double> sum(pts[0].size(), 0.0);
                int count = 0;
                for (std::size_t s = 0; s < samples; ++s)
                    if (label[s] == c) {
                        for (std::size_t q = 0; q < sum.size(); ++q)
                            sum[q] += pts[s][q];
                        ++count;
                    }
                if (count == 0)
                    continue;
                for (auto& v : sum)
                    v /= count;
                centres[c] = sum;
            }
        }
        // Relabel clusters by first appearance so labels do not depend on seeding order.
        std::vector<int> remap(centres.size(), -1);
        int next = 0;
        for (std::size_t s = 0; s < samples; ++s) {
            if (remap[label[s]] < 0)
                remap[label[s]] = next++;
            out[s][part] = remap[label[s]];
        }
    }
    return out;
}

namespace {

struct CacheEntry {
    JointFeature phi;  // segments sorted by offset
    double label = 1.0;
    int block = 0;
    double alpha = 0.0;
    double margin = 0.0;                     // w . phi, kept current by the solver
    std::vector<std::pair<int, double>> bounded;  // (bound index, value) of quadratic coordinates
    std::vector<int> key;                    // negatives only
};

struct Evaluation {
    double objective = 0.0;
    std::vector<std::vector<Detection>> mined;  // per negative
};

std::vector<int> config_key(int block, const Configuration& c) {
    std::vector<int> key{block};
    for (const auto& s : c) {
        key.push_back(s.type);
        key.push_back(s.row);
        key.push_back(s.col);
    }
    return key;
}

// Segments live at fixed offsets with fixed lengths, so two features only
// meet where their offsets agree.
double sparse_dot(const JointFeature& a, const JointFeature& b) {
    double total = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].offset < b[j].offset) {
            ++i;
        } else if (b[j].offset < a[i].offset) {
            ++j;
        } else {
            const auto& x = a[i].values;
            const auto& y = b[j].values;
            for (std::size_t k = 0; k < x.size(); ++k)
                total += x[k] * y[k];
            ++i;
            ++j;
        }
    }
    return total;
}

// Dual coordinate descent on the cached constraints, written against the
// Gram matrix so one coordinate step costs O(cache size).
//   max  sum alpha_i - 1/2 |w|^2 - eps sum mu_k
//   w = sum alpha_i y_i phi_i - sum mu_k e_k,  0 <= sum_{i in block} alpha_i <= C,  mu >= 0
class CacheSolver {
public:
    CacheSolver(std::vector<std::size_t> bounded, std::size_t dims, double C, double eps)
        : bounded_(std::move(bounded)), index_(dims, -1), mu_(bounded_.size(), eps), C_(C), eps_(eps) {
        for (std::size_t k = 0; k < bounded_.size(); ++k)
            index_[bounded_[k]] = static_cast<int>(k);
    }

    std::vector<CacheEntry>& entries() { return cache_; }
    std::size_t size() const { return cache_.size(); }

    // w for the current duals, dense.
    std::vector<double> weights(std::size_t dims) const {
        std::vector<double> w(dims, 0.0);
        for (const auto& e : cache_) {
            if (e.alpha == 0.0)
                continue;
            for (const auto& seg : e.phi)
                for (std::size_t k = 0; k < seg.values.size(); ++k)
                    w[seg.offset + k] += e.alpha * e.label * seg.values[k];
        }
        for (std::size_t k = 0; k < bounded_.size(); ++k)
            w[bounded_[k]] -= mu_[k];
        return w;
    }

    void add(CacheEntry e, std::vector<double>& block_sum) {
        std::sort(e.phi.begin(), e.phi.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
        for (const auto& seg : e.phi)
            for (std::size_t k = 0; k < seg.values.size(); ++k)
                if (const int b = index_[seg.offset + k]; b >= 0 && seg.values[k] != 0.0)
                    e.bounded.emplace_back(b, seg.values[k]);
        const std::size_t n = cache_.size();
        std::vector<double> row(n + 1);
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = sparse_dot(e.phi, cache_[j].phi);
            gram_[j].push_back(row[j]);
        }
        row[n] = sparse_dot(e.phi, e.phi);
        gram_.push_back(std::move(row));
        // margin under the current duals
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            m += cache_[j].alpha * cache_[j].label * gram_[n][j];
        for (const auto& [b, v] : e.bounded)
            m -= mu_[b] * v;
        e.margin = m;
        block_sum[e.block] += e.alpha;
        cache_.push_back(std::move(e));
    }

    // Keeps entries for which keep(e) is true; dropped entries must have alpha 0.
    template <typename Keep>
    void prune(Keep keep) {
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < cache_.size(); ++i)
            if (keep(cache_[i]))
                kept.push_back(i);
        std::vector<CacheEntry> c;
        std::vector<std::vector<double>> g;
        for (std::size_t a : kept) {
            c.push_back(std::move(cache_[a]));
            std::vector<double> row;
            row.reserve(kept.size());
            for (std::size_t b : kept)
                row.push_back(gram_[a][b]);
            g.push_back(std::move(row));
        }
        cache_.swap(c);
        gram_.swap(g);
    }

    void solve(int passes, std::vector<double>& block_sum, std::mt19937_64& rng) {
        const std::size_t n = cache_.size();
        std::vector<std::vector<std::pair<int, double>>> by_bound(bounded_.size());
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& [b, v] : cache_[i].bounded)
                by_bound[b].emplace_back(static_cast<int>(i), v);
        // bounded coordinates of w
        std::vector<double> wb(bounded_.size(), 0.0);
        for (std::size_t k = 0; k < bounded_.size(); ++k)
            wb[k] = -mu_[k];
        for (const auto& e : cache_)
            for (const auto& [b, v] : e.bounded)
                wb[b] += e.alpha * e.label * v;

        std::vector<std::size_t> order(n);
        for (int pass = 0; pass < passes; ++pass) {
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            double worst = 0.0;  // largest projected gradient seen this pass
            for (std::size_t i : order) {
                auto& e = cache_[i];
                const double kii = gram_[i][i];
                if (kii <= 0.0)
                    continue;
                const double grad = e.label * e.margin - 1.0;
                const double upper = std::max(0.0, C_ - (block_sum[e.block] - e.alpha));
                const double a = std::clamp(e.alpha - grad / kii, 0.0, upper);
                const double delta = a - e.alpha;
                if (delta == 0.0)
                    continue;
                worst = std::max(worst, std::abs(delta) * kii);
                const double s = delta * e.label;
                const auto& row = gram_[i];
                for (std::size_t j = 0; j < n; ++j)
                    cache_[j].margin += s * row[j];
                for (const auto& [b, v] : e.bounded)
                    wb[b] += s * v;
                block_sum[e.block] += delta;
                e.alpha = a;
            }
            for (std::size_t k = 0; k < bounded_.size(); ++k) {
                const double m = std::max(0.0, mu_[k] + wb[k] + eps_);
                const double d = m - mu_[k];
                if (d == 0.0)
                    continue;
                worst = std::max(worst, std::abs(d));
                wb[k] -= d;
                for (const auto& [j, v] : by_bound[k])
                    cache_[j].margin -= d * v;
                mu_[k] = m;
            }
            if (worst < 1e-9)
                break;
        }
    }

private:
    std::vector<std::size_t> bounded_;
    std::vector<int> index_;  // weight index -> bound index or -1
    std::vector<double> mu_;
    double C_;
    double eps_;
    std::vector<CacheEntry> cache_;
    std::vector<std::vector<double>> gram_;
};

}  // namespace

TrainResult train_toy(const TrainConfig& config, PartsModel initial, const std::vector<LabeledSample>& positives,
                      const std::vector<NegativeSample>& negatives) {
    config.validate();
    if (positives.empty())
        throw ConfigError("training needs at least one positive sample");

    TrainResult result;
    PartsModel model = std::move(initial);
    const std::size_t dims = model.weights().size();
    const double C = config.C;
    const int npos = static_cast<int>(positives.size());

    CacheSolver solver(model.quadratic_indices(), dims, C, config.quadratic_bound);
    std::set<std::vector<int>> keys;
    std::vector<double> block_sum(npos + negatives.size(), 0.0);
    std::vector<JointFeature> pos_phi;
    for (int p = 0; p < npos; ++p) {
        pos_phi.push_back(joint_feature(model, positives[p].fm, positives[p].fd, positives[p].config));
        CacheEntry e;
        e.phi = pos_phi.back();
        e.label = 1.0;
        e.block = p;
        solver.add(std::move(e), block_sum);
    }

    InferenceParams mining;
    mining.max_detections = config.negatives_per_image;

    auto evaluate = [&](const std::vector<double>& weights) {
        model.weights() = weights;
        Evaluation ev;
        double loss = 0.0;
        for (int p = 0; p < npos; ++p)
            loss += std::max(0.0, 1.0 - dot(weights, pos_phi[p]));
        for (const auto& n : negatives) {
            ev.mined.push_back(infer_poses(model, n.fm, n.fd, mining));
            const double best = ev.mined.back().empty() ? -std::numeric_limits<double>::infinity()
                                                        : ev.mined.back().front().score;
            loss += std::max(0.0, 1.0 + best);
        }
        ev.objective = half_norm2(weights) + C * loss;
        return ev;
    };

    // Largest amount by which a freshly mined negative beats the cache.
    auto new_violation = [&](const Evaluation& ev, const std::vector<double>& weights) {
        std::vector<double> cached(negatives.size(), -std::numeric_limits<double>::infinity());
        for (const auto& e : solver.entries())
            if (e.block >= npos)
                cached[e.block - npos] = std::max(cached[e.block - npos], dot(weights, e.phi));
        double worst = 0.0;
        for (std::size_t n = 0; n < negatives.size(); ++n) {
            if (ev.mined[n].empty())
                continue;
            const double mined = std::max(-1.0, ev.mined[n].front().score);
            const double have = std::max(-1.0, cached[n]);
            worst = std::max(worst, mined - have);
        }
        return worst;
    };

    auto add_mined = [&](const Evaluation& ev) {
        for (std::size_t n = 0; n < negatives.size(); ++n)
            for (const auto& det : ev.mined[n]) {
                const int block = npos + static_cast<int>(n);
                auto key = config_key(block, det.config);
                if (!keys.insert(key).second)
                    continue;
                CacheEntry e;
                e.key = std::move(key);
                e.phi = joint_feature(model, negatives[n].fm, negatives[n].fd, det.config);
                e.label = -1.0;
                e.block = block;
                solver.add(std::move(e), block_sum);
            }
    };

    // Start from the dual point alpha = 0, mu = eps: every quadratic weight on the bound.
    std::vector<double> current = solver.weights(dims);
    Evaluation ev = evaluate(current);
    double f_current = ev.objective;
    result.objective_log.push_back(f_current);
    add_mined(ev);

    // Cutting planes: solve on the cache, mine at the cache optimum, keep the
    // best iterate seen. Stops once fresh mining no longer beats the cache.
    std::mt19937_64 rng(config.seed);
    bool converged = false;
    for (int it = 0; it < config.max_iterations; ++it) {
        solver.solve(config.solver_passes, block_sum, rng);
        std::vector<double> w = solver.weights(dims);
        Evaluation tev = evaluate(w);
        const double violation = new_violation(tev, w);
        add_mined(tev);
        if (tev.objective <= f_current) {
            current = std::move(w);
            f_current = tev.objective;
            result.objective_log.push_back(f_current);
        }
        result.max_new_violation = violation;
        if (violation <= config.tolerance) {
            converged = true;
            break;
        }

        // Drop inactive negatives that the cache solution satisfies with room to spare.
        solver.prune([&](const CacheEntry& e) {
            const bool keep = e.label > 0 || e.alpha > 0.0 || e.label * e.margin < 1.0;
            if (!keep)
                keys.erase(e.key);
            return keep;
        });
    }

    model.weights() = current;
    for (std::size_t i : model.quadratic_indices())
        if (model.weights()[i] > 0.0)
            throw ContractError("trained model has a positive quadratic deformation weight");
    result.converged = converged;
    if (!converged)
        result.warnings.push_back("training stopped at the iteration cap without converging; returning the best iterate");
    result.final_report = svm_objective(model, positives, negatives, C);
    result.model = std::move(model);
    return result;
}

}  // namespace dpm4d
