#include "dpm4d/distance_transform.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "dpm4d/errors.hpp"

namespace dpm4d {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double term(double lin, double quad, int d) {
    return lin * d + quad * static_cast<double>(d) * d;
}

}  // namespace

// Expanding the quadratic, in[q] + lin (q - p) + quad (q - p)^2 equals
//   (-lin p + quad p^2) + [in[q] + lin q + quad q^2] + (-2 quad q) p
// so for fixed p we want the upper envelope of lines in p with slope
// -2 quad q (increasing in q when quad < 0) and intercept h(q).
void max_envelope_1d(std::span<const double> in, double lin, double quad, std::span<double> out,
                     std::span<int> arg) {
    if (!(quad < 0.0))
        throw ArgumentError("envelope transform needs a strictly negative quadratic weight");
    const int n = static_cast<int>(in.size());
    if (out.size() != in.size() || arg.size() != in.size())
        throw DimensionError("transform buffers differ in length");

    std::vector<int> hull;
    std::vector<double> slope;
    std::vector<double> icpt;
    hull.reserve(n);
    auto line_slope = [&](int q) { return -2.0 * quad * q; };
    auto line_icpt = [&](int q) { return in[q] + lin * q + quad * static_cast<double>(q) * q; };

    for (int q = 0; q < n; ++q) {
        if (in[q] == neg_inf)
            continue;
        const double s = line_slope(q);
        const double b = line_icpt(q);
        // Drop lines that are never strictly on top once q is added.
        while (hull.size() >= 2) {
            const std::size_t k = hull.size();
            const double s1 = slope[k - 2], b1 = icpt[k - 2];
            const double s2 = slope[k - 1], b2 = icpt[k - 1];
            // line 2 is useless if intersection(1, q) <= intersection(1, 2)
            if ((b - b1) * (s2 - s1) >= (b2 - b1) * (s - s1)) {
                hull.pop_back();
                slope.pop_back();
                icpt.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(q);
        slope.push_back(s);
        icpt.push_back(b);
    }

    if (hull.empty()) {
        for (int p = 0; p < n; ++p) {
            out[p] = neg_inf;
            arg[p] = -1;
        }
        return;
    }
    std::size_t k = 0;
    for (int p = 0; p < n; ++p) {
        while (k + 1 < hull.size() && slope[k + 1] * p + icpt[k + 1] >= slope[k] * p + icpt[k])
            ++k;
        const int q = hull[k];
        arg[p] = q;
        out[p] = in[q] + term(lin, quad, q - p);
    }
}

void max_exhaustive_1d(std::span<const double> in, double lin, double quad, std::span<double> out,
                       std::span<int> arg) {
    const int n = static_cast<int>(in.size());
    if (out.size() != in.size() || arg.size() != in.size())
        throw DimensionError("transform buffers differ in length");
    for (int p = 0; p < n; ++p) {
        double best = neg_inf;
        int best_q = -1;
        for (int q = 0; q < n; ++q) {
            if (in[q] == neg_inf)
                continue;
            const double v = in[q] + term(lin, quad, q - p);
            if (best_q < 0 || v > best) {
                best = v;
                best_q = q;
            }
        }
        out[p] = best;
        arg[p] = best_q;
    }
}

}  // namespace dpm4d
