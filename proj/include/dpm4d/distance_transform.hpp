#pragma once

#include <span>

namespace dpm4d {

// out[p] = max over q of in[q] + lin * (q - p) + quad * (q - p)^2, arg[p] = q.
// Values at -inf never win unless the whole input is -inf (then arg = -1).
// The envelope variant needs quad < 0 and runs in O(n).
void max_envelope_1d(std::span<const double> in, double lin, double quad, std::span<double> out,
                     std::span<int> arg);
void max_exhaustive_1d(std::span<const double> in, double lin, double quad, std::span<double> out,
                       std::span<int> arg);

}  // namespace dpm4d
