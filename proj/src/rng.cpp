#include "cotrain/rng.hpp"

#include <cmath>

namespace cotrain {

double Rng::gaussian() noexcept {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace cotrain
