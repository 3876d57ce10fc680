#include "upr/phase_model.hpp"

#include <cmath>

namespace upr {

Measurements encode(const SensingMatrix& A, const Vector& x) {
    if (x.size() != A.n()) throw DimensionError("encode: x length != n");
    Measurements y = matvec(A.A, x);
    for (double& v : y) v = std::abs(v);
    return y;
}

double phase_distance(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("phase_distance: length mismatch");
    double dm = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double m = a[i] - b[i];
        double p = a[i] + b[i];
        dm += m * m;
        dp += p * p;
    }
    return std::min(dm, dp);
}

double relative_mse(const Vector& est, const Vector& truth) {
    double nt = norm2(truth);
    if (nt == 0.0) throw ArgumentError("relative_mse: zero truth");
    return phase_distance(est, truth) / nt;
}

bool is_success(double rel_mse) { return rel_mse < kSuccessThreshold; }

}  // namespace upr
