#include "linalg.hpp"

namespace skiprec {

bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int64_t n) {
    // In-place lower Cholesky factorization.
    for (int64_t j = 0; j < n; ++j) {
        double diag = a[static_cast<size_t>(j * n + j)];
        for (int64_t k = 0; k < j; ++k) {
            double l = a[static_cast<size_t>(j * n + k)];
            diag -= l * l;
        }
        if (!(diag > 0.0)) return false;
        diag = std::sqrt(diag);
        a[static_cast<size_t>(j * n + j)] = diag;
        for (int64_t i = j + 1; i < n; ++i) {
            double s = a[static_cast<size_t>(i * n + j)];
            for (int64_t k = 0; k < j; ++k)
                s -= a[static_cast<size_t>(i * n + k)] * a[static_cast<size_t>(j * n + k)];
            a[static_cast<size_t>(i * n + j)] = s / diag;
        }
    }
    // Forward substitution L y = b.
    for (int64_t i = 0; i < n; ++i) {
        double s = b[static_cast<size_t>(i)];
        for (int64_t k = 0; k < i; ++k)
            s -= a[static_cast<size_t>(i * n + k)] * b[static_cast<size_t>(k)];
        b[static_cast<size_t>(i)] = s / a[static_cast<size_t>(i * n + i)];
    }
    // Back substitution L^T x = y.
    for (int64_t i = n; i-- > 0;) {
        double s = b[static_cast<size_t>(i)];
        for (int64_t k = i + 1; k < n; ++k)
            s -= a[static_cast<size_t>(k * n + i)] * b[static_cast<size_t>(k)];
        b[static_cast<size_t>(i)] = s / a[static_cast<size_t>(i * n + i)];
    }
    return true;
}

}  // namespace skiprec
