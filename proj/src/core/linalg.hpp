#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "util.hpp"

namespace skiprec {

// Row-major dense matrix of doubles. Just enough surface for the encoders
// and the ALS solver; nothing clever.
struct Mat {
    int64_t rows = 0, cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int64_t r, int64_t c) : rows(r), cols(c), v(static_cast<size_t>(r * c), 0.0) {}

    double* row(int64_t r) { return v.data() + r * cols; }
    const double* row(int64_t r) const { return v.data() + r * cols; }
    double& at(int64_t r, int64_t c) { return v[static_cast<size_t>(r * cols + c)]; }
    double at(int64_t r, int64_t c) const { return v[static_cast<size_t>(r * cols + c)]; }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const double* a, const double* b, int64_t n) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, const double* x, double* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double norm2(const double* a, int64_t n) { return std::sqrt(dot(a, a, n)); }

// Solves A x = b in place for symmetric positive definite A (n x n,
// row-major) via Cholesky. Returns false if a non-positive pivot shows up.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int64_t n);

}  // namespace skiprec
