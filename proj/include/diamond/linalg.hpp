#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace diamond {

using Vec = std::vector<double>;

// Dense row-major matrix. Vectors are treated as rows: y = x * M.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

// out += x * m, with x a row vector of length m.rows.
inline void vecmat_acc(const Vec& x, const Mat& m, Vec& out) {
    assert(static_cast<int>(x.size()) == m.rows);
    assert(static_cast<int>(out.size()) == m.cols);
    for (int i = 0; i < m.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = &m.a[static_cast<std::size_t>(i) * m.cols];
        for (int j = 0; j < m.cols; ++j) out[j] += xi * row[j];
    }
}

inline Vec vecmat(const Vec& x, const Mat& m) {
    Vec out(m.cols, 0.0);
    vecmat_acc(x, m, out);
    return out;
}

// out += y * m^T, i.e. out_i += sum_j y_j * m(i, j). Used for dx = dy * W^T.
inline void vecmat_t_acc(const Vec& y, const Mat& m, Vec& out) {
    assert(static_cast<int>(y.size()) == m.cols);
    assert(static_cast<int>(out.size()) == m.rows);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = &m.a[static_cast<std::size_t>(i) * m.cols];
        double s = 0;
        for (int j = 0; j < m.cols; ++j) s += y[j] * row[j];
        out[i] += s;
    }
}

// m += x^T * y (outer product of row vectors x and y).
inline void outer_acc(Mat& m, const Vec& x, const Vec& y) {
    assert(static_cast<int>(x.size()) == m.rows);
    assert(static_cast<int>(y.size()) == m.cols);
    for (int i = 0; i < m.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        double* row = &m.a[static_cast<std::size_t>(i) * m.cols];
        for (int j = 0; j < m.cols; ++j) row[j] += xi * y[j];
    }
}

inline void add_acc(Vec& out, const Vec& v) {
    assert(out.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
}

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Numerically stable softmax (max subtraction).
inline Vec softmax(const Vec& z) {
    assert(!z.empty());
    const double m = *std::max_element(z.begin(), z.end());
    Vec p(z.size());
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - m);
        s += p[i];
    }
    for (auto& v : p) v /= s;
    return p;
}

}  // namespace diamond
