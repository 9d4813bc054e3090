#pragma once

#include <vector>

#include "trimap/field.hpp"

namespace trimap {

using Vec = std::vector<FieldElement>;
using Mat = std::vector<Vec>;

inline Mat mat_identity(const FieldPtr& K, std::size_t n) {
    Mat m(n, Vec(n, K->zero()));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = K->one();
    return m;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
    std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Mat r(n, Vec(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            FieldElement s = a[i][0] * b[0][j];
            for (std::size_t t = 1; t < k; ++t) s += a[i][t] * b[t][j];
            r[i][j] = s;
        }
    return r;
}

inline Vec mat_vec(const Mat& a, const Vec& v) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        FieldElement s = a[i][0] * v[0];
        for (std::size_t t = 1; t < v.size(); ++t) s += a[i][t] * v[t];
        r[i] = s;
    }
    return r;
}

// Row-reduce a copy, returning (rank, det); det only meaningful for square input.
inline std::pair<std::size_t, FieldElement> mat_echelon(const FieldPtr& K, Mat m) {
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    FieldElement det = K->one();
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && m[piv][c].is_zero()) ++piv;
        if (piv == rows) {
            det = K->zero();
            continue;
        }
        if (piv != rank) {
            std::swap(m[piv], m[rank]);
            det = -det;
        }
        det *= m[rank][c];
        FieldElement ipiv = m[rank][c].inv();
        for (std::size_t j = c; j < cols; ++j) m[rank][j] *= ipiv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][c].is_zero()) continue;
            FieldElement f = m[r][c];
            for (std::size_t j = c; j < cols; ++j) m[r][j] -= f * m[rank][j];
        }
        ++rank;
    }
    if (rank < rows || rank < cols) det = K->zero();
    return {rank, det};
}

inline FieldElement mat_det(const FieldPtr& K, const Mat& m) {
    return mat_echelon(K, m).second;
}

inline std::size_t mat_rank(const FieldPtr& K, const Mat& m) {
    return mat_echelon(K, m).first;
}

inline Mat mat_inverse(const FieldPtr& K, const Mat& m) {
    std::size_t n = m.size();
    Mat aug(n, Vec(2 * n, K->zero()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = m[i][j];
        aug[i][n + i] = K->one();
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && aug[piv][c].is_zero()) ++piv;
        if (piv == n) throw SolveFailure("singular matrix");
        std::swap(aug[piv], aug[c]);
        FieldElement ipiv = aug[c][c].inv();
        for (std::size_t j = 0; j < 2 * n; ++j) aug[c][j] *= ipiv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || aug[r][c].is_zero()) continue;
            FieldElement f = aug[r][c];
            for (std::size_t j = 0; j < 2 * n; ++j) aug[r][j] -= f * aug[c][j];
        }
    }
    Mat inv(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

inline Mat mat_random_invertible(const FieldPtr& K, std::size_t n, Rng& rng) {
    for (;;) {
        Mat m(n, Vec(n));
        for (auto& row : m)
            for (auto& e : row) e = K->sample(rng);
        if (!mat_det(K, m).is_zero()) return m;
    }
}

}  // namespace trimap
