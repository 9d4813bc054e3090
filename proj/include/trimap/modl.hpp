#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trimap/err.hpp"
#include "trimap/field.hpp"
#include "trimap/rng.hpp"

namespace trimap {

// Small dense linear algebra mod a prime l.  Used for exponent arithmetic on
// l-torsion and for the generator-matrix algebra; kept separate from the
// field-of-definition code on purpose.

using LMat = std::vector<std::vector<u64>>;

inline u64 addm(u64 a, u64 b, u64 l) { return (a + b) % l; }
inline u64 subm(u64 a, u64 b, u64 l) { return (a + l - b % l) % l; }
inline u64 invm(u64 a, u64 l) {
    a %= l;
    if (!a) throw DenominatorZero("inverse of zero mod l");
    return powmod(a, l - 2, l);
}

inline LMat lmat_identity(std::size_t n) {
    LMat m(n, std::vector<u64>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline LMat lmat_mul(const LMat& a, const LMat& b, u64 l) {
    std::size_t n = a.size(), k = b.size(), c = b[0].size();
    LMat r(n, std::vector<u64>(c, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            if (!a[i][t]) continue;
            for (std::size_t j = 0; j < c; ++j)
                r[i][j] = (r[i][j] + mulmod(a[i][t], b[t][j], l)) % l;
        }
    return r;
}

inline LMat lmat_scale(const LMat& a, u64 s, u64 l) {
    LMat r = a;
    for (auto& row : r)
        for (u64& v : row) v = mulmod(v, s % l, l);
    return r;
}

inline LMat lmat_add(const LMat& a, const LMat& b, u64 l) {
    LMat r = a;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] = (r[i][j] + b[i][j]) % l;
    return r;
}

inline std::vector<u64> lmat_flatten(const LMat& m) {
    std::vector<u64> v;
    v.reserve(m.size() * m[0].size());
    for (const auto& row : m) v.insert(v.end(), row.begin(), row.end());
    return v;
}

inline std::size_t lmat_rank(LMat m, u64 l) {
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0, rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && m[piv][c] % l == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        u64 ip = invm(m[rank][c], l);
        for (std::size_t j = c; j < cols; ++j) m[rank][j] = mulmod(m[rank][j], ip, l);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][c] % l == 0) continue;
            u64 f = m[r][c];
            for (std::size_t j = c; j < cols; ++j)
                m[r][j] = subm(m[r][j], mulmod(f, m[rank][j], l), l);
        }
        ++rank;
    }
    return rank;
}

inline LMat lmat_inverse(const LMat& m, u64 l) {
    std::size_t n = m.size();
    LMat aug(n, std::vector<u64>(2 * n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = m[i][j] % l;
        aug[i][n + i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && aug[piv][c] == 0) ++piv;
        if (piv == n) throw SolveFailure("singular matrix mod l");
        std::swap(aug[piv], aug[c]);
        u64 ip = invm(aug[c][c], l);
        for (std::size_t j = 0; j < 2 * n; ++j) aug[c][j] = mulmod(aug[c][j], ip, l);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || aug[r][c] == 0) continue;
            u64 f = aug[r][c];
            for (std::size_t j = 0; j < 2 * n; ++j)
                aug[r][j] = subm(aug[r][j], mulmod(f, aug[c][j], l), l);
        }
    }
    LMat inv(n, std::vector<u64>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

// Solve A x = b mod l where A is rows x cols.  Free variables are drawn from
// rng so repeated calls sample the full solution coset.  Returns nullopt when
// the system is inconsistent.
inline std::optional<std::vector<u64>> lsolve_random(const LMat& A, const std::vector<u64>& b,
                                                     u64 l, Rng& rng) {
    std::size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    LMat m(rows, std::vector<u64>(cols + 1));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m[i][j] = A[i][j] % l;
        m[i][cols] = b[i] % l;
    }
    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && m[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        u64 ip = invm(m[rank][c], l);
        for (std::size_t j = c; j <= cols; ++j) m[rank][j] = mulmod(m[rank][j], ip, l);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][c] == 0) continue;
            u64 f = m[r][c];
            for (std::size_t j = c; j <= cols; ++j)
                m[r][j] = subm(m[r][j], mulmod(f, m[rank][j], l), l);
        }
        pivot_col.push_back(c);
        ++rank;
    }
    for (std::size_t r = rank; r < rows; ++r)
        if (m[r][cols] != 0) return std::nullopt;

    std::vector<u64> x(cols);
    std::vector<bool> is_pivot(cols, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;
    for (std::size_t c = 0; c < cols; ++c)
        if (!is_pivot[c]) x[c] = rng.below(l);
    for (std::size_t r = 0; r < rank; ++r) {
        u64 v = m[r][cols];
        for (std::size_t c = pivot_col[r] + 1; c < cols; ++c)
            if (m[r][c]) v = subm(v, mulmod(m[r][c], x[c], l), l);
        x[pivot_col[r]] = v;
    }
    return x;
}

}  // namespace trimap
