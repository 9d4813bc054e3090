#pragma once

#include <utility>
#include <vector>

#include "trimap/curve.hpp"
#include "trimap/err.hpp"
#include "trimap/rng.hpp"

namespace trimap {

// Chord through P1, P2 divided by the vertical at P1+P2, evaluated at Q.
// Divisor (P1) + (P2) - (P1+P2) - (O).  A zero value means Q sits in the
// support, which is as unusable as a pole; both raise.
inline FieldElement line_g(const Curve& E, const Point& P1, const Point& P2, const Point& Q) {
    (void)E;
    if (P1.inf || P2.inf || Q.inf) throw PoleHit("line through infinity");
    if (P1.x == P2.x) throw PoleHit("chord degenerates to a vertical");
    FieldElement lam = (P2.y - P1.y) / (P2.x - P1.x);
    FieldElement nu = (P1.y * P2.x - P2.y * P1.x) / (P2.x - P1.x);
    FieldElement x3 = lam * lam - P1.x - P2.x;
    if (Q.x == x3) throw DenominatorZero("evaluation point under the vertical");
    FieldElement v = (Q.y - lam * Q.x - nu) / (Q.x - x3);
    if (v.is_zero()) throw PoleHit("evaluation point on the chord");
    return v;
}

// Tangent at P divided by the vertical at 2P, evaluated at Q.
// Divisor 2(P) - (2P) - (O); for 2-torsion P the tangent is the vertical
// itself with divisor 2(P) - 2(O).
inline FieldElement line_h(const Curve& E, const Point& P, const Point& Q) {
    if (P.inf || Q.inf) throw PoleHit("line through infinity");
    const FieldPtr& K = E.field();
    if (P.y.is_zero()) {
        FieldElement v = Q.x - P.x;
        if (v.is_zero()) throw PoleHit("evaluation point on the tangent");
        return v;
    }
    FieldElement lam = (K->from_uint(3) * P.x * P.x + E.a()) / (K->from_uint(2) * P.y);
    FieldElement nu = (-(P.x * P.x * P.x) + E.a() * P.x + K->from_uint(2) * E.b()) /
                      (K->from_uint(2) * P.y);
    FieldElement x3 = lam * lam - P.x - P.x;
    if (Q.x == x3) throw DenominatorZero("evaluation point under the vertical");
    FieldElement v = (Q.y - lam * Q.x - nu) / (Q.x - x3);
    if (v.is_zero()) throw PoleHit("evaluation point on the tangent");
    return v;
}

// Vertical at P evaluated at Q.  Divisor (P) + (-P) - 2(O).
inline FieldElement line_v(const Curve& E, const Point& P, const Point& Q) {
    if (P.inf || Q.inf) throw PoleHit("line through infinity");
    (void)E;
    FieldElement v = Q.x - P.x;
    if (v.is_zero()) throw PoleHit("evaluation point on the vertical");
    return v;
}

// f_P(Q) for the normalized function with divisor ell(P) - ell(O), P of order
// ell.  Doubling factors are accumulated by repeated squaring; the set bits
// of ell are then recombined by a descending chord chain whose partial sums
// stay clear of the remaining chain points until the final vertical.
inline FieldElement miller_f(const Curve& E, u64 ell, const Point& P, const Point& Q) {
    const FieldPtr& K = E.field();
    if (P.inf) return K->one();
    if (Q.inf) throw PoleHit("evaluation at infinity");
    if (ell == 1) return K->one();
    if (ell == 2) {
        FieldElement v = Q.x - P.x;
        if (v.is_zero()) throw PoleHit("evaluation point on the vertical");
        return v;
    }

    unsigned top = 0;
    while ((ell >> (top + 1)) != 0) ++top;
    std::vector<Point> chain = {P};
    for (unsigned i = 0; i < top; ++i) {
        chain.push_back(E.dbl(chain.back()));
        if (chain.back().inf) throw ContractViolation("base point order divides a power of two");
    }

    FieldElement H = K->one();
    FieldElement V = K->one();
    std::vector<unsigned> set_bits;
    for (unsigned i = 0; i <= top; ++i) {
        if ((ell >> i) & 1) {
            H *= V;
            set_bits.push_back(i);
        }
        if (i < top) V = V * V * line_h(E, chain[i], Q);
    }

    // descending recombination of the set-bit points
    FieldElement G = K->one();
    Point gamma = chain[set_bits.back()];
    for (std::size_t j = set_bits.size() - 1; j-- > 0;) {
        const Point& next = chain[set_bits[j]];
        if (j > 0) {
            G *= line_g(E, gamma, next, Q);
            gamma = E.add(gamma, next);
        } else {
            if (E.add(gamma, next) != Point::infinity())
                throw ContractViolation("recombination chain does not close");
            G *= line_v(E, gamma, Q);
        }
    }
    return H * G;
}

// Weil pairing on E[ell].  The direct quotient of normalized Miller values
// carries the parity factor (-1)^ell.  Degenerate evaluations only happen for
// dependent arguments, where the value is 1; near-dependent cases are retried
// through the bilinear shift e(P, Q + rP) = e(P, Q).
inline FieldElement weil(const Curve& E, u64 ell, const Point& P, const Point& Q,
                         Rng& rng) {
    const FieldPtr& K = E.field();
    if (P.inf || Q.inf || P == Q) return K->one();
    auto direct = [&](const Point& A, const Point& B) {
        FieldElement e = miller_f(E, ell, A, B) / miller_f(E, ell, B, A);
        return (ell % 2) ? -e : e;
    };
    try {
        return direct(P, Q);
    } catch (const PoleHit&) {
    }
    Point acc = Point::infinity();
    for (u64 m = 0; m < ell; ++m) {
        if (Q == acc) return K->one();
        acc = E.add(acc, P);
    }
    int budget = retry_budget();
    for (int t = 0; t < budget; ++t) {
        u64 r = 1 + rng.below(ell - 1);
        try {
            return direct(P, E.add(Q, E.scalar_mul(r, P)));
        } catch (const PoleHit&) {
        }
        try {
            return direct(E.add(P, E.scalar_mul(r, Q)), Q);
        } catch (const PoleHit&) {
        }
    }
    throw DegeneratePair("pairing evaluation kept hitting supports");
}

// --- symbolic line-function values in transported coordinates ---

// Tangent factor at the first slot point evaluated at the second, both given
// in their transports' coordinates: vars (x1, y1, x2, y2).
inline RationalFn symbolic_tangent_value(const Curve& E, const CurveTransform& T1,
                                         const CurveTransform& T2) {
    const FieldPtr& K = E.field();
    auto [X1, Y1] = untransport_sym(K, T1, 4, 0, 1);
    auto [X2, Y2] = untransport_sym(K, T2, 4, 2, 3);
    RationalFn lam = (rf_const(K, 4, K->from_uint(3)) * X1 * X1 + rf_const(K, 4, E.a())) /
                     (rf_const(K, 4, K->from_uint(2)) * Y1);
    RationalFn nu = (rf_const(K, 4, -K->one()) * X1 * X1 * X1 + rf_const(K, 4, E.a()) * X1 +
                     rf_const(K, 4, K->from_uint(2) * E.b())) /
                    (rf_const(K, 4, K->from_uint(2)) * Y1);
    RationalFn X3 = lam * lam - X1 - X1;
    return (Y2 - lam * X2 - nu) / (X2 - X3);
}

/// Chord through the first two slot points evaluated at the third:
// vars (x1, y1, x2, y2, x3, y3).
inline RationalFn symbolic_chord_value(const Curve& E, const CurveTransform& T1,
                                       const CurveTransform& T2, const CurveTransform& T3) {
    const FieldPtr& K = E.field();
    auto [X1, Y1] = untransport_sym(K, T1, 6, 0, 1);
    auto [X2, Y2] = untransport_sym(K, T2, 6, 2, 3);
    auto [Xq, Yq] = untransport_sym(K, T3, 6, 4, 5);
    RationalFn lam = (Y2 - Y1) / (X2 - X1);
    RationalFn nu = (Y1 * X2 - Y2 * X1) / (X2 - X1);
    RationalFn X3 = lam * lam - X1 - X2;
    return (Yq - lam * Xq - nu) / (Xq - X3);
}

/// Vertical at the first slot point evaluated at the second: vars (x1,y1,x2,y2).
inline RationalFn symbolic_vertical_value(const Curve& E, const CurveTransform& T1,
                                          const CurveTransform& T2) {
    const FieldPtr& K = E.field();
    auto [X1, Y1] = untransport_sym(K, T1, 4, 0, 1);
    auto [X2, Y2] = untransport_sym(K, T2, 4, 2, 3);
    (void)Y1;
    (void)Y2;
    return X2 - X1;
}

// Two independent order-ell points, certified by a primitive pairing value.
inline std::pair<Point, Point> torsion_basis(const Curve& E, u64 order, u64 ell,
                                             const std::vector<long long>& sqrts, Rng& rng) {
    const FieldPtr& K = E.field();
    for (int t = 0; t < 64; ++t) {
        Point P = torsion_point(E, order, ell, sqrts, rng);
        if (!E.scalar_mul(ell, P).inf || P.inf) continue;
        for (int s = 0; s < 64; ++s) {
            Point Q = torsion_point(E, order, ell, sqrts, rng);
            FieldElement z = weil(E, ell, P, Q, rng);
            if (z == K->one()) continue;
            if (z.pow(ell) != K->one()) throw ContractViolation("pairing value outside mu_ell");
            return {P, Q};
        }
    }
    throw SearchExhausted("no independent torsion pair found");
}

}  // namespace trimap
