#pragma once

#include <memory>
#include <string>
#include <vector>

#include "trimap/field.hpp"
#include "trimap/linalg.hpp"
#include "trimap/poly.hpp"
#include "trimap/rng.hpp"

namespace trimap {

struct Point {
    bool inf = true;
    FieldElement x, y;

    Point() = default;
    Point(FieldElement px, FieldElement py) : inf(false), x(std::move(px)), y(std::move(py)) {}
    static Point infinity() { return Point(); }

    bool operator==(const Point& o) const {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
    bool operator!=(const Point& o) const { return !(*this == o); }
};

// y^2 = x^3 + a x + b over K, char(K) not in {2, 3}.
class Curve {
  public:
    Curve(FieldPtr K, FieldElement a, FieldElement b)
        : K_(std::move(K)), a_(std::move(a)), b_(std::move(b)) {
        if (K_->q() == 2 || K_->q() == 3)
            throw ContractViolation("curve characteristic must exceed 3");
        FieldElement disc = K_->from_uint(4) * a_ * a_ * a_ +
                            K_->from_uint(27) * b_ * b_;
        if (disc.is_zero()) throw ContractViolation("singular curve");
    }

    const FieldPtr& field() const { return K_; }
    const FieldElement& a() const { return a_; }
    const FieldElement& b() const { return b_; }

    bool on_curve(const Point& P) const {
        if (P.inf) return true;
        return P.y * P.y == P.x * P.x * P.x + a_ * P.x + b_;
    }

    Point neg(const Point& P) const {
        if (P.inf) return P;
        return Point(P.x, -P.y);
    }

    Point add(const Point& P, const Point& Q) const {
        if (P.inf) return Q;
        if (Q.inf) return P;
        if (P.x == Q.x) {
            if (P.y == -Q.y) return Point::infinity();
            return dbl(P);
        }
        FieldElement lam = (Q.y - P.y) / (Q.x - P.x);
        FieldElement nu = (P.y * Q.x - Q.y * P.x) / (Q.x - P.x);
        FieldElement x3 = lam * lam - P.x - Q.x;
        return Point(x3, -(lam * x3) - nu);
    }

    Point dbl(const Point& P) const {
        if (P.inf) return P;
        if (P.y.is_zero()) return Point::infinity();
        FieldElement lam = (K_->from_uint(3) * P.x * P.x + a_) / (K_->from_uint(2) * P.y);
        FieldElement nu = (-(P.x * P.x * P.x) + a_ * P.x + K_->from_uint(2) * b_) /
                          (K_->from_uint(2) * P.y);
        FieldElement x3 = lam * lam - P.x - P.x;
        return Point(x3, -(lam * x3) - nu);
    }

    Point scalar_mul(u64 m, const Point& P) const {
        Point acc = Point::infinity();
        Point base = P;
        while (m) {
            if (m & 1) acc = add(acc, base);
            base = dbl(base);
            m >>= 1;
        }
        return acc;
    }

    std::string point_string(const Point& P) const {
        if (P.inf) return "O";
        return "(" + K_->to_string(P.x) + " , " + K_->to_string(P.y) + ")";
    }

    Point parse_point(const std::string& s) const {
        if (s == "O") return Point::infinity();
        if (s.size() < 2 || s.front() != '(' || s.back() != ')')
            throw ParseError("point: expected (x , y) or O");
        std::string body = s.substr(1, s.size() - 2);
        std::size_t sep = body.find(" , ");
        if (sep == std::string::npos) throw ParseError("point: missing separator");
        Point P(K_->parse(body.substr(0, sep)), K_->parse(body.substr(sep + 3)));
        if (!on_curve(P)) throw ParseError("point: not on curve");
        return P;
    }

  private:
    FieldPtr K_;
    FieldElement a_, b_;
};

// idx(e^2) -> idx(e) for the whole field, -1 for non-squares; built once per
// field so exhaustive counting and point sampling stay O(1) per element.
inline std::shared_ptr<std::vector<long long>> sqrt_table(const FieldPtr& K) {
    auto tbl = std::make_shared<std::vector<long long>>(K->size(), -1);
    for (u64 i = 0; i < K->size(); ++i) {
        FieldElement e = K->element_at(i);
        u64 s = K->index_of(e * e);
        if ((*tbl)[s] < 0) (*tbl)[s] = (long long)i;
    }
    return tbl;
}

inline u64 count_points(const Curve& E, const std::vector<long long>& sqrts) {
    const FieldPtr& K = E.field();
    u64 n = 1;  // point at infinity
    for (u64 i = 0; i < K->size(); ++i) {
        FieldElement x = K->element_at(i);
        FieldElement rhs = x * x * x + E.a() * x + E.b();
        if (rhs.is_zero())
            n += 1;
        else if (sqrts[K->index_of(rhs)] >= 0)
            n += 2;
    }
    return n;
}

inline std::vector<Point> all_points(const Curve& E, const std::vector<long long>& sqrts) {
    const FieldPtr& K = E.field();
    std::vector<Point> pts;
    pts.push_back(Point::infinity());
    for (u64 i = 0; i < K->size(); ++i) {
        FieldElement x = K->element_at(i);
        FieldElement rhs = x * x * x + E.a() * x + E.b();
        if (rhs.is_zero()) {
            pts.emplace_back(x, K->zero());
        } else {
            long long r = sqrts[K->index_of(rhs)];
            if (r < 0) continue;
            FieldElement y = K->element_at((u64)r);
            pts.emplace_back(x, y);
            pts.emplace_back(x, -y);
        }
    }
    return pts;
}

inline Point random_point(const Curve& E, const std::vector<long long>& sqrts, Rng& rng) {
    const FieldPtr& K = E.field();
    for (int tries = 0; tries < 4096; ++tries) {
        FieldElement x = K->sample(rng);
        FieldElement rhs = x * x * x + E.a() * x + E.b();
        if (rhs.is_zero()) return Point(x, K->zero());
        long long r = sqrts[K->index_of(rhs)];
        if (r < 0) continue;
        FieldElement y = K->element_at((u64)r);
        return rng.coin() ? Point(x, y) : Point(x, -y);
    }
    throw SearchExhausted("no curve point found");
}

// A point of exact order ell, obtained by clearing the prime-to-ell part of a
// random point and then walking down the ell-power ladder.
inline Point torsion_point(const Curve& E, u64 order, u64 ell,
                           const std::vector<long long>& sqrts, Rng& rng) {
    u64 cof = order;
    while (cof % ell == 0) cof /= ell;
    for (int tries = 0; tries < 256; ++tries) {
        Point S = E.scalar_mul(cof, random_point(E, sqrts, rng));
        if (S.inf) continue;
        while (!E.scalar_mul(ell, S).inf) S = E.scalar_mul(ell, S);
        return S;
    }
    throw SearchExhausted("no point of requested order");
}

struct DeskParams {
    FieldPtr K;
    FieldElement a, b;
    u64 order = 0;
    u64 ell = 0;
    std::shared_ptr<std::vector<long long>> sqrts;

    Curve curve() const { return Curve(K, a, b); }
};

// Search for (q, d, E) with full rational ell-torsion of rank two.  Fields in
// the preferred size window come first (small ambient fields leave published
// denominators with high accidental vanishing rates).
inline DeskParams find_desk_params(u64 ell, u64 qmax, u64 dmax, Rng& rng,
                                   u64 qd_min = 2000, u64 qd_cap = 200000) {
    struct Cand {
        u64 q, d, qd;
        bool in_window;
    };
    std::vector<Cand> cands;
    for (u64 q = 5; q <= qmax; ++q) {
        if (!is_prime_u64(q)) continue;
        u64 qd = 1;
        for (u64 d = 1; d <= dmax; ++d) {
            if (qd > qd_cap / q) break;
            qd *= q;
            if (qd < ell * ell) continue;
            if ((qd - 1) % ell != 0) continue;
            cands.push_back({q, d, qd, qd >= qd_min});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& u, const Cand& v) {
        if (u.in_window != v.in_window) return u.in_window;
        return u.in_window ? u.qd < v.qd : u.qd > v.qd;
    });

    for (const Cand& c : cands) {
        FieldPtr K = Field::make(c.q, c.d, rng);
        auto sq = sqrt_table(K);
        for (int trial = 0; trial < 120; ++trial) {
            FieldElement a = K->sample(rng), b = K->sample(rng);
            FieldElement disc = K->from_uint(4) * a * a * a + K->from_uint(27) * b * b;
            if (disc.is_zero()) continue;
            Curve E(K, a, b);
            u64 N = count_points(E, *sq);
            if (N % (ell * ell) != 0) continue;
            // rank-2 certificate: a second order-ell point outside the cyclic
            // group generated by the first
            try {
                Point P = torsion_point(E, N, ell, *sq, rng);
                std::vector<Point> line;
                Point acc = Point::infinity();
                for (u64 m = 0; m < ell; ++m) {
                    line.push_back(acc);
                    acc = E.add(acc, P);
                }
                bool certified = false;
                for (int t = 0; t < 64 && !certified; ++t) {
                    Point Q = torsion_point(E, N, ell, *sq, rng);
                    certified = true;
                    for (const Point& L : line)
                        if (Q == L) {
                            certified = false;
                            break;
                        }
                }
                if (!certified) continue;
            } catch (const SearchExhausted&) {
                continue;
            }
            DeskParams dp;
            dp.K = K;
            dp.a = a;
            dp.b = b;
            dp.order = N;
            dp.ell = ell;
            dp.sqrts = sq;
            return dp;
        }
    }
    throw SearchExhausted("no curve with the requested torsion in range");
}

// Affine coordinate change sending E to a family member: a GL_2 map, with an
// optional coordinate-inversion composed on top.  The inversion step is only
// defined away from the axes.
struct CurveTransform {
    Mat A;       // 2x2 over K
    Mat A_inv;
    bool includes_j = false;

    static CurveTransform random(const FieldPtr& K, bool with_j, Rng& rng) {
        CurveTransform T;
        T.A = mat_random_invertible(K, 2, rng);
        T.A_inv = mat_inverse(K, T.A);
        T.includes_j = with_j;
        return T;
    }

    static CurveTransform identity(const FieldPtr& K) {
        CurveTransform T;
        T.A = mat_identity(K, 2);
        T.A_inv = T.A;
        T.includes_j = false;
        return T;
    }

    Point transport(const Point& P) const {
        if (P.inf) return P;
        Vec v = mat_vec(A, {P.x, P.y});
        if (includes_j) {
            if (v[0].is_zero() || v[1].is_zero())
                throw ExceptionalPoint("transported point meets a coordinate axis");
            return Point(v[0].inv(), v[1].inv());
        }
        return Point(v[0], v[1]);
    }

    Point transport_inv(const Point& P) const {
        if (P.inf) return P;
        FieldElement x = P.x, y = P.y;
        if (includes_j) {
            if (x.is_zero() || y.is_zero())
                throw ExceptionalPoint("point meets a coordinate axis");
            x = x.inv();
            y = y.inv();
        }
        Vec v = mat_vec(A_inv, {x, y});
        return Point(v[0], v[1]);
    }
};

// --- symbolic group law in transported coordinates ---

inline RationalFn rf_var(const FieldPtr& K, std::size_t nv, std::size_t i) {
    return RationalFn::from_poly(MultiPoly::variable(K, nv, i));
}

inline RationalFn rf_const(const FieldPtr& K, std::size_t nv, const FieldElement& c) {
    return RationalFn::from_poly(MultiPoly::constant(K, nv, c));
}

// Coordinates of T^{-1}(x_i, y_i) as rational functions of the inputs.
inline std::array<RationalFn, 2> untransport_sym(const FieldPtr& K, const CurveTransform& T,
                                                 std::size_t nv, std::size_t xi, std::size_t yi) {
    RationalFn x = rf_var(K, nv, xi), y = rf_var(K, nv, yi);
    if (T.includes_j) {
        x = rf_const(K, nv, K->one()) / x;
        y = rf_const(K, nv, K->one()) / y;
    }
    return {x * rf_const(K, nv, T.A_inv[0][0]) + y * rf_const(K, nv, T.A_inv[0][1]),
            x * rf_const(K, nv, T.A_inv[1][0]) + y * rf_const(K, nv, T.A_inv[1][1])};
}

inline std::array<RationalFn, 2> transport_sym(const FieldPtr& K, const CurveTransform& T,
                                               const std::array<RationalFn, 2>& p) {
    std::array<RationalFn, 2> v = {
        p[0] * rf_const(K, p[0].num.nvars(), T.A[0][0]) +
            p[1] * rf_const(K, p[0].num.nvars(), T.A[0][1]),
        p[0] * rf_const(K, p[0].num.nvars(), T.A[1][0]) +
            p[1] * rf_const(K, p[0].num.nvars(), T.A[1][1])};
    if (T.includes_j) {
        std::size_t nv = p[0].num.nvars();
        v[0] = rf_const(K, nv, K->one()) / v[0];
        v[1] = rf_const(K, nv, K->one()) / v[1];
    }
    return v;
}

// Chord addition conjugated by the transport: inputs (x1, y1, x2, y2) in
// transported coordinates, output the transported sum.
inline std::array<RationalFn, 2> symbolic_add(const Curve& E, const CurveTransform& T) {
    const FieldPtr& K = E.field();
    auto [X1, Y1] = untransport_sym(K, T, 4, 0, 1);
    auto [X2, Y2] = untransport_sym(K, T, 4, 2, 3);
    RationalFn lam = (Y2 - Y1) / (X2 - X1);
    RationalFn nu = (Y1 * X2 - Y2 * X1) / (X2 - X1);
    RationalFn X3 = lam * lam - X1 - X2;
    RationalFn Y3 = rf_const(K, 4, -K->one()) * (lam * X3 + nu);
    return transport_sym(K, T, {X3, Y3});
}

inline std::array<RationalFn, 2> symbolic_dbl(const Curve& E, const CurveTransform& T) {
    const FieldPtr& K = E.field();
    auto [X, Y] = untransport_sym(K, T, 2, 0, 1);
    RationalFn lam = (rf_const(K, 2, K->from_uint(3)) * X * X + rf_const(K, 2, E.a())) /
                     (rf_const(K, 2, K->from_uint(2)) * Y);
    RationalFn nu = (rf_const(K, 2, -K->one()) * X * X * X + rf_const(K, 2, E.a()) * X +
                     rf_const(K, 2, K->from_uint(2) * E.b())) /
                    (rf_const(K, 2, K->from_uint(2)) * Y);
    RationalFn X3 = lam * lam - X - X;
    RationalFn Y3 = rf_const(K, 2, -K->one()) * (lam * X3 + nu);
    return transport_sym(K, T, {X3, Y3});
}

inline std::array<RationalFn, 2> symbolic_neg(const FieldPtr& K, const CurveTransform& T) {
    auto [X, Y] = untransport_sym(K, T, 2, 0, 1);
    return transport_sym(K, T, {X, rf_const(K, 2, -K->one()) * Y});
}

// Coordinate change only: reads a point in Tin coordinates, emits it in Tout
// coordinates.  Wiring maps between slots are built from this.
inline std::array<RationalFn, 2> symbolic_rewire(const FieldPtr& K, const CurveTransform& Tin,
                                                 const CurveTransform& Tout) {
    return transport_sym(K, Tout, untransport_sym(K, Tin, 2, 0, 1));
}

// Doubling read in Tin coordinates, emitted in Tout coordinates.
inline std::array<RationalFn, 2> symbolic_dbl(const Curve& E, const CurveTransform& Tin,
                                              const CurveTransform& Tout) {
    const FieldPtr& K = E.field();
    auto [X, Y] = untransport_sym(K, Tin, 2, 0, 1);
    RationalFn lam = (rf_const(K, 2, K->from_uint(3)) * X * X + rf_const(K, 2, E.a())) /
                     (rf_const(K, 2, K->from_uint(2)) * Y);
    RationalFn nu = (rf_const(K, 2, -K->one()) * X * X * X + rf_const(K, 2, E.a()) * X +
                     rf_const(K, 2, K->from_uint(2) * E.b())) /
                    (rf_const(K, 2, K->from_uint(2)) * Y);
    RationalFn X3 = lam * lam - X - X;
    RationalFn Y3 = rf_const(K, 2, -K->one()) * (lam * X3 + nu);
    return transport_sym(K, Tout, {X3, Y3});
}

// [m]-multiplication read in Tin coordinates, emitted in Tout coordinates,
// composed from the plain chord and tangent formulas.  The accumulated
// denominator vanishes only where an intermediate multiple collides with the
// input, which cannot happen on points of odd prime order above m.
inline std::array<RationalFn, 2> symbolic_mul(const Curve& E, u64 m, const CurveTransform& Tin,
                                              const CurveTransform& Tout) {
    const FieldPtr& K = E.field();
    if (m == 0) throw ContractViolation("zero multiple has no affine formula");
    if (m == 1) return symbolic_rewire(K, Tin, Tout);
    if (m == 2) return symbolic_dbl(E, Tin, Tout);
    auto [X, Y] = untransport_sym(K, Tin, 2, 0, 1);

    RationalFn lam = (rf_const(K, 2, K->from_uint(3)) * X * X + rf_const(K, 2, E.a())) /
                     (rf_const(K, 2, K->from_uint(2)) * Y);
    std::array<RationalFn, 2> acc = {lam * lam - X - X, RationalFn(lam)};
    acc[1] = rf_const(K, 2, -K->one()) * (lam * (acc[0] - X) + Y);
    for (u64 k = 3; k <= m; ++k) {
        RationalFn cl = (acc[1] - Y) / (acc[0] - X);
        RationalFn X3 = cl * cl - acc[0] - X;
        RationalFn Y3 = rf_const(K, 2, -K->one()) * (cl * (X3 - X) + Y);
        acc = {std::move(X3), std::move(Y3)};
    }
    return transport_sym(K, Tout, acc);
}

// Checks, over F_q, that conjugating a GL_2 map by coordinate inversion is
// linear exactly when the matrix is diagonal or anti-diagonal.  Linearity of
// x y / (a y + b x) as a linear form in x, y is decided as a polynomial
// identity, not pointwise.
inline bool j_conjugation_probe(u64 qsmall) {
    Rng rng(1);
    FieldPtr K = Field::make(qsmall, 1, rng);

    auto coord_linear = [&](const FieldElement& u, const FieldElement& v) {
        // exists alpha, beta with x y == (alpha x + beta y)(u y + v x) ?
        for (u64 ai = 0; ai < qsmall; ++ai)
            for (u64 bi = 0; bi < qsmall; ++bi) {
                FieldElement al = K->from_uint(ai), be = K->from_uint(bi);
                // expand: v*al x^2 + (u*al + v*be) x y + u*be y^2 == x y
                if ((v * al).is_zero() && (u * be).is_zero() &&
                    u * al + v * be == K->one())
                    return true;
            }
        return false;
    };

    for (u64 ai = 0; ai < qsmall; ++ai)
        for (u64 bi = 0; bi < qsmall; ++bi)
            for (u64 ci = 0; ci < qsmall; ++ci)
                for (u64 di = 0; di < qsmall; ++di) {
                    FieldElement a = K->from_uint(ai), b = K->from_uint(bi);
                    FieldElement c = K->from_uint(ci), d = K->from_uint(di);
                    if ((a * d - b * c).is_zero()) continue;
                    bool linear = coord_linear(a, b) && coord_linear(c, d);
                    bool expected = (b.is_zero() && c.is_zero()) ||
                                    (a.is_zero() && d.is_zero());
                    if (linear != expected) return false;
                }
    return true;
}

}  // namespace trimap
