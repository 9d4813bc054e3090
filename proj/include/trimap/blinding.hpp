#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "trimap/field.hpp"
#include "trimap/linalg.hpp"
#include "trimap/poly.hpp"
#include "trimap/rng.hpp"

namespace trimap {

// One local layer on K^3: B ∘ (x, y + p(x), z + q(x, y)) ∘ A with A, B
// invertible.  q is kept sparse in y so the inverse layer stays quadratic;
// p and the x-part of q are full quadratics.
struct LocalQuadIso {
    Mat A, A_inv, B, B_inv;               // 3x3
    std::vector<FieldElement> p;          // p0, p1, p2 with p2 != 0
    std::vector<FieldElement> q;          // q00, q10, q20, q01 with q20 != 0

    static LocalQuadIso random(const FieldPtr& K, Rng& rng) {
        LocalQuadIso L;
        L.A = mat_random_invertible(K, 3, rng);
        L.A_inv = mat_inverse(K, L.A);
        L.B = mat_random_invertible(K, 3, rng);
        L.B_inv = mat_inverse(K, L.B);
        L.p = {K->sample(rng), K->sample(rng), K->sample_nonzero(rng)};
        L.q = {K->sample(rng), K->sample(rng), K->sample_nonzero(rng), K->sample(rng)};
        return L;
    }

    static LocalQuadIso identity(const FieldPtr& K) {
        LocalQuadIso L;
        L.A = mat_identity(K, 3);
        L.A_inv = L.A;
        L.B = L.A;
        L.B_inv = L.A;
        L.p = {K->zero(), K->zero(), K->zero()};
        L.q = {K->zero(), K->zero(), K->zero(), K->zero()};
        return L;
    }

    MultiPoly p_of(const MultiPoly& x) const {
        const FieldPtr& K = x.field();
        MultiPoly r = MultiPoly::constant(K, x.nvars(), p[0]);
        r += x.scale(p[1]);
        r += (x * x).scale(p[2]);
        return r;
    }

    MultiPoly q_of(const MultiPoly& x, const MultiPoly& y) const {
        const FieldPtr& K = x.field();
        MultiPoly r = MultiPoly::constant(K, x.nvars(), q[0]);
        r += x.scale(q[1]);
        r += (x * x).scale(q[2]);
        r += y.scale(q[3]);
        return r;
    }

    // components of the forward map as polynomials in the three inputs
    std::array<MultiPoly, 3> forward_polys(const FieldPtr& K) const {
        std::array<MultiPoly, 3> in = {MultiPoly::variable(K, 3, 0),
                                       MultiPoly::variable(K, 3, 1),
                                       MultiPoly::variable(K, 3, 2)};
        std::array<MultiPoly, 3> u = apply_mat_(A, in);
        std::array<MultiPoly, 3> w = {u[0], u[1] + p_of(u[0]), u[2] + q_of(u[0], u[1])};
        return apply_mat_(B, w);
    }

    std::array<MultiPoly, 3> inverse_polys(const FieldPtr& K) const {
        std::array<MultiPoly, 3> in = {MultiPoly::variable(K, 3, 0),
                                       MultiPoly::variable(K, 3, 1),
                                       MultiPoly::variable(K, 3, 2)};
        std::array<MultiPoly, 3> s = apply_mat_(B_inv, in);
        MultiPoly y0 = s[1] - p_of(s[0]);
        std::array<MultiPoly, 3> t = {s[0], y0, s[2] - q_of(s[0], y0)};
        return apply_mat_(A_inv, t);
    }

  private:
    static std::array<MultiPoly, 3> apply_mat_(const Mat& M, const std::array<MultiPoly, 3>& v) {
        std::array<MultiPoly, 3> r = {MultiPoly(v[0].field(), v[0].nvars()),
                                      MultiPoly(v[0].field(), v[0].nvars()),
                                      MultiPoly(v[0].field(), v[0].nvars())};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                r[i] += v[j].scale(M[i][j]);
        return r;
    }

    friend struct BlindingKey;
};

// The full blinding key: an outer mixing matrix on K^{3n}, one local layer
// per slot, and optional Frobenius twists applied to the projected pair.
struct BlindingKey {
    std::size_t n = 0;
    FieldPtr K;
    Mat delta, delta_inv;                       // 3n x 3n
    std::vector<LocalQuadIso> locals;           // n entries
    std::vector<std::pair<u64, u64>> twists;    // (a_i, b_i) Frobenius powers

    // derived data
    std::vector<std::array<MultiPoly, 3>> F;    // F_{i,j} = f_{i,j} ∘ delta_i, 3n vars
    std::vector<MultiPoly> gens;                // F_{i,2} - F_{i,3}
    std::vector<std::array<MultiPoly, 3>> mu;   // inverse layers, 3 vars
    std::vector<std::array<MultiPoly, 3>> mu_tilde;  // mu_i(x, y, y), 2 vars

    std::size_t dim() const { return 3 * n; }

    bool twisted() const {
        for (auto& [a, b] : twists)
            if (a || b) return true;
        return false;
    }

    static BlindingKey keygen(const FieldPtr& K, std::size_t n, bool with_twists, Rng& rng) {
        std::vector<LocalQuadIso> locals;
        for (std::size_t i = 0; i < n; ++i) locals.push_back(LocalQuadIso::random(K, rng));
        Mat delta = mat_random_invertible(K, 3 * n, rng);
        std::vector<std::pair<u64, u64>> twists(n, {0, 0});
        if (with_twists && K->d() > 1)
            for (auto& t : twists) t = {rng.below(K->d()), rng.below(K->d())};
        return from_parts(K, n, std::move(delta), std::move(locals), std::move(twists));
    }

    static BlindingKey from_parts(const FieldPtr& K, std::size_t n, Mat delta,
                                  std::vector<LocalQuadIso> locals,
                                  std::vector<std::pair<u64, u64>> twists) {
        if (locals.size() != n || twists.size() != n)
            throw ContractViolation("blinding key part count mismatch");
        BlindingKey k;
        k.n = n;
        k.K = K;
        k.delta = std::move(delta);
        k.delta_inv = mat_inverse(K, k.delta);
        k.locals = std::move(locals);
        k.twists = std::move(twists);

        std::size_t nv = 3 * n;
        for (std::size_t i = 0; i < n; ++i) {
            // rows 3i..3i+2 of delta as linear forms in the 3n inputs
            std::vector<MultiPoly> rows;
            for (std::size_t r = 0; r < 3; ++r) {
                MultiPoly L(K, nv);
                for (std::size_t c = 0; c < nv; ++c) {
                    Monomial m(nv, 0);
                    m[c] = 1;
                    L.add_term(m, k.delta[3 * i + r][c]);
                }
                rows.push_back(std::move(L));
            }
            std::array<MultiPoly, 3> f = k.locals[i].forward_polys(K);
            std::array<MultiPoly, 3> Fi = {f[0].compose(rows), f[1].compose(rows),
                                           f[2].compose(rows)};
            k.gens.push_back(Fi[1] - Fi[2]);
            k.F.push_back(std::move(Fi));

            std::array<MultiPoly, 3> m = k.locals[i].inverse_polys(K);
            std::vector<MultiPoly> diag = {MultiPoly::variable(K, 2, 0),
                                           MultiPoly::variable(K, 2, 1),
                                           MultiPoly::variable(K, 2, 1)};
            k.mu_tilde.push_back({m[0].compose(diag), m[1].compose(diag), m[2].compose(diag)});
            k.mu.push_back(std::move(m));
        }
        return k;
    }

    // Per-slot image of the blinded coordinates, twists applied to the values.
    std::vector<std::array<FieldElement, 2>> rho(const std::vector<FieldElement>& v,
                                                 bool apply_twists = true) const {
        if (v.size() != dim()) throw ContractViolation("blinded vector dimension mismatch");
        std::vector<std::array<FieldElement, 2>> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            FieldElement x = F[i][0].evaluate(v);
            FieldElement y = F[i][1].evaluate(v);
            if (apply_twists) {
                x = K->frobenius(x, twists[i].first);
                y = K->frobenius(y, twists[i].second);
            }
            out.push_back({x, y});
        }
        return out;
    }

    // All three local coordinates per slot, untwisted; slot i lies on its
    // fiber graph exactly when coordinates 2 and 3 agree.
    std::vector<std::array<FieldElement, 3>> lambda_values(const std::vector<FieldElement>& v) const {
        std::vector<std::array<FieldElement, 3>> out;
        for (std::size_t i = 0; i < n; ++i)
            out.push_back({F[i][0].evaluate(v), F[i][1].evaluate(v), F[i][2].evaluate(v)});
        return out;
    }

    std::vector<FieldElement> lift(const std::vector<std::array<FieldElement, 2>>& w,
                                   bool apply_twists = true) const {
        if (w.size() != n) throw ContractViolation("lift slot count mismatch");
        std::vector<FieldElement> u;
        u.reserve(dim());
        for (std::size_t i = 0; i < n; ++i) {
            FieldElement x = w[i][0], y = w[i][1];
            if (apply_twists) {
                u64 d = K->d();
                x = K->frobenius(x, (d - twists[i].first % d) % d);
                y = K->frobenius(y, (d - twists[i].second % d) % d);
            }
            for (std::size_t j = 0; j < 3; ++j) u.push_back(mu_tilde[i][j].evaluate({x, y}));
        }
        return mat_vec(delta_inv, u);
    }

    bool is_on_W(const std::vector<FieldElement>& v) const {
        for (const MultiPoly& g : gens)
            if (!g.evaluate(v).is_zero()) return false;
        return true;
    }

    std::vector<FieldElement> sample_W(Rng& rng) const {
        std::vector<std::array<FieldElement, 2>> w;
        for (std::size_t i = 0; i < n; ++i)
            w.push_back({K->sample(rng), K->sample(rng)});
        return lift(w, false);
    }

    // Slot-i variant through the shear that adds alpha*(f2 - f3) to the first
    // coordinate: same fiber set, same projected values on it.
    std::array<MultiPoly, 3> d_alpha_triple(std::size_t i, const FieldElement& alpha) const {
        return {F[i][0] + gens[i].scale(alpha), F[i][1], F[i][2]};
    }

    AmbivalenceIdeal ideal() const {
        AmbivalenceIdeal I;
        I.generators = gens;
        return I;
    }

    // Representatives of the F_{i,j} classes modulo constant multiples of the
    // generators: equal to F on the blinding space, distinct as polynomials.
    std::vector<std::array<MultiPoly, 3>> ambivalent_representatives(Rng& rng) const {
        AmbivalenceIdeal I = ideal();
        std::vector<std::array<MultiPoly, 3>> out;
        for (std::size_t i = 0; i < n; ++i)
            out.push_back({I.coset_sample(F[i][0], 2, rng), I.coset_sample(F[i][1], 2, rng),
                           I.coset_sample(F[i][2], 2, rng)});
        return out;
    }
};

}  // namespace trimap
