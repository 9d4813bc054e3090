#include <catch2/catch_amalgamated.hpp>

#include <trimap/field.hpp>
#include <trimap/poly.hpp>
#include <trimap/rng.hpp>

#include "oracles.hpp"

using namespace trimap;

namespace {

MultiPoly random_poly(const FieldPtr& K, std::size_t nvars, unsigned deg, unsigned terms,
                      Rng& rng) {
    MultiPoly p(K, nvars);
    std::vector<Monomial> monos = monomials_up_to(nvars, deg);
    for (unsigned t = 0; t < terms; ++t)
        p.add_term(monos[rng.below(monos.size())], K->sample(rng));
    return p;
}

std::vector<FieldElement> random_point(const FieldPtr& K, std::size_t nvars, Rng& rng) {
    std::vector<FieldElement> pt;
    pt.reserve(nvars);
    for (std::size_t i = 0; i < nvars; ++i) pt.push_back(K->sample(rng));
    return pt;
}

}  // namespace

TEST_CASE("polynomial arithmetic matches pointwise field arithmetic") {
    Rng rng(101);
    FieldPtr K = Field::make(19, 2, rng);
    for (int trial = 0; trial < 20; ++trial) {
        MultiPoly p = random_poly(K, 3, 4, 6, rng);
        MultiPoly q = random_poly(K, 3, 4, 6, rng);
        FieldElement c = K->sample(rng);
        for (int s = 0; s < 5; ++s) {
            auto pt = random_point(K, 3, rng);
            FieldElement pv = p.evaluate(pt), qv = q.evaluate(pt);
            REQUIRE((p + q).evaluate(pt) == pv + qv);
            REQUIRE((p - q).evaluate(pt) == pv - qv);
            REQUIRE((p * q).evaluate(pt) == pv * qv);
            REQUIRE((-p).evaluate(pt) == -pv);
            REQUIRE(p.scale(c).evaluate(pt) == c * pv);
        }
        REQUIRE((p - p).is_zero());
        REQUIRE((p + q) == (q + p));
        REQUIRE((p * q) == (q * p));
    }
}

TEST_CASE("like terms merge and cancel in add_term") {
    Rng rng(102);
    FieldPtr K = Field::make(7, 1, rng);
    MultiPoly p(K, 2);
    Monomial m{2, 1};
    p.add_term(m, K->from_uint(3));
    p.add_term(m, K->from_uint(5));
    REQUIRE(p.terms().size() == 1);
    REQUIRE(p.terms().begin()->second == K->from_uint(1));
    p.add_term(m, K->from_uint(6));
    REQUIRE(p.is_zero());
    REQUIRE_THROWS_AS(p.add_term(Monomial{1, 0, 0}, K->one()), ContractViolation);
}

TEST_CASE("composition evaluates as substitution") {
    Rng rng(103);
    FieldPtr K = Field::make(11, 2, rng);
    for (int trial = 0; trial < 10; ++trial) {
        MultiPoly outer = random_poly(K, 2, 3, 5, rng);
        std::vector<MultiPoly> inner = {random_poly(K, 3, 2, 4, rng),
                                        random_poly(K, 3, 2, 4, rng)};
        MultiPoly g = outer.compose(inner);
        REQUIRE(g.nvars() == 3);
        for (int s = 0; s < 8; ++s) {
            auto pt = random_point(K, 3, rng);
            std::vector<FieldElement> mid = {inner[0].evaluate(pt), inner[1].evaluate(pt)};
            REQUIRE(g.evaluate(pt) == outer.evaluate(mid));
        }
    }
    std::vector<MultiPoly> idsub = {MultiPoly::variable(K, 3, 0), MultiPoly::variable(K, 3, 1),
                                    MultiPoly::variable(K, 3, 2)};
    MultiPoly p = random_poly(K, 3, 3, 5, rng);
    REQUIRE(p.compose(idsub) == p);
}

TEST_CASE("polynomial text form round trips") {
    Rng rng(104);
    FieldPtr K = Field::make(5, 3, rng);
    for (int trial = 0; trial < 20; ++trial) {
        MultiPoly p = random_poly(K, 4, 5, 7, rng);
        REQUIRE(MultiPoly::parse(K, 4, p.to_string()) == p);
    }
    MultiPoly z(K, 4);
    REQUIRE(z.to_string() == "0");
    REQUIRE(MultiPoly::parse(K, 4, "0").is_zero());
    MultiPoly c = MultiPoly::constant(K, 2, K->from_uint(3));
    REQUIRE(c.to_string() == "3 0 0 * 1");
    REQUIRE_THROWS_AS(MultiPoly::parse(K, 2, "junk"), ParseError);
    REQUIRE_THROWS_AS(MultiPoly::parse(K, 2, "1 0 0 * y2"), ParseError);
    REQUIRE_THROWS_AS(MultiPoly::parse(K, 2, "1 0 0 * x3"), ParseError);
    REQUIRE_THROWS_AS(MultiPoly::parse(K, 2, "1 0 0 * x1^0"), ParseError);
}

TEST_CASE("rational functions behave as quotients away from poles") {
    Rng rng(105);
    FieldPtr K = Field::make(23, 1, rng);
    for (int trial = 0; trial < 15; ++trial) {
        RationalFn f(random_poly(K, 2, 3, 4, rng), random_poly(K, 2, 2, 3, rng) +
                                                       MultiPoly::constant(K, 2, K->one()));
        RationalFn g(random_poly(K, 2, 3, 4, rng), random_poly(K, 2, 2, 3, rng) +
                                                       MultiPoly::constant(K, 2, K->one()));
        int used = 0;
        for (u64 a = 0; a < 23 && used < 6; ++a) {
            for (u64 b = 0; b < 23 && used < 6; ++b) {
                std::vector<FieldElement> pt = {K->from_uint(a), K->from_uint(b)};
                if (f.den.evaluate(pt).is_zero() || g.den.evaluate(pt).is_zero()) continue;
                ++used;
                FieldElement fv = f.evaluate(pt), gv = g.evaluate(pt);
                REQUIRE((f + g).evaluate(pt) == fv + gv);
                REQUIRE((f - g).evaluate(pt) == fv - gv);
                REQUIRE((f * g).evaluate(pt) == fv * gv);
                if (!g.num.evaluate(pt).is_zero()) REQUIRE((f / g).evaluate(pt) == fv / gv);
            }
        }
        REQUIRE(used == 6);
    }
    MultiPoly zero(K, 2);
    REQUIRE_THROWS_AS(RationalFn(MultiPoly::variable(K, 2, 0), zero), ContractViolation);
    RationalFn f = RationalFn::from_poly(MultiPoly::variable(K, 2, 0));
    REQUIRE_THROWS_AS(f / RationalFn::from_poly(zero), DenominatorZero);
    std::vector<FieldElement> origin = {K->zero(), K->zero()};
    RationalFn pole(MultiPoly::constant(K, 2, K->one()), MultiPoly::variable(K, 2, 0));
    REQUIRE_THROWS_AS(pole.evaluate(origin), DenominatorZero);
}

TEST_CASE("rational composition agrees with direct evaluation on both paths") {
    Rng rng(106);
    FieldPtr K = Field::make(13, 1, rng);
    MultiPoly outer = random_poly(K, 2, 4, 6, rng);

    // one denominator shared by every inner function triggers the homogenized path
    MultiPoly den = random_poly(K, 2, 2, 3, rng) + MultiPoly::constant(K, 2, K->one());
    std::vector<RationalFn> shared = {RationalFn(random_poly(K, 2, 2, 4, rng), den),
                                      RationalFn(random_poly(K, 2, 2, 4, rng), den)};
    RationalFn fast = compose_rational(outer, shared);

    // same functions with one quotient inflated by a common factor: the
    // denominators now differ termwise, forcing the per-variable path
    MultiPoly bump = MultiPoly::variable(K, 2, 1) + MultiPoly::constant(K, 2, K->one());
    std::vector<RationalFn> mixed = {RationalFn(shared[0].num * bump, shared[0].den * bump),
                                     shared[1]};
    RationalFn slow = compose_rational(outer, mixed);

    REQUIRE(fast.degree() < slow.degree());

    int used = 0;
    for (u64 a = 0; a < 13 && used < 25; ++a) {
        for (u64 b = 0; b < 13 && used < 25; ++b) {
            std::vector<FieldElement> pt = {K->from_uint(a), K->from_uint(b)};
            if (den.evaluate(pt).is_zero() || bump.evaluate(pt).is_zero()) continue;
            std::vector<FieldElement> mid = {shared[0].evaluate(pt), shared[1].evaluate(pt)};
            FieldElement want = outer.evaluate(mid);
            REQUIRE(fast.evaluate(pt) == want);
            REQUIRE(slow.evaluate(pt) == want);
            ++used;
        }
    }
    REQUIRE(used == 25);
}

TEST_CASE("coset draws differ in form but not on the common zero locus") {
    Rng rng(107);
    FieldPtr K = Field::make(7, 1, rng);
    // generators x1^2 - x2 and x3 vanish together exactly on {(t, t^2, 0)}
    MultiPoly g1 = MultiPoly::variable(K, 3, 0) * MultiPoly::variable(K, 3, 0) -
                   MultiPoly::variable(K, 3, 1);
    MultiPoly g2 = MultiPoly::variable(K, 3, 2);
    AmbivalenceIdeal ideal{{g1, g2}};

    MultiPoly h = random_poly(K, 3, 2, 5, rng);
    for (int trial = 0; trial < 10; ++trial) {
        AmbivalenceIdeal::Certificate cert;
        MultiPoly drawn = ideal.coset_sample(h, 4, rng, &cert);
        REQUIRE(cert.multipliers.size() == 2);

        // the certificate reconstructs the draw exactly
        MultiPoly rebuilt = h;
        rebuilt += cert.multipliers[0] * g1;
        rebuilt += cert.multipliers[1] * g2;
        REQUIRE(drawn == rebuilt);

        // every point of the locus sees the original values
        for (u64 t = 0; t < 7; ++t) {
            FieldElement x = K->from_uint(t);
            std::vector<FieldElement> pt = {x, x * x, K->zero()};
            REQUIRE(drawn.evaluate(pt) == h.evaluate(pt));
        }
    }
    // distinct draws from the same seed stream disagree somewhere off the locus
    MultiPoly d1 = ideal.coset_sample(h, 4, rng);
    MultiPoly d2 = ideal.coset_sample(h, 4, rng);
    REQUIRE(d1 != d2);
    REQUIRE_THROWS_AS(ideal.coset_sample(h, 1, rng), ContractViolation);
}

TEST_CASE("exponent folding preserves values on the base field") {
    for (u64 q : {3ull, 5ull, 7ull}) {
        REQUIRE(j_reduce_exp(0, q) == 0);
        for (unsigned e = 1; e <= 3 * (unsigned)q; ++e) {
            unsigned r = j_reduce_exp(e, q);
            REQUIRE(r >= 1);
            REQUIRE(r <= q - 1);
            for (u64 x = 0; x < q; ++x)
                REQUIRE(powmod(x, e, q) == powmod(x, r, q));
        }
    }

    Rng rng(108);
    FieldPtr K = Field::make(5, 1, rng);
    MultiPoly p = random_poly(K, 2, 9, 8, rng);
    MultiPoly r = reduce_mod_J(p, 5);
    for (const auto& [m, c] : r.terms())
        for (std::uint8_t e : m) REQUIRE(e < 5);
    for (u64 a = 0; a < 5; ++a)
        for (u64 b = 0; b < 5; ++b) {
            std::vector<FieldElement> pt = {K->from_uint(a), K->from_uint(b)};
            REQUIRE(r.evaluate(pt) == p.evaluate(pt));
        }
}

TEST_CASE("descent to base coordinates keeps degrees small and values intact") {
    Rng rng(109);
    FieldPtr K = Field::make(3, 2, rng);
    MultiPoly F = random_poly(K, 2, 3, 6, rng);
    std::vector<u64> twists = {0, 1};
    for (u64 twist_out : {0ull, 1ull}) {
        MultiPoly G = descent_reduce(F, twists, twist_out);
        REQUIRE(G.nvars() == 4);
        for (const auto& [m, c] : G.terms())
            for (std::uint8_t e : m) REQUIRE(e < 3);
        for (int s = 0; s < 40; ++s) {
            std::vector<FieldElement> pt = random_point(K, 2, rng);
            std::vector<FieldElement> mid = {K->frobenius(pt[0], twists[0]),
                                             K->frobenius(pt[1], twists[1])};
            FieldElement want = K->frobenius(F.evaluate(mid), twist_out);
            REQUIRE(G.evaluate(descend_point(K, pt)) == want);
        }
    }
}

TEST_CASE("monomial enumeration is complete, bounded and ordered") {
    std::vector<Monomial> m = monomials_up_to(3, 2);
    REQUIRE(m.size() == 10);
    for (const Monomial& mono : m) {
        unsigned total = 0;
        for (std::uint8_t e : mono) total += e;
        REQUIRE(total <= 2);
    }
    REQUIRE(std::is_sorted(m.begin(), m.end(), GradedLex()));
    REQUIRE(std::adjacent_find(m.begin(), m.end()) == m.end());
}
