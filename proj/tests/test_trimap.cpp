#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <trimap/io.hpp>
#include <trimap/trimap.hpp>

using namespace trimap;

namespace {

// one desk-sized instance shared by the whole binary; building it dominates
// the suite's runtime, so every case reuses it
const TrimapInstance& inst() {
    static TrimapInstance i = [] {
        InstanceParams prm;
        prm.n = 2;
        prm.ell = 5;
        prm.seed = 20260814;
        return setup(prm);
    }();
    return i;
}

std::vector<Point> base_multiples(const SecretBundle& sec, u64 k, bool first_host) {
    Curve E = sec.curve();
    std::vector<Point> out;
    for (std::size_t r = 0; r < sec.prm.n; ++r) {
        u64 s = first_host ? sec.u[r] : sec.v[r];
        out.push_back(E.scalar_mul(k * s % sec.prm.ell, first_host ? sec.P : sec.Q));
    }
    return out;
}

bool same_points(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("setup aligns the published and secret views") {
    const TrimapInstance& I = inst();
    const PublicBundle& pub = I.pub;
    const SecretBundle& sec = I.sec;

    REQUIRE(pub.tagA == "E");
    REQUIRE(pub.tagB == "E");
    REQUIRE(pub.zeta != pub.K->one());
    REQUIRE(pub.zeta.pow(pub.prm.ell) == pub.K->one());
    REQUIRE(sec.curve_order % (pub.prm.ell * pub.prm.ell) == 0);

    u64 s = 0;
    for (std::size_t r = 0; r < sec.prm.n; ++r)
        s = addm(s, mulmod(sec.u[r], sec.v[r], sec.prm.ell), sec.prm.ell);
    REQUIRE(s == 1);

    REQUIRE(same_points(unblind_vector(sec.A, pub.alpha), base_multiples(sec, 1, true)));
    REQUIRE(same_points(unblind_vector(sec.B, pub.beta), base_multiples(sec, 1, false)));

    REQUIRE(pub.kernel_samples.size() == 3);
    for (const NCPoly& f : pub.kernel_samples) {
        LMat M = lambda_matrix(f, sec.gens, sec.prm.ell);
        for (const auto& row : M)
            for (u64 x : row) REQUIRE(x == 0);
    }

    // generators together with the identity span the full matrix algebra
    LMat span;
    span.push_back(lmat_flatten(lmat_identity(sec.prm.n)));
    for (const GeneratorMatrix& g : sec.gens)
        span.push_back(lmat_flatten(g.matrix(sec.prm.ell)));
    REQUIRE(lmat_rank(span, sec.prm.ell) == sec.prm.n * sec.prm.n);
}

TEST_CASE("published vector arithmetic commutes with unblinding") {
    const TrimapInstance& I = inst();
    EvalContext ctx(I.pub, 7001);
    Curve E = I.sec.curve();

    for (int trial = 0; trial < 6; ++trial) {
        u64 a = 1 + ctx.rng.below(4), b = 1 + ctx.rng.below(4);

        BlindedPoint Xa = scalar_hat(ctx, a, I.pub.alpha);
        REQUIRE(same_points(unblind_vector(I.sec.A, Xa), base_multiples(I.sec, a, true)));

        BlindedPoint Xb = scalar_hat(ctx, b, I.pub.alpha);
        BlindedPoint S = add_hat(ctx, Xa, Xb);
        REQUIRE(same_points(unblind_vector(I.sec.A, S),
                            base_multiples(I.sec, (a + b) % 5, true)));

        BlindedPoint N = neg_hat(ctx, Xa);
        std::vector<Point> want;
        for (const Point& p : base_multiples(I.sec, a, true)) want.push_back(E.neg(p));
        REQUIRE(same_points(unblind_vector(I.sec.A, N), want));

        BlindedPoint Yb = scalar_hat(ctx, b, I.pub.beta);
        REQUIRE(same_points(unblind_vector(I.sec.B, Yb), base_multiples(I.sec, b, false)));
    }

    // wrong-host combinations are refused
    REQUIRE(scalar_hat(ctx, 0, I.pub.alpha).identity);
    BlindedPoint X = scalar_hat(ctx, 2, I.pub.alpha);
    REQUIRE(add_hat(ctx, X, neg_hat(ctx, X)).identity);
}

TEST_CASE("generator actions commute with the secret reference") {
    const TrimapInstance& I = inst();
    EvalContext ctx(I.pub, 7002);

    for (int trial = 0; trial < 8; ++trial) {
        unsigned g = (unsigned)ctx.rng.below(I.sec.gens.size());
        u64 b = 1 + ctx.rng.below(4);
        BlindedPoint Y = scalar_hat(ctx, b, I.pub.beta);
        BlindedPoint Z = apply_gen(ctx, g, Y);
        std::vector<Point> want =
            secret_gen_action(I.sec, I.sec.gens[g], unblind_vector(I.sec.B, Y));
        REQUIRE(same_points(unblind_vector(I.sec.B, Z), want));
    }
    REQUIRE_THROWS_AS(apply_gen(ctx, 0, I.pub.alpha), ContractViolation);
    REQUIRE_THROWS_AS(apply_gen(ctx, 99, I.pub.beta), ContractViolation);
}

TEST_CASE("blinded pairing matches the unblinded reference") {
    const TrimapInstance& I = inst();
    EvalContext ctx(I.pub, 7003);
    Rng oracle_rng(7004);

    REQUIRE(blinded_pair(ctx, I.pub.alpha, I.pub.beta) == I.pub.zeta);

    for (int trial = 0; trial < 8; ++trial) {
        u64 a = ctx.rng.below(5), b = ctx.rng.below(5);
        BlindedPoint X = scalar_hat(ctx, a, I.pub.alpha);
        BlindedPoint Y = scalar_hat(ctx, b, I.pub.beta);
        FieldElement e = blinded_pair(ctx, X, Y);
        REQUIRE(e == I.pub.zeta.pow(a * b % 5));
        REQUIRE(e == secret_pair(I.sec, X, Y, oracle_rng));
    }
}

TEST_CASE("the three-slot evaluation is trilinear on samples") {
    const TrimapInstance& I = inst();
    EvalContext ctx(I.pub, 7005);
    Rng enc_rng(7006);

    for (int trial = 0; trial < 5; ++trial) {
        u64 a = ctx.rng.below(5), b = ctx.rng.below(5), c = ctx.rng.below(5);
        NCPoly f = encode(I.sec, c, enc_rng);
        BlindedPoint X = scalar_hat(ctx, a, I.pub.alpha);
        BlindedPoint Y = scalar_hat(ctx, b, I.pub.beta);
        REQUIRE(tri_eval(ctx, X, Y, f) == I.pub.zeta.pow(a * b % 5 * c % 5));
    }

    // re-encodings of the same scalar evaluate identically
    NCPoly f1 = encode(I.sec, 3, enc_rng);
    NCPoly f2 = encode(I.sec, 3, enc_rng);
    REQUIRE(f1.to_string() != f2.to_string());
    BlindedPoint X = scalar_hat(ctx, 2, I.pub.alpha);
    FieldElement want = I.pub.zeta.pow(2 * 1 % 5 * 3 % 5);
    REQUIRE(tri_eval(ctx, X, I.pub.beta, f1) == want);
    REQUIRE(tri_eval(ctx, X, I.pub.beta, f2) == want);
}

TEST_CASE("encodings collapse to scalars under the hidden generators") {
    const TrimapInstance& I = inst();
    Rng rng(7007);

    for (u64 a = 0; a < 5; ++a) {
        NCPoly f = encode(I.sec, a, rng);
        REQUIRE(f.terms.size() <= I.sec.prm.n * I.sec.prm.n + 2);
        LMat M = lambda_matrix(f, I.sec.gens, 5);
        for (std::size_t i = 0; i < M.size(); ++i)
            for (std::size_t j = 0; j < M.size(); ++j)
                REQUIRE(M[i][j] == (i == j ? a : 0));
        auto solved = dlp_solve_secret(I.sec, f);
        REQUIRE(solved.has_value());
        REQUIRE(*solved == a);
    }

    // a bare generator is not an encoding of anything
    NCPoly bare;
    bare.ell = 5;
    bare.terms.push_back({1, {0}});
    REQUIRE_FALSE(dlp_solve_secret(I.sec, bare).has_value());
}

TEST_CASE("published kernel words act as zero") {
    const TrimapInstance& I = inst();
    EvalContext ctx(I.pub, 7008);

    for (const NCPoly& f : I.pub.kernel_samples) {
        BlindedPoint Z = apply_encoding(ctx, f, I.pub.beta);
        REQUIRE(Z.identity);
        REQUIRE(tri_eval(ctx, I.pub.alpha, I.pub.beta, f) == I.pub.K->one());
    }
}

TEST_CASE("challenge words round trip through every solver") {
    const TrimapInstance& I = inst();
    EvalContext ctx(I.pub, 7009);
    Rng rng(7010);

    for (int round = 0; round < 3; ++round) {
        auto [f, hidden] = dlp_challenge(I.sec, rng);
        auto secretly = dlp_solve_secret(I.sec, f);
        REQUIRE(secretly.has_value());
        REQUIRE(*secretly == hidden);
        REQUIRE(dlp_solve_public(ctx, f) == hidden);
        REQUIRE(dlp_solve_exhaustive(ctx, f) == hidden);
    }
}

TEST_CASE("word polynomials round trip as text") {
    NCPoly f;
    f.ell = 5;
    f.terms.push_back({3, {0, 2, 1}});
    f.terms.push_back({1, {4}});
    f.terms.push_back({2, {}});
    std::string s = f.to_string();
    REQUIRE(s == "3 : 0.2.1 + 1 : 4 + 2 : -");
    REQUIRE(NCPoly::parse(5, s).to_string() == s);
    REQUIRE(NCPoly::parse(5, "0").terms.empty());
    REQUIRE_THROWS_AS(NCPoly::parse(5, "3"), ParseError);
    REQUIRE_THROWS_AS(NCPoly::parse(5, "x : -"), ParseError);
    REQUIRE_THROWS_AS(NCPoly::parse(5, "1 : a.b"), ParseError);
}

TEST_CASE("bundles serialize byte-identically and reload functional") {
    const TrimapInstance& I = inst();

    std::ostringstream p1, s1;
    io::write_public(p1, I.pub);
    io::write_secret(s1, I.sec);

    std::istringstream pin(p1.str());
    PublicBundle pub2 = io::read_public(pin);
    std::istringstream sin(s1.str());
    SecretBundle sec2 = io::read_secret(sin, &pub2.K);

    std::ostringstream p2, s2;
    io::write_public(p2, pub2);
    io::write_secret(s2, sec2);
    REQUIRE(p1.str() == p2.str());
    REQUIRE(s1.str() == s2.str());

    // the reloaded public bundle computes on its own
    EvalContext ctx(pub2, 7011);
    Rng rng(7012);
    NCPoly f = encode(sec2, 2, rng);
    BlindedPoint X = scalar_hat(ctx, 3, pub2.alpha);
    REQUIRE(tri_eval(ctx, X, pub2.beta, f) == pub2.zeta.pow(3 * 1 % 5 * 2 % 5));
    auto solved = dlp_solve_secret(sec2, f);
    REQUIRE(solved.has_value());
    REQUIRE(*solved == 2);

    // published-function container round trip
    std::ostringstream f1;
    io::write_published_file(f1, I.pub.K, I.pub.act_P[0]);
    std::istringstream fin(f1.str());
    auto [K2, pf] = io::read_published_file(fin);
    std::ostringstream f2;
    io::write_published_file(f2, K2, pf);
    REQUIRE(f1.str() == f2.str());
}

TEST_CASE("split-host instances refuse self pairings") {
    InstanceParams prm;
    prm.n = 2;
    prm.ell = 5;
    prm.seed = 20260814;
    prm.ddh = true;
    TrimapInstance I = setup(prm);

    REQUIRE(I.pub.tagA == "E1");
    REQUIRE(I.pub.tagB == "E2");

    EvalContext ctx(I.pub, 7013);
    REQUIRE(blinded_pair(ctx, I.pub.alpha, I.pub.beta) == I.pub.zeta);
    REQUIRE_THROWS_AS(blinded_pair(ctx, I.pub.alpha, I.pub.alpha), ContractViolation);
    REQUIRE_THROWS_AS(blinded_pair(ctx, I.pub.beta, I.pub.beta), ContractViolation);
    REQUIRE_THROWS_AS(add_hat(ctx, I.pub.alpha, I.pub.beta), ContractViolation);

    // cross-host evaluation still works end to end
    Rng rng(7014);
    NCPoly f = encode(I.sec, 4, rng);
    REQUIRE(tri_eval(ctx, I.pub.alpha, I.pub.beta, f) == I.pub.zeta.pow(4));
}
