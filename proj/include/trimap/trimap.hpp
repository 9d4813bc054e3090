#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trimap/blinding.hpp"
#include "trimap/curve.hpp"
#include "trimap/modl.hpp"
#include "trimap/pairing.hpp"
#include "trimap/publisher.hpp"

namespace trimap {

// --- generator matrices -----------------------------------------------------

// Row j of the matrix reads one lattice slot twice: entry 1 at column j1[j]
// and a small weight c[j] at column j2[j].  This shape keeps every published
// action a two-stage map: a rewiring and a weighted rewiring, glued by the
// published addition.
struct GeneratorMatrix {
    std::vector<unsigned> j1, j2;
    std::vector<u64> c;

    std::size_t n() const { return j1.size(); }

    LMat matrix(u64 ell) const {
        std::size_t nn = n();
        LMat M(nn, std::vector<u64>(nn, 0));
        for (std::size_t j = 0; j < nn; ++j) {
            M[j][j1[j]] = addm(M[j][j1[j]], 1, ell);
            M[j][j2[j]] = addm(M[j][j2[j]], c[j] % ell, ell);
        }
        return M;
    }

    static GeneratorMatrix random(std::size_t n, u64 ell, Rng& rng) {
        for (int tries = 0; tries < 256; ++tries) {
            GeneratorMatrix g;
            for (std::size_t j = 0; j < n; ++j) {
                unsigned a = (unsigned)rng.below(n);
                unsigned b = (unsigned)rng.below(n - 1);
                if (b >= a) ++b;
                g.j1.push_back(a);
                g.j2.push_back(b);
                g.c.push_back(1 + rng.below(ell - 1));
            }
            if (lmat_rank(g.matrix(ell), ell) == n) return g;
        }
        throw SearchExhausted("no invertible generator matrix found");
    }
};

inline std::vector<u64> lmat_apply(const LMat& M, const std::vector<u64>& v, u64 ell) {
    std::vector<u64> out(M.size(), 0);
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            out[i] = addm(out[i], mulmod(M[i][j], v[j], ell), ell);
    return out;
}

inline bool rows_clear(const std::vector<u64>& w) {
    for (u64 x : w)
        if (x == 0) return false;
    return true;
}

// A generator action is published as a rewiring plus a weighted rewiring,
// glued by the chord addition.  Rows whose two summands coincide or cancel
// land on the chord degeneracy, which has no blinded representative, so the
// slot vector must keep every row strictly clear of both.
inline bool action_clear(const GeneratorMatrix& g, const std::vector<u64>& w, u64 ell) {
    for (std::size_t j = 0; j < g.n(); ++j) {
        u64 a = w[g.j1[j]], b = mulmod(g.c[j] % ell, w[g.j2[j]], ell);
        if (a == b || addm(a, b, ell) == 0) return false;
    }
    return true;
}

inline std::vector<u64> action_apply(const GeneratorMatrix& g, const std::vector<u64>& w,
                                     u64 ell) {
    std::vector<u64> out(g.n());
    for (std::size_t j = 0; j < g.n(); ++j)
        out[j] = addm(w[g.j1[j]], mulmod(g.c[j] % ell, w[g.j2[j]], ell), ell);
    return out;
}

// Family whose span, together with the identity, is the full matrix algebra.
// With clear_v set, every generator is also required to carry that vector to
// a vector with no zero entry; actions producing a zero entry have no blinded
// representative, so such generators would poison encodings.
inline std::vector<GeneratorMatrix> sample_generators(std::size_t n, u64 ell, u64 N, Rng& rng,
                                                      const std::vector<u64>* clear_v = nullptr) {
    if (N + 1 < n * n)
        throw ContractViolation("generator count cannot span the matrix algebra");
    for (int tries = 0; tries < 64; ++tries) {
        std::vector<GeneratorMatrix> gens;
        LMat span;
        span.push_back(lmat_flatten(lmat_identity(n)));
        for (u64 i = 0; i < N; ++i) {
            for (int t = 0;; ++t) {
                if (t > 512) throw SearchExhausted("no slot-compatible generator found");
                GeneratorMatrix g = GeneratorMatrix::random(n, ell, rng);
                if (clear_v && !action_clear(g, *clear_v, ell)) continue;
                gens.push_back(std::move(g));
                break;
            }
            span.push_back(lmat_flatten(gens.back().matrix(ell)));
        }
        if (lmat_rank(span, ell) == n * n) return gens;
    }
    throw SearchExhausted("generator family does not span the matrix algebra");
}

// --- words in the free algebra ----------------------------------------------

struct NCTerm {
    u64 coeff = 0;
    std::vector<unsigned> word;  // generator indices; empty = the identity
};

struct NCPoly {
    u64 ell = 0;
    std::vector<NCTerm> terms;

    std::string to_string() const {
        if (terms.empty()) return "0";
        std::ostringstream os;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (t) os << " + ";
            os << terms[t].coeff << " : ";
            if (terms[t].word.empty()) {
                os << "-";
            } else {
                for (std::size_t k = 0; k < terms[t].word.size(); ++k) {
                    if (k) os << ".";
                    os << terms[t].word[k];
                }
            }
        }
        return os.str();
    }

    static NCPoly parse(u64 ell, const std::string& s) {
        NCPoly f;
        f.ell = ell;
        if (s == "0") return f;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            std::size_t end = s.find(" + ", pos);
            std::string part = s.substr(pos, end == std::string::npos ? end : end - pos);
            std::size_t sep = part.find(" : ");
            if (sep == std::string::npos) throw ParseError("malformed word term: " + part);
            NCTerm t;
            try {
                t.coeff = std::stoull(part.substr(0, sep)) % ell;
            } catch (const std::exception&) {
                throw ParseError("bad coefficient in: " + part);
            }
            std::string w = part.substr(sep + 3);
            if (w != "-") {
                std::size_t p = 0;
                while (p <= w.size()) {
                    std::size_t dot = w.find('.', p);
                    std::string idx = w.substr(p, dot == std::string::npos ? dot : dot - p);
                    try {
                        t.word.push_back((unsigned)std::stoul(idx));
                    } catch (const std::exception&) {
                        throw ParseError("bad generator index in: " + part);
                    }
                    if (dot == std::string::npos) break;
                    p = dot + 1;
                }
            }
            f.terms.push_back(std::move(t));
            if (end == std::string::npos) break;
            pos = end + 3;
        }
        return f;
    }
};

inline LMat lambda_matrix(const NCPoly& f, const std::vector<GeneratorMatrix>& gens, u64 ell) {
    if (gens.empty()) throw ContractViolation("no generators");
    std::size_t n = gens[0].n();
    LMat acc(n, std::vector<u64>(n, 0));
    for (const NCTerm& t : f.terms) {
        LMat M = lmat_identity(n);
        for (unsigned idx : t.word) {
            if (idx >= gens.size()) throw ContractViolation("word references unknown generator");
            M = lmat_mul(M, gens[idx].matrix(ell), ell);
        }
        acc = lmat_add(acc, lmat_scale(M, t.coeff, ell), ell);
    }
    return acc;
}

// --- blinded lattice points ---------------------------------------------------

struct BlindedPoint {
    std::string tag;
    bool identity = false;
    std::vector<FieldElement> coords;

    static BlindedPoint zero(std::string tag) {
        BlindedPoint p;
        p.tag = std::move(tag);
        p.identity = true;
        return p;
    }

    bool same(const BlindedPoint& o) const {
        if (tag != o.tag || identity != o.identity) return false;
        return identity || coords == o.coords;
    }
};

// --- instance ---------------------------------------------------------------

struct InstanceParams {
    std::size_t n = 2;
    u64 ell = 5;
    u64 N = 0;  // generator count; 0 picks 2n^2
    u64 q_max = 32;
    u64 d_max = 2;
    u64 qd_min = 200;
    u64 qd_cap = 20000;
    bool ddh = false;
    u64 seed = 1;
};

// Secret per-host blinding material: the key and one transport per slot.
// Transports stay in GL_2; see the notes on published table growth.
struct HostMaterial {
    std::string tag;
    BlindingKey key;
    std::vector<CurveTransform> T;
};

// Published vector arithmetic for one host: addition and doubling twice (the
// retry ladder reroutes through the fresh copies), negation once.
struct HostPublic {
    PublishedFunction add1, add2, dbl1, dbl2, neg;
};

struct PublicBundle {
    InstanceParams prm;  // effective values
    FieldPtr K;
    FieldElement zeta;
    std::string tagA, tagB;
    BlindedPoint alpha, beta;
    HostPublic hostA, hostB;
    std::vector<PublishedFunction> act_P, act_S;  // per-generator rewirings, host B
    std::array<PublishedFunction, 2> tan_ab, chord_ab, vert_ab;
    std::array<PublishedFunction, 2> tan_ba, chord_ba, vert_ba;
    std::vector<NCPoly> kernel_samples;
};

struct SecretBundle {
    InstanceParams prm;
    FieldPtr K;
    FieldElement a, b;  // curve coefficients
    u64 curve_order = 0;
    Point P, Q;
    std::vector<u64> u, v;  // slot scalars, sum u_r v_r = 1 mod ell
    HostMaterial A, B;
    std::vector<GeneratorMatrix> gens;

    Curve curve() const { return Curve(K, a, b); }
};

struct TrimapInstance {
    PublicBundle pub;
    SecretBundle sec;
};

// --- blinding of point vectors (secret side) ---------------------------------

inline BlindedPoint blind_vector(const HostMaterial& H, const std::vector<Point>& X) {
    std::vector<std::array<FieldElement, 2>> w;
    for (std::size_t r = 0; r < X.size(); ++r) {
        if (X[r].inf) throw ExceptionalPoint("component at infinity is not representable");
        Point tp = H.T[r].transport(X[r]);
        w.push_back({tp.x, tp.y});
    }
    BlindedPoint out;
    out.tag = H.tag;
    out.coords = H.key.lift(w);
    return out;
}

inline std::vector<Point> unblind_vector(const HostMaterial& H, const BlindedPoint& bp) {
    if (bp.identity) {
        return std::vector<Point>(H.key.n, Point::infinity());
    }
    std::vector<Point> out;
    auto pairs = H.key.rho(bp.coords);
    for (std::size_t r = 0; r < pairs.size(); ++r)
        out.push_back(H.T[r].transport_inv(Point(pairs[r][0], pairs[r][1])));
    return out;
}

// --- setup --------------------------------------------------------------------

namespace detail {

inline HostMaterial make_host(const FieldPtr& K, std::size_t n, std::string tag, Rng& rng) {
    HostMaterial H;
    H.tag = std::move(tag);
    H.key = BlindingKey::keygen(K, n, false, rng);
    for (std::size_t r = 0; r < n; ++r)
        H.T.push_back(CurveTransform::random(K, false, rng));
    return H;
}

inline std::vector<std::vector<FieldElement>> host_wsample(const BlindingKey& key, Rng& rng,
                                                           std::size_t count = 120) {
    std::vector<std::vector<FieldElement>> W;
    for (std::size_t i = 0; i < count; ++i) W.push_back(key.sample_W(rng));
    return W;
}

inline std::vector<std::vector<FieldElement>> joint_sample(
    const std::vector<const std::vector<std::vector<FieldElement>>*>& per_host) {
    std::size_t count = per_host[0]->size();
    std::vector<std::vector<FieldElement>> out;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::vector<FieldElement>> slots;
        for (const auto* w : per_host) slots.push_back((*w)[i]);
        out.push_back(flatten_slots(slots));
    }
    return out;
}

inline PublishedFunction publish_vector_add(const Curve& E, const HostMaterial& H,
                                            const std::vector<std::vector<FieldElement>>& WW,
                                            Rng& rng) {
    std::vector<LocalMapSpec> rows;
    for (std::size_t j = 0; j < H.key.n; ++j) {
        LocalMapSpec s;
        s.sources = {{0u, (unsigned)j}, {1u, (unsigned)j}};
        s.psi = symbolic_add(E, H.T[j]);
        rows.push_back(std::move(s));
    }
    return publish_map(H.key, {&H.key, &H.key}, rows, WW, rng, 0);
}

inline PublishedFunction publish_vector_dbl(const Curve& E, const HostMaterial& H,
                                            const std::vector<std::vector<FieldElement>>& W,
                                            Rng& rng) {
    std::vector<LocalMapSpec> rows;
    for (std::size_t j = 0; j < H.key.n; ++j) {
        LocalMapSpec s;
        s.sources = {{0u, (unsigned)j}};
        s.psi = symbolic_dbl(E, H.T[j]);
        rows.push_back(std::move(s));
    }
    return publish_map(H.key, {&H.key}, rows, W, rng, 0);
}

inline PublishedFunction publish_vector_neg(const Curve& E, const HostMaterial& H,
                                            const std::vector<std::vector<FieldElement>>& W,
                                            Rng& rng) {
    std::vector<LocalMapSpec> rows;
    for (std::size_t j = 0; j < H.key.n; ++j) {
        LocalMapSpec s;
        s.sources = {{0u, (unsigned)j}};
        s.psi = symbolic_neg(E.field(), H.T[j]);
        rows.push_back(std::move(s));
    }
    return publish_map(H.key, {&H.key}, rows, W, rng, 0);
}

// The two stages of a generator action: slot j reads slot j1 unchanged and
// slot j2 through multiplication by the row weight c, each republished in
// slot j's transport.  The published addition finishes the row.
inline PublishedFunction publish_rewire(const HostMaterial& H, const GeneratorMatrix& g,
                                        const std::vector<std::vector<FieldElement>>& W,
                                        Rng& rng) {
    std::vector<LocalMapSpec> rows;
    for (std::size_t j = 0; j < H.key.n; ++j) {
        LocalMapSpec s;
        s.sources = {{0u, g.j1[j]}};
        s.psi = symbolic_rewire(H.key.K, H.T[g.j1[j]], H.T[j]);
        rows.push_back(std::move(s));
    }
    return publish_map(H.key, {&H.key}, rows, W, rng, 0);
}

inline PublishedFunction publish_weighted_rewire(const Curve& E, const HostMaterial& H,
                                                 const GeneratorMatrix& g,
                                                 const std::vector<std::vector<FieldElement>>& W,
                                                 Rng& rng) {
    std::vector<LocalMapSpec> rows;
    for (std::size_t j = 0; j < H.key.n; ++j) {
        LocalMapSpec s;
        s.sources = {{0u, g.j2[j]}};
        s.psi = symbolic_mul(E, g.c[j], H.T[g.j2[j]], H.T[j]);
        rows.push_back(std::move(s));
    }
    return publish_map(H.key, {&H.key}, rows, W, rng, 0);
}

// Wall-free words of the given length: every stage of the word must act on
// the current slot vector without touching a chord degeneracy.  Pruned
// depth-first count with early exit once `enough` are found.
inline u64 count_clear_words(const std::vector<GeneratorMatrix>& gens, const std::vector<u64>& v,
                             u64 ell, std::size_t len, u64 enough) {
    u64 count = 0;
    std::vector<std::pair<std::vector<u64>, std::size_t>> stack;
    stack.push_back({v, 0});
    while (!stack.empty()) {
        auto [w, d] = stack.back();
        stack.pop_back();
        if (d == len) {
            if (++count >= enough) return count;
            continue;
        }
        for (const GeneratorMatrix& g : gens) {
            if (!action_clear(g, w, ell)) continue;
            stack.push_back({action_apply(g, w, ell), d + 1});
        }
    }
    return count;
}

enum class LineKind { Tangent, Chord, Vertical };

// Scalar pairing helpers: per-slot line values multiplied across slots.  The
// chord form takes two chain points and the evaluation point; the others one
// chain point and the evaluation point.
inline PublishedFunction publish_line_product(const Curve& E, const HostMaterial& From,
                                              const HostMaterial& At, LineKind kind,
                                              const std::vector<std::vector<FieldElement>>& WW,
                                              Rng& rng) {
    std::vector<ScalarLocalSpec> rows;
    std::vector<const BlindingKey*> slot_keys;
    if (kind == LineKind::Chord)
        slot_keys = {&From.key, &From.key, &At.key};
    else
        slot_keys = {&From.key, &At.key};
    for (std::size_t j = 0; j < From.key.n; ++j) {
        ScalarLocalSpec s;
        if (kind == LineKind::Chord) {
            s.sources = {{0u, (unsigned)j}, {1u, (unsigned)j}, {2u, (unsigned)j}};
            s.value = symbolic_chord_value(E, From.T[j], From.T[j], At.T[j]);
        } else if (kind == LineKind::Tangent) {
            s.sources = {{0u, (unsigned)j}, {1u, (unsigned)j}};
            s.value = symbolic_tangent_value(E, From.T[j], At.T[j]);
        } else {
            s.sources = {{0u, (unsigned)j}, {1u, (unsigned)j}};
            s.value = symbolic_vertical_value(E, From.T[j], At.T[j]);
        }
        rows.push_back(std::move(s));
    }
    return publish_packed_product(slot_keys, rows, WW, rng);
}

}  // namespace detail

inline NCPoly encode(const SecretBundle& sec, u64 a, Rng& rng);
inline std::vector<NCPoly> gen_kernel_samples(const SecretBundle& sec, std::size_t count,
                                              Rng& rng);

inline TrimapInstance setup(const InstanceParams& prm0) {
    InstanceParams prm = prm0;
    if (prm.N == 0) prm.N = 2 * prm.n * prm.n;
    if (prm.N + 1 < prm.n * prm.n)
        throw ContractViolation("generator count cannot span the matrix algebra");
    Rng rng(prm.seed);

    DeskParams desk = find_desk_params(prm.ell, prm.q_max, prm.d_max, rng, prm.qd_min, prm.qd_cap);
    const FieldPtr& K = desk.K;
    Curve E = desk.curve();
    auto [P, Q] = torsion_basis(E, desk.order, prm.ell, *desk.sqrts, rng);
    FieldElement zeta = weil(E, prm.ell, P, Q, rng);

    // slot scalars with sum u_r v_r = 1
    std::vector<u64> u, v;
    for (int tries = 0;; ++tries) {
        if (tries > 256) throw SearchExhausted("slot scalar normalization failed");
        u.clear();
        v.clear();
        u64 s = 0;
        for (std::size_t r = 0; r < prm.n; ++r) {
            u.push_back(1 + rng.below(prm.ell - 1));
            v.push_back(1 + rng.below(prm.ell - 1));
            s = addm(s, mulmod(u[r], v[r], prm.ell), prm.ell);
        }
        if (s == 0) continue;
        u64 si = invm(s, prm.ell);
        for (auto& x : v) x = mulmod(x, si, prm.ell);
        break;
    }

    TrimapInstance inst;
    inst.sec.prm = prm;
    inst.sec.K = K;
    inst.sec.a = desk.a;
    inst.sec.b = desk.b;
    inst.sec.curve_order = desk.order;
    inst.sec.P = P;
    inst.sec.Q = Q;
    inst.sec.u = u;
    inst.sec.v = v;
    inst.sec.B = detail::make_host(K, prm.n, prm.ddh ? "E2" : "E", rng);
    inst.sec.A = prm.ddh ? detail::make_host(K, prm.n, "E1", rng) : inst.sec.B;

    // Generators are drawn compatible with the slot vector; on top of that
    // the family must admit enough full-length words whose suffix actions all
    // stay free of zero entries, or encodings could not be evaluated.
    for (int tries = 0;; ++tries) {
        if (tries > 256) throw SearchExhausted("no generator family compatible with the slots");
        inst.sec.gens = sample_generators(prm.n, prm.ell, prm.N, rng, &v);
        if (detail::count_clear_words(inst.sec.gens, v, prm.ell, prm.n, prm.N) >= prm.N) break;
    }

    const HostMaterial& A = inst.sec.A;
    const HostMaterial& B = inst.sec.B;

    PublicBundle& pub = inst.pub;
    pub.prm = prm;
    pub.K = K;
    pub.zeta = zeta;
    pub.tagA = A.tag;
    pub.tagB = B.tag;

    // base lattice points
    std::vector<Point> alpha_pts, beta_pts;
    for (std::size_t r = 0; r < prm.n; ++r) {
        alpha_pts.push_back(E.scalar_mul(u[r], P));
        beta_pts.push_back(E.scalar_mul(v[r], Q));
    }
    pub.alpha = blind_vector(A, alpha_pts);
    pub.beta = blind_vector(B, beta_pts);

    auto WA = detail::host_wsample(A.key, rng);
    auto WB = detail::host_wsample(B.key, rng);
    auto WAA = detail::joint_sample({&WA, &WA});
    auto WBB = detail::joint_sample({&WB, &WB});
    auto WAB = detail::joint_sample({&WA, &WB});
    auto WBA = detail::joint_sample({&WB, &WA});
    auto WAAB = detail::joint_sample({&WA, &WA, &WB});
    auto WBBA = detail::joint_sample({&WB, &WB, &WA});

    pub.hostA.add1 = detail::publish_vector_add(E, A, WAA, rng);
    pub.hostA.add2 = detail::publish_vector_add(E, A, WAA, rng);
    pub.hostA.dbl1 = detail::publish_vector_dbl(E, A, WA, rng);
    pub.hostA.dbl2 = detail::publish_vector_dbl(E, A, WA, rng);
    pub.hostA.neg = detail::publish_vector_neg(E, A, WA, rng);
    pub.hostB.add1 = detail::publish_vector_add(E, B, WBB, rng);
    pub.hostB.add2 = detail::publish_vector_add(E, B, WBB, rng);
    pub.hostB.dbl1 = detail::publish_vector_dbl(E, B, WB, rng);
    pub.hostB.dbl2 = detail::publish_vector_dbl(E, B, WB, rng);
    pub.hostB.neg = detail::publish_vector_neg(E, B, WB, rng);

    for (const GeneratorMatrix& g : inst.sec.gens) {
        pub.act_P.push_back(detail::publish_rewire(B, g, WB, rng));
        pub.act_S.push_back(detail::publish_weighted_rewire(E, B, g, WB, rng));
    }

    for (int k = 0; k < 2; ++k) {
        pub.tan_ab[k] = detail::publish_line_product(E, A, B, detail::LineKind::Tangent, WAB, rng);
        pub.chord_ab[k] =
            detail::publish_line_product(E, A, B, detail::LineKind::Chord, WAAB, rng);
        pub.vert_ab[k] =
            detail::publish_line_product(E, A, B, detail::LineKind::Vertical, WAB, rng);
        pub.tan_ba[k] = detail::publish_line_product(E, B, A, detail::LineKind::Tangent, WBA, rng);
        pub.chord_ba[k] =
            detail::publish_line_product(E, B, A, detail::LineKind::Chord, WBBA, rng);
        pub.vert_ba[k] =
            detail::publish_line_product(E, B, A, detail::LineKind::Vertical, WBA, rng);
    }

    pub.kernel_samples = gen_kernel_samples(inst.sec, 3, rng);

    return inst;
}

// --- public-side evaluation ----------------------------------------------------

struct EvalContext {
    const PublicBundle* pub;
    PubEvalCache cache;
    Rng rng;

    EvalContext(const PublicBundle& p, u64 seed) : pub(&p), rng(seed) {}
};

inline const HostPublic& host_pub(const PublicBundle& pub, const std::string& tag) {
    if (tag == pub.tagA) return pub.hostA;
    if (tag == pub.tagB) return pub.hostB;
    throw ContractViolation("point does not belong to this instance");
}

namespace detail {

inline BlindedPoint map_point(EvalContext& ctx, const PublishedFunction& f1,
                              const PublishedFunction* f2,
                              const std::vector<const BlindedPoint*>& args,
                              const std::string& out_tag) {
    std::vector<std::vector<FieldElement>> slots;
    for (const BlindedPoint* p : args) {
        if (p->identity) throw ExceptionalPoint("published maps take finite points");
        slots.push_back(p->coords);
    }
    const PublishedFunction* fs[2] = {&f1, f2};
    for (int k = 0; k < (f2 ? 2 : 1); ++k) {
        try {
            BlindedPoint out;
            out.tag = out_tag;
            out.coords = eval_published(*fs[k], slots, &ctx.cache);
            return out;
        } catch (const PoleHit&) {
            if (k + 1 >= (f2 ? 2 : 1))
                throw ExceptionalPoint("published map degenerates at this input");
        }
    }
    throw ExceptionalPoint("unreachable");
}

}  // namespace detail

inline BlindedPoint neg_hat(EvalContext& ctx, const BlindedPoint& X) {
    if (X.identity) return X;
    const HostPublic& H = host_pub(*ctx.pub, X.tag);
    return detail::map_point(ctx, H.neg, nullptr, {&X}, X.tag);
}

inline BlindedPoint add_hat(EvalContext& ctx, const BlindedPoint& X, const BlindedPoint& Y) {
    if (X.tag != Y.tag) throw ContractViolation("adding points from different hosts");
    if (X.identity) return Y;
    if (Y.identity) return X;
    const HostPublic& H = host_pub(*ctx.pub, X.tag);
    if (X.coords == Y.coords) return detail::map_point(ctx, H.dbl1, &H.dbl2, {&X}, X.tag);
    if (neg_hat(ctx, Y).coords == X.coords) return BlindedPoint::zero(X.tag);
    return detail::map_point(ctx, H.add1, &H.add2, {&X, &Y}, X.tag);
}

inline BlindedPoint scalar_hat(EvalContext& ctx, u64 k, const BlindedPoint& X) {
    k %= ctx.pub->prm.ell;
    if (k == 0 || X.identity) return BlindedPoint::zero(X.tag);
    BlindedPoint acc = BlindedPoint::zero(X.tag);
    BlindedPoint base = X;
    while (k) {
        if (k & 1) acc = add_hat(ctx, acc, base);
        k >>= 1;
        if (k) base = add_hat(ctx, base, base);
    }
    return acc;
}

// One generator action through the published two-stage rewiring.
inline BlindedPoint apply_gen(EvalContext& ctx, unsigned i, const BlindedPoint& Y) {
    const PublicBundle& pub = *ctx.pub;
    if (Y.tag != pub.tagB) throw ContractViolation("generator actions live on the second host");
    if (i >= pub.act_P.size()) throw ContractViolation("unknown generator");
    if (Y.identity) return Y;
    BlindedPoint p1 = detail::map_point(ctx, pub.act_P[i], nullptr, {&Y}, Y.tag);
    BlindedPoint p2 = detail::map_point(ctx, pub.act_S[i], nullptr, {&Y}, Y.tag);
    return add_hat(ctx, p1, p2);
}

// f(Y): words act right-to-left, then terms are summed.  A nonzero shuffle
// seed permutes the term order; exceptional intermediate collisions usually
// disappear under a different association order.
inline BlindedPoint apply_f(EvalContext& ctx, const NCPoly& f, const BlindedPoint& Y,
                            bool shuffle = false) {
    const PublicBundle& pub = *ctx.pub;
    if (Y.tag != pub.tagB) throw ContractViolation("encodings act on the second host");
    std::vector<std::size_t> order(f.terms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (shuffle)
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[ctx.rng.below(i)]);
    BlindedPoint acc = BlindedPoint::zero(Y.tag);
    for (std::size_t idx : order) {
        const NCTerm& t = f.terms[idx];
        if (t.coeff % pub.prm.ell == 0) continue;
        BlindedPoint p = Y;
        for (std::size_t k = t.word.size(); k-- > 0;) p = apply_gen(ctx, t.word[k], p);
        p = scalar_hat(ctx, t.coeff, p);
        acc = add_hat(ctx, acc, p);
    }
    return acc;
}

// --- blinded pairing -------------------------------------------------------------

namespace detail {

// Mirror of the plain Miller loop, with chain points carried as blinded
// vectors and line factors multiplied across slots by the published products.
inline FieldElement bl_miller(EvalContext& ctx, const BlindedPoint& Xp, const BlindedPoint& Yp,
                              const PublishedFunction& tan, const PublishedFunction& chord,
                              const PublishedFunction& vert) {
    const PublicBundle& pub = *ctx.pub;
    const FieldPtr& K = pub.K;
    u64 ell = pub.prm.ell;
    if (Xp.identity) return K->one();
    if (Yp.identity) throw PoleHit("evaluation at infinity");
    if (ell == 1) return K->one();
    if (ell == 2) return eval_published(vert, {Xp.coords, Yp.coords}, &ctx.cache)[0];

    unsigned top = 0;
    while ((ell >> (top + 1)) != 0) ++top;
    std::vector<BlindedPoint> chain = {Xp};
    for (unsigned i = 0; i < top; ++i)
        chain.push_back(add_hat(ctx, chain.back(), chain.back()));

    FieldElement H = K->one();
    FieldElement V = K->one();
    std::vector<unsigned> set_bits;
    for (unsigned i = 0; i <= top; ++i) {
        if ((ell >> i) & 1) {
            H *= V;
            set_bits.push_back(i);
        }
        if (i < top)
            V = V * V * eval_published(tan, {chain[i].coords, Yp.coords}, &ctx.cache)[0];
    }

    FieldElement G = K->one();
    BlindedPoint gamma = chain[set_bits.back()];
    for (std::size_t j = set_bits.size() - 1; j-- > 0;) {
        const BlindedPoint& next = chain[set_bits[j]];
        if (j > 0) {
            G *= eval_published(chord, {gamma.coords, next.coords, Yp.coords}, &ctx.cache)[0];
            gamma = add_hat(ctx, gamma, next);
            if (gamma.identity) throw ContractViolation("recombination closed early");
        } else {
            if (!add_hat(ctx, gamma, next).identity)
                throw ContractViolation("recombination chain does not close");
            G *= eval_published(vert, {gamma.coords, Yp.coords}, &ctx.cache)[0];
        }
    }
    return H * G;
}

}  // namespace detail

// Blinded pairing with the retry ladder: direct quotient, the second
// published copies, a negation sandwich, then scalar shifts undone in the
// exponent.  Dependent arguments (same host) are detected and give 1.
inline FieldElement blinded_pair(EvalContext& ctx, const BlindedPoint& X, const BlindedPoint& Y) {
    const PublicBundle& pub = *ctx.pub;
    const FieldPtr& K = pub.K;
    u64 ell = pub.prm.ell;
    if (X.tag != pub.tagA) throw ContractViolation("first pairing slot expects the first host");
    if (Y.tag != pub.tagB) throw ContractViolation("second pairing slot expects the second host");
    if (X.identity || Y.identity) return K->one();

    auto attempt = [&](const BlindedPoint& Xi, const BlindedPoint& Yi, int copy) {
        FieldElement num =
            detail::bl_miller(ctx, Xi, Yi, pub.tan_ab[copy], pub.chord_ab[copy], pub.vert_ab[copy]);
        FieldElement den =
            detail::bl_miller(ctx, Yi, Xi, pub.tan_ba[copy], pub.chord_ba[copy], pub.vert_ba[copy]);
        FieldElement e = num / den;
        return ((ell * pub.prm.n) % 2) ? -e : e;
    };

    for (int copy = 0; copy < 2; ++copy) {
        try {
            return attempt(X, Y, copy);
        } catch (const PoleHit&) {
        } catch (const ExceptionalPoint&) {
        }
    }

    // dependence scan is only expressible when both arguments share a host
    if (pub.tagA == pub.tagB) {
        try {
            BlindedPoint acc = BlindedPoint::zero(X.tag);
            for (u64 m = 0; m < ell; ++m) {
                if (acc.same(Y)) return K->one();
                acc = add_hat(ctx, acc, X);
            }
        } catch (const PoleHit&) {
        } catch (const ExceptionalPoint&) {
        }
    }

    try {
        return attempt(neg_hat(ctx, X), Y, 0).inv();
    } catch (const PoleHit&) {
    } catch (const ExceptionalPoint&) {
    }

    int budget = retry_budget();
    for (int t = 0; t < budget && ell > 2; ++t) {
        u64 s = 2 + ctx.rng.below(ell - 2);
        u64 si = invm(s, ell);
        try {
            return attempt(scalar_hat(ctx, s, X), Y, t % 2).pow(si);
        } catch (const PoleHit&) {
        } catch (const ExceptionalPoint&) {
        }
        try {
            return attempt(X, scalar_hat(ctx, s, Y), t % 2).pow(si);
        } catch (const PoleHit&) {
        } catch (const ExceptionalPoint&) {
        }
    }
    throw DegeneratePair("blinded pairing kept hitting supports");
}

// f(Y) through the published actions.  Retries are cheap next to a pairing,
// so spend generously before giving up; shuffles rearrange the partial sums,
// and the identity-shift wrap relocates them entirely when no term order is
// clear of walls.
inline BlindedPoint apply_encoding(EvalContext& ctx, const NCPoly& f, const BlindedPoint& Y) {
    int budget = retry_budget() * 8;
    u64 ell = ctx.pub->prm.ell;
    for (int t = 0;; ++t) {
        try {
            if (t % 4 < 2) return apply_f(ctx, f, Y, t > 0);
            u64 r = 1 + ctx.rng.below(ell - 1);
            NCPoly g = f;
            bool merged = false;
            for (NCTerm& tm : g.terms)
                if (tm.word.empty()) {
                    tm.coeff = addm(tm.coeff, r, ell);
                    merged = true;
                    break;
                }
            if (!merged) g.terms.push_back({r, {}});
            BlindedPoint Zs = apply_f(ctx, g, Y, true);
            return add_hat(ctx, Zs, neg_hat(ctx, scalar_hat(ctx, r, Y)));
        } catch (const ExceptionalPoint&) {
            if (t >= budget) throw;
        }
    }
}

// zeta^{abc} for X = [a]alpha, Y = [b]beta, f encoding c.
inline FieldElement tri_eval(EvalContext& ctx, const BlindedPoint& X, const BlindedPoint& Y,
                             const NCPoly& f) {
    return blinded_pair(ctx, X, apply_encoding(ctx, f, Y));
}

// --- encoding and the trapdoor -----------------------------------------------

// f = c z_{i_1}...z_{i_n} + sum_i b_i z_i + b_0 with lambda(f) = a I.  The
// word is resampled until every suffix action keeps the slot vector free of
// zero entries (such intermediate vectors have no blinded representative),
// and the correction terms solve the span system over a random independent
// column subset, which keeps encodings short.
inline NCPoly encode(const SecretBundle& sec, u64 a, Rng& rng) {
    u64 ell = sec.prm.ell;
    std::size_t n = sec.prm.n;
    u64 N = sec.gens.size();

    u64 cw = 1 + rng.below(ell - 1);

    // draw the word back to front by randomized backtracking, so that every
    // stage of its action on the slot vector dodges the chord degeneracies
    std::vector<unsigned> word;
    {
        std::vector<std::vector<u64>> state = {sec.v};
        std::vector<std::vector<unsigned>> cand;
        while (word.size() < n) {
            if (cand.size() == word.size()) {
                std::vector<unsigned> c(N);
                for (u64 i = 0; i < N; ++i) c[i] = (unsigned)i;
                for (std::size_t i = c.size(); i > 1; --i) std::swap(c[i - 1], c[rng.below(i)]);
                cand.push_back(std::move(c));
            }
            bool extended = false;
            while (!cand.back().empty()) {
                unsigned i = cand.back().back();
                cand.back().pop_back();
                if (action_clear(sec.gens[i], state.back(), ell)) {
                    state.push_back(action_apply(sec.gens[i], state.back(), ell));
                    word.push_back(i);
                    extended = true;
                    break;
                }
            }
            if (!extended) {
                if (word.empty()) throw SearchExhausted("no wall-free word found");
                word.pop_back();
                state.pop_back();
                cand.pop_back();
            }
        }
        std::reverse(word.begin(), word.end());
    }
    LMat Mw = lmat_identity(n);
    for (unsigned idx : word) Mw = lmat_mul(Mw, sec.gens[idx].matrix(ell), ell);

    std::vector<u64> target = lmat_flatten(lmat_scale(Mw, subm(0, cw, ell), ell));
    for (std::size_t j = 0; j < n; ++j)
        target[j * n + j] = addm(target[j * n + j], a % ell, ell);

    // columns: 0 is the identity, i+1 is generator i
    std::vector<std::vector<u64>> cols;
    cols.push_back(lmat_flatten(lmat_identity(n)));
    for (u64 i = 0; i < N; ++i) cols.push_back(lmat_flatten(sec.gens[i].matrix(ell)));

    std::vector<std::size_t> order(cols.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<std::size_t> support;
    LMat picked;
    for (std::size_t idx : order) {
        picked.push_back(cols[idx]);
        if (lmat_rank(picked, ell) == picked.size()) {
            support.push_back(idx);
            if (support.size() == n * n) break;
        } else {
            picked.pop_back();
        }
    }
    if (support.size() != n * n) throw SolveFailure("generator span system inconsistent");

    LMat C(n * n, std::vector<u64>(n * n, 0));
    for (std::size_t r = 0; r < n * n; ++r)
        for (std::size_t c = 0; c < support.size(); ++c) C[r][c] = cols[support[c]][r];
    std::vector<u64> x = lmat_apply(lmat_inverse(C, ell), target, ell);

    NCPoly f;
    f.ell = ell;
    f.terms.push_back({cw, word});
    for (std::size_t c = 0; c < support.size(); ++c) {
        if (x[c] == 0) continue;
        if (support[c] == 0)
            f.terms.push_back({x[c], {}});
        else
            f.terms.push_back({x[c], {(unsigned)(support[c] - 1)}});
    }
    return f;
}

// Trapdoor solve: with the generators in hand, lambda(f) collapses to a
// scalar matrix and the scalar is the answer.  Returns nullopt when f is not
// a valid encoding.
inline std::optional<u64> dlp_solve_secret(const SecretBundle& sec, const NCPoly& f) {
    LMat M = lambda_matrix(f, sec.gens, sec.prm.ell);
    u64 c = M[0][0];
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < M.size(); ++j)
            if (M[i][j] != (i == j ? c : 0)) return std::nullopt;
    return c;
}

// Public solve: evaluate the trilinear form at the published base points and
// search the exponent.
inline u64 dlp_solve_public(EvalContext& ctx, const NCPoly& f) {
    const PublicBundle& pub = *ctx.pub;
    FieldElement z = tri_eval(ctx, pub.alpha, pub.beta, f);
    FieldElement acc = pub.K->one();
    for (u64 c = 0; c < pub.prm.ell; ++c) {
        if (acc == z) return c;
        acc = acc * pub.zeta;
    }
    throw SolveFailure("value is not a power of the published root");
}

// Exhaustive public solve: a valid encoding acts on the base point as a
// scalar, so compare f(beta) against the multiples of beta.  Desk scale only.
inline u64 dlp_solve_exhaustive(EvalContext& ctx, const NCPoly& f) {
    const PublicBundle& pub = *ctx.pub;
    BlindedPoint Z = apply_encoding(ctx, f, pub.beta);
    for (u64 a = 0; a < pub.prm.ell; ++a)
        if (Z.same(scalar_hat(ctx, a, pub.beta))) return a;
    throw SolveFailure("encoding does not act as a scalar on the base point");
}

inline std::vector<NCPoly> gen_kernel_samples(const SecretBundle& sec, std::size_t count,
                                              Rng& rng) {
    std::vector<NCPoly> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(encode(sec, 0, rng));
    return out;
}

// The hidden answer stays with the challenger; solvers see only the word.
inline std::pair<NCPoly, u64> dlp_challenge(const SecretBundle& sec, Rng& rng) {
    u64 a = rng.below(sec.prm.ell);
    return {encode(sec, a, rng), a};
}

// --- secret-side oracles --------------------------------------------------------

// Reference pairing: unblind both vectors and multiply per-slot Weil values.
inline FieldElement secret_pair(const SecretBundle& sec, const BlindedPoint& X,
                                const BlindedPoint& Y, Rng& rng) {
    Curve E = sec.curve();
    const FieldPtr& K = sec.K;
    if (X.identity || Y.identity) return K->one();
    std::vector<Point> xs = unblind_vector(X.tag == sec.A.tag ? sec.A : sec.B, X);
    std::vector<Point> ys = unblind_vector(Y.tag == sec.B.tag ? sec.B : sec.A, Y);
    FieldElement acc = K->one();
    for (std::size_t r = 0; r < xs.size(); ++r)
        acc = acc * weil(E, sec.prm.ell, xs[r], ys[r], rng);
    return acc;
}

// Reference generator action on plain point vectors.
inline std::vector<Point> secret_gen_action(const SecretBundle& sec, const GeneratorMatrix& g,
                                            const std::vector<Point>& X) {
    Curve E = sec.curve();
    std::vector<Point> out;
    for (std::size_t j = 0; j < g.n(); ++j)
        out.push_back(E.add(X[g.j1[j]], E.scalar_mul(g.c[j], X[g.j2[j]])));
    return out;
}

}  // namespace trimap
