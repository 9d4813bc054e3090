#pragma once

#include <array>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "blinding.hpp"
#include "curve.hpp"
#include "err.hpp"
#include "field.hpp"
#include "linalg.hpp"
#include "poly.hpp"
#include "publisher.hpp"
#include "trimap.hpp"

// Text serialization for instance bundles and published functions.  Writers
// are deterministic: identical in-memory values produce identical bytes.
// Readers accept exactly the writers' output (versioned headers) and throw
// ParseError on anything else.

namespace trimap {
namespace io {

inline std::string next_line(std::istream& is) {
    std::string s;
    if (!std::getline(is, s)) throw ParseError("unexpected end of file");
    return s;
}

inline std::istringstream expect(std::istream& is, const std::string& tag) {
    std::string line = next_line(is);
    if (line.substr(0, tag.size()) != tag)
        throw ParseError("expected '" + tag + "', got '" + line + "'");
    return std::istringstream(line.substr(tag.size()));
}

template <typename T>
inline T want(std::istringstream& is, const char* what) {
    T v;
    if (!(is >> v)) throw ParseError(std::string("missing ") + what);
    return v;
}

// Field elements inside longer lines travel as flattened base coordinates;
// the reader knows d from the field.
inline void put_elems(std::ostream& os, const std::vector<FieldElement>& v) {
    for (const FieldElement& e : v)
        for (u64 c : e.coords()) os << ' ' << c;
}

inline std::vector<FieldElement> get_elems(std::istringstream& is, const FieldPtr& K,
                                           std::size_t count) {
    std::vector<FieldElement> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<u64> c(K->d(), 0);
        for (u64& x : c)
            if (!(is >> x)) throw ParseError("truncated element list");
        out.push_back(K->element(std::move(c)));
    }
    return out;
}

// --- field ------------------------------------------------------------------

inline void write_field(std::ostream& os, const FieldPtr& K) {
    os << "field " << K->q() << ' ' << K->d();
    for (u64 c : K->modulus()) os << ' ' << c;
    os << '\n';
}

// Pass an already-loaded field as `share` to get pointer-identical elements
// across bundles read from separate files (pub + sec of one instance).
inline FieldPtr read_field(std::istream& is, const FieldPtr* share = nullptr) {
    std::istringstream ls = expect(is, "field");
    u64 q = want<u64>(ls, "q"), d = want<u64>(ls, "d");
    std::vector<u64> mod(d > 1 ? d : 0, 0);
    for (u64& c : mod) c = want<u64>(ls, "modulus coefficient");
    if (share && *share && (*share)->q() == q && (*share)->d() == d &&
        (*share)->modulus() == mod)
        return *share;
    return Field::make(q, d, mod);
}

// --- params -----------------------------------------------------------------

inline void write_params(std::ostream& os, const InstanceParams& p) {
    os << "params " << p.n << ' ' << p.ell << ' ' << p.N << ' ' << p.q_max << ' ' << p.d_max
       << ' ' << p.qd_min << ' ' << p.qd_cap << ' ' << (p.ddh ? 1 : 0) << ' ' << p.seed << '\n';
}

inline InstanceParams read_params(std::istream& is) {
    std::istringstream ls = expect(is, "params");
    InstanceParams p;
    p.n = want<std::size_t>(ls, "n");
    p.ell = want<u64>(ls, "ell");
    p.N = want<u64>(ls, "N");
    p.q_max = want<u64>(ls, "q_max");
    p.d_max = want<u64>(ls, "d_max");
    p.qd_min = want<u64>(ls, "qd_min");
    p.qd_cap = want<u64>(ls, "qd_cap");
    p.ddh = want<int>(ls, "ddh") != 0;
    p.seed = want<u64>(ls, "seed");
    return p;
}

// --- polynomials ------------------------------------------------------------

inline void write_poly(std::ostream& os, const MultiPoly& p) {
    os << "poly " << p.nvars() << ' ' << p.to_string() << '\n';
}

inline MultiPoly read_poly(std::istream& is, const FieldPtr& K) {
    std::istringstream ls = expect(is, "poly");
    std::size_t nv = want<std::size_t>(ls, "nvars");
    std::string body;
    std::getline(ls, body);
    if (!body.empty() && body[0] == ' ') body.erase(0, 1);
    return MultiPoly::parse(K, nv, body);
}

// --- published functions ------------------------------------------------------

inline const char* mode_name(PubMode m) {
    switch (m) {
        case PubMode::Sum: return "sum";
        case PubMode::Product: return "product";
        default: return "map";
    }
}

inline PubMode mode_from(const std::string& s) {
    if (s == "sum") return PubMode::Sum;
    if (s == "product") return PubMode::Product;
    if (s == "map") return PubMode::Map;
    throw ParseError("unknown publication mode: " + s);
}

inline void write_published(std::ostream& os, const PublishedFunction& f) {
    os << "function\n";
    os << "meta " << mode_name(f.mode) << ' ' << (f.repr == PubRepr::Flat ? "flat" : "packed")
       << ' ' << f.arity << ' ' << f.slot_dim << ' ' << f.out_dim << ' ' << (f.twisted ? 1 : 0)
       << ' ' << f.nvars << '\n';
    os << "flat " << f.flat.size() << '\n';
    for (const auto& row : f.flat) {
        os << "row " << row.size() << '\n';
        for (const FlatPiece& p : row) {
            write_poly(os, p.num);
            write_poly(os, p.den);
        }
    }
    os << "tables " << f.H.size() << '\n';
    for (const auto& slot : f.H) {
        os << "slot " << slot.size() << '\n';
        for (const auto& h : slot) {
            write_poly(os, h[0]);
            write_poly(os, h[1]);
        }
    }
    os << "packed " << f.packed.size() << '\n';
    for (const auto& row : f.packed) {
        os << "row " << row.size() << '\n';
        for (const PackedPiece& p : row) {
            os << "sources " << p.sources.size();
            for (auto [s, r] : p.sources) os << ' ' << s << ' ' << r;
            os << '\n';
            write_poly(os, p.tnum);
            write_poly(os, p.tden);
        }
    }
    os << "tele " << f.tele.size() << '\n';
    for (const auto& row : f.tele) {
        os << "row " << row.size() << '\n';
        for (const TelescopeForm& t : row) {
            write_poly(os, t.l1);
            write_poly(os, t.l2);
        }
    }
    os << "end\n";
}

inline PublishedFunction read_published(std::istream& is, const FieldPtr& K) {
    expect(is, "function");
    std::istringstream ms = expect(is, "meta");
    PublishedFunction f;
    f.mode = mode_from(want<std::string>(ms, "mode"));
    std::string repr = want<std::string>(ms, "repr");
    if (repr != "flat" && repr != "packed") throw ParseError("unknown representation: " + repr);
    f.repr = repr == "flat" ? PubRepr::Flat : PubRepr::Packed;
    f.arity = want<unsigned>(ms, "arity");
    f.slot_dim = want<std::size_t>(ms, "slot_dim");
    f.out_dim = want<std::size_t>(ms, "out_dim");
    f.twisted = want<int>(ms, "twisted") != 0;
    f.nvars = want<std::size_t>(ms, "nvars");

    std::istringstream hs = expect(is, "flat");
    std::size_t rows = want<std::size_t>(hs, "count");
    for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream rs = expect(is, "row");
        std::size_t pieces = want<std::size_t>(rs, "count");
        std::vector<FlatPiece> row;
        for (std::size_t j = 0; j < pieces; ++j) {
            FlatPiece p{read_poly(is, K), read_poly(is, K)};
            row.push_back(std::move(p));
        }
        f.flat.push_back(std::move(row));
    }
    hs = expect(is, "tables");
    rows = want<std::size_t>(hs, "count");
    for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream rs = expect(is, "slot");
        std::size_t entries = want<std::size_t>(rs, "count");
        std::vector<std::array<MultiPoly, 2>> slot;
        for (std::size_t j = 0; j < entries; ++j) {
            MultiPoly h0 = read_poly(is, K);
            MultiPoly h1 = read_poly(is, K);
            slot.push_back({std::move(h0), std::move(h1)});
        }
        f.H.push_back(std::move(slot));
    }
    hs = expect(is, "packed");
    rows = want<std::size_t>(hs, "count");
    for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream rs = expect(is, "row");
        std::size_t pieces = want<std::size_t>(rs, "count");
        std::vector<PackedPiece> row;
        for (std::size_t j = 0; j < pieces; ++j) {
            std::istringstream ss = expect(is, "sources");
            std::size_t k = want<std::size_t>(ss, "count");
            PackedPiece p;
            for (std::size_t t = 0; t < k; ++t) {
                unsigned s = want<unsigned>(ss, "slot index");
                unsigned r = want<unsigned>(ss, "row index");
                p.sources.emplace_back(s, r);
            }
            p.tnum = read_poly(is, K);
            p.tden = read_poly(is, K);
            row.push_back(std::move(p));
        }
        f.packed.push_back(std::move(row));
    }
    hs = expect(is, "tele");
    rows = want<std::size_t>(hs, "count");
    for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream rs = expect(is, "row");
        std::size_t pieces = want<std::size_t>(rs, "count");
        std::vector<TelescopeForm> row;
        for (std::size_t j = 0; j < pieces; ++j) {
            TelescopeForm t{read_poly(is, K), read_poly(is, K)};
            row.push_back(std::move(t));
        }
        f.tele.push_back(std::move(row));
    }
    expect(is, "end");
    return f;
}

// Standalone published-function files carry their own field header.
inline void write_published_file(std::ostream& os, const FieldPtr& K,
                                 const PublishedFunction& f) {
    os << "published-function v1\n";
    write_field(os, K);
    write_published(os, f);
}

inline std::pair<FieldPtr, PublishedFunction> read_published_file(std::istream& is) {
    expect(is, "published-function v1");
    FieldPtr K = read_field(is);
    PublishedFunction f = read_published(is, K);
    return {K, std::move(f)};
}

// --- points and matrices ------------------------------------------------------

inline void write_blinded(std::ostream& os, const char* label, const BlindedPoint& b) {
    os << label << ' ' << b.tag << ' ' << (b.identity ? 1 : 0) << ' ' << b.coords.size();
    put_elems(os, b.coords);
    os << '\n';
}

inline BlindedPoint read_blinded(std::istream& is, const FieldPtr& K, const char* label) {
    std::istringstream ls = expect(is, label);
    BlindedPoint b;
    b.tag = want<std::string>(ls, "tag");
    b.identity = want<int>(ls, "identity flag") != 0;
    std::size_t k = want<std::size_t>(ls, "coordinate count");
    b.coords = get_elems(ls, K, k);
    return b;
}

inline void write_mat(std::ostream& os, const char* label, const Mat& M) {
    os << label << ' ' << M.size() << ' ' << (M.empty() ? 0 : M[0].size());
    for (const Vec& row : M) put_elems(os, row);
    os << '\n';
}

inline Mat read_mat(std::istream& is, const FieldPtr& K, const char* label) {
    std::istringstream ls = expect(is, label);
    std::size_t r = want<std::size_t>(ls, "rows"), c = want<std::size_t>(ls, "cols");
    Mat M;
    for (std::size_t i = 0; i < r; ++i) M.push_back(get_elems(ls, K, c));
    return M;
}

inline void write_ncpoly(std::ostream& os, const NCPoly& f) {
    os << "ncpoly " << f.ell << ' ' << f.to_string() << '\n';
}

inline NCPoly read_ncpoly(std::istream& is) {
    std::istringstream ls = expect(is, "ncpoly");
    u64 ell = want<u64>(ls, "ell");
    std::string body;
    std::getline(ls, body);
    if (!body.empty() && body[0] == ' ') body.erase(0, 1);
    return NCPoly::parse(ell, body);
}

// --- public bundle -------------------------------------------------------------

inline void write_public(std::ostream& os, const PublicBundle& pub) {
    os << "trimap-public v1\n";
    write_params(os, pub.prm);
    write_field(os, pub.K);
    os << "zeta";
    put_elems(os, {pub.zeta});
    os << '\n';
    os << "tags " << pub.tagA << ' ' << pub.tagB << '\n';
    write_blinded(os, "alpha", pub.alpha);
    write_blinded(os, "beta", pub.beta);
    for (const HostPublic* h : {&pub.hostA, &pub.hostB}) {
        write_published(os, h->add1);
        write_published(os, h->add2);
        write_published(os, h->dbl1);
        write_published(os, h->dbl2);
        write_published(os, h->neg);
    }
    os << "actions " << pub.act_P.size() << '\n';
    for (std::size_t i = 0; i < pub.act_P.size(); ++i) {
        write_published(os, pub.act_P[i]);
        write_published(os, pub.act_S[i]);
    }
    for (const auto* pairline :
         {&pub.tan_ab, &pub.chord_ab, &pub.vert_ab, &pub.tan_ba, &pub.chord_ba, &pub.vert_ba}) {
        write_published(os, (*pairline)[0]);
        write_published(os, (*pairline)[1]);
    }
    os << "kernel " << pub.kernel_samples.size() << '\n';
    for (const NCPoly& f : pub.kernel_samples) write_ncpoly(os, f);
    os << "end-public\n";
}

inline PublicBundle read_public(std::istream& is) {
    expect(is, "trimap-public v1");
    PublicBundle pub;
    pub.prm = read_params(is);
    pub.K = read_field(is);
    std::istringstream zs = expect(is, "zeta");
    pub.zeta = get_elems(zs, pub.K, 1)[0];
    std::istringstream ts = expect(is, "tags");
    pub.tagA = want<std::string>(ts, "tagA");
    pub.tagB = want<std::string>(ts, "tagB");
    pub.alpha = read_blinded(is, pub.K, "alpha");
    pub.beta = read_blinded(is, pub.K, "beta");
    for (HostPublic* h : {&pub.hostA, &pub.hostB}) {
        h->add1 = read_published(is, pub.K);
        h->add2 = read_published(is, pub.K);
        h->dbl1 = read_published(is, pub.K);
        h->dbl2 = read_published(is, pub.K);
        h->neg = read_published(is, pub.K);
    }
    std::istringstream as = expect(is, "actions");
    std::size_t acts = want<std::size_t>(as, "count");
    for (std::size_t i = 0; i < acts; ++i) {
        pub.act_P.push_back(read_published(is, pub.K));
        pub.act_S.push_back(read_published(is, pub.K));
    }
    for (auto* pairline :
         {&pub.tan_ab, &pub.chord_ab, &pub.vert_ab, &pub.tan_ba, &pub.chord_ba, &pub.vert_ba}) {
        (*pairline)[0] = read_published(is, pub.K);
        (*pairline)[1] = read_published(is, pub.K);
    }
    std::istringstream ks = expect(is, "kernel");
    std::size_t kc = want<std::size_t>(ks, "count");
    for (std::size_t i = 0; i < kc; ++i) pub.kernel_samples.push_back(read_ncpoly(is));
    expect(is, "end-public");
    return pub;
}

// --- secret bundle --------------------------------------------------------------

inline void write_key(std::ostream& os, const BlindingKey& key) {
    os << "key " << key.n << '\n';
    write_mat(os, "delta", key.delta);
    for (const LocalQuadIso& L : key.locals) {
        os << "local\n";
        write_mat(os, "matA", L.A);
        write_mat(os, "matB", L.B);
        os << "shear";
        put_elems(os, L.p);
        put_elems(os, L.q);
        os << '\n';
    }
    os << "twists";
    for (auto [a, b] : key.twists) os << ' ' << a << ' ' << b;
    os << '\n';
}

inline BlindingKey read_key(std::istream& is, const FieldPtr& K) {
    std::istringstream ks = expect(is, "key");
    std::size_t n = want<std::size_t>(ks, "slot count");
    Mat delta = read_mat(is, K, "delta");
    std::vector<LocalQuadIso> locals;
    for (std::size_t i = 0; i < n; ++i) {
        expect(is, "local");
        LocalQuadIso L;
        L.A = read_mat(is, K, "matA");
        L.A_inv = mat_inverse(K, L.A);
        L.B = read_mat(is, K, "matB");
        L.B_inv = mat_inverse(K, L.B);
        std::istringstream ss = expect(is, "shear");
        L.p = get_elems(ss, K, 3);
        L.q = get_elems(ss, K, 4);
        locals.push_back(std::move(L));
    }
    std::istringstream ts = expect(is, "twists");
    std::vector<std::pair<u64, u64>> twists;
    for (std::size_t i = 0; i < n; ++i) {
        u64 a = want<u64>(ts, "twist"), b = want<u64>(ts, "twist");
        twists.emplace_back(a, b);
    }
    return BlindingKey::from_parts(K, n, std::move(delta), std::move(locals), std::move(twists));
}

inline void write_host(std::ostream& os, const HostMaterial& H) {
    os << "host " << H.tag << ' ' << H.T.size() << '\n';
    write_key(os, H.key);
    for (const CurveTransform& T : H.T) {
        os << "transport " << (T.includes_j ? 1 : 0);
        put_elems(os, T.A[0]);
        put_elems(os, T.A[1]);
        os << '\n';
    }
}

inline HostMaterial read_host(std::istream& is, const FieldPtr& K) {
    std::istringstream hs = expect(is, "host");
    HostMaterial H;
    H.tag = want<std::string>(hs, "tag");
    std::size_t slots = want<std::size_t>(hs, "slot count");
    H.key = read_key(is, K);
    for (std::size_t i = 0; i < slots; ++i) {
        std::istringstream ts = expect(is, "transport");
        CurveTransform T;
        T.includes_j = want<int>(ts, "inversion flag") != 0;
        T.A = {get_elems(ts, K, 2), get_elems(ts, K, 2)};
        T.A_inv = mat_inverse(K, T.A);
        H.T.push_back(std::move(T));
    }
    return H;
}

inline void write_secret(std::ostream& os, const SecretBundle& sec) {
    os << "trimap-secret v1\n";
    write_params(os, sec.prm);
    write_field(os, sec.K);
    os << "curve";
    put_elems(os, {sec.a, sec.b});
    os << ' ' << sec.curve_order << '\n';
    Curve E = sec.curve();
    os << "basis " << E.point_string(sec.P) << " ; " << E.point_string(sec.Q) << '\n';
    os << "scalars";
    for (u64 x : sec.u) os << ' ' << x;
    for (u64 x : sec.v) os << ' ' << x;
    os << '\n';
    write_host(os, sec.A);
    write_host(os, sec.B);
    os << "gens " << sec.gens.size() << '\n';
    for (const GeneratorMatrix& g : sec.gens) {
        os << "gen " << g.n();
        for (unsigned j : g.j1) os << ' ' << j;
        for (unsigned j : g.j2) os << ' ' << j;
        for (u64 c : g.c) os << ' ' << c;
        os << '\n';
    }
    os << "end-secret\n";
}

inline SecretBundle read_secret(std::istream& is, const FieldPtr* share = nullptr) {
    expect(is, "trimap-secret v1");
    SecretBundle sec;
    sec.prm = read_params(is);
    sec.K = read_field(is, share);
    std::istringstream cs = expect(is, "curve");
    auto ab = get_elems(cs, sec.K, 2);
    sec.a = ab[0];
    sec.b = ab[1];
    sec.curve_order = want<u64>(cs, "order");
    Curve E(sec.K, sec.a, sec.b);
    std::istringstream bs = expect(is, "basis");
    std::string rest;
    std::getline(bs, rest);
    std::size_t sep = rest.find(" ; ");
    if (sep == std::string::npos) throw ParseError("basis line without separator");
    std::string p1 = rest.substr(0, sep), p2 = rest.substr(sep + 3);
    if (!p1.empty() && p1[0] == ' ') p1.erase(0, 1);
    sec.P = E.parse_point(p1);
    sec.Q = E.parse_point(p2);
    std::istringstream ss = expect(is, "scalars");
    sec.u.resize(sec.prm.n);
    sec.v.resize(sec.prm.n);
    for (u64& x : sec.u) x = want<u64>(ss, "slot scalar");
    for (u64& x : sec.v) x = want<u64>(ss, "slot scalar");
    sec.A = read_host(is, sec.K);
    sec.B = read_host(is, sec.K);
    std::istringstream gs = expect(is, "gens");
    std::size_t count = want<std::size_t>(gs, "count");
    for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ls = expect(is, "gen");
        std::size_t n = want<std::size_t>(ls, "dimension");
        GeneratorMatrix g;
        g.j1.resize(n);
        g.j2.resize(n);
        g.c.resize(n);
        for (unsigned& j : g.j1) j = want<unsigned>(ls, "column");
        for (unsigned& j : g.j2) j = want<unsigned>(ls, "column");
        for (u64& c : g.c) c = want<u64>(ls, "weight");
        sec.gens.push_back(std::move(g));
    }
    expect(is, "end-secret");
    return sec;
}

// --- files ----------------------------------------------------------------------

template <typename WriteFn>
inline void save_file(const std::string& path, WriteFn&& write) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot open for writing: " + path);
    write(os);
    os.flush();
    if (!os) throw ParseError("write failed: " + path);
}

template <typename ReadFn>
inline auto load_file(const std::string& path, ReadFn&& read) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open: " + path);
    return read(is);
}

inline void save_public(const std::string& path, const PublicBundle& pub) {
    save_file(path, [&](std::ostream& os) { write_public(os, pub); });
}

inline PublicBundle load_public(const std::string& path) {
    return load_file(path, [](std::istream& is) { return read_public(is); });
}

inline void save_secret(const std::string& path, const SecretBundle& sec) {
    save_file(path, [&](std::ostream& os) { write_secret(os, sec); });
}

inline SecretBundle load_secret(const std::string& path, const FieldPtr* share = nullptr) {
    return load_file(path, [&](std::istream& is) { return read_secret(is, share); });
}

}  // namespace io
}  // namespace trimap
