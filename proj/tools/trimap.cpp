#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trimap/io.hpp"
#include "trimap/trimap.hpp"

using namespace trimap;

namespace {

u64 largest_prime_below(u64 bound) {
    for (u64 q = bound; q >= 2; --q)
        if (is_prime_u64(q)) return q;
    throw SearchExhausted("no prime at or below " + std::to_string(bound));
}

void write_ncpoly_file(const std::string& path, const char* header, const NCPoly& f) {
    io::save_file(path, [&](std::ostream& os) {
        os << header << '\n';
        io::write_ncpoly(os, f);
    });
}

NCPoly read_ncpoly_file(const std::string& path, const char* header) {
    return io::load_file(path, [&](std::istream& is) {
        io::expect(is, header);
        return io::read_ncpoly(is);
    });
}

u64 zeta_log(const PublicBundle& pub, const FieldElement& v) {
    FieldElement acc = pub.K->one();
    for (u64 c = 0; c < pub.prm.ell; ++c) {
        if (acc == v) return c;
        acc = acc * pub.zeta;
    }
    throw SolveFailure("value is not a power of the published root");
}

// --- setup -------------------------------------------------------------------

int cmd_setup(const InstanceParams& prm, const std::string& out) {
    TrimapInstance inst = setup(prm);
    io::save_public(out + ".pub", inst.pub);
    io::save_secret(out + ".sec", inst.sec);
    std::cout << "instance over F_{" << inst.pub.K->q() << "^" << inst.pub.K->d() << "}, ell "
              << prm.ell << ", n " << prm.n << ", " << inst.pub.act_P.size() << " generators\n"
              << "wrote " << out << ".pub and " << out << ".sec\n";
    return 0;
}

// --- publish -----------------------------------------------------------------

MultiPoly random_quadratic(const FieldPtr& K, std::size_t nv, Rng& rng) {
    MultiPoly p(K, nv);
    p.add_term(Monomial(nv, 0), K->sample(rng));
    for (std::size_t i = 0; i < nv; ++i) {
        Monomial m(nv, 0);
        m[i] = 1;
        p.add_term(m, K->sample(rng));
        for (std::size_t j = i; j < nv; ++j) {
            Monomial mm(nv, 0);
            mm[i] = (std::uint8_t)(mm[i] + 1);
            mm[j] = (std::uint8_t)(mm[j] + 1);
            p.add_term(mm, K->sample(rng));
        }
    }
    return p;
}

struct PublishConfig {
    std::size_t n = 2;
    u64 q_max = 32, d_max = 2;
    u64 seed = 0;
    std::string mode = "sum";
    std::size_t pieces = 3;
    bool twisted = false;
    std::string out;
};

int cmd_publish(const PublishConfig& cfg) {
    Rng rng(cfg.seed);
    u64 q = largest_prime_below(cfg.q_max);
    FieldPtr K = Field::make(q, cfg.d_max, rng);
    BlindingKey key = BlindingKey::keygen(K, cfg.n, cfg.twisted, rng);
    std::vector<std::vector<FieldElement>> sample;
    for (int i = 0; i < 120; ++i) sample.push_back(key.sample_W(rng));

    PublishedFunction pf;
    std::vector<FieldElement> hidden_vals;  // per sample, skipped entries marked by flag
    std::vector<bool> defined(sample.size(), true);

    if (cfg.mode == "map") {
        if (cfg.twisted) {
            std::cerr << "map publication does not take twisted keys; drop --twisted\n";
            return 2;
        }
        std::vector<LocalMapSpec> rows;
        for (std::size_t j = 0; j < cfg.n; ++j) {
            LocalMapSpec s;
            s.sources = {{0u, (unsigned)j}};
            s.psi = {rf_var(K, 2, 0), rf_var(K, 2, 1)};
            rows.push_back(std::move(s));
        }
        pf = publish_map(key, {&key}, rows, sample, rng);
        std::size_t ok = 0, skipped = 0;
        for (const auto& w : sample) {
            std::vector<FieldElement> img;
            try {
                img = eval_published(pf, {w});
            } catch (const PoleHit&) {
                ++skipped;
                continue;
            }
            bool same = img.size() == w.size();
            for (std::size_t i = 0; same && i < w.size(); ++i) same = img[i] == w[i];
            if (!same) {
                std::cerr << "identity map publication failed to round-trip a sample point\n";
                return 1;
            }
            ++ok;
        }
        std::cout << "identity map on " << key.dim() << " coordinates: " << ok
                  << " round-trips, " << skipped << " skipped at poles\n";
    } else if (cfg.mode == "sum" || cfg.mode == "product") {
        if (cfg.twisted && cfg.mode == "product") {
            std::cerr << "twisted publication supports sum mode only\n";
            return 2;
        }
        std::size_t nv = key.dim();
        if (cfg.twisted) {
            std::vector<std::array<MultiPoly, 2>> locals;
            for (std::size_t i = 0; i < cfg.n; ++i) {
                MultiPoly num = random_quadratic(K, 2, rng);
                MultiPoly den(K, 2);
                for (int tries = 0;; ++tries) {
                    den = random_quadratic(K, 2, rng);
                    std::size_t zeros = 0;
                    for (const auto& w : sample)
                        if (den.evaluate({key.rho(w)[i][0], key.rho(w)[i][1]}).is_zero())
                            ++zeros;
                    if (zeros <= sample.size() / 10) break;
                    if (tries > 64) throw SearchExhausted("no usable local denominator");
                }
                locals.push_back({std::move(num), std::move(den)});
            }
            pf = publish_twisted(key, locals, sample, rng);
            for (std::size_t s = 0; s < sample.size(); ++s) {
                auto pairs = key.rho(sample[s]);
                FieldElement acc = K->zero();
                bool ok = true;
                for (std::size_t i = 0; i < cfg.n && ok; ++i) {
                    std::vector<FieldElement> at = {pairs[i][0], pairs[i][1]};
                    FieldElement den = locals[i][1].evaluate(at);
                    if (den.is_zero())
                        ok = false;
                    else
                        acc += locals[i][0].evaluate(at) / den;
                }
                defined[s] = ok;
                hidden_vals.push_back(ok ? acc : K->zero());
            }
        } else {
            std::vector<FlatPiece> hidden;
            for (std::size_t p = 0; p < cfg.pieces; ++p) {
                std::size_t slot = p % cfg.n;
                MultiPoly num = key.F[slot][0].scale(K->sample(rng)) +
                                key.F[slot][1].scale(K->sample(rng)) +
                                MultiPoly::constant(K, nv, K->sample(rng));
                MultiPoly den(K, nv);
                for (int tries = 0;; ++tries) {
                    den = key.F[slot][0].scale(K->sample(rng)) +
                          key.F[slot][1].scale(K->sample(rng)) +
                          MultiPoly::constant(K, nv, K->sample(rng));
                    std::size_t zeros = 0;
                    for (const auto& w : sample)
                        if (den.evaluate(w).is_zero()) ++zeros;
                    if (!den.terms().empty() && zeros <= sample.size() / 10) break;
                    if (tries > 64) throw SearchExhausted("no usable local denominator");
                }
                hidden.push_back({std::move(num), std::move(den)});
            }
            AmbivalenceIdeal I = key.ideal();
            pf = cfg.mode == "sum" ? publish_sum(hidden, I, sample, rng)
                                   : publish_product(hidden, I, sample, rng);
            for (std::size_t s = 0; s < sample.size(); ++s) {
                FieldElement acc = cfg.mode == "sum" ? K->zero() : K->one();
                bool ok = true;
                for (const FlatPiece& p : hidden) {
                    FieldElement den = p.den.evaluate(sample[s]);
                    if (den.is_zero()) {
                        ok = false;
                        break;
                    }
                    FieldElement v = p.num.evaluate(sample[s]) / den;
                    if (cfg.mode == "sum")
                        acc += v;
                    else if (v.is_zero()) {
                        ok = false;
                        break;
                    } else
                        acc *= v;
                }
                defined[s] = ok;
                hidden_vals.push_back(ok ? acc : K->zero());
            }
        }
        std::size_t ok = 0, skipped = 0;
        for (std::size_t s = 0; s < sample.size(); ++s) {
            if (!defined[s]) {
                ++skipped;
                continue;
            }
            FieldElement got;
            try {
                got = eval_published(pf, {sample[s]})[0];
            } catch (const PoleHit&) {
                ++skipped;
                continue;
            }
            if (!(got == hidden_vals[s])) {
                std::cerr << "published " << cfg.mode
                          << " disagrees with the hidden target at a sample point\n";
                return 1;
            }
            ++ok;
        }
        if (ok == 0) {
            std::cerr << "all sample points skipped; publication unusable\n";
            return 1;
        }
        std::cout << (cfg.twisted ? "twisted " : "") << cfg.mode << " of "
                  << (cfg.twisted ? cfg.n : cfg.pieces) << " hidden pieces: agrees at " << ok
                  << " sample points, " << skipped << " skipped at poles\n";
    } else {
        std::cerr << "unknown mode: " << cfg.mode << " (expected sum, product, or map)\n";
        return 2;
    }

    ConditionReport rep = condition_counts(pf);
    std::cout << "system size: " << rep.unknowns << " unknowns, " << rep.conditions
              << " conditions\n";
    if (!cfg.out.empty()) {
        io::save_file(cfg.out,
                      [&](std::ostream& os) { io::write_published_file(os, K, pf); });
        std::cout << "wrote " << cfg.out << '\n';
    }
    return 0;
}

// --- encode / eval -------------------------------------------------------------

int cmd_encode(const std::string& sec_path, u64 a, u64 seed, const std::string& out) {
    SecretBundle sec = io::load_secret(sec_path);
    Rng rng(seed);
    NCPoly f = encode(sec, a % sec.prm.ell, rng);
    std::cout << f.to_string() << '\n';
    if (!out.empty()) {
        write_ncpoly_file(out, "trimap-encoding v1", f);
        std::cout << "wrote " << out << '\n';
    }
    return 0;
}

int cmd_eval(const std::string& pub_path, u64 a, u64 b, const std::string& f_path) {
    PublicBundle pub = io::load_public(pub_path);
    NCPoly f = read_ncpoly_file(f_path, "trimap-encoding v1");
    if (f.ell != pub.prm.ell) throw ParseError("encoding modulus does not match the instance");
    EvalContext ctx(pub, pub.prm.seed ^ 0x9e3779b97f4a7c15ull);
    BlindedPoint X = scalar_hat(ctx, a % pub.prm.ell, pub.alpha);
    BlindedPoint Y = scalar_hat(ctx, b % pub.prm.ell, pub.beta);
    FieldElement v = tri_eval(ctx, X, Y, f);
    std::cout << "value: " << pub.K->to_string(v) << '\n';
    std::cout << "exponent: " << zeta_log(pub, v) << '\n';
    return 0;
}

// --- verify ---------------------------------------------------------------------

struct SuiteResult {
    std::string name;
    bool ok = true;
    std::size_t samples = 0;
    std::size_t retries = 0;
    std::string detail;

    explicit SuiteResult(std::string n = "") : name(std::move(n)) {}
};

void report(const SuiteResult& r) {
    std::cout << "suite " << r.name << ": " << (r.ok ? "ok" : "FAIL") << " (" << r.samples
              << " samples, " << r.retries << " retries)";
    if (!r.detail.empty()) std::cout << " " << r.detail;
    std::cout << '\n';
}

std::vector<Point> random_torsion_vector(const SecretBundle& sec, Rng& rng) {
    Curve E = sec.curve();
    std::vector<Point> X;
    for (std::size_t r = 0; r < sec.prm.n; ++r) {
        u64 x = 0, y = 0;
        while (x == 0 && y == 0) {
            x = rng.below(sec.prm.ell);
            y = rng.below(sec.prm.ell);
        }
        X.push_back(E.add(E.scalar_mul(x, sec.P), E.scalar_mul(y, sec.Q)));
    }
    return X;
}

bool same_points(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].inf != b[i].inf) return false;
        if (!a[i].inf && !(a[i].x == b[i].x && a[i].y == b[i].y)) return false;
    }
    return true;
}

SuiteResult suite_pairing(EvalContext& ctx, std::size_t samples, Rng& rng) {
    const PublicBundle& pub = *ctx.pub;
    SuiteResult r{"pairing"};
    FieldElement acc = pub.zeta;
    for (u64 i = 1; i < pub.prm.ell; ++i) {
        if (acc == pub.K->one()) {
            r.ok = false;
            r.detail = "published root has small order";
        }
        acc = acc * pub.zeta;
    }
    if (!(acc == pub.K->one())) {
        r.ok = false;
        r.detail = "published root is not an ell-th root of unity";
    }
    for (std::size_t s = 0; r.ok && s < samples; ++s) {
        u64 a = s == 0 ? 1 : 1 + rng.below(pub.prm.ell - 1);
        u64 b = s == 0 ? 1 : 1 + rng.below(pub.prm.ell - 1);
        ++r.samples;
        try {
            FieldElement v = blinded_pair(ctx, scalar_hat(ctx, a, pub.alpha),
                                          scalar_hat(ctx, b, pub.beta));
            if (zeta_log(pub, v) != (a * b) % pub.prm.ell) {
                r.ok = false;
                r.detail = "pairing value off the expected root power";
            }
        } catch (const Error& e) {
            r.ok = false;
            r.detail = e.what();
        }
    }
    return r;
}

SuiteResult suite_kernel(EvalContext& ctx) {
    const PublicBundle& pub = *ctx.pub;
    SuiteResult r{"kernel"};
    for (const NCPoly& f : pub.kernel_samples) {
        ++r.samples;
        try {
            BlindedPoint Z = apply_encoding(ctx, f, pub.beta);
            if (!Z.identity) {
                r.ok = false;
                r.detail = "kernel sample does not annihilate the base point";
                break;
            }
            FieldElement v = tri_eval(ctx, pub.alpha, pub.beta, f);
            if (!(v == pub.K->one())) {
                r.ok = false;
                r.detail = "kernel sample pairs nontrivially";
                break;
            }
        } catch (const Error& e) {
            r.ok = false;
            r.detail = e.what();
            break;
        }
    }
    return r;
}

SuiteResult suite_soundness(EvalContext& ctx, const SecretBundle& sec, std::size_t samples,
                            Rng& rng) {
    SuiteResult r{"soundness"};
    Curve E = sec.curve();
    auto fail = [&](const std::string& what) {
        r.ok = false;
        if (r.detail.empty()) r.detail = what;
    };
    for (std::size_t s = 0; s < samples && r.ok; ++s) {
        for (const HostMaterial* H : {&sec.A, &sec.B}) {
            ++r.samples;
            try {
                std::vector<Point> X = random_torsion_vector(sec, rng);
                std::vector<Point> Y = random_torsion_vector(sec, rng);
                BlindedPoint bx = blind_vector(*H, X), by = blind_vector(*H, Y);
                std::vector<Point> want;
                for (std::size_t j = 0; j < X.size(); ++j) want.push_back(E.add(X[j], Y[j]));
                bool add_ok = true, dbl_ok = true, neg_ok = true;
                try {
                    add_ok = same_points(unblind_vector(*H, add_hat(ctx, bx, by)), want);
                } catch (const ExceptionalPoint&) {
                    ++r.retries;
                }
                want.clear();
                for (std::size_t j = 0; j < X.size(); ++j) want.push_back(E.dbl(X[j]));
                dbl_ok = same_points(unblind_vector(*H, add_hat(ctx, bx, bx)), want);
                want.clear();
                for (std::size_t j = 0; j < X.size(); ++j) want.push_back(E.neg(X[j]));
                neg_ok = same_points(unblind_vector(*H, neg_hat(ctx, bx)), want);
                if (!add_ok) fail("published addition disagrees with the curve law");
                if (!dbl_ok) fail("published doubling disagrees with the curve law");
                if (!neg_ok) fail("published negation disagrees with the curve law");
            } catch (const ExceptionalPoint&) {
                ++r.retries;
            } catch (const Error& e) {
                fail(e.what());
            }
        }
        try {
            ++r.samples;
            std::vector<Point> Y = random_torsion_vector(sec, rng);
            BlindedPoint by = blind_vector(sec.B, Y);
            for (std::size_t i = 0; i < sec.gens.size() && r.ok; ++i) {
                std::vector<Point> want = secret_gen_action(sec, sec.gens[i], Y);
                try {
                    if (!same_points(unblind_vector(sec.B, apply_gen(ctx, (unsigned)i, by)),
                                     want))
                        fail("published generator action disagrees with the secret matrix");
                } catch (const ExceptionalPoint&) {
                    ++r.retries;
                }
            }
            std::vector<Point> X = random_torsion_vector(sec, rng);
            BlindedPoint bx = blind_vector(sec.A, X);
            FieldElement want = secret_pair(sec, bx, by, rng);
            if (!(blinded_pair(ctx, bx, by) == want))
                fail("published pairing disagrees with the per-slot product");
        } catch (const ExceptionalPoint&) {
            ++r.retries;
        } catch (const DegeneratePair&) {
            ++r.retries;
        } catch (const Error& e) {
            fail(e.what());
        }
    }
    return r;
}

SuiteResult suite_commute(EvalContext& ctx, const SecretBundle& sec, std::size_t samples,
                          Rng& rng) {
    SuiteResult r{"commute"};
    for (std::size_t s = 0; s < samples; ++s) {
        ++r.samples;
        try {
            std::vector<Point> Y = random_torsion_vector(sec, rng);
            BlindedPoint by = blind_vector(sec.B, Y);
            unsigned i = (unsigned)rng.below(sec.gens.size());
            std::vector<Point> lhs = unblind_vector(sec.B, apply_gen(ctx, i, by));
            std::vector<Point> rhs = secret_gen_action(sec, sec.gens[i], Y);
            if (!same_points(lhs, rhs)) {
                r.ok = false;
                r.detail = "blinded action does not commute with unblinding";
                break;
            }
        } catch (const ExceptionalPoint&) {
            ++r.retries;
        }
    }
    return r;
}

SuiteResult suite_trilinearity(EvalContext& ctx, const SecretBundle& sec, bool exhaustive,
                               std::size_t samples, Rng& rng) {
    const PublicBundle& pub = *ctx.pub;
    SuiteResult r{"trilinearity"};
    u64 ell = pub.prm.ell;
    std::vector<std::array<u64, 3>> triples;
    if (exhaustive) {
        for (u64 a = 0; a < ell; ++a)
            for (u64 b = 0; b < ell; ++b)
                for (u64 c = 0; c < ell; ++c) triples.push_back({a, b, c});
    } else {
        for (std::size_t s = 0; s < samples; ++s)
            triples.push_back({rng.below(ell), rng.below(ell), rng.below(ell)});
    }
    for (const auto& [a, b, c] : triples) {
        ++r.samples;
        try {
            NCPoly f = encode(sec, c, rng);
            FieldElement v = tri_eval(ctx, scalar_hat(ctx, a, pub.alpha),
                                      scalar_hat(ctx, b, pub.beta), f);
            if (zeta_log(pub, v) != (a * b % ell) * c % ell) {
                r.ok = false;
                r.detail = "trilinear value off at (" + std::to_string(a) + "," +
                           std::to_string(b) + "," + std::to_string(c) + ")";
                break;
            }
        } catch (const Error& e) {
            r.ok = false;
            r.detail = e.what();
            break;
        }
    }
    return r;
}

SuiteResult suite_dlp(EvalContext& ctx, const SecretBundle& sec, std::size_t samples, Rng& rng) {
    SuiteResult r{"dlp"};
    for (std::size_t s = 0; s < samples; ++s) {
        ++r.samples;
        auto [f, a] = dlp_challenge(sec, rng);
        auto got = dlp_solve_secret(sec, f);
        if (!got || *got != a) {
            r.ok = false;
            r.detail = "trapdoor solve missed the hidden answer";
            break;
        }
        if (s == 0) {
            try {
                if (dlp_solve_public(ctx, f) != a) {
                    r.ok = false;
                    r.detail = "pairing-assisted solve missed the hidden answer";
                    break;
                }
            } catch (const Error& e) {
                r.ok = false;
                r.detail = e.what();
                break;
            }
        }
    }
    return r;
}

SuiteResult suite_ddh(EvalContext& ctx) {
    const PublicBundle& pub = *ctx.pub;
    SuiteResult r{"ddh"};
    r.samples = 1;
    if (pub.tagA == pub.tagB) {
        r.detail = "(single-host instance, self-pairing allowed)";
        return r;
    }
    try {
        blinded_pair(ctx, pub.beta, pub.beta);
        r.ok = false;
        r.detail = "self-pairing on the second host was not rejected";
    } catch (const ContractViolation&) {
    }
    try {
        blinded_pair(ctx, pub.alpha, pub.alpha);
        r.ok = false;
        r.detail = "self-pairing on the first host was not rejected";
    } catch (const ContractViolation&) {
    }
    return r;
}

int cmd_verify(const std::string& pub_path, const std::string& sec_path,
               const std::string& checks, u64 seed, std::size_t samples) {
    PublicBundle pub = io::load_public(pub_path);
    std::optional<SecretBundle> sec;
    if (!sec_path.empty()) sec = io::load_secret(sec_path, &pub.K);

    std::vector<std::string> want;
    bool explicit_checks = !checks.empty();
    if (explicit_checks) {
        std::stringstream ss(checks);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) want.push_back(item);
    } else {
        want = {"pairing", "kernel", "ddh"};
        if (sec) {
            want.push_back("soundness");
            want.push_back("commute");
            want.push_back("trilinearity");
            want.push_back("dlp");
        }
    }

    EvalContext ctx(pub, seed ^ 0xa076bdf3193a2ull);
    Rng rng(seed);
    std::cout << "verify: retry budget " << retry_budget() << ", seed " << seed << '\n';
    bool all_ok = true;
    for (const std::string& name : want) {
        SuiteResult r;
        bool needs_secret =
            name == "soundness" || name == "commute" || name == "trilinearity" || name == "dlp";
        if (needs_secret && !sec) {
            std::cerr << "suite " << name << " needs the secret file (--sec)\n";
            return 2;
        }
        if (name == "pairing")
            r = suite_pairing(ctx, samples, rng);
        else if (name == "kernel")
            r = suite_kernel(ctx);
        else if (name == "ddh")
            r = suite_ddh(ctx);
        else if (name == "soundness")
            r = suite_soundness(ctx, *sec, samples, rng);
        else if (name == "commute")
            r = suite_commute(ctx, *sec, samples, rng);
        else if (name == "trilinearity")
            r = suite_trilinearity(ctx, *sec, explicit_checks, samples, rng);
        else if (name == "dlp")
            r = suite_dlp(ctx, *sec, samples, rng);
        else {
            std::cerr << "unknown suite: " << name << '\n';
            return 2;
        }
        report(r);
        all_ok = all_ok && r.ok;
    }
    std::cout << (all_ok ? "verify: all suites passed\n" : "verify: FAILURES\n");
    return all_ok ? 0 : 1;
}

// --- dlp -----------------------------------------------------------------------

int cmd_dlp(bool solve, bool public_solve, const std::string& in, const std::string& sec_path,
            const std::string& pub_path, u64 seed, const std::string& out) {
    if (solve || public_solve) {
        if (in.empty()) {
            std::cerr << "--solve needs a challenge file (--in)\n";
            return 2;
        }
        NCPoly f = read_ncpoly_file(in, "trimap-challenge v1");
        if (solve) {
            if (sec_path.empty()) {
                std::cerr << "trapdoor solve needs the secret file; refusing without --sec\n";
                return 2;
            }
            SecretBundle sec = io::load_secret(sec_path);
            auto a = dlp_solve_secret(sec, f);
            if (!a) {
                std::cerr << "challenge is not a scalar encoding\n";
                return 1;
            }
            std::cout << "answer: " << *a << '\n';
            return 0;
        }
        if (pub_path.empty()) {
            std::cerr << "public solve needs the public file (--pub)\n";
            return 2;
        }
        PublicBundle pub = io::load_public(pub_path);
        EvalContext ctx(pub, seed ^ 0x51ed2701fb3cull);
        u64 via_pair = dlp_solve_public(ctx, f);
        u64 via_scan = dlp_solve_exhaustive(ctx, f);
        std::cout << "pairing-assisted answer: " << via_pair << '\n';
        std::cout << "exhaustive-scan answer: " << via_scan << '\n';
        return via_pair == via_scan ? 0 : 1;
    }
    if (sec_path.empty() || out.empty()) {
        std::cerr << "issuing a challenge needs --sec and --out\n";
        return 2;
    }
    SecretBundle sec = io::load_secret(sec_path);
    Rng rng(seed);
    auto [f, a] = dlp_challenge(sec, rng);
    write_ncpoly_file(out, "trimap-challenge v1", f);
    std::cout << "wrote " << out << '\n';
    std::cout << "hidden answer (issuer only): " << a << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blinded trilinear pairing workbench"};
    app.require_subcommand(1);
    app.footer("TRIMAP_RETRY_BUDGET overrides the retry cap (default 16).");

    InstanceParams prm;
    std::string out = "instance";
    auto* s_setup = app.add_subcommand("setup", "search parameters and write a key pair");
    s_setup->add_option("--n", prm.n, "lattice slots per host");
    s_setup->add_option("--ell", prm.ell, "torsion order (odd prime)");
    s_setup->add_option("--N", prm.N, "generator count (0 picks 2n^2)");
    s_setup->add_option("--q-max", prm.q_max, "largest base characteristic to try");
    s_setup->add_option("--d-max", prm.d_max, "largest extension degree to try");
    s_setup->add_option("--qd-min", prm.qd_min, "smallest usable field size");
    s_setup->add_option("--qd-cap", prm.qd_cap, "largest usable field size");
    s_setup->add_flag("--ddh", prm.ddh, "separate hosts for the two pairing slots");
    s_setup->add_option("--seed", prm.seed, "RNG seed")->required();
    s_setup->add_option("--out", out, "output basename (.pub/.sec appended)");

    PublishConfig pc;
    auto* s_pub = app.add_subcommand("publish", "publish a hidden function over a fresh key");
    s_pub->add_option("--n", pc.n, "blinding slots");
    s_pub->add_option("--q-max", pc.q_max, "largest base characteristic");
    s_pub->add_option("--d-max", pc.d_max, "extension degree");
    s_pub->add_option("--mode", pc.mode, "sum | product | map");
    s_pub->add_option("--pieces", pc.pieces, "hidden piece count");
    s_pub->add_flag("--twisted", pc.twisted, "publish through Frobenius twists (sum mode)");
    s_pub->add_option("--seed", pc.seed, "RNG seed")->required();
    s_pub->add_option("--out", pc.out, "published-function file");

    std::string enc_sec, enc_out;
    u64 enc_a = 0, enc_seed = 0;
    auto* s_enc = app.add_subcommand("encode", "encode a scalar as a word polynomial");
    s_enc->add_option("--sec", enc_sec, "secret file")->required();
    s_enc->add_option("--a", enc_a, "scalar to encode")->required();
    s_enc->add_option("--seed", enc_seed, "RNG seed")->required();
    s_enc->add_option("--out", enc_out, "encoding file");

    std::string ev_pub, ev_f;
    u64 ev_a = 1, ev_b = 1;
    auto* s_ev = app.add_subcommand("eval", "evaluate the trilinear form publicly");
    s_ev->add_option("--pub", ev_pub, "public file")->required();
    s_ev->add_option("--a", ev_a, "multiple of the first base point");
    s_ev->add_option("--b", ev_b, "multiple of the second base point");
    s_ev->add_option("--f", ev_f, "encoding file")->required();

    std::string vf_pub, vf_sec, vf_checks;
    u64 vf_seed = 1;
    std::size_t vf_samples = 8;
    auto* s_vf = app.add_subcommand("verify", "run invariant suites against instance files");
    s_vf->add_option("--pub", vf_pub, "public file")->required();
    s_vf->add_option("--sec", vf_sec, "secret file (enables the secret-oracle suites)");
    s_vf->add_option("--checks", vf_checks,
                     "comma list: pairing,kernel,ddh,soundness,commute,trilinearity,dlp; "
                     "explicit trilinearity runs the exhaustive scalar cube");
    s_vf->add_option("--seed", vf_seed, "RNG seed");
    s_vf->add_option("--samples", vf_samples, "samples per suite");

    bool dlp_do_solve = false, dlp_do_public = false;
    std::string dlp_in, dlp_sec, dlp_pub, dlp_out;
    u64 dlp_seed = 0;
    auto* s_dlp = app.add_subcommand("dlp", "issue or solve a scalar-recovery challenge");
    s_dlp->add_flag("--solve", dlp_do_solve, "solve with the trapdoor");
    s_dlp->add_flag("--public-solve", dlp_do_public, "solve from the public bundle alone");
    s_dlp->add_option("--in", dlp_in, "challenge file");
    s_dlp->add_option("--sec", dlp_sec, "secret file");
    s_dlp->add_option("--pub", dlp_pub, "public file");
    s_dlp->add_option("--seed", dlp_seed, "RNG seed (issuing)");
    s_dlp->add_option("--out", dlp_out, "challenge file to write");

    CLI11_PARSE(app, argc, argv);

    try {
        if (s_setup->parsed()) return cmd_setup(prm, out);
        if (s_pub->parsed()) return cmd_publish(pc);
        if (s_enc->parsed()) return cmd_encode(enc_sec, enc_a, enc_seed, enc_out);
        if (s_ev->parsed()) return cmd_eval(ev_pub, ev_a, ev_b, ev_f);
        if (s_vf->parsed()) return cmd_verify(vf_pub, vf_sec, vf_checks, vf_seed, vf_samples);
        if (s_dlp->parsed())
            return cmd_dlp(dlp_do_solve, dlp_do_public, dlp_in, dlp_sec, dlp_pub, dlp_seed,
                           dlp_out);
    } catch (const SearchExhausted& e) {
        std::cerr << "search exhausted: " << e.what()
                  << " (try raising --q-max/--d-max or changing --seed)\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "bad input: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
