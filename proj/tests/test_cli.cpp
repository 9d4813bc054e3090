#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef __unix__
#include <sys/wait.h>
#endif

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

const fs::path& workdir() {
    static fs::path dir = [] {
        fs::path d(TRIMAP_WORK_DIR);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path log = workdir() / ("run" + std::to_string(counter++) + ".log");
    std::string cmd =
        std::string(TRIMAP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    CliResult r;
#ifdef __unix__
    r.code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
#else
    r.code = status;
#endif
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// small shared instance: the 25-point window pins F_31 deterministically
const std::string kFastParams = "--n 2 --qd-min 25 --qd-cap 40";

const fs::path& instance_base() {
    static fs::path base = [] {
        fs::path b = workdir() / "inst";
        CliResult r = run_cli("setup --seed 11 " + kFastParams + " --out " + b.string());
        REQUIRE(r.code == 0);
        REQUIRE(r.out.find("wrote") != std::string::npos);
        REQUIRE(fs::exists(b.string() + ".pub"));
        REQUIRE(fs::exists(b.string() + ".sec"));
        return b;
    }();
    return base;
}

std::string pub_file() { return instance_base().string() + ".pub"; }
std::string sec_file() { return instance_base().string() + ".sec"; }

}  // namespace

TEST_CASE("setup runs are deterministic for a fixed seed") {
    fs::path again = workdir() / "inst-again";
    CliResult r = run_cli("setup --seed 11 " + kFastParams + " --out " + again.string());
    REQUIRE(r.code == 0);
    REQUIRE(slurp(again.string() + ".pub") == slurp(pub_file()));
    REQUIRE(slurp(again.string() + ".sec") == slurp(sec_file()));

    fs::path other = workdir() / "inst-other";
    CliResult r2 = run_cli("setup --seed 12 " + kFastParams + " --out " + other.string());
    REQUIRE(r2.code == 0);
    REQUIRE(slurp(other.string() + ".pub") != slurp(pub_file()));
}

TEST_CASE("setup without a seed is a usage error") {
    CliResult r = run_cli("setup --out " + (workdir() / "noseed").string());
    REQUIRE(r.code != 0);
    REQUIRE(r.out.find("--seed") != std::string::npos);
}

TEST_CASE("impossible parameter windows exit with advice") {
    CliResult r = run_cli("setup --seed 3 --q-max 7 --d-max 1 --out " +
                          (workdir() / "impossible").string());
    REQUIRE(r.code == 1);
    REQUIRE(r.out.find("search exhausted") != std::string::npos);
    REQUIRE(r.out.find("--q-max") != std::string::npos);
}

TEST_CASE("encode emits a word file and eval recovers the exponent") {
    fs::path enc = workdir() / "f.enc";
    CliResult r = run_cli("encode --sec " + sec_file() + " --a 4 --seed 9 --out " +
                          enc.string());
    REQUIRE(r.code == 0);
    std::string file = slurp(enc);
    REQUIRE(file.rfind("trimap-encoding v1\n", 0) == 0);

    // same seed, same word
    CliResult r2 = run_cli("encode --sec " + sec_file() + " --a 4 --seed 9");
    REQUIRE(r2.code == 0);
    REQUIRE(file.find(r2.out.substr(0, r2.out.find('\n'))) != std::string::npos);

    CliResult ev = run_cli("eval --pub " + pub_file() + " --a 2 --b 3 --f " + enc.string());
    REQUIRE(ev.code == 0);
    REQUIRE(ev.out.find("exponent: 4") != std::string::npos);  // 2*3*4 = 24 = 4 mod 5

    CliResult ez = run_cli("eval --pub " + pub_file() + " --a 0 --b 3 --f " + enc.string());
    REQUIRE(ez.code == 0);
    REQUIRE(ez.out.find("exponent: 0") != std::string::npos);
}

TEST_CASE("verify passes a clean instance and flags a corrupted one") {
    CliResult ok = run_cli("verify --pub " + pub_file() + " --sec " + sec_file() +
                           " --seed 1");
    REQUIRE(ok.code == 0);
    REQUIRE(ok.out.find("all suites passed") != std::string::npos);
    for (const char* name : {"pairing", "kernel", "soundness", "commute", "trilinearity",
                             "dlp"}) {
        std::string line = std::string("suite ") + name + ": ok";
        REQUIRE(ok.out.find(line) != std::string::npos);
    }

    // secret-oracle suites refuse to run without the secret
    CliResult refuse = run_cli("verify --pub " + pub_file() + " --checks soundness");
    REQUIRE(refuse.code == 2);

    // bump one coordinate of the second base point: still parseable, wrong value
    std::istringstream pub_in(slurp(pub_file()));
    std::ostringstream mutated;
    std::string line;
    while (std::getline(pub_in, line)) {
        if (line.rfind("beta ", 0) == 0) {
            std::size_t cut = line.find_last_of(' ');
            unsigned long last = std::stoul(line.substr(cut + 1));
            line = line.substr(0, cut + 1) + std::to_string((last + 1) % 31);
        }
        mutated << line << '\n';
    }
    fs::path bad = workdir() / "mutated.pub";
    std::ofstream(bad) << mutated.str();
    CliResult flag = run_cli("verify --pub " + bad.string() + " --seed 1");
    REQUIRE(flag.code != 0);
}

TEST_CASE("challenge files round trip through both solvers") {
    fs::path ch = workdir() / "c.ch";
    CliResult issue = run_cli("dlp --sec " + sec_file() + " --seed 13 --out " + ch.string());
    REQUIRE(issue.code == 0);
    std::size_t at = issue.out.find("hidden answer (issuer only): ");
    REQUIRE(at != std::string::npos);
    std::string hidden = issue.out.substr(at + 29, 1);
    REQUIRE(slurp(ch).rfind("trimap-challenge v1\n", 0) == 0);

    CliResult solve = run_cli("dlp --solve --in " + ch.string() + " --sec " + sec_file());
    REQUIRE(solve.code == 0);
    REQUIRE(solve.out.find("answer: " + hidden) != std::string::npos);

    CliResult refuse = run_cli("dlp --solve --in " + ch.string());
    REQUIRE(refuse.code == 2);
    REQUIRE(refuse.out.find("refusing") != std::string::npos);

    CliResult pubsolve =
        run_cli("dlp --public-solve --in " + ch.string() + " --pub " + pub_file());
    REQUIRE(pubsolve.code == 0);
    REQUIRE(pubsolve.out.find("pairing-assisted answer: " + hidden) != std::string::npos);
    REQUIRE(pubsolve.out.find("exhaustive-scan answer: " + hidden) != std::string::npos);

    CliResult noin = run_cli("dlp --solve");
    REQUIRE(noin.code == 2);
}

TEST_CASE("publish self-checks every mode") {
    std::string small = "--n 1 --q-max 8 --d-max 1 --seed 5";
    fs::path out = workdir() / "pubfn.txt";

    CliResult sum = run_cli("publish --mode sum " + small + " --out " + out.string());
    REQUIRE(sum.code == 0);
    REQUIRE(sum.out.find("sum of") != std::string::npos);
    REQUIRE(sum.out.find("system size:") != std::string::npos);
    REQUIRE(slurp(out).rfind("published-function v1\n", 0) == 0);

    CliResult prod = run_cli("publish --mode product " + small);
    REQUIRE(prod.code == 0);
    REQUIRE(prod.out.find("product of") != std::string::npos);

    CliResult map = run_cli("publish --mode map " + small);
    REQUIRE(map.code == 0);
    REQUIRE(map.out.find("round-trips") != std::string::npos);

    CliResult tw = run_cli("publish --mode sum --twisted --n 1 --q-max 8 --d-max 2 --seed 6");
    REQUIRE(tw.code == 0);
    REQUIRE(tw.out.find("twisted sum") != std::string::npos);

    CliResult bad = run_cli("publish --mode never " + small);
    REQUIRE(bad.code == 2);

    CliResult badtw = run_cli("publish --mode product --twisted " + small);
    REQUIRE(badtw.code == 2);
}
