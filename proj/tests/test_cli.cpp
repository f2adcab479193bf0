// End-to-end runs of the installed binary: artifact bytes, stdout lines,
// config merging, exit codes, and the structured stderr contract.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() { return CS_SPECTRA_CLI_PATH; }
std::string samples_dir() { return CS_SPECTRA_SAMPLES_DIR; }

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / "cs_cli_tests" / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

RunResult run_cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd " + dir.path.string() + " && " + env + (env.empty() ? "" : " ") +
                            cli_path() + " " + args + " > __stdout.txt 2> __stderr.txt";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = read_file(dir.path / "__stdout.txt");
    r.err = read_file(dir.path / "__stderr.txt");
    return r;
}

}  // namespace

TEST_CASE("lens run writes the documented artifact set") {
    TempDir d("lens");
    const auto r = run_cli(d, "lens --p 5 --q 1 --moments 0..10 --out lens51");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.err.empty());
    REQUIRE(r.out ==
            "L(5,1): 3 atoms, moments 0..10 -> lens51.measure.{json,csv}, lens51.moments.csv\n");
    REQUIRE(read_file(d.path / "lens51.measure.json") ==
            "{\"label\":\"L(5,1)\",\"atoms\":[{\"theta\":0,\"weight\":0.20000000000000001},"
            "{\"theta\":1.2566370614359172,\"weight\":0.40000000000000002},"
            "{\"theta\":5.026548245743669,\"weight\":0.40000000000000002}]}\n");
    REQUIRE(read_file(d.path / "lens51.measure.csv") ==
            "theta,weight\n"
            "0,0.20000000000000001\n"
            "1.2566370614359172,0.40000000000000002\n"
            "5.026548245743669,0.40000000000000002\n");
    // |mu^ell| = 1/sqrt(5) off the multiples of 5, exactly 1 on them
    REQUIRE(read_file(d.path / "lens51.moments.csv") ==
            "ell,re,im,provenance\n"
            "0,1,0,exact-sum\n"
            "1,0.44721359549995787,-5.5511151231257827e-17,exact-sum\n"
            "2,-0.44721359549995804,1.6653345369377348e-16,exact-sum\n"
            "3,-0.44721359549995787,2.2204460492503131e-16,exact-sum\n"
            "4,0.44721359549995821,-1.1102230246251565e-16,exact-sum\n"
            "5,1,-4.8985871965894128e-16,exact-sum\n"
            "6,0.44721359549995765,-1.6653345369377348e-16,exact-sum\n"
            "7,-0.44721359549995821,5.5511151231257827e-16,exact-sum\n"
            "8,-0.44721359549995765,6.106226635438361e-16,exact-sum\n"
            "9,0.44721359549995848,-3.3306690738754696e-16,exact-sum\n"
            "10,1,-9.7971743931788257e-16,exact-sum\n");
}

TEST_CASE("torus bundle matrix run merges the trace atoms") {
    TempDir d("tb");
    const auto r = run_cli(d, "torus-bundle --matrix 4,1,3,1 --moments 0..6 --out tb41");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out ==
            "torus_bundle[[4,1],[3,1]]: 2 atoms, moments 0..6 -> "
            "tb41.measure.{json,csv}, tb41.moments.csv\n");
    // (1/3)(delta_0 + 2 delta_{2pi/3})
    REQUIRE(read_file(d.path / "tb41.measure.json") ==
            "{\"label\":\"torus_bundle[[4,1],[3,1]]\",\"atoms\":["
            "{\"theta\":0,\"weight\":0.33333333333333331},"
            "{\"theta\":2.0943951023931953,\"weight\":0.66666666666666663}]}\n");
}

TEST_CASE("torus bundle sampler is seed deterministic") {
    TempDir a("sample_a"), b("sample_b");
    const auto ra = run_cli(a, "torus-bundle --sample 5 --seed 7 --out ts");
    const auto rb = run_cli(b, "torus-bundle --sample 5 --seed 7 --out ts");
    REQUIRE(ra.exit_code == 0);
    REQUIRE(ra.out == "sampled 5 monodromies (seed 7) -> ts.sample.csv\n");
    const std::string csv = read_file(a.path / "ts.sample.csv");
    REQUIRE(csv == read_file(b.path / "ts.sample.csv"));
    REQUIRE(csv ==
            "a,b,c,d,group_order,mu1_modulus,flat_modulus,bijective_2\n"
            "0,-1,1,0,2,6.123233995736766e-17,0.70710678118654746,0\n"
            "0,-1,1,1,1,1,1,1\n"
            "0,1,-1,-1,3,0.57735026918962551,0.57735026918962584,1\n"
            "-3,4,-1,1,4,0.70710678118654746,0.5,0\n"
            "1,-3,1,-2,3,0.57735026918962573,0.57735026918962584,1\n");
}

TEST_CASE("residue run accepts a single moment order") {
    TempDir d("residue");
    const auto r = run_cli(d, "residue --p 101 --moments 3 --out r101");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out ==
            "residues(101): 51 atoms, moments 3..3 -> r101.measure.{json,csv}, r101.moments.csv\n");
    // |mu^3| = 1/sqrt(101)
    REQUIRE(read_file(d.path / "r101.moments.csv") ==
            "ell,re,im,provenance\n"
            "3,-0.099503719020998943,1.5959455978986625e-16,exact-sum\n");
}

TEST_CASE("dehn ladder run emits prediction reports and a fitted slope") {
    TempDir d("dehn");
    const std::string curve = samples_dir() + "/line_curve.json";
    const auto r = run_cli(d, "dehn --curve " + curve + " --ell 1 --ladder 64:512:x2 --out dl");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out == "ell=1: fitted decay slope -0.788480 (r2 0.8571) -> dl.reports.{csv,json}\n");
    REQUIRE(read_file(d.path / "dl.reports.csv") ==
            "n,ell,exact_re,exact_im,pred_re,pred_im,residual\n"
            "64,1,0.029333054274317139,-0.054481445221525891,"
            "0.032360372695952391,-0.082251481925732256,0.027934559158485764\n"
            "128,1,0.014786376995833423,-0.054948054289183951,"
            "0.022882238975031936,-0.058160580632328027,0.0087099544597906316\n"
            "256,1,0.0078951370262615173,-0.045158339652856649,"
            "0.016180186347976196,-0.041125740962866128,0.0092143309283831409\n"
            "512,1,0.015320490770196942,-0.026932795310795978,"
            "0.011441119487515968,-0.029080290316164013,0.0044341015264617563\n");
    const std::string json = read_file(d.path / "dl.reports.json");
    REQUIRE(json.substr(0, 25) == "{\"reports\":[{\"n\":64,\"ell\"");
    REQUIRE(json.back() == '\n');

    // fewer than four rungs: no fit, just the entry count
    const auto s = run_cli(d, "dehn --curve " + curve + " --ell 1 --ladder 64,128 --out ds");
    REQUIRE(s.exit_code == 0);
    REQUIRE(s.out == "ell=1: 2 ladder entries -> ds.reports.{csv,json}\n");
}

TEST_CASE("poisson run records the gap and K has flag > spec > config precedence") {
    TempDir d("poisson");
    const std::string wavy = samples_dir() + "/poisson_wavy.json";

    const auto r = run_cli(d, "poisson --spec " + wavy + " --out pw");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out == "lhs 0, |rhs| 0.00663915888186, gap 6.639159e-03 at K=200 -> pw.poisson.json\n");
    REQUIRE(read_file(d.path / "pw.poisson.json") ==
            "{\"lhs\":0,\"rhs\":{\"re\":0.0066391588818638563,\"im\":3.1750328851415315e-18},"
            "\"gap\":0.0066391588818638563,\"K\":200}\n");

    // command-line K overrides the K stored in the spec file
    const auto r50 = run_cli(d, "poisson --spec " + wavy + " --K 50 --out pw50");
    REQUIRE(r50.exit_code == 0);
    REQUIRE(read_file(d.path / "pw50.poisson.json") ==
            "{\"lhs\":0,\"rhs\":{\"re\":0.061869714726103656,\"im\":-1.1043592643970545e-18},"
            "\"gap\":0.061869714726103656,\"K\":50}\n");

    // spec-file K beats a config-file K when no flag is given
    write_file(d.path / "cfgk.json",
               "{\"subcommand\":\"poisson\",\"spec\":\"" + wavy + "\",\"K\":12,\"out\":\"cfgk\"}");
    const auto rc = run_cli(d, "--config cfgk.json");
    REQUIRE(rc.exit_code == 0);
    REQUIRE(rc.out.find("at K=200") != std::string::npos);

    // config-file K applies when the spec has none
    write_file(d.path / "spec_nok.json",
               "{\"f\":{\"linear\":1,\"harmonics\":[[1,0,0.3]]},"
               "\"g\":{\"linear\":0,\"harmonics\":[[1,1,0]]},\"a\":0.1,\"b\":6}");
    write_file(d.path / "cfgnok.json",
               "{\"subcommand\":\"poisson\",\"spec\":\"spec_nok.json\",\"K\":12,\"out\":\"nok\"}");
    const auto rn = run_cli(d, "--config cfgnok.json");
    REQUIRE(rn.exit_code == 0);
    REQUIRE(rn.out == "lhs 0, |rhs| 0.0328594969011, gap 3.285950e-02 at K=12 -> nok.poisson.json\n");
    REQUIRE(read_file(d.path / "nok.poisson.json") ==
            "{\"lhs\":0,\"rhs\":{\"re\":0.032859496901113748,\"im\":-2.2087185287941089e-18},"
            "\"gap\":0.032859496901113748,\"K\":12}\n");
}

TEST_CASE("config file supplies options and command-line flags override it") {
    TempDir d("config");
    write_file(d.path / "cfg.json",
               "{\"subcommand\":\"dehn\",\"curve\":\"" + samples_dir() +
                   "/line_curve.json\",\"family\":\"1,0,0,1\",\"ell\":2,"
                   "\"ladder\":\"64,128,192\",\"out\":\"fromcfg\"}");

    const auto r1 = run_cli(d, "--config cfg.json");
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r1.out == "ell=2: 3 ladder entries -> fromcfg.reports.{csv,json}\n");
    REQUIRE(fs::exists(d.path / "fromcfg.reports.csv"));
    REQUIRE(fs::exists(d.path / "fromcfg.reports.json"));

    const auto r2 = run_cli(d, "--config cfg.json dehn --ell 3 --out flagwins");
    REQUIRE(r2.exit_code == 0);
    REQUIRE(r2.out == "ell=3: 3 ladder entries -> flagwins.reports.{csv,json}\n");

    const auto r3 = run_cli(d, "--config cfg.json lens");
    REQUIRE(r3.exit_code == 2);
    REQUIRE(r3.err ==
            "{\"code\":\"ConfigKey\",\"message\":\"config subcommand conflicts with command "
            "line\",\"context\":{\"command_line\":\"lens\",\"config\":\"dehn\"}}\n");

    write_file(d.path / "bad.json", "{\"subcommand\":\"lens\",\"p\":5,\"q\":1,\"ladder\":\"64\"}");
    const auto r4 = run_cli(d, "--config bad.json");
    REQUIRE(r4.exit_code == 2);
    REQUIRE(r4.err ==
            "{\"code\":\"ConfigKey\",\"message\":\"unknown config key for this "
            "subcommand\",\"context\":{\"key\":\"ladder\",\"subcommand\":\"lens\"}}\n");
}

TEST_CASE("validation failures exit 2 with one-line structured stderr") {
    TempDir d("validation");
    const std::string curve = samples_dir() + "/line_curve.json";

    struct Case {
        std::string args, err;
    };
    const Case cases[] = {
        {"",
         "{\"code\":\"BadArgument\",\"message\":\"no subcommand given (command line or "
         "config)\",\"context\":{}}\n"},
        {"--nope lens --p 5 --q 1",
         "{\"code\":\"BadFlags\",\"message\":\"The following argument was not expected: "
         "--nope\",\"context\":{}}\n"},
        {"lens --p 0",
         "{\"code\":\"BadArgument\",\"message\":\"lens needs --p >= 1\",\"context\":{}}\n"},
        {"lens --p 4 --q 2",
         "{\"code\":\"NotCoprime\",\"message\":\"lens space requires gcd(p,q) = "
         "1\",\"context\":{\"p\":\"4\",\"q\":\"2\"}}\n"},
        {"torus-bundle",
         "{\"code\":\"BadArgument\",\"message\":\"torus-bundle needs --matrix a,b,c,d or --sample "
         "N\",\"context\":{}}\n"},
        {"torus-bundle --matrix 1,1,1,1",
         "{\"code\":\"NotUnimodular\",\"message\":\"monodromy must have determinant "
         "1\",\"context\":{\"matrix\":\"[[1,1],[1,1]]\"}}\n"},
        {"dehn --curve /nonexistent.json",
         "{\"code\":\"FileError\",\"message\":\"cannot open file for "
         "reading\",\"context\":{\"path\":\"/nonexistent.json\"}}\n"},
        {"dehn --curve " + curve + " --family 2,1,1,2 --ladder 64,128",
         "{\"code\":\"NotUnimodular\",\"message\":\"family slopes must satisfy ps - qr = "
         "1\",\"context\":{\"p\":\"2\",\"q\":\"1\",\"r\":\"1\",\"s\":\"2\"}}\n"},
        {"dehn --curve " + curve + " --ladder 64:32:x2",
         "{\"code\":\"BadArgument\",\"message\":\"ladder needs 1 <= start <= end and factor >= "
         "2\",\"context\":{\"value\":\"64:32:x2\"}}\n"},
    };
    for (const Case& c : cases) {
        INFO("args: " << c.args);
        const auto r = run_cli(d, c.args);
        REQUIRE(r.exit_code == 2);
        REQUIRE(r.err == c.err);
    }

    write_file(d.path / "spec_badkey.json",
               "{\"f\":{\"linear\":1,\"harmonics\":[]},"
               "\"g\":{\"linear\":0,\"harmonics\":[[0,1,0]]},\"a\":0.1,\"b\":6,\"zz\":1}");
    const auto r = run_cli(d, "poisson --spec spec_badkey.json");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err ==
            "{\"code\":\"ParseError\",\"message\":\"unknown key in poisson "
            "spec\",\"context\":{\"key\":\"zz\"}}\n");
}

TEST_CASE("numerical failures exit 3 with structured stderr") {
    TempDir d("numerical");

    // f(a) = 0 sits on the lattice
    write_file(d.path / "spec_endpoint.json",
               "{\"f\":{\"linear\":1,\"harmonics\":[]},"
               "\"g\":{\"linear\":0,\"harmonics\":[[0,1,0]]},\"a\":0,\"b\":6.3831853071795864}");
    const auto r1 = run_cli(d, "poisson --spec spec_endpoint.json");
    REQUIRE(r1.exit_code == 3);
    REQUIRE(r1.err ==
            "{\"code\":\"EndpointHit\",\"message\":\"f lies on the lattice at an interval "
            "endpoint\",\"context\":{\"f\":\"0\",\"t\":\"0\"}}\n");

    // constant f has no monotone segments
    write_file(d.path / "spec_const.json",
               "{\"f\":{\"linear\":0,\"harmonics\":[]},"
               "\"g\":{\"linear\":0,\"harmonics\":[[0,1,0]]},\"a\":0.1,\"b\":6,\"K\":20}");
    const auto r2 = run_cli(d, "poisson --spec spec_const.json");
    REQUIRE(r2.exit_code == 3);
    REQUIRE(r2.err ==
            "{\"code\":\"NonMonotonicUndetected\",\"message\":\"f' vanishes on a sampling "
            "plateau; monotone segments cannot be "
            "detected\",\"context\":{\"t\":\"0.10540161132812501\"}}\n");

    // y = pi + t - sin t is tangent to y = pi at t = 0
    write_file(d.path / "tangent_curve.json",
               "{\"domain\":[-1,5],\"x\":{\"linear\":1,\"harmonics\":[]},"
               "\"y\":{\"linear\":1,\"harmonics\":[[0,3.141592653589793,0],[1,0,-1]]},"
               "\"theta0\":0}");
    const auto r3 = run_cli(d, "dehn --curve tangent_curve.json --ell 1 --ladder 64,128");
    REQUIRE(r3.exit_code == 3);
    REQUIRE(r3.err ==
            "{\"code\":\"NonTransverseToLine\",\"message\":\"curve is tangent to a line y = "
            "pi*k/ell\",\"context\":{\"k\":\"1\",\"t\":\"-1.1003504974946288e-05\","
            "\"yprime\":\"6.0538574153667923e-11\"}}\n");
}

TEST_CASE("fixed configs reproduce byte-identical artifacts") {
    TempDir a("det_a"), b("det_b");
    const std::string curve = samples_dir() + "/line_curve.json";
    const std::string wavy = samples_dir() + "/poisson_wavy.json";
    const std::string runs[] = {
        "lens --p 7 --q 2 --svg --moments 0..8 --out lens",
        "dehn --curve " + curve + " --ell 2 --ladder 64:256:x2 --out dr",
        "poisson --spec " + wavy + " --out pz",
    };
    for (const std::string& args : runs) {
        REQUIRE(run_cli(a, args).exit_code == 0);
        REQUIRE(run_cli(b, args).exit_code == 0);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a.path)) {
        const auto name = entry.path().filename();
        INFO("file: " << name);
        REQUIRE(read_file(a.path / name) == read_file(b.path / name));
        ++compared;
    }
    REQUIRE(compared >= 9);  // lens{json,csv,moments,svg}, dr{csv,json}, pz, 2 capture files

    // the thread budget must not leak into the bytes
    const std::string dehn_args = "dehn --curve " + curve + " --ell 1 --ladder 64,128 --out dt";
    REQUIRE(run_cli(a, dehn_args).exit_code == 0);
    REQUIRE(run_cli(b, dehn_args + " --threads 2").exit_code == 0);
    REQUIRE(read_file(a.path / "dt.reports.csv") == read_file(b.path / "dt.reports.csv"));
    REQUIRE(run_cli(b, dehn_args, "CS_SPECTRA_THREADS=3").exit_code == 0);
    REQUIRE(read_file(a.path / "dt.reports.csv") == read_file(b.path / "dt.reports.csv"));
    REQUIRE(read_file(a.path / "dt.reports.json") == read_file(b.path / "dt.reports.json"));
}

TEST_CASE("symmetrize doubles the atom list and the svg flag adds the histogram") {
    TempDir d("symmetrize");
    const auto r = run_cli(d, "lens --p 5 --q 1 --symmetrize --svg --moments 0..4 --out sym");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out ==
            "L(5,1): 6 atoms, moments 0..4 -> sym.measure.{json,csv}, sym.moments.csv, sym.svg\n");
    REQUIRE(read_file(d.path / "sym.moments.csv") ==
            "ell,re,im,provenance\n"
            "0,1,0,exact-sum\n"
            "1,0.44721359549995787,-5.5511151231257827e-17,exact-sum\n"
            "2,-0.44721359549995804,1.6653345369377348e-16,exact-sum\n"
            "3,-0.44721359549995787,2.2204460492503131e-16,exact-sum\n"
            "4,0.44721359549995821,-1.1102230246251565e-16,exact-sum\n");
    const std::string svg = read_file(d.path / "sym.svg");
    REQUIRE(svg.substr(0, 14) == "<svg xmlns=\"ht");
    REQUIRE(svg.find("</svg>") != std::string::npos);
}
