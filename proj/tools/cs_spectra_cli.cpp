#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "cs_spectra/cs_spectra.hpp"

namespace {

using namespace cs_spectra;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw validation_error("FileError", "cannot open file for reading", {{"path", path}});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw validation_error("FileError", "cannot open file for writing", {{"path", path}});
    }
    out << content;
    if (!out) {
        throw validation_error("FileError", "write failed", {{"path", path}});
    }
}

long long parse_ll(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(what);
        return v;
    } catch (const std::exception&) {
        throw validation_error("BadArgument", std::string("expected an integer for ") + what,
                               {{"value", text}});
    }
}

std::vector<long long> parse_int_list(const std::string& text, std::size_t expect,
                                      const char* what) {
    std::vector<long long> out;
    for (const std::string& field : split_fields(text, ',')) out.push_back(parse_ll(field, what));
    if (expect != 0 && out.size() != expect) {
        throw validation_error("BadArgument",
                               std::string(what) + " needs " + std::to_string(expect) +
                                   " comma-separated integers",
                               {{"value", text}});
    }
    return out;
}

// "A..B" (inclusive) or a single order "N".
std::pair<long long, long long> parse_moment_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const long long v = parse_ll(text, "--moments");
        return {v, v};
    }
    const long long lo = parse_ll(text.substr(0, dots), "--moments");
    const long long hi = parse_ll(text.substr(dots + 2), "--moments");
    if (lo > hi) {
        throw validation_error("BadArgument", "moment range must be increasing", {{"value", text}});
    }
    return {lo, hi};
}

// "start:end:xF" (geometric, factor F >= 2) or a comma list of increasing n.
std::vector<long long> parse_ladder(const std::string& text) {
    std::vector<long long> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split_fields(text, ':');
        if (parts.size() != 3 || parts[2].empty() || parts[2][0] != 'x') {
            throw validation_error("BadArgument", "ladder must look like start:end:xF",
                                   {{"value", text}});
        }
        const long long start = parse_ll(parts[0], "--ladder");
        const long long end = parse_ll(parts[1], "--ladder");
        const long long factor = parse_ll(parts[2].substr(1), "--ladder");
        if (start < 1 || end < start || factor < 2) {
            throw validation_error("BadArgument", "ladder needs 1 <= start <= end and factor >= 2",
                                   {{"value", text}});
        }
        for (long long n = start; n <= end; n *= factor) out.push_back(n);
        return out;
    }
    out = parse_int_list(text, 0, "--ladder");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] < 1 || (i > 0 && out[i] <= out[i - 1])) {
            throw validation_error("BadArgument", "ladder entries must be positive and increasing",
                                   {{"value", text}});
        }
    }
    if (out.empty()) {
        throw validation_error("BadArgument", "ladder must be nonempty", {{"value", text}});
    }
    return out;
}

struct Options {
    std::string subcommand;
    std::string out = "out";
    bool svg = false;
    bool symmetrize_flag = false;
    std::string moments = "0..8";
    long long threads = 0;
    long long p = 0, q = 0;               // lens, residue
    long long p1 = 0, p2 = 0, p3 = 0;     // brieskorn
    std::string matrix;                    // torus-bundle
    long long sample = 0;
    long long seed = 0;
    std::string curve;                     // dehn
    std::string family = "1,0,0,1";
    long long ell = 1;
    std::string ladder = "64:4096:x2";
    std::string spec;                      // poisson
    long long K = 200;
};

const std::set<std::string>& allowed_keys(const std::string& sub) {
    static const std::set<std::string> global = {"subcommand", "out",     "svg",
                                                 "symmetrize", "moments", "threads"};
    static const std::map<std::string, std::set<std::string>> per_sub = {
        {"lens", {"p", "q"}},
        {"residue", {"p"}},
        {"brieskorn", {"p1", "p2", "p3"}},
        {"torus-bundle", {"matrix", "sample", "seed"}},
        {"dehn", {"curve", "family", "ell", "ladder"}},
        {"poisson", {"spec", "K"}},
    };
    static std::map<std::string, std::set<std::string>> merged;
    auto it = merged.find(sub);
    if (it == merged.end()) {
        std::set<std::string> keys = global;
        const auto extra = per_sub.find(sub);
        if (extra != per_sub.end()) keys.insert(extra->second.begin(), extra->second.end());
        it = merged.emplace(sub, std::move(keys)).first;
    }
    return it->second;
}

long long config_int(const nlohmann::json& v, const std::string& key) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_string()) return parse_ll(v.get<std::string>(), key.c_str());
    throw validation_error("ConfigKey", "config value must be an integer", {{"key", key}});
}

std::string config_str(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    throw validation_error("ConfigKey", "config value must be a string", {{"key", key}});
}

bool config_bool(const nlohmann::json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    throw validation_error("ConfigKey", "config value must be a boolean", {{"key", key}});
}

// Fill options not given on the command line from the config file; reject keys
// that do not belong to the resolved subcommand.
void apply_config(Options& o, const nlohmann::json& j,
                  const std::set<std::string>& given) {
    if (!j.is_object()) {
        throw validation_error("ParseError", "config file is not a JSON object");
    }
    if (j.contains("subcommand")) {
        const std::string sub = config_str(j["subcommand"], "subcommand");
        if (o.subcommand.empty()) {
            o.subcommand = sub;
        } else if (o.subcommand != sub) {
            throw validation_error("ConfigKey", "config subcommand conflicts with command line",
                                   {{"config", sub}, {"command_line", o.subcommand}});
        }
    }
    if (o.subcommand.empty()) {
        throw validation_error("BadArgument", "no subcommand given (command line or config)");
    }
    const auto& allowed = allowed_keys(o.subcommand);
    for (const auto& [key, value] : j.items()) {
        if (allowed.find(key) == allowed.end()) {
            throw validation_error("ConfigKey", "unknown config key for this subcommand",
                                   {{"key", key}, {"subcommand", o.subcommand}});
        }
        if (given.count(key)) continue;  // flags override the file
        if (key == "subcommand") continue;
        if (key == "out") o.out = config_str(value, key);
        else if (key == "svg") o.svg = config_bool(value, key);
        else if (key == "symmetrize") o.symmetrize_flag = config_bool(value, key);
        else if (key == "moments") o.moments = config_str(value, key);
        else if (key == "threads") o.threads = config_int(value, key);
        else if (key == "p") o.p = config_int(value, key);
        else if (key == "q") o.q = config_int(value, key);
        else if (key == "p1") o.p1 = config_int(value, key);
        else if (key == "p2") o.p2 = config_int(value, key);
        else if (key == "p3") o.p3 = config_int(value, key);
        else if (key == "matrix") o.matrix = config_str(value, key);
        else if (key == "sample") o.sample = config_int(value, key);
        else if (key == "seed") o.seed = config_int(value, key);
        else if (key == "curve") o.curve = config_str(value, key);
        else if (key == "family") o.family = config_str(value, key);
        else if (key == "ell") o.ell = config_int(value, key);
        else if (key == "ladder") o.ladder = config_str(value, key);
        else if (key == "spec") o.spec = config_str(value, key);
        else if (key == "K") o.K = config_int(value, key);
    }
}

void emit_measure_outputs(const Options& o, CircleMeasure m) {
    if (o.symmetrize_flag) m = symmetrize(m);
    const auto [lo, hi] = parse_moment_range(o.moments);
    MomentTable table;
    for (long long l = lo; l <= hi; ++l) {
        table.entries[l] = {moment(m, l), Provenance::exact_sum};
    }
    write_file(o.out + ".measure.json", to_json(m));
    write_file(o.out + ".measure.csv", to_csv(m));
    write_file(o.out + ".moments.csv", to_csv(table));
    if (o.svg) write_file(o.out + ".svg", svg_histogram(m));
    const std::string svg_note = o.svg ? ", " + o.out + ".svg" : "";
    std::printf("%s: %zu atoms, moments %lld..%lld -> %s.measure.{json,csv}, %s.moments.csv%s\n",
                m.label().c_str(), m.atoms().size(), lo, hi, o.out.c_str(), o.out.c_str(),
                svg_note.c_str());
}

int run_lens(const Options& o) {
    if (o.p < 1) throw validation_error("BadArgument", "lens needs --p >= 1");
    emit_measure_outputs(o, lens_measure(LensSpace(o.p, o.q)));
    return 0;
}

int run_residue(const Options& o) {
    if (o.p < 1) throw validation_error("BadArgument", "residue needs --p >= 1");
    emit_measure_outputs(o, residue_measure(o.p));
    return 0;
}

int run_brieskorn(const Options& o) {
    emit_measure_outputs(o, brieskorn_measure(BrieskornSphere(o.p1, o.p2, o.p3)));
    return 0;
}

int run_torus_bundle(const Options& o) {
    if (o.sample > 0) {
        const auto mats = sample_torus_bundles(static_cast<std::size_t>(o.sample),
                                               static_cast<unsigned long>(o.seed), 100);
        std::string csv = "a,b,c,d,group_order,mu1_modulus,flat_modulus,bijective_2\n";
        for (const Mat2& A : mats) {
            const TorusBundle T(A);
            const auto G = torus_bundle_group(T);
            const CircleMeasure m = torus_bundle_measure(T);
            const double mod1 = std::abs(moment(m, 1));
            const double flat = 1.0 / std::sqrt(static_cast<double>(G.elements.size()));
            csv += std::to_string(A.a) + ',' + std::to_string(A.b) + ',' + std::to_string(A.c) +
                   ',' + std::to_string(A.d) + ',' + std::to_string(G.elements.size()) + ',' +
                   format_double(mod1) + ',' + format_double(flat) + ',' +
                   (scalar_multiple_bijective(G, 2) ? "1" : "0") + '\n';
        }
        write_file(o.out + ".sample.csv", csv);
        std::printf("sampled %lld monodromies (seed %lld) -> %s.sample.csv\n", o.sample, o.seed,
                    o.out.c_str());
        return 0;
    }
    if (o.matrix.empty()) {
        throw validation_error("BadArgument", "torus-bundle needs --matrix a,b,c,d or --sample N");
    }
    const auto e = parse_int_list(o.matrix, 4, "--matrix");
    emit_measure_outputs(o, torus_bundle_measure(TorusBundle(Mat2{e[0], e[1], e[2], e[3]})));
    return 0;
}

int run_dehn(const Options& o) {
    if (o.curve.empty()) throw validation_error("BadArgument", "dehn needs --curve FILE");
    const LegendrianCurve c = curve_from_json(read_file(o.curve));
    const auto f = parse_int_list(o.family, 4, "--family");
    const DehnFamily fam(f[0], f[1], f[2], f[3]);
    const auto ladder = parse_ladder(o.ladder);
    const auto reports = theorem_main_run(c, fam, o.ell, ladder);
    write_file(o.out + ".reports.csv", reports_to_csv(reports));
    write_file(o.out + ".reports.json", reports_to_json(reports));
    std::set<long long> distinct(ladder.begin(), ladder.end());
    if (ladder.size() >= 4 && distinct.size() == ladder.size()) {
        const DecayFit fit = decay_fit(reports);
        if (fit.at_floor) {
            std::printf("ell=%lld: residuals at numerical floor (%d usable) -> %s.reports.{csv,json}\n",
                        o.ell, fit.points_used, o.out.c_str());
        } else {
            std::printf("ell=%lld: fitted decay slope %.6f (r2 %.4f) -> %s.reports.{csv,json}\n",
                        o.ell, fit.slope, fit.r2, o.out.c_str());
        }
    } else {
        std::printf("ell=%lld: %zu ladder entries -> %s.reports.{csv,json}\n", o.ell,
                    ladder.size(), o.out.c_str());
    }
    return 0;
}

int run_poisson(const Options& o, bool k_given) {
    if (o.spec.empty()) throw validation_error("BadArgument", "poisson needs --spec FILE");
    nlohmann::json j = nlohmann::json::parse(read_file(o.spec), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw validation_error("ParseError", "poisson spec is not a JSON object",
                               {{"path", o.spec}});
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "f" && key != "g" && key != "a" && key != "b" && key != "K") {
            throw validation_error("ParseError", "unknown key in poisson spec", {{"key", key}});
        }
    }
    if (!j.contains("f") || !j.contains("g") || !j.contains("a") || !j.contains("b") ||
        !j["a"].is_number() || !j["b"].is_number()) {
        throw validation_error("ParseError", "poisson spec needs f, g and numeric a, b");
    }
    const TrigPoly f = detail::trigpoly_from_json(j["f"], "f");
    const TrigPoly g = detail::trigpoly_from_json(j["g"], "g");
    const double a = j["a"].get<double>(), b = j["b"].get<double>();
    long long K = o.K;
    if (!k_given && j.contains("K")) K = config_int(j["K"], "K");
    const PoissonResult r = poisson_check(f, g, a, b, K);
    std::string out = "{\"lhs\":" + format_double(r.lhs) +
                      ",\"rhs\":{\"re\":" + format_double(r.rhs.real()) +
                      ",\"im\":" + format_double(r.rhs.imag()) +
                      "},\"gap\":" + format_double(r.gap) + ",\"K\":" + std::to_string(K) + "}\n";
    write_file(o.out + ".poisson.json", out);
    std::printf("lhs %.12g, |rhs| %.12g, gap %.6e at K=%lld -> %s.poisson.json\n", r.lhs,
                std::abs(r.rhs), r.gap, K, o.out.c_str());
    return 0;
}

int dispatch(int argc, char** argv) {
    Options o;
    std::string config_path;

    CLI::App app{"Chern-Simons phase distributions on the circle"};
    app.require_subcommand(0, 1);
    app.add_option("--config", config_path, "JSON config file; command-line flags override it");
    auto* opt_out = app.add_option("--out", o.out, "output file prefix (default: out)");
    auto* opt_svg = app.add_flag("--svg", o.svg, "also write a histogram SVG");
    auto* opt_sym =
        app.add_flag("--symmetrize", o.symmetrize_flag, "average the measure with its reflection");
    auto* opt_moments =
        app.add_option("--moments", o.moments, "moment orders, A..B or a single order");
    auto* opt_threads = app.add_option("--threads", o.threads, "worker thread cap");

    auto* lens = app.add_subcommand("lens", "lens space L(p,q)");
    auto* lens_p = lens->add_option("--p", o.p, "order p");
    auto* lens_q = lens->add_option("--q", o.q, "coprime q");

    auto* residue = app.add_subcommand("residue", "quadratic residue phases mod p");
    auto* residue_p = residue->add_option("--p", o.p, "modulus p");

    auto* brieskorn = app.add_subcommand("brieskorn", "Brieskorn sphere Sigma(p1,p2,p3)");
    auto* bk_p1 = brieskorn->add_option("--p1", o.p1, "first exponent");
    auto* bk_p2 = brieskorn->add_option("--p2", o.p2, "second exponent");
    auto* bk_p3 = brieskorn->add_option("--p3", o.p3, "third exponent");

    auto* torus = app.add_subcommand("torus-bundle", "torus bundle with monodromy A");
    auto* tb_matrix = torus->add_option("--matrix", o.matrix, "monodromy a,b,c,d");
    auto* tb_sample = torus->add_option("--sample", o.sample, "sample N random monodromies");
    auto* tb_seed = torus->add_option("--seed", o.seed, "sampler seed");

    auto* dehn = app.add_subcommand("dehn", "Dehn filling family asymptotics");
    auto* dh_curve = dehn->add_option("--curve", o.curve, "curve JSON file");
    auto* dh_family = dehn->add_option("--family", o.family, "base slopes p,q,r,s");
    auto* dh_ell = dehn->add_option("--ell", o.ell, "moment order");
    auto* dh_ladder = dehn->add_option("--ladder", o.ladder, "n ladder, start:end:xF or list");

    auto* poisson = app.add_subcommand("poisson", "Poisson summation check");
    auto* ps_spec = poisson->add_option("--spec", o.spec, "spec JSON file with f, g, a, b");
    auto* ps_k = poisson->add_option("--K", o.K, "truncation order");

    for (auto* sub : {lens, residue, brieskorn, torus, dehn, poisson}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        throw validation_error("BadFlags", e.what());
    }

    const auto subs = app.get_subcommands();
    if (!subs.empty()) o.subcommand = subs[0]->get_name();

    std::set<std::string> given;
    const std::pair<const char*, CLI::Option*> tracked[] = {
        {"out", opt_out},     {"svg", opt_svg},       {"symmetrize", opt_sym},
        {"moments", opt_moments}, {"threads", opt_threads}, {"p", lens_p},
        {"q", lens_q},        {"p", residue_p},       {"p1", bk_p1},
        {"p2", bk_p2},        {"p3", bk_p3},          {"matrix", tb_matrix},
        {"sample", tb_sample}, {"seed", tb_seed},     {"curve", dh_curve},
        {"family", dh_family}, {"ell", dh_ell},       {"ladder", dh_ladder},
        {"spec", ps_spec},    {"K", ps_k},
    };
    for (const auto& [name, opt] : tracked) {
        if (opt->count() > 0) given.insert(name);
    }

    if (!config_path.empty()) {
        nlohmann::json j = nlohmann::json::parse(read_file(config_path), nullptr, false);
        if (j.is_discarded()) {
            throw validation_error("ParseError", "config file is not valid JSON",
                                   {{"path", config_path}});
        }
        apply_config(o, j, given);
    }
    if (o.subcommand.empty()) {
        throw validation_error("BadArgument", "no subcommand given (command line or config)");
    }
    if (o.threads < 0) {
        throw validation_error("BadArgument", "--threads must be positive",
                               {{"threads", std::to_string(o.threads)}});
    }
    if (o.threads > 0) set_thread_budget(static_cast<int>(o.threads));

    if (o.subcommand == "lens") return run_lens(o);
    if (o.subcommand == "residue") return run_residue(o);
    if (o.subcommand == "brieskorn") return run_brieskorn(o);
    if (o.subcommand == "torus-bundle") return run_torus_bundle(o);
    if (o.subcommand == "dehn") return run_dehn(o);
    if (o.subcommand == "poisson") return run_poisson(o, given.count("K") > 0);
    throw validation_error("BadArgument", "unknown subcommand", {{"subcommand", o.subcommand}});
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const cs_spectra::error& e) {
        std::fprintf(stderr, "%s\n", e.json_line().c_str());
        return e.exit_code();
    } catch (const std::exception& e) {
        const cs_spectra::error wrapped("InternalError", e.what());
        std::fprintf(stderr, "%s\n", wrapped.json_line().c_str());
        return 3;
    }
}
