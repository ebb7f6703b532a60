#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "chowla/arith_sieve.hpp"
#include "chowla/entropy_lab.hpp"
#include "chowla/json_io.hpp"
#include "chowla/log_correlator.hpp"
#include "chowla/mirsky.hpp"
#include "chowla/nilseq.hpp"

using namespace chowla;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    std::string config_path;
    std::vector<std::int64_t> xs;
    std::vector<std::int64_t> omegas;
    std::string cache;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 0;

    // subcommand flags
    std::string alphabet;
    int length = 0;
    std::int64_t a = 0;
    int m = 0;
    std::int64_t max_n = 0;
    std::vector<std::string> kinds;
    std::vector<std::int64_t> ns;
    std::string demo;
};

struct Context {
    Options opt;
    CLI::App* sub = nullptr;
    json config = json::object();
    json resolved = json::object();

    bool flag_given(const std::string& name) const { return sub->count(name) > 0; }

    template <typename T>
    T pick(const std::string& flag, const T& flag_value, const char* key, const T& fallback) const
    {
        if (!flag.empty() && flag_given(flag)) return flag_value;
        if (config.contains(key)) return detail::get_as<T>(config, key, "config");
        return fallback;
    }
};

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json load_config(const std::string& path)
{
    if (path.empty()) return json::object();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("--config: cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("--config: malformed JSON at byte " + std::to_string(e.byte));
    }
    if (!j.is_object()) throw ConfigError("--config: top level must be an object");
    return j;
}

std::vector<LogWindow> resolve_ladder(Context& ctx)
{
    std::vector<LogWindow> ladder;
    const auto& o = ctx.opt;
    if (!o.xs.empty() || !o.omegas.empty()) {
        if (o.xs.size() != o.omegas.size())
            throw ConfigError("--omega: expected " + std::to_string(o.xs.size()) + " values to match --x, got " +
                              std::to_string(o.omegas.size()));
        for (std::size_t i = 0; i < o.xs.size(); ++i) ladder.push_back({o.xs[i], o.omegas[i]});
    } else if (ctx.config.contains("ladder")) {
        const json& l = ctx.config.at("ladder");
        if (!l.is_array() || l.empty()) throw ConfigError("ladder: must be a non-empty array of [x, omega]");
        for (std::size_t i = 0; i < l.size(); ++i) {
            const std::string where = "ladder[" + std::to_string(i) + "]";
            if (!l[i].is_array() || l[i].size() != 2 || !l[i][0].is_number_integer() || !l[i][1].is_number_integer())
                throw ConfigError(where + ": expected [x, omega] integers");
            ladder.push_back({l[i][0].get<std::int64_t>(), l[i][1].get<std::int64_t>()});
        }
    } else {
        ladder = {{1000000, 100}, {10000000, 1000}, {100000000, 10000}};
    }
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const std::string where = "ladder[" + std::to_string(i) + "]";
        if (ladder[i].x < 1 || ladder[i].omega < 1 || ladder[i].omega > ladder[i].x)
            throw ConfigError(where + ": need 1 <= omega <= x");
        if (i > 0 && ladder[i].x <= ladder[i - 1].x) throw ConfigError(where + ": x must be ascending");
    }
    json echo = json::array();
    for (const auto& w : ladder) echo.push_back({w.x, w.omega});
    ctx.resolved["ladder"] = echo;
    return ladder;
}

TableProvider make_provider(const Context& ctx)
{
    if (const char* env = std::getenv("CHOWLA_CACHE"); env && *env) return TableProvider(std::filesystem::path(env));
    if (!ctx.opt.cache.empty()) return TableProvider(std::filesystem::path(ctx.opt.cache));
    return TableProvider();
}

std::string pattern_string(std::span<const int> symbols)
{
    std::string s;
    for (int v : symbols) s += v > 0 ? '+' : v < 0 ? '-' : '0';
    return s;
}

// -------------------------------------------------------
// Subcommands. Each writes CSV into os and fills ctx.resolved.
// -------------------------------------------------------
void run_sieve(Context& ctx, std::ostream& os)
{
    std::vector<ArithKind> kinds;
    std::vector<std::string> names = ctx.pick("--kind", ctx.opt.kinds, "kinds", std::vector<std::string>{});
    if (names.empty())
        kinds.assign(kAllKinds.begin(), kAllKinds.end());
    else
        for (const auto& n : names) {
            try {
                kinds.push_back(parse_kind(n));
            } catch (const Error&) {
                throw ConfigError("kinds: unknown kind '" + n + "'");
            }
        }
    const auto max_n = ctx.pick<std::int64_t>("--max", ctx.opt.max_n, "max", 1000000);
    if (max_n < 1 || max_n > 100000000000LL) throw ConfigError("max: must be in [1, 10^11]");
    json kn = json::array();
    for (auto k : kinds) kn.push_back(std::string(kind_name(k)));
    ctx.resolved["kinds"] = kn;
    ctx.resolved["max"] = max_n;

    auto provider = make_provider(ctx);
    const auto tables = provider.ensure(kinds, static_cast<std::uint64_t>(max_n));
    os << "kind,max,sum\n";
    for (auto k : kinds) {
        const auto* t = tables.get(k);
        std::int64_t sum = 0;
        for (std::int64_t n = 1; n <= max_n; ++n) sum += t->at(static_cast<std::uint64_t>(n));
        os << kind_name(k) << ',' << max_n << ',' << sum << '\n';
    }
}

CorrelationSpec correlation_spec(Context& ctx, const CorrelationSpec& fallback)
{
    const auto spec = ctx.config.contains("spec") ? correlation_from_json(ctx.config.at("spec"), "spec") : fallback;
    try {
        validate(spec);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("spec: ") + e.what());
    }
    ctx.resolved["spec"] = to_json(spec);
    return spec;
}

const std::int64_t kTwoPoint[] = {0, 1};

void run_correlate(Context& ctx, std::ostream& os)
{
    const auto ladder = resolve_ladder(ctx);
    const auto spec = correlation_spec(ctx, shifted_product(liouville(), kTwoPoint));
    const auto a = ctx.pick<std::int64_t>("--a", ctx.opt.a, "a", 1);
    ctx.resolved["a"] = a;
    auto provider = make_provider(ctx);
    const auto kinds = required_kinds(spec);
    const auto tables =
        provider.ensure(kinds, static_cast<std::uint64_t>(max_argument(spec, a, ladder.back().x)));
    std::vector<CorrelationSample> samples;
    for (const auto& w : ladder) samples.push_back(correlation(spec, a, w, tables));
    write_samples_csv(os, samples);
}

std::vector<std::int64_t> pattern_shifts(Context& ctx, int default_length)
{
    std::vector<std::int64_t> shifts;
    if (ctx.flag_given("--length") || !ctx.config.contains("shifts")) {
        const int len = ctx.pick("--length", ctx.opt.length, "length", default_length);
        if (len < 1) throw ConfigError("length: must be >= 1");
        for (int j = 0; j < len; ++j) shifts.push_back(j);
    } else {
        shifts = detail::get_as<std::vector<std::int64_t>>(ctx.config, "shifts", "config");
        if (shifts.empty()) throw ConfigError("shifts: must be non-empty");
    }
    ctx.resolved["shifts"] = shifts;
    return shifts;
}

void run_patterns(Context& ctx, std::ostream& os)
{
    const auto ladder = resolve_ladder(ctx);
    const auto name = ctx.pick<std::string>("--alphabet", ctx.opt.alphabet, "alphabet", "liouville");
    Alphabet alphabet;
    if (name == "liouville")
        alphabet = Alphabet::Liouville;
    else if (name == "mobius")
        alphabet = Alphabet::Mobius;
    else
        throw ConfigError("alphabet: expected liouville or mobius, got '" + name + "'");
    ctx.resolved["alphabet"] = name;
    const auto shifts = pattern_shifts(ctx, 3);
    const std::int64_t hmax = *std::max_element(shifts.begin(), shifts.end());
    auto provider = make_provider(ctx);
    const ArithKind kinds[] = {alphabet_kind(alphabet)};
    const auto tables = provider.ensure(kinds, static_cast<std::uint64_t>(ladder.back().x + std::max<std::int64_t>(hmax, 0)));
    os << "x,omega,pattern,density\n";
    for (const auto& w : ladder) {
        const auto dens = sign_pattern_densities(alphabet, shifts, w, tables);
        for (std::size_t b = 0; b < dens.size(); ++b)
            os << w.x << ',' << w.omega << ','
               << pattern_string(pattern_symbols(alphabet, shifts.size(), b)) << ',' << format_double(dens[b])
               << '\n';
    }
}

std::vector<std::vector<int>> all_mobius_patterns(int length)
{
    std::vector<std::vector<int>> out;
    std::size_t total = 1;
    for (int j = 0; j < length; ++j) total *= 3;
    for (std::size_t b = 0; b < total; ++b) out.push_back(pattern_symbols(Alphabet::Mobius, static_cast<std::size_t>(length), b));
    return out;
}

void run_mirsky(Context& ctx, std::ostream& os)
{
    const auto ladder = resolve_ladder(ctx);
    std::vector<std::vector<int>> patterns;
    if (!ctx.flag_given("--length") && ctx.config.contains("patterns")) {
        patterns = detail::get_as<std::vector<std::vector<int>>>(ctx.config, "patterns", "config");
        if (patterns.empty()) throw ConfigError("patterns: must be non-empty");
    } else {
        const int len = ctx.pick("--length", ctx.opt.length, "length", 2);
        if (len < 1 || len > 4) throw ConfigError("length: must be in [1, 4]");
        patterns = all_mobius_patterns(len);
    }
    const auto truncation = ctx.pick<std::uint64_t>("", 0, "truncation", 100000);
    ctx.resolved["patterns"] = patterns;
    ctx.resolved["truncation"] = truncation;
    std::size_t longest = 0;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const std::string where = "patterns[" + std::to_string(i) + "]";
        if (patterns[i].empty() || patterns[i].size() > 4) throw ConfigError(where + ": length must be in [1, 4]");
        for (int s : patterns[i])
            if (s < -1 || s > 1) throw ConfigError(where + ": symbols must lie in {-1, 0, 1}");
        longest = std::max(longest, patterns[i].size());
    }
    auto provider = make_provider(ctx);
    const ArithKind kinds[] = {ArithKind::Mobius};
    const auto tables = provider.ensure(kinds, static_cast<std::uint64_t>(ladder.back().x) + longest);
    os << "x,omega,pattern,empirical,predicted,density,r,tail_bound\n";
    for (const auto& w : ladder)
        for (const auto& p : patterns) {
            const auto c = mirsky_pattern_check(SignPattern::consecutive(Alphabet::Mobius, p), w, tables, truncation);
            os << w.x << ',' << w.omega << ',' << pattern_string(p) << ',' << format_double(c.empirical) << ','
               << format_double(c.predicted) << ',' << format_double(c.constant.density) << ',' << c.constant.r
               << ',' << format_double(c.constant.tail_bound) << '\n';
        }
}

void run_pretense(Context& ctx, std::ostream& os)
{
    const auto g = ctx.config.contains("g") ? mult_func_from_json(ctx.config.at("g"), "g") : liouville();
    const auto h = ctx.config.contains("h") ? mult_func_from_json(ctx.config.at("h"), "h") : one();
    const auto t_grid = ctx.pick<std::vector<double>>("", {}, "t_grid", {0.0});
    std::vector<std::int64_t> xs;
    if (ctx.config.contains("x") && ctx.opt.xs.empty()) {
        xs = detail::get_as<std::vector<std::int64_t>>(ctx.config, "x", "config");
    } else {
        for (const auto& w : resolve_ladder(ctx)) xs.push_back(w.x);
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] < 3) throw ConfigError("x[" + std::to_string(i) + "]: must be >= 3");
    ctx.resolved["g"] = to_json(g);
    ctx.resolved["h"] = to_json(h);
    ctx.resolved["t_grid"] = t_grid;
    ctx.resolved["x"] = xs;
    os << "x,distance_sq,statistic,best_t\n";
    for (auto x : xs) {
        const auto r = pretentious_distance_sq(g, h, static_cast<std::uint64_t>(x), t_grid);
        os << x << ',' << format_double(r.distance_sq) << ',' << format_double(r.statistic) << ','
           << format_double(r.best_t) << '\n';
    }
}

void run_isotopy(Context& ctx, std::ostream& os)
{
    const auto ladder = resolve_ladder(ctx);
    const auto spec = correlation_spec(ctx, shifted_product(liouville(), kTwoPoint));
    const auto a = ctx.pick<std::int64_t>("--a", ctx.opt.a, "a", 1);
    const auto m = ctx.pick("--m", ctx.opt.m, "m", 6);
    if (m < 1 || m > 30) throw ConfigError("m: must be in [1, 30]");
    ctx.resolved["a"] = a;
    ctx.resolved["m"] = m;
    auto provider = make_provider(ctx);
    const auto top_a = a * (std::int64_t{1} << (m + 1));
    const auto tables =
        provider.ensure(required_kinds(spec), static_cast<std::uint64_t>(max_argument(spec, top_a, ladder.back().x)));
    os << "x,omega,m,primes,residual,f_re,f_im\n";
    for (const auto& w : ladder) {
        const auto r = isotopy_residual(spec, a, m, w, tables);
        os << w.x << ',' << w.omega << ',' << m << ',' << r.primes << ',' << format_double(r.residual) << ','
           << format_double(r.f_a.real()) << ',' << format_double(r.f_a.imag()) << '\n';
    }
}

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& v : p) s += (v = u(rng) < 0.15 ? 0.0 : u(rng));
    if (s == 0.0) {
        p[0] = 1.0;
        s = 1.0;
    }
    for (auto& v : p) v /= s;
    double rest = 0.0;
    for (std::size_t i = 1; i < n; ++i) rest += p[i];
    p[0] = std::max(0.0, 1.0 - rest);
    return p;
}

void run_entropy(Context& ctx, std::ostream& os)
{
    if (!ctx.flag_given("--seed") && !ctx.config.contains("seed"))
        throw ConfigError("--seed: required for entropy");
    const auto seed = ctx.pick<std::uint64_t>("--seed", ctx.opt.seed, "seed", 0);
    const auto demo = ctx.pick<std::string>("--demo", ctx.opt.demo, "demo", "decrement");
    ctx.resolved["seed"] = seed;
    ctx.resolved["demo"] = demo;
    if (demo == "hoeffding") {
        const auto N = ctx.pick<std::int64_t>("", 0, "N", 10000);
        const auto eps = ctx.pick<double>("", 0, "epsilon", 0.05);
        const auto trials = ctx.pick<std::int64_t>("", 0, "trials", 10000);
        ctx.resolved["N"] = N;
        ctx.resolved["epsilon"] = eps;
        ctx.resolved["trials"] = trials;
        const auto r = hoeffding_tail_demo(N, eps, trials, seed);
        os << "N,epsilon,trials,empirical_tail,bound,slack,holds\n";
        os << N << ',' << format_double(eps) << ',' << trials << ',' << format_double(r.empirical_tail) << ','
           << format_double(r.bound) << ',' << format_double(r.slack) << ',' << (r.holds ? 1 : 0) << '\n';
    } else if (demo == "bound") {
        const auto trials = ctx.pick<std::int64_t>("", 0, "trials", 1000);
        const auto max_size = ctx.pick<std::int64_t>("", 0, "max_size", 32);
        if (trials < 1) throw ConfigError("trials: must be >= 1");
        if (max_size < 2) throw ConfigError("max_size: must be >= 2");
        ctx.resolved["trials"] = trials;
        ctx.resolved["max_size"] = max_size;
        std::mt19937_64 rng(splitmix64(seed));
        std::uniform_int_distribution<std::int64_t> size(2, max_size);
        os << "trial,size,subset,lhs,rhs,holds\n";
        for (std::int64_t t = 0; t < trials; ++t) {
            const auto n = size(rng);
            std::vector<Outcome> support;
            for (std::int64_t i = 0; i < n; ++i) support.push_back({i});
            const EmpiricalDist d(support, random_distribution(rng, static_cast<std::size_t>(n)));
            std::vector<Outcome> e;
            for (std::int64_t i = 0; i < n; ++i)
                if (rng() & 1u) e.push_back({i});
            if (e.empty()) e.push_back({0});
            if (static_cast<std::int64_t>(e.size()) == n) e.pop_back();
            const auto r = entropy_bound_check(d, e);
            os << t << ',' << n << ',' << e.size() << ',' << format_double(r.lhs) << ',' << format_double(r.rhs)
               << ',' << (r.holds ? 1 : 0) << '\n';
        }
    } else if (demo == "decrement") {
        const auto ladder = resolve_ladder(ctx);
        const auto max_m = ctx.pick<int>("--m", ctx.opt.m, "max_m", 8);
        const auto block = ctx.pick<int>("--length", ctx.opt.length, "block", 8);
        const auto samples = ctx.pick<std::int64_t>("", 0, "samples", 100000);
        if (max_m < 1 || max_m > 12) throw ConfigError("max_m: must be in [1, 12]");
        if (block < 1 || block > 16) throw ConfigError("block: must be in [1, 16]");
        if (samples < 1) throw ConfigError("samples: must be >= 1");
        ctx.resolved["max_m"] = max_m;
        ctx.resolved["block"] = block;
        ctx.resolved["samples"] = samples;
        auto provider = make_provider(ctx);
        const ArithKind kinds[] = {ArithKind::Liouville};
        const auto tables = provider.ensure(kinds, static_cast<std::uint64_t>(ladder.back().x + block));
        os << "x,omega,m,prime,h_x,h_y,mutual_info\n";
        for (const auto& w : ladder)
            for (const auto& r : entropy_decrement_demo(max_m, block, samples, w, tables, seed))
                os << w.x << ',' << w.omega << ',' << r.m << ',' << r.prime << ',' << format_double(r.h_x) << ','
                   << format_double(r.h_y) << ',' << format_double(r.mutual_info) << '\n';
    } else {
        throw ConfigError("demo: expected decrement, hoeffding or bound, got '" + demo + "'");
    }
}

NilSequence nil_sequence(Context& ctx)
{
    const NilSequence seq = ctx.config.contains("sequence") ? nil_sequence_from_json(ctx.config.at("sequence"))
                                                            : NilSequence{PolyPhase{{0.0, 0.0, std::numbers::sqrt2}}};
    try {
        validate(seq);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("sequence: ") + e.what());
    }
    ctx.resolved["sequence"] = to_json(seq);
    return seq;
}

void run_equidist(Context& ctx, std::ostream& os)
{
    const auto seq = nil_sequence(ctx);
    const auto ns = ctx.pick<std::vector<std::int64_t>>("--n", ctx.opt.ns, "N", {1000, 10000, 100000, 1000000});
    for (std::size_t i = 0; i < ns.size(); ++i)
        if (ns[i] < 1000) throw ConfigError("N[" + std::to_string(i) + "]: must be >= 1000");
    ctx.resolved["N"] = ns;
    os << "N,mean\n";
    for (const auto& r : decay_table(seq, ns)) os << r.N << ',' << format_double(r.mean) << '\n';
}

void run_nilseq(Context& ctx, std::ostream& os)
{
    const auto seq = nil_sequence(ctx);
    std::vector<std::vector<std::int64_t>> pairs = {{1000, 100000}};
    if (ctx.config.contains("pairs")) pairs = detail::get_as<std::vector<std::vector<std::int64_t>>>(ctx.config, "pairs", "config");
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].size() != 2 || pairs[i][0] < 1000 || pairs[i][1] < 1000)
            throw ConfigError("pairs[" + std::to_string(i) + "]: expected [x, y] with x, y >= 1000");
    const auto weights = ctx.pick<std::string>("", "", "weights", "unit");
    PrimeWeight w;
    if (weights == "mod4")
        w = [](std::uint64_t p) { return p % 4 == 1 ? 1.0 : -1.0; };
    else if (weights != "unit")
        throw ConfigError("weights: expected unit or mod4, got '" + weights + "'");
    ctx.resolved["pairs"] = pairs;
    ctx.resolved["weights"] = weights;
    os << "x,y,bilinear_mean\n";
    for (const auto& p : pairs)
        os << p[0] << ',' << p[1] << ',' << format_double(bilinear_prime_mean(seq, p[0], p[1], w, w)) << '\n';
}

void write_atomic(const std::filesystem::path& path, const std::string& data)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("--out: cannot write " + path.string());
        f << data;
        if (!f.flush()) throw IoError("--out: cannot write " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("--out: cannot write " + path.string());
}

int exit_code(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 1;
    if (dynamic_cast<const RangeError*>(&e) || dynamic_cast<const CapacityError*>(&e) ||
        dynamic_cast<const CoverageError*>(&e))
        return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Logarithmic correlation laboratory for multiplicative functions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Options opt;
    using Runner = void (*)(Context&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Runner>> commands = {
        {"sieve", "build or load arithmetic tables and print their summatory values", run_sieve},
        {"correlate", "logarithmic correlations along a window ladder", run_correlate},
        {"patterns", "sign-pattern densities of Liouville or Mobius", run_patterns},
        {"mirsky", "Mobius pattern densities against squarefree constants", run_mirsky},
        {"pretense", "pretentious distances", run_pretense},
        {"isotopy", "approximate isotopy residuals", run_isotopy},
        {"entropy", "entropy demos (decrement, hoeffding, bound)", run_entropy},
        {"equidist", "equidistribution decay tables for nil sequences", run_equidist},
        {"nilseq", "bilinear prime means of nil sequences", run_nilseq},
    };
    std::map<CLI::App*, Runner> runners;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--x", opt.xs, "window x (repeatable)");
        sub->add_option("--omega", opt.omegas, "window omega (repeatable)");
        sub->add_option("--cache", opt.cache, "sieve cache directory");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--out", opt.out, "output CSV path");
        sub->add_option("--threads", opt.threads, "worker threads, 0 = all cores");
        const std::string n = name;
        if (n == "patterns") sub->add_option("--alphabet", opt.alphabet, "liouville or mobius");
        if (n == "patterns" || n == "mirsky" || n == "entropy") sub->add_option("--length", opt.length, "pattern or block length");
        if (n == "correlate" || n == "isotopy") sub->add_option("--a", opt.a, "dilation a");
        if (n == "isotopy" || n == "entropy") sub->add_option("--m", opt.m, "dyadic scale 2^m");
        if (n == "sieve") {
            sub->add_option("--max", opt.max_n, "largest n");
            sub->add_option("--kind", opt.kinds, "liouville, mobius, bigomega, smallomega (repeatable)");
        }
        if (n == "equidist") sub->add_option("--n", opt.ns, "average length N (repeatable)");
        if (n == "entropy") sub->add_option("--demo", opt.demo, "decrement, hoeffding or bound");
        runners[sub] = fn;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "chowla_lab: error: " << e.what() << '\n';
        return 1;
    }

    Context ctx;
    ctx.opt = opt;
    ctx.sub = app.get_subcommands().front();
    try {
        const auto t0 = std::chrono::steady_clock::now();
        set_thread_count(opt.threads);
        ctx.config = load_config(opt.config_path);
        std::ostringstream csv;
        runners.at(ctx.sub)(ctx, csv);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (opt.out.empty()) {
            std::cout << csv.str();
            return 0;
        }
        const std::filesystem::path out(opt.out);
        write_atomic(out, csv.str());
        json resolved = ctx.resolved;
        resolved["subcommand"] = ctx.sub->get_name();
        json manifest = {
            {"tool", "chowla_lab"},
            {"version", kVersion},
            {"subcommand", ctx.sub->get_name()},
            {"config", resolved},
            {"config_hash", "fnv1a64:" + hex64(fnv1a(resolved.dump()))},
            {"output", out.filename().string()},
            {"wall_time_s", wall},
        };
        auto mpath = out;
        mpath += ".manifest.json";
        write_atomic(mpath, manifest.dump(2) + "\n");
        std::cerr << "wrote " << out.string() << '\n';
        return 0;
    } catch (const json::exception& e) {
        std::cerr << "chowla_lab: error: config: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "chowla_lab: error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "chowla_lab: error: " << e.what() << '\n';
        return 1;
    }
}
