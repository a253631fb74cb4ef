#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "rabi/adiabatic.hpp"
#include "rabi/chain.hpp"
#include "rabi/dynamics.hpp"
#include "rabi/error.hpp"
#include "rabi/gfunction.hpp"
#include "rabi/parallel.hpp"
#include "rabi/wigner.hpp"

namespace rabi::cli {

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double eight_pi = 8.0 * std::numbers::pi;

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c))
        return std::to_string(*i);
    return std::get<std::string>(c);
}

json cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return std::isfinite(*d) ? json(*d) : json(nullptr);
    if (const auto* i = std::get_if<long long>(&c))
        return *i;
    return std::get<std::string>(c);
}

std::string render(const Table& t, const std::string& format)
{
    if (format == "json") {
        json doc;
        doc["columns"] = t.columns;
        json rows = json::array();
        for (const auto& r : t.rows) {
            json row = json::array();
            for (const auto& c : r)
                row.push_back(cell_json(c));
            rows.push_back(std::move(row));
        }
        doc["rows"] = std::move(rows);
        return doc.dump(1) + "\n";
    }
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        s += (i ? "," : "") + t.columns[i];
    s += '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i)
                s += ',';
            s += cell_text(r[i]);
        }
        s += '\n';
    }
    return s;
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size())
            throw ParameterError(what + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_index_list(const std::string& text, const std::string& what)
{
    std::vector<int> out;
    for (double v : parse_list(text, what)) {
        if (v < 0 || v != std::floor(v))
            throw ParameterError(what + " must be non-negative integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

int env_nmax_cap()
{
    const char* env = std::getenv("RABI_NMAX_CAP");
    if (env == nullptr || *env == '\0')
        return default_nmax_cap;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 2 || v > 1'000'000)
        throw ParameterError(std::string("RABI_NMAX_CAP='") + env + "' must be an integer in [2, 1000000]");
    return static_cast<int>(v);
}

struct Common {
    double omega = 1.0;
    double delta = 0.0;
    double g = 0.0;
    std::string parity = "+";
    int nmax = 0;
    double tol = 1e-10;
    std::string out = ".";
    std::string format = "csv";
    int jobs = 1;
    int nmax_cap = default_nmax_cap;
    std::string config;
};

// Output directory, table writer and manifest bookkeeping for one command.
class Session {
public:
    Session(Common common, std::string subcommand) : c_(std::move(common)), subcommand_(std::move(subcommand)) {}

    const Common& common() const { return c_; }
    Parity parity() const { return parse_parity(c_.parity); }
    ModelParams params() const { return ModelParams(c_.omega, c_.delta, c_.g); }
    ModelParams preset(double gbar, double dbar) const
    {
        return ModelParams(c_.omega, dbar * c_.omega, gbar * c_.omega);
    }

    void write(const Table& t)
    {
        fs::create_directories(c_.out);
        const std::string file = t.name + (c_.format == "json" ? ".json" : ".csv");
        const std::string body = render(t, c_.format);
        std::ofstream os(fs::path(c_.out) / file, std::ios::binary);
        if (!os)
            throw ParameterError("cannot write " + (fs::path(c_.out) / file).string());
        os << body;
        outputs_.push_back({{"file", file}, {"rows", t.rows.size()}, {"fnv1a", hex64(fnv1a(body))}});
    }

    // Decomposition for one computation, honouring --nmax (fixed) or the
    // doubling procedure, and recorded in the manifest.
    SpectralDecomposition spectrum(const std::string& label, const ModelParams& p, Parity par, int levels)
    {
        SpectralDecomposition dec = [&] {
            if (c_.nmax > 0) {
                if (c_.nmax < levels)
                    throw ParameterError("--nmax " + std::to_string(c_.nmax) + " is below the " +
                                         std::to_string(levels) + " levels needed for " + label);
                return diagonalize(build_chain(p, par, c_.nmax));
            }
            return converged_spectrum(p, par, levels, c_.tol, c_.nmax_cap);
        }();
        record(label, p, par, levels, dec);
        return dec;
    }

    void record(const std::string& label, const ModelParams& p, Parity par, int levels, const SpectralDecomposition& dec)
    {
        json entry{{"label", label},       {"omega", p.omega()}, {"delta", p.delta()}, {"g", p.g()},
                   {"parity", std::string(1, parity_char(par))}, {"levels", levels}, {"N", dec.dim()}};
        if (const auto& conv = dec.convergence())
            entry["rounds"] = conv->rounds;
        computations_.push_back(std::move(entry));
    }

    void note(const std::string& key, json value) { extra_[key] = std::move(value); }
    void fail() { failed_ = true; }
    bool failed() const { return failed_; }

    void write_manifest(const std::vector<std::string>& args, const json& options)
    {
        fs::create_directories(c_.out);
        json m;
        m["tool"] = "rabi";
        m["version"] = tool_version;
        m["subcommand"] = subcommand_;
        m["args"] = args;
        m["options"] = options;
        m["tolerances"] = {{"tol", c_.tol}, {"nmax_cap", c_.nmax_cap}, {"nmax", c_.nmax}};
        m["computations"] = computations_;
        for (auto& [k, v] : extra_.items())
            m[k] = v;
        m["outputs"] = outputs_;
        m["options_digest"] = hex64(fnv1a(options.dump()));
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char ts[32];
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
        m["timestamp"] = ts;
        std::ofstream os(fs::path(c_.out) / "manifest.json", std::ios::binary);
        os << m.dump(2) << "\n";
    }

private:
    Common c_;
    std::string subcommand_;
    json computations_ = json::array();
    json outputs_ = json::array();
    json extra_ = json::object();
    bool failed_ = false;
};

std::vector<double> time_axis(double tmax_wt, int samples, double omega)
{
    std::vector<double> t = uniform_times(tmax_wt, samples);
    for (double& v : t)
        v /= omega;
    return t;
}

// --- spectrum -------------------------------------------------------------

void cmd_spectrum(Session& s, int levels)
{
    if (levels < 1)
        throw ParameterError("--levels must be >= 1");
    const ModelParams p = s.params();
    const Parity par = s.parity();
    if (p.g() == 0.0)
        throw ParameterError("spectrum needs --g > 0; at g = 0 the levels are n*omega +/- delta");
    SpectralDecomposition dec = s.spectrum("oracle", p, par, levels);
    const double shift = p.g() * p.gbar();
    const double x_max = dec.eigenvalue(levels - 1) + shift + 0.5 * p.omega();
    RootList roots = find_roots(p, par, x_max);
    if (roots.size() < levels)
        throw MissedRootError("G-function search found " + std::to_string(roots.size()) + " roots below x=" +
                              format_number(x_max) + " but the oracle has " + std::to_string(levels) +
                              " levels; rerun with a larger --nmax or report the parameters");
    Table t{"spectrum", {"n", "E_n", "x_n", "residual", "E_oracle"}, {}};
    double worst = 0.0;
    for (int n = 0; n < levels; ++n) {
        const Root& r = roots[n];
        worst = std::max(worst, std::abs(r.energy - dec.eigenvalue(n)));
        t.add({static_cast<long long>(n), r.energy, r.x, r.residual, dec.eigenvalue(n)});
    }
    if (worst > 1e-6 * p.omega())
        warn("G-function and oracle energies differ by " + format_number(worst) + "; check --tol and --nmax");
    s.note("max_root_oracle_difference", worst);
    s.write(t);
}

// --- gfunc-scan -----------------------------------------------------------

void cmd_gfunc_scan(Session& s, double xmin, double xmax, int points)
{
    if (points < 2 || !(xmax > xmin))
        throw ParameterError("gfunc-scan needs --points >= 2 and --xmax > --xmin");
    const ModelParams p = s.params();
    const Parity par = s.parity();
    GFunctionEvaluator ev(p, par);
    Table scan{"gfunc", {"x", "G", "terms", "pole_distance"}, {}};
    for (int i = 0; i < points; ++i) {
        const double x = xmin + (xmax - xmin) * i / (points - 1);
        double value = std::numeric_limits<double>::quiet_NaN();
        long long terms = 0;
        try {
            GEvaluation e = ev.evaluate(x);
            value = e.value;
            terms = e.terms;
        } catch (const PoleProximityError&) {
        }
        scan.add({x, value, terms, ev.pole_distance(x)});
    }
    s.write(scan);

    Table roots{"roots", {"n", "x_n", "E_n", "residual", "window"}, {}};
    RootList found = find_roots(p, par, xmax);
    int n = 0;
    for (const Root& r : found.roots) {
        if (r.x < xmin)
            continue;
        roots.add({static_cast<long long>(n++), r.x, r.energy, r.residual, static_cast<long long>(r.window)});
    }
    if (!found.near_misses.empty())
        s.note("near_misses", found.near_misses);
    s.write(roots);
}

// --- evolve ---------------------------------------------------------------

struct EvolveOpts {
    std::string init = "fock:0";
    double tmax = eight_pi;
    int samples = 2000;
    std::string observable = "photon";
    std::string variant = "exact";
    bool fig2 = false;
    bool fig3 = false;
    bool fig5 = false;
};

SpectralDecomposition evolve_spectrum(Session& s, const std::string& label, const ModelParams& p,
                                      const InitialState& init)
{
    return s.spectrum(label, p, init.parity(), levels_for(p, init.displacement()));
}

void distribution_rows(Table& t, const std::vector<Cell>& prefix, const PhotonDistribution& d)
{
    const Eigen::MatrixXd& P = d.probabilities;
    int hi = 0;
    for (int n = 0; n < P.cols(); ++n)
        if (P.col(n).maxCoeff() > 1e-10)
            hi = n;
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        for (int n = 0; n <= hi; ++n) {
            std::vector<Cell> row = prefix;
            row.push_back(d.times[i]);
            row.push_back(static_cast<long long>(n));
            row.push_back(P(static_cast<Eigen::Index>(i), n));
            t.add(std::move(row));
        }
    }
}

void cmd_evolve(Session& s, const EvolveOpts& o)
{
    const double omega = s.common().omega;
    const auto times = time_axis(o.tmax, o.samples, omega);
    auto scaled = [&](std::vector<double> t) {
        for (double& v : t)
            v *= omega;
        return t;
    };
    const std::vector<double> wt = scaled(times);
    const int presets = int(o.fig2) + int(o.fig3) + int(o.fig5);
    if (presets > 1)
        throw ParameterError("choose at most one of --fig2, --fig3, --fig5");

    if (o.fig2) {
        Table t{"fig2_revival", {"gbar", "init", "t", "P"}, {}};
        for (double gbar : {0.7, 1.2, 2.0}) {
            const ModelParams p = s.preset(gbar, 0.25);
            for (int m : {0, 4}) {
                InitialState init = InitialState::fock(m, Parity::Plus);
                SpectralDecomposition dec = evolve_spectrum(s, "fig2 " + init.describe(), p, init);
                TimeSeries ts = revival_series(dec, init.resolve(dec.dim()), times);
                for (std::size_t i = 0; i < wt.size(); ++i)
                    t.add({gbar, init.describe(), wt[i], ts.values[i]});
            }
        }
        s.write(t);
        return;
    }
    if (o.fig3) {
        Table t{"fig3_distribution", {"gbar", "init", "t", "n", "P"}, {}};
        for (double gbar : {0.7, 2.0}) {
            const ModelParams p = s.preset(gbar, 0.25);
            for (int m : {0, 16}) {
                InitialState init = InitialState::fock(m, Parity::Plus);
                SpectralDecomposition dec = evolve_spectrum(s, "fig3 " + init.describe(), p, init);
                PhotonDistribution d = photon_distribution(dec, init.resolve(dec.dim()), times);
                d.times = wt;
                distribution_rows(t, {gbar, init.describe()}, d);
            }
        }
        s.write(t);
        return;
    }
    if (o.fig5) {
        Table t{"fig5_variants", {"gbar", "variant", "t", "n_photon"}, {}};
        for (double gbar : {0.7, 2.0}) {
            const ModelParams p = s.preset(gbar, 0.25);
            InitialState init = InitialState::fock(0, Parity::Plus);
            SpectralDecomposition dec = evolve_spectrum(s, "fig5", p, init);
            for (ApproxVariant v :
                 {ApproxVariant::Exact, ApproxVariant::AdiabaticBasisExactSpectrum, ApproxVariant::FullAdiabatic}) {
                TimeSeries ts = approx_evolution(v, dec, init.resolve(dec.dim()), times);
                for (std::size_t i = 0; i < wt.size(); ++i)
                    t.add({gbar, variant_name(v), wt[i], ts.values[i]});
            }
        }
        s.write(t);
        return;
    }

    const ModelParams p = s.params();
    InitialState init = InitialState::parse(o.init, s.parity());
    const ApproxVariant variant = parse_variant(o.variant);
    if (variant != ApproxVariant::Exact && o.observable != "photon")
        throw ParameterError("--variant applies to --observable photon only");
    SpectralDecomposition dec = evolve_spectrum(s, init.describe(), p, init);
    const FockVector phi0 = init.resolve(dec.dim());
    if (o.observable == "photon") {
        TimeSeries ts = approx_evolution(variant, dec, phi0, times);
        Table t{"evolve", {"t", "n_photon"}, {}};
        for (std::size_t i = 0; i < wt.size(); ++i)
            t.add({wt[i], ts.values[i]});
        s.write(t);
    } else if (o.observable == "revival") {
        TimeSeries ts = revival_series(dec, phi0, times);
        Table t{"evolve", {"t", "P"}, {}};
        for (std::size_t i = 0; i < wt.size(); ++i)
            t.add({wt[i], ts.values[i]});
        s.write(t);
    } else if (o.observable == "distribution") {
        PhotonDistribution d = photon_distribution(dec, phi0, times);
        d.times = wt;
        Table t{"evolve", {"t", "n", "P"}, {}};
        distribution_rows(t, {}, d);
        s.write(t);
    } else {
        throw ParameterError("unknown --observable '" + o.observable + "' (photon, revival, distribution)");
    }
}

// --- sweep ----------------------------------------------------------------

struct SweepArgs {
    double gmin = 0.01, gmax = 1.0;
    int gpoints = 21;
    double dmin = 0.01, dmax = 1.0;
    int dpoints = 21;
    int levels = 8;
    bool fig1 = false;
};

void cmd_sweep(Session& s, SweepArgs a)
{
    if (a.fig1) {
        a.gmin = a.dmin = 0.01;
        a.gmax = a.dmax = 1.0;
        a.gpoints = a.dpoints = 100;
        a.levels = 8;
    }
    const auto gaxis = linear_axis(a.gmin, a.gmax, a.gpoints);
    const auto daxis = linear_axis(a.dmin, a.dmax, a.dpoints);
    SweepOptions opts;
    opts.parity = s.parity();
    opts.levels = a.levels;
    opts.tol = s.common().tol;
    opts.jobs = s.common().jobs;
    opts.nmax_cap = s.common().nmax_cap;
    SweepGrid grid = sweep_navg(gaxis, daxis, opts);

    Table exact{"sweep_exact", {"gbar", "dbar", "n_avg", "N"}, {}};
    Table jc{"sweep_jc", {"gbar", "dbar", "n_avg"}, {}};
    Table diff{"sweep_diff", {"gbar", "dbar", "difference"}, {}};
    const Eigen::MatrixXd d = grid.difference();
    int nmin = std::numeric_limits<int>::max();
    int nmax = 0;
    for (int i = 0; i < a.gpoints; ++i) {
        for (int j = 0; j < a.dpoints; ++j) {
            exact.add({gaxis[i], daxis[j], grid.exact(i, j), static_cast<long long>(grid.dims(i, j))});
            jc.add({gaxis[i], daxis[j], grid.jc(i, j)});
            diff.add({gaxis[i], daxis[j], d(i, j)});
            nmin = std::min(nmin, grid.dims(i, j));
            nmax = std::max(nmax, grid.dims(i, j));
        }
    }
    Table contour{"sweep_contour", {"segment", "gbar0", "dbar0", "gbar1", "dbar1"}, {}};
    long long k = 0;
    for (const ContourSegment& seg : zero_contour(grid))
        contour.add({k++, seg.gbar0, seg.dbar0, seg.gbar1, seg.dbar1});
    s.write(exact);
    s.write(jc);
    s.write(diff);
    s.write(contour);
    s.note("sweep", {{"cells", a.gpoints * a.dpoints},
                     {"failed_cells", grid.failed_cells},
                     {"N_min", nmin},
                     {"N_max", nmax},
                     {"initial_state", "fock:0"}});
    if (grid.failed_cells > 0) {
        warn(std::to_string(grid.failed_cells) + " sweep cells did not converge (NaN in output); raise RABI_NMAX_CAP");
        s.fail();
    }
}

// --- distances ------------------------------------------------------------

struct DistanceArgs {
    int n = 0;
    bool grid = false;
    double gmin = 0.1, gmax = 3.0;
    int gpoints = 30;
    double dmin = 0.0, dmax = 1.0;
    int dpoints = 21;
    bool fig6 = false;
};

void cmd_distances(Session& s, DistanceArgs a)
{
    if (a.n < 0)
        throw ParameterError("--n must be >= 0");
    if (a.fig6) {
        a.grid = true;
        a.gmin = 0.1;
        a.gmax = 3.0;
        a.gpoints = 30;
        a.dmin = 0.0;
        a.dmax = 1.0;
        a.dpoints = 21;
    }
    const Parity par = s.parity();
    Table t{"distances", {"gbar", "dbar", "n", "D", "DE", "near_crossing", "N"}, {}};
    if (!a.grid) {
        const ModelParams p = s.params();
        SpectralDecomposition dec = s.spectrum("distance", p, par, a.n + 8);
        Distance db = distance_basis(a.n, dec);
        Distance de = distance_energy(a.n, dec);
        t.add({p.gbar(), p.dbar(), static_cast<long long>(a.n), db.value, de.value / p.omega(),
               static_cast<long long>(db.near_crossing || de.near_crossing), static_cast<long long>(dec.dim())});
        s.write(t);
        return;
    }
    const auto gaxis = linear_axis(a.gmin, a.gmax, a.gpoints);
    const auto daxis = linear_axis(a.dmin, a.dmax, a.dpoints);
    const int cells = a.gpoints * a.dpoints;
    std::vector<std::vector<Cell>> rows(cells);
    const Common& c = s.common();
    parallel_for(cells, c.jobs, [&](int cell) {
        const int i = cell / a.dpoints;
        const int j = cell % a.dpoints;
        const ModelParams p = s.preset(gaxis[i], daxis[j]);
        SpectralDecomposition dec = c.nmax > 0 ? diagonalize(build_chain(p, par, c.nmax))
                                               : converged_spectrum(p, par, a.n + 8, c.tol, c.nmax_cap);
        Distance db = distance_basis(a.n, dec);
        Distance de = distance_energy(a.n, dec);
        rows[cell] = {gaxis[i],
                      daxis[j],
                      static_cast<long long>(a.n),
                      db.value,
                      de.value / p.omega(),
                      static_cast<long long>(db.near_crossing || de.near_crossing),
                      static_cast<long long>(dec.dim())};
    });
    t.rows = std::move(rows);
    s.note("grid", {{"gbar", {a.gmin, a.gmax, a.gpoints}}, {"dbar", {a.dmin, a.dmax, a.dpoints}}});
    s.write(t);
}

// --- projections ----------------------------------------------------------

struct ProjectionArgs {
    int window = 31;
    std::string bounds;
    double threshold = 1e-3;
    bool fig4 = false;
};

void cmd_projections(Session& s, ProjectionArgs a)
{
    ModelParams p = s.params();
    Parity par = s.parity();
    if (a.fig4) {
        p = s.preset(0.7, 0.25);
        par = Parity::Plus;
        a.window = 31;
        a.bounds = "0,16";
        a.threshold = 1e-3;
    }
    if (a.window < 1)
        throw ParameterError("--window must be >= 1");
    const std::vector<int> starts = parse_index_list(a.bounds, "--bounds");
    int levels = a.window;
    for (int n : starts)
        levels = std::max(levels, levels_for(p, std::sqrt(static_cast<double>(n))));
    SpectralDecomposition dec = s.spectrum("projections", p, par, levels);
    auto [shifted, fock] = projection_heatmaps(dec, a.window);
    Table t{"projections", {"basis", "m", "n", "value"}, {}};
    for (const ProjectionHeatmap* h : {&shifted, &fock})
        for (int n = 0; n < a.window; ++n)
            for (int m = 0; m < a.window; ++m)
                t.add({h->basis, static_cast<long long>(m), static_cast<long long>(n), h->values(m, n)});
    s.write(t);
    if (!starts.empty()) {
        Table b{"bounds", {"n_init", "n_min", "n_max", "threshold"}, {}};
        for (int n : starts) {
            auto [lo, hi] = wavepacket_bounds(n, dec, a.threshold);
            b.add({static_cast<long long>(n), static_cast<long long>(lo), static_cast<long long>(hi), a.threshold});
        }
        s.write(b);
    }
}

// --- wigner ---------------------------------------------------------------

struct WignerArgs {
    std::string levels = "0";
    std::string init;
    int points = 121;
    double extent = 0.0;
    bool fig7 = false;
};

void cmd_wigner(Session& s, WignerArgs a)
{
    ModelParams p = s.params();
    Parity par = s.parity();
    if (a.fig7) {
        p = s.preset(2.0, 0.25);
        par = Parity::Minus;
        a.levels = "0,1,2,3";
        a.init.clear();
        a.points = 121;
        a.extent = 0.0;
    }
    if (a.points < 2)
        throw ParameterError("--points must be >= 2");
    const std::vector<double> axis = a.extent > 0 ? linear_axis(-a.extent, a.extent, a.points)
                                                  : default_wigner_axis(p.gbar(), a.points);
    std::vector<FockVector> states;
    std::vector<std::string> labels;
    if (!a.init.empty()) {
        InitialState init = InitialState::parse(a.init, par);
        const int dim = minimum_safe_dim(init.displacement()) + 20;
        states.push_back(init.resolve(dim));
        labels.push_back(init.describe());
    } else {
        const std::vector<int> levels = parse_index_list(a.levels, "--levels");
        if (levels.empty())
            throw ParameterError("--levels needs at least one index");
        const int top = *std::max_element(levels.begin(), levels.end());
        SpectralDecomposition dec = s.spectrum("wigner", p, par, top + 8);
        for (int k : levels) {
            states.push_back(dec.eigenvector(k));
            labels.push_back(std::to_string(k));
        }
    }
    const auto grids = wigner_many(states, axis, axis, s.common().jobs);
    Table t{"wigner", {"state", "x", "p", "W"}, {}};
    Table summary{"wigner_summary", {"state", "normalization", "W_min", "W_max"}, {}};
    for (std::size_t k = 0; k < grids.size(); ++k) {
        const WignerGrid& w = grids[k];
        for (std::size_t i = 0; i < w.x.size(); ++i)
            for (std::size_t j = 0; j < w.p.size(); ++j)
                t.add({labels[k], w.x[i], w.p[j], w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
        summary.add({labels[k], w.normalization(), w.values.minCoeff(), w.values.maxCoeff()});
    }
    s.note("wigner_convention", wigner_convention);
    s.write(t);
    s.write(summary);
}

// --- cat ------------------------------------------------------------------

struct CatArgs {
    std::string alphas;
    double tmax = eight_pi;
    int samples = 2000;
    bool fig8 = false;
};

void cmd_cat(Session& s, CatArgs a)
{
    ModelParams p = s.params();
    Parity par = s.parity();
    if (a.fig8) {
        p = s.preset(2.0, 0.25);
        par = Parity::Plus;
        a.alphas = "1,1.5,2,2.5,3";
        a.tmax = eight_pi;
        a.samples = 2000;
    }
    std::vector<double> alphas = parse_list(a.alphas, "--alphas");
    if (alphas.empty())
        alphas.push_back(p.gbar());
    const double omega = p.omega();
    const auto times = time_axis(a.tmax, a.samples, omega);
    Table t{"cat", {"alpha", "t", "P"}, {}};
    Table summary{"cat_summary", {"alpha", "P_min", "P_mean", "omega_weight"}, {}};
    for (double alpha : alphas) {
        // α is measured along the shifted-oscillator direction: α = ḡ is |0;g⟩
        InitialState init = InitialState::coherent(-alpha, par);
        SpectralDecomposition dec = evolve_spectrum(s, "cat alpha=" + format_number(alpha), p, init);
        TimeSeries ts = revival_series(dec, init.resolve(dec.dim()), times);
        double mean = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            t.add({alpha, times[i] * omega, ts.values[i]});
            mean += ts.values[i];
        }
        mean /= static_cast<double>(times.size());
        // drop the endpoint so the samples tile whole periods
        std::vector<double> tt(times.begin(), times.end() - 1);
        std::vector<double> vv(ts.values.begin(), ts.values.end() - 1);
        summary.add({alpha, *std::min_element(ts.values.begin(), ts.values.end()), mean,
                     frequency_weight(tt, vv, omega)});
    }
    s.write(t);
    s.write(summary);
}

// --- command line ---------------------------------------------------------

std::string round_trip(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Doubles keep a round-trip default string so manifests replay exactly.
CLI::Option* add_real(CLI::App* sub, const std::string& name, double& target, const std::string& desc = "")
{
    return sub->add_option(name, target, desc)->default_str(round_trip(target));
}

struct Registered {
    CLI::App* app = nullptr;
    std::set<std::string> flags;
};

void add_common(CLI::App* sub, Common& c)
{
    add_real(sub, "--omega", c.omega, "oscillator frequency");
    add_real(sub, "--delta", c.delta, "qubit splitting Delta (energy units)");
    add_real(sub, "--g", c.g, "coupling g (energy units)");
    sub->add_option("--parity", c.parity, "parity chain: + or -")->capture_default_str();
    sub->add_option("--nmax", c.nmax, "fixed truncation dimension (0: converge automatically)")
        ->capture_default_str();
    add_real(sub, "--tol", c.tol, "eigenvalue convergence tolerance (units of omega)");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--format", c.format, "data format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("--jobs", c.jobs, "worker threads (0: all cores)")->capture_default_str();
    sub->add_option("--nmax-cap", c.nmax_cap, "largest truncation tried (env RABI_NMAX_CAP)")->capture_default_str();
    sub->add_option("--config", c.config, "flat key=value file of long option names; command-line flags win");
}

// Config entries become `--key=value` arguments unless the key was given on the
// command line. The file is read by CLI11's INI parser.
std::vector<std::string> merge_config(std::vector<std::string> args)
{
    std::string path;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0)
            continue;
        const std::string name = a.substr(2, a.find('=') - 2);
        given.insert(name);
        if (name == "config")
            path = a.find('=') != std::string::npos ? a.substr(a.find('=') + 1)
                                                    : (i + 1 < args.size() ? args[i + 1] : "");
    }
    if (path.empty())
        return args;
    if (!fs::is_regular_file(path))
        throw ParameterError("cannot read config file '" + path + "'");
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    } catch (const CLI::Error& e) {
        throw ParameterError("config file '" + path + "': " + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--")
            continue;
        if (!item.parents.empty())
            throw ParameterError("config file '" + path + "' must be flat key=value (found section '" +
                                 item.parents.front() + "')");
        if (item.name == "config" || given.count(item.name))
            continue;
        std::string value;
        for (const auto& in : item.inputs)
            value += (value.empty() ? "" : ",") + in;
        args.push_back("--" + item.name + "=" + (value.empty() ? "true" : value));
    }
    return args;
}

// Every option that shapes the data, as strings, so `replay` can rebuild the call.
json resolved_options(const Registered& r)
{
    json o = json::object();
    for (const CLI::Option* opt : r.app->get_options()) {
        if (opt->get_lnames().empty())
            continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config" || name == "out")
            continue;
        if (r.flags.count(name)) {
            if (opt->count() > 0)
                o[name] = "true";
            continue;
        }
        std::string value;
        if (opt->count() > 0) {
            for (const auto& res : opt->results())
                value += (value.empty() ? "" : ",") + res;
        } else {
            value = opt->get_default_str();
        }
        o[name] = value;
    }
    return o;
}

int replay(const std::string& manifest_path, const std::string& out)
{
    std::ifstream is(manifest_path);
    if (!is)
        throw ParameterError("cannot read manifest " + manifest_path);
    json m = json::parse(is, nullptr, false);
    if (m.is_discarded() || !m.contains("subcommand") || !m.contains("options"))
        throw ParameterError(manifest_path + " is not a rabi manifest");
    std::vector<std::string> args{m["subcommand"].get<std::string>()};
    for (auto& [k, v] : m["options"].items()) {
        const std::string value = v.get<std::string>();
        if (value.empty())
            continue;
        args.push_back("--" + k + "=" + value);
    }
    args.push_back("--out=" + out);
    return run(args);
}

const char* schema_help(const std::string& sub)
{
    static const std::map<std::string, const char*> help = {
        {"spectrum", "spectrum.csv: n,E_n,x_n,residual,E_oracle (E_n = x_n - g*gbar from G-function roots; "
                     "E_oracle from truncated diagonalization)"},
        {"gfunc-scan", "gfunc.csv: x,G,terms,pole_distance (G is nan next to a pole)\n"
                       "roots.csv: n,x_n,E_n,residual,window"},
        {"evolve", "evolve.csv: t,n_photon | t,P | t,n,P depending on --observable (t in units of 1/omega)\n"
                   "--fig2: fig2_revival.csv gbar,init,t,P (gbar 0.7,1.2,2.0; fock:0 and fock:4)\n"
                   "--fig3: fig3_distribution.csv gbar,init,t,n,P (gbar 0.7,2.0; fock:0 and fock:16)\n"
                   "--fig5: fig5_variants.csv gbar,variant,t,n_photon (gbar 0.7,2.0; fock:0)\n"
                   "presets use dbar = 0.25 and positive parity"},
        {"sweep", "sweep_exact.csv gbar,dbar,n_avg,N; sweep_jc.csv gbar,dbar,n_avg; sweep_diff.csv gbar,dbar,difference;\n"
                  "sweep_contour.csv segment,gbar0,dbar0,gbar1,dbar1 (zero level of exact - JC). Vacuum start.\n"
                  "--fig1: 100x100 grid over gbar, dbar in [0.01, 1]"},
        {"distances", "distances.csv: gbar,dbar,n,D,DE,near_crossing,N (DE in units of omega)\n"
                      "--fig6: gbar in [0.1, 3] (30) x dbar in [0, 1] (21)"},
        {"projections", "projections.csv: basis,m,n,value (|<m;basis|psi_n>|^2, basis shifted or fock)\n"
                        "bounds.csv: n_init,n_min,n_max,threshold\n"
                        "--fig4: gbar 0.7, dbar 0.25, window 31, bounds for n_init 0 and 16"},
        {"wigner", "wigner.csv: state,x,p,W; wigner_summary.csv: state,normalization,W_min,W_max\n"
                   "W(x,p) = (1/pi)<D(alpha) P D(alpha)^dag>, alpha = (x+ip)/sqrt2\n"
                   "--fig7: H- eigenstates 0..3 at gbar 2, dbar 0.25"},
        {"cat", "cat.csv: alpha,t,P; cat_summary.csv: alpha,P_min,P_mean,omega_weight\n"
                "initial state D(-alpha)|0>, so alpha = gbar is the shifted vacuum |0;g>\n"
                "--fig8: gbar 2, dbar 0.25, alpha 1,1.5,2,2.5,3"},
    };
    return help.at(sub);
}

} // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Exact spectrum and dynamics of the quantum Rabi model", "rabi"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    Common common;
    try {
        common.nmax_cap = env_nmax_cap();
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::map<std::string, Registered> subs;
    auto make = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->footer(schema_help(name));
        add_common(sub, common);
        subs[name].app = sub;
        return sub;
    };
    auto flag = [&](const std::string& sub, const std::string& name, bool& target, const std::string& desc) {
        subs[sub].app->add_flag("--" + name, target, desc);
        subs[sub].flags.insert(name);
    };

    int levels = 10;
    make("spectrum", "exact levels from G-function roots, checked against diagonalization")
        ->add_option("--levels", levels, "number of levels")
        ->capture_default_str();

    double xmin = -0.5, xmax = 10.5;
    int points = 2201;
    CLI::App* gs = make("gfunc-scan", "tabulate G(x) and its roots");
    add_real(gs, "--xmin", xmin, "scan start (energy units)");
    add_real(gs, "--xmax", xmax, "scan end (energy units)");
    gs->add_option("--points", points, "samples")->capture_default_str();

    EvolveOpts ev;
    CLI::App* evs = make("evolve", "time evolution inside one parity chain");
    evs->add_option("--init", ev.init, "fock:N, coherent:A, cat+:G or cat-:G")->capture_default_str();
    add_real(evs, "--tmax", ev.tmax, "final time omega*t");
    evs->add_option("--samples", ev.samples, "time samples")->capture_default_str();
    evs->add_option("--observable", ev.observable, "photon, revival or distribution")->capture_default_str();
    evs->add_option("--variant", ev.variant, "exact, adiabatic-basis or full-adiabatic")->capture_default_str();
    flag("evolve", "fig2", ev.fig2, "revival probabilities preset");
    flag("evolve", "fig3", ev.fig3, "photon distribution preset");
    flag("evolve", "fig5", ev.fig5, "approximation variants preset");

    SweepArgs sw;
    CLI::App* sws = make("sweep", "time-averaged photon number over (gbar, dbar), exact and JC");
    add_real(sws, "--gmin", sw.gmin);
    add_real(sws, "--gmax", sw.gmax);
    sws->add_option("--gpoints", sw.gpoints)->capture_default_str();
    add_real(sws, "--dmin", sw.dmin);
    add_real(sws, "--dmax", sw.dmax);
    sws->add_option("--dpoints", sw.dpoints)->capture_default_str();
    sws->add_option("--levels", sw.levels, "levels converged per cell")->capture_default_str();
    flag("sweep", "fig1", sw.fig1, "100x100 preset");

    DistanceArgs da;
    CLI::App* ds = make("distances", "basis and energy distances of the adiabatic approximation");
    ds->add_option("--n", da.n, "level index")->capture_default_str();
    add_real(ds, "--gmin", da.gmin);
    add_real(ds, "--gmax", da.gmax);
    ds->add_option("--gpoints", da.gpoints)->capture_default_str();
    add_real(ds, "--dmin", da.dmin);
    add_real(ds, "--dmax", da.dmax);
    ds->add_option("--dpoints", da.dpoints)->capture_default_str();
    flag("distances", "grid", da.grid, "evaluate on the (gbar, dbar) grid instead of --g/--delta");
    flag("distances", "fig6", da.fig6, "grid preset");

    ProjectionArgs pa;
    CLI::App* ps = make("projections", "eigenstate projections on shifted and Fock bases");
    ps->add_option("--window", pa.window, "levels shown")->capture_default_str();
    ps->add_option("--bounds", pa.bounds, "comma-separated initial Fock indices for wavepacket bounds")
        ->capture_default_str();
    add_real(ps, "--threshold", pa.threshold, "weight threshold for the bounds");
    flag("projections", "fig4", pa.fig4, "heatmap preset");

    WignerArgs wa;
    CLI::App* ws = make("wigner", "Wigner functions of chain eigenstates or of an --init state");
    ws->add_option("--levels", wa.levels, "comma-separated eigenstate indices")->capture_default_str();
    ws->add_option("--init", wa.init, "fock:N or coherent:A instead of eigenstates")->capture_default_str();
    ws->add_option("--points", wa.points, "grid points per axis")->capture_default_str();
    add_real(ws, "--extent", wa.extent, "half width of the grid (0: sqrt2*gbar + 4)");
    flag("wigner", "fig7", wa.fig7, "H- eigenstate preset");

    CatArgs ca;
    CLI::App* cs = make("cat", "revival probability of displaced vacua");
    cs->add_option("--alphas", ca.alphas, "comma-separated displacements (default: gbar)")->capture_default_str();
    add_real(cs, "--tmax", ca.tmax, "final time omega*t");
    cs->add_option("--samples", ca.samples, "time samples")->capture_default_str();
    flag("cat", "fig8", ca.fig8, "preset");

    std::string manifest;
    std::string replay_out;
    CLI::App* rp = app.add_subcommand("replay", "re-run a command from its manifest.json");
    rp->add_option("manifest", manifest, "manifest.json written by an earlier run")->required();
    rp->add_option("--out", replay_out, "output directory")->required();

    std::vector<std::string> reversed;
    try {
        const std::vector<std::string> merged = merge_config(args);
        reversed.assign(merged.rbegin(), merged.rend());
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        std::cerr << "error: " << e.what() << " (see --help)\n";
        return 1;
    }

    try {
        if (rp->parsed())
            return replay(manifest, replay_out);
        std::string name;
        for (auto& [n, r] : subs)
            if (r.app->parsed())
                name = n;
        if (common.jobs < 0)
            throw ParameterError("--jobs must be >= 0");
        if (common.nmax < 0)
            throw ParameterError("--nmax must be >= 0");
        if (!(common.tol > 0))
            throw ParameterError("--tol must be positive");
        parse_parity(common.parity);
        Session s(common, name);
        if (name == "spectrum")
            cmd_spectrum(s, levels);
        else if (name == "gfunc-scan")
            cmd_gfunc_scan(s, xmin, xmax, points);
        else if (name == "evolve")
            cmd_evolve(s, ev);
        else if (name == "sweep")
            cmd_sweep(s, sw);
        else if (name == "distances")
            cmd_distances(s, da);
        else if (name == "projections")
            cmd_projections(s, pa);
        else if (name == "wigner")
            cmd_wigner(s, wa);
        else if (name == "cat")
            cmd_cat(s, ca);
        s.write_manifest(args, resolved_options(subs.at(name)));
        return s.failed() ? 2 : 0;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ComputationError& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 2;
    }
}

} // namespace rabi::cli
