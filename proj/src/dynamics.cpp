#include "rabi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rabi/error.hpp"
#include "rabi/parallel.hpp"

namespace rabi {

InitialState InitialState::fock(int m, Parity parity)
{
    if (m < 0)
        throw ParameterError("Fock index must be >= 0");
    InitialState s;
    s.kind_ = Kind::Fock;
    s.index_ = m;
    s.parity_ = parity;
    return s;
}

InitialState InitialState::coherent(double alpha, Parity parity)
{
    InitialState s;
    s.kind_ = Kind::Coherent;
    s.amplitude_ = alpha;
    s.parity_ = parity;
    return s;
}

InitialState InitialState::cat_plus(double gbar)
{
    InitialState s;
    s.kind_ = Kind::CatPlus;
    s.amplitude_ = gbar;
    s.parity_ = Parity::Plus;
    return s;
}

InitialState InitialState::cat_minus(double gbar)
{
    InitialState s;
    s.kind_ = Kind::CatMinus;
    s.amplitude_ = gbar;
    s.parity_ = Parity::Minus;
    return s;
}

InitialState InitialState::custom(FockVector phi, Parity parity)
{
    InitialState s;
    s.kind_ = Kind::Custom;
    s.custom_ = std::move(phi);
    s.parity_ = parity;
    return s;
}

InitialState InitialState::parse(const std::string& text, Parity parity)
{
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ParameterError("initial state '" + text + "' must look like fock:N, coherent:A, cat+:G or cat-:G");
    std::string kind = text.substr(0, colon);
    std::string arg = text.substr(colon + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(arg, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != arg.size() || arg.empty())
        throw ParameterError("initial state '" + text + "': '" + arg + "' is not a number");
    if (kind == "fock") {
        if (value < 0 || value != std::floor(value))
            throw ParameterError("fock index must be a non-negative integer, got '" + arg + "'");
        return fock(static_cast<int>(value), parity);
    }
    if (kind == "coherent")
        return coherent(value, parity);
    if (kind == "cat+" || kind == "cat")
        return cat_plus(value);
    if (kind == "cat-")
        return cat_minus(value);
    throw ParameterError("unknown initial state kind '" + kind + "' (fock, coherent, cat+, cat-)");
}

std::string InitialState::describe() const
{
    char buf[64];
    switch (kind_) {
    case Kind::Fock:
        return "fock:" + std::to_string(index_);
    case Kind::Coherent:
        std::snprintf(buf, sizeof buf, "coherent:%.12g", amplitude_);
        return buf;
    case Kind::CatPlus:
        std::snprintf(buf, sizeof buf, "cat+:%.12g", amplitude_);
        return buf;
    case Kind::CatMinus:
        std::snprintf(buf, sizeof buf, "cat-:%.12g", amplitude_);
        return buf;
    case Kind::Custom:
        return "custom";
    }
    return "custom";
}

double InitialState::displacement() const
{
    switch (kind_) {
    case Kind::Fock:
        return std::sqrt(static_cast<double>(index_));
    case Kind::Coherent:
    case Kind::CatPlus:
    case Kind::CatMinus:
        return std::abs(amplitude_);
    case Kind::Custom:
        return std::sqrt(std::max(0.0, photon_expectation(custom_)));
    }
    return 0.0;
}

FockVector InitialState::resolve(int dim) const
{
    switch (kind_) {
    case Kind::Fock:
        return FockVector::basis(index_, dim);
    case Kind::Coherent:
        return coherent_vector(amplitude_, dim).normalized();
    case Kind::CatPlus:
    case Kind::CatMinus:
        // |0;g⟩ = D(−ḡ)|0⟩ = e^{−ḡ²/2} e^{−ḡ a†}|0⟩
        return coherent_vector(-amplitude_, dim).normalized();
    case Kind::Custom:
        if (custom_.dim() > dim)
            throw ParameterError("custom initial state larger than truncation");
        return custom_.resized(dim).normalized();
    }
    throw ParameterError("unresolvable initial state");
}

Propagator::Propagator(const SpectralDecomposition& decomp, const FockVector& phi0)
{
    coeff_ = decomp.project(phi0);
    std::vector<int> active;
    for (int k = 0; k < decomp.dim(); ++k)
        if (std::abs(coeff_[k]) > 1e-15)
            active.push_back(k);
    const int n = static_cast<int>(active.size());
    active_energies_.resize(n);
    active_coeff_.resize(n);
    active_vectors_.resize(decomp.dim(), n);
    for (int j = 0; j < n; ++j) {
        active_energies_[j] = decomp.eigenvalue(active[j]);
        active_coeff_[j] = coeff_[active[j]];
        active_vectors_.col(j) = decomp.eigenvectors().col(active[j]);
    }
}

FockVector Propagator::at(double t) const
{
    Eigen::VectorXcd phased(active_coeff_.size());
    for (Eigen::Index j = 0; j < phased.size(); ++j)
        phased[j] = std::polar(1.0, -active_energies_[j] * t) * active_coeff_[j];
    Eigen::VectorXcd out = active_vectors_.cast<cplx>() * phased;
    return FockVector(std::move(out));
}

cplx Propagator::autocorrelation(double t) const
{
    cplx sum = 0.0;
    for (Eigen::Index j = 0; j < active_coeff_.size(); ++j)
        sum += std::norm(active_coeff_[j]) * std::polar(1.0, -active_energies_[j] * t);
    return sum;
}

FockVector evolve(const SpectralDecomposition& decomp, const FockVector& phi0, double t)
{
    if (phi0.dim() != decomp.dim())
        throw ParameterError("initial state dimension " + std::to_string(phi0.dim()) +
                             " does not match decomposition " + std::to_string(decomp.dim()));
    return Propagator(decomp, phi0).at(t);
}

double photon_expectation(const FockVector& phi)
{
    double n = 0.0;
    for (int k = 0; k < phi.dim(); ++k)
        n += k * std::norm(phi[k]);
    return n;
}

int levels_for(const ModelParams& params, double displacement)
{
    const double r = std::abs(displacement) + params.gbar() + 3.0;
    return static_cast<int>(std::ceil(r * r)) + 10;
}

SpectralDecomposition dynamics_spectrum(const ModelParams& params, const InitialState& init, double tol,
                                        int nmax_cap)
{
    return converged_spectrum(params, init.parity(), levels_for(params, init.displacement()), tol, nmax_cap);
}

double analytic_delta0(int m, double gbar, double omega_t)
{
    if (m < 0)
        throw ParameterError("Fock index must be >= 0");
    return m + 2.0 * gbar * gbar * (1.0 - std::cos(omega_t));
}

double revival_probability(const SpectralDecomposition& decomp, const FockVector& phi0, double t)
{
    return std::norm(Propagator(decomp, phi0).autocorrelation(t));
}

std::vector<double> uniform_times(double t_max, int samples)
{
    if (samples < 2)
        throw ParameterError("need at least 2 time samples");
    if (!(t_max > 0))
        throw ParameterError("t_max must be positive");
    std::vector<double> t(samples);
    for (int i = 0; i < samples; ++i)
        t[i] = t_max * i / (samples - 1);
    return t;
}

double frequency_weight(const std::vector<double>& times, const std::vector<double>& values, double freq)
{
    if (times.size() != values.size() || times.size() < 2)
        throw ParameterError("frequency_weight needs matching time and value samples");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    double scale = 0.0;
    for (double v : values) {
        mean += v;
        scale = std::max(scale, std::abs(v));
    }
    mean /= n;
    double power = 0.0;
    cplx acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double d = values[j] - mean;
        power += d * d;
        acc += d * std::exp(cplx(0.0, -freq * times[j]));
    }
    // fluctuations at the level of the rounding in the mean count as constant
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (power <= n * floor * floor)
        return 0.0;
    return 2.0 * std::norm(acc) / (n * power);
}

namespace {

void check_times(const std::vector<double>& times)
{
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]))
            throw ParameterError("time grid contains a non-finite value");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw ParameterError("time grid must be strictly increasing");
    }
}

} // namespace

TimeSeries photon_number_series(const SpectralDecomposition& decomp, const FockVector& phi0,
                                const std::vector<double>& times)
{
    check_times(times);
    Propagator prop(decomp, phi0);
    TimeSeries ts;
    ts.times = times;
    ts.observable = "photon_number";
    ts.parity = decomp.parity();
    ts.values.reserve(times.size());
    for (double t : times)
        ts.values.push_back(photon_expectation(prop.at(t)));
    return ts;
}

TimeSeries revival_series(const SpectralDecomposition& decomp, const FockVector& phi0,
                          const std::vector<double>& times)
{
    check_times(times);
    Propagator prop(decomp, phi0);
    TimeSeries ts;
    ts.times = times;
    ts.observable = "revival_probability";
    ts.parity = decomp.parity();
    ts.values.reserve(times.size());
    for (double t : times)
        ts.values.push_back(std::norm(prop.autocorrelation(t)));
    return ts;
}

PhotonDistribution photon_distribution(const SpectralDecomposition& decomp, const FockVector& phi0,
                                       const std::vector<double>& times)
{
    check_times(times);
    Propagator prop(decomp, phi0);
    PhotonDistribution out;
    out.times = times;
    out.probabilities.resize(static_cast<Eigen::Index>(times.size()), decomp.dim());
    for (std::size_t i = 0; i < times.size(); ++i)
        out.probabilities.row(static_cast<Eigen::Index>(i)) = prop.at(times[i]).amplitudes().cwiseAbs2().transpose();
    return out;
}

TimeAverage time_avg_photon(const SpectralDecomposition& decomp, const FockVector& phi0, double degeneracy_tol)
{
    const double omega = decomp.params().omega();
    Eigen::VectorXcd c = decomp.project(phi0);
    std::vector<int> populated;
    for (int k = 0; k < decomp.dim(); ++k)
        if (std::abs(c[k]) > 1e-10)
            populated.push_back(k);

    TimeAverage out;
    out.min_populated_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < populated.size(); ++j)
        out.min_populated_gap = std::min(out.min_populated_gap,
                                         decomp.eigenvalue(populated[j]) - decomp.eigenvalue(populated[j - 1]));

    if (out.min_populated_gap >= degeneracy_tol * omega) {
        double sum = 0.0;
        for (int k = 0; k < decomp.dim(); ++k) {
            double w = std::norm(c[k]);
            if (w == 0.0)
                continue;
            const auto v = decomp.eigenvectors().col(k);
            double nk = 0.0;
            for (int n = 0; n < decomp.dim(); ++n)
                nk += n * v[n] * v[n];
            sum += w * nk;
        }
        out.value = sum;
        return out;
    }

    // Degenerate populated levels: trapezoidal average of n(t) over ωt ∈ [0, 2000].
    out.diagonal_ensemble = false;
    out.window = 2000.0 / omega;
    const int samples = 20001;
    Propagator prop(decomp, phi0);
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        double t = out.window * i / (samples - 1);
        double w = (i == 0 || i == samples - 1) ? 0.5 : 1.0;
        acc += w * photon_expectation(prop.at(t));
    }
    out.value = acc / (samples - 1);
    warn("time_avg_photon: populated levels closer than " + std::to_string(degeneracy_tol) +
         " omega; used a direct average over omega*t in [0, 2000]");
    return out;
}

double jc_time_avg(const ModelParams& params)
{
    const double g = params.g();
    if (g == 0.0)
        return 0.0;
    const double detune = params.delta() - 0.5 * params.omega();
    const double root = std::hypot(detune, g);
    // d = detune + root, rewritten without cancellation for detune < 0
    const double d = detune > 0.0 ? detune + root : g * g / (root - detune);
    // 2g²d²/(g² + d²)² = 2r²/(1 + r²)², symmetric under r → 1/r; exactly 1/2 at d = |g|
    const double r = std::min(d / std::abs(g), std::abs(g) / d);
    const double s = 1.0 + r * r;
    return 2.0 * r * r / (s * s);
}

SweepGrid sweep_navg(const std::vector<double>& gbar_axis, const std::vector<double>& dbar_axis,
                     const SweepOptions& opts)
{
    if (gbar_axis.empty() || dbar_axis.empty())
        throw ParameterError("sweep axes must be non-empty");
    const int ng = static_cast<int>(gbar_axis.size());
    const int nd = static_cast<int>(dbar_axis.size());
    SweepGrid grid;
    grid.gbar = gbar_axis;
    grid.dbar = dbar_axis;
    grid.exact = Eigen::MatrixXd::Constant(ng, nd, std::numeric_limits<double>::quiet_NaN());
    grid.jc = Eigen::MatrixXd::Zero(ng, nd);
    grid.dims = Eigen::MatrixXi::Zero(ng, nd);
    std::vector<char> failed(static_cast<std::size_t>(ng) * nd, 0);

    parallel_for(ng * nd, opts.jobs, [&](int cell) {
        const int i = cell / nd;
        const int j = cell % nd;
        const ModelParams p = ModelParams::dimensionless(gbar_axis[i], dbar_axis[j]);
        grid.jc(i, j) = jc_time_avg(p);
        try {
            SpectralDecomposition dec = converged_spectrum(p, opts.parity, opts.levels, opts.tol, opts.nmax_cap);
            grid.exact(i, j) = time_avg_photon(dec, FockVector::basis(0, dec.dim())).value;
            grid.dims(i, j) = dec.dim();
        } catch (const ComputationError&) {
            failed[cell] = 1;
        }
    });
    grid.failed_cells = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
    return grid;
}

std::vector<ContourSegment> zero_contour(const SweepGrid& grid)
{
    const Eigen::MatrixXd diff = grid.difference();
    const int ng = static_cast<int>(grid.gbar.size());
    const int nd = static_cast<int>(grid.dbar.size());
    std::vector<ContourSegment> out;
    struct P {
        double g, d;
    };
    // corners in cyclic order: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
    for (int i = 0; i + 1 < ng; ++i) {
        for (int j = 0; j + 1 < nd; ++j) {
            const int ci[4] = {i, i + 1, i + 1, i};
            const int cj[4] = {j, j, j + 1, j + 1};
            double v[4];
            bool ok = true;
            for (int c = 0; c < 4; ++c) {
                v[c] = diff(ci[c], cj[c]);
                ok = ok && std::isfinite(v[c]);
            }
            if (!ok)
                continue;
            std::vector<P> hits;
            for (int e = 0; e < 4; ++e) {
                int a = e;
                int b = (e + 1) % 4;
                bool sa = v[a] >= 0;
                bool sb = v[b] >= 0;
                if (sa == sb)
                    continue;
                double t = v[a] / (v[a] - v[b]);
                hits.push_back({grid.gbar[ci[a]] + t * (grid.gbar[ci[b]] - grid.gbar[ci[a]]),
                                grid.dbar[cj[a]] + t * (grid.dbar[cj[b]] - grid.dbar[cj[a]])});
            }
            if (hits.size() == 2) {
                out.push_back({hits[0].g, hits[0].d, hits[1].g, hits[1].d});
            } else if (hits.size() == 4) {
                // saddle: pair by the cell-centre sign
                double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                if ((centre >= 0) == (v[0] >= 0)) {
                    out.push_back({hits[0].g, hits[0].d, hits[1].g, hits[1].d});
                    out.push_back({hits[2].g, hits[2].d, hits[3].g, hits[3].d});
                } else {
                    out.push_back({hits[0].g, hits[0].d, hits[3].g, hits[3].d});
                    out.push_back({hits[1].g, hits[1].d, hits[2].g, hits[2].d});
                }
            }
        }
    }
    return out;
}

} // namespace rabi
