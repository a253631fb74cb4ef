#include "rabi/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rabi/error.hpp"

namespace rabi {

namespace {

constexpr double rescale_threshold = 1e250;
constexpr double tail_ratio = 1e-17;

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

GFunctionEvaluator::GFunctionEvaluator(ModelParams params, Parity parity)
    : params_(params), parity_(parity), gbar_(params.gbar()), dbar_(params.dbar())
{
    if (gbar_ == 0.0)
        throw ParameterError("G-function is singular at g = 0; use the chain diagonalization instead");
}

double GFunctionEvaluator::pole_distance(double x) const
{
    if (dbar_ == 0.0)
        return std::numeric_limits<double>::infinity();
    double xb = x / params_.omega();
    double m = std::max(0.0, std::round(xb));
    return std::abs(xb - m);
}

std::vector<double> GFunctionEvaluator::k_coefficients(double x, int terms) const
{
    if (terms < 0)
        throw ParameterError("number of K coefficients must be >= 0");
    if (pole_distance(x) < pole_guard)
        throw PoleProximityError("x=" + fmt_double(x) + " lies within " + fmt_double(pole_guard) +
                                 " omega of a pole of G");
    const double xb = x / params_.omega();
    auto f = [&](int m) {
        double pole_term = dbar_ == 0.0 ? 0.0 : dbar_ * dbar_ / (xb - m);
        return 2.0 * gbar_ + (m - xb + pole_term) / (2.0 * gbar_);
    };
    std::vector<double> k(terms + 1);
    k[0] = 1.0;
    if (terms >= 1)
        k[1] = f(0);
    for (int m = 2; m <= terms; ++m)
        k[m] = (f(m - 1) * k[m - 1] - k[m - 2]) / m;
    return k;
}

GEvaluation GFunctionEvaluator::series(double xb, int pole) const
{
    // Works on k_m = K_m ḡ^m: m k_m = ḡ f_{m−1} k_{m−1} − ḡ² k_{m−2}.
    const double s = sign(parity_);
    auto f = [&](int m) {
        double pole_term = dbar_ == 0.0 ? 0.0 : dbar_ * dbar_ / (xb - m);
        return 2.0 * gbar_ + (m - xb + pole_term) / (2.0 * gbar_);
    };
    auto bracket = [&](int m) { return dbar_ == 0.0 ? 1.0 : 1.0 - s * dbar_ / (xb - m); };

    double k_prev = 0.0; // k_{m−1}
    double k_cur = 1.0;  // k_m
    double sum = bracket(0);
    double max_term = std::abs(sum);
    double last_term = sum;
    int rescales = 0;
    int m = 0;
    while (true) {
        ++m;
        if (m > max_terms)
            throw ComputationError("G-function series did not converge within " + std::to_string(max_terms) +
                                   " terms at x=" + fmt_double(xb * params_.omega()));
        double k_next = (gbar_ * f(m - 1) * k_cur - gbar_ * gbar_ * k_prev) / m;
        k_prev = k_cur;
        k_cur = k_next;
        double term = k_cur * bracket(m);
        sum += term;
        max_term = std::max(max_term, std::abs(term));
        if (std::abs(k_cur) > rescale_threshold) {
            k_cur /= rescale_threshold;
            k_prev /= rescale_threshold;
            sum /= rescale_threshold;
            max_term /= rescale_threshold;
            term /= rescale_threshold;
            ++rescales;
        }
        bool past_growth = m >= min_terms && m > xb + 2.0;
        if (past_growth && std::abs(term) <= tail_ratio * max_term && std::abs(last_term) <= tail_ratio * max_term)
            break;
        last_term = term;
    }
    if (pole >= 0)
        sum *= (xb - pole);
    double value = sum;
    for (int i = 0; i < rescales; ++i)
        value *= rescale_threshold; // overflows to ±inf with the right sign
    return {value, m + 1, max_term};
}

GEvaluation GFunctionEvaluator::evaluate(double x) const
{
    if (pole_distance(x) < pole_guard)
        throw PoleProximityError("x=" + fmt_double(x) + " lies within " + fmt_double(pole_guard) +
                                 " omega of a pole of G");
    return series(x / params_.omega(), -1);
}

double GFunctionEvaluator::regularized(double x, int pole) const
{
    double xb = x / params_.omega();
    if (dbar_ != 0.0 && xb == static_cast<double>(pole))
        throw PoleProximityError("regularized G evaluated exactly at its pole");
    return series(xb, pole).value;
}

std::vector<double> k_coefficients(double x, const ModelParams& params, int terms)
{
    // K_m does not depend on the parity.
    return GFunctionEvaluator(params, Parity::Plus).k_coefficients(x, terms);
}

double g_value(double x, Parity parity, const ModelParams& params)
{
    return GFunctionEvaluator(params, parity).value(x);
}

namespace {

int sign_of(double v)
{
    return (v > 0) - (v < 0);
}

} // namespace

RootList find_roots(const ModelParams& params, Parity parity, double x_max, const RootSearchOptions& opts)
{
    if (!(x_max > 0))
        throw ParameterError("x_max must be positive");
    if (opts.points_per_unit < 4)
        throw ParameterError("root scan needs at least 4 points per unit of omega");
    const GFunctionEvaluator eval(params, parity);
    const double omega = params.omega();
    const double dbar = params.dbar();
    const double xb_max = x_max / omega;
    const int per = opts.points_per_unit;
    const bool has_poles = dbar != 0.0;

    // Grid x_k = (k + ½)/P − ½ never hits an integer. All roots obey x ≥ −Δ̄.
    const long k_lo = -static_cast<long>(std::ceil(dbar * per)) - 1;
    const long k_hi = static_cast<long>(std::floor((xb_max + 0.5) * per - 0.5));
    auto point = [&](long k) { return (k + 0.5) / per - 0.5; };
    auto window_of = [&](long k) { return k < 0 ? 0 : static_cast<int>(k / per); };

    // (x/ω − m) G(x) in window m. At Δ = 0 the series itself has no zeros and
    // the levels are the Δ → 0 limit of the roots, i.e. the zeros of this factor.
    auto fn = [&](double xb, int m) { return eval.regularized(xb * omega, m); };

    RootList out;
    auto record_root = [&](double xb, int m) {
        Root r;
        r.x = xb * omega;
        r.energy = r.x - params.g() * params.gbar();
        r.window = m;
        r.residual = std::abs(has_poles ? eval.regularized(r.x, -1) : fn(xb, m));
        out.roots.push_back(r);
    };
    auto bisect = [&](double a, double fa, double b, int m) {
        int sa = sign_of(fa);
        for (int it = 0; it < 200 && b - a > opts.x_tol; ++it) {
            double c = 0.5 * (a + b);
            if (has_poles && c == static_cast<double>(m))
                c = a + 0.25 * (b - a);
            if (c <= a || c >= b)
                break;
            double fc = fn(c, m);
            if (fc == 0.0)
                return c;
            if (sign_of(fc) == sa)
                a = c;
            else
                b = c;
        }
        return 0.5 * (a + b);
    };

    long k = k_lo;
    while (k <= k_hi) {
        const int m = window_of(k);
        // points of window m plus the first point of window m+1, all regularized at m
        std::vector<double> xs;
        std::vector<double> vs;
        long k_end = k;
        while (k_end <= k_hi && window_of(k_end) == m)
            ++k_end;
        for (long j = k; j < k_end; ++j) {
            xs.push_back(point(j));
            vs.push_back(fn(xs.back(), m));
        }
        if (k_end <= k_hi) {
            xs.push_back(point(k_end));
            vs.push_back(fn(xs.back(), m));
        }
        double vmax = 0.0;
        for (double v : vs)
            vmax = std::max(vmax, std::abs(v));
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            if (vs[i] == 0.0) {
                record_root(xs[i], m);
                continue;
            }
            if (vs[i + 1] != 0.0 && sign_of(vs[i]) != sign_of(vs[i + 1]))
                record_root(bisect(xs[i], vs[i], xs[i + 1], m), m);
            if (i > 0 && std::abs(vs[i]) < std::abs(vs[i - 1]) && std::abs(vs[i]) < std::abs(vs[i + 1]) &&
                sign_of(vs[i - 1]) == sign_of(vs[i]) && sign_of(vs[i + 1]) == sign_of(vs[i]) &&
                std::abs(vs[i]) < opts.near_miss * vmax)
                out.near_misses.push_back(xs[i] * omega);
        }
        k = k_end;
    }

    std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) { return a.x < b.x; });
    auto last = std::unique(out.roots.begin(), out.roots.end(), [&](const Root& a, const Root& b) {
        return std::abs(a.x - b.x) <= 10.0 * opts.x_tol * omega;
    });
    out.roots.erase(last, out.roots.end());

    if (opts.cross_check) {
        const double x_last = point(k_hi) * omega;
        int levels = out.size() + 4;
        SpectralDecomposition oracle = converged_spectrum(params, parity, levels, 1e-9);
        int expected = 0;
        for (int i = 0; i < oracle.dim(); ++i)
            if (oracle.eigenvalue(i) + params.g() * params.gbar() < x_last)
                ++expected;
        int found = 0;
        for (const Root& r : out.roots)
            if (r.x < x_last)
                ++found;
        if (expected != found)
            throw MissedRootError("G-function scan found " + std::to_string(found) + " roots below x=" +
                                  fmt_double(x_last) + " but diagonalization has " + std::to_string(expected) +
                                  " levels there");
    }
    return out;
}

RootEigenstate eigenstate_from_root(double x_n, const ModelParams& params, Parity parity, int dim,
                                    double min_fidelity)
{
    if (dim < 2)
        throw ParameterError("eigenstate dimension must be >= 2");
    if (params.delta() == 0.0)
        throw ParameterError("root representation degenerates at delta = 0 (eigenstates are |n;g>)");
    const GFunctionEvaluator eval(params, parity);
    if (eval.pole_distance(x_n) < GFunctionEvaluator::pole_guard)
        throw PoleProximityError("root x=" + fmt_double(x_n) + " is within " +
                                 fmt_double(GFunctionEvaluator::pole_guard) + " omega of a pole");
    const double gb = params.gbar();
    const double db = params.dbar();
    const double xb = x_n / params.omega();
    auto f = [&](int m) { return 2.0 * gb + (m - xb + db * db / (xb - m)) / (2.0 * gb); };

    // Minimal solution of the K recurrence by backward recurrence from deep in
    // the tail, K_{m−2} = f_{m−1} K_{m−1} − m K_m, then scaled to K_0 = 1.
    const int top = dim + 100 + static_cast<int>(std::ceil(4.0 * gb * gb + xb));
    std::vector<double> kk(top + 2, 0.0);
    std::vector<int> scale(top + 2, 0); // number of rescales applied after entry m was produced
    kk[top] = 1e-300;
    int rescales = 0;
    for (int m = top + 1; m >= 2; --m) {
        kk[m - 2] = f(m - 1) * kk[m - 1] - m * kk[m];
        if (std::abs(kk[m - 2]) > rescale_threshold) {
            kk[m - 2] /= rescale_threshold;
            kk[m - 1] /= rescale_threshold;
            ++rescales;
            scale[m - 1] = rescales;
        }
        scale[m - 2] = rescales;
    }
    // log|K_m| relative to the final scale
    std::vector<double> logk(dim);
    std::vector<int> sgn(dim);
    const double log_thr = std::log(rescale_threshold);
    for (int m = 0; m < dim; ++m) {
        double v = kk[m];
        sgn[m] = sign_of(v);
        // entries produced before later rescales are too large by (rescales − scale[m]) factors
        logk[m] = (v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(v))) -
                  (rescales - scale[m]) * log_thr;
    }
    // c_m = K_m Δ √(m!) / (x_n − mω); Δ and ω are common factors.
    std::vector<double> logc(dim);
    double logmax = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < dim; ++m) {
        logc[m] = logk[m] + 0.5 * log_factorial(m) - std::log(std::abs(xb - m));
        logmax = std::max(logmax, logc[m]);
    }
    Eigen::VectorXd c(dim);
    const int s0 = sgn[0];
    for (int m = 0; m < dim; ++m) {
        double mag = std::exp(logc[m] - logmax);
        int s = sgn[m] * s0 * ((xb - m) > 0 ? 1 : -1);
        c[m] = s * mag;
    }
    Eigen::VectorXd psi = displacement_real(-gb, dim) * c;
    psi.normalize();

    SpectralDecomposition oracle = diagonalize(build_chain(params, parity, dim));
    const double e_target = x_n - params.g() * gb;
    Eigen::Index level = 0;
    (oracle.eigenvalues().array() - e_target).abs().minCoeff(&level);
    double ov = oracle.eigenvectors().col(level).dot(psi);
    if (ov < 0) {
        psi = -psi;
        ov = -ov;
    }
    double fidelity = ov * ov;
    if (fidelity < min_fidelity)
        throw RepresentationMismatchError("root representation of level " + std::to_string(level) + " at x=" +
                                          fmt_double(x_n) + " has fidelity " + fmt_double(fidelity) +
                                          " with the diagonalization eigenvector (required " +
                                          fmt_double(min_fidelity) + ")");
    return {FockVector(psi.cast<cplx>()), fidelity, static_cast<int>(level)};
}

} // namespace rabi
