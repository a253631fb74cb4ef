#include "rabi/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rabi/error.hpp"
#include "rabi/parallel.hpp"

namespace rabi {

double WignerGrid::normalization() const
{
    if (x.size() < 2 || p.size() < 2)
        return 0.0;
    const double dx = (x.back() - x.front()) / (x.size() - 1);
    const double dp = (p.back() - p.front()) / (p.size() - 1);
    return values.sum() * dx * dp;
}

std::vector<double> linear_axis(double lo, double hi, int points)
{
    if (points < 2 || !(hi > lo))
        throw ParameterError("axis needs >= 2 points and hi > lo");
    std::vector<double> a(points);
    for (int i = 0; i < points; ++i)
        a[i] = lo + (hi - lo) * i / (points - 1);
    return a;
}

std::vector<double> default_wigner_axis(double gbar, int points)
{
    const double half = std::sqrt(2.0) * std::abs(gbar) + 4.0;
    return linear_axis(-half, half, points);
}

namespace {

int effective_dim(const FockVector& phi)
{
    const auto& c = phi.amplitudes();
    double cmax = c.cwiseAbs().maxCoeff();
    int last = 0;
    for (int n = 0; n < phi.dim(); ++n)
        if (std::abs(c[n]) > 1e-14 * cmax)
            last = n;
    return last + 1;
}

void check_coverage(const FockVector& phi, const std::vector<double>& xs, const std::vector<double>& ps)
{
    double n1 = 0.0;
    double n2 = 0.0;
    for (int n = 0; n < phi.dim(); ++n) {
        double w = std::norm(phi[n]);
        n1 += n * w;
        n2 += static_cast<double>(n) * n * w;
    }
    double need = n1 + 3.0 * std::sqrt(n2);
    double reach = std::min({std::abs(xs.front()), std::abs(xs.back()), std::abs(ps.front()), std::abs(ps.back())});
    double alpha2 = 0.5 * reach * reach;
    if (alpha2 < need)
        warn("wigner grid reaches |alpha|^2=" + std::to_string(alpha2) + " but the state needs about " +
             std::to_string(need) + "; the normalization will be short");
}

} // namespace

std::vector<WignerGrid> wigner_many(const std::vector<FockVector>& states, const std::vector<double>& x_axis,
                                    const std::vector<double>& p_axis, int jobs)
{
    if (x_axis.size() < 2 || p_axis.size() < 2)
        throw ParameterError("Wigner grid needs at least 2 points per axis");
    int cols = 1;
    for (const auto& s : states) {
        if (!s.is_normalized(1e-8))
            throw ParameterError("Wigner function needs normalized states");
        check_coverage(s, x_axis, p_axis);
        cols = std::max(cols, effective_dim(s));
    }
    Eigen::MatrixXcd phis = Eigen::MatrixXcd::Zero(cols, static_cast<Eigen::Index>(states.size()));
    for (std::size_t s = 0; s < states.size(); ++s) {
        int keep = std::min(cols, states[s].dim());
        phis.col(static_cast<Eigen::Index>(s)).head(keep) = states[s].amplitudes().head(keep);
    }

    const int nx = static_cast<int>(x_axis.size());
    const int np = static_cast<int>(p_axis.size());
    std::vector<WignerGrid> out(states.size());
    for (auto& g : out) {
        g.x = x_axis;
        g.p = p_axis;
        g.values = Eigen::MatrixXd::Zero(nx, np);
    }
    parallel_for(nx * np, jobs, [&](int cell) {
        const int i = cell / np;
        const int j = cell % np;
        const cplx alpha = cplx(x_axis[i], p_axis[j]) / std::numbers::sqrt2;
        const double a = std::abs(alpha);
        // D(−α)φ spreads up to about |α|² + a few |α| above the support of φ
        const int rows = cols + static_cast<int>(std::ceil(a * a + 10.0 * a)) + 30;
        Eigen::MatrixXcd shifted = displacement_closed_form(-alpha, rows, cols) * phis;
        for (std::size_t s = 0; s < states.size(); ++s) {
            double acc = 0.0;
            for (int k = 0; k < rows; ++k) {
                double w = std::norm(shifted(k, static_cast<Eigen::Index>(s)));
                acc += (k % 2 == 0) ? w : -w;
            }
            out[s].values(i, j) = acc / std::numbers::pi;
        }
    });
    return out;
}

WignerGrid wigner(const FockVector& phi, const std::vector<double>& x_axis, const std::vector<double>& p_axis,
                  int jobs)
{
    return wigner_many({phi}, x_axis, p_axis, jobs).front();
}

double position_density(const FockVector& phi, double x)
{
    // ψ_0 = π^{-1/4} e^{−x²/2}, ψ_{n+1} = √(2/(n+1)) x ψ_n − √(n/(n+1)) ψ_{n−1}
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    cplx amp = 0.0;
    for (int n = 0; n < phi.dim(); ++n) {
        amp += phi[n] * cur;
        double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return std::norm(amp);
}

int count_sign_changes(const std::vector<double>& values, double floor)
{
    int changes = 0;
    int last = 0;
    for (double v : values) {
        if (std::abs(v) <= floor)
            continue;
        int s = v > 0 ? 1 : -1;
        if (last != 0 && s != last)
            ++changes;
        last = s;
    }
    return changes;
}

} // namespace rabi
