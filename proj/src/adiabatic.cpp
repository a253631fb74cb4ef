#include "rabi/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rabi/error.hpp"

namespace rabi {

ShiftedBasis::ShiftedBasis(double gbar, int dim) : gbar_(gbar)
{
    if (dim < 1)
        throw ParameterError("shifted basis needs dim >= 1");
    basis_ = displacement_real(-gbar, dim);
}

FockVector ShiftedBasis::state(int n) const
{
    if (n < 0 || n >= dim())
        throw ParameterError("shifted basis index out of range");
    return FockVector(basis_.col(n).cast<cplx>());
}

Eigen::VectorXcd ShiftedBasis::coordinates(const FockVector& phi) const
{
    if (phi.dim() != dim())
        throw ParameterError("state/basis dimension mismatch");
    return basis_.transpose().cast<cplx>() * phi.amplitudes();
}

ShiftedBasis shifted_basis(double gbar, int dim)
{
    return ShiftedBasis(gbar, dim);
}

namespace {

// First `cols` columns of D(−ḡ) in a `rows`-dimensional Fock space. Column m
// lives below m + minimum_safe_dim(ḡ), so the exponential is taken at that
// size and zero-padded.
Eigen::MatrixXd shifted_columns(double gbar, int cols, int rows)
{
    const int dim = std::min(rows, std::max(64, cols + minimum_safe_dim(std::abs(gbar)) + 40));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
    out.topRows(dim) = displacement_real(-gbar, dim).leftCols(cols);
    return out;
}

} // namespace

double shifted_overlap(int n, double gbar)
{
    if (n < 0)
        throw ParameterError("level index must be >= 0");
    // ⟨n|D(ḡ)D(ḡ)|n⟩ = D(2ḡ)_nn; pad past n + the support of the 2ḡ shift
    const int dim = std::max(64, n + minimum_safe_dim(2.0 * std::abs(gbar)) + 40);
    return displacement_real(2.0 * gbar, dim)(n, n);
}

double first_order_energy(int n, const ModelParams& params, Parity parity)
{
    const double alt = (n % 2 == 0) ? 1.0 : -1.0;
    return params.omega() * n - params.g() * params.gbar() +
           sign(parity) * params.delta() * alt * shifted_overlap(n, params.gbar());
}

std::pair<ProjectionHeatmap, ProjectionHeatmap> projection_heatmaps(const SpectralDecomposition& decomp,
                                                                    int window)
{
    if (window < 1 || window > decomp.dim())
        throw ParameterError("heatmap window must be in [1, dim]");
    const Eigen::MatrixXd basis = shifted_columns(decomp.params().gbar(), window, decomp.dim());
    Eigen::MatrixXd shifted_proj = basis.transpose() * decomp.eigenvectors().leftCols(window);
    ProjectionHeatmap shifted{shifted_proj.cwiseAbs2(), "shifted"};
    ProjectionHeatmap fock{decomp.eigenvectors().topLeftCorner(window, window).cwiseAbs2(), "fock"};
    return {std::move(shifted), std::move(fock)};
}

namespace {

bool near_crossing(int n, const SpectralDecomposition& decomp)
{
    const double gap_tol = 1e-6 * decomp.params().omega();
    bool flag = false;
    if (n > 0)
        flag = flag || decomp.eigenvalue(n) - decomp.eigenvalue(n - 1) < gap_tol;
    if (n + 1 < decomp.dim())
        flag = flag || decomp.eigenvalue(n + 1) - decomp.eigenvalue(n) < gap_tol;
    return flag;
}

void check_level(int n, const SpectralDecomposition& decomp)
{
    if (n < 0 || n >= decomp.dim())
        throw ParameterError("level " + std::to_string(n) + " outside the decomposition");
}

} // namespace

Distance distance_basis(int n, const SpectralDecomposition& decomp)
{
    check_level(n, decomp);
    const Eigen::MatrixXd basis = shifted_columns(decomp.params().gbar(), n + 1, decomp.dim());
    double ov = basis.col(n).dot(decomp.eigenvectors().col(n));
    return {std::clamp(1.0 - ov * ov, 0.0, 1.0), near_crossing(n, decomp)};
}

Distance distance_energy(int n, const SpectralDecomposition& decomp)
{
    check_level(n, decomp);
    double approx = first_order_energy(n, decomp.params(), decomp.parity());
    return {std::abs(approx - decomp.eigenvalue(n)), near_crossing(n, decomp)};
}

Distance distance_basis(int n, const ModelParams& params, double tol)
{
    return distance_basis(n, converged_spectrum(params, Parity::Plus, n + 8, tol));
}

Distance distance_energy(int n, const ModelParams& params, double tol)
{
    return distance_energy(n, converged_spectrum(params, Parity::Plus, n + 8, tol));
}

ApproxVariant parse_variant(const std::string& text)
{
    if (text == "exact" || text == "i")
        return ApproxVariant::Exact;
    if (text == "adiabatic-basis" || text == "ii")
        return ApproxVariant::AdiabaticBasisExactSpectrum;
    if (text == "full-adiabatic" || text == "iii")
        return ApproxVariant::FullAdiabatic;
    throw ParameterError("unknown variant '" + text + "' (exact, adiabatic-basis, full-adiabatic)");
}

std::string variant_name(ApproxVariant v)
{
    switch (v) {
    case ApproxVariant::Exact:
        return "exact";
    case ApproxVariant::AdiabaticBasisExactSpectrum:
        return "adiabatic-basis";
    case ApproxVariant::FullAdiabatic:
        return "full-adiabatic";
    }
    return "exact";
}

TimeSeries approx_evolution(ApproxVariant variant, const SpectralDecomposition& decomp, const FockVector& phi0,
                            const std::vector<double>& times)
{
    if (variant == ApproxVariant::Exact) {
        TimeSeries ts = photon_number_series(decomp, phi0, times);
        ts.observable = "photon_number:" + variant_name(variant);
        return ts;
    }
    if (phi0.dim() != decomp.dim())
        throw ParameterError("initial state dimension does not match decomposition");
    const int dim = decomp.dim();
    ShiftedBasis basis(decomp.params().gbar(), dim);
    Eigen::VectorXd energies = decomp.eigenvalues();
    if (variant == ApproxVariant::FullAdiabatic) {
        // ⟨n;g|n;−g⟩ = D(2ḡ)_nn; one matrix instead of one per level
        Eigen::MatrixXd minus = displacement_real(decomp.params().gbar(), dim);
        const ModelParams& p = decomp.params();
        for (int n = 0; n < dim; ++n) {
            double alt = (n % 2 == 0) ? 1.0 : -1.0;
            energies[n] = p.omega() * n - p.g() * p.gbar() +
                          sign(decomp.parity()) * p.delta() * alt * basis.matrix().col(n).dot(minus.col(n));
        }
    }
    // Same propagation formula with |ψ_n⟩ → |n;g⟩.
    SpectralDecomposition surrogate(decomp.params(), decomp.parity(), energies, basis.matrix());
    TimeSeries ts = photon_number_series(surrogate, phi0, times);
    ts.observable = "photon_number:" + variant_name(variant);
    return ts;
}

std::pair<int, int> wavepacket_bounds(int n_init, const SpectralDecomposition& decomp, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ParameterError("wavepacket threshold must lie in (0, 1)");
    if (n_init < 0 || n_init >= decomp.dim())
        throw ParameterError("initial Fock index outside the decomposition");
    const Eigen::MatrixXd& v = decomp.eigenvectors();
    int lo = std::numeric_limits<int>::max();
    int hi = -1;
    for (int k = 0; k < decomp.dim(); ++k) {
        if (v(n_init, k) * v(n_init, k) < threshold)
            continue;
        for (int m = 0; m < decomp.dim(); ++m) {
            if (v(m, k) * v(m, k) >= threshold) {
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            }
        }
    }
    if (hi < 0)
        throw ParameterError("no eigenstate has weight >= " + std::to_string(threshold) + " on |" +
                             std::to_string(n_init) + ">; lower the threshold");
    return {lo, hi};
}

} // namespace rabi
