#include "rabi/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rabi/error.hpp"

namespace rabi {

Parity parse_parity(const std::string& text)
{
    if (text == "+" || text == "+1" || text == "plus" || text == "1")
        return Parity::Plus;
    if (text == "-" || text == "-1" || text == "minus")
        return Parity::Minus;
    throw ParameterError("parity must be '+' or '-', got '" + text + "'");
}

ChainHamiltonian::ChainHamiltonian(ModelParams params, Parity parity, int dim)
    : params_(params), parity_(parity)
{
    if (dim < 2)
        throw ParameterError("chain Hamiltonian needs dim >= 2, got " + std::to_string(dim));
    diag_.resize(dim);
    off_.resize(dim - 1);
    const double s = sign(parity);
    for (int n = 0; n < dim; ++n)
        diag_[n] = params.omega() * n + s * params.delta() * ((n % 2 == 0) ? 1.0 : -1.0);
    for (int n = 0; n + 1 < dim; ++n)
        off_[n] = params.g() * std::sqrt(static_cast<double>(n + 1));
}

Eigen::MatrixXd ChainHamiltonian::matrix() const
{
    const int n = dim();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    h.diagonal() = diag_;
    h.diagonal(1) = off_;
    h.diagonal(-1) = off_;
    return h;
}

double ChainHamiltonian::operator()(int row, int col) const
{
    if (row == col)
        return diag_[row];
    if (std::abs(row - col) == 1)
        return off_[std::min(row, col)];
    return 0.0;
}

double ChainHamiltonian::expectation(const FockVector& v) const
{
    if (v.dim() != dim())
        throw ParameterError("state/Hamiltonian dimension mismatch");
    const auto& c = v.amplitudes();
    double e = 0.0;
    for (int n = 0; n < dim(); ++n)
        e += diag_[n] * std::norm(c[n]);
    for (int n = 0; n + 1 < dim(); ++n)
        e += 2.0 * off_[n] * std::real(std::conj(c[n]) * c[n + 1]);
    return e;
}

ChainHamiltonian build_chain(const ModelParams& params, Parity parity, int dim)
{
    return ChainHamiltonian(params, parity, dim);
}

SpectralDecomposition::SpectralDecomposition(ModelParams params, Parity parity, Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors)
    : params_(params), parity_(parity), values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors))
{
}

FockVector SpectralDecomposition::eigenvector(int k) const
{
    if (k < 0 || k >= dim())
        throw ParameterError("eigenvector index " + std::to_string(k) + " out of range");
    return FockVector(vectors_.col(k).cast<cplx>());
}

Eigen::VectorXcd SpectralDecomposition::project(const FockVector& phi) const
{
    if (phi.dim() != dim())
        throw ParameterError("state dimension " + std::to_string(phi.dim()) + " does not match decomposition " +
                             std::to_string(dim()));
    return vectors_.transpose().cast<cplx>() * phi.amplitudes();
}

double SpectralDecomposition::max_residual(const ChainHamiltonian& h) const
{
    Eigen::MatrixXd hv = h.matrix() * vectors_;
    return (hv - vectors_ * values_.asDiagonal()).cwiseAbs().maxCoeff();
}

double SpectralDecomposition::orthonormality_defect() const
{
    Eigen::MatrixXd gram = vectors_.transpose() * vectors_;
    return (gram - Eigen::MatrixXd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

namespace {

void fix_signs(Eigen::MatrixXd& vecs)
{
    for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
        Eigen::Index imax = 0;
        vecs.col(k).cwiseAbs().maxCoeff(&imax);
        if (vecs(imax, k) < 0)
            vecs.col(k) = -vecs.col(k);
    }
}

Eigen::VectorXd eigenvalues_only(const ChainHamiltonian& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    Eigen::VectorXd d = h.diagonal();
    Eigen::VectorXd e = h.off_diagonal();
    solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ComputationError("tridiagonal eigensolver did not converge (N=" + std::to_string(h.dim()) + ")");
    return solver.eigenvalues();
}

} // namespace

SpectralDecomposition diagonalize(const ChainHamiltonian& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    Eigen::VectorXd d = h.diagonal();
    Eigen::VectorXd e = h.off_diagonal();
    solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw ComputationError("tridiagonal eigensolver did not converge (N=" + std::to_string(h.dim()) +
                               ", g=" + std::to_string(h.params().g()) +
                               ", delta=" + std::to_string(h.params().delta()) + ")");
    Eigen::MatrixXd vecs = solver.eigenvectors();
    fix_signs(vecs);
    return SpectralDecomposition(h.params(), h.parity(), solver.eigenvalues(), std::move(vecs));
}

int initial_dimension(const ModelParams& params, int levels)
{
    double gb = params.gbar();
    return std::max(64, static_cast<int>(std::ceil(16.0 * gb * gb + 8.0 * levels)));
}

SpectralDecomposition converged_spectrum(const ModelParams& params, Parity parity, int levels, double tol,
                                         int nmax_cap)
{
    if (levels < 1)
        throw ParameterError("need at least one level, got " + std::to_string(levels));
    if (!(tol > 0))
        throw ParameterError("convergence tolerance must be positive");

    // Eigenvalue-only rounds until two consecutive dimensions agree; vectors are
    // then computed for that last pair only.
    int n = initial_dimension(params, levels);
    if (n > nmax_cap)
        throw ConvergenceError("initial truncation " + std::to_string(n) + " exceeds cap " + std::to_string(nmax_cap) +
                               "; raise RABI_NMAX_CAP or request fewer levels");
    Eigen::VectorXd prev = eigenvalues_only(build_chain(params, parity, n));
    int rounds = 0;
    double change = 0.0;
    while (true) {
        int next = 2 * n;
        if (next > nmax_cap)
            throw ConvergenceError("spectrum not converged to " + std::to_string(tol) + " for the first " +
                                   std::to_string(levels) + " levels below the truncation cap " +
                                   std::to_string(nmax_cap) + " (last change " + std::to_string(change) +
                                   "); raise RABI_NMAX_CAP or loosen --tol");
        Eigen::VectorXd cur = eigenvalues_only(build_chain(params, parity, next));
        ++rounds;
        int k = std::min<int>(levels, static_cast<int>(prev.size()));
        change = (cur.head(k) - prev.head(k)).cwiseAbs().maxCoeff();
        if (change < tol) {
            SpectralDecomposition coarse = diagonalize(build_chain(params, parity, n));
            SpectralDecomposition fine = diagonalize(build_chain(params, parity, next));
            double min_overlap = 1.0;
            for (int j = 0; j < k; ++j) {
                double ov = std::abs(fine.eigenvectors().col(j).head(n).dot(coarse.eigenvectors().col(j)));
                min_overlap = std::min(min_overlap, ov);
            }
            if (min_overlap < 1.0 - 1e-8)
                warn("eigenvector spot check: overlap " + std::to_string(min_overlap) +
                     " between N=" + std::to_string(n) + " and N=" + std::to_string(next));
            fine.set_convergence({rounds, levels, tol, change, min_overlap});
            return fine;
        }
        prev = std::move(cur);
        n = next;
    }
}

double QubitFieldState::norm() const
{
    return std::sqrt(excited.amplitudes().squaredNorm() + ground.amplitudes().squaredNorm());
}

QubitFieldState lift_to_full(const FockVector& phi, Parity parity)
{
    Eigen::VectorXcd even = Eigen::VectorXcd::Zero(phi.dim());
    Eigen::VectorXcd odd = Eigen::VectorXcd::Zero(phi.dim());
    for (int n = 0; n < phi.dim(); ++n)
        (n % 2 == 0 ? even : odd)[n] = phi[n];
    if (parity == Parity::Plus)
        return {FockVector(std::move(even)), FockVector(std::move(odd))};
    return {FockVector(std::move(odd)), FockVector(std::move(even))};
}

QubitFieldState apply_parity_operator(const QubitFieldState& s)
{
    Eigen::VectorXcd e = s.excited.amplitudes();
    Eigen::VectorXcd g = s.ground.amplitudes();
    for (Eigen::Index n = 0; n < e.size(); ++n)
        if (n % 2 == 1)
            e[n] = -e[n];
    for (Eigen::Index n = 0; n < g.size(); ++n)
        if (n % 2 == 0)
            g[n] = -g[n];
    return {FockVector(std::move(e)), FockVector(std::move(g))};
}

} // namespace rabi
