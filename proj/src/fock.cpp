#include "rabi/fock.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "rabi/error.hpp"

namespace rabi {

ModelParams::ModelParams(double omega, double delta, double g)
    : omega_(omega), delta_(delta), g_(g)
{
    if (!(omega > 0) || !std::isfinite(omega))
        throw ParameterError("omega must be positive, got " + std::to_string(omega));
    if (!(g >= 0) || !std::isfinite(g))
        throw ParameterError("g must be non-negative, got " + std::to_string(g));
    if (!(delta >= 0) || !std::isfinite(delta))
        throw ParameterError("delta must be non-negative, got " + std::to_string(delta));
}

ModelParams::ModelParams(double omega, double delta, double g, bool)
    : omega_(omega), delta_(delta), g_(g)
{
}

ModelParams ModelParams::with_flipped_coupling() const
{
    return ModelParams(omega_, delta_, -g_, true);
}

FockVector::FockVector(Eigen::VectorXcd amplitudes) : amps_(std::move(amplitudes))
{
    if (amps_.size() < 1)
        throw ParameterError("FockVector needs dim >= 1");
}

FockVector FockVector::basis(int n, int dim)
{
    if (n < 0 || n >= dim)
        throw ParameterError("Fock index " + std::to_string(n) + " outside truncation " + std::to_string(dim));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v[n] = 1.0;
    return FockVector(std::move(v));
}

bool FockVector::is_normalized(double tol) const
{
    return std::abs(amps_.squaredNorm() - 1.0) < tol;
}

FockVector FockVector::normalized() const
{
    double nrm = amps_.norm();
    if (nrm == 0.0)
        throw ParameterError("cannot normalize the zero vector");
    return FockVector(amps_ / nrm);
}

FockVector FockVector::resized(int dim) const
{
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    int keep = std::min(dim, this->dim());
    v.head(keep) = amps_.head(keep);
    return FockVector(std::move(v));
}

cplx inner(const FockVector& bra, const FockVector& ket)
{
    if (bra.dim() != ket.dim())
        throw ParameterError("inner product of vectors with different dimensions");
    return bra.amplitudes().dot(ket.amplitudes());
}

OperatorMatrix::OperatorMatrix(Eigen::MatrixXcd entries) : m_(std::move(entries))
{
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw ParameterError("operator matrix must be square and non-empty");
}

double OperatorMatrix::hermiticity_defect() const
{
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double OperatorMatrix::unitarity_defect(int block) const
{
    int b = (block <= 0 || block > dim()) ? dim() : block;
    Eigen::MatrixXcd prod = m_.adjoint() * m_;
    return (prod.topLeftCorner(b, b) - Eigen::MatrixXcd::Identity(b, b)).cwiseAbs().maxCoeff();
}

FockVector OperatorMatrix::apply(const FockVector& v) const
{
    if (v.dim() != dim())
        throw ParameterError("operator/vector dimension mismatch");
    return FockVector(m_ * v.amplitudes());
}

LadderOperators ladder_matrices(int dim)
{
    if (dim < 2)
        throw ParameterError("ladder operators need dim >= 2, got " + std::to_string(dim));
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd num = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    for (int n = 0; n < dim; ++n)
        num(n, n) = static_cast<double>(n);
    Eigen::MatrixXcd ad = a.adjoint();
    return {OperatorMatrix(std::move(a)), OperatorMatrix(std::move(ad)), OperatorMatrix(std::move(num))};
}

int minimum_safe_dim(double max_displacement)
{
    return static_cast<int>(std::ceil(4.0 * max_displacement * max_displacement)) + 20;
}

bool truncation_adequate(double max_displacement, int dim)
{
    return dim >= minimum_safe_dim(max_displacement);
}

namespace {

void check_truncation(const char* what, double shift, int dim)
{
    if (!truncation_adequate(shift, dim))
        warn(std::string(what) + ": truncation N=" + std::to_string(dim) + " below 4|x|^2+20=" +
             std::to_string(minimum_safe_dim(shift)) + " for |x|=" + std::to_string(std::abs(shift)) +
             "; displaced states leak out of the basis");
}

} // namespace

Eigen::MatrixXd displacement_real(double shift, int dim)
{
    if (dim < 1)
        throw ParameterError("displacement needs dim >= 1");
    if (shift == 0.0 || dim == 1) {
        // exp of the 1x1 zero generator
        return Eigen::MatrixXd::Identity(dim, dim);
    }
    check_truncation("displacement_matrix", shift, dim);
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        double s = shift * std::sqrt(static_cast<double>(n));
        gen(n, n - 1) = s;  // x a†
        gen(n - 1, n) = -s; // −x a
    }
    return gen.exp();
}

OperatorMatrix displacement_matrix(double shift, int dim)
{
    return OperatorMatrix(displacement_real(shift, dim).cast<cplx>());
}

Eigen::MatrixXcd displacement_closed_form(cplx beta, int rows, int cols)
{
    if (rows < 1 || cols < 1)
        throw ParameterError("displacement block must be non-empty");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows, cols);
    double r = std::abs(beta);
    if (r == 0.0) {
        for (int n = 0; n < std::min(rows, cols); ++n)
            out(n, n) = 1.0;
        return out;
    }
    double y = r * r;
    double log_r = std::log(r);
    double phase = std::arg(beta);
    int kmax = std::max(rows, cols);
    std::vector<double> lag;
    for (int k = 0; k < kmax; ++k) {
        // L_j^{(k)}(y) for the j needed on both diagonals at offset k
        int jmax = std::max(std::min(cols, rows - k), std::min(rows, cols - k));
        if (jmax <= 0)
            continue;
        lag.assign(jmax, 0.0);
        lag[0] = 1.0;
        if (jmax > 1)
            lag[1] = 1.0 + k - y;
        for (int j = 1; j + 1 < jmax; ++j)
            lag[j + 1] = ((2.0 * j + 1.0 + k - y) * lag[j] - (j + k) * lag[j - 1]) / (j + 1.0);

        cplx below = std::polar(1.0, k * phase);                        // m = n + k
        cplx above = std::polar((k % 2 == 0) ? 1.0 : -1.0, -k * phase); // n = m + k
        for (int j = 0; j < jmax; ++j) {
            double logmag = 0.5 * (log_factorial(j) - log_factorial(j + k)) + k * log_r - 0.5 * y;
            double mag = std::exp(logmag) * lag[j];
            if (j + k < rows && j < cols)
                out(j + k, j) = mag * below;
            if (k > 0 && j < rows && j + k < cols)
                out(j, j + k) = mag * above;
        }
    }
    return out;
}

FockVector coherent_vector(double alpha, int dim)
{
    if (dim < 1)
        throw ParameterError("coherent state needs dim >= 1");
    check_truncation("coherent_vector", alpha, dim);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    if (alpha == 0.0) {
        v[0] = 1.0;
        return FockVector(std::move(v));
    }
    double log_a = std::log(std::abs(alpha));
    for (int n = 0; n < dim; ++n) {
        double mag = std::exp(-0.5 * alpha * alpha + n * log_a - 0.5 * log_factorial(n));
        v[n] = (alpha < 0 && n % 2 == 1) ? -mag : mag;
    }
    return FockVector(std::move(v));
}

std::pair<FockVector, FockVector> cat_field_parts(double gbar, int dim)
{
    FockVector coh = coherent_vector(gbar, dim);
    Eigen::VectorXcd sym = Eigen::VectorXcd::Zero(dim);
    Eigen::VectorXcd anti = Eigen::VectorXcd::Zero(dim);
    for (int n = 0; n < dim; ++n)
        (n % 2 == 0 ? sym : anti)[n] = coh[n];
    return {FockVector(std::move(sym)), FockVector(std::move(anti))};
}

double log_factorial(int n)
{
    if (n < 0)
        throw ParameterError("log_factorial of negative argument");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double laguerre(int n, double k, double x)
{
    if (n < 0)
        throw ParameterError("Laguerre degree must be >= 0");
    double prev = 1.0;
    if (n == 0)
        return prev;
    double cur = 1.0 + k - x;
    for (int j = 1; j < n; ++j) {
        double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double laguerre_series(int n, double k, double x)
{
    if (n < 0)
        throw ParameterError("Laguerre degree must be >= 0");
    // Σ_i (−1)^i binom(n+k, n−i) x^i / i!
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        double log_binom = std::lgamma(n + k + 1.0) - std::lgamma(n - i + 1.0) - std::lgamma(k + i + 1.0);
        double term = std::exp(log_binom - std::lgamma(i + 1.0)) * std::pow(x, i);
        sum += (i % 2 == 0) ? term : -term;
    }
    return sum;
}

} // namespace rabi
