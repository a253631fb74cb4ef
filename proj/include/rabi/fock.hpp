#pragma once

// Truncated Fock-space primitives for a single bosonic mode.

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace rabi {

using cplx = std::complex<double>;

// Physical parameters of H = Δσ_z + ω a†a + g σ_x (a + a†), ħ = 1.
class ModelParams {
public:
    ModelParams(double omega, double delta, double g);

    static ModelParams dimensionless(double gbar, double dbar) { return {1.0, dbar, gbar}; }

    double omega() const { return omega_; }
    double delta() const { return delta_; }
    double g() const { return g_; }
    double gbar() const { return g_ / omega_; }
    double dbar() const { return delta_ / omega_; }

    // Same physics with g → −g; only used for gauge checks.
    ModelParams with_flipped_coupling() const;

private:
    ModelParams(double omega, double delta, double g, bool /*unchecked*/);

    double omega_;
    double delta_;
    double g_;
};

class FockVector {
public:
    FockVector() = default;
    explicit FockVector(Eigen::VectorXcd amplitudes);

    static FockVector basis(int n, int dim);

    int dim() const { return static_cast<int>(amps_.size()); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    cplx operator[](int n) const { return amps_[n]; }

    double norm() const { return amps_.norm(); }
    bool is_normalized(double tol = 1e-12) const;
    FockVector normalized() const;

    // Zero-pad or cut to a new dimension.
    FockVector resized(int dim) const;

private:
    Eigen::VectorXcd amps_;
};

cplx inner(const FockVector& bra, const FockVector& ket);

class OperatorMatrix {
public:
    OperatorMatrix() = default;
    explicit OperatorMatrix(Eigen::MatrixXcd entries);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXcd& entries() const { return m_; }
    cplx operator()(int row, int col) const { return m_(row, col); }

    double hermiticity_defect() const;
    // max|M†M − I| over the leading `block` rows/cols (whole matrix if block ≤ 0).
    double unitarity_defect(int block = 0) const;

    FockVector apply(const FockVector& v) const;
    OperatorMatrix adjoint() const { return OperatorMatrix(m_.adjoint()); }
    OperatorMatrix operator*(const OperatorMatrix& rhs) const { return OperatorMatrix(m_ * rhs.m_); }

private:
    Eigen::MatrixXcd m_;
};

struct LadderOperators {
    OperatorMatrix a;
    OperatorMatrix a_dagger;
    OperatorMatrix number;
};

LadderOperators ladder_matrices(int dim);

// N ≥ 4 |shift|² + 20; the heuristic behind every truncation warning.
int minimum_safe_dim(double max_displacement);
bool truncation_adequate(double max_displacement, int dim);

// D(x) = exp(x a† − x a) for real x, by matrix exponential of the truncated
// generator. Exactly orthogonal; entries near the truncation edge differ from
// the infinite-space operator.
Eigen::MatrixXd displacement_real(double shift, int dim);
OperatorMatrix displacement_matrix(double shift, int dim);

// Infinite-space matrix elements ⟨m|D(β)|n⟩ for complex β, rows 0..rows-1 and
// columns 0..cols-1, from the associated-Laguerre closed form.
Eigen::MatrixXcd displacement_closed_form(cplx beta, int rows, int cols);

FockVector coherent_vector(double alpha, int dim);

// e^{-ḡ²/2} cosh(ḡ a†)|0⟩ and e^{-ḡ²/2} sinh(ḡ a†)|0⟩.
std::pair<FockVector, FockVector> cat_field_parts(double gbar, int dim);

// Special functions.
double log_factorial(int n);
double laguerre(int n, double k, double x);        // three-term recurrence
double laguerre_series(int n, double k, double x); // explicit finite sum

} // namespace rabi
