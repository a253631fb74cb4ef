#pragma once

// Parity-chain Hamiltonians H± = ω a†a + g(a + a†) ± Δ(−1)^{a†a} acting on the
// bosonic mode alone, their exact diagonalization, and the lift back to the
// qubit ⊗ field space.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "rabi/fock.hpp"

namespace rabi {

enum class Parity : int { Plus = 1, Minus = -1 };

constexpr int sign(Parity p) { return static_cast<int>(p); }
constexpr Parity opposite(Parity p) { return p == Parity::Plus ? Parity::Minus : Parity::Plus; }
inline char parity_char(Parity p) { return p == Parity::Plus ? '+' : '-'; }
Parity parse_parity(const std::string& text);

class ChainHamiltonian {
public:
    ChainHamiltonian(ModelParams params, Parity parity, int dim);

    const ModelParams& params() const { return params_; }
    Parity parity() const { return parity_; }
    int dim() const { return static_cast<int>(diag_.size()); }

    const Eigen::VectorXd& diagonal() const { return diag_; }
    const Eigen::VectorXd& off_diagonal() const { return off_; }
    Eigen::MatrixXd matrix() const;
    double operator()(int row, int col) const;

    // <v|H|v> for a normalized state
    double expectation(const FockVector& v) const;

private:
    ModelParams params_;
    Parity parity_;
    Eigen::VectorXd diag_; // ωn ± Δ(−1)ⁿ
    Eigen::VectorXd off_;  // g√(n+1) at (n, n+1)
};

ChainHamiltonian build_chain(const ModelParams& params, Parity parity, int dim);

struct ConvergenceRecord {
    int rounds = 0;           // doubling comparisons performed
    int levels = 0;
    double tolerance = 0.0;
    double last_change = 0.0;       // max change of the first `levels` eigenvalues in the final round
    double min_vector_overlap = 1.0; // min |<v_k^N|v_k^2N>| over the first `levels` vectors
};

class SpectralDecomposition {
public:
    SpectralDecomposition(ModelParams params, Parity parity, Eigen::VectorXd eigenvalues,
                          Eigen::MatrixXd eigenvectors);

    const ModelParams& params() const { return params_; }
    Parity parity() const { return parity_; }
    int dim() const { return static_cast<int>(values_.size()); }

    const Eigen::VectorXd& eigenvalues() const { return values_; }
    const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
    double eigenvalue(int k) const { return values_[k]; }
    FockVector eigenvector(int k) const;

    // Populations <ψ_k|φ> of a state in this eigenbasis.
    Eigen::VectorXcd project(const FockVector& phi) const;

    double max_residual(const ChainHamiltonian& h) const;
    double orthonormality_defect() const;

    const std::optional<ConvergenceRecord>& convergence() const { return convergence_; }
    void set_convergence(ConvergenceRecord rec) { convergence_ = rec; }

private:
    ModelParams params_;
    Parity parity_;
    Eigen::VectorXd values_;
    Eigen::MatrixXd vectors_;
    std::optional<ConvergenceRecord> convergence_;
};

SpectralDecomposition diagonalize(const ChainHamiltonian& h);

constexpr int default_nmax_cap = 8192;

// Starting dimension of the doubling procedure: max(64, ceil(16ḡ² + 8k)).
int initial_dimension(const ModelParams& params, int levels);

SpectralDecomposition converged_spectrum(const ModelParams& params, Parity parity, int levels, double tol,
                                         int nmax_cap = default_nmax_cap);

struct QubitFieldState {
    FockVector excited; // field amplitude multiplying |e⟩ (σ_z = +1)
    FockVector ground;  // field amplitude multiplying |g⟩ (σ_z = −1)

    double norm() const;
};

// F±: even part of φ goes with |e⟩ (+) or |g⟩ (−), odd part with the other.
QubitFieldState lift_to_full(const FockVector& phi, Parity parity);

// P̂ = σ_z e^{iπ a†a} applied to a joint state.
QubitFieldState apply_parity_operator(const QubitFieldState& s);

} // namespace rabi
