#pragma once

// Shifted-oscillator (adiabatic) basis |n;g⟩ = D(−ḡ)|n⟩: the exact eigenbasis
// of H₀ = ω a†a + g(a + a†), and the diagnostics that compare it with the
// true chain eigenstates.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rabi/chain.hpp"
#include "rabi/dynamics.hpp"

namespace rabi {

class ShiftedBasis {
public:
    ShiftedBasis(double gbar, int dim);

    double gbar() const { return gbar_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXd& matrix() const { return basis_; } // column n = |n;g⟩ in Fock coordinates
    FockVector state(int n) const;

    // Coordinates ⟨n;g|φ⟩.
    Eigen::VectorXcd coordinates(const FockVector& phi) const;

private:
    double gbar_;
    Eigen::MatrixXd basis_;
};

ShiftedBasis shifted_basis(double gbar, int dim);

// ⟨n;g|n;−g⟩, numerically from displacement matrices.
double shifted_overlap(int n, double gbar);

// ωn − gḡ ± Δ(−1)ⁿ⟨n;g|n;−g⟩ for the chain of the given parity.
double first_order_energy(int n, const ModelParams& params, Parity parity = Parity::Plus);

struct ProjectionHeatmap {
    Eigen::MatrixXd values; // (m, n) = |⟨m; basis|ψ_n⟩|²
    std::string basis;      // "shifted" or "fock"
};

std::pair<ProjectionHeatmap, ProjectionHeatmap> projection_heatmaps(const SpectralDecomposition& decomp,
                                                                    int window = 31);

struct Distance {
    double value = 0.0;
    bool near_crossing = false; // a neighbouring level lies within 1e-6 ω
};

// D_n = 1 − |⟨n;g|ψ_n⟩|², levels matched by index in the sorted chain spectrum.
Distance distance_basis(int n, const SpectralDecomposition& decomp);
// D_n^E = |first_order_energy(n) − E_n|
Distance distance_energy(int n, const SpectralDecomposition& decomp);

// Convenience forms that converge the positive-parity spectrum first.
Distance distance_basis(int n, const ModelParams& params, double tol = 1e-12);
Distance distance_energy(int n, const ModelParams& params, double tol = 1e-12);

enum class ApproxVariant { Exact, AdiabaticBasisExactSpectrum, FullAdiabatic };

ApproxVariant parse_variant(const std::string& text);
std::string variant_name(ApproxVariant v);

// n(t) with (i) exact eigenpairs, (ii) |ψ_n⟩ → |n;g⟩ with exact E_n,
// (iii) |n;g⟩ with first-order energies.
TimeSeries approx_evolution(ApproxVariant variant, const SpectralDecomposition& decomp, const FockVector& phi0,
                            const std::vector<double>& times);

// Fock window [n_min, n_max] reached by a wavepacket started in |n_init⟩:
// eigenstates with |⟨n_init|ψ_k⟩|² ≥ threshold, then the Fock indices where
// those eigenstates carry |⟨m|ψ_k⟩|² ≥ threshold.
std::pair<int, int> wavepacket_bounds(int n_init, const SpectralDecomposition& decomp, double threshold = 1e-3);

} // namespace rabi
