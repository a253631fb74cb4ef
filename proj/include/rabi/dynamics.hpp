#pragma once

// Unitary evolution inside one parity chain and the observables built on it.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rabi/chain.hpp"
#include "rabi/fock.hpp"

namespace rabi {

class InitialState {
public:
    enum class Kind { Fock, Coherent, CatPlus, CatMinus, Custom };

    static InitialState fock(int m, Parity parity = Parity::Plus);
    static InitialState coherent(double alpha, Parity parity = Parity::Plus);
    // |0;g⟩ = D(−ḡ)|0⟩ carried into H+ (|C+⟩) or H− (|C−⟩)
    static InitialState cat_plus(double gbar);
    static InitialState cat_minus(double gbar);
    static InitialState custom(FockVector phi, Parity parity = Parity::Plus);

    // "fock:4", "coherent:2", "cat+:2", "cat-:2"
    static InitialState parse(const std::string& text, Parity parity = Parity::Plus);

    Kind kind() const { return kind_; }
    Parity parity() const { return parity_; }
    std::string describe() const;

    // Largest displacement involved, for truncation sizing.
    double displacement() const;
    FockVector resolve(int dim) const;

private:
    Kind kind_ = Kind::Fock;
    Parity parity_ = Parity::Plus;
    int index_ = 0;
    double amplitude_ = 0.0;
    FockVector custom_;
};

struct TimeSeries {
    std::vector<double> times; // units of 1/ω
    std::vector<double> values;
    std::string observable;
    std::string initial_state;
    Parity parity = Parity::Plus;
};

struct PhotonDistribution {
    std::vector<double> times;
    Eigen::MatrixXd probabilities; // row per time, column per Fock index
};

// Precomputed ⟨ψ_k|φ₀⟩ for repeated evaluation at many times.
class Propagator {
public:
    Propagator(const SpectralDecomposition& decomp, const FockVector& phi0);

    FockVector at(double t) const;
    cplx autocorrelation(double t) const; // ⟨φ₀|φ(t)⟩
    const Eigen::VectorXcd& populations() const { return coeff_; }

private:
    Eigen::VectorXcd coeff_;          // all levels
    Eigen::VectorXd active_energies_; // levels with |⟨ψ_k|φ₀⟩| above round-off
    Eigen::VectorXcd active_coeff_;
    Eigen::MatrixXd active_vectors_;
};

FockVector evolve(const SpectralDecomposition& decomp, const FockVector& phi0, double t);

double photon_expectation(const FockVector& phi);

// Chain levels that carry a state of the given displacement (√m for |m⟩, |α|
// for coherent states): the shifted-basis support around radius r + ḡ.
int levels_for(const ModelParams& params, double displacement);

// Converged decomposition large enough to propagate `init`.
SpectralDecomposition dynamics_spectrum(const ModelParams& params, const InitialState& init, double tol,
                                        int nmax_cap = default_nmax_cap);

// m + 2ḡ²(1 − cos ωt), exact at Δ = 0 for an initial Fock state |m⟩.
double analytic_delta0(int m, double gbar, double omega_t);

double revival_probability(const SpectralDecomposition& decomp, const FockVector& phi0, double t);

std::vector<double> uniform_times(double t_max, int samples);

TimeSeries photon_number_series(const SpectralDecomposition& decomp, const FockVector& phi0,
                                const std::vector<double>& times);
TimeSeries revival_series(const SpectralDecomposition& decomp, const FockVector& phi0,
                          const std::vector<double>& times);
PhotonDistribution photon_distribution(const SpectralDecomposition& decomp, const FockVector& phi0,
                                       const std::vector<double>& times);

// Share of the fluctuation power of v(t) − mean carried by angular frequency
// `freq`: 2|Σ_j (v_j − v̄) e^{−i freq t_j}|² / (N Σ_j (v_j − v̄)²). Equals the
// two-sided periodogram fraction when the samples span whole periods without
// repeating the endpoint. Returns 0 for a signal that is constant up to
// rounding.
double frequency_weight(const std::vector<double>& times, const std::vector<double>& values, double freq);

struct TimeAverage {
    double value = 0.0;
    bool diagonal_ensemble = true; // false: direct average over [0, window]
    double window = 0.0;
    double min_populated_gap = 0.0;
};

// Infinite-time average of ⟨a†a⟩, by the diagonal ensemble when the populated
// part of the spectrum is non-degenerate.
TimeAverage time_avg_photon(const SpectralDecomposition& decomp, const FockVector& phi0,
                            double degeneracy_tol = 1e-8);

// Rotating-wave (Jaynes-Cummings) value 2g²d²/(g² + d²)², d = Δ − ω/2 + √((Δ − ω/2)² + g²).
// Returns 0 at g = 0.
double jc_time_avg(const ModelParams& params);

struct SweepGrid {
    std::vector<double> gbar;
    std::vector<double> dbar;
    Eigen::MatrixXd exact; // rows: gbar index, cols: dbar index; NaN where a cell failed
    Eigen::MatrixXd jc;
    Eigen::MatrixXi dims;  // truncation used per cell
    int failed_cells = 0;

    Eigen::MatrixXd difference() const { return exact - jc; }
};

struct SweepOptions {
    Parity parity = Parity::Plus;
    int levels = 8;
    double tol = 1e-10;
    int jobs = 1;
    int nmax_cap = default_nmax_cap;
};

SweepGrid sweep_navg(const std::vector<double>& gbar_axis, const std::vector<double>& dbar_axis,
                     const SweepOptions& opts = {});

struct ContourSegment {
    double gbar0, dbar0, gbar1, dbar1;
};

// Marching-squares zero level of exact − JC.
std::vector<ContourSegment> zero_contour(const SweepGrid& grid);

} // namespace rabi
