#pragma once

// Exact spectral condition of the Rabi model. The spectrum of H± is the set of
// zeros x_n of
//
//   G±(x) = Σ_m K_m(x) [1 ∓ Δ/(x − mω)] ḡ^m,     E_n = x_n − gḡ,
//
// with K_0 = 1, K_1 = f_0(x), m K_m = f_{m−1}(x) K_{m−1} − K_{m−2} and
// f_m(x) = 2ḡ + (mω − x + Δ²/(x − mω)) / (2ḡ)   (ω = 1 units inside the series).
//
// G has simple poles at x = mω (Δ ≠ 0). Root search works per pole window on
// the regularized function (x − mω) G(x), which is continuous across the pole
// and keeps roots that sit arbitrarily close to it.

#include <vector>

#include "rabi/chain.hpp"
#include "rabi/fock.hpp"

namespace rabi {

struct GEvaluation {
    double value = 0.0; // G(x); ±inf only if the series overflowed
    int terms = 0;      // series terms summed
    double max_term = 0.0;
};

class GFunctionEvaluator {
public:
    static constexpr double pole_guard = 1e-9; // in units of ω
    static constexpr int min_terms = 20;
    static constexpr int max_terms = 5000;

    GFunctionEvaluator(ModelParams params, Parity parity);

    const ModelParams& params() const { return params_; }
    Parity parity() const { return parity_; }

    // K_0..K_M at x (energy units).
    std::vector<double> k_coefficients(double x, int terms) const;

    // Adaptive series; throws PoleProximityError within pole_guard·ω of a pole.
    GEvaluation evaluate(double x) const;
    double value(double x) const { return evaluate(x).value; }

    // (x/ω − pole) G(x), used for bracketing: stays finite arbitrarily close to
    // x = pole·ω. The exact pole location is refused when Δ ≠ 0; at Δ = 0 it is
    // a zero.
    double regularized(double x, int pole) const;

    // Distance (units of ω) to the nearest pole, +inf when Δ = 0.
    double pole_distance(double x) const;

private:
    GEvaluation series(double xbar, int pole) const;

    ModelParams params_;
    Parity parity_;
    double gbar_;
    double dbar_;
};

std::vector<double> k_coefficients(double x, const ModelParams& params, int terms);
double g_value(double x, Parity parity, const ModelParams& params);

struct Root {
    double x = 0.0;        // energy units
    double energy = 0.0;   // x − gḡ
    double residual = 0.0; // |G(x)|; at Δ = 0, |(x/ω − window) G(x)|
    int window = 0;        // pole window m: x ∈ [mω − ω/2, mω + ω/2)
};

struct RootList {
    std::vector<Root> roots;
    std::vector<double> near_misses; // local minima of |G| without a sign change

    int size() const { return static_cast<int>(roots.size()); }
    const Root& operator[](int i) const { return roots[i]; }
};

struct RootSearchOptions {
    int points_per_unit = 200;
    double x_tol = 1e-12;      // bisection width, units of ω
    double near_miss = 1e-8;   // |R| relative to window max
    bool cross_check = false;  // compare the count with truncated diagonalization
};

RootList find_roots(const ModelParams& params, Parity parity, double x_max, const RootSearchOptions& opts = {});

struct RootEigenstate {
    FockVector state;     // normalized, Fock coordinates
    double fidelity = 0.; // |<ψ_oracle|ψ>|²
    int oracle_level = 0;
};

// Assemble Σ_m K_m(x_n) Δ√(m!)/(x_n − mω) |m;g⟩ with |m;g⟩ = D(−ḡ)|m⟩ and
// check it against the diagonalization of the same chain at dimension `dim`.
// Throws RepresentationMismatchError when the fidelity is below min_fidelity.
RootEigenstate eigenstate_from_root(double x_n, const ModelParams& params, Parity parity, int dim,
                                    double min_fidelity = 0.999);

} // namespace rabi
