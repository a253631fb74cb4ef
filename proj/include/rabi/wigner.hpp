#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rabi/fock.hpp"

namespace rabi {

inline constexpr const char* wigner_convention =
    "x=(a+a^dag)/sqrt2; p=(a-a^dag)/(i*sqrt2); alpha=(x+ip)/sqrt2; W(x,p)=(1/pi)<D(alpha) P D(alpha)^dag>, P=(-1)^(a^dag a)";

struct WignerGrid {
    std::vector<double> x;
    std::vector<double> p;
    Eigen::MatrixXd values; // (i, j) = W(x_i, p_j)
    std::string convention = wigner_convention;

    double normalization() const; // Riemann sum of W dx dp
    double at(int i, int j) const { return values(i, j); }
};

std::vector<double> linear_axis(double lo, double hi, int points);

// Default window [−(√2ḡ + 4), √2ḡ + 4] with `points` samples per axis.
std::vector<double> default_wigner_axis(double gbar, int points = 121);

WignerGrid wigner(const FockVector& phi, const std::vector<double>& x_axis, const std::vector<double>& p_axis,
                  int jobs = 1);

// One pass over the grid for several states (displacement matrices are shared).
std::vector<WignerGrid> wigner_many(const std::vector<FockVector>& states, const std::vector<double>& x_axis,
                                    const std::vector<double>& p_axis, int jobs = 1);

// |⟨x|φ⟩|² with Hermite functions, for marginal checks.
double position_density(const FockVector& phi, double x);

// Sign changes along a sampled line, ignoring samples with |v| ≤ floor.
int count_sign_changes(const std::vector<double>& values, double floor);

} // namespace rabi
