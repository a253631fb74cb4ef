#pragma once

// Shared oracles and fixtures for the unit tests. Everything here is built
// directly from definitions (dense matrices, explicit sums) and is independent
// of the code paths under test.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rabi/error.hpp"
#include "rabi/fock.hpp"

namespace rabi::test {

// Collects warnings for the lifetime of the guard.
class WarningCapture {
public:
    WarningCapture()
    {
        previous_ = set_warning_handler([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { set_warning_handler(previous_); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    std::vector<std::string> messages;

private:
    WarningHandler previous_;
};

// Annihilation operator on N levels, built entry by entry.
inline Eigen::MatrixXd annihilation(int n)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k)
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

inline Eigen::MatrixXd parity_matrix(int n)
{
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k)
        p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

// ω a†a + g(a + a†) + s Δ (−1)^{a†a} as a dense matrix.
inline Eigen::MatrixXd dense_chain(double omega, double delta, double g, int s, int n)
{
    Eigen::MatrixXd a = annihilation(n);
    Eigen::MatrixXd ad = a.transpose();
    return omega * ad * a + g * (a + ad) + s * delta * parity_matrix(n);
}

// Full Rabi Hamiltonian Δσ_z + ω a†a + g σ_x (a + a†) on qubit ⊗ field,
// ordering (e, n) → n, (g, n) → N + n.
inline Eigen::MatrixXd dense_rabi(double omega, double delta, double g, int n)
{
    Eigen::MatrixXd a = annihilation(n);
    Eigen::MatrixXd ad = a.transpose();
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    h.topLeftCorner(n, n) = omega * ad * a + delta * id;
    h.bottomRightCorner(n, n) = omega * ad * a - delta * id;
    h.topRightCorner(n, n) = g * (a + ad);
    h.bottomLeftCorner(n, n) = g * (a + ad);
    return h;
}

// D(x) by matrix exponential of the dense generator at a larger size, cut back.
inline Eigen::MatrixXd dense_displacement(double x, int n, int pad = 80)
{
    Eigen::MatrixXd a = annihilation(n + pad);
    Eigen::MatrixXd gen = x * (a.transpose() - a);
    Eigen::MatrixXd d = gen.exp();
    return d.topLeftCorner(n, n);
}

inline double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

inline double rms(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

} // namespace rabi::test
