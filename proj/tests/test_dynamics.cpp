#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rabi/adiabatic.hpp"
#include "rabi/chain.hpp"
#include "rabi/dynamics.hpp"
#include "rabi/error.hpp"
#include "support.hpp"

using namespace rabi;
using std::numbers::pi;

namespace {

SpectralDecomposition spectrum_for(double gbar, double dbar, const InitialState& init)
{
    return dynamics_spectrum(ModelParams::dimensionless(gbar, dbar), init, 1e-12);
}

// Full width at half maximum of the sampled peak containing index `peak`.
double fwhm(const std::vector<double>& t, const std::vector<double>& v, std::size_t peak)
{
    const double half = 0.5 * v[peak];
    std::size_t l = peak, r = peak;
    while (l > 0 && v[l] > half)
        --l;
    while (r + 1 < v.size() && v[r] > half)
        ++r;
    REQUIRE(v[l] <= half);
    REQUIRE(v[r] <= half);
    auto cross = [&](std::size_t a, std::size_t b) { return t[a] + (half - v[a]) * (t[b] - t[a]) / (v[b] - v[a]); };
    return cross(r - 1, r) - cross(l, l + 1);
}

} // namespace

TEST_SUITE("dynamics")
{
    TEST_CASE("initial state descriptors")
    {
        InitialState f = InitialState::parse("fock:4");
        CHECK(f.kind() == InitialState::Kind::Fock);
        CHECK(f.describe() == "fock:4");
        CHECK(f.displacement() == doctest::Approx(2.0));
        FockVector v = f.resolve(10);
        CHECK(std::abs(v[4] - 1.0) < 1e-15);

        InitialState c = InitialState::parse("coherent:2", Parity::Minus);
        CHECK(c.kind() == InitialState::Kind::Coherent);
        CHECK(c.parity() == Parity::Minus);
        CHECK(photon_expectation(c.resolve(64)) == doctest::Approx(4.0).epsilon(1e-10));

        CHECK(InitialState::parse("cat+:2").kind() == InitialState::Kind::CatPlus);
        CHECK(InitialState::parse("cat-:2").parity() == Parity::Minus);
        CHECK(InitialState::cat_plus(1.5).resolve(64).is_normalized());

        for (const char* bad : {"fock", "fock:-1", "fock:1.5", "coherent:x", "squeezed:1", ""})
            CHECK_THROWS_AS(InitialState::parse(bad), ParameterError);
        CHECK_THROWS_AS(InitialState::fock(5).resolve(4), ParameterError);
    }

    TEST_CASE("photon expectation and analytic delta-zero formula")
    {
        CHECK(photon_expectation(FockVector::basis(0, 8)) == 0.0);
        CHECK(photon_expectation(FockVector::basis(5, 8)) == doctest::Approx(5.0));
        CHECK(analytic_delta0(3, 0.7, 0.0) == 3.0);
        CHECK(analytic_delta0(0, 2.0, pi) == doctest::Approx(16.0));
        // period average by the midpoint rule
        double avg = 0.0;
        const int n = 1000;
        for (int i = 0; i < n; ++i)
            avg += analytic_delta0(2, 1.3, 2 * pi * (i + 0.5) / n) / n;
        CHECK(avg == doctest::Approx(2.0 + 2 * 1.3 * 1.3).epsilon(1e-12));
    }

    TEST_CASE("evolution: identity at t = 0, unitarity, stationarity of eigenstates")
    {
        const InitialState init = InitialState::fock(0);
        SpectralDecomposition d = spectrum_for(0.7, 0.25, init);
        FockVector phi0 = init.resolve(d.dim());
        CHECK((evolve(d, phi0, 0.0).amplitudes() - phi0.amplitudes()).norm() < 1e-12);
        CHECK(evolve(d, phi0, 37.3).norm() == doctest::Approx(1.0).epsilon(1e-10));

        FockVector psi3 = d.eigenvector(3);
        for (double t : {0.4, 5.0, 91.0})
            CHECK(std::abs(inner(psi3, evolve(d, psi3, t))) == doctest::Approx(1.0).epsilon(1e-10));

        CHECK_THROWS_AS(evolve(d, FockVector::basis(0, d.dim() + 1), 1.0), ParameterError);
    }

    TEST_CASE("propagator agrees with the dense matrix exponential")
    {
        const int n = 60;
        const ModelParams p = ModelParams::dimensionless(0.7, 0.25);
        SpectralDecomposition d = diagonalize(build_chain(p, Parity::Plus, n));
        Eigen::MatrixXcd h = test::dense_chain(1.0, 0.25, 0.7, 1, n).cast<cplx>();
        FockVector phi0 = FockVector::basis(2, n);
        Propagator prop(d, phi0);
        for (double t : {0.3, 2.0, 9.7}) {
            Eigen::MatrixXcd u = (cplx(0.0, -t) * h).exp();
            Eigen::VectorXcd ref = u * phi0.amplitudes();
            CHECK((prop.at(t).amplitudes() - ref).norm() < 1e-10);
            CHECK(std::abs(prop.autocorrelation(t) - ref[2]) < 1e-10);
        }
    }

    TEST_CASE("energy is conserved")
    {
        const InitialState init = InitialState::fock(4);
        const ModelParams p = ModelParams::dimensionless(1.2, 0.25);
        SpectralDecomposition d = dynamics_spectrum(p, init, 1e-12);
        ChainHamiltonian h = build_chain(p, Parity::Plus, d.dim());
        FockVector phi0 = init.resolve(d.dim());
        const double e0 = h.expectation(phi0);
        for (double t : {0.5, 3.3, 17.0, 120.0})
            CHECK(std::abs(h.expectation(evolve(d, phi0, t)) - e0) < 1e-10);
    }

    TEST_CASE("delta zero dynamics follows the closed forms")
    {
        for (double gbar : {0.5, 2.0})
            for (int m : {0, 4}) {
                const InitialState init = InitialState::fock(m);
                SpectralDecomposition d = spectrum_for(gbar, 0.0, init);
                FockVector phi0 = init.resolve(d.dim());
                TimeSeries s = photon_number_series(d, phi0, uniform_times(4 * pi, 400));
                double worst = 0.0;
                for (std::size_t i = 0; i < s.times.size(); ++i)
                    worst = std::max(worst, std::abs(s.values[i] - analytic_delta0(m, gbar, s.times[i])));
                CHECK(worst < 1e-6);
            }
        // P₀(t) = exp(−2ḡ²(1 − cos ωt))
        const InitialState vac = InitialState::fock(0);
        SpectralDecomposition d = spectrum_for(2.0, 0.0, vac);
        FockVector phi0 = vac.resolve(d.dim());
        CHECK(revival_probability(d, phi0, pi) == doctest::Approx(std::exp(-16.0)).epsilon(1e-6));
        CHECK(revival_probability(d, phi0, 1.0) == doctest::Approx(std::exp(-8.0 * (1 - std::cos(1.0)))).epsilon(1e-9));
        CHECK(revival_probability(d, phi0, 0.0) == doctest::Approx(1.0));
    }

    TEST_CASE("photon distribution and revival series")
    {
        const InitialState vac = InitialState::fock(0);
        SpectralDecomposition d = spectrum_for(2.0, 0.25, vac);
        FockVector phi0 = vac.resolve(d.dim());
        std::vector<double> times = uniform_times(8 * pi, 401);
        PhotonDistribution dist = photon_distribution(d, phi0, times);
        for (Eigen::Index i = 0; i < dist.probabilities.rows(); ++i)
            CHECK(std::abs(dist.probabilities.row(i).sum() - 1.0) < 1e-10);

        TimeSeries rev = revival_series(d, phi0, times);
        for (double v : rev.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
        // collapse at ωt = π, return near n = 0 at ωt ≈ 2π
        auto low = [&](double t) {
            PhotonDistribution one = photon_distribution(d, phi0, {t});
            return one.probabilities.row(0).head(3).sum();
        };
        CHECK(low(pi) < 0.01);
        CHECK(low(2 * pi) > 0.5);
    }

    TEST_CASE("wavepacket from |16> stays inside its bounds")
    {
        const InitialState init = InitialState::fock(16);
        SpectralDecomposition d = spectrum_for(2.0, 0.25, init);
        auto [lo, hi] = wavepacket_bounds(16, d);
        CHECK(lo <= 16);
        CHECK(hi >= 16);
        FockVector phi0 = init.resolve(d.dim());
        PhotonDistribution dist = photon_distribution(d, phi0, uniform_times(8 * pi, 200));
        for (Eigen::Index i = 0; i < dist.probabilities.rows(); ++i) {
            double inside = dist.probabilities.row(i).segment(lo, hi - lo + 1).sum();
            CHECK(inside >= 0.99);
        }
    }

    TEST_CASE("revivals sharpen for higher initial photon number")
    {
        std::vector<double> t;
        for (double x = 4.5; x <= 8.0; x += 0.001)
            t.push_back(x);
        double widths[2];
        int idx = 0;
        for (int m : {0, 4}) {
            const InitialState init = InitialState::fock(m);
            SpectralDecomposition d = spectrum_for(2.0, 0.25, init);
            TimeSeries s = revival_series(d, init.resolve(d.dim()), t);
            std::size_t peak = 0;
            for (std::size_t i = 0; i < t.size(); ++i)
                if (s.values[i] > s.values[peak])
                    peak = i;
            CHECK(std::abs(t[peak] - 2 * pi) < 0.5);
            widths[idx++] = fwhm(t, s.values, peak);
        }
        CHECK(widths[1] < widths[0]);
    }

    TEST_CASE("time average: diagonal ensemble against a direct average")
    {
        const InitialState vac = InitialState::fock(0);
        SpectralDecomposition d = spectrum_for(0.7, 0.25, vac);
        FockVector phi0 = vac.resolve(d.dim());
        TimeAverage ta = time_avg_photon(d, phi0);
        CHECK(ta.diagonal_ensemble);
        Propagator prop(d, phi0);
        double acc = 0.0;
        const int samples = 20001;
        for (int i = 0; i < samples; ++i)
            acc += photon_expectation(prop.at(0.1 * i));
        const double direct = acc / samples;
        CHECK(std::abs(ta.value - direct) < 0.01 * direct);
    }

    TEST_CASE("time average limits")
    {
        // g = 0: nothing moves
        const ModelParams free(1.0, 0.3, 0.0);
        SpectralDecomposition d0 = converged_spectrum(free, Parity::Plus, 6, 1e-12);
        CHECK(time_avg_photon(d0, FockVector::basis(3, d0.dim())).value == doctest::Approx(3.0).epsilon(1e-12));

        // Δ = 0: m + 2ḡ² for every m
        for (int m : {0, 2}) {
            const InitialState init = InitialState::fock(m);
            SpectralDecomposition d = spectrum_for(1.0, 0.0, init);
            CHECK(time_avg_photon(d, init.resolve(d.dim())).value == doctest::Approx(m + 2.0).epsilon(1e-9));
        }

        // weak coupling at resonance
        const InitialState vac = InitialState::fock(0);
        SpectralDecomposition r = spectrum_for(0.05, 0.5, vac);
        CHECK(std::abs(time_avg_photon(r, vac.resolve(r.dim())).value - 0.5) < 0.02);
    }

    TEST_CASE("degenerate populated levels fall back to a direct average")
    {
        Eigen::VectorXd e(3);
        e << 0.0, 0.0, 1.0;
        SpectralDecomposition d(ModelParams(1.0, 0.0, 0.0), Parity::Plus, e, Eigen::MatrixXd::Identity(3, 3));
        Eigen::VectorXcd v(3);
        v << 1.0, 1.0, 0.0;
        test::WarningCapture cap;
        TimeAverage ta = time_avg_photon(d, FockVector(v).normalized());
        CHECK_FALSE(ta.diagonal_ensemble);
        CHECK(ta.window == doctest::Approx(2000.0));
        CHECK(ta.value == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(cap.messages.size() == 1);
    }

    TEST_CASE("rotating-wave time average")
    {
        for (double g : {0.01, 0.1, 0.3, 2.7})
            CHECK(jc_time_avg(ModelParams(1.0, 0.5, g)) == 0.5);
        CHECK(jc_time_avg(ModelParams(1.0, 0.5, 0.0)) == 0.0);
        CHECK(jc_time_avg(ModelParams(1.0, 0.2, 1e-6)) < 1e-9);

        // two-level oracle: |e,0⟩ (energy Δ) coupled by g to |g,1⟩ (energy ω − Δ)
        auto oracle = [](double delta, double g) {
            Eigen::Matrix2d h;
            h << delta, g, g, 1.0 - delta;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
            double sum = 0.0;
            for (int k = 0; k < 2; ++k) {
                const double a = es.eigenvectors()(0, k), b = es.eigenvectors()(1, k);
                sum += a * a * b * b;
            }
            return sum;
        };
        for (double delta : {0.05, 0.2, 0.75, 1.3})
            for (double g : {0.02, 0.1, 0.6})
                CHECK(jc_time_avg(ModelParams(1.0, delta, g)) == doctest::Approx(oracle(delta, g)).epsilon(1e-10));
        CHECK(std::abs(jc_time_avg(ModelParams(1.0, 0.75, 0.1)) - 0.069) < 0.001);
    }

    TEST_CASE("frequency weight")
    {
        std::vector<double> t;
        const int n = 400;
        for (int i = 0; i < n; ++i)
            t.push_back(2 * pi * i / n);
        std::vector<double> pure, mixed, flat(n, 0.7);
        for (double x : t) {
            pure.push_back(1.0 + std::sin(3 * x));
            mixed.push_back(std::sin(3 * x) + std::cos(5 * x));
        }
        CHECK(frequency_weight(t, pure, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(frequency_weight(t, pure, 4.0) < 1e-20);
        CHECK(frequency_weight(t, mixed, 3.0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(frequency_weight(t, flat, 3.0) == 0.0);
        CHECK_THROWS_AS(frequency_weight(t, std::vector<double>(3, 0.0), 1.0), ParameterError);
    }

    TEST_CASE("sweep is deterministic across job counts")
    {
        const std::vector<double> gb{0.1, 0.4, 0.8};
        const std::vector<double> db{0.2, 0.5, 0.9};
        SweepOptions one;
        SweepOptions two;
        two.jobs = 2;
        SweepGrid a = sweep_navg(gb, db, one);
        SweepGrid b = sweep_navg(gb, db, two);
        CHECK(a.failed_cells == 0);
        CHECK((a.exact.array() == b.exact.array()).all());
        CHECK((a.jc.array() == b.jc.array()).all());
        CHECK(a.jc(1, 1) == doctest::Approx(0.5));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const ModelParams p = ModelParams::dimensionless(gb[i], db[j]);
                CHECK(a.jc(i, j) == jc_time_avg(p));
                SpectralDecomposition d = converged_spectrum(p, Parity::Plus, 8, 1e-10);
                const double ref = time_avg_photon(d, FockVector::basis(0, d.dim())).value;
                CHECK(a.exact(i, j) == doctest::Approx(ref).epsilon(1e-8));
            }
        CHECK_THROWS_AS(sweep_navg({}, db), ParameterError);
    }

    TEST_CASE("zero contour of a synthetic difference")
    {
        SweepGrid g;
        g.gbar = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
        g.dbar = {0.1, 0.5, 0.9, 1.3};
        g.exact.resize(6, 4);
        g.jc = Eigen::MatrixXd::Zero(6, 4);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 4; ++j)
                g.exact(i, j) = g.gbar[i] - 0.35;
        std::vector<ContourSegment> segs = zero_contour(g);
        CHECK(segs.size() == 3);
        for (const ContourSegment& s : segs) {
            CHECK(s.gbar0 == doctest::Approx(0.35));
            CHECK(s.gbar1 == doctest::Approx(0.35));
            CHECK(std::abs(s.dbar1 - s.dbar0) == doctest::Approx(0.4));
        }
    }

    TEST_CASE("truncation sizing for dynamics")
    {
        CHECK(levels_for(ModelParams::dimensionless(2.0, 0.25), 0.0) == 35);
        SpectralDecomposition d = dynamics_spectrum(ModelParams::dimensionless(2.0, 0.25), InitialState::fock(16), 1e-10);
        FockVector phi0 = FockVector::basis(16, d.dim());
        CHECK(d.project(phi0).squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
    }
}
