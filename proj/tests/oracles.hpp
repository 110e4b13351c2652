#pragma once
// Slow reference implementations used only by tests.

#include <cmath>
#include <functional>
#include <vector>

#include "prethermal/hamiltonian.hpp"
#include "prethermal/lattice.hpp"

namespace oracle {

using prethermal::LatticeSpec;
using prethermal::StaticHamiltonian;
using prethermal::Vec3;

/// Energy by explicit sums over all i<j pairs, all consecutive triples and all sites.
inline double energy(const std::vector<Vec3>& s, const StaticHamiltonian& h, const LatticeSpec& lat)
{
    const std::size_t n = s.size();
    double e = 0.0;
    for (const auto& p : h.pairs)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double w = p.shape.weight(lat.distance(i, j));
                if (w == 0.0) continue;
                double b = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int c = 0; c < 3; ++c) b += s[i][a] * p.tensor(a, c) * s[j][c];
                e += w * b;
            }
    for (const auto& t : lat.triples()) {
        double v = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) v += h.triple(a, b, c) * s[t[0]][a] * s[t[1]][b] * s[t[2]][c];
        e += v;
    }
    for (const auto& v : s) e += prethermal::dot(h.field, v);
    return h.prefactor * e;
}

/// Central-difference gradient of `f` with respect to spin i (spins treated as free vectors).
inline Vec3 gradient(std::vector<Vec3> s, std::size_t i, const std::function<double(const std::vector<Vec3>&)>& f,
                     double h = 1e-6)
{
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
        const double x0 = s[i][a];
        s[i][a] = x0 + h;
        const double fp = f(s);
        s[i][a] = x0 - h;
        const double fm = f(s);
        s[i][a] = x0;
        g[a] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Classical RK4 on dS_i/dt = grad_i H(t) x S_i with a time-dependent field function.
inline void rk4(std::vector<Vec3>& s, double t0, double t1, double dt,
                const std::function<void(double, const std::vector<Vec3>&, std::vector<Vec3>&)>& fields)
{
    const std::size_t n = s.size();
    std::vector<Vec3> k1(n), k2(n), k3(n), k4(n), tmp(n), b(n);
    auto deriv = [&](double t, const std::vector<Vec3>& x, std::vector<Vec3>& out) {
        fields(t, x, b);
        for (std::size_t i = 0; i < n; ++i) out[i] = prethermal::cross(b[i], x[i]);
    };
    const auto steps = static_cast<long>(std::llround((t1 - t0) / dt));
    const double h = (t1 - t0) / static_cast<double>(steps);
    double t = t0;
    for (long k = 0; k < steps; ++k) {
        deriv(t, s, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + k1[i] * (0.5 * h);
        deriv(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + k2[i] * (0.5 * h);
        deriv(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + k3[i] * h;
        deriv(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) s[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        t += h;
    }
}

/// Langevin function coth(x) - 1/x, the classical single-spin polarisation.
inline double langevin(double x) { return 1.0 / std::tanh(x) - 1.0 / x; }

} // namespace oracle
