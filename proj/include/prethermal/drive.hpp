#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prethermal/hamiltonian.hpp"

namespace prethermal {

/// One window of the piecewise-constant drive.
struct Segment {
    TermSet terms;
    double duration = 0.0;
};

/// Global rotation by angle 2*pi*k/M about a coordinate axis, applied at the end of every period.
/// X^M is the identity; k > 1 (coprime to M) gives fractional response with period M*T/k.
class KickSpec {
public:
    /// Throws ContractError unless M >= 1, k >= 1 and gcd(k, M) == 1.
    KickSpec(Axis axis, int k, int m);
    /// Validating constructor from an explicit angle; requires M*angle = 2*pi*k within 1e-9.
    static KickSpec from_angle(Axis axis, double angle, int m, int k);

    Axis axis() const { return axis_; }
    double angle() const { return angle_; }
    int order() const { return m_; }
    int winding() const { return k_; }
    Mat3 matrix(int power = 1) const;

private:
    Axis axis_;
    double angle_;
    int m_;
    int k_;
};

struct DriveProtocol {
    std::vector<Segment> segments;
    std::optional<KickSpec> kick;
    double period = 0.0;

    /// Throws ContractError unless every duration is positive and they sum to the period within 1e-12.
    void validate() const;
    double omega() const;
    /// Stable 64-bit fingerprint of the full protocol description.
    std::uint64_t fingerprint() const;
};

/// Couplings of the driven chain in the order {alpha, J_z, J_zz, J_x, J_y, h_x, h_y, h_z}.
/// The z coupling uses `z_kernel`; x and y couplings are nearest-neighbour.
struct DriveParameters {
    KernelShape z_kernel{KernelKind::NearestNeighbor, 0.0, {}};
    double Jz = 0.0;
    double Jzz = 0.0;
    double Jx = 0.0;
    double Jy = 0.0;
    double hx = 0.0;
    double hy = 0.0;
    double hz = 0.0;

    TermSet z_terms() const;
    TermSet y_terms() const;
    TermSet x_terms() const;
};

/// z | y | x windows of T/3 each.
DriveProtocol three_window_protocol(const DriveParameters& p, double omega, std::optional<KickSpec> kick = {});
/// z (T/6) | y (T/6) | x (T/3) | y (T/6) | z (T/6).
DriveProtocol five_window_protocol(const DriveParameters& p, double omega, std::optional<KickSpec> kick = {});

/// Largest j_local over the segment Hamiltonians.
double j_local(const DriveProtocol& protocol, const LatticeSpec& lattice);

} // namespace prethermal
