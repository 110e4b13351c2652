#include "prethermal/drive.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "prethermal/hash.hpp"

namespace prethermal {

KickSpec::KickSpec(Axis axis, int k, int m) : axis_(axis), angle_(0.0), m_(m), k_(k)
{
    if (m < 1) throw ContractError("kick order M must be >= 1");
    if (k < 1) throw ContractError("kick winding k must be >= 1");
    if (std::gcd(k, m) != 1) throw ContractError("kick winding k must be coprime to M");
    angle_ = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(m);
}

KickSpec KickSpec::from_angle(Axis axis, double angle, int m, int k)
{
    KickSpec spec(axis, k, m);
    if (std::abs(m * angle - 2.0 * M_PI * k) > 1e-9)
        throw ContractError("kick angle must satisfy M*angle = 2*pi*k");
    return spec;
}

Mat3 KickSpec::matrix(int power) const
{
    return rotation_matrix(unit_vector(axis_), angle_ * static_cast<double>(power));
}

void DriveProtocol::validate() const
{
    if (!(period > 0.0)) throw ContractError("drive period must be positive");
    if (segments.empty()) throw ContractError("drive protocol has no segments");
    double total = 0.0;
    for (const auto& s : segments) {
        if (!(s.duration > 0.0)) throw ContractError("segment durations must be positive");
        total += s.duration;
    }
    if (std::abs(total - period) > 1e-12 * std::max(1.0, period))
        throw ContractError("segment durations do not sum to the period");
}

double DriveProtocol::omega() const { return 2.0 * M_PI / period; }

std::uint64_t DriveProtocol::fingerprint() const
{
    std::string desc;
    char buf[160];
    auto put = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        desc += buf;
    };
    put("T=%a;", period);
    for (const auto& s : segments) {
        const auto& t = s.terms;
        put("seg(%s,%s,%a,%a,%d,%a,%a,%a);", to_string(t.axis), to_string(t.two_body.shape.kind),
            t.two_body.shape.exponent, t.two_body.strength, t.two_body.shape.cutoff.value_or(-1), t.three_body_J,
            t.field_h, s.duration);
    }
    if (kick) put("kick(%s,%d,%d);", to_string(kick->axis()), kick->winding(), kick->order());
    return fnv1a64(desc);
}

TermSet DriveParameters::z_terms() const
{
    TermSet t{Axis::Z, {z_kernel, Jz}, Jzz, hz};
    return t;
}

TermSet DriveParameters::y_terms() const { return {Axis::Y, CouplingKernel::nearest_neighbor(Jy), 0.0, hy}; }

TermSet DriveParameters::x_terms() const { return {Axis::X, CouplingKernel::nearest_neighbor(Jx), 0.0, hx}; }

DriveProtocol three_window_protocol(const DriveParameters& p, double omega, std::optional<KickSpec> kick)
{
    if (!(omega > 0.0)) throw ContractError("drive frequency must be positive");
    const double T = 2.0 * M_PI / omega;
    DriveProtocol d;
    d.period = T;
    d.kick = kick;
    d.segments = {{p.z_terms(), T / 3.0}, {p.y_terms(), T / 3.0}, {p.x_terms(), T - 2.0 * (T / 3.0)}};
    return d;
}

DriveProtocol five_window_protocol(const DriveParameters& p, double omega, std::optional<KickSpec> kick)
{
    if (!(omega > 0.0)) throw ContractError("drive frequency must be positive");
    const double T = 2.0 * M_PI / omega;
    DriveProtocol d;
    d.period = T;
    d.kick = kick;
    const double sixth = T / 6.0;
    d.segments = {{p.z_terms(), sixth},
                  {p.y_terms(), sixth},
                  {p.x_terms(), T - 4.0 * sixth},
                  {p.y_terms(), sixth},
                  {p.z_terms(), sixth}};
    return d;
}

double j_local(const DriveProtocol& protocol, const LatticeSpec& lattice)
{
    double best = 0.0;
    for (const auto& s : protocol.segments) {
        const TermSet terms[] = {s.terms};
        best = std::max(best, j_local(StaticHamiltonian::from_terms(terms), lattice));
    }
    return best;
}

} // namespace prethermal
