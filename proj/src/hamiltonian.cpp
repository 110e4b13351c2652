#include "prethermal/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "prethermal/model.hpp"

namespace prethermal {

const char* to_string(KernelKind k)
{
    switch (k) {
    case KernelKind::NearestNeighbor: return "nearest-neighbor";
    case KernelKind::PowerLaw: return "power-law";
    default: return "none";
    }
}

KernelKind kernel_kind_from_string(const std::string& s)
{
    if (s == "none") return KernelKind::None;
    if (s == "nearest-neighbor") return KernelKind::NearestNeighbor;
    if (s == "power-law") return KernelKind::PowerLaw;
    throw ContractError("unknown kernel kind '" + s + "' (expected none|nearest-neighbor|power-law)");
}

double KernelShape::weight(int d) const
{
    if (d <= 0) return 0.0;
    switch (kind) {
    case KernelKind::NearestNeighbor: return d == 1 ? 1.0 : 0.0;
    case KernelKind::PowerLaw:
        if (cutoff && d > *cutoff) return 0.0;
        return std::pow(static_cast<double>(d), -exponent);
    default: return 0.0;
    }
}

CouplingKernel CouplingKernel::power_law(double j, double alpha, std::optional<int> cutoff)
{
    if (!(alpha > 0.0)) throw ContractError("power-law exponent must be > 0");
    return {{KernelKind::PowerLaw, alpha, cutoff}, j};
}

StaticHamiltonian StaticHamiltonian::from_terms(std::span<const TermSet> terms, double prefactor)
{
    StaticHamiltonian h;
    h.prefactor = prefactor;
    for (const auto& t : terms) h.add(t);
    return h;
}

void StaticHamiltonian::add_pair(const KernelShape& shape, const Mat3& tensor)
{
    if (shape.kind == KernelKind::None) return;
    const Mat3 sym = 0.5 * (tensor + transpose(tensor));
    for (auto& p : pairs) {
        if (p.shape == shape) {
            p.tensor += sym;
            return;
        }
    }
    pairs.push_back({shape, sym});
}

void StaticHamiltonian::add(const TermSet& t, double weight)
{
    const int a = index_of(t.axis);
    if (!t.two_body.is_zero())
        add_pair(t.two_body.shape, Mat3::outer(t.axis, t.axis) * (weight * t.two_body.strength));
    triple(a, a, a) += weight * t.three_body_J;
    field[a] += weight * t.field_h;
}

bool StaticHamiltonian::has_triples() const
{
    return std::any_of(triple.a.begin(), triple.a.end(), [](double v) { return v != 0.0; });
}

StaticHamiltonian StaticHamiltonian::normalized() const
{
    StaticHamiltonian out = *this;
    for (auto& p : out.pairs) p.tensor *= prefactor;
    out.triple *= prefactor;
    out.field *= prefactor;
    out.prefactor = 1.0;
    return out;
}

void StaticHamiltonian::prune(double threshold)
{
    auto clip = [threshold](double& v) {
        if (std::abs(v) < threshold) v = 0.0;
    };
    for (auto& p : pairs)
        for (auto& v : p.tensor.a) clip(v);
    std::erase_if(pairs, [](const PairCoupling& p) {
        return std::all_of(p.tensor.a.begin(), p.tensor.a.end(), [](double v) { return v == 0.0; });
    });
    for (auto& v : triple.a) clip(v);
    for (int i = 0; i < 3; ++i) clip(field[i]);
}

SpinState::SpinState(LatticeSpec l, std::vector<Vec3> s) : lattice(l), spins(std::move(s)) {}

SpinState SpinState::polarized(const LatticeSpec& l, const Vec3& direction)
{
    l.validate();
    return SpinState(l, std::vector<Vec3>(l.size(), normalized(direction)));
}

SpinState SpinState::random(const LatticeSpec& l, Rng& rng)
{
    l.validate();
    std::vector<Vec3> s(l.size());
    for (auto& v : s) v = rng.unit_vector();
    return SpinState(l, std::move(s));
}

void SpinState::validate() const
{
    lattice.validate();
    if (spins.size() != lattice.size())
        throw ContractError("spin array has " + std::to_string(spins.size()) + " entries, lattice has " +
                            std::to_string(lattice.size()));
    if (max_norm_error() > kSpinNormTolerance) throw ContractError("spin state contains non-unit spins");
}

void SpinState::renormalize()
{
    for (auto& s : spins) s = normalized(s);
}

double SpinState::max_norm_error() const
{
    double m = 0.0;
    for (const auto& s : spins) m = std::max(m, std::abs(norm(s) - 1.0));
    return m;
}

Vec3 SpinState::magnetization() const
{
    Vec3 m;
    for (const auto& s : spins) m += s;
    return m * (1.0 / static_cast<double>(spins.size()));
}

Vec3 local_field(const SpinState& state, const StaticHamiltonian& h, std::size_t i)
{
    state.validate();
    if (i >= state.size()) throw ContractError("site index " + std::to_string(i) + " out of range");
    return CompiledModel(h, state.lattice).local_field(state.spins, i);
}

double energy(const SpinState& state, const StaticHamiltonian& h)
{
    state.validate();
    return CompiledModel(h, state.lattice).energy(state.spins);
}

double j_local(const StaticHamiltonian& h, const LatticeSpec& lattice)
{
    const StaticHamiltonian hn = h.normalized();
    const std::size_t n = lattice.size();
    std::vector<double> per_site(n, 0.0);

    for (const auto& p : hn.pairs) {
        double tensor_abs = 0.0;
        for (double v : p.tensor.a) tensor_abs += std::abs(v);
        const KernelTable table(p.shape, lattice);
        for (std::size_t i = 0; i < n; ++i) per_site[i] += tensor_abs * table.row_abs_sum(i);
    }
    if (hn.has_triples()) {
        double tensor_abs = 0.0;
        for (double v : hn.triple.a) tensor_abs += std::abs(v);
        for (const auto& t : lattice.triples())
            for (std::size_t s : t) per_site[s] += tensor_abs;
    }
    const double field_abs = std::abs(hn.field.x) + std::abs(hn.field.y) + std::abs(hn.field.z);
    double best = 0.0;
    for (double v : per_site) best = std::max(best, v + field_abs);
    return best;
}

SpinState rotate_all(const SpinState& state, const Vec3& axis, double angle)
{
    const Mat3 r = rotation_matrix(normalized(axis), angle);
    SpinState out = state;
    for (auto& s : out.spins) s = r * s;
    return out;
}

} // namespace prethermal
