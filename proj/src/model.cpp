#include "prethermal/model.hpp"

#include <algorithm>
#include <cmath>

namespace prethermal {

KernelTable::KernelTable(const KernelShape& shape, const LatticeSpec& lattice, double scale)
    : n_(lattice.size()), dense_(shape.kind == KernelKind::PowerLaw)
{
    lattice.validate();
    if (dense_) {
        dense_w_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (i != j) dense_w_[i * n_ + j] = scale * shape.weight(lattice.distance(i, j));
        return;
    }
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n_);
    if (shape.kind == KernelKind::NearestNeighbor) {
        for (const auto& [i, j] : lattice.bonds()) {
            rows[i].emplace_back(j, scale);
            rows[j].emplace_back(i, scale);
        }
    }
    offsets_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        std::sort(rows[i].begin(), rows[i].end());
        offsets_[i + 1] = offsets_[i] + rows[i].size();
        for (const auto& [j, w] : rows[i]) {
            cols_.push_back(j);
            vals_.push_back(w);
        }
    }
}

void KernelTable::apply(std::span<const double> in, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    if (dense_) {
        // Symmetric weights: accumulate column-wise so the inner loop is a plain axpy.
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = in[j];
            if (v == 0.0) continue;
            const double* col = dense_w_.data() + j * n_;
            double* o = out.data();
            for (std::size_t i = 0; i < n_; ++i) o[i] += col[i] * v;
        }
        return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += vals_[k] * in[cols_[k]];
        out[i] = acc;
    }
}

double KernelTable::row_dot(std::size_t i, std::span<const double> in) const
{
    double acc = 0.0;
    for_each_neighbor(i, [&](std::size_t j, double w) { acc += w * in[j]; });
    return acc;
}

double KernelTable::weight(std::size_t i, std::size_t j) const
{
    if (dense_) return dense_w_[i * n_ + j];
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
        if (cols_[k] == j) return vals_[k];
    return 0.0;
}

double KernelTable::row_abs_sum(std::size_t i) const
{
    double acc = 0.0;
    for_each_neighbor(i, [&](std::size_t, double w) { acc += std::abs(w); });
    return acc;
}

CompiledModel::CompiledModel(const StaticHamiltonian& h, const LatticeSpec& lattice)
    : lattice_(lattice), n_(lattice.size())
{
    lattice.validate();
    const StaticHamiltonian hn = h.normalized();
    for (const auto& p : hn.pairs) {
        PairBlock block{KernelTable(p.shape, lattice), p.tensor, {}};
        bool any = false;
        for (int c = 0; c < 3; ++c) {
            for (int r = 0; r < 3; ++r) block.used_columns[c] = block.used_columns[c] || p.tensor(r, c) != 0.0;
            any = any || block.used_columns[c];
        }
        if (any) pairs_.push_back(std::move(block));
    }
    has_triples_ = hn.has_triples();
    if (has_triples_) {
        triple_ = hn.triple;
        triples_ = lattice.triples();
        triples_of_site_.assign(n_, {});
        for (std::size_t t = 0; t < triples_.size(); ++t)
            for (std::size_t s : triples_[t]) triples_of_site_[s].push_back(t);
    }
    field_ = hn.field;
}

double CompiledModel::triple_value(std::span<const Vec3> s, std::size_t t) const
{
    const auto& [l, c, r] = triples_[t];
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        if (s[l][a] == 0.0) continue;
        for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d) acc += triple_(a, b, d) * s[l][a] * s[c][b] * s[r][d];
    }
    return acc;
}

Vec3 CompiledModel::triple_gradient(std::span<const Vec3> s, std::size_t t, std::size_t site) const
{
    const auto& [l, c, r] = triples_[t];
    Vec3 g;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d) {
                const double T = triple_(a, b, d);
                if (T == 0.0) continue;
                if (site == l) g[a] += T * s[c][b] * s[r][d];
                if (site == c) g[b] += T * s[l][a] * s[r][d];
                if (site == r) g[d] += T * s[l][a] * s[c][b];
            }
    return g;
}

Vec3 CompiledModel::local_field(std::span<const Vec3> spins, std::size_t i) const
{
    Vec3 b = field_;
    for (const auto& p : pairs_) {
        Vec3 u;
        p.table.for_each_neighbor(i, [&](std::size_t j, double w) { u += spins[j] * w; });
        b += p.tensor * u;
    }
    if (has_triples_)
        for (std::size_t t : triples_of_site_[i]) b += triple_gradient(spins, t, i);
    return b;
}

void CompiledModel::fields(std::span<const Vec3> spins, std::span<Vec3> out) const
{
    std::fill(out.begin(), out.end(), field_);
    if (!pairs_.empty()) {
        std::vector<double> comp(n_), u(n_);
        for (const auto& p : pairs_) {
            for (int c = 0; c < 3; ++c) {
                if (!p.used_columns[c]) continue;
                for (std::size_t i = 0; i < n_; ++i) comp[i] = spins[i][c];
                p.table.apply(comp, u);
                const double t0 = p.tensor(0, c), t1 = p.tensor(1, c), t2 = p.tensor(2, c);
                for (std::size_t i = 0; i < n_; ++i) {
                    out[i].x += t0 * u[i];
                    out[i].y += t1 * u[i];
                    out[i].z += t2 * u[i];
                }
            }
        }
    }
    if (has_triples_)
        for (std::size_t t = 0; t < triples_.size(); ++t)
            for (std::size_t s : triples_[t]) out[s] += triple_gradient(spins, t, s);
}

double CompiledModel::energy(std::span<const Vec3> spins) const
{
    double e = 0.0;
    for (std::size_t i = 0; i < n_; ++i) e += dot(field_, spins[i]);
    if (!pairs_.empty()) {
        std::vector<double> comp(n_), u(n_);
        double pair_sum = 0.0;
        for (const auto& p : pairs_) {
            for (int c = 0; c < 3; ++c) {
                if (!p.used_columns[c]) continue;
                for (std::size_t i = 0; i < n_; ++i) comp[i] = spins[i][c];
                p.table.apply(comp, u);
                const Vec3 col{p.tensor(0, c), p.tensor(1, c), p.tensor(2, c)};
                for (std::size_t i = 0; i < n_; ++i) pair_sum += dot(spins[i], col) * u[i];
            }
        }
        e += 0.5 * pair_sum;
    }
    if (has_triples_)
        for (std::size_t t = 0; t < triples_.size(); ++t) e += triple_value(spins, t);
    return e;
}

double CompiledModel::cluster_energy(std::span<const Vec3> spins, std::span<const std::size_t> sites) const
{
    auto inside = [&](std::size_t s) { return std::find(sites.begin(), sites.end(), s) != sites.end(); };
    double e = 0.0;
    for (std::size_t a = 0; a < sites.size(); ++a) {
        const std::size_t i = sites[a];
        e += dot(field_, spins[i]);
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            const std::size_t j = sites[b];
            for (const auto& p : pairs_) {
                const double w = p.table.weight(i, j);
                if (w != 0.0) e += w * dot(spins[i], p.tensor * spins[j]);
            }
        }
    }
    if (has_triples_)
        for (std::size_t t = 0; t < triples_.size(); ++t)
            if (inside(triples_[t][0]) && inside(triples_[t][1]) && inside(triples_[t][2]))
                e += triple_value(spins, t);
    return e;
}

} // namespace prethermal
