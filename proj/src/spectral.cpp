#include "sddpde/spectral.hpp"

#include <cmath>
#include <string>

#include "sddpde/errors.hpp"

namespace sddpde {

SpectralBasis::SpectralBasis(const DomainSpec& domain, int m) : domain_(domain), m_(m) {
    if (!(domain.length > 0.0))
        throw ConfigError("domain length must be positive, got " + std::to_string(domain.length));
    if (m < 1) throw ConfigError("basis order m must be >= 1, got " + std::to_string(m));
    if (domain.n_grid < 2 * m)
        throw ConfigError("anti-aliasing rule violated: n_grid >= 2*m required, got n_grid=" +
                          std::to_string(domain.n_grid) + ", m=" + std::to_string(m));

    const double L = domain.length;
    const int n = domain.n_grid;
    const double h = L / (n + 1);
    const double pi = std::acos(-1.0);

    eigenvalues_.resize(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double kappa = (k + 1) * pi / L;
        eigenvalues_[static_cast<size_t>(k)] = kappa * kappa;
    }

    nodes_.resize(static_cast<size_t>(n));
    weights_.assign(static_cast<size_t>(n), h);
    for (int i = 0; i < n; ++i) nodes_[static_cast<size_t>(i)] = (i + 1) * h;

    node_matrix_.resize(static_cast<size_t>(m) * n);
    const double scale = std::sqrt(2.0 / L);
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < n; ++i)
            node_matrix_[static_cast<size_t>(k) * n + i] =
                scale * std::sin((k + 1) * pi * nodes_[static_cast<size_t>(i)] / L);
}

double SpectralBasis::eigenfunction(int k, double x) const {
    const double pi = std::acos(-1.0);
    return std::sqrt(2.0 / domain_.length) * std::sin((k + 1) * pi * x / domain_.length);
}

CoeffVec SpectralBasis::apply_power(double alpha, const CoeffVec& v) const {
    if (static_cast<int>(v.size()) != m_)
        throw ConfigError("apply_power: coefficient length " + std::to_string(v.size()) +
                          " does not match basis order " + std::to_string(m_));
    CoeffVec out(v.size());
    if (alpha == 0.0) return v;
    for (int k = 0; k < m_; ++k)
        out[static_cast<size_t>(k)] =
            std::pow(eigenvalues_[static_cast<size_t>(k)], alpha) * v[static_cast<size_t>(k)];
    return out;
}

GridVec SpectralBasis::to_grid(const CoeffVec& v) const {
    if (static_cast<int>(v.size()) != m_)
        throw ConfigError("to_grid: coefficient length does not match basis order");
    const int n = domain_.n_grid;
    GridVec w(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < m_; ++k) {
        const double g = v[static_cast<size_t>(k)];
        if (g == 0.0) continue;
        const double* row = &node_matrix_[static_cast<size_t>(k) * n];
        for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] += g * row[i];
    }
    return w;
}

CoeffVec SpectralBasis::from_grid(const GridVec& w) const {
    const int n = domain_.n_grid;
    if (static_cast<int>(w.size()) != n)
        throw ConfigError("from_grid: grid length does not match n_grid");
    CoeffVec v(static_cast<size_t>(m_), 0.0);
    for (int k = 0; k < m_; ++k) {
        const double* row = &node_matrix_[static_cast<size_t>(k) * n];
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += weights_[static_cast<size_t>(i)] * row[i] * w[static_cast<size_t>(i)];
        v[static_cast<size_t>(k)] = acc;
    }
    return v;
}

double SpectralBasis::norm_alpha(const CoeffVec& v, double alpha) const {
    if (static_cast<int>(v.size()) != m_)
        throw ConfigError("norm_alpha: coefficient length does not match basis order");
    double acc = 0.0;
    if (alpha == 0.0) {
        for (double g : v) acc += g * g;
    } else {
        for (int k = 0; k < m_; ++k) {
            const double g = v[static_cast<size_t>(k)];
            acc += std::pow(eigenvalues_[static_cast<size_t>(k)], 2.0 * alpha) * g * g;
        }
    }
    return std::sqrt(acc);
}

}  // namespace sddpde
