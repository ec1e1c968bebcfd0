#include "sddpde/sdd_rhs.hpp"

#include <cmath>
#include <string>

#include "sddpde/errors.hpp"

namespace sddpde {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1]
constexpr int kGL8 = 8;
constexpr double kGL8Nodes[kGL8] = {-0.9602898564975363, -0.7966664774136267,
                                    -0.5255324099163290, -0.1834346424956498,
                                    0.1834346424956498,  0.5255324099163290,
                                    0.7966664774136267,  0.9602898564975363};
constexpr double kGL8Weights[kGL8] = {0.1012285362903763, 0.2223810344533745,
                                      0.3137066458778873, 0.3626837833783620,
                                      0.3626837833783620, 0.3137066458778873,
                                      0.2223810344533745, 0.1012285362903763};

void composite_gl8(double a, double b, int min_points, std::vector<double>& nodes,
                   std::vector<double>& weights) {
    const int panels = std::max(1, (min_points + kGL8 - 1) / kGL8);
    const double h = (b - a) / panels;
    nodes.clear();
    weights.clear();
    nodes.reserve(static_cast<size_t>(panels) * kGL8);
    weights.reserve(static_cast<size_t>(panels) * kGL8);
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int i = 0; i < kGL8; ++i) {
            nodes.push_back(lo + 0.5 * h * (kGL8Nodes[i] + 1.0));
            weights.push_back(0.5 * h * kGL8Weights[i]);
        }
    }
}

struct AssemblyResult {
    std::vector<double> matrix;
    double L_B = 0.0;
};

AssemblyResult assemble_at_resolution(const KernelSpec& spec, const SpectralBasis& basis,
                                      int resolution) {
    const int m = basis.order();
    const double L = basis.length();
    const BumpWeight& ell = spec.ell;

    std::vector<double> xs, wx, ys, wy;
    composite_gl8(0.0, L, resolution, xs, wx);
    composite_gl8(ell.center - ell.width, ell.center + ell.width, resolution, ys, wy);

    // tabulate ell(y) * e_k(y) once per y node
    const size_t ny = ys.size(), nx = xs.size();
    std::vector<double> ell_e(static_cast<size_t>(m) * ny);
    for (size_t b = 0; b < ny; ++b) {
        const double lv = ell(ys[b]);
        for (int k = 0; k < m; ++k)
            ell_e[static_cast<size_t>(k) * ny + b] = lv * basis.eigenfunction(k, ys[b]);
    }

    AssemblyResult out;
    out.matrix.assign(static_cast<size_t>(m) * m, 0.0);
    std::vector<double> fvals(ny), c(static_cast<size_t>(m));
    double lb_sq = 0.0;
    for (size_t a = 0; a < nx; ++a) {
        for (size_t b = 0; b < ny; ++b) fvals[b] = wy[b] * spec.f(xs[a] - ys[b]);
        for (int k = 0; k < m; ++k) {
            const double* row = &ell_e[static_cast<size_t>(k) * ny];
            double acc = 0.0;
            for (size_t b = 0; b < ny; ++b) acc += fvals[b] * row[b];
            c[static_cast<size_t>(k)] = acc;
        }
        double s = 0.0;
        for (int k = 0; k < m; ++k)
            s += basis.eigenvalue(k) * c[static_cast<size_t>(k)] * c[static_cast<size_t>(k)];
        lb_sq += wx[a] * s;
        for (int j = 0; j < m; ++j) {
            const double ej = wx[a] * basis.eigenfunction(j, xs[a]);
            double* brow = &out.matrix[static_cast<size_t>(j) * m];
            for (int k = 0; k < m; ++k) brow[k] += ej * c[static_cast<size_t>(k)];
        }
    }
    out.L_B = std::sqrt(lb_sq);
    return out;
}

}  // namespace

double KernelProfile::operator()(double z) const {
    switch (kind) {
        case Kind::Gaussian:
            return std::exp(-z * z / (sigma * sigma));
        case Kind::Constant:
            return value;
    }
    return 0.0;
}

double BumpWeight::operator()(double x) const {
    const double s = (x - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    return std::pow(1.0 - s * s, power);
}

double BumpWeight::derivative(double x) const {
    const double s = (x - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    return -2.0 * power * s / width * std::pow(1.0 - s * s, power - 1);
}

CoeffVec NonlocalOperator::apply(const CoeffVec& v) const {
    if (static_cast<int>(v.size()) != m)
        throw ConfigError("non-local operator: coefficient length does not match order");
    CoeffVec out(static_cast<size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        const double* row = &matrix[static_cast<size_t>(j) * m];
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += row[k] * v[static_cast<size_t>(k)];
        out[static_cast<size_t>(j)] = acc;
    }
    return out;
}

NonlocalOperator assemble_B(const KernelSpec& spec, const SpectralBasis& basis) {
    const double L = basis.length();
    const BumpWeight& ell = spec.ell;
    if (!(ell.width > 0.0)) throw ConfigError("bump weight needs positive width");
    if (ell.power < 2) throw ConfigError("bump weight power must be >= 2 (C^1 cutoff)");
    if (!(ell.center - ell.width > 0.0) || !(ell.center + ell.width < L))
        throw ConfigError("bump support [" + std::to_string(ell.center - ell.width) + ", " +
                          std::to_string(ell.center + ell.width) +
                          "] must lie strictly inside (0, " + std::to_string(L) + ")");
    if (spec.f.kind == KernelProfile::Kind::Gaussian && !(spec.f.sigma > 0.0))
        throw ConfigError("gaussian kernel profile needs sigma > 0");
    if (spec.quad_points < 4 * basis.n_grid())
        throw ConfigError("kernel quadrature resolution must be >= 4 * n_grid, got " +
                          std::to_string(spec.quad_points) + " < " +
                          std::to_string(4 * basis.n_grid()));

    AssemblyResult coarse = assemble_at_resolution(spec, basis, spec.quad_points);
    if (spec.verify_resolution) {
        AssemblyResult fine = assemble_at_resolution(spec, basis, 2 * spec.quad_points);
        double drift = std::abs(coarse.L_B - fine.L_B);
        for (size_t i = 0; i < coarse.matrix.size(); ++i)
            drift = std::max(drift, std::abs(coarse.matrix[i] - fine.matrix[i]));
        if (drift > 1e-6)
            throw QuadratureError("kernel quadrature under-resolved: doubling drift " +
                                  std::to_string(drift) + " exceeds 1e-6");
        coarse = std::move(fine);
    }

    NonlocalOperator op;
    op.m = basis.order();
    op.matrix = std::move(coarse.matrix);
    op.L_B = coarse.L_B;
    return op;
}

double PointwiseNonlinearity::operator()(double w) const {
    switch (kind) {
        case Kind::Nicholson:
            return p * w * std::exp(-std::abs(w));
        case Kind::SaturatingLinear:
            return cap * std::tanh(slope * w / cap);
        case Kind::Constant:
            return value;
    }
    return 0.0;
}

PointwiseNonlinearity PointwiseNonlinearity::nicholson(double p) {
    if (!(p > 0.0)) throw ConfigError("nicholson nonlinearity needs p > 0");
    PointwiseNonlinearity b;
    b.kind = Kind::Nicholson;
    b.p = p;
    b.M_b = p / std::exp(1.0);  // max of |w| e^{-|w|} is attained at |w| = 1
    b.L_b = p;                  // sup |b'| = p at w = 0
    return b;
}

PointwiseNonlinearity PointwiseNonlinearity::saturating_linear(double slope, double cap) {
    if (!(slope > 0.0) || !(cap > 0.0))
        throw ConfigError("saturating_linear nonlinearity needs positive slope and cap");
    PointwiseNonlinearity b;
    b.kind = Kind::SaturatingLinear;
    b.slope = slope;
    b.cap = cap;
    b.M_b = cap;
    b.L_b = slope;
    return b;
}

PointwiseNonlinearity PointwiseNonlinearity::constant(double value) {
    PointwiseNonlinearity b;
    b.kind = Kind::Constant;
    b.value = value;
    b.M_b = std::abs(value);
    b.L_b = 0.0;
    return b;
}

DelayFunctional DelayFunctional::constant(double tau0, double r) {
    if (!(r > 0.0)) throw ConfigError("delay functional needs r > 0");
    if (tau0 < 0.0 || tau0 > r)
        throw ConfigError("constant delay must satisfy 0 <= tau0 <= r, got " + std::to_string(tau0));
    DelayFunctional eta;
    eta.kind = Kind::Constant;
    eta.r = r;
    eta.tau0 = tau0;
    eta.L_eta = 0.0;
    eta.q = 0.0;
    return eta;
}

DelayFunctional DelayFunctional::history_energy(double kappa, double r) {
    if (!(r > 0.0)) throw ConfigError("delay functional needs r > 0");
    if (!(kappa > 0.0)) throw ConfigError("history_energy delay needs kappa > 0");
    DelayFunctional eta;
    eta.kind = Kind::HistoryEnergy;
    eta.r = r;
    eta.kappa = kappa;
    eta.L_eta = 3.0 * std::sqrt(3.0) / 8.0 * r * std::sqrt(kappa);
    eta.q = 0.0;
    return eta;
}

double history_energy_integral(const SpectralBasis& basis, const History& h) {
    return h.integral_minus_half_sq(basis, h.window_start(), h.anchor_time());
}

double eval_eta(const DelayFunctional& eta, const SpectralBasis& basis, const History& h) {
    if (eta.kind == DelayFunctional::Kind::Constant) return eta.tau0;
    const double z = eta.kappa * history_energy_integral(basis, h);
    return eta.r * z / (1.0 + z);
}

CoeffVec eval_F1(const SddRightHandSide& rhs, const History& h) {
    const SpectralBasis& basis = *rhs.basis;
    const double tau = eval_eta(rhs.eta, basis, h);
    CoeffVec delayed;
    h.eval(h.anchor_time() - tau, delayed);
    const CoeffVec bw = rhs.B.apply(delayed);
    GridVec vals = basis.to_grid(bw);
    for (double& v : vals) v = rhs.b(v);
    return basis.from_grid(vals);
}

double lipschitz_F1(const SddRightHandSide& rhs, double ell) {
    if (ell < 0.0) throw ConfigError("lipschitz_F1: ell must be nonnegative");
    const double inner = ell * rhs.eta.L_eta * std::max(1.0, std::sqrt(rhs.eta.r));
    return rhs.b.L_b * rhs.B.L_B * std::sqrt(2.0) * std::max(1.0, inner);
}

SddRightHandSide assemble_model(const ModelSpec& spec) {
    auto basis = std::make_shared<SpectralBasis>(spec.domain, spec.m);
    SddRightHandSide rhs;
    rhs.B = assemble_B(spec.kernel, *basis);
    rhs.basis = std::move(basis);
    rhs.b = spec.b;
    rhs.eta = spec.eta;
    if (spec.d < 0.0) throw ConfigError("damping d must be nonnegative");
    rhs.d = spec.d;
    return rhs;
}

}  // namespace sddpde
