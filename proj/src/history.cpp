#include "sddpde/history.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "sddpde/errors.hpp"

namespace sddpde {

namespace {

double window_tol(double span) { return 1e-12 * std::max(1.0, std::abs(span)); }

// 4-point Gauss-Legendre rule on [-1, 1]; exact through degree 7
constexpr int kGL4 = 4;
constexpr double kGL4Nodes[kGL4] = {-0.8611363115940526, -0.3399810435848563,
                                    0.3399810435848563, 0.8611363115940526};
constexpr double kGL4Weights[kGL4] = {0.3478548451374538, 0.6521451548625461,
                                      0.6521451548625461, 0.3478548451374538};

}  // namespace

void HermiteSegment::eval(double s, CoeffVec& out) const {
    const double h = t1 - t0;
    const double th = (s - t0) / h;
    const double th2 = th * th, th3 = th2 * th;
    const double h00 = 2 * th3 - 3 * th2 + 1;
    const double h10 = th3 - 2 * th2 + th;
    const double h01 = -2 * th3 + 3 * th2;
    const double h11 = th3 - th2;
    const size_t m = y0.size();
    out.resize(m);
    for (size_t k = 0; k < m; ++k)
        out[k] = h00 * y0[k] + h * h10 * d0[k] + h01 * y1[k] + h * h11 * d1[k];
}

void HermiteSegment::eval_deriv(double s, CoeffVec& out) const {
    const double h = t1 - t0;
    const double th = (s - t0) / h;
    const double th2 = th * th;
    const double g00 = (6 * th2 - 6 * th) / h;
    const double g10 = 3 * th2 - 4 * th + 1;
    const double g01 = (-6 * th2 + 6 * th) / h;
    const double g11 = 3 * th2 - 2 * th;
    const size_t m = y0.size();
    out.resize(m);
    for (size_t k = 0; k < m; ++k)
        out[k] = g00 * y0[k] + g10 * d0[k] + g01 * y1[k] + g11 * d1[k];
}

double History::integral_minus_half_sq(const SpectralBasis& basis, double a, double b) const {
    std::vector<double> bps;
    breakpoints(a, b, bps);
    CoeffVec tmp;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        const double c = 0.5 * (bps[i] + bps[i + 1]);
        const double hw = 0.5 * (bps[i + 1] - bps[i]);
        for (int q = 0; q < kGL4; ++q) {
            eval(c + hw * kGL4Nodes[q], tmp);
            const double v = basis.norm_alpha(tmp, -0.5);
            acc += hw * kGL4Weights[q] * v * v;
        }
    }
    return acc;
}

double hermite_piece_energy(const SpectralBasis& basis, const HermiteSegment& seg, double a,
                            double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    CoeffVec tmp;
    double acc = 0.0;
    for (int q = 0; q < kGL4; ++q) {
        seg.eval(c + hw * kGL4Nodes[q], tmp);
        const double v = basis.norm_alpha(tmp, -0.5);
        acc += hw * kGL4Weights[q] * v * v;
    }
    return acc;
}

CoeffVec History::eval(double s) const {
    CoeffVec out;
    eval(s, out);
    return out;
}

CoeffVec History::eval_deriv(double s) const {
    CoeffVec out;
    eval_deriv(s, out);
    return out;
}

HistoryBuffer::HistoryBuffer(double r, double anchor, std::vector<HermiteSegment> segments)
    : r_(r), anchor_(anchor), segments_(std::move(segments)) {
    if (!(r > 0.0)) throw ConfigError("history window length r must be positive");
    if (segments_.empty()) throw ConfigError("history buffer needs at least one segment");
    m_ = static_cast<int>(segments_.front().y0.size());
    const double tol = window_tol(r) * 1e2;
    double value_scale = 1.0;
    for (const auto& s : segments_) {
        if (!(s.t1 > s.t0)) throw ConfigError("history segment must have t1 > t0");
        if (static_cast<int>(s.y0.size()) != m_ || static_cast<int>(s.y1.size()) != m_ ||
            static_cast<int>(s.d0.size()) != m_ || static_cast<int>(s.d1.size()) != m_)
            throw ConfigError("history segment coefficient lengths disagree");
        for (int k = 0; k < m_; ++k)
            value_scale = std::max({value_scale, std::abs(s.y0[static_cast<size_t>(k)]),
                                    std::abs(s.y1[static_cast<size_t>(k)])});
    }
    if (std::abs(segments_.front().t0 - (anchor_ - r_)) > tol ||
        std::abs(segments_.back().t1 - anchor_) > tol)
        throw ConfigError("history segments do not tile [anchor - r, anchor]");
    for (size_t i = 0; i + 1 < segments_.size(); ++i) {
        if (std::abs(segments_[i].t1 - segments_[i + 1].t0) > tol)
            throw ConfigError("history segments have a gap or overlap");
        for (int k = 0; k < m_; ++k)
            if (std::abs(segments_[i].y1[static_cast<size_t>(k)] -
                         segments_[i + 1].y0[static_cast<size_t>(k)]) > 1e-9 * value_scale)
                throw ConfigError("history segments are discontinuous in value at a join");
    }
}

int HistoryBuffer::locate(double s) const {
    const double tol = window_tol(r_ + std::abs(anchor_));
    if (s < window_start() - tol || s > anchor_ + tol)
        throw WindowError("history evaluation at t=" + std::to_string(s) +
                          " outside window [" + std::to_string(window_start()) + ", " +
                          std::to_string(anchor_) + "]");
    // right-continuous lookup; the final segment owns its right endpoint
    auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                               [](double v, const HermiteSegment& seg) { return v < seg.t1; });
    if (it == segments_.end()) --it;
    return static_cast<int>(it - segments_.begin());
}

void HistoryBuffer::eval(double s, CoeffVec& out) const {
    segments_[static_cast<size_t>(locate(s))].eval(s, out);
}

void HistoryBuffer::eval_deriv(double s, CoeffVec& out) const {
    segments_[static_cast<size_t>(locate(s))].eval_deriv(s, out);
}

void HistoryBuffer::breakpoints(double a, double b, std::vector<double>& out) const {
    out.clear();
    out.push_back(a);
    for (const auto& seg : segments_)
        if (seg.t1 > a && seg.t1 < b) out.push_back(seg.t1);
    out.push_back(b);
}

HistoryBuffer HistoryBuffer::window(double a, double b) const {
    const double tol = window_tol(r_ + std::abs(anchor_));
    if (a < window_start() - tol || b > anchor_ + tol || !(b > a))
        throw WindowError("window [a, b] not contained in the buffer window");
    std::vector<HermiteSegment> parts;
    CoeffVec y0, d0, y1, d1;
    for (const auto& seg : segments_) {
        const double lo = std::max(a, seg.t0), hi = std::min(b, seg.t1);
        if (!(hi - lo > tol)) continue;
        seg.eval(lo, y0);
        seg.eval_deriv(lo, d0);
        seg.eval(hi, y1);
        seg.eval_deriv(hi, d1);
        parts.push_back(HermiteSegment{lo, hi, y0, d0, y1, d1});
    }
    return HistoryBuffer(b - a, b, std::move(parts));
}

CoeffVec InitialFunction::value(double theta) const {
    CoeffVec out(static_cast<size_t>(m), 0.0);
    switch (kind) {
        case Kind::Polynomial: {
            double p = 1.0;
            for (const auto& c : poly_coeffs) {
                for (int k = 0; k < m; ++k) out[static_cast<size_t>(k)] += c[static_cast<size_t>(k)] * p;
                p *= theta;
            }
            break;
        }
        case Kind::Trig:
            for (const auto& mode : trig_modes)
                out[static_cast<size_t>(mode.k - 1)] +=
                    mode.amplitude * std::cos(mode.omega * theta + mode.phase);
            break;
        case Kind::Tabulated: {
            auto it = std::upper_bound(tab_times.begin(), tab_times.end(), theta);
            size_t i = (it == tab_times.begin()) ? 0 : static_cast<size_t>(it - tab_times.begin()) - 1;
            if (i + 1 >= tab_times.size()) i = tab_times.size() - 2;
            HermiteSegment seg{tab_times[i],     tab_times[i + 1], tab_values[i],
                               tab_derivs[i],    tab_values[i + 1], tab_derivs[i + 1]};
            seg.eval(theta, out);
            break;
        }
    }
    return out;
}

CoeffVec InitialFunction::derivative(double theta) const {
    CoeffVec out(static_cast<size_t>(m), 0.0);
    switch (kind) {
        case Kind::Polynomial: {
            double p = 1.0;
            for (size_t j = 1; j < poly_coeffs.size(); ++j) {
                for (int k = 0; k < m; ++k)
                    out[static_cast<size_t>(k)] +=
                        static_cast<double>(j) * poly_coeffs[j][static_cast<size_t>(k)] * p;
                p *= theta;
            }
            break;
        }
        case Kind::Trig:
            for (const auto& mode : trig_modes)
                out[static_cast<size_t>(mode.k - 1)] -=
                    mode.amplitude * mode.omega * std::sin(mode.omega * theta + mode.phase);
            break;
        case Kind::Tabulated: {
            auto it = std::upper_bound(tab_times.begin(), tab_times.end(), theta);
            size_t i = (it == tab_times.begin()) ? 0 : static_cast<size_t>(it - tab_times.begin()) - 1;
            if (i + 1 >= tab_times.size()) i = tab_times.size() - 2;
            HermiteSegment seg{tab_times[i],     tab_times[i + 1], tab_values[i],
                               tab_derivs[i],    tab_values[i + 1], tab_derivs[i + 1]};
            seg.eval_deriv(theta, out);
            break;
        }
    }
    return out;
}

void InitialFunction::validate() const {
    if (!(r > 0.0)) throw ConfigError("initial function: r must be positive");
    if (m < 1) throw ConfigError("initial function: basis order must be >= 1");
    switch (kind) {
        case Kind::Polynomial:
            if (poly_coeffs.empty()) throw ConfigError("polynomial initial function needs coefficients");
            for (const auto& c : poly_coeffs)
                if (static_cast<int>(c.size()) != m)
                    throw ConfigError("polynomial coefficient length does not match basis order");
            break;
        case Kind::Trig:
            for (const auto& mode : trig_modes)
                if (mode.k < 1 || mode.k > m)
                    throw ConfigError("trig initial function: mode index out of range");
            break;
        case Kind::Tabulated: {
            if (tab_times.size() < 2 || tab_values.size() != tab_times.size() ||
                tab_derivs.size() != tab_times.size())
                throw ConfigError("tabulated initial function: inconsistent tables");
            if (std::abs(tab_times.front() + r) > 1e-9 || std::abs(tab_times.back()) > 1e-9)
                throw ConfigError("tabulated initial function must cover [-r, 0]");
            for (size_t i = 0; i + 1 < tab_times.size(); ++i)
                if (!(tab_times[i + 1] > tab_times[i]))
                    throw ConfigError("tabulated initial function times must be ascending");
            for (const auto& v : tab_values)
                if (static_cast<int>(v.size()) != m)
                    throw ConfigError("tabulated value length does not match basis order");
            break;
        }
    }
}

InitialFunction InitialFunction::constant(const CoeffVec& value, double r) {
    InitialFunction f;
    f.kind = Kind::Polynomial;
    f.r = r;
    f.m = static_cast<int>(value.size());
    f.poly_coeffs = {value};
    return f;
}

HistoryBuffer render_history(const InitialFunction& shape, double anchor, int n_segments,
                             const std::vector<double>& extra_breakpoints) {
    shape.validate();
    if (n_segments < 1) throw ConfigError("render_history: n_segments must be >= 1");
    std::set<double> thetas;
    for (int i = 0; i <= n_segments; ++i)
        thetas.insert(-shape.r + shape.r * static_cast<double>(i) / n_segments);
    if (shape.kind == InitialFunction::Kind::Tabulated)
        for (double t : shape.tab_times) thetas.insert(std::clamp(t, -shape.r, 0.0));
    for (double t : extra_breakpoints)
        if (t > -shape.r && t < 0.0) thetas.insert(t);
    // drop near-duplicates from the merge
    std::vector<double> grid;
    for (double t : thetas)
        if (grid.empty() || t - grid.back() > 1e-12 * shape.r) grid.push_back(t);
    grid.back() = 0.0;
    grid.front() = -shape.r;

    std::vector<HermiteSegment> segs;
    segs.reserve(grid.size() - 1);
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        HermiteSegment seg;
        seg.t0 = anchor + grid[i];
        seg.t1 = anchor + grid[i + 1];
        seg.y0 = shape.value(grid[i]);
        seg.d0 = shape.derivative(grid[i]);
        seg.y1 = shape.value(grid[i + 1]);
        seg.d1 = shape.derivative(grid[i + 1]);
        segs.push_back(std::move(seg));
    }
    return HistoryBuffer(shape.r, anchor, std::move(segs));
}

namespace {

template <class Eval>
double sampled_max(const History& h, double a, double b, Eval&& value_of) {
    std::vector<double> bps;
    h.breakpoints(a, b, bps);
    double best = 0.0;
    CoeffVec tmp;
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        for (int j = 0; j <= kNormSamplesPerSegment; ++j) {
            const double s =
                bps[i] + (bps[i + 1] - bps[i]) * static_cast<double>(j) / kNormSamplesPerSegment;
            best = std::max(best, value_of(s, tmp));
        }
    }
    return best;
}

}  // namespace

double norm_c_minus_half(const SpectralBasis& basis, const History& h) {
    return sampled_max(h, h.window_start(), h.anchor_time(), [&](double s, CoeffVec& tmp) {
        h.eval(s, tmp);
        return basis.norm_alpha(tmp, -0.5);
    });
}

double lipschitz_seminorm(const SpectralBasis& basis, const History& h, double a, double b) {
    const double tol = 1e-12 * std::max(1.0, h.window_length());
    if (a < h.window_start() - tol || b > h.anchor_time() + tol || !(b > a))
        throw WindowError("lipschitz_seminorm: [a, b] not contained in the buffer window");
    return sampled_max(h, a, b, [&](double s, CoeffVec& tmp) {
        h.eval_deriv(s, tmp);
        return basis.norm_alpha(tmp, -0.5);
    });
}

double norm_h(const SpectralBasis& basis, const History& h) {
    return norm_c_minus_half(basis, h) + basis.norm_alpha(h.eval(h.anchor_time()), 0.5);
}

double norm_l(const SpectralBasis& basis, const History& h) {
    return norm_c_minus_half(basis, h) +
           lipschitz_seminorm(basis, h, h.window_start(), h.anchor_time()) +
           basis.norm_alpha(h.eval(h.anchor_time()), 0.5);
}

double norm_x(const SpectralBasis& basis, const History& h) {
    // with the derivative-sup seminorm surrogate this coincides with norm_l
    return norm_l(basis, h);
}

}  // namespace sddpde
