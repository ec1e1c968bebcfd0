#include "sddpde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sddpde/errors.hpp"

namespace sddpde {

namespace {

/// Window view over (initial segment, node grid prefix, optional candidate
/// piece). Lets eta and F1 read u_{t} during stepping without copying the
/// dense output.
class StepWindow final : public History {
  public:
    StepWindow(const Trajectory& traj, double anchor, double r)
        : traj_(traj), anchor_(anchor), r_(r) {}

    void set_candidate(double t0, double t1, const double* y0, const double* d0,
                       const CoeffVec* y1, const CoeffVec* d1) {
        cand_t0_ = t0;
        cand_t1_ = t1;
        cand_y0_ = y0;
        cand_d0_ = d0;
        cand_y1_ = y1;
        cand_d1_ = d1;
    }

    int order() const override { return traj_.basis().order(); }
    double anchor_time() const override { return anchor_; }
    double window_start() const override { return anchor_ - r_; }

    void eval(double s, CoeffVec& out) const override { eval_impl(s, out, false); }
    void eval_deriv(double s, CoeffVec& out) const override { eval_impl(s, out, true); }

    double integral_minus_half_sq(const SpectralBasis& basis, double a,
                                  double b) const override {
        const int last = traj_.n_nodes() - 1;
        const double t_known = traj_.node_time(last);
        double acc = 0.0;
        if (a < t_known)
            acc += traj_.weighted_energy_integral(a, std::min(b, t_known));
        if (cand_y1_ && b > cand_t0_) {
            HermiteSegment seg;
            seg.t0 = cand_t0_;
            seg.t1 = cand_t1_;
            const int m = order();
            seg.y0.assign(cand_y0_, cand_y0_ + m);
            seg.d0.assign(cand_d0_, cand_d0_ + m);
            seg.y1 = *cand_y1_;
            seg.d1 = *cand_d1_;
            acc += hermite_piece_energy(basis, seg, std::max(a, cand_t0_), std::min(b, cand_t1_));
        }
        return acc;
    }

    void breakpoints(double a, double b, std::vector<double>& out) const override {
        out.clear();
        out.push_back(a);
        const double t0 = traj_.start_time();
        if (a < t0) {
            std::vector<double> init_bps;
            traj_.initial().breakpoints(std::max(a, traj_.initial().window_start()),
                                        std::min(b, t0), init_bps);
            for (double t : init_bps)
                if (t > a && t < b) out.push_back(t);
        }
        const int n_complete = traj_.n_nodes() - 1;
        const double dt = traj_.dt();
        int i_lo = std::max(0, static_cast<int>(std::ceil((a - t0) / dt - 1e-9)));
        int i_hi = std::min(n_complete, static_cast<int>(std::floor((b - t0) / dt + 1e-9)));
        for (int i = i_lo; i <= i_hi; ++i) {
            const double t = traj_.node_time(i);
            if (t > a && t < b) out.push_back(t);
        }
        if (cand_y1_ && cand_t1_ > a && cand_t1_ < b) out.push_back(cand_t1_);
        out.push_back(b);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end(),
                              [&](double x, double y) { return std::abs(x - y) < 1e-13 * std::max(1.0, r_); }),
                  out.end());
    }

  private:
    void eval_impl(double s, CoeffVec& out, bool deriv) const {
        const double tol = 1e-12 * std::max(1.0, std::abs(anchor_) + r_);
        if (s < window_start() - tol || s > anchor_ + tol)
            throw WindowError("step window evaluation outside [anchor - r, anchor]");
        const double t0 = traj_.start_time();
        if (s < t0) {
            if (deriv)
                traj_.initial().eval_deriv(s, out);
            else
                traj_.initial().eval(s, out);
            return;
        }
        if (cand_y1_ && s >= cand_t0_) {
            HermiteSegment seg;  // shallow per-call assembly of the candidate piece
            seg.t0 = cand_t0_;
            seg.t1 = cand_t1_;
            const int m = order();
            seg.y0.assign(cand_y0_, cand_y0_ + m);
            seg.d0.assign(cand_d0_, cand_d0_ + m);
            seg.y1 = *cand_y1_;
            seg.d1 = *cand_d1_;
            if (deriv)
                seg.eval_deriv(s, out);
            else
                seg.eval(s, out);
            return;
        }
        if (deriv)
            traj_.eval_state_deriv(s, out);
        else
            traj_.eval_state(s, out);
    }

    const Trajectory& traj_;
    double anchor_, r_;
    double cand_t0_ = 0.0, cand_t1_ = 0.0;
    const double* cand_y0_ = nullptr;
    const double* cand_d0_ = nullptr;
    const CoeffVec* cand_y1_ = nullptr;
    const CoeffVec* cand_d1_ = nullptr;
};

void hermite_node_eval(const SpectralBasis& basis, const double* y0, const double* d0,
                       const double* y1, const double* d1, double t0, double h, double s,
                       bool deriv, CoeffVec& out) {
    const int m = basis.order();
    const double th = (s - t0) / h;
    const double th2 = th * th, th3 = th2 * th;
    out.resize(static_cast<size_t>(m));
    if (!deriv) {
        const double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + th;
        const double h01 = -2 * th3 + 3 * th2, h11 = th3 - th2;
        for (int k = 0; k < m; ++k)
            out[static_cast<size_t>(k)] =
                h00 * y0[k] + h * h10 * d0[k] + h01 * y1[k] + h * h11 * d1[k];
    } else {
        const double g00 = (6 * th2 - 6 * th) / h, g10 = 3 * th2 - 4 * th + 1;
        const double g01 = (-6 * th2 + 6 * th) / h, g11 = 3 * th2 - 2 * th;
        for (int k = 0; k < m; ++k)
            out[static_cast<size_t>(k)] =
                g00 * y0[k] + g10 * d0[k] + g01 * y1[k] + g11 * d1[k];
    }
}

}  // namespace

Trajectory::Trajectory(std::shared_ptr<const SpectralBasis> basis, HistoryBuffer initial,
                       double dt)
    : basis_(std::move(basis)), initial_(std::move(initial)), dt_(dt), m_(basis_->order()) {
    if (initial_.order() != m_)
        throw ConfigError("initial segment order does not match basis order");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    init_energy_prefix_.reserve(initial_.segments().size() + 1);
    init_energy_prefix_.push_back(0.0);
    for (const auto& seg : initial_.segments())
        init_energy_prefix_.push_back(init_energy_prefix_.back() +
                                      hermite_piece_energy(*basis_, seg, seg.t0, seg.t1));
}

CoeffVec Trajectory::state(int i) const {
    return CoeffVec(state_ptr(i), state_ptr(i) + m_);
}

CoeffVec Trajectory::state_deriv(int i) const {
    return CoeffVec(deriv_ptr(i), deriv_ptr(i) + m_);
}

void Trajectory::append_node(const CoeffVec& g, const CoeffVec& gd) {
    states_.insert(states_.end(), g.begin(), g.end());
    derivs_.insert(derivs_.end(), gd.begin(), gd.end());
    const int n = n_nodes();
    if (n == 1) {
        energy_prefix_.push_back(0.0);
    } else {
        HermiteSegment seg;
        seg.t0 = node_time(n - 2);
        seg.t1 = node_time(n - 1);
        seg.y0 = state(n - 2);
        seg.d0 = state_deriv(n - 2);
        seg.y1 = state(n - 1);
        seg.d1 = state_deriv(n - 1);
        energy_prefix_.push_back(energy_prefix_.back() +
                                 hermite_piece_energy(*basis_, seg, seg.t0, seg.t1));
    }
}

void Trajectory::eval_state(double t, CoeffVec& out) const {
    const double t0 = start_time();
    if (t < t0) {
        initial_.eval(t, out);
        return;
    }
    const int last = n_nodes() - 1;
    const double tol = 1e-12 * std::max(1.0, std::abs(end_time()));
    if (t > end_time() + tol) throw WindowError("trajectory evaluation past the computed range");
    if (last == 0) {
        out = state(0);
        return;
    }
    int i = std::min(static_cast<int>((t - t0) / dt_), last - 1);
    hermite_node_eval(*basis_, state_ptr(i), deriv_ptr(i), state_ptr(i + 1), deriv_ptr(i + 1),
                      node_time(i), dt_, t, false, out);
}

void Trajectory::eval_state_deriv(double t, CoeffVec& out) const {
    const double t0 = start_time();
    if (t < t0) {
        initial_.eval_deriv(t, out);
        return;
    }
    const int last = n_nodes() - 1;
    const double tol = 1e-12 * std::max(1.0, std::abs(end_time()));
    if (t > end_time() + tol) throw WindowError("trajectory evaluation past the computed range");
    if (last == 0) {
        out = state_deriv(0);
        return;
    }
    int i = std::min(static_cast<int>((t - t0) / dt_), last - 1);
    hermite_node_eval(*basis_, state_ptr(i), deriv_ptr(i), state_ptr(i + 1), deriv_ptr(i + 1),
                      node_time(i), dt_, t, true, out);
}

double Trajectory::weighted_energy_integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    const double t0 = start_time();

    auto init_prefix_at = [&](double s) {
        const auto& segs = initial_.segments();
        auto it = std::upper_bound(segs.begin(), segs.end(), s,
                                   [](double v, const HermiteSegment& seg) { return v < seg.t1; });
        if (it == segs.end()) return init_energy_prefix_.back();
        const size_t i = static_cast<size_t>(it - segs.begin());
        double acc = init_energy_prefix_[i];
        if (s > segs[i].t0)
            acc += hermite_piece_energy(*basis_, segs[i], segs[i].t0, std::min(s, segs[i].t1));
        return acc;
    };
    auto node_prefix_at = [&](double s) {
        const int last = n_nodes() - 1;
        if (last <= 0) return 0.0;
        if (s >= node_time(last)) return energy_prefix_.back();
        int i = std::clamp(static_cast<int>((s - t0) / dt_), 0, last - 1);
        double acc = energy_prefix_[static_cast<size_t>(i)];
        const double lo = node_time(i);
        if (s > lo) {
            HermiteSegment seg;
            seg.t0 = lo;
            seg.t1 = node_time(i + 1);
            seg.y0 = state(i);
            seg.d0 = state_deriv(i);
            seg.y1 = state(i + 1);
            seg.d1 = state_deriv(i + 1);
            acc += hermite_piece_energy(*basis_, seg, lo, std::min(s, seg.t1));
        }
        return acc;
    };

    double acc = 0.0;
    if (a < t0) acc += init_prefix_at(std::min(b, t0)) - init_prefix_at(a);
    if (b > t0) acc += node_prefix_at(b) - node_prefix_at(std::max(a, t0));
    return acc;
}

HistoryBuffer Trajectory::snapshot(double t) const {
    const double r = initial_.max_delay();
    const double t0 = start_time();
    const double tol = 1e-12 * std::max(1.0, std::abs(end_time()));
    if (t < t0 - tol || t > end_time() + tol)
        throw WindowError("snapshot time outside the computed range");
    const double a = t - r;
    std::vector<HermiteSegment> segs;

    if (a < t0) {
        HistoryBuffer head = initial_.window(a, std::min(t, t0));
        segs = head.segments();
        if (t <= t0) return HistoryBuffer(r, t, std::move(segs));
    }
    // node-grid part over [max(a, t0), t]
    const double lo = std::max(a, t0);
    const int last = n_nodes() - 1;
    int i0 = std::max(0, std::min(static_cast<int>(std::floor((lo - t0) / dt_ + 1e-12)), last - 1));
    CoeffVec y0, d0, y1, d1;
    for (int i = i0; i < last; ++i) {
        const double s0 = node_time(i), s1 = node_time(i + 1);
        const double clo = std::max(lo, s0), chi = std::min(t, s1);
        if (!(chi - clo > tol)) continue;
        HermiteSegment seg;
        seg.t0 = clo;
        seg.t1 = chi;
        if (clo == s0 && chi == s1) {
            seg.y0 = state(i);
            seg.d0 = state_deriv(i);
            seg.y1 = state(i + 1);
            seg.d1 = state_deriv(i + 1);
        } else {
            hermite_node_eval(*basis_, state_ptr(i), deriv_ptr(i), state_ptr(i + 1),
                              deriv_ptr(i + 1), s0, dt_, clo, false, y0);
            hermite_node_eval(*basis_, state_ptr(i), deriv_ptr(i), state_ptr(i + 1),
                              deriv_ptr(i + 1), s0, dt_, clo, true, d0);
            hermite_node_eval(*basis_, state_ptr(i), deriv_ptr(i), state_ptr(i + 1),
                              deriv_ptr(i + 1), s0, dt_, chi, false, y1);
            hermite_node_eval(*basis_, state_ptr(i), deriv_ptr(i), state_ptr(i + 1),
                              deriv_ptr(i + 1), s0, dt_, chi, true, d1);
            seg.y0 = y0;
            seg.d0 = d0;
            seg.y1 = y1;
            seg.d1 = d1;
        }
        segs.push_back(std::move(seg));
        if (chi >= t - tol) break;
    }
    return HistoryBuffer(r, t, std::move(segs));
}

namespace {

void validate_config(const HistoryBuffer& initial, const SddRightHandSide& rhs,
                     const SolverConfig& cfg) {
    const SpectralBasis& basis = *rhs.basis;
    if (cfg.m != 0 && cfg.m != basis.order())
        throw ConfigError("solver config order m does not match basis order");
    if (initial.order() != basis.order())
        throw ConfigError("initial segment order does not match basis order");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(cfg.T > 0.0)) throw ConfigError("T must be positive");
    if (!(cfg.fp_tol > 0.0)) throw ConfigError("fp_tol must be positive");
    if (cfg.fp_max_iter < 1) throw ConfigError("fp_max_iter must be >= 1");
    const double r = rhs.eta.r;
    if (std::abs(initial.max_delay() - r) > 1e-9 * std::max(1.0, r))
        throw ConfigError("initial segment window length does not equal the maximal delay r");
    const bool const_eta = rhs.eta.kind == DelayFunctional::Kind::Constant;
    if (cfg.dt > r && !(const_eta && rhs.eta.tau0 >= cfg.dt))
        throw ConfigError("dt > r is only admissible for a constant delay with tau0 >= dt");
    const double n_real = cfg.T / cfg.dt;
    if (std::abs(n_real - std::llround(n_real)) > 1e-9 * std::max(1.0, n_real))
        throw ConfigError("T must be an integer multiple of dt");
}

}  // namespace

Trajectory init_trajectory(const HistoryBuffer& initial, const SddRightHandSide& rhs,
                           const SolverConfig& cfg) {
    validate_config(initial, rhs, cfg);
    Trajectory traj(rhs.basis, initial, cfg.dt);
    const SpectralBasis& basis = *rhs.basis;
    const int m = basis.order();
    CoeffVec g0 = initial.eval(initial.anchor_time());
    CoeffVec f0 = eval_F1(rhs, initial);
    CoeffVec d0(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k)
        d0[static_cast<size_t>(k)] = -(basis.eigenvalue(k) + rhs.d) * g0[static_cast<size_t>(k)] +
                                     f0[static_cast<size_t>(k)];
    traj.append_node(g0, d0);
    traj.set_initial_manifold_residual(check_manifold(initial, rhs));
    return traj;
}

void step(Trajectory& traj, const SddRightHandSide& rhs, const SolverConfig& cfg) {
    const SpectralBasis& basis = *rhs.basis;
    const int m = basis.order();
    const double h = cfg.dt;
    const double r = rhs.eta.r;
    const int n = traj.n_nodes() - 1;
    const double t = traj.node_time(n);
    const double t_new = t + h;

    const double* g = traj.state_ptr(n);
    const double* gd = traj.deriv_ptr(n);

    // exact diagonal propagator pieces; hphi_k = (1 - e^{-z_k}) / (lambda_k + d)
    CoeffVec dec(static_cast<size_t>(m)), hphi(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double mu = basis.eigenvalue(k) + rhs.d;
        dec[static_cast<size_t>(k)] = std::exp(-mu * h);
        hphi[static_cast<size_t>(k)] = -std::expm1(-mu * h) / mu;
    }

    StepWindow window(traj, t_new, r);
    CoeffVec g1(static_cast<size_t>(m)), d1(static_cast<size_t>(m)), f;
    int iters = 0;

    const bool fast = rhs.eta.kind == DelayFunctional::Kind::Constant &&
                      rhs.eta.tau0 >= h - 1e-12 * std::max(1.0, h);
    if (fast) {
        // delayed time lands at or before t: one explicit evaluation
        f = eval_F1(rhs, window);
        for (int k = 0; k < m; ++k) {
            const size_t ks = static_cast<size_t>(k);
            g1[ks] = dec[ks] * g[k] + hphi[ks] * f[ks];
            d1[ks] = -(basis.eigenvalue(k) + rhs.d) * g1[ks] + f[ks];
        }
        iters = 1;
    } else {
        // linear extrapolation initial guess, then fixed-point correction
        for (int k = 0; k < m; ++k) {
            g1[static_cast<size_t>(k)] = g[k] + h * gd[k];
            d1[static_cast<size_t>(k)] = gd[k];
        }
        std::vector<double> trace;
        bool converged = false;
        CoeffVec g_next(static_cast<size_t>(m)), diff(static_cast<size_t>(m));
        for (int it = 1; it <= cfg.fp_max_iter; ++it) {
            window.set_candidate(t, t_new, g, gd, &g1, &d1);
            f = eval_F1(rhs, window);
            for (int k = 0; k < m; ++k) {
                const size_t ks = static_cast<size_t>(k);
                g_next[ks] = dec[ks] * g[k] + hphi[ks] * f[ks];
                diff[ks] = g_next[ks] - g1[ks];
            }
            const double delta = basis.norm_alpha(diff, -0.5);
            trace.push_back(delta);
            for (int k = 0; k < m; ++k) {
                const size_t ks = static_cast<size_t>(k);
                g1[ks] = g_next[ks];
                d1[ks] = -(basis.eigenvalue(k) + rhs.d) * g1[ks] + f[ks];
            }
            iters = it;
            if (delta < cfg.fp_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "fixed-point correction did not converge at t=" << t_new << " after "
                << cfg.fp_max_iter << " iterations (dt too large for the delay regime); deltas:";
            for (double dlt : trace) msg << " " << dlt;
            throw NonConvergenceError(msg.str());
        }
    }

    traj.append_node(g1, d1);
    StepStats& st = traj.mutable_stats();
    st.steps += 1;
    st.total_fp_iters += iters;
    st.max_fp_iters = std::max(st.max_fp_iters, iters);
}

Trajectory solve(const HistoryBuffer& initial, const SddRightHandSide& rhs,
                 const SolverConfig& cfg) {
    Trajectory traj = init_trajectory(initial, rhs, cfg);
    const long long n = std::llround(cfg.T / cfg.dt);
    for (long long i = 0; i < n; ++i) step(traj, rhs, cfg);
    return traj;
}

double check_manifold(const HistoryBuffer& h, const SddRightHandSide& rhs) {
    const SpectralBasis& basis = *rhs.basis;
    const int m = basis.order();
    const CoeffVec phi0 = h.eval(h.anchor_time());
    const CoeffVec dphi0 = h.eval_deriv(h.anchor_time());
    const CoeffVec f = eval_F1(rhs, h);
    CoeffVec res(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        const size_t ks = static_cast<size_t>(k);
        res[ks] = dphi0[ks] + (basis.eigenvalue(k) + rhs.d) * phi0[ks] - f[ks];
    }
    return basis.norm_alpha(res, -0.5);
}

HistoryBuffer make_manifold_initial(const InitialFunction& shape, const SddRightHandSide& rhs,
                                    int n_segments) {
    const SpectralBasis& basis = *rhs.basis;
    const int m = basis.order();
    const double r = shape.r;
    const double delta = std::min(r / 8.0, 0.1);
    if (!(delta < r)) throw ConfigError("manifold blend sub-segment does not fit inside [-r, 0]");

    HistoryBuffer buf = render_history(shape, 0.0, n_segments, {-delta});
    constexpr double kResidualTol = 1e-12;
    constexpr int kMaxPasses = 60;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
        const double res = check_manifold(buf, rhs);
        if (res < kResidualTol) return buf;
        const CoeffVec f = eval_F1(rhs, buf);
        const CoeffVec phi0 = buf.eval(buf.anchor_time());
        CoeffVec target(static_cast<size_t>(m));
        for (int k = 0; k < m; ++k) {
            const size_t ks = static_cast<size_t>(k);
            target[ks] = f[ks] - (basis.eigenvalue(k) + rhs.d) * phi0[ks];
        }
        std::vector<HermiteSegment> segs = buf.segments();
        segs.back().d1 = target;  // C^1 blend: value/derivative at -delta untouched
        buf = HistoryBuffer(r, 0.0, std::move(segs));
    }
    throw NonConvergenceError(
        "manifold endpoint blending did not reach the compatibility tolerance");
}

}  // namespace sddpde
