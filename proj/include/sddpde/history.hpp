#pragma once

#include <functional>
#include <vector>

#include "sddpde/spectral.hpp"

namespace sddpde {

/// One cubic Hermite piece in coefficient space. Endpoint data is stored per
/// segment (not shared between neighbours) so a derivative jump at a join is
/// representable; value continuity across joins is enforced by HistoryBuffer.
struct HermiteSegment {
    double t0 = 0.0, t1 = 0.0;
    CoeffVec y0, d0;  // value and derivative at t0
    CoeffVec y1, d1;  // value and derivative at t1

    void eval(double s, CoeffVec& out) const;
    void eval_deriv(double s, CoeffVec& out) const;
};

/// Read-only view of a solution segment on the window [anchor - r, anchor].
class History {
  public:
    virtual ~History() = default;
    virtual int order() const = 0;
    virtual double anchor_time() const = 0;
    virtual double window_start() const = 0;
    virtual void eval(double s, CoeffVec& out) const = 0;
    virtual void eval_deriv(double s, CoeffVec& out) const = 0;
    /// Piece boundaries intersected with [a, b], sorted, including a and b.
    virtual void breakpoints(double a, double b, std::vector<double>& out) const = 0;

    /// integral over [a, b] of ||A^{-1/2} phi(s)||^2. The default walks the
    /// pieces with a 4-point Gauss rule (exact: the integrand is a degree-6
    /// polynomial per piece); implementations may use cached prefix sums.
    virtual double integral_minus_half_sq(const SpectralBasis& basis, double a, double b) const;

    CoeffVec eval(double s) const;
    CoeffVec eval_deriv(double s) const;
    double window_length() const { return anchor_time() - window_start(); }
};

/// Exact Gauss-Legendre integral of ||A^{-1/2} H(s)||^2 over one Hermite
/// piece restricted to [a, b].
double hermite_piece_energy(const SpectralBasis& basis, const HermiteSegment& seg, double a,
                            double b);

/// Dense-output record of u_t over [anchor - r, anchor]: contiguous cubic
/// Hermite pieces, value-continuous at joins. Immutable value type.
class HistoryBuffer final : public History {
  public:
    HistoryBuffer(double r, double anchor, std::vector<HermiteSegment> segments);

    int order() const override { return m_; }
    double anchor_time() const override { return anchor_; }
    double window_start() const override { return anchor_ - r_; }
    double max_delay() const { return r_; }
    const std::vector<HermiteSegment>& segments() const { return segments_; }

    void eval(double s, CoeffVec& out) const override;
    void eval_deriv(double s, CoeffVec& out) const override;
    void breakpoints(double a, double b, std::vector<double>& out) const override;
    using History::eval;
    using History::eval_deriv;

    /// Sub-window [a, b] as a standalone buffer (exact; cubics restrict to cubics).
    HistoryBuffer window(double a, double b) const;

  private:
    double r_, anchor_;
    int m_;
    std::vector<HermiteSegment> segments_;
    int locate(double s) const;
};

/// C^1 initial data shapes, rendered to buffers via render_history.
struct InitialFunction {
    enum class Kind { Polynomial, Trig, Tabulated };

    struct TrigMode {
        int k = 1;  // one-based mode index
        double amplitude = 0.0, omega = 0.0, phase = 0.0;
    };

    Kind kind = Kind::Polynomial;
    double r = 1.0;
    int m = 1;
    std::vector<CoeffVec> poly_coeffs;   // phi(theta) = sum_j poly_coeffs[j] * theta^j
    std::vector<TrigMode> trig_modes;    // phi_k(theta) = amp * cos(omega*theta + phase)
    std::vector<double> tab_times;       // ascending, covering [-r, 0]
    std::vector<CoeffVec> tab_values, tab_derivs;

    CoeffVec value(double theta) const;
    CoeffVec derivative(double theta) const;
    void validate() const;

    static InitialFunction constant(const CoeffVec& value, double r);
};

/// Sample a shape into a Hermite buffer anchored at `anchor`.
/// `extra_breakpoints` (window-relative thetas) are forced onto the node grid.
HistoryBuffer render_history(const InitialFunction& shape, double anchor = 0.0,
                             int n_segments = 64,
                             const std::vector<double>& extra_breakpoints = {});

/// Norm sampling density: per-piece samples at j/kNormSamplesPerSegment.
inline constexpr int kNormSamplesPerSegment = 32;

/// max_s ||A^{-1/2} phi(s)||
double norm_c_minus_half(const SpectralBasis& basis, const History& h);
/// Lipschitz seminorm surrogate on [a, b]: sampled sup of ||A^{-1/2} phi'(s)||.
/// A sampled sup is a lower bound of the pairwise-quotient sup; for C^1 data
/// the two coincide.
double lipschitz_seminorm(const SpectralBasis& basis, const History& h, double a, double b);
/// max ||A^{-1/2} phi|| + ||A^{1/2} phi(0)||
double norm_h(const SpectralBasis& basis, const History& h);
/// max ||A^{-1/2} phi|| + |||phi||| + ||A^{1/2} phi(0)||
double norm_l(const SpectralBasis& basis, const History& h);
/// max ||A^{-1/2} phi|| + max ||A^{-1/2} phi'|| + ||A^{1/2} phi(0)||
double norm_x(const SpectralBasis& basis, const History& h);

}  // namespace sddpde
