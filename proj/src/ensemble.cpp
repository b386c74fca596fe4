#include "phaseonium/ensemble.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace phaseonium {

void SliceDiagnostics::merge(const SliceDiagnostics& o)
{
    population_deviation = std::max(population_deviation, o.population_deviation);
    coherence12_deviation = std::max(coherence12_deviation, o.coherence12_deviation);
    invariant_violation = std::max(invariant_violation, o.invariant_violation);
    finite = finite && o.finite;
}

namespace {

// ---------------------------------------------------------------------------
// Reference: full 3x3 density matrix, d rho/dt = -i [H, rho] with
// H = Delta |3><3| + Omega13 |1><3| + Omega23 |2><3| + h.c.

using Mat3 = std::array<std::array<cplx, 3>, 3>;

Mat3 commutator_rhs(const Mat3& rho, cplx o13, cplx o23)
{
    Mat3 v{};
    v[0][2] = o13;
    v[1][2] = o23;
    v[2][0] = std::conj(o13);
    v[2][1] = std::conj(o23);
    Mat3 out{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            cplx s{};
            for (int k = 0; k < 3; ++k) s += v[a][k] * rho[k][b] - rho[a][k] * v[k][b];
            out[a][b] = -I * s;
        }
    return out;
}

/// Free evolution over `h`: rho_ab picks up exp(-i (E_a - E_b) h), E = (0, 0, Delta).
Mat3 rotate(const Mat3& rho, const Mat3& phase)
{
    Mat3 out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) out[a][b] = rho[a][b] * phase[a][b];
    return out;
}

Mat3 axpy(const Mat3& y, double h, const Mat3& k)
{
    Mat3 out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) out[a][b] = y[a][b] + h * k[a][b];
    return out;
}

// ---------------------------------------------------------------------------
// Blocked kernel: the same equations written out in real arithmetic.

struct S9 {
    double p11, p22, p33, x12, y12, x13, y13, x23, y23;
};

struct Drive4 {
    double a, b, c, d;  // Omega13 = a + ib, Omega23 = c + id
};

[[gnu::always_inline]] inline S9 rhs(const S9& s, const Drive4& o)
{
    const double d13 = s.p11 - s.p33;
    const double d23 = s.p22 - s.p33;
    // u = Omega13 (p11 - p33) + Omega23 rho12
    const double ur = o.a * d13 + o.c * s.x12 - o.d * s.y12;
    const double ui = o.b * d13 + o.c * s.y12 + o.d * s.x12;
    // v = Omega23 (p22 - p33) + Omega13 rho21
    const double vr = o.c * d23 + o.a * s.x12 + o.b * s.y12;
    const double vi = o.d * d23 + o.b * s.x12 - o.a * s.y12;
    // w = Omega23^* rho13 - Omega13 rho32
    const double wr = (o.c * s.x13 + o.d * s.y13) - (o.a * s.x23 + o.b * s.y23);
    const double wi = (o.c * s.y13 - o.d * s.x13) - (o.b * s.x23 - o.a * s.y23);
    const double g11 = -2.0 * (o.a * s.y13 - o.b * s.x13);
    const double g22 = -2.0 * (o.c * s.y23 - o.d * s.x23);
    return {g11, g22, -(g11 + g22), -wi, wr, -ui, ur, -vi, vr};
}

[[gnu::always_inline]] inline S9 axpy9(const S9& y, double h, const S9& k)
{
    return {y.p11 + h * k.p11, y.p22 + h * k.p22, y.p33 + h * k.p33, y.x12 + h * k.x12, y.y12 + h * k.y12,
            y.x13 + h * k.x13, y.y13 + h * k.y13, y.x23 + h * k.x23, y.y23 + h * k.y23};
}

[[gnu::always_inline]] inline S9 rot9(const S9& y, double ce, double se)
{
    return {y.p11, y.p22, y.p33, y.x12, y.y12, y.x13 * ce - y.y13 * se, y.x13 * se + y.y13 * ce,
            y.x23 * ce - y.y23 * se, y.x23 * se + y.y23 * ce};
}

inline Drive4 split(cplx o13, cplx o23) { return {o13.real(), o13.imag(), o23.real(), o23.imag()}; }

[[gnu::always_inline]] inline double max3(double a, double b, double c) { return std::max(a, std::max(b, c)); }

[[gnu::always_inline]] inline double violation(double p11, double p22, double p33, double n12, double n13, double n23)
{
    double v = std::abs(p11 + p22 + p33 - 1.0);
    v = std::max(v, max3(-p11, -p22, -p33));
    v = std::max(v, max3(p11 - 1.0, p22 - 1.0, p33 - 1.0));
    v = std::max(v, max3(n12 - p11 * p22, n13 - p11 * p33, n23 - p22 * p33));
    return v;
}

}  // namespace

SliceDiagnostics evolve_classes_serial(const ClassArrays& a, const SliceDrive& drive, const PreparedState& ref,
                                       SlicePolarization& out)
{
    const std::size_t steps = drive.steps;
    const double h = drive.dt;
    out.p13.assign(steps + 1, cplx{});
    out.p23.assign(steps + 1, cplx{});
    SliceDiagnostics diag;

    for (std::size_t j = 0; j < a.n; ++j) {
        Mat3 rho{};
        rho[0][0] = a.p11[j];
        rho[1][1] = a.p22[j];
        rho[2][2] = a.p33[j];
        rho[0][1] = {a.x12[j], a.y12[j]};
        rho[0][2] = {a.x13[j], a.y13[j]};
        rho[1][2] = {a.x23[j], a.y23[j]};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < r; ++c) rho[r][c] = std::conj(rho[c][r]);

        Mat3 phase;
        const double energy[3] = {0.0, 0.0, a.delta[j]};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) phase[r][c] = std::polar(1.0, -(energy[r] - energy[c]) * 0.5 * h);

        const double w = a.weight[j];
        out.p13[0] += w * rho[0][2];
        out.p23[0] += w * rho[1][2];
        for (std::size_t i = 0; i < steps; ++i) {
            const Mat3 k1 = commutator_rhs(rho, drive.field13[i], drive.field23[i]);
            const Mat3 k2 = commutator_rhs(rotate(axpy(rho, 0.5 * h, k1), phase), drive.mid13[i], drive.mid23[i]);
            const Mat3 k3 = commutator_rhs(axpy(rotate(rho, phase), 0.5 * h, k2), drive.mid13[i], drive.mid23[i]);
            const Mat3 k4 = commutator_rhs(rotate(axpy(rotate(rho, phase), h, k3), phase), drive.field13[i + 1],
                                           drive.field23[i + 1]);
            Mat3 next = rotate(axpy(rotate(axpy(rho, h / 6.0, k1), phase), h / 3.0, k2), phase);
            next = axpy(axpy(next, h / 3.0, rotate(k3, phase)), h / 6.0, k4);
            rho = next;

            const double p11 = rho[0][0].real(), p22 = rho[1][1].real(), p33 = rho[2][2].real();
            diag.population_deviation = std::max(
                {diag.population_deviation, std::abs(p11 - ref.p11), std::abs(p22 - ref.p22), std::abs(p33)});
            diag.coherence12_deviation = std::max(diag.coherence12_deviation, std::abs(rho[0][1] - ref.s12));
            diag.invariant_violation =
                std::max(diag.invariant_violation, violation(p11, p22, p33, std::norm(rho[0][1]),
                                                             std::norm(rho[0][2]), std::norm(rho[1][2])));
            out.p13[i + 1] += w * rho[0][2];
            out.p23[i + 1] += w * rho[1][2];
        }

        a.p11[j] = rho[0][0].real();
        a.p22[j] = rho[1][1].real();
        a.p33[j] = rho[2][2].real();
        a.x12[j] = rho[0][1].real();
        a.y12[j] = rho[0][1].imag();
        a.x13[j] = rho[0][2].real();
        a.y13[j] = rho[0][2].imag();
        a.x23[j] = rho[1][2].real();
        a.y23[j] = rho[1][2].imag();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                if (!std::isfinite(rho[r][c].real()) || !std::isfinite(rho[r][c].imag())) diag.finite = false;
    }
    return diag;
}

SliceDiagnostics evolve_classes_blocked(const ClassArrays& a, const SliceDrive& drive, const PreparedState& ref,
                                        SlicePolarization& out)
{
    constexpr std::size_t B = class_block_size;
    const std::size_t steps = drive.steps;
    const std::size_t stride = steps + 1;
    const double h = drive.dt;
    const std::size_t nblocks = (a.n + B - 1) / B;

    std::vector<double> part(nblocks * stride * 4, 0.0);
    std::vector<SliceDiagnostics> block_diag(nblocks);

#pragma omp parallel for schedule(static)
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const std::size_t j0 = blk * B;
        const std::size_t m = std::min(B, a.n - j0);

        alignas(64) double p11[B] = {}, p22[B] = {}, p33[B] = {}, x12[B] = {}, y12[B] = {}, x13[B] = {},
                           y13[B] = {}, x23[B] = {}, y23[B] = {}, ce[B] = {}, se[B] = {}, w[B] = {};
        for (std::size_t l = 0; l < m; ++l) {
            const std::size_t j = j0 + l;
            p11[l] = a.p11[j];
            p22[l] = a.p22[j];
            p33[l] = a.p33[j];
            x12[l] = a.x12[j];
            y12[l] = a.y12[j];
            x13[l] = a.x13[j];
            y13[l] = a.y13[j];
            x23[l] = a.x23[j];
            y23[l] = a.y23[j];
            ce[l] = std::cos(0.5 * h * a.delta[j]);
            se[l] = std::sin(0.5 * h * a.delta[j]);
            w[l] = a.weight[j];
        }
        // Padding lanes carry zero weight and a ground state.
        for (std::size_t l = m; l < B; ++l) {
            p11[l] = 1.0;
            ce[l] = 1.0;
        }

        double* pr13 = part.data() + (blk * 4 + 0) * stride;
        double* pi13 = part.data() + (blk * 4 + 1) * stride;
        double* pr23 = part.data() + (blk * 4 + 2) * stride;
        double* pi23 = part.data() + (blk * 4 + 3) * stride;
        {
            double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
            for (std::size_t l = 0; l < B; ++l) {
                s0 += w[l] * x13[l];
                s1 += w[l] * y13[l];
                s2 += w[l] * x23[l];
                s3 += w[l] * y23[l];
            }
            pr13[0] = s0;
            pi13[0] = s1;
            pr23[0] = s2;
            pi23[0] = s3;
        }

        const double r11 = ref.p11, r22 = ref.p22, rx = ref.s12.real(), ry = ref.s12.imag();
        double dpop = 0.0, d12 = 0.0, viol = 0.0;
        for (std::size_t i = 0; i < steps; ++i) {
            const Drive4 o0 = split(drive.field13[i], drive.field23[i]);
            const Drive4 om = split(drive.mid13[i], drive.mid23[i]);
            const Drive4 o1 = split(drive.field13[i + 1], drive.field23[i + 1]);
            double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
#pragma omp simd reduction(+ : s0, s1, s2, s3) reduction(max : dpop, d12, viol)
            for (std::size_t l = 0; l < B; ++l) {
                const S9 y{p11[l], p22[l], p33[l], x12[l], y12[l], x13[l], y13[l], x23[l], y23[l]};
                const double c = ce[l], s = se[l];
                const S9 k1 = rhs(y, o0);
                const S9 k2 = rhs(rot9(axpy9(y, 0.5 * h, k1), c, s), om);
                const S9 yr = rot9(y, c, s);
                const S9 k3 = rhs(axpy9(yr, 0.5 * h, k2), om);
                const S9 k4 = rhs(rot9(axpy9(yr, h, k3), c, s), o1);
                S9 n = rot9(axpy9(y, h / 6.0, k1), c, s);
                n = axpy9(n, h / 3.0, k2);
                n = axpy9(n, h / 3.0, k3);
                n = rot9(n, c, s);
                n = axpy9(n, h / 6.0, k4);

                p11[l] = n.p11;
                p22[l] = n.p22;
                p33[l] = n.p33;
                x12[l] = n.x12;
                y12[l] = n.y12;
                x13[l] = n.x13;
                y13[l] = n.y13;
                x23[l] = n.x23;
                y23[l] = n.y23;

                const double live = w[l] > 0.0 ? 1.0 : 0.0;
                const double dp = max3(std::abs(n.p11 - r11), std::abs(n.p22 - r22), std::abs(n.p33));
                dpop = std::max(dpop, live * dp);
                d12 = std::max(d12, live * ((n.x12 - rx) * (n.x12 - rx) + (n.y12 - ry) * (n.y12 - ry)));
                const double n12 = n.x12 * n.x12 + n.y12 * n.y12;
                const double n13 = n.x13 * n.x13 + n.y13 * n.y13;
                const double n23 = n.x23 * n.x23 + n.y23 * n.y23;
                viol = std::max(viol, live * violation(n.p11, n.p22, n.p33, n12, n13, n23));

                s0 += w[l] * n.x13;
                s1 += w[l] * n.y13;
                s2 += w[l] * n.x23;
                s3 += w[l] * n.y23;
            }
            pr13[i + 1] = s0;
            pi13[i + 1] = s1;
            pr23[i + 1] = s2;
            pi23[i + 1] = s3;
        }

        bool finite = true;
        for (std::size_t l = 0; l < m; ++l) {
            const std::size_t j = j0 + l;
            a.p11[j] = p11[l];
            a.p22[j] = p22[l];
            a.p33[j] = p33[l];
            a.x12[j] = x12[l];
            a.y12[j] = y12[l];
            a.x13[j] = x13[l];
            a.y13[j] = y13[l];
            a.x23[j] = x23[l];
            a.y23[j] = y23[l];
            finite = finite && std::isfinite(p11[l] + p22[l] + p33[l] + x12[l] + y12[l] + x13[l] + y13[l] +
                                             x23[l] + y23[l]);
        }
        block_diag[blk] = {dpop, std::sqrt(d12), viol, finite && std::isfinite(dpop + viol)};
    }

    out.p13.assign(stride, cplx{});
    out.p23.assign(stride, cplx{});
    SliceDiagnostics diag;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const double* pr13 = part.data() + (blk * 4 + 0) * stride;
        const double* pi13 = part.data() + (blk * 4 + 1) * stride;
        const double* pr23 = part.data() + (blk * 4 + 2) * stride;
        const double* pi23 = part.data() + (blk * 4 + 3) * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            out.p13[i] += cplx{pr13[i], pi13[i]};
            out.p23[i] += cplx{pr23[i], pi23[i]};
        }
        diag.merge(block_diag[blk]);
    }
    return diag;
}

}  // namespace phaseonium
