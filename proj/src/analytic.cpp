#include "phaseonium/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phaseonium {

namespace {

constexpr double pure_tolerance = 1e-12;

void require_longitudinal(const PhaseoniumPreparation& prep)
{
    if (prep.incoherent || std::abs(prep.pop1 - 0.5) > pure_tolerance) {
        std::ostringstream msg;
        msg << "longitudinal closed forms need a coherent preparation with sigma11 = sigma22 = 1/2 (got sigma11="
            << prep.pop1 << (prep.incoherent ? ", incoherent" : "") << ")";
        throw WrongSolverError(msg.str());
    }
}

void require_uniform(const PhaseoniumPreparation& prep)
{
    if (!prep.uniform()) throw WrongSolverError("uniform closed forms called on a longitudinally graded preparation");
}

double peak_magnitude(const SpectralField& f)
{
    double m = 0.0;
    for (std::size_t k = 0; k < f.grid.n; ++k) m = std::max({m, std::abs(f.comp13[k]), std::abs(f.comp23[k])});
    return m;
}

void check_grids(const SpectralField& input, const SpectralMedium& medium)
{
    if (input.grid.n != medium.grid().n || input.grid.dt != medium.grid().dt)
        throw ConfigError("spectral field and medium use different grids");
    if (input.direction != Direction::forward) throw ConfigError("input spectrum must be a forward field");
}

/// Applies m(k) to input(src(k)) on active bins; inactive bins must carry a
/// negligible input and are zeroed.
template <class MatrixAt, class Source>
SpectralField apply_transfer(const SpectralField& input, const SpectralMedium& medium, Direction dir, MatrixAt matrix_at,
                             Source src)
{
    check_grids(input, medium);
    const double peak = peak_magnitude(input);
    const double floor = 1e-12 * peak;
    SpectralField out(input.grid, dir);
    for (std::size_t k = 0; k < input.grid.n; ++k) {
        const std::size_t s = src(k);
        if (!medium.active(k) || !medium.active(s)) {
            if (std::abs(input.comp13[s]) > floor || std::abs(input.comp23[s]) > floor) {
                std::ostringstream msg;
                msg << "input spectrum at omega=" << input.grid.omega(s)
                    << " exceeds the kernel span; widen the profile span";
                throw ExtrapolationError(msg.str());
            }
            continue;
        }
        const auto v = matrix_at(k).apply(input.comp13[s], input.comp23[s]);
        out.comp13[k] = v[0];
        out.comp23[k] = v[1];
    }
    return out;
}

double z_over_L(const SpectralMedium& medium, double alpha_z)
{
    const double od = medium.medium().optical_depth;
    if (alpha_z < 0.0 || alpha_z > od * (1.0 + 1e-12))
        throw DomainError("position alpha z must lie within [0, optical depth]");
    return std::min(alpha_z / od, 1.0);
}

}  // namespace

Mat2 operator*(const Mat2& a, const Mat2& b)
{
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22, a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22};
}

cplx sinhc(cplx K, double x, double small_k)
{
    if (std::abs(K) < small_k) {
        const cplx k2 = K * K;
        const double x2 = x * x;
        return x * (1.0 + k2 * x2 / 6.0 + k2 * k2 * x2 * x2 / 120.0 + k2 * k2 * k2 * x2 * x2 * x2 / 5040.0);
    }
    return std::sinh(K * x) / K;
}

Mat2 conjugate_by_phase(const Mat2& m, double phi12)
{
    const cplx e = std::polar(1.0, phi12);
    return {m.m11, m.m12 * e, m.m21 * std::conj(e), m.m22};
}

Mat2 uniform_forward_matrix(const PhaseoniumPreparation& prep, cplx alpha_L, double z)
{
    if (prep.incoherent) {
        return {std::exp(-alpha_L * prep.pop1 * z), 0.0, 0.0, std::exp(-alpha_L * prep.pop2 * z)};
    }
    const cplx s12 = coherence_at(prep, 0.0);
    const cplx g = 1.0 - std::exp(-alpha_L * z);
    return {1.0 - g * prep.pop1, -g * s12, -g * std::conj(s12), 1.0 - g * prep.pop2};
}

Mat2 uniform_backward_matrix(const PhaseoniumPreparation& prep, cplx etaF_L, cplx etaHm_L, cplx etaJ_L, double z)
{
    if (etaJ_L == cplx{}) return {};
    const cplx sigma = etaF_L + etaHm_L;
    const cplx ratio = etaJ_L / sigma;
    auto channel = [&](double lambda) -> cplx {
        if (lambda == 0.0) return 0.0;
        return ratio * std::exp(-lambda * etaHm_L * z) * (std::exp(-lambda * sigma * (1.0 - z)) - 1.0);
    };
    if (prep.incoherent) return {channel(prep.pop1), 0.0, 0.0, channel(prep.pop2)};
    const cplx g = channel(1.0);
    const cplx s12 = coherence_at(prep, 0.0);
    return {g * prep.pop1, g * s12, g * std::conj(s12), g * prep.pop2};
}

Mat2 longitudinal_forward_matrix(cplx alpha_L, double theta, double z, double small_k)
{
    const cplx K = std::sqrt(alpha_L * alpha_L - theta * theta);
    const cplx decay = std::exp(-alpha_L * z / 2.0);
    const cplx ch = std::cosh(K * z / 2.0);
    const cplx sh = sinhc(K, z / 2.0, small_k);
    const cplx itheta = I * theta;
    const cplx p = std::exp(I * theta * z / 2.0);
    return {p * decay * (ch - itheta * sh), -p * decay * alpha_L * sh, -std::conj(p) * decay * alpha_L * sh,
            std::conj(p) * decay * (ch + itheta * sh)};
}

Mat2 longitudinal_backward_matrix(cplx etaF_L, cplx etaHm_L, cplx etaJ_L, double theta, double z, double small_k)
{
    if (etaJ_L == cplx{}) return {};
    const cplx A = etaF_L;
    const cplx B = etaHm_L;
    const cplx S = A + B;
    const cplx Q = std::sqrt(A * A - theta * theta);
    const cplx Km = std::sqrt(B * B - theta * theta);
    const cplx ratio = etaJ_L / S;

    const cplx e1 = std::exp(z * A / 2.0 - S / 2.0);
    const cplx e2 = std::exp(-z * B / 2.0);
    const double w = (1.0 - z) / 2.0;
    const cplx sQ = sinhc(Q, w, small_k);
    const cplx cW = std::cosh(Q * w);
    const cplx sK = sinhc(Km, 0.5, small_k);
    const cplx cK = std::cosh(Km / 2.0);
    const cplx sKz = sinhc(Km, z / 2.0, small_k);
    const cplx cKz = std::cosh(Km * z / 2.0);

    auto diagonal = [&](double s) {
        const cplx is = I * (s * theta);
        const cplx brace = e1 * (is * sQ * cK + cW * cK + (theta * theta + A * B) * sQ * sK - is * cW * sK) -
                           e2 * (cKz - is * sKz);
        return std::exp(I * (s * theta * z / 2.0)) * ratio * brace;
    };
    auto off_diagonal = [&](double s) {
        const cplx is = I * (s * theta);
        const cplx brace = e1 * (A * sQ * cK + B * cW * sK + is * S * sQ * sK) - e2 * B * sKz;
        return -std::exp(I * (s * theta * z / 2.0)) * ratio * brace;
    };
    // Row mu = 1 pairs with nu = 2, (-1)^nu = +1; row 2 with nu = 1.
    return {diagonal(1.0), off_diagonal(1.0), off_diagonal(-1.0), diagonal(-1.0)};
}

SpectralMedium::SpectralMedium(MediumSpec medium, TimeGrid grid, KernelQuadrature q)
    : medium_(std::move(medium)), grid_(grid), slot_(grid.n, -1)
{
    std::vector<double> omega;
    const double span = medium_.profile.span();
    for (std::size_t k = 0; k < grid_.n; ++k) {
        const double w = grid_.omega(k);
        if (std::abs(w) <= span) {
            slot_[k] = static_cast<long>(omega.size());
            omega.push_back(w);
        }
    }
    table_ = tabulate_kernels(medium_, omega, q);
}

SpectralField propagate_forward_uniform(const SpectralField& input, const SpectralMedium& medium, double alpha_z)
{
    const auto& prep = medium.medium().preparation;
    require_uniform(prep);
    const double z = z_over_L(medium, alpha_z);
    return apply_transfer(
        input, medium, Direction::forward, [&](std::size_t k) { return uniform_forward_matrix(prep, medium.alpha(k), z); },
        [](std::size_t k) { return k; });
}

SpectralField retrieve_backward_uniform(const SpectralField& input, const SpectralMedium& medium, double alpha_z)
{
    const auto& prep = medium.medium().preparation;
    require_uniform(prep);
    const double z = z_over_L(medium, alpha_z);
    const double eta = medium.eta();
    const TimeGrid& g = input.grid;
    return apply_transfer(
        input, medium, Direction::backward,
        [&](std::size_t k) {
            return uniform_backward_matrix(prep, eta * medium.F(k), eta * medium.H(g.mirror(k)), eta * medium.J(k), z);
        },
        [&](std::size_t k) { return g.mirror(k); });
}

SpectralField propagate_forward_longitudinal(const SpectralField& input, const SpectralMedium& medium, double alpha_z)
{
    const auto& prep = medium.medium().preparation;
    require_longitudinal(prep);
    const double z = z_over_L(medium, alpha_z);
    const double small = medium.small_k();
    return apply_transfer(
        input, medium, Direction::forward,
        [&](std::size_t k) {
            return conjugate_by_phase(longitudinal_forward_matrix(medium.alpha(k), prep.theta, z, small), prep.phi12);
        },
        [](std::size_t k) { return k; });
}

SpectralField retrieve_backward_longitudinal(const SpectralField& input, const SpectralMedium& medium, double alpha_z)
{
    const auto& prep = medium.medium().preparation;
    require_longitudinal(prep);
    const double z = z_over_L(medium, alpha_z);
    const double eta = medium.eta();
    const double small = medium.small_k();
    const TimeGrid& g = input.grid;
    return apply_transfer(
        input, medium, Direction::backward,
        [&](std::size_t k) {
            const Mat2 c = longitudinal_backward_matrix(eta * medium.F(k), eta * medium.H(g.mirror(k)),
                                                        eta * medium.J(k), prep.theta, z, small);
            return conjugate_by_phase(c, prep.phi12);
        },
        [&](std::size_t k) { return g.mirror(k); });
}

bool analytic_supported(const PhaseoniumPreparation& prep)
{
    if (prep.uniform()) return true;
    return !prep.incoherent && std::abs(prep.pop1 - 0.5) <= pure_tolerance;
}

SpectralField propagate_forward(const SpectralField& input, const SpectralMedium& medium, double alpha_z)
{
    if (medium.medium().preparation.uniform()) return propagate_forward_uniform(input, medium, alpha_z);
    return propagate_forward_longitudinal(input, medium, alpha_z);
}

SpectralField retrieve_backward(const SpectralField& input, const SpectralMedium& medium, double alpha_z)
{
    if (medium.medium().preparation.uniform()) return retrieve_backward_uniform(input, medium, alpha_z);
    return retrieve_backward_longitudinal(input, medium, alpha_z);
}

std::array<double, 2> forward_limit_intensities(const PhaseoniumPreparation& prep)
{
    require_uniform(prep);
    if (prep.incoherent) throw WrongSolverError("large-depth forward limit assumes a coherent preparation");
    return {prep.pop2, prep.pop1};
}

std::array<double, 2> backward_limit_intensities(const PhaseoniumPreparation& prep)
{
    require_uniform(prep);
    if (prep.incoherent) throw WrongSolverError("large-depth backward limit assumes a coherent preparation");
    return {prep.pop1, prep.pop2};
}

SpectralField memory_limit(const SpectralField& input)
{
    SpectralField out(input.grid, Direction::backward);
    for (std::size_t k = 0; k < input.grid.n; ++k) {
        const std::size_t s = input.grid.mirror(k);
        out.comp13[k] = -input.comp13[s];
        out.comp23[k] = -input.comp23[s];
    }
    return out;
}

}  // namespace phaseonium
