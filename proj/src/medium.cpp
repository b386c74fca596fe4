#include "phaseonium/medium.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace phaseonium {

double PhaseoniumPreparation::coherence_magnitude() const
{
    return incoherent ? 0.0 : std::sqrt(pop1 * pop2);
}

PhaseoniumPreparation make_phaseonium(double pop1, double phi12, double theta, bool incoherent)
{
    if (!(pop1 >= 0.0 && pop1 <= 1.0))
        throw DomainError("population of level 1 must lie in [0, 1], got " + std::to_string(pop1));
    if (!std::isfinite(phi12) || !std::isfinite(theta)) throw DomainError("preparation phases must be finite");
    return {pop1, 1.0 - pop1, phi12, theta, incoherent};
}

cplx coherence_at(const PhaseoniumPreparation& prep, double z_over_L)
{
    return std::polar(prep.coherence_magnitude(), prep.phi12 + prep.theta * z_over_L);
}

std::string_view to_string(ProfileShape shape)
{
    switch (shape) {
    case ProfileShape::gaussian: return "gaussian";
    case ProfileShape::lorentzian: return "lorentzian";
    case ProfileShape::flat_top: return "flat_top";
    }
    return "?";
}

ProfileShape profile_shape_from_string(std::string_view name)
{
    if (name == "gaussian") return ProfileShape::gaussian;
    if (name == "lorentzian" || name == "lorentzian_truncated") return ProfileShape::lorentzian;
    if (name == "flat_top" || name == "flat-top" || name == "flat") return ProfileShape::flat_top;
    throw ConfigError("unknown profile shape '" + std::string(name) + "'");
}

InhomogeneousProfile::InhomogeneousProfile(ProfileShape shape, double width, double span)
    : shape_(shape), width_(width), span_(span)
{
    if (!(width > 0.0) || !std::isfinite(width)) throw ConfigError("profile width must be positive");
    if (!(span > 0.0) || !std::isfinite(span)) throw ConfigError("profile span must be positive");
    switch (shape) {
    case ProfileShape::gaussian:
        if (span < 5.0 * width) throw ConfigError("gaussian profile: span must be at least 5x width");
        norm_ = 1.0 / std::erf(span / (std::sqrt(2.0) * width));
        break;
    case ProfileShape::lorentzian:
        if (span < 5.0 * width) throw ConfigError("lorentzian profile: span must be at least 5x width");
        norm_ = 1.0 / (2.0 / pi * std::atan(span / width));
        break;
    case ProfileShape::flat_top:
        // Compact support: the span only has to cover it.
        if (span < 0.5 * width) throw ConfigError("flat_top profile: span must cover the support (width/2)");
        norm_ = 1.0 / width;
        break;
    }
}

InhomogeneousProfile InhomogeneousProfile::default_flat_top(double duration, double factor)
{
    const double pulse_fwhm = 2.0 * std::sqrt(std::log(2.0)) / duration;
    const double width = factor * pulse_fwhm;
    return {ProfileShape::flat_top, width, width};
}

double InhomogeneousProfile::support() const
{
    return shape_ == ProfileShape::flat_top ? 0.5 * width_ : span_;
}

double InhomogeneousProfile::density(double delta) const
{
    const double a = std::abs(delta);
    if (a > span_) return 0.0;
    switch (shape_) {
    case ProfileShape::gaussian: {
        const double x = delta / width_;
        return norm_ * std::exp(-0.5 * x * x) / (std::sqrt(2.0 * pi) * width_);
    }
    case ProfileShape::lorentzian: return norm_ * width_ / (pi * (delta * delta + width_ * width_));
    case ProfileShape::flat_top: return a <= 0.5 * width_ ? norm_ : 0.0;
    }
    return 0.0;
}

std::vector<double> InhomogeneousProfile::breakpoints() const
{
    if (shape_ == ProfileShape::flat_top && 0.5 * width_ < span_) return {-0.5 * width_, 0.5 * width_};
    return {};
}

double InhomogeneousProfile::second_moment() const
{
    switch (shape_) {
    case ProfileShape::gaussian: {
        const double k = span_ / width_;
        const double phi = std::exp(-0.5 * k * k) / std::sqrt(2.0 * pi);
        return width_ * width_ * (std::erf(k / std::sqrt(2.0)) - 2.0 * k * phi) * norm_;
    }
    case ProfileShape::lorentzian:
        return norm_ * width_ / pi * (2.0 * span_ - 2.0 * width_ * std::atan(span_ / width_));
    case ProfileShape::flat_top: {
        const double b = 0.5 * width_;
        return b * b / 3.0;
    }
    }
    return 0.0;
}

namespace {

struct GlTableDeleter {
    void operator()(gsl_integration_glfixed_table* t) const { gsl_integration_glfixed_table_free(t); }
};

}  // namespace

DetuningGrid sample_profile(const InhomogeneousProfile& profile, std::size_t n)
{
    if (n < 2 || n % 2 != 0) throw ConfigError("detuning grid size must be even and >= 2");
    DetuningGrid grid;
    grid.nodes.resize(n);
    grid.weights.resize(n);
    const std::size_t half = n / 2;

    if (profile.shape() == ProfileShape::flat_top) {
        const double b = profile.support();
        const double step = 2.0 * b / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < half; ++j) {
            const double w = (j == 0 ? 0.5 : 1.0) * step * profile.density(0.0);
            grid.nodes[j] = -b + static_cast<double>(j) * step;
            grid.nodes[n - 1 - j] = b - static_cast<double>(j) * step;
            grid.weights[j] = grid.weights[n - 1 - j] = w;
        }
    } else {
        std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter> table(
            gsl_integration_glfixed_table_alloc(n));
        const double s = profile.span();
        std::vector<std::pair<double, double>> negative;
        for (std::size_t i = 0; i < n; ++i) {
            double x = 0.0, w = 0.0;
            gsl_integration_glfixed_point(-s, s, i, &x, &w, table.get());
            if (x < 0.0) negative.emplace_back(x, w);
        }
        if (negative.size() != half) throw Error("unexpected Gauss-Legendre node layout");
        std::sort(negative.begin(), negative.end());
        // Rebuild an exactly mirrored rule from the negative members.
        for (std::size_t j = 0; j < half; ++j) {
            const auto [x, w] = negative[j];
            grid.nodes[j] = x;
            grid.nodes[n - 1 - j] = -x;
            grid.weights[j] = grid.weights[n - 1 - j] = w * profile.density(x);
        }
    }

    // Pairwise summation keeps the rescale itself symmetric.
    double total = 0.0;
    for (std::size_t j = 0; j < half; ++j) total += 2.0 * grid.weights[j];
    for (double& w : grid.weights) w /= total;
    return grid;
}

MediumSpec::MediumSpec(PhaseoniumPreparation prep, InhomogeneousProfile prof, double od)
    : preparation(prep), profile(prof), optical_depth(od)
{
    if (!(od > 0.0) || !std::isfinite(od)) throw DomainError("optical depth must be positive");
}

}  // namespace phaseonium
