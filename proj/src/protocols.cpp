#include "phaseonium/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phaseonium {

namespace {

void require_unit(const PolarizationQubit& q)
{
    if (std::abs(q.norm2() - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "input qubit must be normalized (|a_L|^2 + |a_R|^2 = " << q.norm2() << ")";
        throw DomainError(msg.str());
    }
}

double attenuation(double rate, double optical_depth)
{
    if (rate == 0.0) return 1.0;
    return std::isinf(optical_depth) ? 0.0 : std::exp(-rate * optical_depth);
}

}  // namespace

NormalModePair normal_modes(const PhaseoniumPreparation& prep)
{
    if (prep.incoherent) throw UndefinedModesError("normal modes are undefined for an incoherent preparation");
    const cplx c1 = std::polar(std::sqrt(prep.pop1), prep.phi12);
    const cplx c2{std::sqrt(prep.pop2), 0.0};
    return {{c1, c2}, {std::conj(c2), -std::conj(c1)}};
}

ChannelOutput filter_output(const PolarizationQubit& input, const PhaseoniumPreparation& prep, double optical_depth)
{
    require_unit(input);
    if (prep.incoherent) {
        const PolarizationQubit out{input.a_L * attenuation(prep.pop1, optical_depth),
                                    input.a_R * attenuation(prep.pop2, optical_depth)};
        return {out, out.norm2(), true};
    }
    const PolarizationQubit A = normal_modes(prep).antisymmetric;
    const cplx amp = inner(A, input);
    return {amp * A, std::norm(amp), false};
}

ChannelOutput sieve_output(const PolarizationQubit& input, const PhaseoniumPreparation& prep, double optical_depth)
{
    require_unit(input);
    if (prep.incoherent) {
        // Symmetric line: the re-emitted amplitude is -(1 - e^{-2 sigma_mu mu alpha L}).
        const PolarizationQubit out{-input.a_L * (1.0 - attenuation(2.0 * prep.pop1, optical_depth)),
                                    -input.a_R * (1.0 - attenuation(2.0 * prep.pop2, optical_depth))};
        return {out, out.norm2(), true};
    }
    const PolarizationQubit S = normal_modes(prep).symmetric;
    const cplx amp = inner(S, input);
    return {-amp * S, std::norm(amp), false};
}

ProtocolResult splitter(const PolarizationQubit& input, const PhaseoniumPreparation& prep, double optical_depth)
{
    const ChannelOutput f = filter_output(input, prep, optical_depth);
    const ChannelOutput b = sieve_output(input, prep, optical_depth);
    ProtocolResult r;
    r.forward_state = f.state;
    r.backward_state = b.state;
    r.p_forward = f.probability;
    r.p_backward = b.probability;
    r.efficiency = b.probability;
    r.fidelity = qubit_fidelity(input, b.state);
    r.decoupled = f.decoupled;
    if (!r.decoupled) {
        if (std::abs(r.p_forward + r.p_backward - 1.0) > 1e-10)
            throw Error("splitter probabilities do not sum to one");
        if (std::abs(inner(r.forward_state, r.backward_state)) > 1e-10)
            throw Error("splitter outputs are not orthogonal");
    }
    return r;
}

double qubit_fidelity(const PolarizationQubit& a, const PolarizationQubit& b)
{
    const double na = a.norm2();
    const double nb = b.norm2();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::min(1.0, std::norm(inner(a, b)) / (na * nb));
}

MemoryMetrics memory_fidelity(const PulseSpec& input, const TimeField& retrieved, double t_switch)
{
    const auto mode = reversed_envelope(input, retrieved.grid, t_switch);
    double mode_norm2 = 0.0;
    cplx p13{}, p23{};
    for (std::size_t i = 0; i < mode.size(); ++i) {
        mode_norm2 += mode[i] * mode[i];
        p13 += retrieved.comp13[i] * mode[i];
        p23 += retrieved.comp23[i] * mode[i];
    }
    mode_norm2 *= retrieved.grid.dt;
    p13 *= retrieved.grid.dt;
    p23 *= retrieved.grid.dt;

    MemoryMetrics m;
    const double e_ret = retrieved.energy();
    const double e_in = input.energy();
    if (e_in == 0.0 || e_ret == 0.0) return m;
    m.efficiency = e_ret / e_in;
    // Amplitude of the mode-matched component relative to the input's peak Rabi frequency.
    m.retrieved = {p13 / (mode_norm2 * input.peak_rabi), p23 / (mode_norm2 * input.peak_rabi)};
    m.mode_overlap = (std::norm(p13) + std::norm(p23)) / (mode_norm2 * e_ret);
    m.fidelity = qubit_fidelity(input.qubit, m.retrieved);
    return m;
}

MemoryMetrics memory_fidelity(const PulseSpec& input, const SpectralField& retrieved)
{
    return memory_fidelity(input, to_time(retrieved), retrieved.grid.t_ref);
}

}  // namespace phaseonium
