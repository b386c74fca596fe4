#include "phaseonium/blochsim.hpp"

#include "phaseonium/kernels.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

namespace phaseonium {

TimeGrid SimGrid::time_grid() const
{
    return TimeGrid::centered(n_t, 0.5 * (t_end - t_start), 0.5 * (t_start + t_end));
}

std::size_t SimGrid::switch_index() const
{
    const double k = (t_switch - t_start) / dt();
    return static_cast<std::size_t>(std::llround(k));
}

void SimGrid::validate(const InhomogeneousProfile& profile) const
{
    if (n_z < 2) throw ConfigError("grid.n_z must be at least 2");
    if (n_t < 16 || n_t % 2 != 0) throw ConfigError("grid.n_t must be even and at least 16");
    if (n_delta < 2 || n_delta % 2 != 0) throw ConfigError("grid.n_delta must be even and at least 2");
    if (!(t_end > t_start)) throw ConfigError("grid time window is empty");
    if (!(t_switch > t_start && t_switch < t_end)) throw ConfigError("grid.t_switch must lie inside the time window");
    const double k = (t_switch - t_start) / dt();
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
        throw ConfigError("grid.t_switch must fall on a time sample");
    const std::size_t ks = switch_index();
    if (ks < 4 || ks + 4 > n_t) throw ConfigError("grid.t_switch leaves too few samples in one stage");

    const double dmax = profile.support();
    const double points = 2.0 * pi / (dmax * dt());
    if (points < 20.0) {
        std::ostringstream msg;
        msg << "time step resolves the largest detuning with " << points
            << " points per period (< 20); raise n_t to at least "
            << static_cast<std::size_t>(std::ceil(20.0 * dmax * (t_end - t_start) / (2.0 * pi)));
        throw ResolutionError(msg.str());
    }
}

AtomicState::AtomicState(const MediumSpec& medium, const DetuningGrid& classes, std::size_t z_nodes)
    : detuning(classes.nodes), weight(classes.weights), nodes_(z_nodes)
{
    const std::size_t n = z_nodes * classes.size();
    const auto& prep = medium.preparation;
    p11.assign(n, prep.pop1);
    p22.assign(n, prep.pop2);
    p33.assign(n, 0.0);
    x12.resize(n);
    y12.resize(n);
    for (auto* v : {&x13f, &y13f, &x23f, &y23f, &x13b, &y13b, &x23b, &y23b}) v->assign(n, 0.0);
    prepared.resize(z_nodes);
    for (std::size_t node = 0; node < z_nodes; ++node) {
        const double z = static_cast<double>(node) / static_cast<double>(z_nodes - 1);
        const cplx s12 = coherence_at(prep, z);
        prepared[node] = {prep.pop1, prep.pop2, s12};
        for (std::size_t j = 0; j < classes.size(); ++j) {
            x12[index(node, j)] = s12.real();
            y12[index(node, j)] = s12.imag();
        }
    }
}

cplx AtomicState::sigma12(std::size_t node, std::size_t j) const
{
    const std::size_t k = index(node, j);
    return {x12[k], y12[k]};
}

cplx AtomicState::sigma13(Direction d, std::size_t node, std::size_t j) const
{
    const std::size_t k = index(node, j);
    return d == Direction::forward ? cplx{x13f[k], y13f[k]} : cplx{x13b[k], y13b[k]};
}

cplx AtomicState::sigma23(Direction d, std::size_t node, std::size_t j) const
{
    const std::size_t k = index(node, j);
    return d == Direction::forward ? cplx{x23f[k], y23f[k]} : cplx{x23b[k], y23b[k]};
}

ClassArrays AtomicState::view(std::size_t node)
{
    const std::size_t o = index(node, 0);
    const bool fwd = active == Direction::forward;
    return {p11.data() + o,
            p22.data() + o,
            p33.data() + o,
            x12.data() + o,
            y12.data() + o,
            (fwd ? x13f : x13b).data() + o,
            (fwd ? y13f : y13b).data() + o,
            (fwd ? x23f : x23b).data() + o,
            (fwd ? y23f : y23b).data() + o,
            detuning.data(),
            weight.data(),
            classes()};
}

AtomicState apply_crib_switch(const AtomicState& state)
{
    AtomicState s = state;
    for (double& d : s.detuning) d = -d;
    std::swap(s.x13f, s.x13b);
    std::swap(s.y13f, s.y13b);
    std::swap(s.x23f, s.x23b);
    std::swap(s.y23f, s.y23b);
    s.active = s.active == Direction::forward ? Direction::backward : Direction::forward;
    return s;
}

SimulationRecord::SimulationRecord(AtomicState s, const SimGrid& g)
    : grid(g), time(g.time_grid()), output(time), state(std::move(s))
{
}

namespace {

using Clock = std::chrono::steady_clock;

/// Values at t_i + dt/2 from samples at t_i: cubic inside, quadratic at the ends.
void midpoints(const std::vector<cplx>& f, std::vector<cplx>& mid)
{
    const std::size_t n = f.size();
    mid.resize(n - 1);
    mid[0] = (3.0 * f[0] + 6.0 * f[1] - f[2]) / 8.0;
    for (std::size_t i = 1; i + 2 < n; ++i) mid[i] = (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0;
    mid[n - 2] = (-f[n - 3] + 6.0 * f[n - 2] + 3.0 * f[n - 1]) / 8.0;
}

double field_energy(const std::vector<cplx>& a, const std::vector<cplx>& b, double dt)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e += std::norm(a[i]) + std::norm(b[i]);
    return e * dt;
}

struct NodeBackup {
    std::vector<double> data;
};

NodeBackup save_node(AtomicState& s, std::size_t node)
{
    const ClassArrays v = s.view(node);
    NodeBackup b;
    for (double* p : {v.p11, v.p22, v.p33, v.x12, v.y12, v.x13, v.y13, v.x23, v.y23}) b.data.insert(b.data.end(), p, p + v.n);
    return b;
}

void restore_node(AtomicState& s, std::size_t node, const NodeBackup& b)
{
    const ClassArrays v = s.view(node);
    std::size_t k = 0;
    for (double* p : {v.p11, v.p22, v.p33, v.x12, v.y12, v.x13, v.y13, v.x23, v.y23}) {
        std::copy(b.data.begin() + static_cast<std::ptrdiff_t>(k), b.data.begin() + static_cast<std::ptrdiff_t>(k + v.n), p);
        k += v.n;
    }
}

/// Marches the stage's field across the nodes in `order`. In the marching
/// coordinate s (z forward, L - z backward) the field obeys
/// dOmega/ds = i eta sum_j w_j sigma_mu3,j.
void march(SimulationRecord& rec, const MediumSpec& medium, const std::vector<std::size_t>& order,
           std::vector<cplx> f13, std::vector<cplx> f23, std::vector<cplx> m13, std::vector<cplx> m23,
           const SimOptions& opt)
{
    AtomicState& state = rec.state;
    const SimGrid& grid = rec.grid;
    const std::size_t steps = rec.last_index - rec.first_index;
    const double dt = grid.dt();
    const double dz = grid.dz();
    const cplx ieta = I * coupling_eta(medium);
    const double e_ref = state.input_energy;

    auto evolve = [&](std::size_t node, const std::vector<cplx>& a13, const std::vector<cplx>& a23,
                      const std::vector<cplx>& b13, const std::vector<cplx>& b23, SlicePolarization& pol) {
        const ClassArrays v = state.view(node);
        const SliceDrive d{a13.data(), a23.data(), b13.data(), b23.data(), steps, dt};
        const SliceDiagnostics diag = opt.kernel == KernelChoice::blocked
                                          ? evolve_classes_blocked(v, d, state.prepared[node], pol)
                                          : evolve_classes_serial(v, d, state.prepared[node], pol);
        if (!diag.finite || diag.invariant_violation > opt.instability_threshold) {
            std::ostringstream msg;
            msg << "Maxwell-Bloch march unstable at z/L=" << rec.z[node] << " (density-matrix invariant violated by "
                << diag.invariant_violation << "); refine the grid, e.g. n_z=" << 2 * grid.n_z
                << " or n_t=" << 2 * grid.n_t;
            throw ResolutionError(msg.str());
        }
        rec.diagnostics.population_deviation = std::max(rec.diagnostics.population_deviation, diag.population_deviation);
        rec.diagnostics.coherence12_deviation =
            std::max(rec.diagnostics.coherence12_deviation, diag.coherence12_deviation);
        rec.diagnostics.invariant_violation = std::max(rec.diagnostics.invariant_violation, diag.invariant_violation);
    };

    auto source = [&](const SlicePolarization& pol, std::vector<cplx>& s13, std::vector<cplx>& s23) {
        s13.resize(pol.p13.size());
        s23.resize(pol.p23.size());
        for (std::size_t i = 0; i < pol.p13.size(); ++i) {
            s13[i] = ieta * pol.p13[i];
            s23[i] = ieta * pol.p23[i];
        }
    };

    auto record_node = [&](std::size_t node) {
        rec.profile[node] = summarize(f13, f23, dt);
        const double e = rec.profile[node].energy();
        if (e_ref > 0.0 && !(e <= 1.01 * e_ref)) {
            std::ostringstream msg;
            msg << "Maxwell-Bloch march gained energy at z/L=" << rec.z[node] << " (" << e / e_ref
                << " of the input); refine the grid, e.g. n_z=" << 2 * grid.n_z;
            throw ResolutionError(msg.str());
        }
        const bool face = node == order.front() || node == order.back();
        const std::size_t stride = grid.field_snapshot_stride;
        if (face || (stride > 0 && node % stride == 0)) rec.snapshots.push_back({node, rec.z[node], f13, f23});
    };

    // Source history per component: hist[0] at the last node, hist[1] one node back, ...
    SlicePolarization pol;
    std::array<std::vector<cplx>, 4> h13, h23;
    std::vector<cplx> s13, s23, p13(steps + 1), p23(steps + 1);

    evolve(order[0], f13, f23, m13, m23, pol);
    source(pol, h13[0], h23[0]);
    record_node(order[0]);

    for (std::size_t k = 1; k < order.size(); ++k) {
        const std::size_t node = order[k];
        // The first steps use Euler / Adams-Bashforth 2 with a trapezoid
        // corrector and re-evaluation; afterwards the 4th-order
        // Adams-Bashforth-Moulton pair without re-evaluation.
        const bool startup = k <= 3;
        for (std::size_t i = 0; i <= steps; ++i) {
            if (k == 1) {
                p13[i] = f13[i] + dz * h13[0][i];
                p23[i] = f23[i] + dz * h23[0][i];
            } else if (startup) {
                p13[i] = f13[i] + dz * (1.5 * h13[0][i] - 0.5 * h13[1][i]);
                p23[i] = f23[i] + dz * (1.5 * h23[0][i] - 0.5 * h23[1][i]);
            } else {
                p13[i] = f13[i] + dz / 24.0 * (55.0 * h13[0][i] - 59.0 * h13[1][i] + 37.0 * h13[2][i] - 9.0 * h13[3][i]);
                p23[i] = f23[i] + dz / 24.0 * (55.0 * h23[0][i] - 59.0 * h23[1][i] + 37.0 * h23[2][i] - 9.0 * h23[3][i]);
            }
        }
        NodeBackup backup;
        if (startup) backup = save_node(state, node);
        midpoints(p13, m13);
        midpoints(p23, m23);
        evolve(node, p13, p23, m13, m23, pol);
        source(pol, s13, s23);

        for (std::size_t i = 0; i <= steps; ++i) {
            if (startup) {
                f13[i] += 0.5 * dz * (h13[0][i] + s13[i]);
                f23[i] += 0.5 * dz * (h23[0][i] + s23[i]);
            } else {
                f13[i] += dz / 24.0 * (9.0 * s13[i] + 19.0 * h13[0][i] - 5.0 * h13[1][i] + h13[2][i]);
                f23[i] += dz / 24.0 * (9.0 * s23[i] + 19.0 * h23[0][i] - 5.0 * h23[1][i] + h23[2][i]);
            }
        }
        if (startup) {
            restore_node(state, node, backup);
            midpoints(f13, m13);
            midpoints(f23, m23);
            evolve(node, f13, f23, m13, m23, pol);
            source(pol, s13, s23);
        }
        std::rotate(h13.rbegin(), h13.rbegin() + 1, h13.rend());
        std::rotate(h23.rbegin(), h23.rbegin() + 1, h23.rend());
        h13[0].swap(s13);
        h23[0].swap(s23);
        record_node(node);
    }

    for (std::size_t i = 0; i <= steps; ++i) {
        rec.output.comp13[rec.first_index + i] = f13[i];
        rec.output.comp23[rec.first_index + i] = f23[i];
    }
    rec.diagnostics.output_energy = field_energy(f13, f23, dt);

    // Energy left in the atoms: eta int dz sum_j w_j sigma33 (Simpson when the node count allows).
    const double eta = coupling_eta(medium);
    const std::size_t nn = state.nodes();
    const bool simpson = (nn - 1) % 2 == 0;
    double stored = 0.0;
    for (std::size_t node = 0; node < nn; ++node) {
        double s = 0.0;
        for (std::size_t j = 0; j < state.classes(); ++j) s += state.weight[j] * state.p33[state.index(node, j)];
        const bool end = node == 0 || node + 1 == nn;
        const double wz = simpson ? (end ? 1.0 : (node % 2 == 1 ? 4.0 : 2.0)) / 3.0 : (end ? 0.5 : 1.0);
        stored += wz * s;
    }
    rec.diagnostics.stored_energy = eta * dz * stored;
}

std::vector<double> node_positions(const SimGrid& grid)
{
    std::vector<double> z(grid.n_z + 1);
    for (std::size_t n = 0; n <= grid.n_z; ++n) z[n] = static_cast<double>(n) / static_cast<double>(grid.n_z);
    return z;
}

}  // namespace

SimulationRecord run_absorption_stage(const PulseSpec& pulse, const MediumSpec& medium, const SimGrid& grid,
                                      const SimOptions& options)
{
    const auto t0 = Clock::now();
    grid.validate(medium.profile);
    if (!(pulse.peak_rabi >= 0.0) || !std::isfinite(pulse.peak_rabi)) throw DomainError("peak_rabi must be >= 0");
    if (pulse.peak_rabi * pulse.duration * std::sqrt(2.0 * pi) > pi / 2.0)
        throw DomainError("pulse area exceeds pi/2; the weak-probe envelope model does not apply");

    const TimeGrid tg = grid.time_grid();
    const std::size_t ks = grid.switch_index();
    for (double t : {grid.t_start, grid.t_switch}) {
        if (pulse.envelope(t) > 1e-12) {
            std::ostringstream msg;
            msg << "pulse is not contained in [t_start, t_switch): envelope " << pulse.envelope(t) << " at t=" << t;
            throw WindowError(msg.str());
        }
    }

    const DetuningGrid classes = sample_profile(medium.profile, grid.n_delta);
    SimulationRecord rec(AtomicState(medium, classes, grid.n_z + 1), grid);
    rec.stage = Direction::forward;
    rec.first_index = 0;
    rec.last_index = ks;
    rec.z = node_positions(grid);
    rec.profile.resize(grid.n_z + 1);

    const std::size_t steps = ks;
    std::vector<cplx> f13(steps + 1), f23(steps + 1), m13(steps), m23(steps);
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = tg.time(i);
        f13[i] = pulse.rabi13(t);
        f23[i] = pulse.rabi23(t);
        if (i < steps) {
            m13[i] = pulse.rabi13(t + 0.5 * tg.dt);
            m23[i] = pulse.rabi23(t + 0.5 * tg.dt);
        }
    }
    const double e_in = field_energy(f13, f23, tg.dt);
    rec.state.input_energy = e_in;
    rec.diagnostics.input_energy = e_in;

    std::vector<std::size_t> order(grid.n_z + 1);
    for (std::size_t n = 0; n <= grid.n_z; ++n) order[n] = n;
    march(rec, medium, order, std::move(f13), std::move(f23), std::move(m13), std::move(m23), options);

    // The unabsorbed field should have left before the switch.
    double peak_in = 0.0;
    for (std::size_t i = 0; i <= ks; ++i) peak_in = std::max(peak_in, std::norm(pulse.rabi13(tg.time(i))) + std::norm(pulse.rabi23(tg.time(i))));
    double residual = 0.0;
    for (const FieldSnapshot& s : rec.snapshots) residual = std::max(residual, std::norm(s.comp13.back()) + std::norm(s.comp23.back()));
    if (peak_in > 0.0 && residual > 1e-4 * peak_in) {
        std::ostringstream msg;
        msg << "forward field still present at the switch (intensity " << residual / peak_in
            << " of the input peak); consider a later t_switch";
        rec.diagnostics.warnings.push_back(msg.str());
    }

    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return rec;
}

SimulationRecord run_retrieval_stage(const AtomicState& switched, const MediumSpec& medium, const SimGrid& grid,
                                     const SimOptions& options)
{
    const auto t0 = Clock::now();
    grid.validate(medium.profile);
    if (switched.active != Direction::backward) throw DomainError("retrieval stage needs a switched atomic state");
    if (switched.nodes() != grid.n_z + 1) throw ConfigError("atomic state does not match the grid");

    SimulationRecord rec(switched, grid);
    rec.stage = Direction::backward;
    rec.first_index = grid.switch_index();
    rec.last_index = grid.n_t - 1;
    rec.z = node_positions(grid);
    rec.profile.resize(grid.n_z + 1);
    rec.diagnostics.input_energy = switched.input_energy;

    const std::size_t steps = rec.last_index - rec.first_index;
    std::vector<cplx> f13(steps + 1), f23(steps + 1), m13(steps), m23(steps);
    std::vector<std::size_t> order(grid.n_z + 1);
    for (std::size_t n = 0; n <= grid.n_z; ++n) order[n] = grid.n_z - n;
    march(rec, medium, order, std::move(f13), std::move(f23), std::move(m13), std::move(m23), options);

    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return rec;
}

WeakFieldReport check_weak_field(const SimulationRecord& record)
{
    return {record.diagnostics.population_deviation, record.diagnostics.coherence12_deviation};
}

WeakFieldReport check_weak_field(const SimulationRecord& absorption, const SimulationRecord& retrieval)
{
    const WeakFieldReport a = check_weak_field(absorption);
    const WeakFieldReport b = check_weak_field(retrieval);
    return {std::max(a.population_deviation, b.population_deviation),
            std::max(a.coherence12_deviation, b.coherence12_deviation)};
}

SimulationResult run_simulation(const PulseSpec& pulse, const MediumSpec& medium, const SimGrid& grid,
                                const SimOptions& options)
{
    SimulationRecord absorption = run_absorption_stage(pulse, medium, grid, options);
    const AtomicState switched = apply_crib_switch(absorption.state);
    SimulationRecord retrieval = run_retrieval_stage(switched, medium, grid, options);
    return {std::move(absorption), std::move(retrieval)};
}

}  // namespace phaseonium
