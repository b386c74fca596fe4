// Serial reference kernel against the blocked OpenMP kernel on one z slice.
//   bench_ensemble --benchmark_filter=Blocked
// The thread argument sets omp_set_num_threads; counters report class-steps per second.

#include "phaseonium/ensemble.hpp"
#include "phaseonium/medium.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>

using namespace phaseonium;

namespace {

struct Slice {
    std::size_t n;
    std::vector<double> p11, p22, p33, x12, y12, x13, y13, x23, y23, delta, weight;
    std::vector<cplx> f13, f23, m13, m23;
    PreparedState ref;
    SliceDrive drive{};

    Slice(std::size_t classes, std::size_t steps) : n(classes)
    {
        const auto prof = InhomogeneousProfile::default_flat_top();
        const DetuningGrid g = sample_profile(prof, classes);
        delta = g.nodes;
        weight = g.weights;
        ref = {0.5, 0.5, cplx{0.5, 0.0}};
        p11.assign(n, 0.5);
        p22.assign(n, 0.5);
        p33.assign(n, 0.0);
        x12.assign(n, 0.5);
        y12.assign(n, 0.0);
        x13.assign(n, 0.0);
        y13.assign(n, 0.0);
        x23.assign(n, 0.0);
        y23.assign(n, 0.0);
        const double dt = 16.0 / static_cast<double>(steps);
        auto env = [](double t) { return 1e-4 * std::exp(-0.5 * (t + 8.0) * (t + 8.0)); };
        for (std::size_t i = 0; i <= steps; ++i) {
            const double t = -16.0 + dt * static_cast<double>(i);
            f13.push_back(0.9486 * env(t));
            f23.push_back(0.3162 * env(t));
            m13.push_back(0.9486 * env(t + 0.5 * dt));
            m23.push_back(0.3162 * env(t + 0.5 * dt));
        }
        drive = {f13.data(), f23.data(), m13.data(), m23.data(), steps, dt};
    }

    ClassArrays arrays()
    {
        return {p11.data(), p22.data(), p33.data(), x12.data(), y12.data(), x13.data(), y13.data(),
                x23.data(), y23.data(), delta.data(), weight.data(), n};
    }
};

constexpr std::size_t steps = 256;

void BM_Serial(benchmark::State& st)
{
    Slice s(static_cast<std::size_t>(st.range(0)), steps);
    SlicePolarization out;
    for (auto _ : st) {
        auto d = evolve_classes_serial(s.arrays(), s.drive, s.ref, out);
        benchmark::DoNotOptimize(d);
    }
    st.counters["class_steps/s"] =
        benchmark::Counter(static_cast<double>(s.n * steps), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Blocked(benchmark::State& st)
{
    Slice s(static_cast<std::size_t>(st.range(0)), steps);
    omp_set_num_threads(static_cast<int>(st.range(1)));
    SlicePolarization out;
    for (auto _ : st) {
        auto d = evolve_classes_blocked(s.arrays(), s.drive, s.ref, out);
        benchmark::DoNotOptimize(d);
    }
    st.counters["class_steps/s"] =
        benchmark::Counter(static_cast<double>(s.n * steps), benchmark::Counter::kIsIterationInvariantRate);
    st.counters["threads"] = static_cast<double>(st.range(1));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Blocked)->ArgsProduct({{1024}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
