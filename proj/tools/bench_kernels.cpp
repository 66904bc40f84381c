// Wall-clock comparison of the OpenMP kernels against their serial reference
// on the builtin workloads. The outputs must match bitwise; the checksum
// column makes a silent divergence visible.

#include <chrono>
#include <cstdio>
#include <functional>

#include "ksep/equilibria.hpp"
#include "ksep/fit.hpp"
#include "ksep/koopman.hpp"
#include "ksep/parallel.hpp"
#include "ksep/sysmodel.hpp"

using namespace ksep;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct RunResult {
    double seconds = 0;
    double checksum = 0;
};

RunResult timed(const std::function<double()>& body) {
    double t0 = now_seconds();
    double checksum = body();
    return RunResult{now_seconds() - t0, checksum};
}

void report(const char* name, const RunResult& serial, const RunResult& omp) {
    std::printf("%-24s serial %8.3fs  openmp %8.3fs  speedup %5.2fx  %s\n", name, serial.seconds,
                omp.seconds, serial.seconds / omp.seconds,
                serial.checksum == omp.checksum ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
    std::printf("threads: %d\n", max_threads());

    {
        SystemModel model = builtin_system("speed_control");
        auto eqs = find_equilibria(model, model.default_box, 20);
        const EquilibriumPoint* saddle = nullptr;
        for (const auto& eq : eqs) {
            if (eq.classification == EqClass::type_one) saddle = &eq;
        }
        UnstableEigenpair pair = unstable_left_eigenpair(*saddle);
        EllipsoidSeed seed = seed_ellipsoid(*saddle, pair, 0.2);
        DomainBox box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
        BackwardSamplingConfig cfg;
        cfg.count = 2000;
        cfg.horizon = 10.0;

        auto run = [&](Exec exec) {
            SampleSet s = generate_samples_backward(model, *saddle, pair, seed, box, cfg, exec);
            double sum = 0;
            for (double v : s.values) sum += v;
            return sum + s.size();
        };
        RunResult serial = timed([&] { return run(Exec::serial); });
        RunResult omp = timed([&] { return run(Exec::openmp); });
        report("backward sampling", serial, omp);

        SampleSet samples = generate_samples_backward(model, *saddle, pair, seed, box, cfg);
        BasisSpec basis;
        basis.max_degree = 5;
        auto fit_run = [&](Exec exec) {
            FittedEigenfunction fe = fit_least_squares(basis, samples, exec);
            return fe.coeffs.sum();
        };
        RunResult fserial = timed([&] { return fit_run(Exec::serial); });
        RunResult fomp = timed([&] { return fit_run(Exec::openmp); });
        report("least-squares fit", fserial, fomp);
    }

    {
        SystemModel model = builtin_system("two_gen_power");
        Vector lo(4), hi(4);
        lo << -3.6, -0.5, -3.6, -0.5;
        hi << 3.6, 0.5, 3.6, 0.5;
        DomainBox box(lo, hi);
        auto run = [&](Exec exec) {
            auto eqs = find_equilibria(model, box, 9, NewtonOptions{}, exec);
            double sum = 0;
            for (const auto& eq : eqs) sum += eq.x_star.sum();
            return sum + static_cast<double>(eqs.size());
        };
        RunResult serial = timed([&] { return run(Exec::serial); });
        RunResult omp = timed([&] { return run(Exec::openmp); });
        report("equilibria search", serial, omp);
    }

    return 0;
}
