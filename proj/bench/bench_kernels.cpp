// Serial vs OpenMP timing of the periodic-action kernels on a d = 2 lattice
// large enough for the parallel path to matter.

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <random>

#include "aubrykit/flow.hpp"
#include "aubrykit/potential.hpp"

using namespace aubrykit;

namespace {

double time_of(int reps, const std::function<void()>& fn) {
    fn();  // warm up
    const double t0 = omp_get_wtime();
    for (int r = 0; r < reps; ++r) fn();
    return (omp_get_wtime() - t0) / reps;
}

void report(const std::string& name, double serial, double parallel) {
    std::cout << name << ": serial " << serial * 1e3 << " ms, omp " << parallel * 1e3
              << " ms, speedup " << serial / parallel << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("AUBRYKIT_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }
    long long side = argc > 1 ? std::atoll(argv[1]) : 48;
    std::cout << "lattice " << side << "x" << side << ", threads " << omp_get_max_threads()
              << "\n";

    auto lat = PeriodLattice::make(2, {side, 0, 0, side}, {-1, -2});
    auto pot = fk_potential(FKSpec{2, TrigSeries::standard(0.9)});
    ActionEvaluator ev(pot, lat);

    std::mt19937_64 rng(1);
    Configuration x = Configuration::linear(lat, 0.2);
    std::uniform_real_distribution<double> unif(-0.3, 0.3);
    for (Eigen::Index i = 0; i < x.values().size(); ++i) x.values()[i] += unif(rng);

    // correctness cross-check before timing
    Eigen::VectorXd gs, gp;
    ev.gradient(x.values(), gs, false);
    ev.gradient(x.values(), gp, true);
    const double dev = (gs - gp).cwiseAbs().maxCoeff();
    std::cout << "serial/omp gradient deviation " << dev << "\n";
    if (dev > 1e-12) {
        std::cerr << "kernel mismatch\n";
        return 1;
    }

    const int reps = 20;
    report("action value", time_of(reps, [&] { ev.value(x.values(), false); }),
           time_of(reps, [&] { ev.value(x.values(), true); }));

    Eigen::VectorXd g;
    report("gradient", time_of(reps, [&] { ev.gradient(x.values(), g, false); }),
           time_of(reps, [&] { ev.gradient(x.values(), g, true); }));

    Eigen::MatrixXd h;
    report("hessian", time_of(3, [&] { ev.hessian(x.values(), h, false); }),
           time_of(3, [&] { ev.hessian(x.values(), h, true); }));

    // one short flow (RHS-bound): gradient path exercised end to end
    FlowParams params;
    params.abs_tol = params.rel_tol = 1e-8;
    const double t0 = omp_get_wtime();
    FlowResult r = flow(pot, x, 0.5, params);
    std::cout << "flow t=0.5: " << (omp_get_wtime() - t0) * 1e3 << " ms, " << r.trace.size()
              << " steps, final W " << r.trace.back().action << "\n";
    return 0;
}
