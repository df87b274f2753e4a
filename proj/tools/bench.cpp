// Compares the serial reference path against the OpenMP path for the two
// replication-heavy kernels: ground-truth Monte Carlo and seed replication.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "ope/harness.hpp"
#include "ope/synthgen.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

int main() {
    ope::SyntheticConfig cfg;
    cfg.num_actions = 200;
    cfg.seed = 7;
    const auto env = ope::build_environment(cfg);

    const long long m = 200000;
    auto t0 = std::chrono::steady_clock::now();
    const double gt_serial = ope::ground_truth_value_with_seed(env, m, 11, false);
    const double serial_s = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const double gt_parallel = ope::ground_truth_value_with_seed(env, m, 11, true);
    const double parallel_s = seconds_since(t0);
    std::printf("ground-truth MC (m=%lld): serial %.3fs, parallel %.3fs, speedup %.2fx\n", m,
                serial_s, parallel_s, serial_s / parallel_s);
    if (gt_serial != gt_parallel) {
        std::printf("FAIL: serial and parallel ground truth differ (%.17g vs %.17g)\n",
                    gt_serial, gt_parallel);
        return 1;
    }

    ope::SweepSpec spec;
    spec.base = cfg;
    spec.n = 2000;
    spec.param = "num_actions";
    spec.values = {50.0};
    spec.roster = {"ips", "mips-true", "dr"};
    spec.reps = 20;
    spec.ground_truth_m = 100000;
    spec.posterior.max_iters = 50;

    t0 = std::chrono::steady_clock::now();
    const auto serial = ope::run_replications(spec, false);
    const double rep_serial_s = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const auto parallel = ope::run_replications(spec, true);
    const double rep_parallel_s = seconds_since(t0);
    std::printf("replications (T=%d): serial %.3fs, parallel %.3fs, speedup %.2fx\n", spec.reps,
                rep_serial_s, rep_parallel_s, rep_serial_s / rep_parallel_s);

    for (std::size_t c = 0; c < serial.cells.size(); ++c)
        for (int t = 0; t < spec.reps; ++t)
            if (serial.cells[c].per_seed[t].estimate != parallel.cells[c].per_seed[t].estimate) {
                std::printf("FAIL: serial and parallel replication estimates differ\n");
                return 1;
            }
    std::printf("serial and parallel paths agree bitwise\n");
    return 0;
}
