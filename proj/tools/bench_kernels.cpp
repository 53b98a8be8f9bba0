// Times the serial reference batch kernel against the OpenMP path and checks
// that the two reductions agree bitwise.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "cfnn/datagen.hpp"
#include "cfnn/models.hpp"
#include "cfnn/optim.hpp"

using namespace cfnn;
using clk = std::chrono::steady_clock;

int main(int argc, char** argv) {
    size_t n = 4096;
    int reps = 20;
    if (argc > 1) n = static_cast<size_t>(std::atol(argv[1]));
    if (argc > 2) reps = std::atoi(argv[2]);

    Dataset data = sample_function(get_target("runge"), n, 42);

    ModelConfig cfg;
    cfg.family = Family::Hybrid;
    cfg.input_dim = 1;
    cfg.poly_degree = 4;
    cfg.unit_count = 20;

    ParamStore store = build_params(cfg);
    Rng rng(42);
    init_params(store, cfg, rng);

    std::vector<size_t> idx(data.n());
    std::iota(idx.begin(), idx.end(), size_t(0));

    auto time_path = [&](bool parallel) {
        BatchResult last;
        auto t0 = clk::now();
        for (int r = 0; r < reps; ++r)
            last = batch_loss_grad(cfg, store.values, data.X, data.y, idx, parallel);
        double secs = std::chrono::duration<double>(clk::now() - t0).count();
        return std::pair<double, BatchResult>(secs / reps, std::move(last));
    };

    auto [serial_s, serial_res] = time_path(false);
    auto [openmp_s, openmp_res] = time_path(true);

    bool loss_equal = std::memcmp(&serial_res.loss, &openmp_res.loss,
                                  sizeof(double)) == 0;
    bool grad_equal =
        serial_res.grad.size() == openmp_res.grad.size() &&
        std::memcmp(serial_res.grad.data(), openmp_res.grad.data(),
                    serial_res.grad.size() * sizeof(double)) == 0;

    std::printf("batch kernel, n=%zu params=%ld reps=%d\n", n,
                param_count(cfg), reps);
    std::printf("  serial : %8.3f ms/iter\n", serial_s * 1e3);
    std::printf("  openmp : %8.3f ms/iter  (speedup %.2fx)\n", openmp_s * 1e3,
                serial_s / openmp_s);
    std::printf("  bitwise: loss %s, grad %s\n", loss_equal ? "equal" : "DIFFER",
                grad_equal ? "equal" : "DIFFER");
    return loss_equal && grad_equal ? 0 : 1;
}
