// Scratch harness for desk-scale calibration runs. Not part of the build
#include <cstdlib>
// unless -DMVCLAB_CALIBRATE=ON.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>
#include <array>

#include "mvclab/data.hpp"
#include "mvclab/metrics.hpp"
#include "mvclab/presets.hpp"
#include "mvclab/training.hpp"

using namespace mvclab;

namespace {

data::ViewSet acceptance_set(uint64_t seed) {
    data::SyntheticSpec s;
    s.clusters = 3;
    s.per_cluster = 100;
    s.dims = {10, 15};
    s.nuisance_dim = 5;
    s.nuisance_scale = 1.0;
    s.noise_std = 0.1;
    s.seed = seed;
    return data::normalize_minmax(data::synth_multiview(s));
}

double run_once(const data::ViewSet& vs, train::TrainConfig cfg, train::BiviewVariant variant, bool incomplete,
                uint64_t seed, double* secs = nullptr) {
    cfg.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    train::BiviewRun run = train::train_biview(vs, cfg, variant, incomplete);
    const auto t1 = std::chrono::steady_clock::now();
    if (secs) *secs = std::chrono::duration<double>(t1 - t0).count();
    return metrics::evaluate(run.labels, vs.labels).acc;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "c5";

    if (mode == "c5") {  // complete MCMVC-M
        train::TrainConfig cfg = train::make_preset("desk", train::BiviewVariant::McmvcM, false);
        data::ViewSet vs = acceptance_set(1);
        double mean = 0;
        for (uint64_t s = 0; s < 5; ++s) {
            double secs = 0;
            const double acc = run_once(vs, cfg, train::BiviewVariant::McmvcM, false, s, &secs);
            std::printf("seed %llu acc %.4f (%.1fs)\n", (unsigned long long)s, acc, secs);
            mean += acc / 5;
        }
        std::printf("mean acc %.4f\n", mean);
    } else if (mode == "c6") {  // baseline vs +cla
        train::TrainConfig cfg = train::make_preset("desk", train::BiviewVariant::McmvcM, false);
        if (argc > 2) cfg.d = std::atoi(argv[2]);
        if (argc > 3) cfg.loss.lambda1 = std::atof(argv[3]);
        if (argc > 4) cfg.loss.lambda3 = std::atof(argv[4]);
        data::ViewSet vs = acceptance_set(argc > 5 ? std::strtoull(argv[5], nullptr, 10) : 1);
        std::vector<std::array<bool, 3>> grid = train::table1_grid();
        if (argc > 6 && std::string(argv[6]) == "short")
            grid = {{false, false, false}, {false, false, true}, {true, true, true}};
        auto table = train::run_ablation(vs, cfg, train::BiviewVariant::McmvcM, grid, 5);
        if (grid.size() == 3) {
            std::printf("baseline %.4f  cla %.4f  full %.4f  gap %.4f\n", table[0].mean.acc, table[1].mean.acc,
                        table[2].mean.acc, table[1].mean.acc - table[0].mean.acc);
            return 0;
        }
        double with_cla = 0, without_cla = 0;
        for (const auto& r : table) {
            std::printf("ins=%d var=%d cla=%d : acc %.4f nmi %.4f ari %.4f\n", r.ins, r.var, r.cla, r.mean.acc,
                        r.mean.nmi, r.mean.ari);
            (r.cla ? with_cla : without_cla) += r.mean.acc / 4.0;
        }
        std::printf("mean with cla %.4f  without %.4f  baseline %.4f  gap-vs-baseline %.4f\n", with_cla, without_cla,
                    table[0].mean.acc, with_cla - table[0].mean.acc);
    } else if (mode == "c7") {  // incomplete eta=0.5
        train::TrainConfig cfg = train::make_preset("desk", train::BiviewVariant::McmvcM, true);
        data::ViewSet vs = acceptance_set(1);
        double mean = 0;
        for (uint64_t s = 0; s < 5; ++s) {
            data::ViewSet masked = data::apply_miss_mask(vs, 0.5, 100 + s);
            double secs = 0;
            const double acc = run_once(masked, cfg, train::BiviewVariant::McmvcM, true, s, &secs);
            std::printf("seed %llu acc %.4f (%.1fs)\n", (unsigned long long)s, acc, secs);
            mean += acc / 5;
        }
        std::printf("mean acc %.4f\n", mean);
    } else if (mode == "c8") {  // V=3 staged pipeline A/B
        data::SyntheticSpec s;
        s.clusters = 3;
        s.per_cluster = 100;
        s.dims = {10, 15, 12};
        s.nuisance_dim = 5;
        s.nuisance_scale = 1.0;
        s.noise_std = 0.1;
        s.seed = 1;
        data::ViewSet vs = data::normalize_minmax(data::synth_multiview(s));
        train::TrainConfig cfg = train::make_preset("desk-mv", train::BiviewVariant::McmvcM, false);
        double on = 0, off = 0;
        for (uint64_t seed = 0; seed < 5; ++seed) {
            cfg.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            const double a_on = metrics::evaluate(train::train_mcmvc_plus_plus(vs, cfg, true, {}).result.labels, vs.labels).acc;
            const double a_off = metrics::evaluate(train::train_mcmvc_plus_plus(vs, cfg, false, {}).result.labels, vs.labels).acc;
            const auto t1 = std::chrono::steady_clock::now();
            std::printf("seed %llu  on %.4f  off %.4f  (%.1fs both)\n", (unsigned long long)seed, a_on, a_off,
                        std::chrono::duration<double>(t1 - t0).count());
            on += a_on / 5;
            off += a_off / 5;
        }
        std::printf("mean on %.4f off %.4f\n", on, off);
    }
    return 0;
}
