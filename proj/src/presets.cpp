#include "mvclab/presets.hpp"

#include "mvclab/errors.hpp"

namespace mvclab::train {

namespace {

TrainConfig published_biview_base(double lr, int k) {
    TrainConfig c;
    c.lr = lr;
    c.k = k;
    c.d = 0;  // over-cluster head width = k
    c.batch_size = 256;
    c.hidden = {1024, 1024, 1024};
    c.loss.lambda2 = 0.1;
    c.loss.lambda4 = 0.2;
    return c;
}

TrainConfig published_multiview_base(double lr, int k) {
    TrainConfig c;
    c.lr = lr;
    c.k = k;
    c.d = 512;
    c.h = 128;
    c.batch_size = 256;
    c.hidden = {2000, 2000, 500, 500};
    c.pretrain_epochs = 200;
    c.contrast_epochs = 50;
    c.finetune_epochs = 50;
    c.loss.tau1 = 0.5;
    c.loss.tau2 = 1.0;
    return c;
}

void biview_settings(TrainConfig& c, BiviewVariant variant, bool incomplete, double l1_mc, double l3_mc, int ep_mc,
                     double l1_mi, double l3_mi, int ep_mi, double l3_ic, int ep_ic, double l3_ii, int ep_ii) {
    if (variant == BiviewVariant::McmvcI) {
        c.loss.lambda1 = 0.1;
        c.loss.lambda3 = incomplete ? l3_ii : l3_ic;
        c.epochs = incomplete ? ep_ii : ep_ic;
        c.loss.instance = losses::LossConfig::Instance::InfoNce;
    } else {
        c.loss.lambda1 = incomplete ? l1_mi : l1_mc;
        c.loss.lambda3 = incomplete ? l3_mi : l3_mc;
        c.epochs = incomplete ? ep_mi : ep_mc;
        c.loss.instance = losses::LossConfig::Instance::Mse;
    }
}

}  // namespace

TrainConfig make_preset(const std::string& name, BiviewVariant variant, bool incomplete) {
    if (name.empty() || name == "desk") {
        TrainConfig c;  // small-scale defaults
        if (variant == BiviewVariant::McmvcI) c.loss.instance = losses::LossConfig::Instance::InfoNce;
        return c;
    }
    if (name == "desk-mv") {
        TrainConfig c;
        c.d = 16;
        c.h = 32;
        c.hidden = {64, 64};
        c.pretrain_epochs = 100;
        c.contrast_epochs = 100;
        c.finetune_epochs = 50;
        return c;
    }
    if (name == "caltech101-20") {
        TrainConfig c = published_biview_base(1e-4, 20);
        c.loss.lambda1 = 0.2;
        biview_settings(c, variant, incomplete, /*M complete*/ 0.2, 0.2, 500, /*M incomplete*/ 0.2, 0.2, 1000,
                        /*I complete*/ 0.2, 500, /*I incomplete*/ 0.3, 1000);
        return c;
    }
    if (name == "landuse-21") {
        TrainConfig c = published_biview_base(1e-3, 21);
        biview_settings(c, variant, incomplete, 0.5, 0.2, 1000, 1.1, 1.1, 400, 1.0, 700, 0.7, 700);
        return c;
    }
    if (name == "scene-15") {
        TrainConfig c = published_biview_base(1e-3, 15);
        biview_settings(c, variant, incomplete, 0.1, 0.3, 400, 0.2, 0.1, 500, 0.7, 300, 0.5, 500);
        return c;
    }
    if (name == "noisy-mnist") {
        TrainConfig c = published_biview_base(1e-3, 10);
        biview_settings(c, variant, incomplete, 0.1, 0.3, 650, 0.3, 0.4, 300, 1.0, 500, 1.0, 200);
        return c;
    }
    if (name == "mnist-usps") {
        TrainConfig c = published_multiview_base(3e-4, 10);
        c.loss.mu1 = 0.1;
        c.loss.mu2 = 0.1;
        c.loss.tau1 = 1.0;
        return c;
    }
    if (name == "bdgp") {
        TrainConfig c = published_multiview_base(3e-4, 5);
        c.loss.mu1 = 0.0001;
        c.loss.mu2 = 0.03;
        c.loss.tau1 = 1.0;
        return c;
    }
    if (name == "ccv") {
        TrainConfig c = published_multiview_base(5e-4, 20);
        c.loss.mu1 = 0.001;
        c.loss.mu2 = 0.2;
        return c;
    }
    if (name == "fashion") {
        TrainConfig c = published_multiview_base(1e-4, 10);
        c.loss.mu1 = 0.1;
        c.loss.mu2 = 0.4;
        return c;
    }
    if (name == "caltech-2v") {
        TrainConfig c = published_multiview_base(3e-4, 7);
        c.loss.mu1 = 0.2;
        c.loss.mu2 = 0.02;
        c.contrast_epochs = 70;
        return c;
    }
    if (name == "caltech-3v") {
        TrainConfig c = published_multiview_base(3e-4, 7);
        c.loss.mu1 = 0.01;
        c.loss.mu2 = 0.2;
        c.contrast_epochs = 80;
        return c;
    }
    if (name == "caltech-4v") {
        TrainConfig c = published_multiview_base(3e-4, 7);
        c.loss.mu1 = 0.1;
        c.loss.mu2 = 0.4;
        c.contrast_epochs = 70;
        return c;
    }
    if (name == "caltech-5v") {
        TrainConfig c = published_multiview_base(3e-4, 7);
        c.loss.mu1 = 0.02;
        c.loss.mu2 = 0.03;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"desk",   "desk-mv",    "caltech101-20", "landuse-21", "scene-15",   "noisy-mnist", "mnist-usps",
            "bdgp",   "ccv",        "fashion",       "caltech-2v", "caltech-3v", "caltech-4v",  "caltech-5v"};
}

}  // namespace mvclab::train
