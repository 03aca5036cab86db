#include <json.hpp>

#include "mvclab/errors.hpp"
#include "mvclab/training.hpp"

namespace mvclab::train {

namespace {

using nlohmann::json;

json loss_to_json(const losses::LossConfig& l) {
    return {{"lambda1", l.lambda1},
            {"lambda2", l.lambda2},
            {"lambda3", l.lambda3},
            {"lambda4", l.lambda4},
            {"mu1", l.mu1},
            {"mu2", l.mu2},
            {"mu_base", l.mu_base},
            {"alpha", l.alpha},
            {"gamma", l.gamma},
            {"eps_var", l.eps_var},
            {"tau", l.tau},
            {"tau1", l.tau1},
            {"tau2", l.tau2},
            {"pre_weight", l.pre_weight},
            {"instance", l.instance == losses::LossConfig::Instance::Mse ? "mse" : "infonce"},
            {"use_ins", l.use_ins},
            {"use_var", l.use_var},
            {"use_cla", l.use_cla},
            {"info_within_view", l.info_within_view}};
}

losses::LossConfig loss_from_json(const json& j) {
    losses::LossConfig l;
    l.lambda1 = j.value("lambda1", l.lambda1);
    l.lambda2 = j.value("lambda2", l.lambda2);
    l.lambda3 = j.value("lambda3", l.lambda3);
    l.lambda4 = j.value("lambda4", l.lambda4);
    l.mu1 = j.value("mu1", l.mu1);
    l.mu2 = j.value("mu2", l.mu2);
    l.mu_base = j.value("mu_base", l.mu_base);
    l.alpha = j.value("alpha", l.alpha);
    l.gamma = j.value("gamma", l.gamma);
    l.eps_var = j.value("eps_var", l.eps_var);
    l.tau = j.value("tau", l.tau);
    l.tau1 = j.value("tau1", l.tau1);
    l.tau2 = j.value("tau2", l.tau2);
    l.pre_weight = j.value("pre_weight", l.pre_weight);
    const std::string inst = j.value("instance", "mse");
    if (inst == "mse")
        l.instance = losses::LossConfig::Instance::Mse;
    else if (inst == "infonce")
        l.instance = losses::LossConfig::Instance::InfoNce;
    else
        throw ConfigError("config: instance must be 'mse' or 'infonce'");
    l.use_ins = j.value("use_ins", l.use_ins);
    l.use_var = j.value("use_var", l.use_var);
    l.use_cla = j.value("use_cla", l.use_cla);
    l.info_within_view = j.value("info_within_view", l.info_within_view);
    return l;
}

}  // namespace

std::string train_config_to_json_text(const TrainConfig& c) {
    json j{{"epochs", c.epochs},
           {"pretrain_epochs", c.pretrain_epochs},
           {"contrast_epochs", c.contrast_epochs},
           {"finetune_epochs", c.finetune_epochs},
           {"batch_size", c.batch_size},
           {"lr", c.lr},
           {"seed", c.seed},
           {"eval_every", c.eval_every},
           {"k", c.k},
           {"d", c.d},
           {"h", c.h},
           {"hidden", c.hidden},
           {"dual_hidden", c.dual_hidden},
           {"loss", loss_to_json(c.loss)}};
    return j.dump(2);
}

TrainConfig train_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    if (j.contains("config")) j = j.at("config");  // accept run manifests

    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
    c.contrast_epochs = j.value("contrast_epochs", c.contrast_epochs);
    c.finetune_epochs = j.value("finetune_epochs", c.finetune_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.seed = j.value("seed", c.seed);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.k = j.value("k", c.k);
    c.d = j.value("d", c.d);
    c.h = j.value("h", c.h);
    c.hidden = j.value("hidden", c.hidden);
    c.dual_hidden = j.value("dual_hidden", c.dual_hidden);
    if (j.contains("loss")) c.loss = loss_from_json(j.at("loss"));
    return c;
}

}  // namespace mvclab::train
