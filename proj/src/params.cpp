#include "mvclab/params.hpp"

#include "mvclab/errors.hpp"

namespace mvclab {

void ParamStore::add(const std::string& name, Tensor value) {
    if (values_.count(name)) throw ContractError("duplicate parameter name: " + name);
    order_.push_back(name);
    values_.emplace(name, std::move(value));
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

int64_t ParamStore::total_size() const {
    int64_t n = 0;
    for (const auto& name : order_) n += values_.at(name).numel();
    return n;
}

}  // namespace mvclab
