#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvclab/tensor.hpp"

namespace mvclab {

/// Named trainable tensors. Iteration follows insertion order so every
/// consumer (initialization, optimizer, checkpoints, finite differences)
/// walks the same deterministic sequence.
class ParamStore {
public:
    void add(const std::string& name, Tensor value);
    bool has(const std::string& name) const { return values_.count(name) != 0; }
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    const std::vector<std::string>& names() const { return order_; }
    int64_t total_size() const;

    uint64_t seed() const { return seed_; }
    void set_seed(uint64_t s) { seed_ = s; }

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor> values_;
    uint64_t seed_ = 0;
};

}  // namespace mvclab
