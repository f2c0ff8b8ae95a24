#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "util.hpp"

namespace skiprec {

struct TensorSpec {
    std::string name;
    std::vector<int64_t> shape;
    int64_t offset = 0;
    int64_t size = 0;
};

// Named tensors over one contiguous double buffer. The flat layout is what
// makes the optimizer, the finite-difference harness and checkpoint
// serialization all trivial: they only ever see one vector.
class ParameterStore {
  public:
    int64_t add(const std::string& name, std::vector<int64_t> shape) {
        if (index_.count(name)) fail_config("duplicate tensor name: " + name);
        int64_t size = 1;
        for (int64_t d : shape) size *= d;
        TensorSpec spec{name, std::move(shape), static_cast<int64_t>(data_.size()), size};
        index_.emplace(name, specs_.size());
        specs_.push_back(std::move(spec));
        data_.resize(data_.size() + static_cast<size_t>(size), 0.0);
        return specs_.back().offset;
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    const TensorSpec& spec(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) fail_config("unknown tensor: " + name);
        return specs_[it->second];
    }

    std::span<double> tensor(const std::string& name) {
        const TensorSpec& s = spec(name);
        return {data_.data() + s.offset, static_cast<size_t>(s.size)};
    }
    std::span<const double> tensor(const std::string& name) const {
        const TensorSpec& s = spec(name);
        return {data_.data() + s.offset, static_cast<size_t>(s.size)};
    }

    const std::vector<TensorSpec>& specs() const { return specs_; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    size_t size() const { return data_.size(); }

  private:
    std::vector<TensorSpec> specs_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<double> data_;
};

}  // namespace skiprec
