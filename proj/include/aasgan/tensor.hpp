#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aasgan/common.hpp"

namespace aasgan {

// Dense row-major tensor of doubles. Rank 1 and 2 are all this project needs.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    Tensor() = default;

    Tensor(std::vector<std::size_t> s, std::vector<double> values)
        : shape(std::move(s)), v(std::move(values)) {
        if (count(shape) != v.size())
            throw ShapeError("Tensor: value count " + std::to_string(v.size()) +
                             " does not match shape " + shape_str());
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        const std::size_t n = count(s);
        return Tensor(std::move(s), std::vector<double>(n, 0.0));
    }

    static Tensor scalar(double x) { return Tensor({1}, {x}); }

    static Tensor vec(std::vector<double> values) {
        const std::size_t n = values.size();
        return Tensor({n}, std::move(values));
    }

    std::size_t size() const { return v.size(); }
    std::size_t rank() const { return shape.size(); }

    std::size_t rows() const { return rank() == 2 ? shape[0] : shape.at(0); }
    std::size_t cols() const { return rank() == 2 ? shape[1] : 1; }

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    double& at(std::size_t i, std::size_t j) { return v[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * shape[1] + j]; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i)
            s += (i ? "," : "") + std::to_string(shape[i]);
        return s + ")";
    }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
}

// ---------------------------------------------------------------- ParamStore
//
// Named learnable tensors with stable iteration order (insertion order) and a
// gradient accumulator per parameter. Pointers to entries stay valid for the
// store's lifetime.

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
};

class ParamStore {
public:
    ParamStore() = default;
    ParamStore(ParamStore&&) = default;
    ParamStore& operator=(ParamStore&&) = default;
    ParamStore(const ParamStore&) = delete;
    ParamStore& operator=(const ParamStore&) = delete;

    Param& add(const std::string& name, Tensor init) {
        if (index_.count(name)) throw ArgumentError("ParamStore: duplicate parameter " + name);
        auto p = std::make_unique<Param>();
        p->name = name;
        p->grad = Tensor::zeros(init.shape);
        p->value = std::move(init);
        index_[name] = entries_.size();
        entries_.push_back(std::move(p));
        return *entries_.back();
    }

    Param& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ArgumentError("ParamStore: unknown parameter " + name);
        return *entries_[it->second];
    }

    const Param& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ArgumentError("ParamStore: unknown parameter " + name);
        return *entries_[it->second];
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t size() const { return entries_.size(); }

    Param& at(std::size_t i) { return *entries_[i]; }
    const Param& at(std::size_t i) const { return *entries_[i]; }

    void zero_grad() {
        for (auto& e : entries_) e->grad.fill(0.0);
    }

    std::size_t value_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e->value.size();
        return n;
    }

private:
    std::vector<std::unique_ptr<Param>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace aasgan
