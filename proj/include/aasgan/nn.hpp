#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "aasgan/autodiff.hpp"
#include "aasgan/common.hpp"
#include "aasgan/tensor.hpp"

namespace aasgan::nn {

// ---------------------------------------------------------------- init

inline void init_uniform(Tensor& t, Rng& rng, double bound) {
    for (double& x : t.v) x = rng.uniform(-bound, bound);
}

// Conventional fan-in scaling for MLP weights; biases start at zero.
inline Param& add_linear(ParamStore& ps, const std::string& prefix, std::size_t in,
                         std::size_t out, Rng& rng) {
    Tensor W = Tensor::zeros({in, out});
    init_uniform(W, rng, 1.0 / std::sqrt(static_cast<double>(in)));
    Param& w = ps.add(prefix + ".W", std::move(W));
    ps.add(prefix + ".b", Tensor::zeros({out}));
    return w;
}

// LSTM weights drawn uniform(-1/sqrt(hidden), +1/sqrt(hidden)).
inline void add_lstm(ParamStore& ps, const std::string& prefix, std::size_t in,
                     std::size_t hidden, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    Tensor Wx = Tensor::zeros({in, 4 * hidden});
    Tensor Wh = Tensor::zeros({hidden, 4 * hidden});
    Tensor b = Tensor::zeros({4 * hidden});
    init_uniform(Wx, rng, bound);
    init_uniform(Wh, rng, bound);
    init_uniform(b, rng, bound);
    ps.add(prefix + ".Wx", std::move(Wx));
    ps.add(prefix + ".Wh", std::move(Wh));
    ps.add(prefix + ".b", std::move(b));
}

// ---------------------------------------------------------------- layers

// One affine layer read from the store: y = x W + b.
inline ad::Value linear(ad::Tape& t, ParamStore& ps, const std::string& prefix, ad::Value x) {
    return ad::affine(x, t.param(ps.get(prefix + ".W")), t.param(ps.get(prefix + ".b")));
}

inline ad::Value linear_relu(ad::Tape& t, ParamStore& ps, const std::string& prefix, ad::Value x) {
    return ad::relu(linear(t, ps, prefix, x));
}

// Standard LSTM cell. Gate layout along the 4h axis: input, forget,
// candidate, output. Returns (h, c).
inline std::pair<ad::Value, ad::Value> lstm_step(ad::Tape& t, ParamStore& ps,
                                                 const std::string& prefix, ad::Value x,
                                                 ad::Value h_prev, ad::Value c_prev) {
    Param& Wx = ps.get(prefix + ".Wx");
    Param& Wh = ps.get(prefix + ".Wh");
    Param& b = ps.get(prefix + ".b");
    const std::size_t hidden = Wh.value.shape[0];
    if (h_prev.val().size() != hidden || c_prev.val().size() != hidden)
        throw ShapeError("lstm_step: state size " + h_prev.val().shape_str() +
                         " vs hidden (" + std::to_string(hidden) + ")");

    ad::Value gates = ad::add(ad::affine(x, t.param(Wx), t.param(b)),
                              ad::matvec(h_prev, t.param(Wh)));
    ad::Value i = ad::sigmoid(ad::slice(gates, 0, hidden));
    ad::Value f = ad::sigmoid(ad::slice(gates, hidden, hidden));
    ad::Value g = ad::tanh(ad::slice(gates, 2 * hidden, hidden));
    ad::Value o = ad::sigmoid(ad::slice(gates, 3 * hidden, hidden));
    ad::Value c = ad::add(ad::mul(f, c_prev), ad::mul(i, g));
    ad::Value h = ad::mul(o, ad::tanh(c));
    return {h, c};
}

// ---------------------------------------------------------------- sampling

inline Tensor sample_standard_normal(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& x : t.v) x = rng.normal();
    return t;
}

}  // namespace aasgan::nn
