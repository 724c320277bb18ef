#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "aasgan/tensor.hpp"

namespace aasgan::ad {

class Tape;

// Lightweight handle to a node on a tape.
struct Value {
    Tape* tape = nullptr;
    std::uint32_t idx = 0;

    const Tensor& val() const;
    const Tensor& grad() const;
    double scalar() const;
};

// Reverse-mode gradient tape. Nodes are recorded in forward order; backward()
// walks them once in reverse, so creation order is a valid topological order.
// One backward pass per tape; a tape is single-threaded by construction.
class Tape {
public:
    Value input(Tensor t) { return push(std::move(t), nullptr, nullptr); }

    Value constant(Tensor t) { return push(std::move(t), nullptr, nullptr); }

    Value constant(double x) { return constant(Tensor::scalar(x)); }

    // Leaf bound to a stored parameter; backward accumulates into p.grad.
    Value param(Param& p) { return push(p.value, nullptr, &p); }

    void backward(Value root) {
        Node& r = node(root.idx);
        if (r.val.size() != 1) throw ArgumentError("backward: root must be a scalar");
        if (ran_backward_) throw ArgumentError("backward: tape already used");
        ran_backward_ = true;
        r.grad.v[0] = 1.0;
        for (std::size_t i = root.idx + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.back) n.back(*this, n.grad);
            if (n.sink) {
                for (std::size_t k = 0; k < n.grad.size(); ++k)
                    n.sink->grad.v[k] += n.grad.v[k];
            }
        }
    }

    const Tensor& val(std::uint32_t i) const { return nodes_[i].val; }
    const Tensor& grad(std::uint32_t i) const { return nodes_[i].grad; }
    Tensor& grad_mut(std::uint32_t i) { return nodes_[i].grad; }

    std::size_t node_count() const { return nodes_.size(); }

    Value push(Tensor val, std::function<void(Tape&, const Tensor&)> back, Param* sink = nullptr) {
        Node n;
        n.grad = Tensor::zeros(val.shape);
        n.val = std::move(val);
        n.back = std::move(back);
        n.sink = sink;
        nodes_.push_back(std::move(n));
        return Value{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
    }

private:
    struct Node {
        Tensor val;
        Tensor grad;
        std::function<void(Tape&, const Tensor&)> back;  // (tape, this node's grad)
        Param* sink = nullptr;
    };

    Node& node(std::uint32_t i) { return nodes_[i]; }

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

inline const Tensor& Value::val() const { return tape->val(idx); }
inline const Tensor& Value::grad() const { return tape->grad(idx); }
inline double Value::scalar() const {
    const Tensor& t = val();
    if (t.size() != 1) throw ArgumentError("Value::scalar: not a scalar");
    return t.v[0];
}

// ---------------------------------------------------------------- elementwise

inline Value add(Value a, Value b) {
    require_same_shape(a.val(), b.val(), "add");
    Tensor out = a.val();
    for (std::size_t k = 0; k < out.size(); ++k) out.v[k] += b.val().v[k];
    const auto ia = a.idx, ib = b.idx;
    return a.tape->push(std::move(out), [ia, ib](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        Tensor& gb = t.grad_mut(ib);
        for (std::size_t k = 0; k < g.size(); ++k) {
            ga.v[k] += g.v[k];
            gb.v[k] += g.v[k];
        }
    });
}

inline Value sub(Value a, Value b) {
    require_same_shape(a.val(), b.val(), "sub");
    Tensor out = a.val();
    for (std::size_t k = 0; k < out.size(); ++k) out.v[k] -= b.val().v[k];
    const auto ia = a.idx, ib = b.idx;
    return a.tape->push(std::move(out), [ia, ib](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        Tensor& gb = t.grad_mut(ib);
        for (std::size_t k = 0; k < g.size(); ++k) {
            ga.v[k] += g.v[k];
            gb.v[k] -= g.v[k];
        }
    });
}

inline Value mul(Value a, Value b) {  // Hadamard
    require_same_shape(a.val(), b.val(), "mul");
    Tensor out = a.val();
    for (std::size_t k = 0; k < out.size(); ++k) out.v[k] *= b.val().v[k];
    const auto ia = a.idx, ib = b.idx;
    return a.tape->push(std::move(out), [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& av = t.val(ia);
        const Tensor& bv = t.val(ib);
        Tensor& ga = t.grad_mut(ia);
        Tensor& gb = t.grad_mut(ib);
        for (std::size_t k = 0; k < g.size(); ++k) {
            ga.v[k] += g.v[k] * bv.v[k];
            gb.v[k] += g.v[k] * av.v[k];
        }
    });
}

inline Value scale(Value a, double s) {
    Tensor out = a.val();
    for (double& x : out.v) x *= s;
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia, s](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        for (std::size_t k = 0; k < g.size(); ++k) ga.v[k] += s * g.v[k];
    });
}

inline Value relu(Value a) {
    Tensor out = a.val();
    for (double& x : out.v) x = x > 0.0 ? x : 0.0;  // subgradient at 0 is 0
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia](Tape& t, const Tensor& g) {
        const Tensor& av = t.val(ia);
        Tensor& ga = t.grad_mut(ia);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (av.v[k] > 0.0) ga.v[k] += g.v[k];
    });
}

inline Value sigmoid(Value a) {
    Tensor out = a.val();
    for (double& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        const Tensor& av = t.val(ia);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double s = 1.0 / (1.0 + std::exp(-av.v[k]));
            ga.v[k] += g.v[k] * s * (1.0 - s);
        }
    });
}

inline Value tanh(Value a) {
    Tensor out = a.val();
    for (double& x : out.v) x = std::tanh(x);
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia](Tape& t, const Tensor& g) {
        const Tensor& av = t.val(ia);
        Tensor& ga = t.grad_mut(ia);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double y = std::tanh(av.v[k]);
            ga.v[k] += g.v[k] * (1.0 - y * y);
        }
    });
}

inline Value log(Value a) {
    Tensor out = a.val();
    for (double& x : out.v) x = std::log(x);
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia](Tape& t, const Tensor& g) {
        const Tensor& av = t.val(ia);
        Tensor& ga = t.grad_mut(ia);
        for (std::size_t k = 0; k < g.size(); ++k) ga.v[k] += g.v[k] / av.v[k];
    });
}

// Clamps to [lo, hi]; gradient passes only through unclamped entries.
inline Value clamp(Value a, double lo, double hi) {
    Tensor out = a.val();
    for (double& x : out.v) x = x < lo ? lo : (x > hi ? hi : x);
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia, lo, hi](Tape& t, const Tensor& g) {
        const Tensor& av = t.val(ia);
        Tensor& ga = t.grad_mut(ia);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (av.v[k] > lo && av.v[k] < hi) ga.v[k] += g.v[k];
    });
}

// ---------------------------------------------------------------- linear algebra

// y = x W, with x a vector of length n and W an (n, m) matrix.
inline Value matvec(Value x, Value W) {
    const Tensor& xv = x.val();
    const Tensor& Wv = W.val();
    if (xv.rank() != 1 || Wv.rank() != 2 || xv.shape[0] != Wv.shape[0])
        throw ShapeError("matvec: shape mismatch " + xv.shape_str() + " vs " + Wv.shape_str());
    const std::size_t n = Wv.shape[0], m = Wv.shape[1];
    Tensor out = Tensor::zeros({m});
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xv.v[i];
        const double* wrow = &Wv.v[i * m];
        for (std::size_t j = 0; j < m; ++j) out.v[j] += xi * wrow[j];
    }
    const auto ix = x.idx, iW = W.idx;
    return x.tape->push(std::move(out), [ix, iW, n, m](Tape& t, const Tensor& g) {
        const Tensor& xv2 = t.val(ix);
        const Tensor& Wv2 = t.val(iW);
        Tensor& gx = t.grad_mut(ix);
        Tensor& gW = t.grad_mut(iW);
        for (std::size_t i = 0; i < n; ++i) {
            const double* wrow = &Wv2.v[i * m];
            double* gwrow = &gW.v[i * m];
            double acc = 0.0;
            const double xi = xv2.v[i];
            for (std::size_t j = 0; j < m; ++j) {
                acc += wrow[j] * g.v[j];
                gwrow[j] += xi * g.v[j];
            }
            gx.v[i] += acc;
        }
    });
}

// y = x W + b
inline Value affine(Value x, Value W, Value b) {
    const Tensor& bv = b.val();
    const Tensor& Wv = W.val();
    if (bv.rank() != 1 || Wv.rank() != 2 || bv.shape[0] != Wv.shape[1])
        throw ShapeError("affine: bias shape " + bv.shape_str() + " vs weight " + Wv.shape_str());
    return add(matvec(x, W), b);
}

// ---------------------------------------------------------------- structure

inline Value concat(Value a, Value b) {
    const Tensor& av = a.val();
    const Tensor& bv = b.val();
    if (av.rank() != 1 || bv.rank() != 1) throw ShapeError("concat: 1-D operands required");
    Tensor out = Tensor::zeros({av.size() + bv.size()});
    std::copy(av.v.begin(), av.v.end(), out.v.begin());
    std::copy(bv.v.begin(), bv.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(av.size()));
    const auto ia = a.idx, ib = b.idx;
    const std::size_t na = av.size();
    return a.tape->push(std::move(out), [ia, ib, na](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        Tensor& gb = t.grad_mut(ib);
        for (std::size_t k = 0; k < na; ++k) ga.v[k] += g.v[k];
        for (std::size_t k = na; k < g.size(); ++k) gb.v[k - na] += g.v[k];
    });
}

inline Value slice(Value a, std::size_t offset, std::size_t len) {
    const Tensor& av = a.val();
    if (av.rank() != 1 || offset + len > av.size())
        throw ShapeError("slice: out of range on " + av.shape_str());
    Tensor out = Tensor::zeros({len});
    std::copy(av.v.begin() + static_cast<std::ptrdiff_t>(offset),
              av.v.begin() + static_cast<std::ptrdiff_t>(offset + len), out.v.begin());
    const auto ia = a.idx;
    return a.tape->push(std::move(out), [ia, offset, len](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        for (std::size_t k = 0; k < len; ++k) ga.v[offset + k] += g.v[k];
    });
}

// Element-wise max over same-shaped tensors; ties route to the first argmax.
inline Value max_pool(const std::vector<Value>& xs) {
    if (xs.empty()) throw ArgumentError("max_pool: empty sequence");
    const Tensor& first = xs[0].val();
    for (const Value& x : xs) require_same_shape(first, x.val(), "max_pool");
    Tensor out = first;
    std::vector<std::uint32_t> arg(out.size(), 0);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const Tensor& xv = xs[i].val();
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (xv.v[k] > out.v[k]) {
                out.v[k] = xv.v[k];
                arg[k] = static_cast<std::uint32_t>(i);
            }
        }
    }
    std::vector<std::uint32_t> srcs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) srcs[i] = xs[i].idx;
    return xs[0].tape->push(std::move(out),
                            [srcs = std::move(srcs), arg = std::move(arg)](Tape& t, const Tensor& g) {
                                for (std::size_t k = 0; k < g.size(); ++k)
                                    t.grad_mut(srcs[arg[k]]).v[k] += g.v[k];
                            });
}

// ---------------------------------------------------------------- reductions

inline Value sum(Value a) {
    double s = 0.0;
    for (double x : a.val().v) s += x;
    const auto ia = a.idx;
    return a.tape->push(Tensor::scalar(s), [ia](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ia);
        for (double& x : ga.v) x += g.v[0];
    });
}

inline Value dot(Value a, Value b) { return sum(mul(a, b)); }

inline Value add_scalars(const std::vector<Value>& xs) {
    if (xs.empty()) throw ArgumentError("add_scalars: empty");
    Value acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
    return acc;
}

inline Value mean_scalars(const std::vector<Value>& xs) {
    return scale(add_scalars(xs), 1.0 / static_cast<double>(xs.size()));
}

// Sum of squared Euclidean distances between two aligned point sequences,
// each point a Value of shape (2).
inline Value l2_point_seq(const std::vector<Value>& a, const std::vector<Value>& b) {
    if (a.size() != b.size() || a.empty())
        throw ShapeError("l2_point_seq: sequence length mismatch");
    std::vector<Value> terms;
    terms.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        Value d = sub(a[k], b[k]);
        terms.push_back(sum(mul(d, d)));
    }
    return add_scalars(terms);
}

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }

}  // namespace aasgan::ad
