#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskgraph/dist.hpp"
#include "riskgraph/tensor.hpp"

namespace riskgraph::nn {

/// Reverse-accumulation tape node. The graph is held together by shared
/// pointers from children to parents; backward closures capture the parent
/// handles, so a root Var keeps its whole history alive.
struct Node {
    Tensor value;
    Tensor grad;             // allocated lazily on first accumulation
    bool grad_set = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(const Tensor& g)> backprop;  // empty for leaves
};

using Var = std::shared_ptr<Node>;

Var constant(Tensor value);

/// Seeds root with `seed` in every entry (the root is normally scalar) and
/// runs reverse accumulation over the whole reachable graph.
void backward(const Var& root, double seed = 1.0);

Tensor& grad_of(const Var& v);  // allocates zeros on first use

// Elementwise and shape ops. All validate shapes and throw
// std::invalid_argument with the op name on mismatch.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var smul(const Var& a, double c);
Var sadd(const Var& a, double c);
Var add_rowvec(const Var& a, const Var& v);  // a: m x n, v: 1 x n
Var matmul_op(const Var& a, const Var& b);
Var sigmoid_op(const Var& a);
Var tanh_op(const Var& a);
Var softplus_op(const Var& a);
Var exp_op(const Var& a);
Var log_op(const Var& a);
Var leaky_relu_op(const Var& a, double slope);
Var elu_op(const Var& a);
Var clamp_op(const Var& a, double lo, double hi);
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);

/// f: n x 1, g: n x 1 -> E with E[i][j] = f[i] + g[j]; the pairwise
/// attention-logit structure.
Var outer_add(const Var& f, const Var& g);

/// Row-wise softmax restricted to entries where mask != 0; masked-out
/// entries are exactly 0. Every row must have at least one unmasked entry.
Var masked_softmax_rows(const Var& e, const Tensor& mask);

Var mean_all(const Var& a);
Var sum_all(const Var& a);

// Fused likelihood losses: mean NLL over all entries, with analytic
// parameter gradients from the dist module. y holds integer-valued counts.
Var zinb_nll_mean(const Var& pi, const Var& n, const Var& p, const Tensor& y,
                  dist::Y0Form form = dist::Y0Form::exact);
Var nb_nll_mean(const Var& n, const Var& p, const Tensor& y);
Var gauss_nll_mean(const Var& mu, const Var& sigma, const Tensor& y);

/// Central finite differences of f around `at`, compared entrywise against
/// `analytic`; returns max relative error |a-n| / max(1, |a|, |n|).
/// Throws std::runtime_error on non-finite values.
double grad_check(const std::function<double(const Tensor&)>& f, const Tensor& at,
                  const Tensor& analytic, double eps = 1e-5);

}  // namespace riskgraph::nn
