#include "riskgraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace riskgraph::nn {

namespace {

[[noreturn]] void shape_error(const char* op) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

void require_same(const Var& a, const Var& b, const char* op) {
    if (!a->value.same_shape(b->value)) shape_error(op);
}

Var make_node(Tensor value, std::vector<Var> parents,
              std::function<void(const Tensor&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
    return n;
}

double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus_scalar(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

/// Unary elementwise op; dydx receives (input, output) per entry.
template <typename F, typename D>
Var unary(const Var& a, F&& f, D&& dydx) {
    Tensor out = Tensor::zeros_like(a->value);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a->value[i]);
    Node* self = nullptr;
    auto v = make_node(std::move(out), {a}, nullptr);
    self = v.get();
    Var pa = a;
    v->backprop = [pa, self, dydx](const Tensor& g) {
        Tensor& da = grad_of(pa);
        for (std::size_t i = 0; i < g.size(); ++i)
            da[i] += g[i] * dydx(pa->value[i], self->value[i]);
    };
    return v;
}

}  // namespace

Var constant(Tensor value) { return make_node(std::move(value), {}, nullptr); }

Tensor& grad_of(const Var& v) {
    if (!v->grad_set) {
        v->grad = Tensor::zeros_like(v->value);
        v->grad_set = true;
    }
    return v->grad;
}

void backward(const Var& root, double seed) {
    // Iterative post-order over parents; nodes may sit on the stack twice.
    std::vector<Node*> order;
    std::unordered_map<Node*, unsigned char> state;
    std::vector<Node*> stack{root.get()};
    while (!stack.empty()) {
        Node* n = stack.back();
        unsigned char& s = state[n];
        if (s == 0) {
            s = 1;
            for (const auto& p : n->parents)
                if (state[p.get()] == 0) stack.push_back(p.get());
        } else {
            stack.pop_back();
            if (s == 1) {
                s = 2;
                order.push_back(n);
            }
        }
    }

    root->grad = Tensor::full(root->value.shape(), seed);
    root->grad_set = true;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && n->grad_set) n->backprop(n->grad);
    }
}

Var add(const Var& a, const Var& b) {
    require_same(a, b, "add");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
    return make_node(std::move(out), {a, b}, [a, b](const Tensor& g) {
        Tensor& da = grad_of(a);
        Tensor& db = grad_of(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i];
            db[i] += g[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    require_same(a, b, "sub");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
    return make_node(std::move(out), {a, b}, [a, b](const Tensor& g) {
        Tensor& da = grad_of(a);
        Tensor& db = grad_of(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i];
            db[i] -= g[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same(a, b, "mul");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
    return make_node(std::move(out), {a, b}, [a, b](const Tensor& g) {
        Tensor& da = grad_of(a);
        Tensor& db = grad_of(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i] * b->value[i];
            db[i] += g[i] * a->value[i];
        }
    });
}

Var smul(const Var& a, double c) {
    Tensor out = a->value;
    for (auto& x : out.raw()) x *= c;
    return make_node(std::move(out), {a}, [a, c](const Tensor& g) {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += c * g[i];
    });
}

Var sadd(const Var& a, double c) {
    Tensor out = a->value;
    for (auto& x : out.raw()) x += c;
    return make_node(std::move(out), {a}, [a](const Tensor& g) {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    });
}

Var add_rowvec(const Var& a, const Var& v) {
    if (a->value.ndim() != 2 || v->value.ndim() != 2 || v->value.rows() != 1 ||
        v->value.cols() != a->value.cols())
        shape_error("add_rowvec");
    const std::size_t m = a->value.rows(), n = a->value.cols();
    Tensor out = a->value;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) += v->value[j];
    return make_node(std::move(out), {a, v}, [a, v, m, n](const Tensor& g) {
        Tensor& da = grad_of(a);
        Tensor& dv = grad_of(v);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                da.at(i, j) += g.at(i, j);
                dv[j] += g.at(i, j);
            }
    });
}

Var matmul_op(const Var& a, const Var& b) {
    Tensor out = matmul(a->value, b->value);
    return make_node(std::move(out), {a, b}, [a, b](const Tensor& g) {
        matmul_nt_acc(grad_of(a), g, b->value);  // dA += g B^T
        matmul_tn_acc(grad_of(b), a->value, g);  // dB += A^T g
    });
}

Var sigmoid_op(const Var& a) {
    return unary(a, [](double x) { return sigmoid_scalar(x); },
                 [](double, double y) { return y * (1.0 - y); });
}

Var tanh_op(const Var& a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Var softplus_op(const Var& a) {
    return unary(a, [](double x) { return softplus_scalar(x); },
                 [](double x, double) { return sigmoid_scalar(x); });
}

Var exp_op(const Var& a) {
    return unary(a, [](double x) { return std::exp(x); },
                 [](double, double y) { return y; });
}

Var log_op(const Var& a) {
    return unary(a, [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; });
}

Var leaky_relu_op(const Var& a, double slope) {
    return unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var elu_op(const Var& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
                 [](double x, double y) { return x > 0.0 ? 1.0 : y + 1.0; });
}

Var clamp_op(const Var& a, double lo, double hi) {
    return unary(a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
                 [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var concat_cols(const Var& a, const Var& b) {
    if (a->value.ndim() != 2 || b->value.ndim() != 2 || a->value.rows() != b->value.rows())
        shape_error("concat_cols");
    const std::size_t m = a->value.rows(), na = a->value.cols(), nb = b->value.cols();
    Tensor out({m, na + nb});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < na; ++j) out.at(i, j) = a->value.at(i, j);
        for (std::size_t j = 0; j < nb; ++j) out.at(i, na + j) = b->value.at(i, j);
    }
    return make_node(std::move(out), {a, b}, [a, b, m, na, nb](const Tensor& g) {
        Tensor& da = grad_of(a);
        Tensor& db = grad_of(b);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < na; ++j) da.at(i, j) += g.at(i, j);
            for (std::size_t j = 0; j < nb; ++j) db.at(i, j) += g.at(i, na + j);
        }
    });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
    if (a->value.ndim() != 2 || c0 >= c1 || c1 > a->value.cols()) shape_error("slice_cols");
    const std::size_t m = a->value.rows(), w = c1 - c0;
    Tensor out({m, w});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) out.at(i, j) = a->value.at(i, c0 + j);
    return make_node(std::move(out), {a}, [a, m, w, c0](const Tensor& g) {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < w; ++j) da.at(i, c0 + j) += g.at(i, j);
    });
}

Var outer_add(const Var& f, const Var& g) {
    if (f->value.ndim() != 2 || g->value.ndim() != 2 || f->value.cols() != 1 ||
        g->value.cols() != 1 || f->value.rows() != g->value.rows())
        shape_error("outer_add");
    const std::size_t n = f->value.rows();
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = f->value[i] + g->value[j];
    return make_node(std::move(out), {f, g}, [f, g, n](const Tensor& up) {
        Tensor& df = grad_of(f);
        Tensor& dg = grad_of(g);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                df[i] += up.at(i, j);
                dg[j] += up.at(i, j);
            }
    });
}

Var masked_softmax_rows(const Var& e, const Tensor& mask) {
    if (e->value.ndim() != 2 || !e->value.same_shape(mask)) shape_error("masked_softmax_rows");
    const std::size_t m = e->value.rows(), n = e->value.cols();
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        bool any_unmasked = false;
        for (std::size_t j = 0; j < n; ++j)
            if (mask.at(i, j) != 0.0) {
                any_unmasked = true;
                if (e->value.at(i, j) > mx) mx = e->value.at(i, j);
            }
        if (!any_unmasked)
            throw std::invalid_argument("masked_softmax_rows: row " + std::to_string(i) +
                                        " has no unmasked entries");
        // All-NaN rows leave mx at -inf; shift by 0 so the NaN reaches the
        // loss instead of turning into inf arithmetic here.
        if (mx == -std::numeric_limits<double>::infinity()) mx = 0.0;
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (mask.at(i, j) != 0.0) denom += std::exp(e->value.at(i, j) - mx);
        for (std::size_t j = 0; j < n; ++j)
            out.at(i, j) =
                mask.at(i, j) != 0.0 ? std::exp(e->value.at(i, j) - mx) / denom : 0.0;
    }
    Node* self = nullptr;
    auto v = make_node(std::move(out), {e}, nullptr);
    self = v.get();
    Var pe = e;
    Tensor mk = mask;
    v->backprop = [pe, self, mk, m, n](const Tensor& g) {
        Tensor& de = grad_of(pe);
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += g.at(i, j) * self->value.at(i, j);
            for (std::size_t j = 0; j < n; ++j)
                if (mk.at(i, j) != 0.0)
                    de.at(i, j) += self->value.at(i, j) * (g.at(i, j) - dot);
        }
    };
    return v;
}

Var mean_all(const Var& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i) s += a->value[i];
    const double inv = 1.0 / static_cast<double>(a->value.size());
    return make_node(Tensor::scalar(s * inv), {a}, [a, inv](const Tensor& g) {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[0] * inv;
    });
}

Var sum_all(const Var& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i) s += a->value[i];
    return make_node(Tensor::scalar(s), {a}, [a](const Tensor& g) {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[0];
    });
}

Var zinb_nll_mean(const Var& pi, const Var& n, const Var& p, const Tensor& y, dist::Y0Form form) {
    if (!pi->value.same_shape(n->value) || !pi->value.same_shape(p->value) ||
        !pi->value.same_shape(y))
        shape_error("zinb_nll_mean");
    const std::size_t sz = y.size();
    double total = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        const dist::ZinbParams q{pi->value[i], n->value[i], p->value[i]};
        total += dist::zinb_nll(q, static_cast<long long>(y[i]), form);
    }
    const double inv = 1.0 / static_cast<double>(sz);
    Tensor yc = y;
    return make_node(Tensor::scalar(total * inv), {pi, n, p},
                     [pi, n, p, yc, inv, form, sz](const Tensor& g) {
                         Tensor& dpi = grad_of(pi);
                         Tensor& dn = grad_of(n);
                         Tensor& dp = grad_of(p);
                         const double scale = g[0] * inv;
                         for (std::size_t i = 0; i < sz; ++i) {
                             const dist::ZinbParams q{pi->value[i], n->value[i], p->value[i]};
                             const auto gr =
                                 dist::zinb_nll_grad(q, static_cast<long long>(yc[i]), form);
                             dpi[i] += scale * gr.dpi;
                             dn[i] += scale * gr.dn;
                             dp[i] += scale * gr.dp;
                         }
                     });
}

Var nb_nll_mean(const Var& n, const Var& p, const Tensor& y) {
    if (!n->value.same_shape(p->value) || !n->value.same_shape(y)) shape_error("nb_nll_mean");
    const std::size_t sz = y.size();
    double total = 0.0;
    for (std::size_t i = 0; i < sz; ++i)
        total -= dist::nb_loglik({n->value[i], p->value[i]}, static_cast<long long>(y[i]));
    const double inv = 1.0 / static_cast<double>(sz);
    Tensor yc = y;
    return make_node(Tensor::scalar(total * inv), {n, p}, [n, p, yc, inv, sz](const Tensor& g) {
        Tensor& dn = grad_of(n);
        Tensor& dp = grad_of(p);
        const double scale = g[0] * inv;
        for (std::size_t i = 0; i < sz; ++i) {
            const auto gr =
                dist::nb_nll_grad({n->value[i], p->value[i]}, static_cast<long long>(yc[i]));
            dn[i] += scale * gr.dn;
            dp[i] += scale * gr.dp;
        }
    });
}

Var gauss_nll_mean(const Var& mu, const Var& sigma, const Tensor& y) {
    if (!mu->value.same_shape(sigma->value) || !mu->value.same_shape(y))
        shape_error("gauss_nll_mean");
    const std::size_t sz = y.size();
    double total = 0.0;
    for (std::size_t i = 0; i < sz; ++i)
        total -= dist::gauss_loglik({mu->value[i], sigma->value[i]}, y[i]);
    const double inv = 1.0 / static_cast<double>(sz);
    Tensor yc = y;
    return make_node(Tensor::scalar(total * inv), {mu, sigma},
                     [mu, sigma, yc, inv, sz](const Tensor& g) {
                         Tensor& dmu = grad_of(mu);
                         Tensor& ds = grad_of(sigma);
                         const double scale = g[0] * inv;
                         for (std::size_t i = 0; i < sz; ++i) {
                             const auto gr =
                                 dist::gauss_nll_grad({mu->value[i], sigma->value[i]}, yc[i]);
                             dmu[i] += scale * gr.dmu;
                             ds[i] += scale * gr.dsigma;
                         }
                     });
}

double grad_check(const std::function<double(const Tensor&)>& f, const Tensor& at,
                  const Tensor& analytic, double eps) {
    if (!at.same_shape(analytic)) throw std::invalid_argument("grad_check: shape mismatch");
    double worst = 0.0;
    Tensor x = at;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double fp = f(x);
        x[i] = keep - eps;
        const double fm = f(x);
        x[i] = keep;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double a = analytic[i];
        if (!std::isfinite(numeric) || !std::isfinite(a))
            throw std::runtime_error("grad_check: non-finite value at entry " + std::to_string(i));
        const double rel =
            std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        if (rel > worst) worst = rel;
    }
    return worst;
}

}  // namespace riskgraph::nn
