#include "riskgraph/tensor.hpp"

#include <Eigen/Core>

#include <numeric>
#include <stdexcept>

namespace riskgraph::nn {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

using MatMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutMatMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void require_2d(const Tensor& t, const char* what) {
    if (t.ndim() != 2) throw std::invalid_argument(std::string(what) + ": tensor is not 2-D");
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_size(shape_))
        throw std::invalid_argument("tensor: values do not match shape");
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape_); }

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : t.data_) x = v;
    return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    Tensor c({a.rows(), b.cols()});
    MutMatMap(c.data(), (Eigen::Index)a.rows(), (Eigen::Index)b.cols()) =
        MatMap(a.data(), (Eigen::Index)a.rows(), (Eigen::Index)a.cols()) *
        MatMap(b.data(), (Eigen::Index)b.rows(), (Eigen::Index)b.cols());
    return c;
}

void matmul_acc(Tensor& c, const Tensor& a, const Tensor& b) {
    MutMatMap(c.data(), (Eigen::Index)c.rows(), (Eigen::Index)c.cols()) +=
        MatMap(a.data(), (Eigen::Index)a.rows(), (Eigen::Index)a.cols()) *
        MatMap(b.data(), (Eigen::Index)b.rows(), (Eigen::Index)b.cols());
}

void matmul_tn_acc(Tensor& c, const Tensor& a, const Tensor& b) {
    MutMatMap(c.data(), (Eigen::Index)c.rows(), (Eigen::Index)c.cols()) +=
        MatMap(a.data(), (Eigen::Index)a.rows(), (Eigen::Index)a.cols()).transpose() *
        MatMap(b.data(), (Eigen::Index)b.rows(), (Eigen::Index)b.cols());
}

void matmul_nt_acc(Tensor& c, const Tensor& a, const Tensor& b) {
    MutMatMap(c.data(), (Eigen::Index)c.rows(), (Eigen::Index)c.cols()) +=
        MatMap(a.data(), (Eigen::Index)a.rows(), (Eigen::Index)a.cols()) *
        MatMap(b.data(), (Eigen::Index)b.rows(), (Eigen::Index)b.cols()).transpose();
}

Tensor transpose(const Tensor& a) {
    require_2d(a, "transpose");
    Tensor t({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

}  // namespace riskgraph::nn
