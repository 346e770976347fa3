#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace riskgraph::nn {

/// Dense row-major tensor of doubles. Rank is dynamic but almost everything
/// in this library is rank 1..3.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor zeros_like(const Tensor& other);
    static Tensor full(std::vector<std::size_t> shape, double v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// C = A * B for 2-D tensors; throws std::invalid_argument on shape mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

/// C += A * B, and the transposed-operand variants used by backprop.
void matmul_acc(Tensor& c, const Tensor& a, const Tensor& b);
void matmul_tn_acc(Tensor& c, const Tensor& a, const Tensor& b);  // C += A^T * B
void matmul_nt_acc(Tensor& c, const Tensor& a, const Tensor& b);  // C += A * B^T

Tensor transpose(const Tensor& a);

}  // namespace riskgraph::nn
