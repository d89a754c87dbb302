#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ftrl {

// Dense real-valued n-dimensional array, row-major, double precision.
// All shape mismatches are hard errors; there is no broadcasting.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::size_t> shape, double v) { return Tensor(std::move(shape), v); }
    static Tensor identity(std::size_t n);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(const std::vector<std::size_t>& idx);
    double at(const std::vector<std::size_t>& idx) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

enum class ElemOp { Add, Sub, Mul };

Tensor elementwise(const Tensor& a, const Tensor& b, ElemOp op);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

// C = A(MxK) * B(KxN), backed by BLAS dgemm.
Tensor matmul(const Tensor& a, const Tensor& b);

// Raw dgemm on row-major buffers: C(MxN) += or = opA(A) * opB(B).
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          double alpha, const double* a, const double* b, double beta, double* c);

Tensor reshape(const Tensor& t, std::vector<std::size_t> new_shape);
Tensor transpose(const Tensor& t, const std::vector<std::size_t>& axes);
// Half-open [start, stop) per axis; spec.size() must equal rank.
Tensor slice(const Tensor& t, const std::vector<std::pair<std::size_t, std::size_t>>& spec);

// Paired real/imaginary arrays of identical shape.
struct ComplexTensor {
    Tensor re;
    Tensor im;

    ComplexTensor() = default;
    ComplexTensor(Tensor real, Tensor imag);

    const std::vector<std::size_t>& shape() const { return re.shape(); }
    std::size_t numel() const { return re.numel(); }
};

}  // namespace ftrl
