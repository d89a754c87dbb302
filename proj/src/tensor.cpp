#include "ftrl/tensor.hpp"

#include <cblas.h>

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ftrl {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("tensor shape entries must be >= 1");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_))
        throw std::invalid_argument("tensor data length does not match shape product");
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw std::invalid_argument("axis out of range");
    return shape_[axis];
}

namespace {
std::size_t flat_index(const std::vector<std::size_t>& shape, const std::vector<std::size_t>& idx) {
    if (idx.size() != shape.size()) throw std::invalid_argument("index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        if (idx[a] >= shape[a]) throw std::invalid_argument("index out of bounds");
        flat = flat * shape[a] + idx[a];
    }
    return flat;
}
}  // namespace

double& Tensor::at(const std::vector<std::size_t>& idx) { return data_[flat_index(shape_, idx)]; }

double Tensor::at(const std::vector<std::size_t>& idx) const {
    return data_[flat_index(shape_, idx)];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
    os << "]";
    return os.str();
}

Tensor elementwise(const Tensor& a, const Tensor& b, ElemOp op) {
    if (!a.same_shape(b))
        throw std::invalid_argument("shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    Tensor out(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const std::size_t n = a.numel();
    switch (op) {
        case ElemOp::Add:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
            break;
        case ElemOp::Sub:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
            break;
        case ElemOp::Mul:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
            break;
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElemOp::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElemOp::Sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElemOp::Mul); }

Tensor scale(const Tensor& a, double s) {
    Tensor out = a;
    for (double& v : out.flat()) v *= s;
    return out;
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          double alpha, const double* a, const double* b, double beta, double* c) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
                static_cast<int>(k), alpha, a, static_cast<int>(trans_a ? m : k), b,
                static_cast<int>(trans_b ? k : n), beta, c, static_cast<int>(n));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw std::invalid_argument("matmul expects rank-2 tensors");
    if (a.dim(1) != b.dim(0))
        throw std::invalid_argument("matmul inner dimension mismatch: " + a.shape_str() + " vs " +
                                    b.shape_str());
    Tensor out({a.dim(0), b.dim(1)});
    gemm(false, false, a.dim(0), b.dim(1), a.dim(1), 1.0, a.data(), b.data(), 0.0, out.data());
    return out;
}

Tensor reshape(const Tensor& t, std::vector<std::size_t> new_shape) {
    std::size_t n = 1;
    for (std::size_t d : new_shape) n *= d;
    if (n != t.numel()) throw std::invalid_argument("reshape element count mismatch");
    return Tensor(std::move(new_shape), t.flat());
}

Tensor transpose(const Tensor& t, const std::vector<std::size_t>& axes) {
    const std::size_t r = t.rank();
    if (axes.size() != r) throw std::invalid_argument("transpose axes rank mismatch");
    std::vector<bool> seen(r, false);
    std::vector<std::size_t> new_shape(r);
    for (std::size_t a = 0; a < r; ++a) {
        if (axes[a] >= r || seen[axes[a]]) throw std::invalid_argument("transpose axes invalid");
        seen[axes[a]] = true;
        new_shape[a] = t.dim(axes[a]);
    }
    Tensor out(new_shape);
    // strides of the input
    std::vector<std::size_t> in_stride(r, 1);
    for (std::size_t a = r; a-- > 1;) in_stride[a - 1] = in_stride[a] * t.dim(a);
    std::vector<std::size_t> idx(r, 0);
    const std::size_t n = t.numel();
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t src = 0;
        for (std::size_t a = 0; a < r; ++a) src += idx[a] * in_stride[axes[a]];
        out[flat] = t[src];
        for (std::size_t a = r; a-- > 0;) {
            if (++idx[a] < new_shape[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

Tensor slice(const Tensor& t, const std::vector<std::pair<std::size_t, std::size_t>>& spec) {
    const std::size_t r = t.rank();
    if (spec.size() != r) throw std::invalid_argument("slice spec rank mismatch");
    std::vector<std::size_t> new_shape(r);
    for (std::size_t a = 0; a < r; ++a) {
        if (spec[a].first >= spec[a].second || spec[a].second > t.dim(a))
            throw std::invalid_argument("slice range out of bounds on axis " + std::to_string(a));
        new_shape[a] = spec[a].second - spec[a].first;
    }
    Tensor out(new_shape);
    std::vector<std::size_t> in_stride(r, 1);
    for (std::size_t a = r; a-- > 1;) in_stride[a - 1] = in_stride[a] * t.dim(a);
    std::vector<std::size_t> idx(r, 0);
    const std::size_t n = out.numel();
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t src = 0;
        for (std::size_t a = 0; a < r; ++a) src += (idx[a] + spec[a].first) * in_stride[a];
        out[flat] = t[src];
        for (std::size_t a = r; a-- > 0;) {
            if (++idx[a] < new_shape[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

ComplexTensor::ComplexTensor(Tensor real, Tensor imag) : re(std::move(real)), im(std::move(imag)) {
    if (!re.same_shape(im))
        throw std::invalid_argument("complex tensor re/im shape mismatch: " + re.shape_str() +
                                    " vs " + im.shape_str());
}

}  // namespace ftrl
