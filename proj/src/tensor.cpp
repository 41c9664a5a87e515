#include "rgtn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rgtn/kernels.hpp"

namespace rgtn {

std::size_t shape_numel(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(std::span<const std::size_t> shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ')';
    return os.str();
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) throw ShapeError("matrix data length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    if (c.data.empty()) return c;
    if (a.cols == 0) return c;
    kernels::gemm(a.rows, a.cols, b.cols, a.data.data(), b.data.data(), c.data.data());
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor order must be at least 1");
    for (std::size_t d : shape)
        if (d == 0) throw ShapeError("tensor mode sizes must be positive, got " + shape_to_string(shape));
}

}  // namespace

DenseTensor::DenseTensor() : shape_{1}, data_(1, 0.0) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_numel(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_numel(shape_))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
}

DenseTensor DenseTensor::filled(Shape shape, double value) {
    DenseTensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) { return DenseTensor({m.rows, m.cols}, m.data); }

std::vector<std::size_t> DenseTensor::strides() const {
    std::vector<std::size_t> s(shape_.size(), 1);
    for (std::size_t i = shape_.size(); i-- > 1;) s[i - 1] = s[i] * shape_[i];
    return s;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ShapeError("index order does not match tensor order");
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= shape_[i]) throw std::out_of_range("tensor index out of range");
        off = off * shape_[i] + index[i];
    }
    return off;
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

DenseTensor DenseTensor::reshaped(Shape shape) const& {
    DenseTensor copy = *this;
    return std::move(copy).reshaped(std::move(shape));
}

DenseTensor DenseTensor::reshaped(Shape shape) && {
    if (shape_numel(shape) != data_.size()) throw ShapeError("reshape changes element count");
    return DenseTensor(std::move(shape), std::move(data_));
}

Matrix DenseTensor::as_matrix(std::size_t rows, std::size_t cols) const {
    if (rows * cols != data_.size()) throw ShapeError("as_matrix: element count mismatch");
    return Matrix(rows, cols, data_);
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (other.shape_ != shape_) throw ShapeError("tensor add: shape mismatch");
    kernels::axpy(1.0, other.data_.data(), data_.data(), data_.size());
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (other.shape_ != shape_) throw ShapeError("tensor subtract: shape mismatch");
    kernels::axpy(-1.0, other.data_.data(), data_.data(), data_.size());
    return *this;
}

DenseTensor& DenseTensor::operator*=(double c) {
    kernels::scale(c, data_.data(), data_.size());
    return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double c, DenseTensor a) { return a *= c; }

DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> perm) {
    const std::size_t n = t.order();
    if (perm.size() != n) throw ShapeError("permute: permutation length differs from tensor order");
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) throw ShapeError("permute: not a permutation");
        seen[p] = true;
    }
    bool identity = true;
    for (std::size_t i = 0; i < n; ++i) identity = identity && perm[i] == i;
    if (identity) return t;

    const auto in_strides = t.strides();
    Shape out_shape(n);
    std::vector<std::size_t> step(n);
    for (std::size_t i = 0; i < n; ++i) {
        out_shape[i] = t.shape()[perm[i]];
        step[i] = in_strides[perm[i]];
    }
    DenseTensor out(out_shape);
    const double* src = t.data().data();
    double* dst = out.data().data();

    const std::size_t inner = out_shape[n - 1];
    const std::size_t inner_step = step[n - 1];
    const std::size_t outer = out.size() / inner;
    std::vector<std::size_t> idx(n, 0);
    std::size_t in_off = 0;
    for (std::size_t o = 0; o < outer; ++o) {
        const double* s = src + in_off;
        if (inner_step == 1) {
            std::copy(s, s + inner, dst);
        } else {
            for (std::size_t j = 0; j < inner; ++j) dst[j] = s[j * inner_step];
        }
        dst += inner;
        // Odometer over the outer modes.
        for (std::size_t d = n - 1; d-- > 0;) {
            ++idx[d];
            in_off += step[d];
            if (idx[d] < out_shape[d]) break;
            in_off -= step[d] * out_shape[d];
            idx[d] = 0;
        }
    }
    return out;
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
    if (mode >= t.order()) throw ShapeError("unfold: mode " + std::to_string(mode) + " out of range");
    std::vector<std::size_t> perm{mode};
    for (std::size_t i = 0; i < t.order(); ++i)
        if (i != mode) perm.push_back(i);
    DenseTensor p = permute(t, perm);
    const std::size_t rows = t.dim(mode);
    return Matrix(rows, t.size() / rows, std::move(p.values()));
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape) {
    if (mode >= shape.size()) throw ShapeError("fold: mode out of range");
    const std::size_t total = shape_numel(shape);
    if (m.rows != shape[mode] || m.rows * m.cols != total)
        throw ShapeError("fold: matrix " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                         " does not match shape " + shape_to_string(shape) + " at mode " + std::to_string(mode));
    Shape permuted{shape[mode]};
    std::vector<std::size_t> inverse(shape.size());
    inverse[mode] = 0;
    for (std::size_t i = 0, pos = 1; i < shape.size(); ++i) {
        if (i == mode) continue;
        permuted.push_back(shape[i]);
        inverse[i] = pos++;
    }
    return permute(DenseTensor(permuted, m.data), inverse);
}

DenseTensor contract(const DenseTensor& a, std::span<const std::size_t> modes_a, const DenseTensor& b,
                     std::span<const std::size_t> modes_b) {
    if (modes_a.size() != modes_b.size()) throw ShapeError("contract: mode lists differ in length");
    std::vector<bool> used_a(a.order(), false), used_b(b.order(), false);
    std::size_t k = 1;
    for (std::size_t i = 0; i < modes_a.size(); ++i) {
        const std::size_t ma = modes_a[i], mb = modes_b[i];
        if (ma >= a.order() || mb >= b.order()) throw ShapeError("contract: mode index out of range");
        if (used_a[ma] || used_b[mb]) throw ShapeError("contract: repeated mode");
        if (a.dim(ma) != b.dim(mb))
            throw ShapeError("contract: paired modes have sizes " + std::to_string(a.dim(ma)) + " and " +
                             std::to_string(b.dim(mb)));
        used_a[ma] = used_b[mb] = true;
        k *= a.dim(ma);
    }
    std::vector<std::size_t> perm_a, perm_b;
    Shape out_shape;
    std::size_t m = 1, n = 1;
    for (std::size_t i = 0; i < a.order(); ++i)
        if (!used_a[i]) {
            perm_a.push_back(i);
            out_shape.push_back(a.dim(i));
            m *= a.dim(i);
        }
    perm_a.insert(perm_a.end(), modes_a.begin(), modes_a.end());
    perm_b.assign(modes_b.begin(), modes_b.end());
    for (std::size_t i = 0; i < b.order(); ++i)
        if (!used_b[i]) {
            perm_b.push_back(i);
            out_shape.push_back(b.dim(i));
            n *= b.dim(i);
        }
    if (out_shape.empty()) out_shape.push_back(1);

    const DenseTensor pa = permute(a, perm_a);
    const DenseTensor pb = permute(b, perm_b);
    DenseTensor out(out_shape);
    kernels::gemm(m, k, n, pa.data().data(), pb.data().data(), out.data().data());
    return out;
}

DenseTensor contract(const DenseTensor& a, std::initializer_list<std::size_t> modes_a, const DenseTensor& b,
                     std::initializer_list<std::size_t> modes_b) {
    return contract(a, std::span<const std::size_t>(modes_a.begin(), modes_a.size()), b,
                    std::span<const std::size_t>(modes_b.begin(), modes_b.size()));
}

DenseTensor mode_product(const DenseTensor& t, std::size_t mode, const Matrix& m) {
    if (mode >= t.order()) throw ShapeError("mode_product: mode out of range");
    if (m.rows != t.dim(mode)) throw ShapeError("mode_product: matrix rows differ from mode size");
    const std::size_t n = t.order();
    std::vector<std::size_t> to_last;
    for (std::size_t i = 0; i < n; ++i)
        if (i != mode) to_last.push_back(i);
    to_last.push_back(mode);
    const DenseTensor p = permute(t, to_last);
    const std::size_t rest = t.size() / t.dim(mode);
    Shape out_shape = p.shape();
    out_shape.back() = m.cols;
    DenseTensor out(out_shape);
    kernels::gemm(rest, m.rows, m.cols, p.data().data(), m.data.data(), out.data().data());
    std::vector<std::size_t> back(n);
    for (std::size_t i = 0, pos = 0; i < n; ++i) back[i] = (i == mode) ? n - 1 : pos++;
    return permute(out, back);
}

DenseTensor scale_mode(const DenseTensor& t, std::size_t mode, std::span<const double> w) {
    if (mode >= t.order()) throw ShapeError("scale_mode: mode out of range");
    const std::size_t dim = t.dim(mode);
    if (w.size() != dim) throw ShapeError("scale_mode: weight length differs from mode size");
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < mode; ++i) outer *= t.dim(i);
    for (std::size_t i = mode + 1; i < t.order(); ++i) inner *= t.dim(i);
    DenseTensor out = t;
    double* d = out.data().data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t j = 0; j < dim; ++j) kernels::scale(w[j], d + (o * dim + j) * inner, inner);
    return out;
}

double frobenius_norm(const DenseTensor& t) { return std::sqrt(kernels::sumsq(t.data().data(), t.size())); }

double frobenius_norm(const Matrix& m) { return std::sqrt(kernels::sumsq(m.data.data(), m.data.size())); }

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("inner: shape mismatch");
    return kernels::dot(a.data().data(), b.data().data(), a.size());
}

}  // namespace rgtn
