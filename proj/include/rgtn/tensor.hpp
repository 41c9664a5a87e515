#pragma once
// Dense real tensors in row-major order (last index fastest) and the
// mode-wise algebra built on them. Mode indices are 0-based throughout.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgtn {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::size_t shape_numel(std::span<const std::size_t> shape);
std::string shape_to_string(std::span<const std::size_t> shape);

/// Row-major dense matrix. Used for unfoldings and factor matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

class DenseTensor {
public:
    /// Order-1 tensor holding a single zero.
    DenseTensor();
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    static DenseTensor filled(Shape shape, double value);
    static DenseTensor from_matrix(const Matrix& m);

    const Shape& shape() const { return shape_; }
    std::size_t order() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t mode) const { return shape_.at(mode); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double& at(std::initializer_list<std::size_t> index);
    double at(std::initializer_list<std::size_t> index) const;
    std::size_t offset(std::span<const std::size_t> index) const;

    /// Row-major strides.
    std::vector<std::size_t> strides() const;

    /// Same data, new shape of equal element count.
    DenseTensor reshaped(Shape shape) const&;
    DenseTensor reshaped(Shape shape) &&;

    Matrix as_matrix(std::size_t rows, std::size_t cols) const;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double c);

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double c, DenseTensor a);

/// result.shape[i] = t.shape[perm[i]].
DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> perm);

/// Mode-k unfolding: I_k rows; columns run over the remaining modes in
/// ascending order with the last one varying fastest.
Matrix unfold(const DenseTensor& t, std::size_t mode);
DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape);

/// Sums over the paired modes. The result carries a's free modes (ascending)
/// followed by b's free modes (ascending); empty lists give the outer product.
DenseTensor contract(const DenseTensor& a, std::span<const std::size_t> modes_a, const DenseTensor& b,
                     std::span<const std::size_t> modes_b);
DenseTensor contract(const DenseTensor& a, std::initializer_list<std::size_t> modes_a, const DenseTensor& b,
                     std::initializer_list<std::size_t> modes_b);

/// Multiplies mode `mode` by a matrix: out[..j'..] = sum_j t[..j..] * m(j, j').
DenseTensor mode_product(const DenseTensor& t, std::size_t mode, const Matrix& m);
/// Scales slice j of `mode` by w[j].
DenseTensor scale_mode(const DenseTensor& t, std::size_t mode, std::span<const double> w);

double frobenius_norm(const DenseTensor& t);
double frobenius_norm(const Matrix& m);
double inner(const DenseTensor& a, const DenseTensor& b);

}  // namespace rgtn
