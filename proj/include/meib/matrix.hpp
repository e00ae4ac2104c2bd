#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace meib {

/**
 * Dense real matrix, row-major storage. The universal numeric carrier for
 * batches, Gram matrices, network parameters and gradients.
 */
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols, double fill = 0.0);
    DenseMatrix(int rows, int cols, std::vector<double> data);

    static DenseMatrix identity(int n);
    static DenseMatrix constant(int rows, int cols, double value);
    /// Builds a matrix from nested initializer-style rows (test convenience).
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool is_finite() const;
    bool is_square() const { return rows_ == cols_; }

    double trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    DenseMatrix transposed() const;
    /// Rows of this matrix selected by index, in the order given.
    DenseMatrix select_rows(const std::vector<int>& indices) const;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s);

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);
DenseMatrix operator*(double s, DenseMatrix a);

/// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

/// Element-wise product. Shapes must match.
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

/// Frobenius inner product sum_ij a_ij * b_ij.
double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b);

/// Concatenates matrices along columns; all must share the row count.
DenseMatrix hconcat(const std::vector<DenseMatrix>& parts);

/**
 * Full symmetric eigendecomposition. Eigenvalues ascending; eigenvector for
 * eigenvalues[i] is column i of eigenvectors, columns orthonormal.
 */
struct SymEig {
    std::vector<double> eigenvalues;
    DenseMatrix eigenvectors;
};

/**
 * Eigendecomposition of a symmetric matrix. The input is symmetrized as
 * (M + M^T)/2 before decomposing, so small round-off asymmetry from Gram
 * construction is tolerated rather than rejected.
 *
 * Throws DimensionError for non-square input, NumericError for non-finite
 * entries.
 */
SymEig sym_eig(const DenseMatrix& m);

/**
 * A^p for symmetric PSD A via U diag(max(lambda, eps)^p) U^T with
 * eps = 1e-12. Throws NumericError if any eigenvalue falls below -1e-6,
 * ConfigError for p <= 0.
 */
DenseMatrix spectral_power(const DenseMatrix& m, double p);

std::string shape_string(const DenseMatrix& m);

} // namespace meib
