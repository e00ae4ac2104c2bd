#include "meib/matrix.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "meib/errors.hpp"

namespace meib {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;
using MutMap = Eigen::Map<EigenRowMajor>;

ConstMap as_eigen(const DenseMatrix& m) {
    return ConstMap(m.data().data(), m.rows(), m.cols());
}

MutMap as_eigen(DenseMatrix& m) {
    return MutMap(m.data().data(), m.rows(), m.cols());
}

constexpr double kEigClamp = 1e-12;
constexpr double kPsdErrorFloor = -1e-6;

} // namespace

DenseMatrix::DenseMatrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw DimensionError("DenseMatrix: negative dimension");
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0) throw DimensionError("DenseMatrix: negative dimension");
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionError("DenseMatrix: data length does not match rows*cols");
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n, 0.0);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::constant(int rows, int cols, double value) {
    return DenseMatrix(rows, cols, value);
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return DenseMatrix();
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows[0].size());
    DenseMatrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c)
            throw DimensionError("from_rows: ragged rows");
        for (int j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

bool DenseMatrix::is_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double DenseMatrix::trace() const {
    const int n = std::min(rows_, cols_);
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += (*this)(i, i);
    return t;
}

double DenseMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DenseMatrix DenseMatrix::select_rows(const std::vector<int>& indices) const {
    DenseMatrix out(static_cast<int>(indices.size()), cols_);
    for (int i = 0; i < out.rows(); ++i) {
        const int src = indices[i];
        if (src < 0 || src >= rows_) throw DimensionError("select_rows: index out of range");
        std::copy_n(data_.begin() + static_cast<std::size_t>(src) * cols_, cols_,
                    out.data_.begin() + static_cast<std::size_t>(i) * cols_);
    }
    return out;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    if (!same_shape(other)) throw DimensionError("operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    if (!same_shape(other)) throw DimensionError("operator-=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions disagree (" + shape_string(a) + " * " +
                             shape_string(b) + ")");
    DenseMatrix out(a.rows(), b.cols());
    as_eigen(out).noalias() = as_eigen(a) * as_eigen(b);
    return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        throw DimensionError("matmul_nt: inner dimensions disagree (" + shape_string(a) + " * " +
                             shape_string(b) + "^T)");
    DenseMatrix out(a.rows(), b.rows());
    as_eigen(out).noalias() = as_eigen(a) * as_eigen(b).transpose();
    return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        throw DimensionError("matmul_tn: inner dimensions disagree (" + shape_string(a) + "^T * " +
                             shape_string(b) + ")");
    DenseMatrix out(a.cols(), b.cols());
    as_eigen(out).noalias() = as_eigen(a).transpose() * as_eigen(b);
    return out;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b))
        throw DimensionError("hadamard: shape mismatch (" + shape_string(a) + " vs " +
                             shape_string(b) + ")");
    DenseMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) throw DimensionError("frobenius_inner: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

DenseMatrix hconcat(const std::vector<DenseMatrix>& parts) {
    if (parts.empty()) return DenseMatrix();
    const int rows = parts[0].rows();
    int cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw DimensionError("hconcat: row counts disagree");
        cols += p.cols();
    }
    DenseMatrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        int offset = 0;
        for (const auto& p : parts) {
            for (int j = 0; j < p.cols(); ++j) out(i, offset + j) = p(i, j);
            offset += p.cols();
        }
    }
    return out;
}

SymEig sym_eig(const DenseMatrix& m) {
    if (!m.is_square())
        throw DimensionError("sym_eig: matrix must be square, got " + shape_string(m));
    if (!m.is_finite()) throw NumericError("sym_eig: non-finite entries in input");

    const int n = m.rows();
    EigenRowMajor sym = as_eigen(m);
    sym = 0.5 * (sym + sym.transpose().eval());

    Eigen::SelfAdjointEigenSolver<EigenRowMajor> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericError("sym_eig: eigendecomposition failed to converge");

    SymEig result;
    result.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    result.eigenvectors = DenseMatrix(n, n);
    as_eigen(result.eigenvectors) = solver.eigenvectors();
    return result;
}

DenseMatrix spectral_power(const DenseMatrix& m, double p) {
    if (p <= 0.0) throw ConfigError("spectral_power: exponent must be positive");
    SymEig eig = sym_eig(m);
    const int n = m.rows();
    for (double lambda : eig.eigenvalues)
        if (lambda < kPsdErrorFloor)
            throw NumericError("spectral_power: matrix not PSD, eigenvalue " +
                               std::to_string(lambda));
    Eigen::VectorXd powered(n);
    for (int i = 0; i < n; ++i)
        powered[i] = std::pow(std::max(eig.eigenvalues[i], kEigClamp), p);

    DenseMatrix out(n, n);
    auto u = as_eigen(eig.eigenvectors);
    as_eigen(out).noalias() = u * powered.asDiagonal() * u.transpose();
    // Force exact symmetry against round-off.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (out(i, j) + out(j, i));
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

std::string shape_string(const DenseMatrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

} // namespace meib
