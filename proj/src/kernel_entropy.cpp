#include "meib/kernel_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "meib/errors.hpp"

namespace meib {

namespace {

constexpr double kEigClamp = 1e-12;
constexpr double kLn2 = 0.6931471805599453;

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || alpha == 1.0)
        throw ConfigError("entropy order alpha must be > 0 and != 1, got " +
                          std::to_string(alpha));
}

/// Squared Euclidean distances between all row pairs, exact zeros on the
/// diagonal, negatives from round-off clamped away.
DenseMatrix pairwise_sq_dists(const DenseMatrix& batch) {
    const int n = batch.rows();
    DenseMatrix g = matmul_nt(batch, batch);
    DenseMatrix d2(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = g(i, i) + g(j, j) - 2.0 * g(i, j);
            const double clamped = v > 0.0 ? v : 0.0;
            d2(i, j) = clamped;
            d2(j, i) = clamped;
        }
    }
    return d2;
}

struct SpectrumEntropy {
    double entropy;        ///< bits
    double trace_pow;      ///< sum_m max(lambda,eps)^alpha
    SymEig eig;
};

SpectrumEntropy entropy_from_matrix(const DenseMatrix& a, double alpha) {
    SpectrumEntropy out{0.0, 0.0, sym_eig(a)};
    for (double lambda : out.eig.eigenvalues)
        out.trace_pow += std::pow(std::max(lambda, kEigClamp), alpha);
    out.entropy = std::log2(out.trace_pow) / (1.0 - alpha);
    return out;
}

/// dH/dA given the decomposition already computed for the value.
DenseMatrix gradient_from_spectrum(const SpectrumEntropy& s, double alpha) {
    const int n = static_cast<int>(s.eig.eigenvalues.size());
    const double scale = alpha / ((1.0 - alpha) * kLn2 * s.trace_pow);
    std::vector<double> powered(n);
    for (int i = 0; i < n; ++i)
        powered[i] = std::pow(std::max(s.eig.eigenvalues[i], kEigClamp), alpha - 1.0);

    // U diag(powered) U^T, scaled.
    const DenseMatrix& u = s.eig.eigenvectors;
    DenseMatrix ud(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ud(i, j) = u(i, j) * powered[j];
    DenseMatrix g = matmul_nt(ud, u);
    g *= scale;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (g(i, j) + g(j, i));
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

} // namespace

NormalizedGram NormalizedGram::from_matrix(DenseMatrix a) {
    if (!a.is_square())
        throw DimensionError("NormalizedGram: matrix must be square, got " + shape_string(a));
    const int n = a.rows();
    if (n < 1) throw DimensionError("NormalizedGram: empty matrix");
    if (!a.is_finite()) throw NumericError("NormalizedGram: non-finite entries");
    const double tol = 1e-8;
    if (std::abs(a.trace() - 1.0) > 1e-8)
        throw NumericError("NormalizedGram: trace must be 1, got " + std::to_string(a.trace()));
    const double diag = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        if (std::abs(a(i, i) - diag) > tol)
            throw NumericError("NormalizedGram: diagonal entry " + std::to_string(i) +
                               " deviates from 1/N");
        for (int j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > tol)
                throw NumericError("NormalizedGram: matrix not symmetric");
    }
    return NormalizedGram(std::move(a), n);
}

double estimate_sigma(const DenseMatrix& batch, int k_nn, double sigma_floor) {
    const int n = batch.rows();
    if (n < 2) throw ConfigError("estimate_sigma: need at least 2 samples, got " +
                                 std::to_string(n));
    if (k_nn < 1) throw ConfigError("estimate_sigma: k_nn must be >= 1");

    const DenseMatrix d2 = pairwise_sq_dists(batch);
    const int k = std::min(k_nn, n - 1);
    double total = 0.0;
    std::vector<double> dists(n - 1);
    for (int i = 0; i < n; ++i) {
        int idx = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) dists[idx++] = std::sqrt(d2(i, j));
        std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
        double mean_k = 0.0;
        for (int m = 0; m < k; ++m) mean_k += dists[m];
        total += mean_k / k;
    }
    return std::max(total / n, sigma_floor);
}

NormalizedGram normalized_gram(const DenseMatrix& batch, double sigma) {
    if (sigma <= 0.0) throw ConfigError("normalized_gram: sigma must be positive");
    const int n = batch.rows();
    if (n < 1) throw DimensionError("normalized_gram: empty batch");

    const DenseMatrix d2 = pairwise_sq_dists(batch);
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    const double inv_n = 1.0 / n;
    DenseMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = inv_n; // unit kernel diagonal, tr(K) = N
        for (int j = i + 1; j < n; ++j) {
            const double v = std::exp(-d2(i, j) * inv_two_sigma_sq) * inv_n;
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return NormalizedGram::from_matrix(std::move(a));
}

double renyi_entropy(const NormalizedGram& g, double alpha) {
    check_alpha(alpha);
    return entropy_from_matrix(g.matrix(), alpha).entropy;
}

double renyi_entropy_of(const DenseMatrix& sym, double alpha) {
    check_alpha(alpha);
    return entropy_from_matrix(sym, alpha).entropy;
}

namespace {

DenseMatrix renormalized_hadamard(const NormalizedGram& gx, const NormalizedGram& gz) {
    if (gx.size() != gz.size())
        throw DimensionError("joint entropy: Gram sizes disagree (" +
                             std::to_string(gx.size()) + " vs " + std::to_string(gz.size()) + ")");
    DenseMatrix s = hadamard(gx.matrix(), gz.matrix());
    const double t = s.trace();
    if (t <= 0.0) throw NumericError("joint entropy: Hadamard product has non-positive trace");
    s *= 1.0 / t;
    return s;
}

} // namespace

double joint_entropy(const NormalizedGram& gx, const NormalizedGram& gz, double alpha) {
    check_alpha(alpha);
    return entropy_from_matrix(renormalized_hadamard(gx, gz), alpha).entropy;
}

double mutual_information(const NormalizedGram& gx, const NormalizedGram& gz, double alpha) {
    check_alpha(alpha);
    return renyi_entropy(gx, alpha) + renyi_entropy(gz, alpha) - joint_entropy(gx, gz, alpha);
}

DenseMatrix entropy_gradient_wrt_gram(const NormalizedGram& g, double alpha) {
    check_alpha(alpha);
    const SpectrumEntropy s = entropy_from_matrix(g.matrix(), alpha);
    return gradient_from_spectrum(s, alpha);
}

MiValueGrad mi_value_and_gradient(const DenseMatrix& x_batch, const DenseMatrix& z_batch,
                                  const KernelConfig& cfg, std::optional<double> fixed_sigma_x,
                                  std::optional<double> fixed_sigma_z, bool want_gradient) {
    check_alpha(cfg.alpha);
    const int n = z_batch.rows();
    if (x_batch.rows() != n)
        throw DimensionError("mi_value_and_gradient: batches not aligned (" +
                             shape_string(x_batch) + " vs " + shape_string(z_batch) + ")");
    if (n < 2) throw ConfigError("mi_value_and_gradient: need at least 2 samples");

    MiValueGrad out;
    out.sigma_x = fixed_sigma_x ? *fixed_sigma_x : estimate_sigma(x_batch, cfg.k_nn, cfg.sigma_floor);
    out.sigma_z = fixed_sigma_z ? *fixed_sigma_z : estimate_sigma(z_batch, cfg.k_nn, cfg.sigma_floor);

    const NormalizedGram ax = normalized_gram(x_batch, out.sigma_x);
    const NormalizedGram az = normalized_gram(z_batch, out.sigma_z);

    const SpectrumEntropy sx = entropy_from_matrix(ax.matrix(), cfg.alpha);
    const SpectrumEntropy sz = entropy_from_matrix(az.matrix(), cfg.alpha);

    DenseMatrix s = hadamard(ax.matrix(), az.matrix());
    const double t = s.trace();
    if (t <= 0.0) throw NumericError("mi_value_and_gradient: joint trace not positive");
    DenseMatrix b = s * (1.0 / t);
    const SpectrumEntropy sb = entropy_from_matrix(b, cfg.alpha);

    out.h_x = sx.entropy;
    out.h_z = sz.entropy;
    out.h_joint = sb.entropy;
    out.mi = sx.entropy + sz.entropy - sb.entropy;

    if (!want_gradient) return out;

    // dI/dA_z = dH(A_z)/dA_z - (dH(B)/dS) o A_x, with S = A_x o A_z, B = S/t.
    const DenseMatrix gz = gradient_from_spectrum(sz, cfg.alpha);
    DenseMatrix gb = gradient_from_spectrum(sb, cfg.alpha);
    const double inner = frobenius_inner(gb, b); // <G_B, B>
    gb *= 1.0 / t;
    const double diag_term = inner / t;
    for (int i = 0; i < n; ++i) gb(i, i) -= diag_term;

    DenseMatrix d_az = gz - hadamard(gb, ax.matrix());

    // A_z = K_z / N with tr(K_z) = N constant, so dI/dK_z = dI/dA_z / N.
    // Chain through the Gaussian kernel: with E = (dI/dK_z) o K_z,
    // dI/dz_p = -(2/sigma^2) * (rowsum_p(E) z_p - (E z)_p).
    // K_z = N * A_z, so E = d_az o A_z (the two N factors cancel).
    const DenseMatrix e = hadamard(d_az, az.matrix());
    DenseMatrix ez = matmul(e, z_batch);
    const double coeff = -2.0 / (out.sigma_z * out.sigma_z);
    out.d_z = DenseMatrix(n, z_batch.cols());
    for (int p = 0; p < n; ++p) {
        double rowsum = 0.0;
        for (int q = 0; q < n; ++q) rowsum += e(p, q);
        for (int c = 0; c < z_batch.cols(); ++c)
            out.d_z(p, c) = coeff * (rowsum * z_batch(p, c) - ez(p, c));
    }
    if (!out.d_z.is_finite())
        throw NumericError("mi_value_and_gradient: non-finite gradient entries");
    return out;
}

EntropyGradient mi_gradient_wrt_batch(const DenseMatrix& x_batch, const DenseMatrix& z_batch,
                                      const KernelConfig& cfg) {
    return EntropyGradient{mi_value_and_gradient(x_batch, z_batch, cfg).d_z};
}

} // namespace meib
