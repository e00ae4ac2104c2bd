#pragma once

#include <optional>

#include "meib/matrix.hpp"

namespace meib {

/// Hyper-parameters of the matrix-based entropy estimator.
struct KernelConfig {
    double alpha = 1.01;      ///< entropy order; > 0 and != 1
    int k_nn = 10;            ///< neighbor count for the kernel-width heuristic
    double sigma_floor = 1e-6; ///< guards collapsed batches from sigma = 0
};

/**
 * Trace-one PSD kernel matrix A = K / tr(K) over a mini-batch. For a
 * Gaussian kernel every diagonal entry is 1/N. Instances are validated on
 * construction (symmetry, trace, diagonal); positive semi-definiteness is
 * enforced where the spectrum is actually computed.
 */
class NormalizedGram {
  public:
    /// Validates and adopts an already-normalized matrix.
    static NormalizedGram from_matrix(DenseMatrix a);

    const DenseMatrix& matrix() const { return a_; }
    int size() const { return n_; }

  private:
    NormalizedGram(DenseMatrix a, int n) : a_(std::move(a)), n_(n) {}
    DenseMatrix a_;
    int n_ = 0;
};

/// Gradient of an information quantity with respect to a batch, N x d.
struct EntropyGradient {
    DenseMatrix d_input;
};

/**
 * Kernel width heuristic: for each sample take the mean of its k_nn smallest
 * Euclidean distances to the other samples, then average over samples. If
 * fewer than k_nn neighbors exist, all N-1 are used. The result is floored
 * at sigma_floor. Throws ConfigError for N < 2.
 */
double estimate_sigma(const DenseMatrix& batch, int k_nn, double sigma_floor = 1e-6);

/**
 * Gaussian-kernel Gram matrix K(m,n) = exp(-||x_m - x_n||^2 / (2 sigma^2)),
 * normalized to unit trace (A = K/N since the kernel has unit diagonal).
 */
NormalizedGram normalized_gram(const DenseMatrix& batch, double sigma);

/**
 * Matrix-based Renyi alpha-order entropy in bits:
 * H_alpha(A) = 1/(1-alpha) * log2( sum_m max(lambda_m, eps)^alpha ).
 */
double renyi_entropy(const NormalizedGram& g, double alpha);

/// Same functional applied to the spectrum of an arbitrary symmetric matrix
/// (no validation, no renormalization). Used for gradient checks.
double renyi_entropy_of(const DenseMatrix& sym, double alpha);

/// Entropy of the renormalized Hadamard product (A_x o A_z) / tr(A_x o A_z).
double joint_entropy(const NormalizedGram& gx, const NormalizedGram& gz, double alpha);

/// I_alpha(X;Z) = H(A_x) + H(A_z) - H(A_x, A_z), in bits.
double mutual_information(const NormalizedGram& gx, const NormalizedGram& gz, double alpha);

/**
 * dH_alpha/dA = alpha / ((1-alpha) ln2 tr(A^alpha)) * A^(alpha-1), where
 * A^(alpha-1) = U diag(max(lambda,eps)^(alpha-1)) U^T. Output is symmetric.
 */
DenseMatrix entropy_gradient_wrt_gram(const NormalizedGram& g, double alpha);

/// Value-plus-gradient bundle for I(X;Z) computed from raw batches.
struct MiValueGrad {
    double mi = 0.0;      ///< bits
    double h_x = 0.0;
    double h_z = 0.0;
    double h_joint = 0.0;
    double sigma_x = 0.0; ///< kernel widths actually used
    double sigma_z = 0.0;
    DenseMatrix d_z;      ///< dI/dz, N x d_z; empty when gradients not requested
};

/**
 * I(X;Z) between an input batch and its latent batch, with the analytic
 * gradient with respect to the latent entries. Kernel widths come from
 * estimate_sigma unless fixed values are supplied, and are treated as
 * constants: no gradient flows through the width heuristic. x receives no
 * gradient (it is input data).
 */
MiValueGrad mi_value_and_gradient(const DenseMatrix& x_batch, const DenseMatrix& z_batch,
                                  const KernelConfig& cfg,
                                  std::optional<double> fixed_sigma_x = std::nullopt,
                                  std::optional<double> fixed_sigma_z = std::nullopt,
                                  bool want_gradient = true);

/// Just the gradient part of mi_value_and_gradient.
EntropyGradient mi_gradient_wrt_batch(const DenseMatrix& x_batch, const DenseMatrix& z_batch,
                                      const KernelConfig& cfg);

} // namespace meib
