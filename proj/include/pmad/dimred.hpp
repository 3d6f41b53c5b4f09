#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmad/linalg.hpp"

namespace pmad {

// Per-column z-scoring. Constant columns (std < 1e-12) are centered but
// not divided, and the mask is recorded.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // 1.0 where masked
    std::vector<bool> constant_mask;

    std::size_t dim() const { return mean.size(); }
    std::vector<double> apply(std::span<const double> row) const;
    Matrix apply(const Matrix& rows) const;
    std::vector<double> invert(std::span<const double> row) const;
};

Standardizer standardize_fit(const Matrix& t);

enum class DrVariant { PCA, SPCA, KPCA, AE };
std::string to_string(DrVariant variant);
DrVariant dr_variant_from_string(const std::string& text);

enum class KernelKind { Poly, Rbf, Sigmoid };
std::string to_string(KernelKind kind);
KernelKind kernel_from_string(const std::string& text);

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double coefficient = 0.05;
    int degree = 3;  // poly only
};

// Fitted encode/decode pair. encode maps f -> f_R, decode maps an
// original-space row to its f-length reconstruction.
struct DRModel {
    DrVariant variant = DrVariant::PCA;
    std::size_t f = 0;
    std::size_t f_r = 0;

    // PCA / SPCA
    Matrix loadings;                  // f x f_R
    std::vector<double> eigenvalues;  // PCA spectrum, descending
    bool converged = true;            // SPCA diagnostic

    // KPCA
    Matrix train_rows;  // retained standardized training rows
    KernelSpec kernel;
    std::vector<double> kernel_row_means;
    double kernel_total_mean = 0.0;
    Matrix projection;  // n x f_R, eigenvectors scaled by 1/sqrt(n lambda)
    Matrix ridge_beta;  // f_R x f
    double ridge_gamma = 0.0;
    bool clamped_negative = false;

    // AE
    Matrix w_enc, w_code, w_dec, w_out;
    std::vector<double> b_enc, b_code, b_dec, b_out;
    std::string activation = "relu";

    std::vector<double> encode(std::span<const double> row) const;
    std::vector<double> decode(std::span<const double> row) const;
    // Squared Euclidean norm of the reconstruction residual. The same
    // squared statistic backs both the validation threshold and the test
    // comparison.
    double reconstruction_error(std::span<const double> row) const;
};

// Eigendecomposition of (1/n) T'T, first f_R eigenvectors retained.
DRModel pca_fit(const Matrix& t, std::size_t f_r);

// Alternating elastic-net / SVD scheme on the (1/n-scaled) Gram matrix;
// coordinate descent for the regression step, tolerance 1e-6, at most 500
// iterations; loadings column-normalized.
DRModel spca_fit(const Matrix& t, std::size_t f_r, double ridge, double sparsity);

// Double-centered kernel matrix, top f_R components, ridge-regression
// decoder fitted on the training projections.
DRModel kpca_fit(const Matrix& t, std::size_t f_r, const KernelSpec& kernel, double gamma);

// Symmetric f -> hidden -> f_R -> hidden -> f network trained with
// mini-batch MSE; lr 1e-3, adam beta (0.9, 0.999), rmsprop rho 0.9,
// eps 1e-8; Glorot-uniform init and epoch shuffling from rng_seed.
DRModel ae_fit(const Matrix& t, std::size_t f_r, std::size_t hidden,
               const std::string& optimizer, std::size_t batch, std::size_t epochs,
               const std::string& activation, std::uint64_t rng_seed,
               std::vector<double>* epoch_losses = nullptr);

std::string dr_model_to_json(const DRModel& model);
DRModel dr_model_from_json(const std::string& text);

std::string standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const std::string& text);

}  // namespace pmad
