#include "pmad/dimred.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "pmad/error.hpp"
#include "pmad/rng.hpp"

namespace pmad {

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    if (row.size() != dim()) throw ContractError("standardizer: row length mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double centered = row[j] - mean[j];
        out[j] = constant_mask[j] ? centered : centered / stddev[j];
    }
    return out;
}

Matrix Standardizer::apply(const Matrix& rows) const {
    Matrix out(rows.rows(), rows.cols());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        auto transformed = apply(rows.row(i));
        for (std::size_t j = 0; j < rows.cols(); ++j) out(i, j) = transformed[j];
    }
    return out;
}

std::vector<double> Standardizer::invert(std::span<const double> row) const {
    if (row.size() != dim()) throw ContractError("standardizer: row length mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = constant_mask[j] ? row[j] + mean[j] : row[j] * stddev[j] + mean[j];
    return out;
}

Standardizer standardize_fit(const Matrix& t) {
    if (t.rows() < 2) throw ContractError("standardize_fit: need at least 2 rows");
    const std::size_t n = t.rows();
    const std::size_t f = t.cols();
    Standardizer s;
    s.mean.assign(f, 0.0);
    s.stddev.assign(f, 1.0);
    s.constant_mask.assign(f, false);
    for (std::size_t j = 0; j < f; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += t(i, j);
        s.mean[j] = acc / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = t(i, j) - s.mean[j];
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        if (sd < 1e-12) {
            s.constant_mask[j] = true;
            s.stddev[j] = 1.0;
        } else {
            s.stddev[j] = sd;
        }
    }
    return s;
}

std::string to_string(DrVariant variant) {
    switch (variant) {
        case DrVariant::PCA: return "PCA";
        case DrVariant::SPCA: return "SPCA";
        case DrVariant::KPCA: return "KPCA";
        case DrVariant::AE: return "AE";
    }
    return "PCA";
}

DrVariant dr_variant_from_string(const std::string& text) {
    if (text == "PCA") return DrVariant::PCA;
    if (text == "SPCA") return DrVariant::SPCA;
    if (text == "KPCA") return DrVariant::KPCA;
    if (text == "AE") return DrVariant::AE;
    throw ArgumentError("unknown dimensionality reduction variant '" + text + "'");
}

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Poly: return "poly";
        case KernelKind::Rbf: return "rbf";
        case KernelKind::Sigmoid: return "sigmoid";
    }
    return "rbf";
}

KernelKind kernel_from_string(const std::string& text) {
    if (text == "poly") return KernelKind::Poly;
    if (text == "rbf") return KernelKind::Rbf;
    if (text == "sigmoid") return KernelKind::Sigmoid;
    throw ArgumentError("unknown kernel '" + text + "'");
}

namespace {

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
    switch (spec.kind) {
        case KernelKind::Poly:
            return std::pow(spec.coefficient * dot(a, b) + 1.0, spec.degree);
        case KernelKind::Rbf:
            return std::exp(-spec.coefficient * squared_distance(a, b));
        case KernelKind::Sigmoid:
            return std::tanh(spec.coefficient * dot(a, b) + 1.0);
    }
    return 0.0;
}

Matrix covariance_1n(const Matrix& t) {
    const double inv_n = 1.0 / static_cast<double>(t.rows());
    Matrix cov = matmul(transpose(t), t);
    for (double& v : cov.data()) v *= inv_n;
    return cov;
}

void check_fit_args(const Matrix& t, std::size_t f_r) {
    if (t.rows() < 2) throw ContractError("dimred fit: need at least 2 rows");
    if (f_r < 1) throw ContractError("dimred fit: f_R must be >= 1");
    if (f_r >= t.cols())
        throw ContractError("dimred fit: f_R (" + std::to_string(f_r) +
                            ") must be smaller than f (" + std::to_string(t.cols()) + ")");
}

void apply_column_sign_convention(Matrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double mag = std::fabs(m(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (m(arg, j) < 0.0)
            for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
    }
}

}  // namespace

DRModel pca_fit(const Matrix& t, std::size_t f_r) {
    check_fit_args(t, f_r);
    SymmetricEigen eig = eigen_symmetric(covariance_1n(t));
    DRModel model;
    model.variant = DrVariant::PCA;
    model.f = t.cols();
    model.f_r = f_r;
    model.eigenvalues = eig.values;
    model.loadings = Matrix(t.cols(), f_r);
    for (std::size_t j = 0; j < f_r; ++j)
        for (std::size_t i = 0; i < t.cols(); ++i) model.loadings(i, j) = eig.vectors(i, j);
    return model;
}

namespace {

double soft_threshold(double x, double threshold) {
    if (x > threshold) return x - threshold;
    if (x < -threshold) return x + threshold;
    return 0.0;
}

// Elastic net on the Gram matrix: minimizes
//   b' (G + ridge I) b - 2 b' G a + sparsity ||b||_1
// by cyclic coordinate descent.
std::vector<double> elastic_net_gram(const Matrix& gram, std::span<const double> target,
                                     double ridge, double sparsity,
                                     std::vector<double> warm_start) {
    const std::size_t f = gram.rows();
    std::vector<double> beta = std::move(warm_start);
    if (beta.size() != f) beta.assign(f, 0.0);
    std::vector<double> linear = matvec(gram, target);  // G a
    std::vector<double> gb = matvec(gram, beta);        // G b, kept in sync

    const double threshold = sparsity / 2.0;
    for (int iter = 0; iter < 1000; ++iter) {
        double max_delta = 0.0;
        for (std::size_t l = 0; l < f; ++l) {
            const double residual = linear[l] - (gb[l] - gram(l, l) * beta[l]);
            const double updated = soft_threshold(residual, threshold) / (gram(l, l) + ridge);
            const double delta = updated - beta[l];
            if (delta != 0.0) {
                beta[l] = updated;
                for (std::size_t m = 0; m < f; ++m) gb[m] += gram(m, l) * delta;
                max_delta = std::max(max_delta, std::fabs(delta));
            }
        }
        if (max_delta < 1e-9) break;
    }
    return beta;
}

}  // namespace

DRModel spca_fit(const Matrix& t, std::size_t f_r, double ridge, double sparsity) {
    check_fit_args(t, f_r);
    if (ridge < 0.0) throw ContractError("spca_fit: ridge must be >= 0");
    if (sparsity < 0.0) throw ContractError("spca_fit: sparsity must be >= 0");

    const std::size_t f = t.cols();
    Matrix gram = covariance_1n(t);
    SymmetricEigen eig = eigen_symmetric(gram);

    Matrix a(f, f_r);
    for (std::size_t j = 0; j < f_r; ++j)
        for (std::size_t i = 0; i < f; ++i) a(i, j) = eig.vectors(i, j);
    Matrix b = a;

    bool converged = false;
    for (int iter = 0; iter < 500 && !converged; ++iter) {
        Matrix b_prev = b;
        for (std::size_t j = 0; j < f_r; ++j) {
            std::vector<double> alpha(f), warm(f);
            for (std::size_t i = 0; i < f; ++i) {
                alpha[i] = a(i, j);
                warm[i] = b(i, j);
            }
            auto beta = elastic_net_gram(gram, alpha, ridge, sparsity, std::move(warm));
            for (std::size_t i = 0; i < f; ++i) b(i, j) = beta[i];
        }
        // orthogonalization step
        Matrix m = matmul(gram, b);
        ThinSvd svd = svd_thin(m);
        Matrix candidate = matmul(svd.u, transpose(svd.v));
        for (std::size_t j = 0; j < f_r; ++j) {
            if (svd.sigma[j] > 1e-12) {
                for (std::size_t i = 0; i < f; ++i) a(i, j) = candidate(i, j);
            }
            // a zero singular direction keeps its previous a column
        }
        double max_delta = 0.0;
        for (std::size_t i = 0; i < b.data().size(); ++i)
            max_delta = std::max(max_delta, std::fabs(b.data()[i] - b_prev.data()[i]));
        converged = max_delta < 1e-6;
    }

    for (std::size_t j = 0; j < f_r; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < f; ++i) norm += b(i, j) * b(i, j);
        norm = std::sqrt(norm);
        if (norm > 1e-12)
            for (std::size_t i = 0; i < f; ++i) b(i, j) /= norm;
        else
            for (std::size_t i = 0; i < f; ++i) b(i, j) = 0.0;
    }
    apply_column_sign_convention(b);

    DRModel model;
    model.variant = DrVariant::SPCA;
    model.f = f;
    model.f_r = f_r;
    model.loadings = std::move(b);
    model.converged = converged;
    return model;
}

DRModel kpca_fit(const Matrix& t, std::size_t f_r, const KernelSpec& kernel, double gamma) {
    check_fit_args(t, f_r);
    if (gamma <= 0.0) throw ContractError("kpca_fit: gamma must be positive");
    const std::size_t n = t.rows();
    if (f_r > n) throw ContractError("kpca_fit: f_R exceeds the number of training rows");

    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel_eval(kernel, t.row(i), t.row(j));
            k(i, j) = v;
            k(j, i) = v;
        }

    std::vector<double> row_means(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += k(i, j);
        row_means[i] = acc / static_cast<double>(n);
        total += acc;
    }
    const double total_mean = total / static_cast<double>(n * n);

    Matrix centered(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            centered(i, j) = k(i, j) - row_means[i] - row_means[j] + total_mean;

    SymmetricEigen eig = eigen_symmetric(centered);

    DRModel model;
    model.variant = DrVariant::KPCA;
    model.f = t.cols();
    model.f_r = f_r;
    model.kernel = kernel;
    model.ridge_gamma = gamma;
    model.train_rows = t;
    model.kernel_row_means = row_means;
    model.kernel_total_mean = total_mean;
    model.projection = Matrix(n, f_r);

    Matrix z(n, f_r);  // training encodings
    for (std::size_t j = 0; j < f_r; ++j) {
        const double value = eig.values[j];
        if (value < -1e-9) model.clamped_negative = true;
        if (value <= 1e-12) continue;  // clamped to zero: column stays 0
        const double scale = 1.0 / std::sqrt(value);
        for (std::size_t i = 0; i < n; ++i) {
            model.projection(i, j) = eig.vectors(i, j) * scale;
            z(i, j) = eig.vectors(i, j) * std::sqrt(value);
        }
    }

    Matrix ztz = matmul(transpose(z), z);
    Matrix ztt = matmul(transpose(z), t);
    model.ridge_beta = solve_spd_regularized(ztz, gamma, ztt);
    return model;
}

namespace {

double activate(const std::string& activation, double x) {
    if (activation == "relu") return x > 0.0 ? x : 0.0;
    if (activation == "tanh") return std::tanh(x);
    throw ArgumentError("unknown activation '" + activation + "'");
}

double activate_grad(const std::string& activation, double pre) {
    if (activation == "relu") return pre > 0.0 ? 1.0 : 0.0;
    if (activation == "tanh") {
        const double t = std::tanh(pre);
        return 1.0 - t * t;
    }
    throw ArgumentError("unknown activation '" + activation + "'");
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = (2.0 * rng.next_unit() - 1.0) * limit;
    return m;
}

enum class Optimizer { Sgd, RmsProp, Adam };

Optimizer optimizer_from_string(const std::string& text) {
    if (text == "sgd" || text == "SGD") return Optimizer::Sgd;
    if (text == "rmsprop") return Optimizer::RmsProp;
    if (text == "adam") return Optimizer::Adam;
    throw ArgumentError("unknown optimizer '" + text + "'");
}

struct ParamState {
    std::vector<double>* value;
    std::vector<double> grad;
    std::vector<double> m;  // first moment / rms accumulator
    std::vector<double> v;  // second moment (adam)
};

}  // namespace

DRModel ae_fit(const Matrix& t, std::size_t f_r, std::size_t hidden,
               const std::string& optimizer_name, std::size_t batch, std::size_t epochs,
               const std::string& activation, std::uint64_t rng_seed,
               std::vector<double>* epoch_losses) {
    check_fit_args(t, f_r);
    if (hidden < f_r) throw ContractError("ae_fit: hidden width must be >= f_R");
    if (batch < 1) throw ContractError("ae_fit: batch must be >= 1");
    if (epochs < 1) throw ContractError("ae_fit: epochs must be >= 1");
    const Optimizer optimizer = optimizer_from_string(optimizer_name);
    activate(activation, 0.0);  // validates the name

    const std::size_t n = t.rows();
    const std::size_t f = t.cols();

    DRModel model;
    model.variant = DrVariant::AE;
    model.f = f;
    model.f_r = f_r;
    model.activation = activation;

    Rng rng(rng_seed);
    model.w_enc = glorot_uniform(hidden, f, rng);
    model.w_code = glorot_uniform(f_r, hidden, rng);
    model.w_dec = glorot_uniform(hidden, f_r, rng);
    model.w_out = glorot_uniform(f, hidden, rng);
    model.b_enc.assign(hidden, 0.0);
    model.b_code.assign(f_r, 0.0);
    model.b_dec.assign(hidden, 0.0);
    model.b_out.assign(f, 0.0);

    std::vector<ParamState> params;
    auto track = [&params](std::vector<double>& value) {
        params.push_back({&value, std::vector<double>(value.size(), 0.0),
                          std::vector<double>(value.size(), 0.0),
                          std::vector<double>(value.size(), 0.0)});
    };
    track(model.w_enc.data());
    track(model.b_enc);
    track(model.w_code.data());
    track(model.b_code);
    track(model.w_dec.data());
    track(model.b_dec);
    track(model.w_out.data());
    track(model.b_out);

    constexpr double kLearningRate = 1e-3;
    constexpr double kAdamBeta1 = 0.9;
    constexpr double kAdamBeta2 = 0.999;
    constexpr double kRmsRho = 0.9;
    constexpr double kEps = 1e-8;
    long long adam_step = 0;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::vector<double> a1(hidden), h1(hidden), z(f_r), a2(hidden), h2(hidden), y(f);
    std::vector<double> dy(f), da2(hidden), dz(f_r), da1(hidden);

    if (epoch_losses) epoch_losses->clear();
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t end = std::min(begin + batch, n);
            const double scale = 1.0 / static_cast<double>((end - begin) * f);
            for (auto& p : params) std::fill(p.grad.begin(), p.grad.end(), 0.0);

            double batch_loss = 0.0;
            for (std::size_t s = begin; s < end; ++s) {
                auto x = t.row(order[s]);
                // forward
                for (std::size_t i = 0; i < hidden; ++i) {
                    double acc = model.b_enc[i];
                    for (std::size_t j = 0; j < f; ++j) acc += model.w_enc(i, j) * x[j];
                    a1[i] = acc;
                    h1[i] = activate(activation, acc);
                }
                for (std::size_t i = 0; i < f_r; ++i) {
                    double acc = model.b_code[i];
                    for (std::size_t j = 0; j < hidden; ++j) acc += model.w_code(i, j) * h1[j];
                    z[i] = acc;
                }
                for (std::size_t i = 0; i < hidden; ++i) {
                    double acc = model.b_dec[i];
                    for (std::size_t j = 0; j < f_r; ++j) acc += model.w_dec(i, j) * z[j];
                    a2[i] = acc;
                    h2[i] = activate(activation, acc);
                }
                for (std::size_t i = 0; i < f; ++i) {
                    double acc = model.b_out[i];
                    for (std::size_t j = 0; j < hidden; ++j) acc += model.w_out(i, j) * h2[j];
                    y[i] = acc;
                }
                // backward
                for (std::size_t i = 0; i < f; ++i) {
                    const double diff = y[i] - x[i];
                    batch_loss += diff * diff;
                    dy[i] = 2.0 * diff * scale;
                }
                auto& g_wout = params[6].grad;
                auto& g_bout = params[7].grad;
                for (std::size_t i = 0; i < f; ++i) {
                    for (std::size_t j = 0; j < hidden; ++j)
                        g_wout[i * hidden + j] += dy[i] * h2[j];
                    g_bout[i] += dy[i];
                }
                for (std::size_t j = 0; j < hidden; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < f; ++i) acc += model.w_out(i, j) * dy[i];
                    da2[j] = acc * activate_grad(activation, a2[j]);
                }
                auto& g_wdec = params[4].grad;
                auto& g_bdec = params[5].grad;
                for (std::size_t i = 0; i < hidden; ++i) {
                    for (std::size_t j = 0; j < f_r; ++j) g_wdec[i * f_r + j] += da2[i] * z[j];
                    g_bdec[i] += da2[i];
                }
                for (std::size_t j = 0; j < f_r; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < hidden; ++i) acc += model.w_dec(i, j) * da2[i];
                    dz[j] = acc;
                }
                auto& g_wcode = params[2].grad;
                auto& g_bcode = params[3].grad;
                for (std::size_t i = 0; i < f_r; ++i) {
                    for (std::size_t j = 0; j < hidden; ++j)
                        g_wcode[i * hidden + j] += dz[i] * h1[j];
                    g_bcode[i] += dz[i];
                }
                for (std::size_t j = 0; j < hidden; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < f_r; ++i) acc += model.w_code(i, j) * dz[i];
                    da1[j] = acc * activate_grad(activation, a1[j]);
                }
                auto& g_wenc = params[0].grad;
                auto& g_benc = params[1].grad;
                for (std::size_t i = 0; i < hidden; ++i) {
                    for (std::size_t j = 0; j < f; ++j) g_wenc[i * f + j] += da1[i] * x[j];
                    g_benc[i] += da1[i];
                }
            }
            epoch_loss += batch_loss;
            if (!std::isfinite(batch_loss))
                throw NumericError("ae_fit: non-finite loss at epoch " + std::to_string(epoch));

            ++adam_step;
            for (auto& p : params) {
                auto& value = *p.value;
                for (std::size_t i = 0; i < value.size(); ++i) {
                    const double g = p.grad[i];
                    switch (optimizer) {
                        case Optimizer::Sgd:
                            value[i] -= kLearningRate * g;
                            break;
                        case Optimizer::RmsProp:
                            p.m[i] = kRmsRho * p.m[i] + (1.0 - kRmsRho) * g * g;
                            value[i] -= kLearningRate * g / (std::sqrt(p.m[i]) + kEps);
                            break;
                        case Optimizer::Adam: {
                            p.m[i] = kAdamBeta1 * p.m[i] + (1.0 - kAdamBeta1) * g;
                            p.v[i] = kAdamBeta2 * p.v[i] + (1.0 - kAdamBeta2) * g * g;
                            const double mhat =
                                p.m[i] / (1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_step)));
                            const double vhat =
                                p.v[i] / (1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_step)));
                            value[i] -= kLearningRate * mhat / (std::sqrt(vhat) + kEps);
                            break;
                        }
                    }
                }
            }
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(n * f));
    }
    return model;
}

std::vector<double> DRModel::encode(std::span<const double> row) const {
    if (row.size() != f) throw ContractError("DRModel::encode: row length mismatch");
    switch (variant) {
        case DrVariant::PCA:
        case DrVariant::SPCA:
            return vecmat(row, loadings);
        case DrVariant::KPCA: {
            const std::size_t n = train_rows.rows();
            std::vector<double> kappa(n);
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                kappa[i] = kernel_eval(kernel, row, train_rows.row(i));
                mean += kappa[i];
            }
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                kappa[i] = kappa[i] - mean - kernel_row_means[i] + kernel_total_mean;
            return vecmat(kappa, projection);
        }
        case DrVariant::AE: {
            const std::size_t hidden = w_enc.rows();
            std::vector<double> h1(hidden), z(f_r);
            for (std::size_t i = 0; i < hidden; ++i) {
                double acc = b_enc[i];
                for (std::size_t j = 0; j < f; ++j) acc += w_enc(i, j) * row[j];
                h1[i] = activate(activation, acc);
            }
            for (std::size_t i = 0; i < f_r; ++i) {
                double acc = b_code[i];
                for (std::size_t j = 0; j < hidden; ++j) acc += w_code(i, j) * h1[j];
                z[i] = acc;
            }
            return z;
        }
    }
    throw ContractError("DRModel::encode: unknown variant");
}

std::vector<double> DRModel::decode(std::span<const double> row) const {
    std::vector<double> z = encode(row);
    switch (variant) {
        case DrVariant::PCA:
        case DrVariant::SPCA:
            return matvec(loadings, z);
        case DrVariant::KPCA:
            return vecmat(z, ridge_beta);
        case DrVariant::AE: {
            const std::size_t hidden = w_dec.rows();
            std::vector<double> h2(hidden), y(f);
            for (std::size_t i = 0; i < hidden; ++i) {
                double acc = b_dec[i];
                for (std::size_t j = 0; j < f_r; ++j) acc += w_dec(i, j) * z[j];
                h2[i] = activate(activation, acc);
            }
            for (std::size_t i = 0; i < f; ++i) {
                double acc = b_out[i];
                for (std::size_t j = 0; j < hidden; ++j) acc += w_out(i, j) * h2[j];
                y[i] = acc;
            }
            return y;
        }
    }
    throw ContractError("DRModel::decode: unknown variant");
}

double DRModel::reconstruction_error(std::span<const double> row) const {
    std::vector<double> reconstructed = decode(row);
    return squared_distance(row, reconstructed);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols())
        throw FormatError("model json: matrix payload size mismatch");
    m.data() = std::move(data);
    return m;
}

}  // namespace

std::string dr_model_to_json(const DRModel& model) {
    nlohmann::json j;
    j["variant"] = to_string(model.variant);
    j["f"] = model.f;
    j["f_r"] = model.f_r;
    switch (model.variant) {
        case DrVariant::PCA:
            j["loadings"] = matrix_to_json(model.loadings);
            j["eigenvalues"] = model.eigenvalues;
            break;
        case DrVariant::SPCA:
            j["loadings"] = matrix_to_json(model.loadings);
            j["converged"] = model.converged;
            break;
        case DrVariant::KPCA:
            j["train_rows"] = matrix_to_json(model.train_rows);
            j["kernel"] = {{"kind", to_string(model.kernel.kind)},
                           {"coefficient", model.kernel.coefficient},
                           {"degree", model.kernel.degree}};
            j["kernel_row_means"] = model.kernel_row_means;
            j["kernel_total_mean"] = model.kernel_total_mean;
            j["projection"] = matrix_to_json(model.projection);
            j["ridge_beta"] = matrix_to_json(model.ridge_beta);
            j["ridge_gamma"] = model.ridge_gamma;
            j["clamped_negative"] = model.clamped_negative;
            break;
        case DrVariant::AE:
            j["w_enc"] = matrix_to_json(model.w_enc);
            j["w_code"] = matrix_to_json(model.w_code);
            j["w_dec"] = matrix_to_json(model.w_dec);
            j["w_out"] = matrix_to_json(model.w_out);
            j["b_enc"] = model.b_enc;
            j["b_code"] = model.b_code;
            j["b_dec"] = model.b_dec;
            j["b_out"] = model.b_out;
            j["activation"] = model.activation;
            break;
    }
    return j.dump(2);
}

DRModel dr_model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model json: ") + e.what());
    }
    DRModel model;
    try {
        model.variant = dr_variant_from_string(j.at("variant").get<std::string>());
        model.f = j.at("f").get<std::size_t>();
        model.f_r = j.at("f_r").get<std::size_t>();
        switch (model.variant) {
            case DrVariant::PCA:
                model.loadings = matrix_from_json(j.at("loadings"));
                model.eigenvalues = j.value("eigenvalues", std::vector<double>{});
                if (model.loadings.rows() != model.f || model.loadings.cols() != model.f_r)
                    throw FormatError("model json: loading matrix dimensions inconsistent");
                break;
            case DrVariant::SPCA:
                model.loadings = matrix_from_json(j.at("loadings"));
                model.converged = j.value("converged", true);
                if (model.loadings.rows() != model.f || model.loadings.cols() != model.f_r)
                    throw FormatError("model json: loading matrix dimensions inconsistent");
                break;
            case DrVariant::KPCA: {
                model.train_rows = matrix_from_json(j.at("train_rows"));
                const auto& kernel = j.at("kernel");
                model.kernel.kind = kernel_from_string(kernel.at("kind").get<std::string>());
                model.kernel.coefficient = kernel.at("coefficient").get<double>();
                model.kernel.degree = kernel.at("degree").get<int>();
                model.kernel_row_means = j.at("kernel_row_means").get<std::vector<double>>();
                model.kernel_total_mean = j.at("kernel_total_mean").get<double>();
                model.projection = matrix_from_json(j.at("projection"));
                model.ridge_beta = matrix_from_json(j.at("ridge_beta"));
                model.ridge_gamma = j.at("ridge_gamma").get<double>();
                model.clamped_negative = j.value("clamped_negative", false);
                const std::size_t n = model.train_rows.rows();
                if (model.train_rows.cols() != model.f || model.kernel_row_means.size() != n ||
                    model.projection.rows() != n || model.projection.cols() != model.f_r ||
                    model.ridge_beta.rows() != model.f_r || model.ridge_beta.cols() != model.f)
                    throw FormatError("model json: kernel model dimensions inconsistent");
                break;
            }
            case DrVariant::AE: {
                model.w_enc = matrix_from_json(j.at("w_enc"));
                model.w_code = matrix_from_json(j.at("w_code"));
                model.w_dec = matrix_from_json(j.at("w_dec"));
                model.w_out = matrix_from_json(j.at("w_out"));
                model.b_enc = j.at("b_enc").get<std::vector<double>>();
                model.b_code = j.at("b_code").get<std::vector<double>>();
                model.b_dec = j.at("b_dec").get<std::vector<double>>();
                model.b_out = j.at("b_out").get<std::vector<double>>();
                model.activation = j.at("activation").get<std::string>();
                const std::size_t hidden = model.w_enc.rows();
                if (model.w_enc.cols() != model.f || model.w_code.rows() != model.f_r ||
                    model.w_code.cols() != hidden || model.w_dec.rows() != hidden ||
                    model.w_dec.cols() != model.f_r || model.w_out.rows() != model.f ||
                    model.w_out.cols() != hidden || model.b_enc.size() != hidden ||
                    model.b_code.size() != model.f_r || model.b_dec.size() != hidden ||
                    model.b_out.size() != model.f)
                    throw FormatError("model json: autoencoder dimensions inconsistent");
                break;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model json: ") + e.what());
    }
    return model;
}

std::string standardizer_to_json(const Standardizer& s) {
    nlohmann::json j;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    nlohmann::json mask = nlohmann::json::array();
    for (bool b : s.constant_mask) mask.push_back(b);
    j["constant_mask"] = std::move(mask);
    return j.dump(2);
}

Standardizer standardizer_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("standardizer json: ") + e.what());
    }
    Standardizer s;
    try {
        s.mean = j.at("mean").get<std::vector<double>>();
        s.stddev = j.at("stddev").get<std::vector<double>>();
        for (const auto& b : j.at("constant_mask")) s.constant_mask.push_back(b.get<bool>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("standardizer json: ") + e.what());
    }
    if (s.stddev.size() != s.mean.size() || s.constant_mask.size() != s.mean.size())
        throw FormatError("standardizer json: field lengths inconsistent");
    return s;
}

}  // namespace pmad
