#ifndef FAIRGDA_MODELS_HPP
#define FAIRGDA_MODELS_HPP

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fairgda/core_math.hpp"
#include "fairgda/dataset.hpp"
#include "fairgda/errors.hpp"

namespace fairgda {

// disparity_only is the learnable-parameter-free regularizer adversary
// used when studying how the normal update fails; it has no u.
enum class AdversaryKind { statistical_parity, false_discovery, disparity_only };

inline const char* to_string(AdversaryKind k) {
    switch (k) {
        case AdversaryKind::statistical_parity: return "statistical_parity";
        case AdversaryKind::false_discovery: return "false_discovery";
        default: return "disparity_only";
    }
}

struct ClassifierParams {
    Vector w;  // dimension n+1, over augmented features
};

// Which adversary the run trains against plus its hyperparameters.
// degree is only meaningful for the statistical-parity adversary.
struct AdversarySpec {
    AdversaryKind kind = AdversaryKind::statistical_parity;
    int degree = 2;    // polynomial expansion degree d
    double mu = 1.0;   // regularizer weight
};

struct AdversaryParams {
    Vector u;  // d+1 entries for SP, exactly 3 for FDR
};

inline AdversaryParams make_adversary_params(const AdversarySpec& spec) {
    std::size_t dim = 3;
    if (spec.kind == AdversaryKind::statistical_parity) {
        dim = static_cast<std::size_t>(spec.degree) + 1;
    } else if (spec.kind == AdversaryKind::disparity_only) {
        dim = 1;  // placeholder, never updated
    }
    return AdversaryParams{Vector(dim, 0.0)};
}

struct LossGradients {
    Vector grad_w_lc;
    Vector grad_w_lf;
    Vector grad_u_lf;
};

namespace detail {

inline Vector raw_scores(const ClassifierParams& cls, const AugmentedDataset& data) {
    Vector s(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        s[i] = dot(cls.w, data.augmented[i]);
    }
    return s;
}

// Group-probability-weighted difference of score sums:
//   sum_{z=0} s_i / P[G_0] - sum_{z=1} s_i / P[G_1].
inline double sp_disparity(const Vector& s, const Dataset& base) {
    const double total = static_cast<double>(base.size());
    const double p0 = static_cast<double>(base.group0.size()) / total;
    const double p1 = static_cast<double>(base.group1.size()) / total;
    double sum0 = 0.0, sum1 = 0.0;
    for (std::size_t i : base.group0) sum0 += s[i];
    for (std::size_t i : base.group1) sum1 += s[i];
    return sum0 / p0 - sum1 / p1;
}

}  // namespace detail

inline Vector classify_soft(const ClassifierParams& cls, const AugmentedDataset& data) {
    if (cls.w.size() != data.dim()) {
        throw dimension_error("classify_soft: weight/feature dimension mismatch");
    }
    Vector p(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        p[i] = sigmoid(dot(cls.w, data.augmented[i]));
    }
    return p;
}

// L_C(w) = log-loss(sigma(w'x), y) + ||w||^2 / 2
inline double classification_loss(const ClassifierParams& cls,
                                  const AugmentedDataset& data) {
    return log_loss(classify_soft(cls, data), data.base.labels) +
           0.5 * squared_norm(cls.w);
}

inline Vector classification_gradient(const ClassifierParams& cls,
                                      const AugmentedDataset& data) {
    const Vector f = classify_soft(cls, data);
    Vector g(cls.w.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        axpy(f[i] - data.base.labels[i], data.augmented[i], g);
    }
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (double& v : g) v *= inv_n;
    axpy(1.0, cls.w, g);
    return g;
}

// Polynomial expansion [1, s, s^2, ..., s^d] of the classifier score.
inline Vector poly_expansion(double s, int degree) {
    Vector f(static_cast<std::size_t>(degree) + 1);
    f[0] = 1.0;
    for (int k = 1; k <= degree; ++k) f[k] = f[k - 1] * s;
    return f;
}

// L_F(u,w) = -log-loss(sigma(u'fhat), z) - (mu/2) * sp_disparity(w'x)^2
inline double sp_adversary_loss(const AdversaryParams& adv, const AdversarySpec& spec,
                                const ClassifierParams& cls,
                                const AugmentedDataset& data) {
    if (adv.u.size() != static_cast<std::size_t>(spec.degree) + 1) {
        throw dimension_error("sp_adversary_loss: u dimension != degree+1");
    }
    const Vector s = detail::raw_scores(cls, data);
    Vector g(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        g[i] = sigmoid(dot(adv.u, poly_expansion(s[i], spec.degree)));
    }
    const double disparity = detail::sp_disparity(s, data.base);
    return -log_loss(g, data.base.sensitive) -
           0.5 * spec.mu * disparity * disparity;
}

// L_F(u,w) = -log-loss(sigma(u'[1 f y]), z)
//            - (mu/2) * (S_{y0,z1} S_{z0} - S_{y0,z0} S_{z1})^2
// where S_T sums w'x over the index set T.
inline double fdr_adversary_loss(const AdversaryParams& adv, const AdversarySpec& spec,
                                 const ClassifierParams& cls,
                                 const AugmentedDataset& data) {
    if (adv.u.size() != 3) {
        throw dimension_error("fdr_adversary_loss: u dimension != 3");
    }
    const Vector s = detail::raw_scores(cls, data);
    Vector g(data.size());
    double s_y0z0 = 0.0, s_y0z1 = 0.0, s_z0 = 0.0, s_z1 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = sigmoid(s[i]);
        g[i] = sigmoid(adv.u[0] + adv.u[1] * f + adv.u[2] * data.base.labels[i]);
        if (data.base.sensitive[i] == 0.0) {
            s_z0 += s[i];
            if (data.base.labels[i] == 0.0) s_y0z0 += s[i];
        } else {
            s_z1 += s[i];
            if (data.base.labels[i] == 0.0) s_y0z1 += s[i];
        }
    }
    const double b = s_y0z1 * s_z0 - s_y0z0 * s_z1;
    return -log_loss(g, data.base.sensitive) - 0.5 * spec.mu * b * b;
}

// Regularizer-only adversary from the normal-update failure analysis:
// L_F(w) = -(1/2) (sum_{z=0} sigma(w'x)/P0 - sum_{z=1} sigma(w'x)/P1)^2.
// It has no learnable u; maximizing it equalizes group prediction means.
inline double sigmoid_disparity_loss(const ClassifierParams& cls,
                                     const AugmentedDataset& data,
                                     double mu = 1.0) {
    const Dataset& base = data.base;
    const double total = static_cast<double>(base.size());
    const double p0 = static_cast<double>(base.group0.size()) / total;
    const double p1 = static_cast<double>(base.group1.size()) / total;
    double c = 0.0;
    for (std::size_t i : base.group0) c += sigmoid(dot(cls.w, data.augmented[i])) / p0;
    for (std::size_t i : base.group1) c -= sigmoid(dot(cls.w, data.augmented[i])) / p1;
    return -0.5 * mu * c * c;
}

inline Vector sigmoid_disparity_gradient(const ClassifierParams& cls,
                                         const AugmentedDataset& data,
                                         double mu = 1.0) {
    const Dataset& base = data.base;
    const double total = static_cast<double>(base.size());
    const double p0 = static_cast<double>(base.group0.size()) / total;
    const double p1 = static_cast<double>(base.group1.size()) / total;
    double c = 0.0;
    Vector grad_c(cls.w.size(), 0.0);
    for (std::size_t i : base.group0) {
        const double f = sigmoid(dot(cls.w, data.augmented[i]));
        c += f / p0;
        axpy(f * (1.0 - f) / p0, data.augmented[i], grad_c);
    }
    for (std::size_t i : base.group1) {
        const double f = sigmoid(dot(cls.w, data.augmented[i]));
        c -= f / p1;
        axpy(-f * (1.0 - f) / p1, data.augmented[i], grad_c);
    }
    return scaled(grad_c, -mu * c);
}

inline double adversary_loss(const AdversaryParams& adv, const AdversarySpec& spec,
                             const ClassifierParams& cls,
                             const AugmentedDataset& data) {
    switch (spec.kind) {
        case AdversaryKind::statistical_parity:
            return sp_adversary_loss(adv, spec, cls, data);
        case AdversaryKind::false_discovery:
            return fdr_adversary_loss(adv, spec, cls, data);
        default:
            return sigmoid_disparity_loss(cls, data, spec.mu);
    }
}

namespace detail {

inline LossGradients sp_gradients(const AdversaryParams& adv, const AdversarySpec& spec,
                                  const ClassifierParams& cls,
                                  const AugmentedDataset& data) {
    const std::size_t n_samples = data.size();
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    const Vector s = raw_scores(cls, data);

    LossGradients out;
    out.grad_w_lc = classification_gradient(cls, data);
    out.grad_w_lf.assign(cls.w.size(), 0.0);
    out.grad_u_lf.assign(adv.u.size(), 0.0);

    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vector fhat = poly_expansion(s[i], spec.degree);
        const double g = sigmoid(dot(adv.u, fhat));
        const double resid = g - data.base.sensitive[i];
        // d(u'fhat)/ds: each power s^k contributes k u_k s^{k-1}.
        double dvds = 0.0;
        for (int k = 1; k <= spec.degree; ++k) {
            dvds += static_cast<double>(k) * adv.u[k] * fhat[k - 1];
        }
        axpy(-inv_n * resid, fhat, out.grad_u_lf);
        axpy(-inv_n * resid * dvds, data.augmented[i], out.grad_w_lf);
    }

    // Regularizer: -(mu/2) C^2 with C linear in w.
    const Dataset& base = data.base;
    const double total = static_cast<double>(base.size());
    const double p0 = static_cast<double>(base.group0.size()) / total;
    const double p1 = static_cast<double>(base.group1.size()) / total;
    const double disparity = sp_disparity(s, base);
    Vector grad_c(cls.w.size(), 0.0);
    for (std::size_t i : base.group0) axpy(1.0 / p0, data.augmented[i], grad_c);
    for (std::size_t i : base.group1) axpy(-1.0 / p1, data.augmented[i], grad_c);
    axpy(-spec.mu * disparity, grad_c, out.grad_w_lf);
    return out;
}

inline LossGradients fdr_gradients(const AdversaryParams& adv, const AdversarySpec& spec,
                                   const ClassifierParams& cls,
                                   const AugmentedDataset& data) {
    const std::size_t n_samples = data.size();
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    const Vector s = raw_scores(cls, data);

    LossGradients out;
    out.grad_w_lc = classification_gradient(cls, data);
    out.grad_w_lf.assign(cls.w.size(), 0.0);
    out.grad_u_lf.assign(3, 0.0);

    double s_y0z0 = 0.0, s_y0z1 = 0.0, s_z0 = 0.0, s_z1 = 0.0;
    Vector x_y0z0(cls.w.size(), 0.0), x_y0z1(cls.w.size(), 0.0);
    Vector x_z0(cls.w.size(), 0.0), x_z1(cls.w.size(), 0.0);

    for (std::size_t i = 0; i < n_samples; ++i) {
        const double f = sigmoid(s[i]);
        const double y = data.base.labels[i];
        const double z = data.base.sensitive[i];
        const double g = sigmoid(adv.u[0] + adv.u[1] * f + adv.u[2] * y);
        const double resid = g - z;
        out.grad_u_lf[0] -= inv_n * resid;
        out.grad_u_lf[1] -= inv_n * resid * f;
        out.grad_u_lf[2] -= inv_n * resid * y;
        // chain through f = sigma(s): df/dw = f (1-f) x
        axpy(-inv_n * resid * adv.u[1] * f * (1.0 - f), data.augmented[i],
             out.grad_w_lf);
        if (z == 0.0) {
            s_z0 += s[i];
            axpy(1.0, data.augmented[i], x_z0);
            if (y == 0.0) {
                s_y0z0 += s[i];
                axpy(1.0, data.augmented[i], x_y0z0);
            }
        } else {
            s_z1 += s[i];
            axpy(1.0, data.augmented[i], x_z1);
            if (y == 0.0) {
                s_y0z1 += s[i];
                axpy(1.0, data.augmented[i], x_y0z1);
            }
        }
    }

    // Regularizer: -(mu/2) B^2, B bilinear in the four score sums.
    const double b = s_y0z1 * s_z0 - s_y0z0 * s_z1;
    Vector grad_b(cls.w.size(), 0.0);
    axpy(s_z0, x_y0z1, grad_b);
    axpy(s_y0z1, x_z0, grad_b);
    axpy(-s_z1, x_y0z0, grad_b);
    axpy(-s_y0z0, x_z1, grad_b);
    axpy(-spec.mu * b, grad_b, out.grad_w_lf);
    return out;
}

}  // namespace detail

// Analytic gradients of L_C and L_F; every path here is checked against
// the central-difference oracle in the test suite.
inline LossGradients gradients(const AdversarySpec& spec, const AdversaryParams& adv,
                               const ClassifierParams& cls,
                               const AugmentedDataset& data) {
    switch (spec.kind) {
        case AdversaryKind::statistical_parity:
            return detail::sp_gradients(adv, spec, cls, data);
        case AdversaryKind::false_discovery:
            return detail::fdr_gradients(adv, spec, cls, data);
        default: {
            LossGradients out;
            out.grad_w_lc = classification_gradient(cls, data);
            out.grad_w_lf = sigmoid_disparity_gradient(cls, data, spec.mu);
            out.grad_u_lf.assign(adv.u.size(), 0.0);
            return out;
        }
    }
}

// Flat text checkpoint: (n, d, kind, mu, w..., u...). %.17g printing
// round-trips every double exactly.
inline void save_checkpoint(const std::string& path, const ClassifierParams& cls,
                            const AdversaryParams& adv, const AdversarySpec& spec) {
    std::ofstream out(path);
    if (!out) throw data_error("save_checkpoint: cannot write '" + path + "'");
    char buf[64];
    out << "n " << cls.w.size() - 1 << "\n";
    out << "d " << spec.degree << "\n";
    out << "adversary " << to_string(spec.kind) << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", spec.mu);
    out << "mu " << buf << "\n";
    out << "w";
    for (double v : cls.w) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << " " << buf;
    }
    out << "\nu";
    for (double v : adv.u) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << " " << buf;
    }
    out << "\n";
}

struct Checkpoint {
    ClassifierParams classifier;
    AdversaryParams adversary;
    AdversarySpec spec;
};

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("load_checkpoint: cannot open '" + path + "'");
    Checkpoint ck;
    std::string key;
    std::size_t n = 0;
    while (in >> key) {
        if (key == "n") {
            in >> n;
        } else if (key == "d") {
            in >> ck.spec.degree;
        } else if (key == "adversary") {
            std::string kind;
            in >> kind;
            if (kind == "statistical_parity") {
                ck.spec.kind = AdversaryKind::statistical_parity;
            } else if (kind == "false_discovery") {
                ck.spec.kind = AdversaryKind::false_discovery;
            } else if (kind == "disparity_only") {
                ck.spec.kind = AdversaryKind::disparity_only;
            } else {
                throw data_error("load_checkpoint: unknown adversary '" + kind + "'");
            }
        } else if (key == "mu") {
            in >> ck.spec.mu;
        } else if (key == "w") {
            ck.classifier.w.assign(n + 1, 0.0);
            for (double& v : ck.classifier.w) in >> v;
        } else if (key == "u") {
            ck.adversary = make_adversary_params(ck.spec);
            for (double& v : ck.adversary.u) in >> v;
        } else {
            throw data_error("load_checkpoint: unknown key '" + key + "'");
        }
        if (!in && !in.eof()) {
            throw data_error("load_checkpoint: parse failure in '" + path + "'");
        }
    }
    if (ck.classifier.w.empty() || ck.adversary.u.empty()) {
        throw data_error("load_checkpoint: incomplete record in '" + path + "'");
    }
    return ck;
}

}  // namespace fairgda

#endif
