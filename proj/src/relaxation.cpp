#include <catres/relaxation.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace catres {

ComplexMatrix thermal_dissipator(const ComplexMatrix& X, const CavityParams& cavity) {
    const Eigen::Index d = X.rows();
    const double down = cavity.kappa() * (1.0 + cavity.n_t);
    const double up = cavity.kappa() * cavity.n_t;
    ComplexMatrix out(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        const double An = (n + 1 < d) ? double(n + 1) : 0.0;
        for (Eigen::Index m = 0; m < d; ++m) {
            const double Am = (m + 1 < d) ? double(m + 1) : 0.0;
            cplx v = -0.5 * (down * double(m + n) + up * (Am + An)) * X(m, n);
            if (m + 1 < d && n + 1 < d) v += down * std::sqrt(double(m + 1) * double(n + 1)) * X(m + 1, n + 1);
            if (m > 0 && n > 0) v += up * std::sqrt(double(m) * double(n)) * X(m - 1, n - 1);
            out(m, n) = v;
        }
    }
    return out;
}

ThermalRelaxation::ThermalRelaxation(const HilbertConfig& cfg, const CavityParams& cavity, double duration)
    : dim_(cfg.dim()), duration_(duration), identity_(duration == 0.0) {
    cavity.validate();
    if (!(duration >= 0)) throw std::invalid_argument("relax: duration must be >= 0");
    if (identity_) return;

    const double down = cavity.kappa() * (1.0 + cavity.n_t);
    const double up = cavity.kappa() * cavity.n_t;
    const Eigen::Index d = dim_;
    bands_.resize(static_cast<std::size_t>(d));
    for (Eigen::Index s = 0; s < d; ++s) {
        const Eigen::Index L = d - s;
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(L, L);
        // Position i in band s is the entry (m, n) = (i + s, i).
        for (Eigen::Index i = 0; i < L; ++i) {
            const Eigen::Index m = i + s, n = i;
            const double Am = (m + 1 < d) ? double(m + 1) : 0.0;
            const double An = (n + 1 < d) ? double(n + 1) : 0.0;
            G(i, i) = -0.5 * (down * double(m + n) + up * (Am + An));
            if (i + 1 < L) G(i, i + 1) = down * std::sqrt(double(m + 1) * double(n + 1));
            if (i > 0) G(i, i - 1) = up * std::sqrt(double(m) * double(n));
        }
        bands_[static_cast<std::size_t>(s)] = (G * duration).exp();
    }
}

void ThermalRelaxation::apply_inplace(Eigen::Ref<ComplexMatrix> X) const {
    if (identity_) return;
    const Eigen::Index d = dim_;
    Eigen::VectorXd re(d), im(d), ore(d), oim(d);
    auto band = [&](const Eigen::MatrixXd& P, Eigen::Index L, auto&& at) {
        for (Eigen::Index i = 0; i < L; ++i) {
            const cplx z = at(i);
            re(i) = z.real();
            im(i) = z.imag();
        }
        ore.head(L).noalias() = P * re.head(L);
        oim.head(L).noalias() = P * im.head(L);
        for (Eigen::Index i = 0; i < L; ++i) at(i) = cplx(ore(i), oim(i));
    };
    for (Eigen::Index s = 0; s < d; ++s) {
        const Eigen::MatrixXd& P = bands_[static_cast<std::size_t>(s)];
        const Eigen::Index L = d - s;
        band(P, L, [&](Eigen::Index i) -> cplx& { return X(i + s, i); });
        if (s > 0) band(P, L, [&](Eigen::Index i) -> cplx& { return X(i, i + s); });
    }
}

ComplexMatrix ThermalRelaxation::apply(const ComplexMatrix& X) const {
    if (X.rows() != dim_ || X.cols() != dim_) throw std::invalid_argument("ThermalRelaxation: dimension mismatch");
    ComplexMatrix out = X;
    apply_inplace(out);
    return out;
}

FieldState relax(const FieldState& rho, double duration, const CavityParams& cavity) {
    const HilbertConfig cfg(static_cast<int>(rho.dim() - 1));
    ThermalRelaxation R(cfg, cavity, duration);
    return FieldState(R.apply(rho.matrix()));
}

FieldState thermal_state(const HilbertConfig& cfg, double n_thermal) {
    const Eigen::Index d = cfg.dim();
    ComplexMatrix r = ComplexMatrix::Zero(d, d);
    const double q = n_thermal / (1.0 + n_thermal);
    double total = 0;
    for (Eigen::Index n = 0; n < d; ++n) {
        const double p = std::pow(q, double(n));
        r(n, n) = p;
        total += p;
    }
    r /= total;
    return FieldState(std::move(r));
}

}  // namespace catres
