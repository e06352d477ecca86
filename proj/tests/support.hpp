#pragma once

#include <catres/fock.hpp>

#include <random>

namespace catres::testing {

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Random full-rank density matrix G G† / Tr, optionally damped toward low n.
inline ComplexMatrix random_density(Eigen::Index d, std::mt19937_64& rng, double decay = 0.0) {
    std::normal_distribution<double> g;
    ComplexMatrix G(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) G(i, j) = cplx(g(rng), g(rng)) * std::exp(-decay * double(i));
    ComplexMatrix r = G * G.adjoint();
    r /= r.trace();
    return 0.5 * (r + r.adjoint());
}

inline ComplexVector random_pure(Eigen::Index d, std::mt19937_64& rng, double decay = 0.0) {
    std::normal_distribution<double> g;
    ComplexVector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng)) * std::exp(-decay * double(i));
    return v / v.norm();
}

}  // namespace catres::testing
