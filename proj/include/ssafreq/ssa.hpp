#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ssafreq/errors.hpp"

namespace ssafreq::ssa {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Embedding dimension for the trajectory matrix.
struct EmbeddingConfig {
    Eigen::Index n_c = 5;

    void validate(Eigen::Index series_length) const {
        if (n_c < 2) throw InvalidInputError("embedding dimension must be at least 2");
        if (series_length <= 2 * n_c)
            throw InvalidInputError("series too short for embedding (need L > 2 n_c)");
    }
};

// Trajectory matrix: n_c delayed copies of the series, each restricted to
// length L - n_c. Row i (0-based) is X shifted by i.
template <typename Derived>
Matrix<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& x, Eigen::Index n_c) {
    const Eigen::Index L = x.size();
    if (n_c < 2) throw InvalidInputError("embedding dimension must be at least 2");
    if (L <= 2 * n_c) throw InvalidInputError("series too short for embedding (need L > 2 n_c)");
    Matrix<typename Derived::Scalar> Y(n_c, L - n_c);
    for (Eigen::Index i = 0; i < n_c; ++i)
        for (Eigen::Index j = 0; j < L - n_c; ++j) Y(i, j) = x[i + j];
    return Y;
}

// Lag-correlation matrix C = Y Y^T / L. The denominator is the full series
// length, not the trajectory column count.
template <typename Derived>
Matrix<typename Derived::Scalar> correlation(const Eigen::MatrixBase<Derived>& Y, Eigen::Index L) {
    using S = typename Derived::Scalar;
    if (L <= 0) throw InvalidInputError("series length must be positive");
    Matrix<S> C = (Y * Y.transpose()) / static_cast<S>(L);
    return C;
}

template <typename Scalar>
struct EigenPairs {
    Vector<Scalar> values;  // ordered by decreasing |lambda|
    Matrix<Scalar> vectors; // column i is the eigenvector of values[i]
};

// Symmetric eigendecomposition ordered by decreasing |lambda|, ties broken by
// original (ascending-eigenvalue) position, each eigenvector's
// largest-magnitude entry made positive so component identities are stable
// across runs and platforms.
template <typename Derived>
EigenPairs<typename Derived::Scalar> eigendecompose(const Eigen::MatrixBase<Derived>& C) {
    using S = typename Derived::Scalar;
    const Eigen::Index n = C.rows();
    if (C.cols() != n) throw InvalidInputError("matrix must be square");
    const S scale = C.cwiseAbs().maxCoeff();
    if ((C - C.transpose()).cwiseAbs().maxCoeff() > S(1e-10) * std::max(scale, S(1)))
        throw InvalidInputError("matrix must be symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix<S>> solver(C);
    if (solver.info() != Eigen::Success) throw EstimationError("eigendecomposition failed to converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& raw = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&raw](Eigen::Index a, Eigen::Index b) {
        return std::abs(raw[a]) > std::abs(raw[b]);
    });

    EigenPairs<S> out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = raw[order[static_cast<std::size_t>(k)]];
        Vector<S> vec = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
        Eigen::Index imax = 0;
        vec.cwiseAbs().maxCoeff(&imax);
        if (vec[imax] < S(0)) vec = -vec;
        out.vectors.col(k) = vec;
    }
    return out;
}

// Principal components A_i(t) = sum_j X(t+j) rho_i(j), one row per component,
// defined wherever the length-n_c window fits (L - n_c + 1 positions).
template <typename DerivedX, typename DerivedV>
Matrix<typename DerivedX::Scalar> principal_components(const Eigen::MatrixBase<DerivedX>& x,
                                                       const Eigen::MatrixBase<DerivedV>& vectors) {
    using S = typename DerivedX::Scalar;
    const Eigen::Index L = x.size();
    const Eigen::Index n_c = vectors.rows();
    if (vectors.cols() != n_c) throw InvalidInputError("eigenvector matrix must be square");
    const Eigen::Index T = L - n_c + 1;
    if (T <= 0) throw InvalidInputError("series too short for the embedding dimension");
    Matrix<S> A(n_c, T);
    for (Eigen::Index i = 0; i < n_c; ++i)
        for (Eigen::Index t = 0; t < T; ++t) {
            S acc = S(0);
            for (Eigen::Index j = 0; j < n_c; ++j) acc += x[t + j] * vectors(j, i);
            A(i, t) = acc;
        }
    return A;
}

// Reconstructed components by anti-diagonal averaging of A_i against rho_i,
// with the shortened averaging windows at both ends of the series. Summing
// the rows over i returns the original series exactly.
template <typename DerivedA, typename DerivedV>
Matrix<typename DerivedA::Scalar> reconstruct(const Eigen::MatrixBase<DerivedA>& A,
                                              const Eigen::MatrixBase<DerivedV>& vectors) {
    using S = typename DerivedA::Scalar;
    const Eigen::Index n_c = vectors.rows();
    const Eigen::Index T = A.cols();
    const Eigen::Index L = T + n_c - 1;
    if (A.rows() != n_c) throw InvalidInputError("component count mismatch");
    Matrix<S> R(n_c, L);
    for (Eigen::Index i = 0; i < n_c; ++i) {
        for (Eigen::Index t = 0; t < L; ++t) {
            Eigen::Index j_lo, j_hi, m;
            if (t <= n_c - 2) { // leading edge: partial window
                j_lo = 0;
                j_hi = t;
                m = t + 1;
            } else if (t <= L - n_c) { // interior: full window
                j_lo = 0;
                j_hi = n_c - 1;
                m = n_c;
            } else { // trailing edge: partial window
                j_lo = t - (L - n_c);
                j_hi = n_c - 1;
                m = L - t;
            }
            S acc = S(0);
            for (Eigen::Index j = j_lo; j <= j_hi; ++j) acc += A(i, t - j) * vectors(j, i);
            R(i, t) = acc / static_cast<S>(m);
        }
    }
    return R;
}

// Full decomposition of one series at a chosen embedding dimension.
struct SsaDecomposition {
    Eigen::Index n_c = 0;
    Eigen::VectorXd eigenvalues;   // decreasing |lambda|
    Eigen::MatrixXd eigenvectors;  // column i = rho_i
    Eigen::MatrixXd principal;     // row i = A_i, length L - n_c + 1
    Eigen::MatrixXd reconstructed; // row i = R_i, length L
};

inline SsaDecomposition decompose(const Eigen::VectorXd& x, Eigen::Index n_c) {
    SsaDecomposition d;
    d.n_c = n_c;
    const Eigen::MatrixXd Y = embed(x, n_c);
    const Eigen::MatrixXd C = correlation(Y, x.size());
    EigenPairs<double> pairs = eigendecompose(C);
    d.eigenvalues = std::move(pairs.values);
    d.eigenvectors = std::move(pairs.vectors);
    d.principal = principal_components(x, d.eigenvectors);
    d.reconstructed = reconstruct(d.principal, d.eigenvectors);
    return d;
}

inline SsaDecomposition decompose(const Eigen::VectorXd& x, const EmbeddingConfig& cfg = {}) {
    return decompose(x, cfg.n_c);
}

template <typename Derived>
Matrix<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& x, const EmbeddingConfig& cfg) {
    return embed(x, cfg.n_c);
}

} // namespace ssafreq::ssa
