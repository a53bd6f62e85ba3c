#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace tgpipe {

class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Reduction {
    std::vector<double> mean;               // dim
    std::vector<std::vector<double>> basis; // reduced_dim x dim, orthonormal rows
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline std::vector<std::vector<double>> from_eigen(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[static_cast<size_t>(i)].resize(static_cast<size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = m(i, j);
    }
    return rows;
}

}  // namespace detail

// PCA: project the mean-centered data onto its top reduced_dim principal
// components. Component signs are fixed (largest-magnitude coordinate made
// positive) so results are reproducible.
inline std::pair<std::vector<std::vector<double>>, Reduction> reduce_dims(
    const std::vector<std::vector<double>>& data, int reduced_dim) {
    const size_t n = data.size();
    if (n < static_cast<size_t>(reduced_dim))
        throw DegenerateInput("reduce_dims: fewer rows than target dimensions");
    const Eigen::Index dim = static_cast<Eigen::Index>(data[0].size());
    if (reduced_dim > dim)
        throw DegenerateInput("reduce_dims: reduced_dim exceeds input dim");

    Eigen::MatrixXd x = detail::to_eigen(data);
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n > 1 ? n - 1 : 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw DegenerateInput("reduce_dims: eigendecomposition failed");

    // eigenvalues come back ascending; take the top reduced_dim columns
    Eigen::MatrixXd basis(reduced_dim, dim);
    for (int k = 0; k < reduced_dim; ++k) {
        Eigen::VectorXd v = solver.eigenvectors().col(dim - 1 - k);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0) v = -v;
        basis.row(k) = v.transpose();
    }

    Eigen::MatrixXd projected = x * basis.transpose();
    Reduction red;
    red.mean.assign(mean.data(), mean.data() + mean.size());
    red.basis = detail::from_eigen(basis);
    return {detail::from_eigen(projected), std::move(red)};
}

inline std::vector<double> project(const Reduction& red, const std::vector<double>& row) {
    std::vector<double> out(red.basis.size(), 0.0);
    for (size_t k = 0; k < red.basis.size(); ++k) {
        double acc = 0.0;
        for (size_t j = 0; j < red.mean.size(); ++j)
            acc += red.basis[k][j] * (row[j] - red.mean[j]);
        out[k] = acc;
    }
    return out;
}

}  // namespace tgpipe
