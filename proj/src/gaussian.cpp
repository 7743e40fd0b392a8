// Copyright 2026 The qdmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdm/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdm {

namespace {

void check_mode(int n_modes, int mode, const char* what) {
    if (mode < 0 || mode >= n_modes) {
        throw std::invalid_argument(std::string(what) + ": mode index " +
                                    std::to_string(mode) + " out of range for " +
                                    std::to_string(n_modes) + " modes");
    }
}

// 2x2 rotation acting on (x, p) column vectors.
Eigen::Matrix2d rotation_block(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::Matrix2d g;
    g << c, -s, s, c;
    return g;
}

}  // namespace

Matrix symplectic_form(int n_modes) {
    if (n_modes < 1) {
        throw std::invalid_argument("symplectic_form: n_modes must be >= 1");
    }
    Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
    for (int m = 0; m < n_modes; ++m) {
        omega(2 * m, 2 * m + 1) = 1.0;
        omega(2 * m + 1, 2 * m) = -1.0;
    }
    return omega;
}

GaussianState GaussianState::vacuum(int n_modes) {
    if (n_modes < 1) {
        throw std::invalid_argument("vacuum: n_modes must be >= 1");
    }
    GaussianState s;
    s.n_modes = n_modes;
    s.mean = Vector::Zero(2 * n_modes);
    s.cov = 0.5 * Matrix::Identity(2 * n_modes, 2 * n_modes);
    return s;
}

std::vector<double> GaussianState::symplectic_eigenvalues() const {
    const Matrix omega = symplectic_form(n_modes);
    Eigen::EigenSolver<Matrix> solver(omega * cov, /*computeEigenvectors=*/false);
    std::vector<double> mags(2 * n_modes);
    for (int i = 0; i < 2 * n_modes; ++i) {
        mags[i] = std::abs(solver.eigenvalues()[i].imag());
    }
    // Eigenvalues of Omega*cov come in +-i*nu pairs; collapse each pair.
    std::sort(mags.begin(), mags.end());
    std::vector<double> nus(n_modes);
    for (int m = 0; m < n_modes; ++m) {
        nus[m] = 0.5 * (mags[2 * m] + mags[2 * m + 1]);
    }
    return nus;
}

bool GaussianState::is_physical(double tol) const {
    for (double nu : symplectic_eigenvalues()) {
        if (nu < 0.5 - tol) {
            return false;
        }
    }
    return true;
}

void GaussianState::validate(double sym_tol, double phys_tol) const {
    if (n_modes < 1 || mean.size() != 2 * n_modes || cov.rows() != 2 * n_modes ||
        cov.cols() != 2 * n_modes) {
        throw std::invalid_argument("GaussianState: inconsistent dimensions");
    }
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol) {
        throw std::invalid_argument("GaussianState: covariance asymmetric by " +
                                    std::to_string(asym));
    }
    if (!is_physical(phys_tol)) {
        throw std::invalid_argument(
            "GaussianState: covariance violates the uncertainty bound");
    }
}

bool SymplecticOp::is_unitary(double tol) const {
    if (noise_add.size() > 0 && noise_add.cwiseAbs().maxCoeff() > tol) {
        return false;
    }
    const Matrix omega = symplectic_form(n_modes());
    return (matrix * omega * matrix.transpose() - omega).cwiseAbs().maxCoeff() <=
           tol;
}

bool SymplecticOp::is_valid_channel(double tol) const {
    const Matrix omega = symplectic_form(n_modes());
    Eigen::MatrixXcd m = noise_add.cast<std::complex<double>>();
    m += std::complex<double>(0.0, 0.5) *
         (omega - matrix * omega * matrix.transpose())
             .cast<std::complex<double>>();
    // Hermitian by construction; check the smallest eigenvalue.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        0.5 * (m + m.adjoint()));
    return solver.eigenvalues().minCoeff() >= -tol;
}

GaussianState SymplecticOp::apply(const GaussianState& state) const {
    if (state.n_modes != n_modes()) {
        throw std::invalid_argument("SymplecticOp::apply: mode count mismatch (op " +
                                    std::to_string(n_modes()) + ", state " +
                                    std::to_string(state.n_modes) + ")");
    }
    GaussianState out;
    out.n_modes = state.n_modes;
    out.mean = matrix * state.mean;
    out.cov = matrix * state.cov * matrix.transpose() + noise_add;
    // Symmetrize to keep round-off from accumulating across long chains.
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

SymplecticOp SymplecticOp::then(const SymplecticOp& next) const {
    if (next.n_modes() != n_modes()) {
        throw std::invalid_argument("SymplecticOp::then: mode count mismatch");
    }
    SymplecticOp composed;
    composed.matrix = next.matrix * matrix;
    composed.noise_add =
        next.matrix * noise_add * next.matrix.transpose() + next.noise_add;
    composed.label = label + " -> " + next.label;
    return composed;
}

SymplecticOp identity_op(int n_modes) {
    if (n_modes < 1) {
        throw std::invalid_argument("identity_op: n_modes must be >= 1");
    }
    SymplecticOp op;
    op.matrix = Matrix::Identity(2 * n_modes, 2 * n_modes);
    op.noise_add = Matrix::Zero(2 * n_modes, 2 * n_modes);
    op.label = "identity";
    return op;
}

SymplecticOp rotation(int n_modes, int mode, double angle) {
    check_mode(n_modes, mode, "rotation");
    SymplecticOp op = identity_op(n_modes);
    op.matrix.block<2, 2>(2 * mode, 2 * mode) = rotation_block(angle);
    op.label = "rotation(" + std::to_string(angle) + ")";
    return op;
}

SymplecticOp squeezer(int n_modes, int mode, double r, double angle) {
    check_mode(n_modes, mode, "squeezer");
    if (!std::isfinite(r)) {
        throw std::invalid_argument("squeezer: r must be finite");
    }
    Eigen::Matrix2d block =
        Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal();
    const Eigen::Matrix2d g = rotation_block(angle);
    SymplecticOp op = identity_op(n_modes);
    op.matrix.block<2, 2>(2 * mode, 2 * mode) = g * block * g.transpose();
    op.label = "squeezer(r=" + std::to_string(r) + ")";
    return op;
}

SymplecticOp squeezer(double r, double angle) {
    return squeezer(1, 0, r, angle);
}

SymplecticOp beamsplitter(int n_modes, double transmissivity, int mode_i,
                          int mode_j) {
    check_mode(n_modes, mode_i, "beamsplitter");
    check_mode(n_modes, mode_j, "beamsplitter");
    if (mode_i == mode_j) {
        throw std::invalid_argument("beamsplitter: modes must differ");
    }
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
        throw std::invalid_argument("beamsplitter: transmissivity " +
                                    std::to_string(transmissivity) +
                                    " outside [0, 1]");
    }
    const double tau = std::sqrt(transmissivity);
    const double rho = std::sqrt(1.0 - transmissivity);
    SymplecticOp op = identity_op(n_modes);
    for (int q = 0; q < 2; ++q) {  // same mixing for x and p
        op.matrix(2 * mode_i + q, 2 * mode_i + q) = tau;
        op.matrix(2 * mode_i + q, 2 * mode_j + q) = -rho;
        op.matrix(2 * mode_j + q, 2 * mode_i + q) = rho;
        op.matrix(2 * mode_j + q, 2 * mode_j + q) = tau;
    }
    op.label = "beamsplitter(T=" + std::to_string(transmissivity) + ")";
    return op;
}

SymplecticOp loss_channel(int n_modes, int mode, double efficiency) {
    check_mode(n_modes, mode, "loss_channel");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("loss_channel: efficiency " +
                                    std::to_string(efficiency) +
                                    " outside (0, 1]");
    }
    SymplecticOp op = identity_op(n_modes);
    const double root = std::sqrt(efficiency);
    op.matrix(2 * mode, 2 * mode) = root;
    op.matrix(2 * mode + 1, 2 * mode + 1) = root;
    op.noise_add(2 * mode, 2 * mode) = 0.5 * (1.0 - efficiency);
    op.noise_add(2 * mode + 1, 2 * mode + 1) = 0.5 * (1.0 - efficiency);
    op.label = "loss(eta=" + std::to_string(efficiency) + ")";
    return op;
}

SymplecticOp loss_channel(double efficiency) {
    return loss_channel(1, 0, efficiency);
}

double homodyne_variance(const GaussianState& state, int mode, double angle) {
    check_mode(state.n_modes, mode, "homodyne_variance");
    const Eigen::Vector2d u(std::cos(angle), std::sin(angle));
    const Eigen::Matrix2d block = state.cov.block<2, 2>(2 * mode, 2 * mode);
    return u.dot(block * u);
}

double homodyne_mean(const GaussianState& state, int mode, double angle) {
    check_mode(state.n_modes, mode, "homodyne_mean");
    return state.mean[2 * mode] * std::cos(angle) +
           state.mean[2 * mode + 1] * std::sin(angle);
}

GaussianState displace(const GaussianState& state, int mode, double dx,
                       double dp) {
    check_mode(state.n_modes, mode, "displace");
    GaussianState out = state;
    out.mean[2 * mode] += dx;
    out.mean[2 * mode + 1] += dp;
    return out;
}

}  // namespace qdm
