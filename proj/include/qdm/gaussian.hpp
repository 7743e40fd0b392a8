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

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qdm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Phase-space conventions used throughout the library:
//   * quadratures are interleaved per mode: (x1, p1, x2, p2, ...)
//   * hbar = 1, so the vacuum state has Var(x) = Var(p) = 1/2
//   * every dB figure elsewhere is relative to that 1/2 vacuum variance

/// Standard symplectic form Omega for n modes: block diagonal [[0,1],[-1,0]].
Matrix symplectic_form(int n_modes);

/// A Gaussian state of n optical modes: mean quadrature vector plus
/// covariance matrix. Classical displacements live in `mean`; all quantum
/// noise lives in `cov`.
struct GaussianState {
    int n_modes = 0;
    Vector mean;  // length 2 * n_modes
    Matrix cov;   // 2n x 2n, symmetric

    static GaussianState vacuum(int n_modes);

    /// Symplectic spectrum of cov (n values). A bona-fide quantum state has
    /// every value >= 1/2.
    std::vector<double> symplectic_eigenvalues() const;

    bool is_physical(double tol = 1e-9) const;

    /// Throws std::invalid_argument if cov is asymmetric beyond `sym_tol`
    /// or the state violates the uncertainty bound beyond `phys_tol`.
    void validate(double sym_tol = 1e-12, double phys_tol = 1e-9) const;
};

/// A deterministic Gaussian channel: cov -> S cov S^T + noise_add,
/// mean -> S mean. Unitary operations have noise_add = 0 and symplectic S;
/// loss channels carry the added vacuum noise in noise_add.
struct SymplecticOp {
    Matrix matrix;
    Matrix noise_add;
    std::string label;

    int n_modes() const { return static_cast<int>(matrix.rows()) / 2; }

    /// True when noise_add vanishes and S Omega S^T = Omega within tol.
    bool is_unitary(double tol = 1e-12) const;

    /// Complete-positivity check: noise_add + (i/2)(Omega - S Omega S^T)
    /// must be positive semidefinite (within tol).
    bool is_valid_channel(double tol = 1e-9) const;

    GaussianState apply(const GaussianState& state) const;

    /// Composition: this op applied first, `next` applied second.
    SymplecticOp then(const SymplecticOp& next) const;
};

SymplecticOp identity_op(int n_modes);

/// Phase-space rotation of one mode. The rotated readout quadrature is
/// x_theta = x cos(theta) + p sin(theta).
SymplecticOp rotation(int n_modes, int mode, double angle);

/// Single-mode squeezer. Applied to vacuum with angle 0 it gives
/// Var(x) = e^{-2r}/2 and Var(p) = e^{+2r}/2; `angle` rotates the
/// squeezing ellipse so the squeezed quadrature sits at x_angle.
SymplecticOp squeezer(int n_modes, int mode, double r, double angle);
SymplecticOp squeezer(double r, double angle);

/// Two-mode beam splitter with power transmissivity in [0, 1].
/// Sign convention (fixed for all golden values in this project): at 50:50
/// the outputs are (in_i - in_j)/sqrt(2) on mode i and (in_i + in_j)/sqrt(2)
/// on mode j, identically for x and p.
SymplecticOp beamsplitter(int n_modes, double transmissivity, int mode_i,
                          int mode_j);

/// Pure-loss channel: cov block -> eta * cov + (1 - eta)/2 * I, mean block
/// scales by sqrt(eta). Models propagation/detection loss without adding
/// an ancilla mode.
SymplecticOp loss_channel(int n_modes, int mode, double efficiency);
SymplecticOp loss_channel(double efficiency);

/// Variance of the rotated quadrature x_angle on one mode.
double homodyne_variance(const GaussianState& state, int mode, double angle);

/// Mean of the rotated quadrature x_angle on one mode.
double homodyne_mean(const GaussianState& state, int mode, double angle);

/// Shift the mean of one mode by (dx, dp); covariance is untouched.
GaussianState displace(const GaussianState& state, int mode, double dx,
                       double dp);

}  // namespace qdm
