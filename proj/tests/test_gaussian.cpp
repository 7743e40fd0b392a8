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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdm/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace qdm;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent Monte-Carlo oracle: draw from the full multivariate normal
// via Eigen's Cholesky and project, without touching homodyne_variance.
double sampled_projection_variance(const GaussianState& state, int mode,
                                   double angle, int n, std::uint64_t seed) {
    Eigen::LLT<Matrix> llt(state.cov);
    REQUIRE(llt.info() == Eigen::Success);
    const Matrix chol = llt.matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    double sum = 0.0;
    double sum_sq = 0.0;
    Vector z(2 * state.n_modes);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 2 * state.n_modes; ++k) {
            z[k] = normal(rng);
        }
        const Vector v = state.mean + chol * z;
        const double proj = v[2 * mode] * c + v[2 * mode + 1] * s;
        sum += proj;
        sum_sq += proj * proj;
    }
    const double mean = sum / n;
    return sum_sq / n - mean * mean;
}

SymplecticOp random_unitary_op(std::mt19937_64& rng, int n_modes) {
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    std::uniform_real_distribution<double> strength(0.0, 1.2);
    std::uniform_int_distribution<int> mode(0, n_modes - 1);
    switch (pick(rng)) {
        case 0:
            return squeezer(n_modes, mode(rng), strength(rng), angle(rng));
        case 1:
            return rotation(n_modes, mode(rng), angle(rng));
        default: {
            int i = mode(rng);
            int j = mode(rng);
            if (i == j) {
                j = (i + 1) % n_modes;
            }
            std::uniform_real_distribution<double> trans(0.0, 1.0);
            return beamsplitter(n_modes, trans(rng), i, j);
        }
    }
}

}  // namespace

TEST_CASE("vacuum has variance one half in every quadrature") {
    const GaussianState one = GaussianState::vacuum(1);
    CHECK(one.mean.norm() == 0.0);
    CHECK(one.cov(0, 0) == Approx(0.5));
    CHECK(one.cov(1, 1) == Approx(0.5));
    CHECK(one.cov(0, 1) == 0.0);

    const GaussianState two = GaussianState::vacuum(2);
    CHECK(two.cov.rows() == 4);
    CHECK((two.cov - 0.5 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() ==
          0.0);

    CHECK_THROWS_AS(GaussianState::vacuum(0), std::invalid_argument);
}

TEST_CASE("vacuum is invariant under passive unitaries") {
    const GaussianState vac = GaussianState::vacuum(2);
    for (double angle : {0.0, 0.3, kPi / 2, 2.1}) {
        const GaussianState rotated = rotation(2, 0, angle).apply(vac);
        CHECK((rotated.cov - vac.cov).cwiseAbs().maxCoeff() < 1e-15);
    }
    for (double transmissivity : {0.5, 0.2, 0.9}) {
        const GaussianState split =
            beamsplitter(2, transmissivity, 0, 1).apply(vac);
        CHECK((split.cov - vac.cov).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("squeezer reshapes the vacuum ellipse") {
    const GaussianState vac = GaussianState::vacuum(1);

    SUBCASE("zero squeezing is the identity") {
        for (double angle : {0.0, 0.7, kPi / 2}) {
            const GaussianState out = squeezer(0.0, angle).apply(vac);
            CHECK(homodyne_variance(out, 0, 0.0) == Approx(0.5));
            CHECK(homodyne_variance(out, 0, kPi / 2) == Approx(0.5));
        }
    }

    SUBCASE("6 dB of squeezing") {
        // r = (6/20) ln 10 rounded to 0.6908; oracle 0.5 * 10^{-6/10}.
        const GaussianState out = squeezer(0.6908, 0.0).apply(vac);
        CHECK(homodyne_variance(out, 0, 0.0) ==
              Approx(0.5 * std::pow(10.0, -0.6)).epsilon(1e-4));
        CHECK(homodyne_variance(out, 0, 0.0) ==
              Approx(std::exp(-2.0 * 0.6908) / 2.0).epsilon(1e-12));
        CHECK(homodyne_variance(out, 0, kPi / 2) ==
              Approx(std::exp(+2.0 * 0.6908) / 2.0).epsilon(1e-12));
    }

    SUBCASE("3 dB threshold value") {
        const GaussianState out = squeezer(0.34657, 0.0).apply(vac);
        CHECK(homodyne_variance(out, 0, 0.0) == Approx(0.25).epsilon(1e-4));
    }

    SUBCASE("the angle rotates the squeezed quadrature") {
        const double r = 0.9;
        for (double angle : {0.0, 0.4, kPi / 3, kPi / 2}) {
            const GaussianState out = squeezer(r, angle).apply(vac);
            CHECK(homodyne_variance(out, 0, angle) ==
                  Approx(std::exp(-2.0 * r) / 2.0));
            CHECK(homodyne_variance(out, 0, angle + kPi / 2) ==
                  Approx(std::exp(+2.0 * r) / 2.0));
        }
    }

    CHECK_THROWS_AS(squeezer(std::nan(""), 0.0), std::invalid_argument);
}

TEST_CASE("beamsplitter limits and argument checking") {
    const SymplecticOp identity_bs = beamsplitter(2, 1.0, 0, 1);
    CHECK((identity_bs.matrix - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-15);
    CHECK_THROWS_AS(beamsplitter(2, 1.5, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(beamsplitter(2, -0.1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(beamsplitter(2, 0.5, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(beamsplitter(2, 0.5, 0, 2), std::invalid_argument);
}

TEST_CASE("interfering orthogonally squeezed vacua creates EPR correlations") {
    const double r = 0.6908;
    // Mode 0 squeezed along p, mode 1 along x; both through the 50:50.
    GaussianState state = GaussianState::vacuum(2);
    state = squeezer(2, 0, r, kPi / 2).apply(state);
    state = squeezer(2, 1, r, 0.0).apply(state);
    state = beamsplitter(2, 0.5, 0, 1).apply(state);

    // Direct 4x4 oracle, assembled without library ops.
    Matrix cov_in = Matrix::Zero(4, 4);
    cov_in(0, 0) = std::exp(2 * r) / 2;   // x of p-squeezed beam
    cov_in(1, 1) = std::exp(-2 * r) / 2;  // p of p-squeezed beam
    cov_in(2, 2) = std::exp(-2 * r) / 2;  // x of x-squeezed beam
    cov_in(3, 3) = std::exp(2 * r) / 2;   // p of x-squeezed beam
    Matrix mix = Matrix::Zero(4, 4);
    const double inv = 1.0 / std::sqrt(2.0);
    for (int q = 0; q < 2; ++q) {
        mix(q, q) = inv;
        mix(q, q + 2) = -inv;
        mix(q + 2, q) = inv;
        mix(q + 2, q + 2) = inv;
    }
    const Matrix cov_oracle = mix * cov_in * mix.transpose();
    CHECK((state.cov - cov_oracle).cwiseAbs().maxCoeff() < 1e-12);

    const double antisqueezed = std::cosh(2 * r) / 2;
    CHECK(homodyne_variance(state, 0, 0.0) == Approx(antisqueezed));
    CHECK(homodyne_variance(state, 0, kPi / 2) == Approx(antisqueezed));
    CHECK(homodyne_variance(state, 1, 0.0) == Approx(antisqueezed));
    CHECK(homodyne_variance(state, 1, kPi / 2) == Approx(antisqueezed));

    // Joint quadratures: Var[(x_A - x_B)/sqrt(2)] and Var[(p_A + p_B)/sqrt(2)]
    Vector diff_x(4), sum_p(4);
    diff_x << inv, 0, -inv, 0;
    sum_p << 0, inv, 0, inv;
    const double var_diff = diff_x.dot(state.cov * diff_x);
    const double var_sum = sum_p.dot(state.cov * sum_p);
    CHECK(var_diff == Approx(std::exp(-2 * r) / 2));
    CHECK(var_sum == Approx(std::exp(-2 * r) / 2));
    CHECK(var_diff * var_sum == Approx(std::exp(-4 * r) / 4));
}

TEST_CASE("EPR product vanishes with growing squeezing") {
    double previous = 1.0;
    for (double r : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        GaussianState state = GaussianState::vacuum(2);
        state = squeezer(2, 0, r, kPi / 2).apply(state);
        state = squeezer(2, 1, r, 0.0).apply(state);
        state = beamsplitter(2, 0.5, 0, 1).apply(state);
        Vector diff_x(4), sum_p(4);
        const double inv = 1.0 / std::sqrt(2.0);
        diff_x << inv, 0, -inv, 0;
        sum_p << 0, inv, 0, inv;
        const double product =
            diff_x.dot(state.cov * diff_x) * sum_p.dot(state.cov * sum_p);
        CHECK(product == Approx(std::exp(-4 * r) / 4).epsilon(1e-10));
        CHECK(product <= previous + 1e-12);
        previous = product;
    }
}

TEST_CASE("loss channel mixes in vacuum noise") {
    const GaussianState vac = GaussianState::vacuum(1);

    SUBCASE("unit efficiency is the identity") {
        const SymplecticOp op = loss_channel(1.0);
        CHECK((op.matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
              1e-15);
        CHECK(op.noise_add.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("vacuum is a fixed point") {
        const GaussianState out = loss_channel(0.5).apply(vac);
        CHECK((out.cov - vac.cov).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("strong squeezing saturates at the loss floor") {
        const double r = 5.0;
        const double eta = 0.5;
        GaussianState out = squeezer(r, 0.0).apply(vac);
        out = loss_channel(eta).apply(out);
        const double expected = eta * std::exp(-2 * r) / 2 + (1 - eta) / 2;
        CHECK(homodyne_variance(out, 0, 0.0) == Approx(expected).epsilon(1e-12));
        CHECK(expected == Approx(0.25).epsilon(1e-3));
    }

    SUBCASE("mean scales by sqrt(eta)") {
        GaussianState out = displace(vac, 0, 2.0, -1.0);
        out = loss_channel(0.25).apply(out);
        CHECK(out.mean[0] == Approx(1.0));
        CHECK(out.mean[1] == Approx(-0.5));
    }

    SUBCASE("loss is a valid non-unitary channel") {
        const SymplecticOp op = loss_channel(0.7);
        CHECK(!op.is_unitary());
        CHECK(op.is_valid_channel());
    }

    CHECK_THROWS_AS(loss_channel(0.0), std::invalid_argument);
    CHECK_THROWS_AS(loss_channel(1.2), std::invalid_argument);
}

TEST_CASE("homodyne mean follows displacements") {
    const GaussianState vac = GaussianState::vacuum(1);

    GaussianState shifted = displace(vac, 0, 1.0, 0.0);
    CHECK(homodyne_mean(shifted, 0, 0.0) == Approx(1.0));
    CHECK((shifted.cov - vac.cov).cwiseAbs().maxCoeff() == 0.0);

    const double dx = 0.8;
    const double dp = -0.25;
    shifted = displace(vac, 0, dx, dp);
    for (double angle : {0.0, 0.3, 1.1, kPi / 2}) {
        CHECK(homodyne_mean(shifted, 0, angle) ==
              Approx(dx * std::cos(angle) + dp * std::sin(angle)));
    }

    shifted = displace(vac, 0, 3.0, 4.0);
    CHECK(homodyne_mean(shifted, 0, std::atan2(4.0, 3.0)) == Approx(5.0));
}

TEST_CASE("rotated readout of a squeezed mode") {
    const double r = 0.6908;
    const GaussianState out = squeezer(r, 0.0).apply(GaussianState::vacuum(1));
    CHECK(homodyne_variance(out, 0, 0.0) == Approx(std::exp(-2 * r) / 2));
    CHECK(homodyne_variance(out, 0, kPi / 2) == Approx(std::exp(2 * r) / 2));
    // At 45 degrees both principal variances contribute equally.
    CHECK(homodyne_variance(out, 0, kPi / 4) ==
          Approx((std::exp(-2 * r) + std::exp(2 * r)) / 4));
    CHECK(homodyne_variance(out, 0, kPi / 4) ==
          Approx(std::cosh(2 * r) / 2));
}

TEST_CASE("unitary ops preserve the symplectic form") {
    const Matrix omega = symplectic_form(2);
    std::mt19937_64 rng(421);
    for (int trial = 0; trial < 200; ++trial) {
        const SymplecticOp op = random_unitary_op(rng, 2);
        const double defect =
            (op.matrix * omega * op.matrix.transpose() - omega)
                .cwiseAbs()
                .maxCoeff();
        CHECK(defect < 1e-12);
        CHECK(op.is_unitary());
    }
}

TEST_CASE("random op chains keep states physical and compose") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> eta(0.3, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianState stepped = GaussianState::vacuum(2);
        SymplecticOp composed = identity_op(2);
        for (int k = 0; k < 6; ++k) {
            SymplecticOp op;
            if (k == 3) {
                op = loss_channel(2, trial % 2, eta(rng));
            } else {
                op = random_unitary_op(rng, 2);
            }
            stepped = op.apply(stepped);
            composed = composed.then(op);
        }
        const GaussianState direct = composed.apply(GaussianState::vacuum(2));
        CHECK((stepped.cov - direct.cov).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(stepped.is_physical());
        CHECK_NOTHROW(stepped.validate());
        CHECK(composed.is_valid_channel());
    }
}

TEST_CASE("symplectic eigenvalues flag unphysical covariances") {
    GaussianState vac = GaussianState::vacuum(1);
    const auto nus = vac.symplectic_eigenvalues();
    REQUIRE(nus.size() == 1);
    CHECK(nus[0] == Approx(0.5));

    vac.cov *= 0.5;  // below the uncertainty bound
    CHECK(!vac.is_physical());
    CHECK_THROWS_AS(vac.validate(), std::invalid_argument);

    GaussianState asym = GaussianState::vacuum(1);
    asym.cov(0, 1) = 1e-6;
    CHECK_THROWS_AS(asym.validate(), std::invalid_argument);
}

TEST_CASE("sampled projections agree with analytic variances") {
    const int n = 200000;
    struct Case {
        GaussianState state;
        double angle;
    };
    std::vector<Case> cases;
    cases.push_back({GaussianState::vacuum(1), 0.55});
    cases.push_back(
        {squeezer(0.6908, 0.0).apply(GaussianState::vacuum(1)), 0.0});
    cases.push_back(
        {squeezer(0.6908, 0.0).apply(GaussianState::vacuum(1)), kPi / 4});
    GaussianState epr = GaussianState::vacuum(2);
    epr = squeezer(2, 0, 0.9, kPi / 2).apply(epr);
    epr = squeezer(2, 1, 0.9, 0.0).apply(epr);
    epr = beamsplitter(2, 0.5, 0, 1).apply(epr);
    cases.push_back({epr, 1.2});

    std::uint64_t seed = 7;
    for (const Case& c : cases) {
        const double analytic = homodyne_variance(c.state, 0, c.angle);
        const double sampled =
            sampled_projection_variance(c.state, 0, c.angle, n, seed++);
        const double standard_error = analytic * std::sqrt(2.0 / n);
        CHECK(std::abs(sampled - analytic) < 3.0 * standard_error);
    }
}
