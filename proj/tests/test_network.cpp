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

#include "qdm/network.hpp"

#include <cmath>
#include <numbers>

using namespace qdm;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

QdmConfig make_config(double r_a, double r_b, double theta) {
    QdmConfig config;
    config.r_a = r_a;
    config.r_b = r_b;
    config.theta = theta;
    return config;
}

}  // namespace

TEST_CASE("vacuum configuration reads 0.5 at both detectors") {
    const QdmConfig config = make_config(0.0, 0.0, kPi / 2);
    const GaussianState state = build_output_state(config);
    CHECK(homodyne_variance(state, 0, config.bhd_a_angle) == Approx(0.5));
    CHECK(homodyne_variance(state, 1, config.theta) == Approx(0.5));
}

TEST_CASE("both readouts squeeze simultaneously at 6 dB") {
    const QdmConfig config = make_config(0.6908, 0.6908, kPi / 2);
    const GaussianState state = build_output_state(config);
    const double var_a = homodyne_variance(state, 0, 0.0);
    const double var_b = homodyne_variance(state, 1, config.theta);
    CHECK(var_a == Approx(std::exp(-2 * 0.6908) / 2).epsilon(1e-12));
    CHECK(var_b == Approx(std::exp(-2 * 0.6908) / 2).epsilon(1e-12));
    CHECK(var_a == Approx(0.5 * std::pow(10.0, -0.6)).epsilon(1e-4));
    CHECK(10.0 * std::log10(var_a / 0.5) == Approx(-6.0).epsilon(1e-4));
}

TEST_CASE("meter-path loss follows the loss-channel closed form") {
    QdmConfig config = make_config(0.6908, 0.6908, kPi / 2);
    config.eta_meter = 0.9;
    const GaussianState state = build_output_state(config);
    const double expected = 0.9 * std::exp(-2 * 0.6908) / 2 + 0.05;
    CHECK(homodyne_variance(state, 0, 0.0) ==
          Approx(expected).epsilon(1e-12));
    CHECK(expected == Approx(0.16303).epsilon(1e-4));
    // Reference arm untouched.
    CHECK(homodyne_variance(state, 1, config.theta) ==
          Approx(std::exp(-2 * 0.6908) / 2).epsilon(1e-12));
}

TEST_CASE("matrix pipeline collapses to the analytic variances on the grid") {
    for (double r_a : {0.0, 0.25, 0.5, 1.0}) {
        for (double r_b : {0.0, 0.25, 0.5, 1.0}) {
            for (double theta : {0.0, kPi / 6, kPi / 4, kPi / 2}) {
                const QdmConfig config = make_config(r_a, r_b, theta);
                const GaussianState state = build_output_state(config);
                CHECK_NOTHROW(state.validate());
                const double var_a = homodyne_variance(state, 0, 0.0);
                const double var_b = homodyne_variance(state, 1, theta);
                CHECK(std::abs(var_a - std::exp(-2 * r_a) / 2) < 1e-10);
                CHECK(std::abs(var_b - std::exp(-2 * r_b) / 2) < 1e-10);
            }
        }
    }
}

TEST_CASE("joint readout covariance is diagonal for this topology") {
    for (double theta : {0.3, kPi / 2}) {
        QdmConfig config = make_config(0.8, 0.5, theta);
        Eigen::Matrix2d joint = joint_readout_covariance(config);
        CHECK(std::abs(joint(0, 1)) < 1e-12);
        config.eta_meter = 0.7;
        config.eta_reference = 0.9;
        joint = joint_readout_covariance(config);
        CHECK(std::abs(joint(0, 1)) < 1e-12);
    }
}

TEST_CASE("signal transfer projects onto the two readout quadratures") {
    SignalSpec signal;
    signal.frequency_hz = 5.55e6;
    signal.amplitude = 1.0;

    SUBCASE("science signal vanishes at an orthogonal detector B") {
        const QdmConfig config = make_config(0.5, 0.5, kPi / 2);
        signal.angle_phi = 0.0;
        const SignalGains gains = signal_transfer(config, signal);
        CHECK(gains.gain_a == Approx(1.0 / std::sqrt(2.0)));
        CHECK(std::abs(gains.gain_b) < 1e-15);
    }

    SUBCASE("a rotated parasitic grows at detector B") {
        const QdmConfig config = make_config(0.5, 0.5, kPi / 2);
        signal.angle_phi = kPi / 3;
        const SignalGains gains = signal_transfer(config, signal);
        CHECK(std::abs(gains.gain_a) ==
              Approx(0.5 / std::sqrt(2.0)));  // cos(60 deg)
        CHECK(std::abs(gains.gain_b) ==
              Approx(std::cos(kPi / 6) / std::sqrt(2.0)));  // cos(-30 deg)
        CHECK(std::abs(gains.gain_b) > std::abs(gains.gain_a));
    }

    SUBCASE("theta = 0 duplicates the readout") {
        const QdmConfig config = make_config(0.5, 0.5, 0.0);
        for (double phi : {0.0, 0.4, 1.0, 2.5}) {
            signal.angle_phi = phi;
            const SignalGains gains = signal_transfer(config, signal);
            CHECK(gains.gain_a == Approx(gains.gain_b));
        }
    }

    SUBCASE("path efficiency scales the delivered amplitude") {
        QdmConfig config = make_config(0.0, 0.0, kPi / 2);
        config.eta_meter = 0.81;
        signal.angle_phi = 0.0;
        const SignalGains gains = signal_transfer(config, signal);
        CHECK(gains.gain_a == Approx(0.9 / std::sqrt(2.0)));
    }
}

TEST_CASE("signal power is split, never lost, across the detectors") {
    SignalSpec signal;
    signal.frequency_hz = 1e6;
    signal.amplitude = 0.7;
    for (double theta : {0.0, kPi / 6, kPi / 3, kPi / 2}) {
        const QdmConfig config = make_config(0.3, 0.9, theta);
        for (double phi = 0.0; phi < kPi; phi += kPi / 12) {
            signal.angle_phi = phi;
            const SignalGains gains = signal_transfer(config, signal);
            const double delivered =
                std::pow(signal.amplitude * gains.gain_a, 2) +
                std::pow(signal.amplitude * gains.gain_b, 2);
            const double expected =
                signal.amplitude * signal.amplitude *
                (std::pow(std::cos(phi), 2) + std::pow(std::cos(phi - theta), 2)) /
                2.0;
            CHECK(delivered == Approx(expected).epsilon(1e-12));
            if (theta == kPi / 2) {
                CHECK(delivered ==
                      Approx(signal.amplitude * signal.amplitude / 2.0));
            }
        }
    }
}

TEST_CASE("the kind label never changes numeric output") {
    const QdmConfig config = make_config(0.4, 0.6, 1.1);
    SignalSpec signal;
    signal.frequency_hz = 2e6;
    signal.amplitude = 0.3;
    signal.angle_phi = 0.8;
    signal.kind = SignalKind::science;
    const SignalGains as_science = signal_transfer(config, signal);
    signal.kind = SignalKind::parasitic;
    const SignalGains as_parasitic = signal_transfer(config, signal);
    CHECK(as_science.gain_a == as_parasitic.gain_a);
    CHECK(as_science.gain_b == as_parasitic.gain_b);
}

TEST_CASE("single-beam bound") {
    CHECK(single_mode_bound(1.0, 1.0) == 0.25);
    CHECK(single_mode_bound(2.0, 1.0) == Approx(0.0625));
    CHECK(single_mode_bound(std::sqrt(2.0), std::sqrt(2.0)) ==
          Approx(1.0 / 16.0));
}

TEST_CASE("split-beam readout pays the factor of four and squeezing hurts") {
    CHECK(arthurs_kelly_product(0.0, 1.0, 1.0) == Approx(1.0));
    CHECK(arthurs_kelly_product(0.0, 1.0, 1.0) /
              single_mode_bound(1.0, 1.0) ==
          Approx(4.0));
    CHECK(arthurs_kelly_product(0.6908, 1.0, 1.0) ==
          Approx((1.0 + std::cosh(2 * 0.6908)) / 2.0));
    // Minimum over r sits at r = 0.
    const double at_zero = arthurs_kelly_product(0.0, 1.0, 1.0);
    for (double r = 0.0; r <= 2.0; r += 0.01) {
        CHECK(arthurs_kelly_product(r, 1.0, 1.0) >= at_zero - 1e-15);
    }
}

TEST_CASE("entangled dual readout product") {
    CHECK(qdm_product(make_config(0.0, 0.0, kPi / 2), 1.0, 1.0) == Approx(1.0));
    CHECK(qdm_product(make_config(0.34657, 0.34657, kPi / 2), 1.0, 1.0) ==
          Approx(0.25).epsilon(1e-4));
    CHECK(qdm_product(make_config(0.6908, 0.6908, kPi / 2), 1.0, 1.0) ==
          Approx(std::exp(-4 * 0.6908)).epsilon(1e-12));
    CHECK(qdm_product(make_config(0.6908, 0.6908, kPi / 2), 1.0, 1.0) ==
          Approx(0.0631).epsilon(1e-3));

    SUBCASE("strictly decreasing in each squeezing parameter") {
        double previous = 2.0;
        for (double r : {0.0, 0.2, 0.5, 1.0, 2.0}) {
            const double value = qdm_product(make_config(r, 0.3, 1.0), 1.0, 1.0);
            CHECK(value < previous);
            previous = value;
        }
        previous = 2.0;
        for (double r : {0.0, 0.2, 0.5, 1.0, 2.0}) {
            const double value = qdm_product(make_config(0.3, r, 1.0), 1.0, 1.0);
            CHECK(value < previous);
            previous = value;
        }
    }

    SUBCASE("beats the split-beam bound beyond the threshold") {
        for (double r = 0.0; r <= 2.0; r += 0.05) {
            const double dual = qdm_product(make_config(r, r, kPi / 2), 1.0, 1.0);
            const double single = single_mode_bound(1.0, 1.0);
            if (r > threshold_r() + 1e-9) {
                CHECK(dual < single);
            } else {
                CHECK(dual >= single - 1e-12);
            }
        }
    }
}

TEST_CASE("threshold squeezing parameter") {
    CHECK(threshold_r() == Approx(0.5 * std::log(2.0)).epsilon(1e-15));
    CHECK(std::round(threshold_r() * 1e4) / 1e4 == Approx(0.3466));
    CHECK(std::exp(-4.0 * threshold_r()) == Approx(0.25).epsilon(1e-14));
    // In squeezing dB per beam: 10 log10 e^{2r} = 10 log10 2.
    CHECK(10.0 * std::log10(std::exp(2.0 * threshold_r())) ==
          Approx(3.0103).epsilon(1e-4));
}

TEST_CASE("analyze assembles the per-configuration report") {
    QdmConfig config = make_config(0.6908, 0.6908, kPi / 2);
    std::vector<SignalSpec> signals = {
        {5.55e6, 0.55, 0.0, SignalKind::science, 0.0},
        {5.17e6, 0.55, kPi / 3, SignalKind::parasitic, 0.0}};
    const AnalyticReport report = analyze(config, signals);
    CHECK(report.var_bhd_a == Approx(std::exp(-2 * 0.6908) / 2));
    CHECK(report.var_bhd_b == Approx(std::exp(-2 * 0.6908) / 2));
    CHECK(report.single_mode == Approx(0.25));
    CHECK(report.uncertainty_product == Approx(std::exp(-4 * 0.6908)));
    CHECK(report.threshold == Approx(threshold_r()));
    CHECK(report.bound_label == "entangled-dual-readout");
    REQUIRE(report.signals.size() == 2);
    CHECK(report.signals[0].gain_a == Approx(1.0 / std::sqrt(2.0)));
    CHECK(report.signals[1].gain_b ==
          Approx(std::cos(kPi / 6) / std::sqrt(2.0)));

    const AnalyticReport vacuum_report = analyze(make_config(0, 0, 0.5), {});
    CHECK(vacuum_report.bound_label == "vacuum-simultaneous-readout");
    CHECK(vacuum_report.uncertainty_product == Approx(1.0));
}

TEST_CASE("configuration validation") {
    CHECK_THROWS_AS(build_output_state(make_config(-0.1, 0, 0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_output_state(make_config(0, 0, kPi)),
                    std::invalid_argument);
    QdmConfig bad_eta = make_config(0, 0, 0.5);
    bad_eta.eta_meter = 0.0;
    CHECK_THROWS_AS(build_output_state(bad_eta), std::invalid_argument);
    bad_eta.eta_meter = 1.5;
    CHECK_THROWS_AS(build_output_state(bad_eta), std::invalid_argument);
}
