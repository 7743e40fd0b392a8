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

#include "qdm/network.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdm {

void QdmConfig::validate() const {
    if (!(r_a >= 0.0) || !std::isfinite(r_a) || !(r_b >= 0.0) ||
        !std::isfinite(r_b)) {
        throw std::invalid_argument("QdmConfig: r_a and r_b must be >= 0");
    }
    if (!(theta >= 0.0 && theta < std::numbers::pi)) {
        throw std::invalid_argument("QdmConfig: theta must lie in [0, pi)");
    }
    if (!(eta_meter > 0.0 && eta_meter <= 1.0) ||
        !(eta_reference > 0.0 && eta_reference <= 1.0)) {
        throw std::invalid_argument("QdmConfig: efficiencies must be in (0, 1]");
    }
    if (!std::isfinite(bhd_a_angle)) {
        throw std::invalid_argument("QdmConfig: bhd_a_angle must be finite");
    }
}

void SignalSpec::validate() const {
    if (!(frequency_hz > 0.0)) {
        throw std::invalid_argument("SignalSpec: frequency must be > 0");
    }
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument("SignalSpec: amplitude must be >= 0");
    }
    if (!std::isfinite(angle_phi) || !std::isfinite(phase)) {
        throw std::invalid_argument("SignalSpec: angles must be finite");
    }
}

GaussianState build_output_state(const QdmConfig& config) {
    config.validate();
    GaussianState state = GaussianState::vacuum(2);
    // Beam a on mode 0 (squeezed along x), beam b on mode 1 (squeezed along
    // x_theta).
    state = squeezer(2, 0, config.r_a, 0.0).apply(state);
    state = squeezer(2, 1, config.r_b, config.theta).apply(state);
    // Entangler: mode 1 becomes the meter (b - a)/sqrt(2), mode 0 the
    // reference (b + a)/sqrt(2).
    state = beamsplitter(2, 0.5, 1, 0).apply(state);
    // Recombiner: mode 0 -> (ref - meter)/sqrt(2) = beam a  -> BHD A,
    //             mode 1 -> (ref + meter)/sqrt(2) = beam b  -> BHD B.
    state = beamsplitter(2, 0.5, 0, 1).apply(state);
    if (config.eta_meter < 1.0) {
        state = loss_channel(2, 0, config.eta_meter).apply(state);
    }
    if (config.eta_reference < 1.0) {
        state = loss_channel(2, 1, config.eta_reference).apply(state);
    }
    return state;
}

Eigen::Matrix2d joint_readout_covariance(const QdmConfig& config) {
    const GaussianState state = build_output_state(config);
    const Eigen::Vector2d ua(std::cos(config.bhd_a_angle),
                             std::sin(config.bhd_a_angle));
    const Eigen::Vector2d ub(std::cos(config.theta), std::sin(config.theta));
    const Eigen::Matrix2d caa = state.cov.block<2, 2>(0, 0);
    const Eigen::Matrix2d cbb = state.cov.block<2, 2>(2, 2);
    const Eigen::Matrix2d cab = state.cov.block<2, 2>(0, 2);
    Eigen::Matrix2d joint;
    joint(0, 0) = ua.dot(caa * ua);
    joint(1, 1) = ub.dot(cbb * ub);
    joint(0, 1) = ua.dot(cab * ub);
    joint(1, 0) = joint(0, 1);
    return joint;
}

SignalGains signal_transfer(const QdmConfig& config, const SignalSpec& signal) {
    config.validate();
    signal.validate();
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    SignalGains gains;
    gains.gain_a = std::sqrt(config.eta_meter) *
                   std::cos(signal.angle_phi - config.bhd_a_angle) * inv_sqrt2;
    gains.gain_b = std::sqrt(config.eta_reference) *
                   std::cos(signal.angle_phi - config.theta) * inv_sqrt2;
    return gains;
}

double single_mode_bound(double amp_x, double amp_p) {
    return 1.0 / (4.0 * amp_x * amp_x * amp_p * amp_p);
}

double arthurs_kelly_product(double r, double amp_x, double amp_p) {
    return (1.0 + std::cosh(2.0 * r)) /
           (2.0 * amp_x * amp_x * amp_p * amp_p);
}

double qdm_product(const QdmConfig& config, double amp_x, double amp_x_theta) {
    return std::exp(-2.0 * config.r_a) * std::exp(-2.0 * config.r_b) /
           (amp_x * amp_x * amp_x_theta * amp_x_theta);
}

double threshold_r() {
    return 0.5 * std::log(2.0);
}

AnalyticReport analyze(const QdmConfig& config,
                       const std::vector<SignalSpec>& signals) {
    config.validate();
    const Eigen::Matrix2d joint = joint_readout_covariance(config);
    AnalyticReport report;
    report.var_bhd_a = joint(0, 0);
    report.var_bhd_b = joint(1, 1);
    report.single_mode = single_mode_bound(1.0, 1.0);
    report.arthurs_kelly =
        arthurs_kelly_product(0.5 * (config.r_a + config.r_b), 1.0, 1.0);
    report.uncertainty_product = qdm_product(config, 1.0, 1.0);
    report.threshold = threshold_r();
    report.bound_label = (config.r_a > 0.0 || config.r_b > 0.0)
                             ? "entangled-dual-readout"
                             : "vacuum-simultaneous-readout";
    for (const SignalSpec& signal : signals) {
        const SignalGains gains = signal_transfer(config, signal);
        report.signals.push_back({signal, gains.gain_a, gains.gain_b});
    }
    return report;
}

}  // namespace qdm
