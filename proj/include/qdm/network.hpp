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

#include "qdm/gaussian.hpp"

#include <string>
#include <vector>

namespace qdm {

// The entangled dual-readout topology: two squeezed vacua (beam a squeezed
// along x, beam b squeezed along the rotated quadrature x_theta) interfere
// on a 50:50 beam splitter. One output probes the apparatus and picks up
// the classical signals; the other is kept as a reference. Recombining both
// on a second 50:50 beam splitter yields two output beams whose noise
// reduces exactly to the squeezed quadratures of a and b, read out by
// balanced homodyne detectors A (angle bhd_a_angle) and B (angle theta).
//
// All quadrature angles in this module are measured in detector A's readout
// frame: the science signal sits at phi = 0 there by convention.

struct QdmConfig {
    double r_a = 0.0;            ///< squeezing parameter of beam a
    double r_b = 0.0;            ///< squeezing parameter of beam b
    double theta = 0.0;          ///< relative squeezing / BHD B readout angle
    double eta_meter = 1.0;      ///< path efficiency of the BHD A beam
    double eta_reference = 1.0;  ///< path efficiency of the BHD B beam
    double bhd_a_angle = 0.0;    ///< readout quadrature of detector A

    void validate() const;
};

enum class SignalKind { science, parasitic };

/// A classical sinusoidal modulation injected into the meter beam. `kind`
/// is a bookkeeping label only; no numeric result may depend on it.
struct SignalSpec {
    double frequency_hz = 0.0;
    double amplitude = 0.0;  ///< peak quadrature displacement
    double angle_phi = 0.0;  ///< quadrature angle at the interferometer output
    SignalKind kind = SignalKind::science;
    double phase = 0.0;      ///< modulation phase at t = 0

    void validate() const;
};

/// Amplitude transfer factors from an injected signal to the two detector
/// outputs. The delivered amplitude at a detector is amplitude * gain.
struct SignalGains {
    double gain_a = 0.0;
    double gain_b = 0.0;
};

/// Propagates the two squeezed beams through the full beam-splitter network
/// and returns the joint two-mode output state (mode 0 feeds BHD A, mode 1
/// feeds BHD B), including loss channels.
GaussianState build_output_state(const QdmConfig& config);

/// 2x2 covariance of the two homodyne readouts (A at bhd_a_angle, B at
/// theta), taken from build_output_state.
Eigen::Matrix2d joint_readout_covariance(const QdmConfig& config);

/// Amplitude transfer of a signal at quadrature angle phi:
///   gain_a = sqrt(eta_meter)     * cos(phi - bhd_a_angle) / sqrt(2)
///   gain_b = sqrt(eta_reference) * cos(phi - theta)       / sqrt(2)
/// The 1/sqrt(2) is the recombining beam splitter dividing the signal
/// between the two detectors.
SignalGains signal_transfer(const QdmConfig& config, const SignalSpec& signal);

/// Signal-normalized Heisenberg bound for a single-beam readout of both
/// quadratures: 1 / (4 |X|^2 |P|^2).
double single_mode_bound(double amp_x, double amp_p);

/// Uncertainty product for the split-beam simultaneous readout of one
/// (possibly squeezed) beam: (1 + cosh 2r) / (2 |X|^2 |P|^2). Minimized by
/// r = 0, where it is exactly four times single_mode_bound.
double arthurs_kelly_product(double r, double amp_x, double amp_p);

/// Uncertainty product of the entangled dual readout:
/// e^{-2 r_a} e^{-2 r_b} / (|X|^2 |X_theta|^2). Not bounded from below as
/// the squeezing grows.
double qdm_product(const QdmConfig& config, double amp_x, double amp_x_theta);

/// Squeezing parameter at which the entangled dual readout crosses the
/// single-beam Heisenberg bound for r_a = r_b and unit signals; the
/// solution of e^{-4r} = 1/4, i.e. ln(2)/2.
double threshold_r();

struct SignalGainReport {
    SignalSpec signal;
    double gain_a = 0.0;
    double gain_b = 0.0;
};

/// Summary of noise variances, per-signal gains and the uncertainty
/// products for one configuration (unit signal amplitudes for the bounds).
struct AnalyticReport {
    double var_bhd_a = 0.0;
    double var_bhd_b = 0.0;
    double single_mode = 0.0;
    double arthurs_kelly = 0.0;   ///< evaluated at r = (r_a + r_b)/2
    double uncertainty_product = 0.0;  ///< the dual-readout product
    double threshold = 0.0;
    std::string bound_label;
    std::vector<SignalGainReport> signals;
};

AnalyticReport analyze(const QdmConfig& config,
                       const std::vector<SignalSpec>& signals);

}  // namespace qdm
