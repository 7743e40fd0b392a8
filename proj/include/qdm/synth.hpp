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

#include "qdm/network.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qdm {

enum class Window { rectangular, hann, hamming, blackman };

Window window_from_name(const std::string& name);
std::string window_name(Window window);

/// Periodic (DFT-even) window coefficients.
std::vector<double> make_window(Window window, std::size_t length);

/// Equivalent noise bandwidth of the windowed periodogram in Hz.
double window_enbw_hz(Window window, std::size_t length, double sample_rate_hz);

/// Variance-reduction efficiency of averaging n 50%-overlapped windowed
/// periodograms relative to n independent ones (1 for a single segment).
double welch_averaging_efficiency(Window window, std::size_t length,
                                  int n_averages);

/// Spectrum-analyzer style acquisition settings. The resolution bandwidth
/// maps to the periodogram segment length (segment = sample_rate / rbw,
/// 50% overlap); the video bandwidth maps to the minimum number of averaged
/// segments the record must support.
struct AcquisitionConfig {
    double sample_rate_hz = 50e6;
    double duration_s = 0.0;
    double rbw_hz = 10e3;
    int vbw_averages = 1;
    Window window = Window::hann;
    std::uint64_t seed = 0;
    /// Optional first-order low-pass corner modeling the detector transfer
    /// function; 0 disables the filter.
    double detector_slope_hz = 0.0;

    std::size_t segment_length() const;
    std::size_t n_samples() const;
    /// Number of 50%-overlapped segments the record supports.
    int achievable_averages() const;

    void validate(const std::vector<SignalSpec>& signals = {}) const;
};

enum class DetectorId { a, b };

/// Sampled output of one balanced homodyne detector, in quadrature units
/// (vacuum noise has per-sample variance 1/2).
struct DetectorRecord {
    std::vector<double> samples;
    DetectorId detector = DetectorId::a;
    double readout_angle = 0.0;
    AcquisitionConfig acquisition;
};

/// Averaged-periodogram power spectral density, stored per bin as dB
/// relative to the vacuum noise floor. A vacuum record reads 0 dB at every
/// bin independent of rbw, window, and sample rate. The absolute one-sided
/// PSD in quadrature units^2/Hz is 10^(dB/10) / sample_rate.
struct Spectrum {
    std::vector<double> frequencies_hz;
    std::vector<double> power_db_rel_vacuum;
    int n_averages = 0;
    double rbw_effective_hz = 0.0;     ///< equivalent noise bandwidth
    double averaging_efficiency = 1.0; ///< effective averages = n_averages * this

    double bin_width_hz() const;
    void validate() const;
};

/// Draws n correlated sample pairs from a bivariate normal with the given
/// covariance (Cholesky factorization, fixed draw order for determinism).
std::pair<std::vector<double>, std::vector<double>> sample_joint_noise(
    const Eigen::Matrix2d& cov, std::size_t n, std::uint64_t seed);

/// Synthesizes both detector time series: correlated stationary Gaussian
/// noise from the joint readout covariance plus every signal delivered
/// through its transfer gains, optionally shaped by the detector slope.
std::pair<DetectorRecord, DetectorRecord> synthesize(
    const QdmConfig& config, const std::vector<SignalSpec>& signals,
    const AcquisitionConfig& acq);

/// Welch estimate: windowed 50%-overlapped segments, all complete segments
/// averaged. Throws std::runtime_error if the record is shorter than one
/// segment or supports fewer segments than vbw_averages.
Spectrum estimate_psd(const DetectorRecord& record);

}  // namespace qdm
