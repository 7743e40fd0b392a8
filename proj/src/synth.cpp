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

#include "qdm/synth.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qdm {

namespace {

constexpr double kVacuumVariance = 0.5;

// First-order low-pass via the bilinear transform with the corner
// frequency prewarped, so |H(corner)|^2 = 1/2 exactly on the sampled grid.
void apply_one_pole_lowpass(std::vector<double>& x, double corner_hz,
                            double sample_rate_hz) {
    const double warped =
        std::tan(std::numbers::pi * corner_hz / sample_rate_hz);
    const double b = warped / (1.0 + warped);
    const double a = (1.0 - warped) / (1.0 + warped);
    double prev_in = 0.0;
    double prev_out = 0.0;
    for (double& sample : x) {
        const double out = b * (sample + prev_in) + a * prev_out;
        prev_in = sample;
        prev_out = out;
        sample = out;
    }
}

}  // namespace

Window window_from_name(const std::string& name) {
    if (name == "rectangular" || name == "rect") return Window::rectangular;
    if (name == "hann") return Window::hann;
    if (name == "hamming") return Window::hamming;
    if (name == "blackman") return Window::blackman;
    throw std::invalid_argument(
        "unknown window '" + name +
        "' (expected rectangular, hann, hamming, or blackman)");
}

std::string window_name(Window window) {
    switch (window) {
        case Window::rectangular: return "rectangular";
        case Window::hann: return "hann";
        case Window::hamming: return "hamming";
        case Window::blackman: return "blackman";
    }
    return "unknown";
}

std::vector<double> make_window(Window window, std::size_t length) {
    std::vector<double> w(length, 1.0);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
    switch (window) {
        case Window::rectangular:
            break;
        case Window::hann:
            for (std::size_t n = 0; n < length; ++n) {
                w[n] = 0.5 - 0.5 * std::cos(step * static_cast<double>(n));
            }
            break;
        case Window::hamming:
            for (std::size_t n = 0; n < length; ++n) {
                w[n] = 0.54 - 0.46 * std::cos(step * static_cast<double>(n));
            }
            break;
        case Window::blackman:
            for (std::size_t n = 0; n < length; ++n) {
                const double arg = step * static_cast<double>(n);
                w[n] = 0.42 - 0.5 * std::cos(arg) + 0.08 * std::cos(2.0 * arg);
            }
            break;
    }
    return w;
}

double window_enbw_hz(Window window, std::size_t length,
                      double sample_rate_hz) {
    const std::vector<double> w = make_window(window, length);
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (double v : w) {
        sum_w += v;
        sum_w2 += v * v;
    }
    return sample_rate_hz * sum_w2 / (sum_w * sum_w);
}

double welch_averaging_efficiency(Window window, std::size_t length,
                                  int n_averages) {
    if (n_averages <= 1) {
        return 1.0;
    }
    const std::vector<double> w = make_window(window, length);
    const std::size_t hop = length / 2;
    double sum_w2 = 0.0;
    double overlap = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
        sum_w2 += w[i] * w[i];
        if (i + hop < length) {
            overlap += w[i] * w[i + hop];
        }
    }
    const double rho = (overlap / sum_w2) * (overlap / sum_w2);
    return 1.0 / (1.0 + 2.0 * rho * (n_averages - 1.0) /
                            static_cast<double>(n_averages));
}

std::size_t AcquisitionConfig::segment_length() const {
    return static_cast<std::size_t>(std::llround(sample_rate_hz / rbw_hz));
}

std::size_t AcquisitionConfig::n_samples() const {
    return static_cast<std::size_t>(std::llround(sample_rate_hz * duration_s));
}

int AcquisitionConfig::achievable_averages() const {
    const std::size_t total = n_samples();
    const std::size_t segment = segment_length();
    if (total < segment || segment == 0) {
        return 0;
    }
    const std::size_t hop = segment / 2;
    return static_cast<int>((total - segment) / hop) + 1;
}

void AcquisitionConfig::validate(const std::vector<SignalSpec>& signals) const {
    if (!(sample_rate_hz > 0.0)) {
        throw std::invalid_argument("acquisition: sample_rate must be > 0");
    }
    if (!(duration_s > 0.0)) {
        throw std::invalid_argument("acquisition: nonpositive duration");
    }
    if (!(rbw_hz > 0.0)) {
        throw std::invalid_argument("acquisition: rbw must be > 0");
    }
    if (vbw_averages < 1) {
        throw std::invalid_argument("acquisition: vbw_averages must be >= 1");
    }
    if (detector_slope_hz < 0.0 || !std::isfinite(detector_slope_hz)) {
        throw std::invalid_argument(
            "acquisition: detector_slope must be >= 0 (0 disables it)");
    }
    const std::size_t segment = segment_length();
    if (segment < 8) {
        throw std::invalid_argument(
            "acquisition: rbw too large for the sample rate (segment length " +
            std::to_string(segment) + " < 8)");
    }
    const int available = achievable_averages();
    if (available < vbw_averages) {
        const std::size_t hop = segment / 2;
        const double needed =
            static_cast<double>(segment +
                                hop * static_cast<std::size_t>(vbw_averages - 1)) /
            sample_rate_hz;
        throw std::invalid_argument(
            "acquisition: duration supports only " + std::to_string(available) +
            " averaged segments at this rbw; extend duration to >= " +
            std::to_string(needed) + " s or raise rbw");
    }
    for (const SignalSpec& signal : signals) {
        signal.validate();
        if (signal.frequency_hz >= 0.5 * sample_rate_hz) {
            throw std::invalid_argument(
                "acquisition: signal at " + std::to_string(signal.frequency_hz) +
                " Hz aliases (Nyquist is " +
                std::to_string(0.5 * sample_rate_hz) +
                " Hz); raise sample_rate or drop the signal");
        }
    }
}

double Spectrum::bin_width_hz() const {
    return frequencies_hz.size() > 1 ? frequencies_hz[1] - frequencies_hz[0]
                                     : 0.0;
}

void Spectrum::validate() const {
    if (frequencies_hz.size() != power_db_rel_vacuum.size()) {
        throw std::invalid_argument("Spectrum: array length mismatch");
    }
    for (std::size_t i = 1; i < frequencies_hz.size(); ++i) {
        if (!(frequencies_hz[i] > frequencies_hz[i - 1])) {
            throw std::invalid_argument(
                "Spectrum: frequencies must be strictly increasing");
        }
    }
}

std::pair<std::vector<double>, std::vector<double>> sample_joint_noise(
    const Eigen::Matrix2d& cov, std::size_t n, std::uint64_t seed) {
    const double asym = std::abs(cov(0, 1) - cov(1, 0));
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (asym > 1e-9 * scale) {
        throw std::invalid_argument("sample_joint_noise: covariance asymmetric");
    }
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    if (cov(0, 0) < -1e-12 * scale || cov(1, 1) < -1e-12 * scale ||
        det < -1e-12 * scale * scale) {
        throw std::invalid_argument(
            "sample_joint_noise: covariance not positive semidefinite");
    }
    const double l00 = std::sqrt(std::max(cov(0, 0), 0.0));
    const double l10 = l00 > 0.0 ? cov(0, 1) / l00 : 0.0;
    const double l11 = std::sqrt(std::max(cov(1, 1) - l10 * l10, 0.0));

    std::vector<double> first(n);
    std::vector<double> second(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double z0 = normal(rng);
        const double z1 = normal(rng);
        first[i] = l00 * z0;
        second[i] = l10 * z0 + l11 * z1;
    }
    return {std::move(first), std::move(second)};
}

std::pair<DetectorRecord, DetectorRecord> synthesize(
    const QdmConfig& config, const std::vector<SignalSpec>& signals,
    const AcquisitionConfig& acq) {
    config.validate();
    acq.validate(signals);

    const std::size_t n = acq.n_samples();
    auto [samples_a, samples_b] =
        sample_joint_noise(joint_readout_covariance(config), n, acq.seed);

    for (const SignalSpec& signal : signals) {
        const SignalGains gains = signal_transfer(config, signal);
        const double amp_a = signal.amplitude * gains.gain_a;
        const double amp_b = signal.amplitude * gains.gain_b;
        const double step =
            2.0 * std::numbers::pi * signal.frequency_hz / acq.sample_rate_hz;
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = step * static_cast<double>(i) + signal.phase;
            const double c = std::cos(arg);
            samples_a[i] += amp_a * c;
            samples_b[i] += amp_b * c;
        }
    }

    if (acq.detector_slope_hz > 0.0) {
        apply_one_pole_lowpass(samples_a, acq.detector_slope_hz,
                               acq.sample_rate_hz);
        apply_one_pole_lowpass(samples_b, acq.detector_slope_hz,
                               acq.sample_rate_hz);
    }

    DetectorRecord record_a{std::move(samples_a), DetectorId::a,
                            config.bhd_a_angle, acq};
    DetectorRecord record_b{std::move(samples_b), DetectorId::b, config.theta,
                            acq};
    return {std::move(record_a), std::move(record_b)};
}

Spectrum estimate_psd(const DetectorRecord& record) {
    const AcquisitionConfig& acq = record.acquisition;
    const std::size_t length = acq.segment_length();
    const std::size_t total = record.samples.size();
    if (length < 8) {
        throw std::runtime_error("estimate_psd: segment length below 8 samples");
    }
    if (total < length) {
        throw std::runtime_error(
            "estimate_psd: record too short for one segment (" +
            std::to_string(total) + " < " + std::to_string(length) + ")");
    }
    const std::size_t hop = length / 2;
    const int segments = static_cast<int>((total - length) / hop) + 1;
    if (segments < acq.vbw_averages) {
        throw std::runtime_error(
            "estimate_psd: record supports only " + std::to_string(segments) +
            " segments, fewer than the requested " +
            std::to_string(acq.vbw_averages) + " averages");
    }

    const std::vector<double> window = make_window(acq.window, length);
    double sum_w2 = 0.0;
    for (double w : window) {
        sum_w2 += w * w;
    }

    const std::size_t bins = length / 2 + 1;
    std::vector<double> accum(bins, 0.0);

    double* in = fftw_alloc_real(length);
    fftw_complex* out = fftw_alloc_complex(bins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(length), in, out,
                                          FFTW_ESTIMATE);
    for (int k = 0; k < segments; ++k) {
        const std::size_t offset = static_cast<std::size_t>(k) * hop;
        for (std::size_t i = 0; i < length; ++i) {
            in[i] = record.samples[offset + i] * window[i];
        }
        fftw_execute(plan);
        for (std::size_t i = 0; i < bins; ++i) {
            accum[i] += out[i][0] * out[i][0] + out[i][1] * out[i][1];
        }
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);

    // Normalize each bin by the white-noise expectation of a vacuum input
    // (variance 1/2), which makes the vacuum floor read 0 dB irrespective
    // of rbw, window, and sample rate.
    const double vacuum_bin_power =
        static_cast<double>(segments) * sum_w2 * kVacuumVariance;

    Spectrum spectrum;
    spectrum.frequencies_hz.resize(bins);
    spectrum.power_db_rel_vacuum.resize(bins);
    const double bin_width = acq.sample_rate_hz / static_cast<double>(length);
    for (std::size_t i = 0; i < bins; ++i) {
        spectrum.frequencies_hz[i] = bin_width * static_cast<double>(i);
        const double rel = std::max(accum[i] / vacuum_bin_power, 1e-300);
        spectrum.power_db_rel_vacuum[i] = 10.0 * std::log10(rel);
    }
    spectrum.n_averages = segments;
    spectrum.rbw_effective_hz =
        window_enbw_hz(acq.window, length, acq.sample_rate_hz);
    spectrum.averaging_efficiency =
        welch_averaging_efficiency(acq.window, length, segments);
    return spectrum;
}

}  // namespace qdm
