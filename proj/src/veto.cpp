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

#include "qdm/veto.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdm {

namespace {

constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;  // 4.3429...

double db_to_lin(double db) {
    return std::pow(10.0, db / 10.0);
}

double lin_to_db(double lin) {
    return 10.0 * std::log10(std::max(lin, 1e-300));
}

// Merge candidate bins that belong to one spectral line (window main lobe
// spans a few bins); keep the bin with the largest summed excess.
std::vector<std::size_t> cluster_bins(std::vector<std::size_t> bins,
                                      const std::vector<double>& score,
                                      std::size_t radius) {
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    std::vector<std::size_t> out;
    std::size_t i = 0;
    while (i < bins.size()) {
        std::size_t best = bins[i];
        std::size_t j = i + 1;
        while (j < bins.size() && bins[j] - bins[j - 1] <= radius) {
            if (score[bins[j]] > score[best]) {
                best = bins[j];
            }
            ++j;
        }
        out.push_back(best);
        i = j;
    }
    return out;
}

}  // namespace

void DetectionParams::validate() const {
    if (!(peak_sigma > 0.0) || !(classify_sigma > 0.0) || !(resolve_sigma > 0.0)) {
        throw std::invalid_argument("detection: sigma thresholds must be > 0");
    }
    if (floor_window_bins < 3) {
        throw std::invalid_argument("detection: floor_window_bins must be >= 3");
    }
    if (!(min_theta_rad >= 0.0)) {
        throw std::invalid_argument("detection: min_theta_rad must be >= 0");
    }
    if (min_averages < 1) {
        throw std::invalid_argument("detection: min_averages must be >= 1");
    }
}

std::string peak_class_name(PeakClass c) {
    switch (c) {
        case PeakClass::science: return "science";
        case PeakClass::parasitic: return "parasitic";
        case PeakClass::unresolved: return "unresolved";
    }
    return "unresolved";
}

double periodogram_db_sigma(double excess_lin, double k_eff) {
    const double e = std::max(excess_lin, 0.0);
    return kDbPerNeper * std::sqrt(2.0 * e + 1.0) /
           ((1.0 + e) * std::sqrt(std::max(k_eff, 1.0)));
}

double excess_ratio(double power_db, double floor_db) {
    return db_to_lin(power_db - floor_db) - 1.0;
}

std::optional<double> expected_projection(double power_a_db, double floor_a_db,
                                          double floor_b_db, double theta,
                                          double resolve_excess_db) {
    if (power_a_db - floor_a_db < resolve_excess_db) {
        return std::nullopt;
    }
    const double signal_a =
        std::max(db_to_lin(power_a_db) - db_to_lin(floor_a_db), 0.0);
    const double projection = std::cos(theta) * std::cos(theta);
    return lin_to_db(db_to_lin(floor_b_db) + signal_a * projection);
}

std::vector<double> estimate_floor_db(const std::vector<double>& power_db,
                                      int window_bins) {
    const std::size_t n = power_db.size();
    std::vector<double> floor(n, 0.0);
    const std::size_t half = static_cast<std::size_t>(window_bins) / 2;
    std::vector<double> scratch;
    scratch.reserve(2 * half + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        scratch.assign(power_db.begin() + static_cast<std::ptrdiff_t>(lo),
                       power_db.begin() + static_cast<std::ptrdiff_t>(hi));
        auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(scratch.size() / 2);
        std::nth_element(scratch.begin(), mid, scratch.end());
        floor[i] = *mid;
    }
    return floor;
}

std::vector<std::size_t> find_peak_bins(const std::vector<double>& power_db,
                                        const std::vector<double>& floor_db,
                                        double threshold_db) {
    std::vector<std::size_t> peaks;
    const std::size_t n = power_db.size();
    // Skip the DC and Nyquist bins; an isolated line never peaks there for
    // the supported signal grid.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (power_db[i] - floor_db[i] < threshold_db) {
            continue;
        }
        if (power_db[i] >= power_db[i - 1] && power_db[i] >= power_db[i + 1]) {
            peaks.push_back(i);
        }
    }
    return peaks;
}

AngleEstimate infer_parasitic_angle(double excess_a_lin, double excess_b_lin,
                                    double theta) {
    AngleEstimate estimate;
    const double ea = std::max(excess_a_lin, 0.0);
    const double eb = std::max(excess_b_lin, 0.0);
    if (ea <= 0.0 && eb <= 0.0) {
        return estimate;  // nothing to invert
    }
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    const auto wrap = [](double phi) {
        phi = std::fmod(phi, std::numbers::pi);
        if (phi < 0.0) phi += std::numbers::pi;
        if (phi > std::numbers::pi - 1e-9) phi = 0.0;  // pi is the same ray
        return phi;
    };
    if (std::abs(sin_t) < 1e-12) {
        // Both detectors see the same projection; the ratio must be 1 and
        // the angle is unconstrained.
        estimate.consistent = false;
        estimate.fit_residual =
            ea > 0.0 ? std::abs(std::sqrt(eb / ea) - 1.0) : 1.0;
        return estimate;
    }
    if (ea <= 0.0) {
        // No power at detector A: the signal is orthogonal to its readout.
        estimate.candidates_rad = {wrap(std::numbers::pi / 2.0)};
        estimate.consistent = true;
        return estimate;
    }
    const double ratio = std::sqrt(eb / ea);
    for (double sign : {+1.0, -1.0}) {
        const double phi = wrap(std::atan2(sign * ratio - cos_t, sin_t));
        const double predicted = std::abs(std::cos(phi - theta));
        const double measured = ratio * std::abs(std::cos(phi));
        estimate.fit_residual =
            std::max(estimate.fit_residual, std::abs(predicted - measured));
        const bool duplicate =
            std::any_of(estimate.candidates_rad.begin(),
                        estimate.candidates_rad.end(), [phi](double other) {
                            return std::abs(other - phi) < 1e-9;
                        });
        if (!duplicate) {
            estimate.candidates_rad.push_back(phi);
        }
    }
    estimate.consistent = estimate.fit_residual < 1e-3;
    return estimate;
}

PeakVerdict assess_peak(const PeakObservation& obs, double theta,
                        const DetectionParams& params, double k_eff_a,
                        double k_eff_b) {
    PeakVerdict verdict;
    verdict.observation = obs;

    const double ea = excess_ratio(obs.power_a_db, obs.floor_a_db);
    const double eb = excess_ratio(obs.power_b_db, obs.floor_b_db);
    const double sig_a =
        std::max(ea, 0.0) /
        (std::sqrt(2.0 * std::max(ea, 0.0) + 1.0) / std::sqrt(k_eff_a));
    const bool resolved_a = sig_a >= params.resolve_sigma;

    // Projected B power under the science hypothesis; an unresolved A peak
    // projects nothing, so the expectation is B's own floor.
    const double projection = std::cos(theta) * std::cos(theta);
    const double floor_a_lin = db_to_lin(obs.floor_a_db);
    const double floor_b_lin = db_to_lin(obs.floor_b_db);
    const double projected_signal =
        resolved_a ? std::max(ea, 0.0) * floor_a_lin * projection : 0.0;
    const double expected_b_lin = floor_b_lin + projected_signal;
    verdict.expected_b_db = lin_to_db(expected_b_lin);
    verdict.residual_db = obs.power_b_db - verdict.expected_b_db;

    const double sigma_b = periodogram_db_sigma(eb, k_eff_b);
    double sigma_proj = 0.0;
    if (resolved_a) {
        const double sigma_a_abs = floor_a_lin *
                                   std::sqrt(2.0 * std::max(ea, 0.0) + 1.0) /
                                   std::sqrt(k_eff_a);
        sigma_proj = kDbPerNeper * projection * sigma_a_abs / expected_b_lin;
    }
    const double sigma_res =
        std::sqrt(sigma_b * sigma_b + sigma_proj * sigma_proj);
    verdict.significance = std::abs(verdict.residual_db) / sigma_res;

    const bool theta_usable =
        std::abs(std::sin(theta)) >= std::sin(params.min_theta_rad);
    if (!theta_usable) {
        verdict.classification = PeakClass::unresolved;
    } else if (verdict.significance > params.classify_sigma) {
        verdict.classification = PeakClass::parasitic;
    } else {
        verdict.classification =
            resolved_a ? PeakClass::science : PeakClass::unresolved;
    }

    verdict.angle = infer_parasitic_angle(std::max(ea, 0.0) * floor_a_lin,
                                          std::max(eb, 0.0) * floor_b_lin,
                                          theta);
    return verdict;
}

VetoReport classify_peaks(const Spectrum& spec_a, const Spectrum& spec_b,
                          double theta, const DetectionParams& params) {
    params.validate();
    spec_a.validate();
    spec_b.validate();
    if (spec_a.frequencies_hz.size() != spec_b.frequencies_hz.size()) {
        throw std::invalid_argument("classify_peaks: frequency grids differ");
    }
    for (std::size_t i = 0; i < spec_a.frequencies_hz.size(); ++i) {
        if (std::abs(spec_a.frequencies_hz[i] - spec_b.frequencies_hz[i]) >
            1e-6 * std::max(1.0, spec_a.frequencies_hz.back())) {
            throw std::invalid_argument("classify_peaks: frequency grids differ");
        }
    }
    const int n_avg = std::min(spec_a.n_averages, spec_b.n_averages);
    if (n_avg < params.min_averages) {
        throw std::invalid_argument(
            "classify_peaks: " + std::to_string(n_avg) +
            " averages are insufficient for the requested confidence (need >= " +
            std::to_string(params.min_averages) + ")");
    }
    const double k_eff_a = spec_a.n_averages * spec_a.averaging_efficiency;
    const double k_eff_b = spec_b.n_averages * spec_b.averaging_efficiency;

    const auto& pa = spec_a.power_db_rel_vacuum;
    const auto& pb = spec_b.power_db_rel_vacuum;
    const std::vector<double> floor_a =
        estimate_floor_db(pa, params.floor_window_bins);
    const std::vector<double> floor_b =
        estimate_floor_db(pb, params.floor_window_bins);

    const double sigma_floor_a = periodogram_db_sigma(0.0, k_eff_a);
    const double sigma_floor_b = periodogram_db_sigma(0.0, k_eff_b);
    std::vector<std::size_t> candidates =
        find_peak_bins(pa, floor_a, params.peak_sigma * sigma_floor_a);
    const std::vector<std::size_t> candidates_b =
        find_peak_bins(pb, floor_b, params.peak_sigma * sigma_floor_b);
    candidates.insert(candidates.end(), candidates_b.begin(),
                      candidates_b.end());

    std::vector<double> score(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        score[i] = (pa[i] - floor_a[i]) + (pb[i] - floor_b[i]);
    }
    const std::vector<std::size_t> bins = cluster_bins(candidates, score, 2);

    VetoReport report;
    report.theta = theta;
    report.params = params;
    report.n_averages = n_avg;

    for (std::size_t bin : bins) {
        const PeakObservation obs{spec_a.frequencies_hz[bin], pa[bin], pb[bin],
                                  floor_a[bin], floor_b[bin], n_avg};
        report.peaks.push_back(
            assess_peak(obs, theta, params, k_eff_a, k_eff_b));
    }
    return report;
}

}  // namespace qdm
