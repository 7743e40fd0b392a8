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

#include "qdm/synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qdm {

// The veto works on ratios: a science signal (angle 0 in detector A's frame)
// projects into detector B with a calculable power factor cos^2(theta). Any
// peak whose measured B power deviates significantly from that projection is
// parasitic. The projection assumes symmetric path efficiencies; with
// eta_meter != eta_reference fold the ratio into the floors beforehand.

struct DetectionParams {
    double peak_sigma = 5.0;      ///< peak-finding threshold over the floor
    double classify_sigma = 3.0;  ///< parasitic significance threshold
    double resolve_sigma = 3.0;   ///< min significance for a usable A excess
    int floor_window_bins = 51;   ///< median-filter width for the floor
    double min_theta_rad = 0.01;  ///< below this, no orthogonal information
    int min_averages = 8;         ///< fewer averages than this is an error

    void validate() const;
};

enum class PeakClass { science, parasitic, unresolved };

std::string peak_class_name(PeakClass c);

/// One spectral peak as seen by both detectors, with the local noise floors.
struct PeakObservation {
    double frequency_hz = 0.0;
    double power_a_db = 0.0;
    double power_b_db = 0.0;
    double floor_a_db = 0.0;
    double floor_b_db = 0.0;
    int n_averages = 1;
};

/// Candidate quadrature angles for a signal, from the two projected powers.
/// Power spectra only fix |cos| magnitudes, so the estimate is a two-fold
/// ambiguous set in [0, pi); it is reported, never silently resolved.
struct AngleEstimate {
    std::vector<double> candidates_rad;
    double fit_residual = 0.0;
    bool consistent = false;
};

struct PeakVerdict {
    PeakObservation observation;
    double expected_b_db = 0.0;  ///< projected B power under the science hypothesis
    double residual_db = 0.0;    ///< measured minus expected at detector B
    double significance = 0.0;   ///< |residual| / periodogram standard error
    PeakClass classification = PeakClass::unresolved;
    AngleEstimate angle;
};

struct VetoReport {
    double theta = 0.0;
    DetectionParams params;
    int n_averages = 0;
    std::vector<PeakVerdict> peaks;
};

/// Standard error, in dB, of one averaged-periodogram bin whose mean power
/// sits excess_lin above a unit floor (chi-squared statistics of k_eff
/// averaged segments).
double periodogram_db_sigma(double excess_lin, double k_eff);

/// Floor-subtracted excess ratio (P - F)/F in linear units; may be negative
/// for bins fluctuating below the floor.
double excess_ratio(double power_db, double floor_db);

/// Projects a resolved detector-A peak into detector B under the
/// pure-science hypothesis (angle 0): the excess power scales by
/// cos^2(theta) and rides on B's noise floor. Returns nullopt when the A
/// excess is below resolve_excess_db (peak indistinguishable from floor).
std::optional<double> expected_projection(double power_a_db, double floor_a_db,
                                          double floor_b_db, double theta,
                                          double resolve_excess_db);

/// Median-filtered local noise floor, one value per bin (dB).
std::vector<double> estimate_floor_db(const std::vector<double>& power_db,
                                      int window_bins);

/// Bins that are local maxima at least threshold_db above the local floor.
std::vector<std::size_t> find_peak_bins(const std::vector<double>& power_db,
                                        const std::vector<double>& floor_db,
                                        double threshold_db);

/// Solves |cos(phi - theta)| / |cos(phi)| from the two linear excess powers.
AngleEstimate infer_parasitic_angle(double excess_a_lin, double excess_b_lin,
                                    double theta);

/// Judges one peak observation: science-hypothesis projection, residual,
/// significance and classification. k_eff_a/b are the effective averaging
/// counts of the two spectra.
PeakVerdict assess_peak(const PeakObservation& obs, double theta,
                        const DetectionParams& params, double k_eff_a,
                        double k_eff_b);

/// Full veto: finds peaks in either spectrum, projects each into detector B
/// under the science hypothesis, and classifies by residual significance.
/// Throws std::invalid_argument on mismatched frequency grids or too few
/// averages for the requested confidence.
VetoReport classify_peaks(const Spectrum& spec_a, const Spectrum& spec_b,
                          double theta, const DetectionParams& params);

}  // namespace qdm
