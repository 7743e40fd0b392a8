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

#include "qdm/veto.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace qdm {

/// Configuration or input-file problems; the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One declarative run description: topology, injected signals, acquisition
/// and detection settings plus output locations. All randomness flows from
/// acquisition.seed.
struct RunConfig {
    QdmConfig qdm;
    std::vector<SignalSpec> signals;
    AcquisitionConfig acquisition;
    DetectionParams detection;
    std::string output_dir = "out";
    bool write_records = false;

    void validate() const;
};

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

/// Shipped configurations: "fig3" (entangled dual readout with one science
/// and one parasitic line), "vacuum" (calibration), "threshold-scan"
/// (sweep-oriented copy of fig3). Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Spectrum files: a two-column CSV with a fixed header and fixed decimal
// formatting (byte-stable for identical inputs), plus a JSON sidecar
// carrying the estimator metadata.
void write_spectrum_csv(const std::string& csv_path, const Spectrum& spectrum);
void write_spectrum(const std::string& dir, const std::string& stem,
                    const Spectrum& spectrum);
Spectrum read_spectrum(const std::string& csv_path,
                       const std::string& meta_path);

// Detector records: raw little-endian IEEE-754 float64 samples plus a JSON
// sidecar with the acquisition settings.
void write_record(const std::string& dir, const std::string& stem,
                  const DetectorRecord& record);
DetectorRecord read_record(const std::string& raw_path,
                           const std::string& meta_path);

nlohmann::json to_json(const AnalyticReport& report);
nlohmann::json to_json(const VetoReport& report);

std::string signal_kind_name(SignalKind kind);
SignalKind signal_kind_from_name(const std::string& name);

}  // namespace qdm
