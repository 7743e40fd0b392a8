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

#include "qdm/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qdm {

namespace {

using nlohmann::json;

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) {
        throw ConfigError("missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

json section(const json& j, const std::string& key) {
    if (!j.contains(key)) {
        throw ConfigError("missing section '" + key + "'");
    }
    if (!j.at(key).is_object()) {
        throw ConfigError("section '" + key + "' must be an object");
    }
    return j.at(key);
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return out;
}

void append_le64(std::string& buffer, double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int byte = 0; byte < 8; ++byte) {
        buffer.push_back(static_cast<char>((bits >> (8 * byte)) & 0xff));
    }
}

double parse_le64(const char* bytes) {
    std::uint64_t bits = 0;
    for (int byte = 7; byte >= 0; --byte) {
        bits = (bits << 8) |
               static_cast<std::uint8_t>(bytes[byte]);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

std::string signal_kind_name(SignalKind kind) {
    return kind == SignalKind::science ? "science" : "parasitic";
}

SignalKind signal_kind_from_name(const std::string& name) {
    if (name == "science") return SignalKind::science;
    if (name == "parasitic") return SignalKind::parasitic;
    throw ConfigError("unknown signal kind '" + name +
                      "' (expected science or parasitic)");
}

void RunConfig::validate() const {
    qdm.validate();
    for (const SignalSpec& signal : signals) {
        signal.validate();
    }
    acquisition.validate(signals);
    detection.validate();
    if (output_dir.empty()) {
        throw ConfigError("output_dir must not be empty");
    }
}

json to_json(const RunConfig& config) {
    json signals = json::array();
    for (const SignalSpec& signal : config.signals) {
        signals.push_back({{"frequency_hz", signal.frequency_hz},
                           {"amplitude", signal.amplitude},
                           {"angle_phi", signal.angle_phi},
                           {"kind", signal_kind_name(signal.kind)},
                           {"phase", signal.phase}});
    }
    return json{
        {"schema_version", kConfigSchemaVersion},
        {"qdm",
         {{"r_a", config.qdm.r_a},
          {"r_b", config.qdm.r_b},
          {"theta", config.qdm.theta},
          {"eta_meter", config.qdm.eta_meter},
          {"eta_reference", config.qdm.eta_reference},
          {"bhd_a_angle", config.qdm.bhd_a_angle}}},
        {"signals", signals},
        {"acquisition",
         {{"sample_rate_hz", config.acquisition.sample_rate_hz},
          {"duration_s", config.acquisition.duration_s},
          {"rbw_hz", config.acquisition.rbw_hz},
          {"vbw_averages", config.acquisition.vbw_averages},
          {"window", window_name(config.acquisition.window)},
          {"seed", config.acquisition.seed},
          {"detector_slope_hz", config.acquisition.detector_slope_hz}}},
        {"detection",
         {{"peak_sigma", config.detection.peak_sigma},
          {"classify_sigma", config.detection.classify_sigma},
          {"resolve_sigma", config.detection.resolve_sigma},
          {"floor_window_bins", config.detection.floor_window_bins},
          {"min_theta_rad", config.detection.min_theta_rad},
          {"min_averages", config.detection.min_averages}}},
        {"output_dir", config.output_dir},
        {"write_records", config.write_records}};
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    const int version = field_or<int>(j, "schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion) {
        throw ConfigError("unsupported schema_version " +
                          std::to_string(version));
    }
    RunConfig config;

    const json q = section(j, "qdm");
    config.qdm.r_a = require<double>(q, "r_a");
    config.qdm.r_b = require<double>(q, "r_b");
    config.qdm.theta = require<double>(q, "theta");
    config.qdm.eta_meter = field_or<double>(q, "eta_meter", 1.0);
    config.qdm.eta_reference = field_or<double>(q, "eta_reference", 1.0);
    config.qdm.bhd_a_angle = field_or<double>(q, "bhd_a_angle", 0.0);

    if (j.contains("signals")) {
        if (!j.at("signals").is_array()) {
            throw ConfigError("'signals' must be an array");
        }
        for (const json& s : j.at("signals")) {
            SignalSpec signal;
            signal.frequency_hz = require<double>(s, "frequency_hz");
            signal.amplitude = require<double>(s, "amplitude");
            signal.angle_phi = require<double>(s, "angle_phi");
            signal.kind =
                signal_kind_from_name(field_or<std::string>(s, "kind", "science"));
            signal.phase = field_or<double>(s, "phase", 0.0);
            config.signals.push_back(signal);
        }
    }

    const json a = section(j, "acquisition");
    config.acquisition.sample_rate_hz = require<double>(a, "sample_rate_hz");
    config.acquisition.duration_s = require<double>(a, "duration_s");
    config.acquisition.rbw_hz = require<double>(a, "rbw_hz");
    config.acquisition.vbw_averages = field_or<int>(a, "vbw_averages", 1);
    try {
        config.acquisition.window =
            window_from_name(field_or<std::string>(a, "window", "hann"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    config.acquisition.seed = field_or<std::uint64_t>(a, "seed", 0);
    config.acquisition.detector_slope_hz =
        field_or<double>(a, "detector_slope_hz", 0.0);

    if (j.contains("detection")) {
        const json d = section(j, "detection");
        config.detection.peak_sigma = field_or<double>(d, "peak_sigma", 5.0);
        config.detection.classify_sigma =
            field_or<double>(d, "classify_sigma", 3.0);
        config.detection.resolve_sigma =
            field_or<double>(d, "resolve_sigma", 3.0);
        config.detection.floor_window_bins =
            field_or<int>(d, "floor_window_bins", 51);
        config.detection.min_theta_rad =
            field_or<double>(d, "min_theta_rad", 0.01);
        config.detection.min_averages = field_or<int>(d, "min_averages", 8);
    }

    config.output_dir = field_or<std::string>(j, "output_dir", "out");
    config.write_records = field_or<bool>(j, "write_records", false);

    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return run_config_from_json(j);
}

void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << to_json(config).dump(2) << '\n';
}

std::vector<std::string> preset_names() {
    return {"fig3", "vacuum", "threshold-scan"};
}

RunConfig preset(const std::string& name) {
    RunConfig config;
    config.acquisition.sample_rate_hz = 50e6;
    config.acquisition.rbw_hz = 10e3;
    config.acquisition.window = Window::hann;

    const double squeeze_6db = 0.6908;  // 10*log10(e^{2r}) = 6 dB detected
    if (name == "fig3") {
        config.qdm.r_a = squeeze_6db;
        config.qdm.r_b = squeeze_6db;
        config.qdm.theta = std::numbers::pi / 2.0;
        config.signals = {
            {5.55e6, 0.55, 0.0, SignalKind::science, 0.0},
            {5.17e6, 0.55, std::numbers::pi / 3.0, SignalKind::parasitic, 0.0}};
        config.acquisition.duration_s = 0.016;  // >= 300 averaged segments
        config.acquisition.vbw_averages = 300;
        config.acquisition.seed = 20260810;
        config.output_dir = "out/fig3";
    } else if (name == "vacuum") {
        config.qdm.theta = std::numbers::pi / 2.0;
        config.acquisition.duration_s = 0.006;
        config.acquisition.vbw_averages = 100;
        config.acquisition.seed = 11;
        config.output_dir = "out/vacuum";
    } else if (name == "threshold-scan") {
        config.qdm.r_a = squeeze_6db;
        config.qdm.r_b = squeeze_6db;
        config.qdm.theta = std::numbers::pi / 2.0;
        config.signals = {
            {5.55e6, 0.55, 0.0, SignalKind::science, 0.0},
            {5.17e6, 0.55, std::numbers::pi / 3.0, SignalKind::parasitic, 0.0}};
        config.acquisition.duration_s = 0.016;
        config.acquisition.vbw_averages = 300;
        config.acquisition.seed = 7;
        config.output_dir = "out/threshold-scan";
    } else {
        std::string names;
        for (const std::string& n : preset_names()) {
            names += names.empty() ? n : ", " + n;
        }
        throw ConfigError("unknown preset '" + name + "' (available: " + names +
                          ")");
    }
    config.validate();
    return config;
}

void write_spectrum_csv(const std::string& csv_path, const Spectrum& spectrum) {
    spectrum.validate();
    std::ofstream out = open_for_write(csv_path);
    std::string buffer = "frequency_hz,power_db_rel_vacuum\n";
    buffer.reserve(spectrum.frequencies_hz.size() * 32);
    char line[64];
    for (std::size_t i = 0; i < spectrum.frequencies_hz.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.6f,%.6f\n",
                      spectrum.frequencies_hz[i],
                      spectrum.power_db_rel_vacuum[i]);
        buffer += line;
    }
    out << buffer;
}

void write_spectrum(const std::string& dir, const std::string& stem,
                    const Spectrum& spectrum) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_spectrum_csv((fs::path(dir) / (stem + ".csv")).string(), spectrum);
    const json meta{{"schema_version", kReportSchemaVersion},
                    {"kind", "spectrum"},
                    {"n_averages", spectrum.n_averages},
                    {"rbw_effective_hz", spectrum.rbw_effective_hz},
                    {"averaging_efficiency", spectrum.averaging_efficiency}};
    std::ofstream out =
        open_for_write((fs::path(dir) / (stem + ".meta.json")).string());
    out << meta.dump(2) << '\n';
}

Spectrum read_spectrum(const std::string& csv_path,
                       const std::string& meta_path) {
    std::ifstream in(csv_path);
    if (!in) {
        throw ConfigError("cannot open spectrum CSV '" + csv_path + "'");
    }
    Spectrum spectrum;
    std::string line;
    if (!std::getline(in, line) ||
        line != "frequency_hz,power_db_rel_vacuum") {
        throw ConfigError("spectrum CSV '" + csv_path +
                          "' has an unexpected header");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        double freq = 0.0;
        double power = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &freq, &power) != 2) {
            throw ConfigError("spectrum CSV '" + csv_path + "' line " +
                              std::to_string(line_no) + ": cannot parse '" +
                              line + "'");
        }
        spectrum.frequencies_hz.push_back(freq);
        spectrum.power_db_rel_vacuum.push_back(power);
    }
    std::ifstream meta_in(meta_path);
    if (!meta_in) {
        throw ConfigError("cannot open spectrum metadata '" + meta_path + "'");
    }
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw ConfigError("metadata '" + meta_path + "': " + e.what());
    }
    spectrum.n_averages = require<int>(meta, "n_averages");
    spectrum.rbw_effective_hz = require<double>(meta, "rbw_effective_hz");
    spectrum.averaging_efficiency =
        field_or<double>(meta, "averaging_efficiency", 1.0);
    spectrum.validate();
    return spectrum;
}

void write_record(const std::string& dir, const std::string& stem,
                  const DetectorRecord& record) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::string buffer;
    buffer.reserve(record.samples.size() * 8);
    for (double sample : record.samples) {
        append_le64(buffer, sample);
    }
    std::ofstream raw =
        open_for_write((fs::path(dir) / (stem + ".f64")).string());
    raw.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));

    const json meta{
        {"schema_version", kReportSchemaVersion},
        {"kind", "detector_record"},
        {"byte_order", "little_endian"},
        {"sample_format", "float64"},
        {"detector", record.detector == DetectorId::a ? "a" : "b"},
        {"readout_angle", record.readout_angle},
        {"n_samples", record.samples.size()},
        {"acquisition",
         {{"sample_rate_hz", record.acquisition.sample_rate_hz},
          {"duration_s", record.acquisition.duration_s},
          {"rbw_hz", record.acquisition.rbw_hz},
          {"vbw_averages", record.acquisition.vbw_averages},
          {"window", window_name(record.acquisition.window)},
          {"seed", record.acquisition.seed},
          {"detector_slope_hz", record.acquisition.detector_slope_hz}}}};
    std::ofstream out =
        open_for_write((fs::path(dir) / (stem + ".meta.json")).string());
    out << meta.dump(2) << '\n';
}

DetectorRecord read_record(const std::string& raw_path,
                           const std::string& meta_path) {
    std::ifstream meta_in(meta_path);
    if (!meta_in) {
        throw ConfigError("cannot open record metadata '" + meta_path + "'");
    }
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw ConfigError("metadata '" + meta_path + "': " + e.what());
    }
    DetectorRecord record;
    record.detector =
        require<std::string>(meta, "detector") == "a" ? DetectorId::a
                                                      : DetectorId::b;
    record.readout_angle = require<double>(meta, "readout_angle");
    const json a = section(meta, "acquisition");
    record.acquisition.sample_rate_hz = require<double>(a, "sample_rate_hz");
    record.acquisition.duration_s = require<double>(a, "duration_s");
    record.acquisition.rbw_hz = require<double>(a, "rbw_hz");
    record.acquisition.vbw_averages = field_or<int>(a, "vbw_averages", 1);
    record.acquisition.window =
        window_from_name(field_or<std::string>(a, "window", "hann"));
    record.acquisition.seed = field_or<std::uint64_t>(a, "seed", 0);
    record.acquisition.detector_slope_hz =
        field_or<double>(a, "detector_slope_hz", 0.0);

    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) {
        throw ConfigError("cannot open record data '" + raw_path + "'");
    }
    std::string bytes((std::istreambuf_iterator<char>(raw)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) {
        throw ConfigError("record data '" + raw_path +
                          "' is not a whole number of float64 samples");
    }
    const std::size_t n = bytes.size() / 8;
    const std::size_t expected = require<std::size_t>(meta, "n_samples");
    if (n != expected) {
        throw ConfigError("record data '" + raw_path + "' holds " +
                          std::to_string(n) + " samples, metadata says " +
                          std::to_string(expected));
    }
    record.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        record.samples[i] = parse_le64(bytes.data() + 8 * i);
    }
    return record;
}

json to_json(const AnalyticReport& report) {
    json signals = json::array();
    for (const SignalGainReport& entry : report.signals) {
        signals.push_back({{"frequency_hz", entry.signal.frequency_hz},
                           {"amplitude", entry.signal.amplitude},
                           {"angle_phi", entry.signal.angle_phi},
                           {"kind", signal_kind_name(entry.signal.kind)},
                           {"gain_a", entry.gain_a},
                           {"gain_b", entry.gain_b}});
    }
    return json{{"schema_version", kReportSchemaVersion},
                {"kind", "analytic_report"},
                {"bound_label", report.bound_label},
                {"var_bhd_a", report.var_bhd_a},
                {"var_bhd_b", report.var_bhd_b},
                {"single_mode_bound", report.single_mode},
                {"arthurs_kelly_product", report.arthurs_kelly},
                {"uncertainty_product", report.uncertainty_product},
                {"threshold_r", report.threshold},
                {"signals", signals}};
}

json to_json(const VetoReport& report) {
    json peaks = json::array();
    for (const PeakVerdict& verdict : report.peaks) {
        json phi = json::array();
        for (double candidate : verdict.angle.candidates_rad) {
            phi.push_back(candidate * 180.0 / std::numbers::pi);
        }
        peaks.push_back(
            {{"frequency_hz", verdict.observation.frequency_hz},
             {"power_a_db", verdict.observation.power_a_db},
             {"power_b_db", verdict.observation.power_b_db},
             {"floor_a_db", verdict.observation.floor_a_db},
             {"floor_b_db", verdict.observation.floor_b_db},
             {"expected_b_db", verdict.expected_b_db},
             {"residual_db", verdict.residual_db},
             {"significance", verdict.significance},
             {"classification", peak_class_name(verdict.classification)},
             {"phi_candidates_deg", phi},
             {"phi_consistent", verdict.angle.consistent}});
    }
    return json{{"schema_version", kReportSchemaVersion},
                {"kind", "veto_report"},
                {"theta", report.theta},
                {"n_averages", report.n_averages},
                {"detection",
                 {{"peak_sigma", report.params.peak_sigma},
                  {"classify_sigma", report.params.classify_sigma},
                  {"resolve_sigma", report.params.resolve_sigma},
                  {"floor_window_bins", report.params.floor_window_bins},
                  {"min_theta_rad", report.params.min_theta_rad},
                  {"min_averages", report.params.min_averages}}},
                {"peaks", peaks}};
}

}  // namespace qdm
