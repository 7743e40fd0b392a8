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

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> theta_deg;
};

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path,
                    "path to a JSON run configuration");
    cmd->add_option("--preset", opts.preset_name,
                    "named preset: fig3, vacuum, threshold-scan");
    cmd->add_option("--seed", opts.seed, "override the acquisition seed");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
    cmd->add_option("--theta-deg", opts.theta_deg,
                    "override the readout angle theta, in degrees");
}

qdm::RunConfig resolve_config(const CommonOpts& opts) {
    if (!opts.config_path.empty() && !opts.preset_name.empty()) {
        throw qdm::ConfigError("--config and --preset are mutually exclusive");
    }
    qdm::RunConfig config;
    if (!opts.config_path.empty()) {
        config = qdm::load_run_config(opts.config_path);
    } else if (!opts.preset_name.empty()) {
        config = qdm::preset(opts.preset_name);
    } else {
        throw qdm::ConfigError("provide --config PATH or --preset NAME");
    }
    if (opts.seed) {
        config.acquisition.seed = *opts.seed;
    }
    if (opts.theta_deg) {
        config.qdm.theta = *opts.theta_deg * std::numbers::pi / 180.0;
    }
    if (!opts.out_dir.empty()) {
        config.output_dir = opts.out_dir;
    } else if (const char* env = std::getenv("QDM_OUT_DIR")) {
        config.output_dir = env;
    }
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw qdm::ConfigError(e.what());
    }
    return config;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() +
                                 "' for writing");
    }
    out << j.dump(2) << '\n';
}

double median_db(std::vector<double> values) {
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

int cmd_analytic(const qdm::RunConfig& config) {
    const qdm::AnalyticReport report =
        qdm::analyze(config.qdm, config.signals);
    fs::create_directories(config.output_dir);
    const fs::path path = fs::path(config.output_dir) / "analytic_report.json";
    write_json_file(path, qdm::to_json(report));

    std::printf("%-26s %s\n", "bound_label", report.bound_label.c_str());
    std::printf("%-26s %.6f\n", "var_bhd_a", report.var_bhd_a);
    std::printf("%-26s %.6f\n", "var_bhd_b", report.var_bhd_b);
    std::printf("%-26s %.4f\n", "single_mode_bound", report.single_mode);
    std::printf("%-26s %.4f\n", "arthurs_kelly_product", report.arthurs_kelly);
    std::printf("%-26s %.4f\n", "uncertainty_product", report.uncertainty_product);
    std::printf("%-26s %.4f\n", "threshold_r", report.threshold);
    for (const qdm::SignalGainReport& entry : report.signals) {
        std::printf("signal %9.0f Hz  %-9s  gain_a=%+.6f  gain_b=%+.6f\n",
                    entry.signal.frequency_hz,
                    qdm::signal_kind_name(entry.signal.kind).c_str(),
                    entry.gain_a, entry.gain_b);
    }
    std::printf("report written to %s\n", path.string().c_str());
    return 0;
}

int cmd_simulate(const qdm::RunConfig& config) {
    auto [record_a, record_b] =
        qdm::synthesize(config.qdm, config.signals, config.acquisition);
    const qdm::Spectrum spec_a = qdm::estimate_psd(record_a);
    const qdm::Spectrum spec_b = qdm::estimate_psd(record_b);

    qdm::write_spectrum(config.output_dir, "spectrum_a", spec_a);
    qdm::write_spectrum(config.output_dir, "spectrum_b", spec_b);
    qdm::save_run_config(
        config, (fs::path(config.output_dir) / "run_config.json").string());
    if (config.write_records) {
        qdm::write_record(config.output_dir, "record_a", record_a);
        qdm::write_record(config.output_dir, "record_b", record_b);
    }

    std::printf("synthesized %zu samples per detector, %d averaged segments\n",
                record_a.samples.size(), spec_a.n_averages);
    std::printf("median floor A: %+.3f dB rel vacuum\n",
                median_db(spec_a.power_db_rel_vacuum));
    std::printf("median floor B: %+.3f dB rel vacuum\n",
                median_db(spec_b.power_db_rel_vacuum));
    std::printf("spectra written to %s\n", config.output_dir.c_str());
    return 0;
}

void print_veto_table(const qdm::VetoReport& report) {
    std::printf("%12s  %-10s %8s %8s %8s %8s %8s  %s\n", "freq_hz", "class",
                "A_db", "B_db", "expB_db", "resid", "signif", "phi_deg");
    for (const qdm::PeakVerdict& verdict : report.peaks) {
        std::string phi = "-";
        if (!verdict.angle.candidates_rad.empty()) {
            phi.clear();
            for (double candidate : verdict.angle.candidates_rad) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "%.1f",
                              candidate * 180.0 / std::numbers::pi);
                phi += phi.empty() ? buf : std::string("|") + buf;
            }
        }
        std::printf("%12.0f  %-10s %8.2f %8.2f %8.2f %8.2f %8.1f  %s\n",
                    verdict.observation.frequency_hz,
                    qdm::peak_class_name(verdict.classification).c_str(),
                    verdict.observation.power_a_db,
                    verdict.observation.power_b_db, verdict.expected_b_db,
                    verdict.residual_db, verdict.significance, phi.c_str());
    }
}

std::string meta_path_for(const std::string& csv_path) {
    if (csv_path.size() > 4 &&
        csv_path.compare(csv_path.size() - 4, 4, ".csv") == 0) {
        return csv_path.substr(0, csv_path.size() - 4) + ".meta.json";
    }
    return csv_path + ".meta.json";
}

int cmd_veto(const qdm::RunConfig& config, const std::string& spectrum_a_path,
             const std::string& spectrum_b_path) {
    qdm::Spectrum spec_a;
    qdm::Spectrum spec_b;
    if (!spectrum_a_path.empty() || !spectrum_b_path.empty()) {
        if (spectrum_a_path.empty() || spectrum_b_path.empty()) {
            throw qdm::ConfigError(
                "--spectrum-a and --spectrum-b must be given together");
        }
        spec_a = qdm::read_spectrum(spectrum_a_path,
                                    meta_path_for(spectrum_a_path));
        spec_b = qdm::read_spectrum(spectrum_b_path,
                                    meta_path_for(spectrum_b_path));
    } else {
        auto [record_a, record_b] =
            qdm::synthesize(config.qdm, config.signals, config.acquisition);
        spec_a = qdm::estimate_psd(record_a);
        spec_b = qdm::estimate_psd(record_b);
    }

    const qdm::VetoReport report = qdm::classify_peaks(
        spec_a, spec_b, config.qdm.theta, config.detection);
    fs::create_directories(config.output_dir);
    const fs::path path = fs::path(config.output_dir) / "veto_report.json";
    write_json_file(path, qdm::to_json(report));

    print_veto_table(report);
    std::printf("report written to %s\n", path.string().c_str());
    return 0;
}

int cmd_sweep(const qdm::RunConfig& config, double start_deg, double stop_deg,
              int steps) {
    if (steps < 2) {
        throw qdm::ConfigError("--theta-steps must be >= 2");
    }
    const qdm::SignalSpec* science = nullptr;
    const qdm::SignalSpec* parasitic = nullptr;
    for (const qdm::SignalSpec& signal : config.signals) {
        if (signal.kind == qdm::SignalKind::science && science == nullptr) {
            science = &signal;
        }
        if (signal.kind == qdm::SignalKind::parasitic && parasitic == nullptr) {
            parasitic = &signal;
        }
    }
    if (science == nullptr) {
        throw qdm::ConfigError("sweep needs a science signal in the config");
    }

    const qdm::AcquisitionConfig& acq = config.acquisition;
    const std::size_t segment = acq.segment_length();
    const double enbw =
        qdm::window_enbw_hz(acq.window, segment, acq.sample_rate_hz);
    const double k_eff =
        acq.vbw_averages * qdm::welch_averaging_efficiency(acq.window, segment,
                                                           acq.vbw_averages);

    fs::create_directories(config.output_dir);
    const fs::path path = fs::path(config.output_dir) / "sweep.csv";
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() +
                                 "' for writing");
    }
    out << "theta_deg,science_snr_combined_db,parasitic_residual_significance\n";

    for (int i = 0; i < steps; ++i) {
        const double theta_deg =
            start_deg + (stop_deg - start_deg) * i / (steps - 1.0);
        qdm::QdmConfig cfg = config.qdm;
        cfg.theta = theta_deg * std::numbers::pi / 180.0;

        const Eigen::Matrix2d joint = qdm::joint_readout_covariance(cfg);
        const double noise_band_a =
            2.0 * joint(0, 0) / acq.sample_rate_hz * enbw;
        const double noise_band_b =
            2.0 * joint(1, 1) / acq.sample_rate_hz * enbw;

        const qdm::SignalGains sci_gains = qdm::signal_transfer(cfg, *science);
        const double sci_a = science->amplitude * sci_gains.gain_a;
        const double sci_b = science->amplitude * sci_gains.gain_b;
        const double snr =
            0.5 * sci_a * sci_a / noise_band_a + 0.5 * sci_b * sci_b / noise_band_b;
        const double snr_db = 10.0 * std::log10(std::max(snr, 1e-300));

        double significance = 0.0;
        if (parasitic != nullptr) {
            const qdm::SignalGains par_gains =
                qdm::signal_transfer(cfg, *parasitic);
            const double excess_a =
                0.5 * std::pow(parasitic->amplitude * par_gains.gain_a, 2) /
                noise_band_a;
            const double excess_b =
                0.5 * std::pow(parasitic->amplitude * par_gains.gain_b, 2) /
                noise_band_b;
            const double floor_a_db = 10.0 * std::log10(2.0 * joint(0, 0));
            const double floor_b_db = 10.0 * std::log10(2.0 * joint(1, 1));
            const qdm::PeakObservation obs{
                parasitic->frequency_hz,
                floor_a_db + 10.0 * std::log10(1.0 + excess_a),
                floor_b_db + 10.0 * std::log10(1.0 + excess_b),
                floor_a_db,
                floor_b_db,
                acq.vbw_averages};
            significance = qdm::assess_peak(obs, cfg.theta, config.detection,
                                            k_eff, k_eff)
                               .significance;
        }

        char line[96];
        std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f\n", theta_deg,
                      snr_db, significance);
        out << line;
    }
    std::printf("sweep written to %s\n", path.string().c_str());
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"quantum-dense metrology: simulation, analytics and veto"};
    app.require_subcommand(1);

    CommonOpts analytic_opts;
    CLI::App* analytic = app.add_subcommand(
        "analytic", "evaluate readout variances, gains and uncertainty products");
    add_common_options(analytic, analytic_opts);

    CommonOpts simulate_opts;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "synthesize detector records and write averaged spectra");
    add_common_options(simulate, simulate_opts);
    bool write_records = false;
    simulate->add_flag("--write-records", write_records,
                       "also write raw float64 detector records");

    CommonOpts veto_opts;
    std::string spectrum_a_path;
    std::string spectrum_b_path;
    CLI::App* veto = app.add_subcommand(
        "veto", "classify spectral peaks as science or parasitic");
    add_common_options(veto, veto_opts);
    veto->add_option("--spectrum-a", spectrum_a_path,
                     "existing detector-A spectrum CSV (with .meta.json sidecar)");
    veto->add_option("--spectrum-b", spectrum_b_path,
                     "existing detector-B spectrum CSV (with .meta.json sidecar)");

    CommonOpts sweep_opts;
    double theta_start_deg = 0.0;
    double theta_stop_deg = 90.0;
    int theta_steps = 19;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "trade-off curve: science SNR vs veto power over theta");
    add_common_options(sweep, sweep_opts);
    sweep->add_option("--theta-start-deg", theta_start_deg, "sweep start angle");
    sweep->add_option("--theta-stop-deg", theta_stop_deg, "sweep stop angle");
    sweep->add_option("--theta-steps", theta_steps, "number of sweep points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (analytic->parsed()) {
        return cmd_analytic(resolve_config(analytic_opts));
    }
    if (simulate->parsed()) {
        qdm::RunConfig config = resolve_config(simulate_opts);
        config.write_records = config.write_records || write_records;
        return cmd_simulate(config);
    }
    if (veto->parsed()) {
        return cmd_veto(resolve_config(veto_opts), spectrum_a_path,
                        spectrum_b_path);
    }
    if (sweep->parsed()) {
        return cmd_sweep(resolve_config(sweep_opts), theta_start_deg,
                         theta_stop_deg, theta_steps);
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qdm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
