// Command-line front end: ground states, propagation of saved states,
// scenario execution/validation, spectra of recorded series, and the
// bundled preset library.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinring/eigensolve.hpp"
#include "spinring/errors.hpp"
#include "spinring/observables.hpp"
#include "spinring/propagate.hpp"
#include "spinring/scenario.hpp"
#include "spinring/statefile.hpp"
#include "spinring/table.hpp"
#include "spinring/version.hpp"

#ifndef SPINRING_PRESET_DIR
#define SPINRING_PRESET_DIR ""
#endif

namespace fs = std::filesystem;
using namespace spinring;

namespace {

// exit codes: 0 success, 2 bad input (domain/contract/io/lookup/validation),
// 3 accuracy not reached (convergence/precision), 4 impossible outcome,
// 1 anything unexpected
constexpr int kExitBadInput = 2;
constexpr int kExitAccuracy = 3;
constexpr int kExitImpossible = 4;

fs::path preset_directory(const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    return SPINRING_PRESET_DIR;
}

// Accepts either a real path or a bare preset name ("fig3_n10").
fs::path resolve_scenario_path(const std::string& arg, const fs::path& preset_dir) {
    if (fs::exists(arg)) return arg;
    if (arg.find('/') == std::string::npos && !preset_dir.empty()) {
        fs::path candidate = preset_dir / arg;
        if (fs::exists(candidate)) return candidate;
        candidate += ".json";
        if (fs::exists(candidate)) return candidate;
    }
    return arg;
}

TableFormat parse_format(const std::string& text) {
    if (text == "csv") return TableFormat::csv;
    if (text == "json") return TableFormat::json;
    throw DomainError("unknown table format '" + text + "' (expected csv or json)");
}

SectorMode parse_sector_flag(const std::string& text) {
    if (text == "auto") return SectorMode::automatic;
    if (text == "on") return SectorMode::on;
    if (text == "off") return SectorMode::off;
    throw DomainError("unknown sector mode '" + text + "' (expected auto, on or off)");
}

int run_gs(const std::vector<int>& sizes, double j, double delta, bool full_space,
           std::uint64_t seed, const std::string& save_path, const std::string& table_path,
           TableFormat format) {
    if (!save_path.empty() && sizes.size() != 1)
        throw DomainError("--save requires exactly one --n");

    std::vector<SampleRow> rows;
    for (int n : sizes) {
        ChainSpec spec(n, j, delta);
        LanczosConfig cfg;
        cfg.seed = seed;
        cfg.use_sz_zero_sector = !full_space;
        GroundStateResult res = lanczos_ground_state(spec, cfg);
        std::printf("N=%d  E0=%.12f  E0/N=%.12f  residual=%.3e  iterations=%d\n", n, res.energy,
                    res.energy / n, res.residual, res.iterations);
        rows.push_back({0.0, n, "energy", res.energy});
        if (!save_path.empty()) {
            save_state(res.state, save_path, /*phase_fixed=*/true);
            std::printf("state written to %s\n", save_path.c_str());
        }
    }
    if (!table_path.empty()) {
        // the site column carries the ring size: one row per N
        export_table(rows, table_path, format);
        std::printf("table written to %s\n", table_path.c_str());
    }
    return 0;
}

int run_evolve(const std::string& in_path, double t, double dt, double cutoff,
               const std::string& out_path) {
    StateVector psi = load_state(in_path);
    const ChainSpec spec = psi.spec;

    PropagatorConfig cfg = default_propagator_config(spec);
    if (cutoff > 0) cfg.coefficient_cutoff = cutoff;

    HamiltonianOp op = psi.in_sector() ? HamiltonianOp::sector_restricted(spec, psi.sector)
                                       : HamiltonianOp::full_space(spec);
    ChebyshevPropagator prop(std::move(op), cfg);

    double remaining = t;
    const double step = dt > 0 ? dt : t;
    int orders = 0;
    if (step != 0.0) {
        while (std::abs(remaining) > std::abs(step) * 1.5) {
            prop.advance(psi, step);
            remaining -= step;
            orders = std::max(orders, prop.last_order());
        }
        if (remaining != 0.0) {
            prop.advance(psi, remaining);
            orders = std::max(orders, prop.last_order());
        }
    }
    save_state(psi, out_path);
    std::printf("evolved N=%d state by t=%g (max expansion order %d), norm %.15f\n",
                spec.n_sites, t, orders, psi.norm());
    std::printf("state written to %s\n", out_path.c_str());
    return 0;
}

void print_report(const ValidationReport& report) {
    for (const auto& v : report.violations) std::printf("violation: %s\n", v.c_str());
    for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("memory estimate: %.0f bytes\n", report.memory_estimate_bytes);
}

int run_scenario_validate(const fs::path& path, double memory_cap) {
    Scenario s = parse_scenario(path);
    ValidationReport report = validate_scenario(s, memory_cap);
    print_report(report);
    if (!report.ok()) {
        std::printf("%s: INVALID\n", path.c_str());
        return kExitBadInput;
    }
    std::printf("%s: ok\n", path.c_str());
    return 0;
}

int run_scenario_run(const fs::path& path, const RunOptions& opts) {
    Scenario s = parse_scenario(path);
    RunManifest manifest = run_scenario(s, opts);

    for (const auto& ev : manifest.events) {
        std::ostringstream probs;
        for (std::size_t i = 0; i < ev.probabilities.size(); ++i)
            probs << (i ? ", " : "") << ev.probabilities[i];
        std::printf("event %d at t=%g (snapped %g): probability %s\n", ev.index, ev.t_requested,
                    ev.t_snapped, probs.str().c_str());
    }
    std::printf("%zu rows sampled (%s pipeline)\n", manifest.rows.size(),
                manifest.sector_pipeline ? "sector" : "full-space");
    for (const auto& [name, checksum] : manifest.outputs)
        std::printf("wrote %s  fnv1a64 0x%016llx\n", name.c_str(),
                    static_cast<unsigned long long>(checksum));
    std::printf("manifest: %s  (%.2f s)\n", manifest.manifest_path.c_str(),
                manifest.wall_clock_seconds);
    return 0;
}

int run_spectrum(const std::string& series_path, int site, const std::string& axis,
                 const std::string& window_name, bool detrend, const std::string& out_path,
                 TableFormat format) {
    std::vector<SampleRow> rows = import_table(series_path);
    TimeSeriesRecord series;
    series.id = axis + "@" + std::to_string(site);
    for (const auto& row : rows) {
        if (row.site != site || row.axis != axis) continue;
        series.times.push_back(row.t);
        series.values.push_back(row.value);
    }
    if (series.times.empty())
        throw LookupError("no rows with axis '" + axis + "' and site " + std::to_string(site) +
                          " in " + series_path);

    SpectrumWindow window;
    if (window_name == "rectangular")
        window = SpectrumWindow::rectangular;
    else if (window_name == "hann")
        window = SpectrumWindow::hann;
    else
        throw DomainError("unknown window '" + window_name + "' (expected rectangular or hann)");

    Spectrum spec = fourier_spectrum(series, window, detrend);
    std::printf("%zu samples, dominant angular frequency %.10g\n", series.times.size(),
                dominant_frequency(spec));

    if (!out_path.empty()) {
        std::vector<SampleRow> out;
        out.reserve(spec.omegas.size());
        for (std::size_t k = 0; k < spec.omegas.size(); ++k)
            out.push_back({spec.omegas[k], site, axis + ":spectrum", spec.magnitudes[k]});
        export_table(out, out_path, format);
        std::printf("spectrum written to %s\n", out_path.c_str());
    }
    return 0;
}

int run_presets_list(const fs::path& preset_dir) {
    if (preset_dir.empty() || !fs::is_directory(preset_dir))
        throw IoError("preset directory not found: " + preset_dir.string());
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(preset_dir))
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    for (const auto& name : names) std::printf("%s\n", name.c_str());
    return 0;
}

int run_presets_dump(const fs::path& preset_dir, const std::string& name) {
    fs::path path = resolve_scenario_path(name, preset_dir);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open preset '" + name + "'");
    std::cout << in.rdbuf();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("spinring ") + kVersionString +
                 " -- projective measurements on spin-1/2 XXZ rings"};
    app.require_subcommand(1);

    std::string preset_dir_override;
    app.add_option("--preset-dir", preset_dir_override, "Preset directory override");

    // gs
    auto* gs = app.add_subcommand("gs", "Compute ground states");
    std::vector<int> gs_sizes;
    double gs_j = 1.0, gs_delta = 0.0;
    bool gs_full = false;
    std::uint64_t gs_seed = 1;
    std::string gs_save, gs_table, gs_format = "csv";
    gs->add_option("--n", gs_sizes, "Ring size (repeatable)")->required();
    gs->add_option("--j", gs_j, "Exchange coupling J");
    gs->add_option("--delta", gs_delta, "S^z S^z anisotropy");
    gs->add_flag("--full-space", gs_full, "Solve in the full 2^N space");
    gs->add_option("--seed", gs_seed, "Lanczos start-vector seed");
    gs->add_option("--save", gs_save, "Write the state to this file (single --n only)");
    gs->add_option("--out", gs_table, "Write an energy table to this file");
    gs->add_option("--format", gs_format, "Table format: csv or json");

    // evolve
    auto* ev = app.add_subcommand("evolve", "Evolve a saved state in time");
    std::string ev_in, ev_out;
    double ev_t = 0.0, ev_dt = 0.0, ev_cutoff = 0.0;
    ev->add_option("--in", ev_in, "Input state file")->required();
    ev->add_option("--t", ev_t, "Evolution time (units of 1/J)")->required();
    ev->add_option("--dt", ev_dt, "Step size (default: one step)");
    ev->add_option("--cutoff", ev_cutoff, "Expansion coefficient cutoff");
    ev->add_option("--out", ev_out, "Output state file")->required();

    // scenario run | validate
    auto* sc = app.add_subcommand("scenario", "Run or validate scenario files");
    sc->require_subcommand(1);
    std::string sc_file, sc_out_dir = ".", sc_format = "csv", sc_sector;
    double sc_dt = 0.0, sc_cutoff = 0.0, sc_memory = 4e9;
    std::uint64_t sc_seed = 0;
    bool sc_seed_set = false, sc_resume = false, sc_no_checkpoints = false;
    auto* sc_run = sc->add_subcommand("run", "Execute a scenario");
    sc_run->add_option("file", sc_file, "Scenario file or preset name")->required();
    sc_run->add_option("--out-dir", sc_out_dir, "Output directory");
    sc_run->add_option("--format", sc_format, "Table format: csv or json");
    sc_run->add_option("--seed", sc_seed, "Seed override")->each([&](const std::string&) {
        sc_seed_set = true;
    });
    sc_run->add_option("--dt", sc_dt, "Grid step override");
    sc_run->add_option("--cutoff", sc_cutoff, "Expansion coefficient cutoff override");
    sc_run->add_option("--sector", sc_sector, "Sector pipeline: auto, on or off");
    sc_run->add_option("--max-memory", sc_memory, "Memory cap in bytes for validation");
    sc_run->add_flag("--resume", sc_resume, "Continue from the last checkpoint");
    sc_run->add_flag("--no-checkpoints", sc_no_checkpoints, "Skip checkpoint files");
    auto* sc_val = sc->add_subcommand("validate", "Check a scenario without running it");
    std::string scv_file;
    double scv_memory = 4e9;
    sc_val->add_option("file", scv_file, "Scenario file or preset name")->required();
    sc_val->add_option("--max-memory", scv_memory, "Memory cap in bytes");

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "Fourier spectrum of a recorded series");
    std::string sp_file, sp_axis = "z", sp_window = "rectangular", sp_out, sp_format = "csv";
    int sp_site = 1;
    bool sp_no_detrend = false;
    sp->add_option("file", sp_file, "Series table (csv or json)")->required();
    sp->add_option("--site", sp_site, "Site whose series to transform");
    sp->add_option("--axis", sp_axis, "Axis tag to select");
    sp->add_option("--window", sp_window, "Window: rectangular or hann");
    sp->add_flag("--no-detrend", sp_no_detrend, "Keep the series mean");
    sp->add_option("--out", sp_out, "Write the spectrum table to this file");
    sp->add_option("--format", sp_format, "Table format: csv or json");

    // presets list | dump
    auto* pr = app.add_subcommand("presets", "Bundled scenario presets");
    pr->require_subcommand(1);
    auto* pr_list = pr->add_subcommand("list", "List preset names");
    auto* pr_dump = pr->add_subcommand("dump", "Print a preset file");
    std::string pr_name;
    pr_dump->add_option("name", pr_name, "Preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        const fs::path preset_dir = preset_directory(preset_dir_override);
        if (gs->parsed())
            return run_gs(gs_sizes, gs_j, gs_delta, gs_full, gs_seed, gs_save, gs_table,
                          parse_format(gs_format));
        if (ev->parsed()) return run_evolve(ev_in, ev_t, ev_dt, ev_cutoff, ev_out);
        if (sc->parsed()) {
            if (sc_val->parsed())
                return run_scenario_validate(resolve_scenario_path(scv_file, preset_dir),
                                             scv_memory);
            RunOptions opts;
            opts.out_dir = sc_out_dir;
            opts.format = parse_format(sc_format);
            opts.resume = sc_resume;
            opts.checkpoints = !sc_no_checkpoints;
            opts.memory_cap_bytes = sc_memory;
            if (sc_seed_set) opts.seed_override = sc_seed;
            if (sc_dt > 0) opts.dt_override = sc_dt;
            if (sc_cutoff > 0) opts.cutoff_override = sc_cutoff;
            if (!sc_sector.empty()) opts.sector_override = parse_sector_flag(sc_sector);
            return run_scenario_run(resolve_scenario_path(sc_file, preset_dir), opts);
        }
        if (sp->parsed())
            return run_spectrum(sp_file, sp_site, sp_axis, sp_window, !sp_no_detrend, sp_out,
                                parse_format(sp_format));
        if (pr->parsed()) {
            if (pr_list->parsed()) return run_presets_list(preset_dir);
            return run_presets_dump(preset_dir, pr_name);
        }
    } catch (const ImpossibleOutcomeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitImpossible;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAccuracy;
    } catch (const PrecisionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAccuracy;
    } catch (const Error& e) {
        // DomainError, ContractViolation, IoError, LookupError
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
