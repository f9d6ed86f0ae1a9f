#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinring/eigensolve.hpp"
#include "spinring/measurement.hpp"
#include "spinring/observables.hpp"
#include "spinring/propagate.hpp"
#include "spinring/table.hpp"

namespace spinring {

// Declarative experiment: prepare a state, evolve it over a sampling grid,
// fire projective measurements at scheduled times, record observables.
// Fields stay unvalidated raw values so that validate_scenario can report
// every problem instead of throwing at the first one.

enum class SectorMode { automatic, on, off };

struct ChainParams {
    int n_sites = 0;
    double exchange_j = 1.0;
    double anisotropy_delta = 0.0;
};

enum class InitialStateKind { ground_state, state_file, product };

struct InitialStateSpec {
    InitialStateKind kind = InitialStateKind::ground_state;
    std::string detail;  // file path, or a site pattern like "udud..."
};

struct MeasurementEvent {
    double t = 0.0;
    int site = 1;
    Axis axis = Axis::z;
    bool nonselective = false;
    Sign sign = Sign::plus;  // ignored when nonselective
};

enum class ObservableKind { magnetization, correlation, energy, staggered };

struct ObservableRequest {
    ObservableKind kind = ObservableKind::magnetization;
    Axis axis = Axis::z;     // magnetization and correlation only
    std::vector<int> sites;  // empty means every site
    int anchor = 1;          // correlation only: fixed first site
};

struct SpectrumRequest {
    int site = 1;
    Axis axis = Axis::z;
    SpectrumWindow window = SpectrumWindow::rectangular;
    bool detrend = true;
};

struct GridParams {
    double t_start = 0.0;
    double t_end = 0.0;
    double dt = 0.1;
};

struct Scenario {
    ChainParams chain;
    InitialStateSpec initial;
    std::vector<MeasurementEvent> events;  // times ascending
    GridParams grid;
    std::vector<ObservableRequest> observables;
    std::vector<SpectrumRequest> spectra;
    std::uint64_t seed = 1;
    SectorMode sector = SectorMode::automatic;
    std::string output_prefix = "run";
};

Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text);

// Canonical serialization; equal scenarios produce byte-equal documents.
std::string scenario_to_json(const Scenario& s);

struct ValidationReport {
    std::vector<std::string> violations;  // any entry makes the run refuse to start
    std::vector<std::string> warnings;    // resource estimates and similar
    double memory_estimate_bytes = 0.0;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_scenario(const Scenario& s, double memory_cap_bytes = 4e9);

struct EventRecord {
    int index = 0;
    double t_requested = 0.0;
    double t_snapped = 0.0;
    int grid_index = 0;
    // one entry for a selective event (the kept branch), two (+ then -)
    // for a nonselective one
    std::vector<double> probabilities;
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    TableFormat format = TableFormat::csv;
    bool resume = false;       // continue from the last checkpoint if present
    bool checkpoints = true;   // persist state after every event
    double memory_cap_bytes = 4e9;
    std::optional<std::uint64_t> seed_override;
    std::optional<double> dt_override;
    std::optional<double> cutoff_override;
    std::optional<SectorMode> sector_override;
};

struct RunManifest {
    std::string version;
    Scenario scenario;  // with CLI overrides folded in
    LanczosConfig lanczos;
    PropagatorConfig propagator;
    bool sector_pipeline = false;
    std::vector<EventRecord> events;
    double wall_clock_seconds = 0.0;
    std::vector<SampleRow> rows;  // the full series, same data as on disk
    std::vector<std::pair<std::string, std::uint64_t>> outputs;  // file name, checksum
    std::filesystem::path manifest_path;
};

// Executes prepare -> (advance, sample)* with events fired at their grid
// points. Writes the series table, optional spectra, checkpoints, and a
// manifest into opts.out_dir. Deterministic byte-for-byte for a fixed
// scenario, seed, and version (the manifest's wall-clock field excepted).
// Errors inside an event are rethrown with the event index and time.
RunManifest run_scenario(const Scenario& s, const RunOptions& opts = {});

}  // namespace spinring
