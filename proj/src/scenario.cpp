#include "spinring/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <sstream>

#include "spinring/statefile.hpp"
#include "spinring/version.hpp"

namespace spinring {

namespace {

using nlohmann::json;

constexpr char kScenarioSchema[] = "spinring-scenario-1";
constexpr char kManifestSchema[] = "spinring-manifest-1";
constexpr char kCheckpointSchema[] = "spinring-checkpoint-1";

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---- parsing ---------------------------------------------------------

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw DomainError("unknown key '" + key + "' in " + where);
        }
    }
}

SectorMode parse_sector_mode(const std::string& text) {
    if (text == "auto") return SectorMode::automatic;
    if (text == "on") return SectorMode::on;
    if (text == "off") return SectorMode::off;
    throw DomainError("sector mode must be auto, on, or off, got '" + text + "'");
}

std::string sector_mode_label(SectorMode m) {
    switch (m) {
        case SectorMode::automatic: return "auto";
        case SectorMode::on: return "on";
        default: return "off";
    }
}

SpectrumWindow parse_window(const std::string& text) {
    if (text == "rectangular") return SpectrumWindow::rectangular;
    if (text == "hann") return SpectrumWindow::hann;
    throw DomainError("window must be rectangular or hann, got '" + text + "'");
}

std::string window_label(SpectrumWindow w) {
    return w == SpectrumWindow::hann ? "hann" : "rectangular";
}

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != kScenarioSchema) {
        throw IoError(std::string("not a ") + kScenarioSchema + " document");
    }
    require_keys(doc,
                 {"schema", "chain", "initial_state", "events", "grid", "observables",
                  "spectra", "seed", "sector", "output_prefix"},
                 "scenario");
    Scenario s;

    const json& chain = doc.at("chain");
    require_keys(chain, {"n_sites", "j", "delta"}, "chain");
    s.chain.n_sites = chain.at("n_sites").get<int>();
    s.chain.exchange_j = chain.value("j", 1.0);
    s.chain.anisotropy_delta = chain.value("delta", 0.0);

    const json& init = doc.at("initial_state");
    require_keys(init, {"type", "pattern", "path"}, "initial_state");
    const std::string type = init.at("type").get<std::string>();
    if (type == "ground_state") {
        s.initial = {InitialStateKind::ground_state, ""};
    } else if (type == "product") {
        s.initial = {InitialStateKind::product, init.at("pattern").get<std::string>()};
    } else if (type == "state_file") {
        s.initial = {InitialStateKind::state_file, init.at("path").get<std::string>()};
    } else {
        throw DomainError("initial_state type must be ground_state, product, or state_file");
    }

    for (const json& e : doc.value("events", json::array())) {
        require_keys(e, {"t", "site", "axis", "sign", "nonselective"}, "event");
        MeasurementEvent ev;
        ev.t = e.at("t").get<double>();
        ev.site = e.at("site").get<int>();
        ev.axis = parse_axis(e.at("axis").get<std::string>());
        ev.nonselective = e.value("nonselective", false);
        if (ev.nonselective == e.contains("sign")) {
            throw DomainError("each event needs exactly one of: a sign, nonselective=true");
        }
        if (!ev.nonselective) ev.sign = parse_sign(e.at("sign").get<std::string>());
        s.events.push_back(ev);
    }

    const json& grid = doc.at("grid");
    require_keys(grid, {"t_start", "t_end", "dt"}, "grid");
    s.grid.t_start = grid.value("t_start", 0.0);
    s.grid.t_end = grid.at("t_end").get<double>();
    s.grid.dt = grid.value("dt", 0.1);

    for (const json& o : doc.at("observables")) {
        require_keys(o, {"type", "axis", "sites", "anchor"}, "observable");
        ObservableRequest req;
        const std::string kind = o.at("type").get<std::string>();
        if (kind == "magnetization") {
            req.kind = ObservableKind::magnetization;
        } else if (kind == "correlation") {
            req.kind = ObservableKind::correlation;
            req.anchor = o.value("anchor", 1);
        } else if (kind == "energy") {
            req.kind = ObservableKind::energy;
        } else if (kind == "staggered") {
            req.kind = ObservableKind::staggered;
        } else {
            throw DomainError("unknown observable type '" + kind + "'");
        }
        if (o.contains("axis")) req.axis = parse_axis(o.at("axis").get<std::string>());
        if (o.contains("sites") && o.at("sites").is_array()) {
            req.sites = o.at("sites").get<std::vector<int>>();
        }
        s.observables.push_back(std::move(req));
    }

    for (const json& sp : doc.value("spectra", json::array())) {
        require_keys(sp, {"site", "axis", "window", "detrend"}, "spectrum request");
        SpectrumRequest req;
        req.site = sp.at("site").get<int>();
        req.axis = parse_axis(sp.at("axis").get<std::string>());
        req.window = parse_window(sp.value("window", "rectangular"));
        req.detrend = sp.value("detrend", true);
        s.spectra.push_back(req);
    }

    s.seed = doc.value("seed", std::uint64_t{1});
    s.sector = parse_sector_mode(doc.value("sector", "auto"));
    s.output_prefix = doc.value("output_prefix", "run");
    if (s.output_prefix.empty() ||
        s.output_prefix.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.+-") !=
            std::string::npos) {
        throw DomainError("output_prefix must be a plain file-name stem");
    }
    return s;
}

json scenario_as_json(const Scenario& s) {
    json doc;
    doc["schema"] = kScenarioSchema;
    doc["chain"] = {{"n_sites", s.chain.n_sites},
                    {"j", s.chain.exchange_j},
                    {"delta", s.chain.anisotropy_delta}};
    switch (s.initial.kind) {
        case InitialStateKind::ground_state:
            doc["initial_state"] = {{"type", "ground_state"}};
            break;
        case InitialStateKind::product:
            doc["initial_state"] = {{"type", "product"}, {"pattern", s.initial.detail}};
            break;
        case InitialStateKind::state_file:
            doc["initial_state"] = {{"type", "state_file"}, {"path", s.initial.detail}};
            break;
    }
    doc["events"] = json::array();
    for (const MeasurementEvent& ev : s.events) {
        json e = {{"t", ev.t}, {"site", ev.site}, {"axis", std::string(1, axis_label(ev.axis))}};
        if (ev.nonselective) {
            e["nonselective"] = true;
        } else {
            e["sign"] = std::string(1, sign_label(ev.sign));
        }
        doc["events"].push_back(std::move(e));
    }
    doc["grid"] = {{"t_start", s.grid.t_start}, {"t_end", s.grid.t_end}, {"dt", s.grid.dt}};
    doc["observables"] = json::array();
    for (const ObservableRequest& o : s.observables) {
        json entry;
        switch (o.kind) {
            case ObservableKind::magnetization:
                entry = {{"type", "magnetization"},
                         {"axis", std::string(1, axis_label(o.axis))}};
                break;
            case ObservableKind::correlation:
                entry = {{"type", "correlation"},
                         {"axis", std::string(1, axis_label(o.axis))},
                         {"anchor", o.anchor}};
                break;
            case ObservableKind::energy: entry = {{"type", "energy"}}; break;
            case ObservableKind::staggered: entry = {{"type", "staggered"}}; break;
        }
        if (o.kind == ObservableKind::magnetization || o.kind == ObservableKind::correlation) {
            if (o.sites.empty()) {
                entry["sites"] = "all";
            } else {
                entry["sites"] = o.sites;
            }
        }
        doc["observables"].push_back(std::move(entry));
    }
    doc["spectra"] = json::array();
    for (const SpectrumRequest& sp : s.spectra) {
        doc["spectra"].push_back({{"site", sp.site},
                                  {"axis", std::string(1, axis_label(sp.axis))},
                                  {"window", window_label(sp.window)},
                                  {"detrend", sp.detrend}});
    }
    doc["seed"] = s.seed;
    doc["sector"] = sector_mode_label(s.sector);
    doc["output_prefix"] = s.output_prefix;
    return doc;
}

// ---- event scheduling -------------------------------------------------

struct SnappedEvent {
    int grid_index;
    double t_snapped;
};

SnappedEvent snap_event(const MeasurementEvent& ev, const GridParams& g) {
    const long long k = std::llround((ev.t - g.t_start) / g.dt);
    return {static_cast<int>(k), g.t_start + static_cast<double>(k) * g.dt};
}

// ---- sampling ---------------------------------------------------------

struct Branch {
    StateVector state;
    double weight;
};

double ensemble_average(const std::vector<Branch>& branches,
                        const std::function<double(const StateVector&)>& f) {
    double num = 0.0, den = 0.0;
    for (const Branch& b : branches) {
        num += b.weight * f(b.state);
        den += b.weight;
    }
    return num / den;
}

std::vector<int> site_list(const ObservableRequest& req, int n_sites) {
    if (!req.sites.empty()) return req.sites;
    std::vector<int> all(n_sites);
    for (int i = 0; i < n_sites; ++i) all[i] = i + 1;
    return all;
}

std::string correlation_tag(const ObservableRequest& req) {
    const char a = axis_label(req.axis);
    return std::string{a, a, '@'} + std::to_string(req.anchor);
}

void sample_all(std::vector<SampleRow>& rows, const std::vector<Branch>& branches,
                const Scenario& s, const ChainSpec& spec, double t, const char* suffix) {
    for (const ObservableRequest& req : s.observables) {
        switch (req.kind) {
            case ObservableKind::magnetization: {
                const std::string tag = std::string(1, axis_label(req.axis)) + suffix;
                for (int site : site_list(req, s.chain.n_sites)) {
                    rows.push_back({t, site, tag,
                                    ensemble_average(branches, [&](const StateVector& psi) {
                                        return magnetization(psi, site, req.axis);
                                    })});
                }
                break;
            }
            case ObservableKind::correlation: {
                const std::string tag = correlation_tag(req) + suffix;
                for (int site : site_list(req, s.chain.n_sites)) {
                    rows.push_back({t, site, tag,
                                    ensemble_average(branches, [&](const StateVector& psi) {
                                        return correlation(psi, req.anchor, site, req.axis);
                                    })});
                }
                break;
            }
            case ObservableKind::energy:
                rows.push_back({t, 0, std::string("energy") + suffix,
                                ensemble_average(branches, [&](const StateVector& psi) {
                                    return energy(psi, spec);
                                })});
                break;
            case ObservableKind::staggered:
                rows.push_back({t, 0, std::string("staggered") + suffix,
                                ensemble_average(branches, staggered_magnetization)});
                break;
        }
    }
}

// ---- propagator registry ---------------------------------------------

// One propagator per basis in play: the full space plus at most a handful
// of S^z sectors (a z projection keeps its sector, an x/y projection moves
// the branch to the full space).
class Engine {
  public:
    Engine(const ChainSpec& spec, const PropagatorConfig& cfg) : spec_(spec), cfg_(cfg) {}

    ChebyshevPropagator& propagator_for(const StateVector& psi) {
        const SzSector* key = psi.sector.get();
        auto it = props_.find(key);
        if (it == props_.end()) {
            auto op = psi.sector
                          ? std::make_unique<HamiltonianOp>(
                                HamiltonianOp::sector_restricted(spec_, psi.sector))
                          : std::make_unique<HamiltonianOp>(HamiltonianOp::full_space(spec_));
            auto prop = std::make_unique<ChebyshevPropagator>(*op, cfg_);
            it = props_.emplace(key, Entry{std::move(op), std::move(prop)}).first;
        }
        return *it->second.prop;
    }

  private:
    struct Entry {
        std::unique_ptr<HamiltonianOp> op;
        std::unique_ptr<ChebyshevPropagator> prop;
    };
    ChainSpec spec_;
    PropagatorConfig cfg_;
    std::map<const SzSector*, Entry> props_;
};

[[noreturn]] void rethrow_with_context(const std::string& ctx) {
    try {
        throw;
    } catch (const ImpossibleOutcomeError& e) {
        throw ImpossibleOutcomeError(ctx + e.what(), e.probability);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(ctx + e.what(), e.best_residual);
    } catch (const PrecisionError& e) {
        throw PrecisionError(ctx + e.what(), e.achieved_bound);
    } catch (const ContractViolation& e) {
        throw ContractViolation(ctx + e.what());
    } catch (const DomainError& e) {
        throw DomainError(ctx + e.what());
    } catch (const LookupError& e) {
        throw LookupError(ctx + e.what());
    } catch (const IoError& e) {
        throw IoError(ctx + e.what());
    }
}

// ---- checkpoints ------------------------------------------------------

std::uint64_t scenario_fingerprint(const Scenario& s, const PropagatorConfig& pcfg) {
    const std::string text = scenario_as_json(s).dump() + "|" + kVersionString + "|" +
                             std::to_string(pcfg.coefficient_cutoff);
    return fnv1a64_bytes(text.data(), text.size());
}

struct CheckpointState {
    int event_index = -1;  // last completed event
    int grid_index = -1;   // grid sample the checkpoint was taken at
    std::vector<Branch> branches;
    std::vector<SampleRow> rows;
    std::vector<EventRecord> event_records;
};

void write_checkpoint(const CheckpointState& cp, const Scenario& s,
                      const PropagatorConfig& pcfg, const std::filesystem::path& out_dir) {
    json doc;
    doc["schema"] = kCheckpointSchema;
    doc["version"] = kVersionString;
    doc["fingerprint"] = hex64(scenario_fingerprint(s, pcfg));
    doc["event_index"] = cp.event_index;
    doc["grid_index"] = cp.grid_index;
    doc["branches"] = json::array();
    for (std::size_t b = 0; b < cp.branches.size(); ++b) {
        const std::string name =
            s.output_prefix + "_checkpoint_b" + std::to_string(b) + ".state";
        save_state(cp.branches[b].state, out_dir / name);
        doc["branches"].push_back({{"file", name}, {"weight", cp.branches[b].weight}});
    }
    doc["rows"] = json::array();
    for (const SampleRow& r : cp.rows) doc["rows"].push_back({r.t, r.site, r.axis, r.value});
    doc["events"] = json::array();
    for (const EventRecord& e : cp.event_records) {
        doc["events"].push_back({{"index", e.index},
                                 {"t_requested", e.t_requested},
                                 {"t_snapped", e.t_snapped},
                                 {"grid_index", e.grid_index},
                                 {"probabilities", e.probabilities}});
    }
    const std::filesystem::path path = out_dir / (s.output_prefix + "_checkpoint.json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(1) << "\n";
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

bool load_checkpoint(CheckpointState& cp, const Scenario& s, const PropagatorConfig& pcfg,
                     const std::filesystem::path& out_dir) {
    const std::filesystem::path path = out_dir / (s.output_prefix + "_checkpoint.json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("cannot parse checkpoint " + path.string() + ": " + e.what());
    }
    if (doc.value("schema", "") != kCheckpointSchema) {
        throw IoError(path.string() + " is not a checkpoint file");
    }
    if (doc.value("fingerprint", "") != hex64(scenario_fingerprint(s, pcfg))) {
        throw IoError("checkpoint " + path.string() +
                      " was produced by a different scenario, seed, or version");
    }
    cp.event_index = doc.at("event_index").get<int>();
    cp.grid_index = doc.at("grid_index").get<int>();
    for (const json& b : doc.at("branches")) {
        Branch branch{load_state(out_dir / b.at("file").get<std::string>()),
                      b.at("weight").get<double>()};
        cp.branches.push_back(std::move(branch));
    }
    for (const json& r : doc.at("rows")) {
        cp.rows.push_back(SampleRow{r.at(0).get<double>(), r.at(1).get<int>(),
                                    r.at(2).get<std::string>(), r.at(3).get<double>()});
    }
    for (const json& e : doc.at("events")) {
        cp.event_records.push_back(EventRecord{
            e.at("index").get<int>(), e.at("t_requested").get<double>(),
            e.at("t_snapped").get<double>(), e.at("grid_index").get<int>(),
            e.at("probabilities").get<std::vector<double>>()});
    }
    return true;
}

}  // namespace

// ---- public entry points ----------------------------------------------

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("scenario is not valid structured text: ") + e.what());
    }
    try {
        return scenario_from_json(doc);
    } catch (const json::exception& e) {
        throw IoError(std::string("scenario field has the wrong type: ") + e.what());
    }
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario_text(buf.str());
    } catch (const Error&) {
        try {
            throw;
        } catch (const IoError& e) {
            throw IoError(path.string() + ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError(path.string() + ": " + e.what());
        }
    }
}

std::string scenario_to_json(const Scenario& s) { return scenario_as_json(s).dump(1) + "\n"; }

ValidationReport validate_scenario(const Scenario& s, double memory_cap_bytes) {
    ValidationReport r;
    auto bad = [&](std::string m) { r.violations.push_back(std::move(m)); };

    const int n = s.chain.n_sites;
    const bool chain_ok = n >= 4 && n <= kMaxSites && n % 2 == 0 &&
                          std::isfinite(s.chain.exchange_j) && s.chain.exchange_j > 0 &&
                          std::isfinite(s.chain.anisotropy_delta);
    if (n % 2 != 0) bad("n_sites must be even");
    if (n < 4 || n > kMaxSites) {
        bad("n_sites must lie in [4, " + std::to_string(kMaxSites) + "]");
    }
    if (!(std::isfinite(s.chain.exchange_j) && s.chain.exchange_j > 0)) {
        bad("exchange coupling j must be positive and finite");
    }
    if (!std::isfinite(s.chain.anisotropy_delta)) bad("delta must be finite");

    const bool grid_ok = std::isfinite(s.grid.t_start) && std::isfinite(s.grid.t_end) &&
                         std::isfinite(s.grid.dt) && s.grid.dt > 0 &&
                         s.grid.t_end >= s.grid.t_start;
    if (!grid_ok) bad("grid needs dt > 0 and t_end >= t_start, all finite");

    if (s.observables.empty()) bad("observable list is empty");
    for (std::size_t i = 0; i < s.observables.size(); ++i) {
        const ObservableRequest& o = s.observables[i];
        if (chain_ok) {
            for (int site : o.sites) {
                if (site < 1 || site > n) {
                    bad("observable " + std::to_string(i) + ": site " + std::to_string(site) +
                        " outside 1.." + std::to_string(n));
                }
            }
            if (o.kind == ObservableKind::correlation && (o.anchor < 1 || o.anchor > n)) {
                bad("observable " + std::to_string(i) + ": anchor outside 1.." +
                    std::to_string(n));
            }
        }
    }

    double prev_t = -std::numeric_limits<double>::infinity();
    int prev_k = -1;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const MeasurementEvent& ev = s.events[i];
        const std::string label = "event " + std::to_string(i);
        if (chain_ok && (ev.site < 1 || ev.site > n)) {
            bad(label + ": site outside 1.." + std::to_string(n));
        }
        if (!(ev.t > prev_t)) bad(label + ": event times must be strictly increasing");
        prev_t = ev.t;
        if (!grid_ok) continue;
        const double slack = s.grid.dt / 100.0;
        if (ev.t < s.grid.t_start - slack || ev.t > s.grid.t_end + slack) {
            bad(label + ": time " + std::to_string(ev.t) + " outside the sampling grid span");
            continue;
        }
        const SnappedEvent snap = snap_event(ev, s.grid);
        if (std::abs(ev.t - snap.t_snapped) > slack) {
            bad(label + ": time " + std::to_string(ev.t) +
                " is further than dt/100 from the nearest grid sample");
        }
        if (snap.grid_index <= prev_k) {
            bad(label + ": snaps to the same grid sample as the previous event");
        }
        prev_k = snap.grid_index;
    }

    switch (s.initial.kind) {
        case InitialStateKind::ground_state: break;
        case InitialStateKind::product: {
            if (chain_ok && s.initial.detail.size() != static_cast<std::size_t>(n)) {
                bad("product pattern length must equal n_sites");
            }
            if (s.initial.detail.find_first_not_of("ud") != std::string::npos) {
                bad("product pattern may contain only 'u' and 'd'");
            }
            break;
        }
        case InitialStateKind::state_file:
            if (s.initial.detail.empty()) {
                bad("initial state file path is empty");
            } else if (!std::filesystem::exists(s.initial.detail)) {
                bad("initial state file not found: " + s.initial.detail);
            }
            break;
    }

    if (grid_ok) {
        const std::size_t samples = make_time_grid(s.grid.t_start, s.grid.t_end, s.grid.dt)
                                        .sample_times()
                                        .size();
        for (std::size_t i = 0; i < s.spectra.size(); ++i) {
            const SpectrumRequest& sp = s.spectra[i];
            const std::string label = "spectrum request " + std::to_string(i);
            if (samples < 2) bad(label + ": needs at least two grid samples");
            if (chain_ok && (sp.site < 1 || sp.site > n)) {
                bad(label + ": site outside 1.." + std::to_string(n));
            }
            const bool sampled =
                std::any_of(s.observables.begin(), s.observables.end(),
                            [&](const ObservableRequest& o) {
                                return o.kind == ObservableKind::magnetization &&
                                       o.axis == sp.axis &&
                                       (o.sites.empty() ||
                                        std::find(o.sites.begin(), o.sites.end(), sp.site) !=
                                            o.sites.end());
                            });
            if (!sampled) {
                bad(label + ": series S" + std::string(1, axis_label(sp.axis)) + " at site " +
                    std::to_string(sp.site) + " is not in the observable list");
            }
        }
    }

    if (chain_ok) {
        double max_branches = 1.0;
        for (const MeasurementEvent& ev : s.events) {
            if (ev.nonselective) max_branches *= 2.0;
        }
        // conservative full-space sizing: one vector per branch plus the
        // propagator's four scratch vectors, 16 bytes per amplitude
        r.memory_estimate_bytes = std::ldexp(1.0, n) * 16.0 * (max_branches + 4.0);
        if (r.memory_estimate_bytes > memory_cap_bytes) {
            std::ostringstream msg;
            msg << "estimated peak state memory " << r.memory_estimate_bytes / 1e9
                << " GB exceeds the cap " << memory_cap_bytes / 1e9 << " GB";
            r.warnings.push_back(msg.str());
        }
    }
    return r;
}

RunManifest run_scenario(const Scenario& raw, const RunOptions& opts) {
    Scenario s = raw;
    if (opts.seed_override) s.seed = *opts.seed_override;
    if (opts.dt_override) s.grid.dt = *opts.dt_override;
    if (opts.sector_override) s.sector = *opts.sector_override;

    const ValidationReport report = validate_scenario(s, opts.memory_cap_bytes);
    if (!report.ok()) {
        std::string joined = "scenario is invalid:";
        for (const std::string& v : report.violations) joined += "\n  - " + v;
        throw DomainError(joined);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const ChainSpec spec(s.chain.n_sites, s.chain.exchange_j, s.chain.anisotropy_delta);
    const TimeGrid grid = make_time_grid(s.grid.t_start, s.grid.t_end, s.grid.dt);
    const std::vector<double> times = grid.sample_times();

    PropagatorConfig pcfg = default_propagator_config(spec);
    if (opts.cutoff_override) pcfg.coefficient_cutoff = *opts.cutoff_override;

    LanczosConfig lcfg;
    lcfg.seed = s.seed;
    lcfg.use_sz_zero_sector = s.sector != SectorMode::off;

    std::filesystem::create_directories(opts.out_dir);

    // schedule
    std::vector<int> event_at(times.size(), -1);
    std::vector<EventRecord> records(s.events.size());
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const SnappedEvent snap = snap_event(s.events[i], s.grid);
        event_at[static_cast<std::size_t>(snap.grid_index)] = static_cast<int>(i);
        records[i] = EventRecord{static_cast<int>(i), s.events[i].t, snap.t_snapped,
                                 snap.grid_index, {}};
    }

    Engine engine(spec, pcfg);
    std::vector<SampleRow> rows;
    std::vector<Branch> branches;
    std::size_t start_k = 0;
    int events_done = 0;

    CheckpointState cp;
    if (opts.resume && load_checkpoint(cp, s, pcfg, opts.out_dir)) {
        branches = std::move(cp.branches);
        rows = std::move(cp.rows);
        for (const EventRecord& e : cp.event_records) records[e.index] = e;
        events_done = cp.event_index + 1;
        start_k = static_cast<std::size_t>(cp.grid_index) + 1;
    } else {
        switch (s.initial.kind) {
            case InitialStateKind::ground_state:
                branches.push_back({lanczos_ground_state(spec, lcfg).state, 1.0});
                break;
            case InitialStateKind::product: {
                BasisCode code = 0;
                for (int b = 0; b < spec.n_sites; ++b) {
                    if (s.initial.detail[static_cast<std::size_t>(b)] == 'u') {
                        code |= BasisCode{1} << b;
                    }
                }
                std::shared_ptr<const SzSector> sector;
                if (s.sector != SectorMode::off) {
                    sector = make_sector(spec, code_total_sz(code, spec.n_sites));
                }
                branches.push_back({product_state(spec, code, sector), 1.0});
                break;
            }
            case InitialStateKind::state_file: {
                StateVector psi = load_state(s.initial.detail);
                if (!(psi.spec.n_sites == spec.n_sites &&
                      psi.spec.exchange_j == spec.exchange_j &&
                      psi.spec.anisotropy_delta == spec.anisotropy_delta)) {
                    throw ContractViolation("initial state file was written for a different "
                                            "chain than the scenario requests");
                }
                if (s.sector == SectorMode::off && psi.sector) psi = embed_full(psi);
                branches.push_back({std::move(psi), 1.0});
                break;
            }
        }
    }

    for (std::size_t k = start_k; k < times.size(); ++k) {
        const double t = times[k];
        if (k > 0) {
            try {
                for (Branch& b : branches) {
                    engine.propagator_for(b.state).advance(b.state, s.grid.dt);
                }
            } catch (const Error&) {
                std::ostringstream ctx;
                ctx << "while advancing to t=" << t << ": ";
                rethrow_with_context(ctx.str());
            }
        }

        const int ei = event_at[k];
        if (ei >= 0 && ei >= events_done) {
            sample_all(rows, branches, s, spec, t, ":pre");
            const MeasurementEvent& ev = s.events[static_cast<std::size_t>(ei)];
            try {
                double total_weight = 0.0;
                for (const Branch& b : branches) total_weight += b.weight;
                std::vector<Branch> next;
                if (ev.nonselective) {
                    double p_plus = 0.0, p_minus = 0.0;
                    for (Branch& b : branches) {
                        auto outcomes = measure_nonselective(b.state, ev.site, ev.axis);
                        p_plus += b.weight * outcomes[0].probability;
                        p_minus += b.weight * outcomes[1].probability;
                        for (MeasurementOutcome& out : outcomes) {
                            if (out.probability > kProbabilityFloor) {
                                next.push_back(
                                    {std::move(out.state), b.weight * out.probability});
                            }
                        }
                    }
                    records[static_cast<std::size_t>(ei)].probabilities = {
                        p_plus / total_weight, p_minus / total_weight};
                } else {
                    double kept = 0.0;
                    for (Branch& b : branches) {
                        try {
                            MeasurementOutcome out =
                                project(b.state, {ev.site, ev.axis, ev.sign});
                            kept += b.weight * out.probability;
                            next.push_back({std::move(out.state), b.weight * out.probability});
                        } catch (const ImpossibleOutcomeError&) {
                            // this branch of the mixture never produces the outcome
                        }
                    }
                    if (next.empty()) {
                        throw ImpossibleOutcomeError("selected outcome has probability below " +
                                                         std::to_string(kProbabilityFloor),
                                                     kept / total_weight);
                    }
                    records[static_cast<std::size_t>(ei)].probabilities = {kept / total_weight};
                }
                branches = std::move(next);
            } catch (const Error&) {
                std::ostringstream ctx;
                ctx << "event " << ei << " at t=" << records[static_cast<std::size_t>(ei)].t_snapped
                    << ": ";
                rethrow_with_context(ctx.str());
            }
            events_done = ei + 1;
            sample_all(rows, branches, s, spec, t, "");
            if (opts.checkpoints) {
                CheckpointState snap_cp;
                snap_cp.event_index = ei;
                snap_cp.grid_index = static_cast<int>(k);
                snap_cp.branches = branches;
                snap_cp.rows = rows;
                snap_cp.event_records.assign(records.begin(),
                                             records.begin() + events_done);
                write_checkpoint(snap_cp, s, pcfg, opts.out_dir);
            }
        } else {
            sample_all(rows, branches, s, spec, t, "");
        }
    }

    // outputs
    RunManifest manifest;
    manifest.version = kVersionString;
    manifest.scenario = s;
    manifest.lanczos = lcfg;
    manifest.propagator = pcfg;
    manifest.sector_pipeline =
        std::all_of(branches.begin(), branches.end(),
                    [](const Branch& b) { return b.state.sector != nullptr; });
    manifest.events = records;
    manifest.rows = rows;

    const char* ext = opts.format == TableFormat::csv ? ".csv" : ".json";
    auto emit = [&](const std::string& name, const std::vector<SampleRow>& data) {
        const std::filesystem::path path = opts.out_dir / name;
        export_table(data, path, opts.format);
        manifest.outputs.emplace_back(name, fnv1a64_file(path));
    };

    emit(s.output_prefix + "_series" + ext, rows);

    for (const ObservableRequest& o : s.observables) {
        if (o.kind != ObservableKind::magnetization || !o.sites.empty()) continue;
        const std::string tag(1, axis_label(o.axis));
        std::vector<SampleRow> even, odd;
        for (const SampleRow& r : rows) {
            if (r.axis != tag && r.axis != tag + ":pre") continue;
            (r.site % 2 == 0 ? even : odd).push_back(r);
        }
        emit(s.output_prefix + "_m" + tag + "_even" + ext, even);
        emit(s.output_prefix + "_m" + tag + "_odd" + ext, odd);
    }

    for (const SpectrumRequest& sp : s.spectra) {
        const std::string tag(1, axis_label(sp.axis));
        TimeSeriesRecord series;
        series.id = "S" + tag + "_" + std::to_string(sp.site);
        for (const SampleRow& r : rows) {
            if (r.axis == tag && r.site == sp.site) {
                series.times.push_back(r.t);
                series.values.push_back(r.value);
            }
        }
        const Spectrum spectrum = fourier_spectrum(series, sp.window, sp.detrend);
        std::vector<SampleRow> spec_rows;
        for (std::size_t i = 0; i < spectrum.omegas.size(); ++i) {
            spec_rows.push_back(
                {spectrum.omegas[i], sp.site, tag + ":spectrum", spectrum.magnitudes[i]});
        }
        emit(s.output_prefix + "_spectrum_" + tag + std::to_string(sp.site) + ext, spec_rows);
    }

    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json doc;
    doc["schema"] = kManifestSchema;
    doc["version"] = manifest.version;
    doc["scenario"] = scenario_as_json(s);
    doc["resolved"]["lanczos"] = {
        {"max_krylov_dim", lcfg.max_krylov_dim},
        {"energy_tol", lcfg.energy_tol},
        {"reorthogonalization",
         lcfg.reorthogonalize == Reorthogonalization::full ? "full" : "selective"},
        {"seed", lcfg.seed},
        {"max_restarts", lcfg.max_restarts},
        {"sz_zero_sector", lcfg.use_sz_zero_sector}};
    doc["resolved"]["propagator"] = {{"coefficient_cutoff", pcfg.coefficient_cutoff},
                                     {"bounds", {pcfg.bounds.first, pcfg.bounds.second}},
                                     {"max_order", pcfg.max_order}};
    doc["resolved"]["grid"] = {{"t_start", grid.t_start},
                               {"t_end", grid.t_end},
                               {"dt", grid.dt},
                               {"samples", times.size()}};
    doc["resolved"]["sector_pipeline"] = manifest.sector_pipeline;
    doc["resolved"]["format"] = opts.format == TableFormat::csv ? "csv" : "json";
    doc["events"] = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const MeasurementEvent& ev = s.events[i];
        doc["events"].push_back(
            {{"index", records[i].index},
             {"t_requested", records[i].t_requested},
             {"t_snapped", records[i].t_snapped},
             {"grid_index", records[i].grid_index},
             {"site", ev.site},
             {"axis", std::string(1, axis_label(ev.axis))},
             {"mode", ev.nonselective ? std::string("nonselective")
                                      : std::string(1, sign_label(ev.sign))},
             {"probabilities", records[i].probabilities}});
    }
    doc["wall_clock_seconds"] = manifest.wall_clock_seconds;
    doc["outputs"] = json::array();
    for (const auto& [name, checksum] : manifest.outputs) {
        doc["outputs"].push_back({{"file", name}, {"fnv1a64", hex64(checksum)}});
    }

    manifest.manifest_path = opts.out_dir / (s.output_prefix + "_manifest.json");
    std::ofstream out(manifest.manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + manifest.manifest_path.string() + " for writing");
    out << doc.dump(1) << "\n";
    if (!out.flush()) throw IoError("write failed for " + manifest.manifest_path.string());
    return manifest;
}

}  // namespace spinring
