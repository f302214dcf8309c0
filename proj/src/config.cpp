#include "twpa/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "twpa/errors.hpp"

namespace twpa::config {

using nlohmann::json;

Profile profile_from_string(const std::string& s) {
    if (s == "ci") {
        return Profile::Ci;
    }
    if (s == "full") {
        return Profile::Full;
    }
    throw ConfigError("unknown profile '" + s + "' (expected ci or full)");
}

std::string to_string(Profile p) { return p == Profile::Ci ? "ci" : "full"; }

std::vector<double> Grid::resolve() const {
    if (!values.empty()) {
        return values;
    }
    if (points < 1) {
        throw ConfigError("empty grid");
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] =
            points == 1 ? start : start + (stop - start) * i / static_cast<double>(points - 1);
    }
    return out;
}

circuit::DriveSpec DriveConfig::base() const {
    circuit::DriveSpec d;
    d.duration = duration;
    d.settle_time = settle_time;
    d.window = window;
    d.dt = dt;
    d.ramp_time = ramp_time;
    d.samples_per_period = samples_per_period;
    return d;
}

std::uint64_t RunConfig::chain_seed() const { return chain_seed_set ? chain.rng_seed : master_seed; }

circuit::ChainConfig RunConfig::resolved_chain() const {
    circuit::ChainConfig c = chain;
    c.rng_seed = chain_seed();
    return c;
}

RunConfig defaults(Profile profile) {
    RunConfig cfg;
    cfg.profile = profile;
    if (profile == Profile::Ci) {
        cfg.chain.n_cells = 100;
        cfg.flux_sweep.flux = {0.3, 0.7, 9, {}};
        cfg.gain_phase.phase = {0.0, 6.283185307179586, 9, {}};
        cfg.sms.n_rep = 200'000;
        cfg.sms.phase = {0.0, 6.283185307179586, 5, {}};
        cfg.tms.n_rep = 200'000;
        cfg.tms.r = {0.0, 1.0, 6, {}};
    } else {
        cfg.chain.n_cells = 700;
        cfg.flux_sweep.flux = {0.3, 0.7, 17, {}};
        cfg.gain_phase.phase = {0.0, 6.283185307179586, 17, {}};
    }
    return cfg;
}

namespace {

// Object view that records which keys were consumed.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    [[nodiscard]] const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    [[nodiscard]] std::string at(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    void get(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) {
                throw ConfigError(at(key) + ": expected a number");
            }
            out = v->get<double>();
        }
    }
    void get(const char* key, std::optional<double>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number()) {
                throw ConfigError(at(key) + ": expected a number or null");
            }
            out = v->get<double>();
        }
    }
    void get(const char* key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(at(key) + ": expected an integer");
            }
            out = v->get<int>();
        }
    }
    void get(const char* key, std::int64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(at(key) + ": expected an integer");
            }
            out = v->get<std::int64_t>();
        }
    }
    void get(const char* key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) {
                throw ConfigError(at(key) + ": expected a non-negative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, unsigned& out) {
        std::uint64_t tmp = out;
        get(key, tmp);
        out = static_cast<unsigned>(tmp);
    }
    void get(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) {
                throw ConfigError(at(key) + ": expected a string");
            }
            out = v->get<std::string>();
        }
    }
    template <typename T>
    void get(const char* key, std::vector<T>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) {
                throw ConfigError(at(key) + ": expected an array");
            }
            std::vector<T> tmp;
            for (const auto& e : *v) {
                if (!e.is_number() || (std::is_integral_v<T> && !e.is_number_integer())) {
                    throw ConfigError(at(key) + ": array element of the wrong type");
                }
                tmp.push_back(e.get<T>());
            }
            out = std::move(tmp);
        }
    }
    void get(const char* key, Grid& out) {
        if (const json* v = find(key)) {
            Obj g(*v, at(key));
            Grid tmp = out;
            const bool explicit_values = v->contains("values");
            g.get("start", tmp.start);
            g.get("stop", tmp.stop);
            g.get("points", tmp.points);
            g.get("values", tmp.values);
            g.finish();
            if (explicit_values && tmp.values.empty()) {
                throw ConfigError(at(key) + ": empty grid");
            }
            if (!explicit_values) {
                tmp.values.clear();
            }
            out = std::move(tmp);
        }
    }

    [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k)) {
                throw ConfigError("unknown key '" + at(k.c_str()) + "'");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

template <typename F>
void section(Obj& parent, const char* key, F&& fill) {
    if (const json* v = parent.find(key)) {
        Obj o(*v, parent.at(key));
        fill(o);
        o.finish();
    }
}

void check(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

void validate(const RunConfig& cfg) {
    try {
        cfg.resolved_chain().validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("chain: ") + e.what());
    }
    const auto& d = cfg.drive;
    check(d.pump_frequency > 0.0, "drive.pump_frequency must be positive");
    check(d.pump_current >= 0.0 && d.signal_current >= 0.0, "drive currents must be non-negative");
    check(d.detuning >= 0.0 && d.detuning < d.pump_frequency / 2.0,
          "drive.detuning must lie in [0, pump_frequency/2)");
    check(d.window > 0.0 && d.settle_time >= 0.0 && d.ramp_time >= 0.0 && d.duration >= 0.0 &&
              d.dt >= 0.0,
          "drive timing fields must be non-negative and window positive");
    check(d.samples_per_period >= 64, "drive.samples_per_period must be at least 64");
    check(cfg.coeffs.r > 0.0 && cfg.coeffs.r < 1.0 / 3.0, "coeffs.r must lie in (0, 1/3)");
    check(cfg.coeffs.i_c > 0.0, "coeffs.i_c must be positive");
    (void)cfg.coeffs.flux.resolve();
    (void)cfg.flux_sweep.flux.resolve();
    (void)cfg.gain_phase.phase.resolve();
    (void)cfg.sms.phase.resolve();
    (void)cfg.tms.r.resolve();
    check(!cfg.gain_phase.pump_current || *cfg.gain_phase.pump_current >= 0.0,
          "gain_phase.pump_current must be non-negative");
    check(cfg.sms.n_rep >= 2 && cfg.tms.n_rep >= 2, "n_rep must be at least 2");
    check(cfg.sms.squeeze_db >= 0.0 && cfg.sms.antisqueeze_db >= 0.0,
          "sms squeeze levels are magnitudes and must be non-negative");
    check(cfg.sms.added_photons >= 0.0 && cfg.tms.added_photons >= 0.0 &&
              cfg.tms.thermal_photons >= 0.0,
          "photon numbers must be non-negative");
    check(cfg.sms.gain_drift > -1.0 && cfg.tms.gain_drift > -1.0, "gain_drift must exceed -1");
    for (double r : cfg.tms.r.resolve()) {
        check(r >= 0.0, "tms.r values must be non-negative");
    }
    const auto& s = cfg.sntj_fit;
    check(s.frequency > 0.0 && s.bandwidth > 0.0, "sntj_fit frequency and bandwidth must be positive");
    check(s.guess_t_sys > 0.0 && s.guess_t_electron > 0.0, "sntj_fit guesses must be positive");
    check(s.synthetic_offsets.size() == s.synthetic_gains_db.size() && !s.synthetic_offsets.empty(),
          "sntj_fit.synthetic_offsets and synthetic_gains_db must be non-empty and of equal length");
    check(s.synthetic_points >= 10 && s.synthetic_v_max > 0.0 && s.synthetic_noise >= 0.0 &&
              s.synthetic_t_sys > 0.0 && s.synthetic_t_electron > 0.0,
          "sntj_fit synthetic source parameters out of range");
    const auto& n = cfg.normalize;
    check(!n.eta || (*n.eta > 0.0 && *n.eta <= 1.0), "normalize.eta must lie in (0, 1]");
    check(n.f_acq > 0.0 && n.t_int > 0.0 && n.epsilon > 0.0, "normalize f_acq, t_int, epsilon must be positive");
    check(n.chain_fraction > 0.0 && n.chain_fraction <= 1.0, "normalize.chain_fraction must lie in (0, 1]");
    check(cfg.attenuation.frequency > 0.0, "attenuation.frequency must be positive");
}

}  // namespace

RunConfig parse(const json& doc, Profile profile) {
    RunConfig cfg = defaults(profile);
    try {
        Obj root(doc, "");
        root.get("master_seed", cfg.master_seed);
        root.get("output_dir", cfg.output_dir);
        root.get("threads", cfg.threads);
        if (const json* p = root.find("profile")) {
            // Informational; the profile is chosen on the command line.
            if (!p->is_string() || profile_from_string(p->get<std::string>()) != profile) {
                throw ConfigError("profile: does not match the selected profile");
            }
        }
        section(root, "chain", [&](Obj& o) {
            auto& c = cfg.chain;
            o.get("n_cells", c.n_cells);
            o.get("c_j", c.c_j);
            o.get("c_g", c.c_g);
            o.get("i_c_nominal", c.i_c_nominal);
            o.get("r", c.r);
            o.get("tan_delta", c.tan_delta);
            o.get("flux_polarity", c.flux_polarity);
            o.get("disorder_amplitude", c.disorder_amplitude);
            if (o.has("rng_seed")) {
                o.get("rng_seed", c.rng_seed);
                cfg.chain_seed_set = true;
            }
            o.get("z0", c.z0);
        });
        section(root, "drive", [&](Obj& o) {
            auto& d = cfg.drive;
            o.get("pump_frequency", d.pump_frequency);
            o.get("pump_current", d.pump_current);
            o.get("signal_current", d.signal_current);
            o.get("detuning", d.detuning);
            o.get("duration", d.duration);
            o.get("settle_time", d.settle_time);
            o.get("window", d.window);
            o.get("dt", d.dt);
            o.get("ramp_time", d.ramp_time);
            o.get("samples_per_period", d.samples_per_period);
        });
        section(root, "coeffs", [&](Obj& o) {
            o.get("flux", cfg.coeffs.flux);
            o.get("r", cfg.coeffs.r);
            o.get("i_c", cfg.coeffs.i_c);
        });
        section(root, "flux_sweep", [&](Obj& o) {
            o.get("flux", cfg.flux_sweep.flux);
            o.get("marks", cfg.flux_sweep.marks);
        });
        section(root, "gain_phase", [&](Obj& o) {
            o.get("flux", cfg.gain_phase.flux);
            o.get("pump_current", cfg.gain_phase.pump_current);
            o.get("phase", cfg.gain_phase.phase);
        });
        section(root, "sms", [&](Obj& o) {
            auto& s = cfg.sms;
            o.get("squeeze_db", s.squeeze_db);
            o.get("antisqueeze_db", s.antisqueeze_db);
            o.get("added_photons", s.added_photons);
            o.get("gain_drift", s.gain_drift);
            o.get("gain_uncertainty_db", s.gain_uncertainty_db);
            o.get("n_rep", s.n_rep);
            o.get("phase", s.phase);
            o.get("input", s.input);
        });
        section(root, "tms", [&](Obj& o) {
            auto& t = cfg.tms;
            o.get("r", t.r);
            o.get("thermal_photons", t.thermal_photons);
            o.get("added_photons", t.added_photons);
            o.get("gain_drift", t.gain_drift);
            o.get("gain_uncertainty_db", t.gain_uncertainty_db);
            o.get("n_rep", t.n_rep);
            o.get("input", t.input);
        });
        section(root, "sntj_fit", [&](Obj& o) {
            auto& s = cfg.sntj_fit;
            o.get("input", s.input);
            o.get("frequency", s.frequency);
            o.get("bandwidth", s.bandwidth);
            o.get("guess_g_sys_db", s.guess_g_sys_db);
            o.get("guess_t_sys", s.guess_t_sys);
            o.get("guess_t_electron", s.guess_t_electron);
            o.get("synthetic_offsets", s.synthetic_offsets);
            o.get("synthetic_gains_db", s.synthetic_gains_db);
            o.get("synthetic_t_sys", s.synthetic_t_sys);
            o.get("synthetic_t_electron", s.synthetic_t_electron);
            o.get("synthetic_noise", s.synthetic_noise);
            o.get("synthetic_v_max", s.synthetic_v_max);
            o.get("synthetic_points", s.synthetic_points);
        });
        section(root, "normalize", [&](Obj& o) {
            auto& n = cfg.normalize;
            o.get("eta", n.eta);
            o.get("flux", n.flux);
            o.get("g_sys_db", n.g_sys_db);
            o.get("f_acq", n.f_acq);
            o.get("t_int", n.t_int);
            o.get("epsilon", n.epsilon);
            o.get("loss_correction_db", n.loss_correction_db);
            o.get("chain_fraction", n.chain_fraction);
        });
        section(root, "attenuation", [&](Obj& o) {
            auto& a = cfg.attenuation;
            o.get("s21_off_db", a.s21_off_db);
            o.get("eta_db", a.eta_db);
            o.get("flux", a.flux);
            o.get("g_sys_db", a.g_sys_db);
            o.get("frequency", a.frequency);
        });
        root.finish();
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    validate(cfg);
    return cfg;
}

RunConfig load(const std::string& path, Profile profile) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse(doc, profile);
}

namespace {
json grid_json(const Grid& g) {
    const std::vector<double> v = g.resolve();
    if (!g.values.empty()) {
        return {{"values", v}};
    }
    return {{"start", g.start}, {"stop", g.stop}, {"points", g.points}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
}  // namespace

json to_json(const RunConfig& cfg) {
    const auto c = cfg.resolved_chain();
    const auto& d = cfg.drive;
    const auto& s = cfg.sms;
    const auto& t = cfg.tms;
    const auto& f = cfg.sntj_fit;
    const auto& n = cfg.normalize;
    const auto& a = cfg.attenuation;
    return {
        {"master_seed", cfg.master_seed},
        {"profile", to_string(cfg.profile)},
        {"chain",
         {{"n_cells", c.n_cells},
          {"c_j", c.c_j},
          {"c_g", c.c_g},
          {"i_c_nominal", c.i_c_nominal},
          {"r", c.r},
          {"tan_delta", c.tan_delta},
          {"flux_polarity", c.flux_polarity},
          {"disorder_amplitude", c.disorder_amplitude},
          {"rng_seed", c.rng_seed},
          {"z0", c.z0}}},
        {"drive",
         {{"pump_frequency", d.pump_frequency},
          {"pump_current", d.pump_current},
          {"signal_current", d.signal_current},
          {"detuning", d.detuning},
          {"duration", d.duration},
          {"settle_time", d.settle_time},
          {"window", d.window},
          {"dt", d.dt},
          {"ramp_time", d.ramp_time},
          {"samples_per_period", d.samples_per_period}}},
        {"coeffs", {{"flux", grid_json(cfg.coeffs.flux)}, {"r", cfg.coeffs.r}, {"i_c", cfg.coeffs.i_c}}},
        {"flux_sweep", {{"flux", grid_json(cfg.flux_sweep.flux)}, {"marks", cfg.flux_sweep.marks}}},
        {"gain_phase",
         {{"flux", cfg.gain_phase.flux},
          {"pump_current", cfg.gain_phase.pump_current.value_or(d.pump_current)},
          {"phase", grid_json(cfg.gain_phase.phase)}}},
        {"sms",
         {{"squeeze_db", s.squeeze_db},
          {"antisqueeze_db", s.antisqueeze_db},
          {"added_photons", s.added_photons},
          {"gain_drift", s.gain_drift},
          {"gain_uncertainty_db", s.gain_uncertainty_db},
          {"n_rep", s.n_rep},
          {"phase", grid_json(s.phase)},
          {"input", s.input}}},
        {"tms",
         {{"r", grid_json(t.r)},
          {"thermal_photons", t.thermal_photons},
          {"added_photons", t.added_photons},
          {"gain_drift", t.gain_drift},
          {"gain_uncertainty_db", t.gain_uncertainty_db},
          {"n_rep", t.n_rep},
          {"input", t.input}}},
        {"sntj_fit",
         {{"input", f.input},
          {"frequency", f.frequency},
          {"bandwidth", f.bandwidth},
          {"guess_g_sys_db", f.guess_g_sys_db},
          {"guess_t_sys", f.guess_t_sys},
          {"guess_t_electron", f.guess_t_electron},
          {"synthetic_offsets", f.synthetic_offsets},
          {"synthetic_gains_db", f.synthetic_gains_db},
          {"synthetic_t_sys", f.synthetic_t_sys},
          {"synthetic_t_electron", f.synthetic_t_electron},
          {"synthetic_noise", f.synthetic_noise},
          {"synthetic_v_max", f.synthetic_v_max},
          {"synthetic_points", f.synthetic_points}}},
        {"normalize",
         {{"eta", optional_json(n.eta)},
          {"flux", n.flux},
          {"g_sys_db", n.g_sys_db},
          {"f_acq", n.f_acq},
          {"t_int", n.t_int},
          {"epsilon", n.epsilon},
          {"loss_correction_db", n.loss_correction_db},
          {"chain_fraction", n.chain_fraction}}},
        {"attenuation",
         {{"s21_off_db", a.s21_off_db},
          {"eta_db", optional_json(a.eta_db)},
          {"flux", a.flux},
          {"g_sys_db", a.g_sys_db},
          {"frequency", a.frequency}}},
    };
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(cfg).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 finalizer over a combination of the two words.
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace twpa::config
