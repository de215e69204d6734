#include "otrm/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "otrm/bayes.hpp"
#include "otrm/errors.hpp"
#include "otrm/flows.hpp"
#include "otrm/geodesics.hpp"
#include "otrm/io.hpp"
#include "otrm/l2w.hpp"
#include "otrm/measures.hpp"
#include "otrm/ot.hpp"
#include "otrm/stats.hpp"

namespace otrm {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// config plumbing: a JSON config file plus command-line flags that mirror the
// JSON keys one-to-one; a flag that was passed overrides the file value.
// ---------------------------------------------------------------------------

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config: top level must be an object");
    return j;
}

json parse_inline_json(const std::string& text, const std::string& field) {
    try {
        return json::parse(text);
    } catch (...) {
        throw config_error(field + ": not valid JSON");
    }
}

// Registers flags on a subcommand and replays the ones the user actually
// passed onto the merged JSON config.
struct flag_mirror {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::vector<std::function<void(json&)>> replay;

    explicit flag_mirror(CLI::App* s) : sub(s) {
        sub->add_option("--config", config_path, "JSON config file; flags override its keys");
    }

    void add_string(const std::string& flag, const std::string& key) {
        auto val = std::make_shared<std::string>();
        CLI::Option* opt = sub->add_option(flag, *val);
        replay.push_back([opt, val, key](json& c) {
            if (opt->count() > 0) c[key] = *val;
        });
    }

    void add_number(const std::string& flag, const std::string& key) {
        auto val = std::make_shared<double>();
        CLI::Option* opt = sub->add_option(flag, *val);
        replay.push_back([opt, val, key](json& c) {
            if (opt->count() > 0) c[key] = *val;
        });
    }

    void add_integer(const std::string& flag, const std::string& key) {
        auto val = std::make_shared<long long>();
        CLI::Option* opt = sub->add_option(flag, *val);
        replay.push_back([opt, val, key](json& c) {
            if (opt->count() > 0) c[key] = *val;
        });
    }

    void add_unsigned(const std::string& flag, const std::string& key) {
        auto val = std::make_shared<unsigned long long>();
        CLI::Option* opt = sub->add_option(flag, *val);
        replay.push_back([opt, val, key](json& c) {
            if (opt->count() > 0) c[key] = *val;
        });
    }

    void add_bool(const std::string& flag, const std::string& key) {
        auto val = std::make_shared<bool>();
        CLI::Option* opt = sub->add_flag(flag, *val);
        replay.push_back([opt, val, key](json& c) {
            if (opt->count() > 0) c[key] = *val;
        });
    }

    // Inline JSON value (object or array) passed as a string flag.
    void add_json(const std::string& flag, const std::string& key) {
        auto val = std::make_shared<std::string>();
        CLI::Option* opt = sub->add_option(flag, *val);
        replay.push_back([opt, val, key](json& c) {
            if (opt->count() > 0) c[key] = parse_inline_json(*val, key);
        });
    }

    json merged() const {
        json c = load_config_file(config_path);
        for (const auto& f : replay) f(c);
        return c;
    }
};

void add_common(flag_mirror& m) {
    m.add_unsigned("--seed", "seed");
    m.add_integer("--workers", "workers");
    m.add_string("--out", "out");
}

// ---------------------------------------------------------------------------
// typed field extraction with violations that name the field
// ---------------------------------------------------------------------------

const json& field(const json& c, const std::string& key) {
    if (!c.contains(key)) throw config_error(key + ": required");
    return c.at(key);
}

double num_field(const json& c, const std::string& key) {
    const json& v = field(c, key);
    if (!v.is_number()) throw config_error(key + ": must be a number");
    return v.get<double>();
}

double num_field_or(const json& c, const std::string& key, double def) {
    if (!c.contains(key)) return def;
    return num_field(c, key);
}

long long int_field(const json& c, const std::string& key) {
    const json& v = field(c, key);
    if (!v.is_number_integer()) throw config_error(key + ": must be an integer");
    return v.get<long long>();
}

long long int_field_or(const json& c, const std::string& key, long long def) {
    if (!c.contains(key)) return def;
    return int_field(c, key);
}

std::string str_field(const json& c, const std::string& key) {
    const json& v = field(c, key);
    if (!v.is_string()) throw config_error(key + ": must be a string");
    return v.get<std::string>();
}

bool bool_field_or(const json& c, const std::string& key, bool def) {
    if (!c.contains(key)) return def;
    const json& v = c.at(key);
    if (!v.is_boolean()) throw config_error(key + ": must be a boolean");
    return v.get<bool>();
}

std::uint64_t seed_field(const json& c) {
    if (!c.contains("seed")) throw config_error("seed: required (never implicit)");
    const json& v = c.at("seed");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
        return static_cast<std::uint64_t>(v.get<long long>());
    throw config_error("seed: must be a nonnegative integer");
}

int workers_field(const json& c) {
    const long long w = int_field_or(c, "workers", 1);
    if (w < 1) throw config_error("workers: must be >= 1");
    return static_cast<int>(w);
}

std::vector<int> int_list_field(const json& c, const std::string& key) {
    const json& v = field(c, key);
    std::vector<int> out;
    if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(std::stoi(tok));
    } else if (v.is_array()) {
        for (const json& e : v) {
            if (!e.is_number_integer()) throw config_error(key + ": must contain integers");
            out.push_back(static_cast<int>(e.get<long long>()));
        }
    } else {
        throw config_error(key + ": must be an integer list or comma string");
    }
    if (out.empty()) throw config_error(key + ": must not be empty");
    return out;
}

void require_increasing(const std::vector<int>& ns, const std::string& key) {
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1])
            throw config_error(key + ": must be strictly increasing");
}

std::vector<double> grid_field(const json& c, const std::string& key) {
    const json& v = field(c, key);
    std::vector<double> out;
    if (v.is_array()) {
        for (const json& e : v) {
            if (!e.is_number()) throw config_error(key + ": must contain numbers");
            out.push_back(e.get<double>());
        }
    } else if (v.is_string()) {
        // "a:b:count" — count points evenly spaced from a to b inclusive.
        const std::string s = v.get<std::string>();
        double a = 0.0, b = 0.0;
        long long count = 0;
        char c1 = 0, c2 = 0;
        std::stringstream ss(s);
        if (!(ss >> a >> c1 >> b >> c2 >> count) || c1 != ':' || c2 != ':' || count < 2)
            throw config_error(key + ": expected start:end:count with count >= 2");
        for (long long i = 0; i < count; ++i)
            out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    } else {
        throw config_error(key + ": must be a number list or start:end:count string");
    }
    if (out.empty()) throw config_error(key + ": must not be empty");
    return out;
}

std::vector<std::pair<int, int>> pairs_field(const json& c, const std::string& key) {
    const json& v = field(c, key);
    std::vector<std::pair<int, int>> out;
    if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const std::size_t colon = tok.find(':');
            if (colon == std::string::npos)
                throw config_error(key + ": expected n:m pairs separated by commas");
            out.emplace_back(std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1)));
        }
    } else if (v.is_array()) {
        for (const json& e : v) {
            if (!e.is_array() || e.size() != 2)
                throw config_error(key + ": must contain [n, m] pairs");
            out.emplace_back(static_cast<int>(e.at(0).get<long long>()),
                             static_cast<int>(e.at(1).get<long long>()));
        }
    } else {
        throw config_error(key + ": must be a pair list or n:m comma string");
    }
    if (out.empty()) throw config_error(key + ": must not be empty");
    return out;
}

std::vector<double> vector_field_of(const json& c, const std::string& key) {
    const json& v = field(c, key);
    std::vector<double> out;
    if (v.is_array()) {
        for (const json& e : v) {
            if (!e.is_number()) throw config_error(key + ": must contain numbers");
            out.push_back(e.get<double>());
        }
    } else if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(std::stod(tok));
    } else if (v.is_number()) {
        out.push_back(v.get<double>());
    } else {
        throw config_error(key + ": must be a number list");
    }
    return out;
}

// ---------------------------------------------------------------------------
// domain objects from JSON
// ---------------------------------------------------------------------------

base_distribution dist_from_json(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains("kind"))
        throw config_error(key + ": must be an object with a kind");
    const std::string kind = str_field(j, "kind");
    if (kind == "uniform_cube") {
        return base_distribution::uniform_cube(num_field_or(j, "a", 0.0),
                                               num_field_or(j, "b", 1.0),
                                               static_cast<int>(int_field_or(j, "d", 1)));
    }
    if (kind == "gaussian") {
        const double sigma = num_field_or(j, "sigma", 1.0);
        if (j.contains("mean")) {
            std::vector<double> mean = vector_field_of(j, "mean");
            return base_distribution::gaussian(std::move(mean), sigma);
        }
        return base_distribution::gaussian(static_cast<int>(int_field_or(j, "d", 1)), sigma);
    }
    if (kind == "mixture") {
        std::vector<double> means;
        const json& m = field(j, "means");
        if (m.is_array() && !m.empty() && m.at(0).is_array()) {
            for (const json& row : m)
                for (const json& e : row) means.push_back(e.get<double>());
        } else {
            means = vector_field_of(j, "means");
        }
        return base_distribution::mixture(std::move(means), vector_field_of(j, "sigmas"),
                                          vector_field_of(j, "weights"),
                                          static_cast<int>(int_field_or(j, "d", 1)));
    }
    if (kind == "sphere")
        return base_distribution::sphere(static_cast<int>(int_field(j, "d")));
    throw config_error(key + ": unknown kind '" + kind + "'");
}

mixing_spec mixing_from_json(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains("kind"))
        throw config_error(key + ": must be an object with a kind");
    const std::string kind = str_field(j, "kind");
    if (kind == "iid") return mixing_spec::iid();
    if (kind == "geometric") return mixing_spec::geometric(num_field(j, "c"));
    if (kind == "polynomial") return mixing_spec::polynomial(num_field(j, "theta"));
    throw config_error(key + ": unknown kind '" + kind + "'");
}

std::unique_ptr<random_measure_sampler> sampler_from_json(const json& j,
                                                          const std::string& key,
                                                          std::uint64_t seed) {
    if (!j.is_object() || !j.contains("type"))
        throw config_error(key + ": must be an object with a type");
    const std::string type = str_field(j, "type");
    const std::uint64_t tag =
        static_cast<std::uint64_t>(int_field_or(j, "tag", 0));
    if (type == "empirical_iid") {
        return std::make_unique<empirical_iid_sampler>(
            dist_from_json(field(j, "dist"), key + ".dist"),
            static_cast<int>(int_field(j, "n_atoms")), tag);
    }
    if (type == "empirical_ar1") {
        return std::make_unique<empirical_ar1_sampler>(
            num_field(j, "rho"), static_cast<int>(int_field(j, "n_atoms")),
            static_cast<int>(int_field(j, "d")), tag);
    }
    if (type == "mollified") {
        discrete_measure src = read_measure_csv(str_field(j, "source_csv"));
        return std::make_unique<mollified_sampler>(std::move(src), num_field(j, "sigma"),
                                                   static_cast<int>(int_field(j, "n_out")),
                                                   tag);
    }
    if (type == "constant")
        return std::make_unique<constant_sampler>(read_measure_csv(str_field(j, "csv")));
    if (type == "reference") {
        return std::make_unique<constant_sampler>(reference_discretization(
            dist_from_json(field(j, "dist"), key + ".dist"),
            static_cast<int>(int_field(j, "n")), seed));
    }
    throw config_error(key + ": unknown type '" + type + "'");
}

posterior_model model_from_cfg(const json& cfg, int d) {
    posterior_model m0;
    m0.d = d;
    if (cfg.contains("prior_mean")) {
        m0.prior_mean = vector_field_of(cfg, "prior_mean");
        if (static_cast<int>(m0.prior_mean.size()) == 1 && d > 1)
            m0.prior_mean.assign(static_cast<std::size_t>(d), m0.prior_mean[0]);
        if (static_cast<int>(m0.prior_mean.size()) != d)
            throw config_error("prior_mean: size must match the truth dimension");
    } else {
        m0.prior_mean.assign(static_cast<std::size_t>(d), 0.0);
    }
    m0.prior_var = num_field_or(cfg, "prior_var", 1.0);
    m0.likelihood_var = num_field_or(cfg, "likelihood_var", 1.0);
    m0.validate();
    return m0;
}

vector_field_spec field_from_cfg(const json& cfg) {
    vector_field_spec f;
    const std::string name = cfg.contains("field") ? str_field(cfg, "field") : "usa";
    if (name == "usa")
        f.kind = vector_field_spec::family::usa;
    else if (name == "sa")
        f.kind = vector_field_spec::family::sa;
    else
        throw config_error("field: must be 'usa' or 'sa'");
    f.beta = num_field_or(cfg, "beta", 1.0);
    if (!(f.beta > 0.0)) throw config_error("beta: must be positive");
    return f;
}

// Maps a config value to the form it is hashed in: integer-valued numbers
// become doubles so a config-file "beta": 1 matches --beta 1, while seeds and
// stream tags keep their exact integer identity.
json hash_canonical(const json& v, const std::string& key) {
    if (v.is_object()) {
        json out = json::object();
        for (auto it = v.begin(); it != v.end(); ++it)
            out[it.key()] = hash_canonical(it.value(), it.key());
        return out;
    }
    if (v.is_array()) {
        json out = json::array();
        for (const json& e : v) out.push_back(hash_canonical(e, key));
        return out;
    }
    if ((v.is_number_integer() || v.is_number_unsigned()) && key != "seed" &&
        key != "tag") {
        const double d = v.get<double>();
        if (std::abs(d) <= 9007199254740992.0) return json(d);  // exact in a double
    }
    return v;
}

// Hash of the mathematical configuration: command plus merged config with
// execution-only keys (workers, output paths) removed, so reruns at any
// parallelism level embed the same hash. Fields that accept both a compact
// string form and a JSON form ("ns", "t_grid", "pairs") hash by parsed value.
std::string config_hash(const std::string& command, json cfg) {
    cfg.erase("workers");
    cfg.erase("out");
    cfg.erase("energy_out");
    cfg.erase("fit_out");
    if (cfg.contains("ns")) cfg["ns"] = int_list_field(cfg, "ns");
    if (cfg.contains("t_grid")) cfg["t_grid"] = grid_field(cfg, "t_grid");
    if (cfg.contains("pairs")) {
        json arr = json::array();
        for (const auto& [n, m] : pairs_field(cfg, "pairs"))
            arr.push_back(json::array({n, m}));
        cfg["pairs"] = arr;
    }
    return fnv1a_hex(command + "\n" + hash_canonical(cfg, std::string()).dump());
}

std::string out_field(const json& cfg) { return str_field(cfg, "out"); }

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

int cmd_w2(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const std::string hash = config_hash("w2", cfg);
    discrete_measure mu = read_measure_csv(str_field(cfg, "a"));
    discrete_measure nu = read_measure_csv(str_field(cfg, "b"));
    transport_result res = w2_exact(mu, nu);
    if (cfg.contains("out")) {
        json j;
        j["command"] = "w2";
        j["config_hash"] = hash;
        j["seed"] = seed;
        j["w2"] = res.w2;
        j["cost2"] = res.cost2;
        j["coupling_entries"] = res.plan.entries.size();
        write_json_file(out_field(cfg), j);
    }
    std::cout << "w2=" << format17(res.w2) << " cost2=" << format17(res.cost2)
              << " hash=" << hash << "\n";
    return 0;
}

int cmd_d_estimate(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("d-estimate", cfg);
    const int k = static_cast<int>(int_field(cfg, "k"));
    auto sa = sampler_from_json(field(cfg, "a"), "a", seed);
    auto sb = sampler_from_json(field(cfg, "b"), "b", seed);
    l2w_estimate est = estimate_d(*sa, *sb, k, seed, workers);
    json j;
    j["command"] = "d-estimate";
    j["config_hash"] = hash;
    j["seed"] = seed;
    j["k"] = est.k_realizations;
    j["mean_w2_sq"] = est.mean_w2_sq;
    j["std_err"] = est.std_err;
    j["d_value"] = est.d_value;
    write_json_file(out_field(cfg), j);
    std::cout << "d=" << format17(est.d_value) << " mean_w2_sq=" << format17(est.mean_w2_sq)
              << " stderr=" << format17(est.std_err) << " hash=" << hash << "\n";
    return 0;
}

int cmd_geodesic(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const std::string hash = config_hash("geodesic", cfg);
    discrete_measure mu = read_measure_csv(str_field(cfg, "a"));
    discrete_measure nu = read_measure_csv(str_field(cfg, "b"));
    std::vector<double> grid = grid_field(cfg, "t_grid");
    for (double t : grid)
        if (!(t >= 0.0 && t <= 1.0)) throw config_error("t_grid: times must lie in [0, 1]");
    transport_result res = w2_exact(mu, nu);
    std::vector<std::pair<double, discrete_measure>> snaps;
    snaps.reserve(grid.size());
    for (double t : grid) snaps.emplace_back(t, interpolate(res, t));
    write_geodesic_csv(out_field(cfg), snaps, hash, seed);
    std::cout << "w2=" << format17(res.w2) << " kinetic=" << format17(kinetic_energy(res))
              << " snapshots=" << snaps.size() << " hash=" << hash << "\n";
    return 0;
}

int cmd_flow(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("flow", cfg);
    const vector_field_spec f = field_from_cfg(cfg);
    const int n = static_cast<int>(int_field(cfg, "n"));
    const int d = static_cast<int>(int_field(cfg, "d"));
    const double dt = num_field(cfg, "dt");
    const double t_end = num_field(cfg, "t_end");
    const int stride = static_cast<int>(int_field_or(cfg, "stride", 1));
    particle_ensemble e0 = sphere_ensemble(n, d, seed, stream_id(0x464c, 1));
    flow_trajectory traj = simulate(e0, f, dt, t_end, stride, workers);
    write_trajectory_csv(out_field(cfg), traj, hash, seed);
    if (cfg.contains("energy_out")) {
        json j;
        j["command"] = "flow";
        j["config_hash"] = hash;
        j["seed"] = seed;
        j["times"] = traj.times;
        j["energies"] = traj.energies;
        write_json_file(str_field(cfg, "energy_out"), j);
    }
    std::cout << "snapshots=" << traj.times.size()
              << " energy_start=" << format17(traj.energies.front())
              << " energy_end=" << format17(traj.energies.back()) << " hash=" << hash << "\n";
    return 0;
}

int cmd_rates(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("rates", cfg);
    const base_distribution dist = dist_from_json(field(cfg, "dist"), "dist");
    std::vector<int> ns = int_list_field(cfg, "ns");
    require_increasing(ns, "ns");
    const int k = static_cast<int>(int_field(cfg, "k"));
    const mixing_spec mix = cfg.contains("mixing")
                                ? mixing_from_json(cfg.at("mixing"), "mixing")
                                : mixing_spec::iid();
    rate_fit fit = rate_experiment(dist, ns, k, mix, seed, workers);
    write_rows_csv(out_field(cfg), fit.rows, hash, seed);
    if (cfg.contains("fit_out")) {
        json j;
        j["command"] = "rates";
        j["config_hash"] = hash;
        j["seed"] = seed;
        j["slope"] = fit.slope;
        j["intercept"] = fit.intercept;
        j["slope_ci"] = {fit.slope_ci_lo, fit.slope_ci_hi};
        j["floor"] = fit.floor;
        write_json_file(str_field(cfg, "fit_out"), j);
    }
    std::cout << "slope=" << format17(fit.slope) << " ci_lo=" << format17(fit.slope_ci_lo)
              << " ci_hi=" << format17(fit.slope_ci_hi) << " floor=" << format17(fit.floor)
              << " hash=" << hash << "\n";
    return 0;
}

int cmd_mollify(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("mollify", cfg);
    const base_distribution dist = dist_from_json(field(cfg, "dist"), "dist");
    std::vector<int> ns = int_list_field(cfg, "ns");
    require_increasing(ns, "ns");
    const int k = static_cast<int>(int_field(cfg, "k"));
    bandwidth_rule bw;
    bw.c = num_field(cfg, "c");
    bw.decay = bool_field_or(cfg, "decay", true);
    rate_fit fit = mollification_experiment(dist, ns, bw, k, seed, workers);
    write_rows_csv(out_field(cfg), fit.rows, hash, seed);
    std::cout << "slope=" << format17(fit.slope) << " ci_lo=" << format17(fit.slope_ci_lo)
              << " ci_hi=" << format17(fit.slope_ci_hi) << " floor=" << format17(fit.floor)
              << " hash=" << hash << "\n";
    return 0;
}

int cmd_concentration(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("concentration", cfg);
    const base_distribution dist = dist_from_json(field(cfg, "dist"), "dist");
    const int n = static_cast<int>(int_field(cfg, "n"));
    const double delta = num_field(cfg, "delta");
    if (!(delta > 0.0 && delta < 1.0)) throw config_error("delta: must lie in (0, 1)");
    const int k = static_cast<int>(int_field(cfg, "k"));
    concentration_report rep = concentration_experiment(dist, n, delta, k, seed, workers);
    json j;
    j["command"] = "concentration";
    j["config_hash"] = hash;
    j["seed"] = seed;
    j["delta"] = rep.delta;
    j["epsilon_n"] = rep.epsilon_n;
    j["bias_n"] = rep.bias_n;
    j["coverage"] = rep.coverage;
    j["exceedance"] = 1.0 - rep.coverage;
    j["k"] = rep.k;
    j["sub_gaussian_k"] = rep.sub_gaussian_k;
    write_json_file(out_field(cfg), j);
    std::cout << "epsilon_n=" << format17(rep.epsilon_n)
              << " coverage=" << format17(rep.coverage) << " hash=" << hash << "\n";
    return 0;
}

int cmd_clt(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("clt", cfg);
    const base_distribution da = dist_from_json(field(cfg, "dist_a"), "dist_a");
    const base_distribution db = dist_from_json(field(cfg, "dist_b"), "dist_b");
    const auto pairs = pairs_field(cfg, "pairs");
    const int k = static_cast<int>(int_field(cfg, "k"));
    std::vector<clt_row> rows = clt_variance_experiment(da, db, pairs, k, seed, workers);
    std::ofstream out(out_field(cfg));
    if (!out) throw config_error("out: cannot open " + out_field(cfg));
    out << "# config_hash=" << hash << " seed=" << seed << "\n";
    out << "n,m,rescaled_var,stderr\n";
    for (const clt_row& r : rows)
        out << r.n << "," << r.m << "," << format17(r.rescaled_var) << ","
            << format17(r.std_err) << "\n";
    if (!out) throw config_error("out: write failed");
    double lo = rows.front().rescaled_var, hi = rows.front().rescaled_var;
    for (const clt_row& r : rows) {
        lo = std::min(lo, r.rescaled_var);
        hi = std::max(hi, r.rescaled_var);
    }
    std::cout << "rescaled_var_ratio=" << format17(hi / lo) << " rows=" << rows.size()
              << " hash=" << hash << "\n";
    return 0;
}

int cmd_bayes(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("bayes", cfg);
    const base_distribution truth = dist_from_json(field(cfg, "truth"), "truth");
    const posterior_model m0 = model_from_cfg(cfg, truth.d);
    std::vector<int> ns = int_list_field(cfg, "ns");
    require_increasing(ns, "ns");
    const int k = static_cast<int>(int_field(cfg, "k"));
    const int n_atoms = static_cast<int>(int_field_or(cfg, "n_atoms", 512));
    const int n_ref = static_cast<int>(int_field_or(cfg, "n_ref", 4096));
    consistency_result res =
        consistency_experiment(truth, m0, ns, k, seed, workers, n_atoms, n_ref);
    write_rows_csv(out_field(cfg), res.fit.rows, hash, seed);
    if (cfg.contains("fit_out")) {
        json j;
        j["command"] = "bayes";
        j["config_hash"] = hash;
        j["seed"] = seed;
        j["slope"] = res.fit.slope;
        j["slope_ci"] = {res.fit.slope_ci_lo, res.fit.slope_ci_hi};
        j["analytic"] = res.analytic;
        j["floor"] = res.floor;
        write_json_file(str_field(cfg, "fit_out"), j);
    }
    std::cout << "slope=" << format17(res.fit.slope) << " floor=" << format17(res.floor)
              << " hash=" << hash << "\n";
    return 0;
}

int cmd_bayes_flow(const json& cfg) {
    const std::uint64_t seed = seed_field(cfg);
    const int workers = workers_field(cfg);
    const std::string hash = config_hash("bayes-flow", cfg);
    const base_distribution truth = dist_from_json(field(cfg, "truth"), "truth");
    const posterior_model m0 = model_from_cfg(cfg, truth.d);
    std::vector<int> ns = int_list_field(cfg, "ns");
    require_increasing(ns, "ns");
    const vector_field_spec f = field_from_cfg(cfg);
    const double dt = num_field(cfg, "dt");
    const double t_end = num_field(cfg, "t_end");
    const int k = static_cast<int>(int_field(cfg, "k"));
    const int n_atoms = static_cast<int>(int_field_or(cfg, "n_atoms", 512));
    const int n_ref = static_cast<int>(int_field_or(cfg, "n_ref", 2048));
    bayes_flow_result res =
        bayes_flow_experiment(truth, m0, ns, f, dt, t_end, k, seed, workers, n_atoms, n_ref);
    std::ofstream out(out_field(cfg));
    if (!out) throw config_error("out: cannot open " + out_field(cfg));
    out << "# config_hash=" << hash << " seed=" << seed << "\n";
    out << "n,mean_sup_w2sq,stderr,max_gronwall_ratio,satisfied\n";
    for (const bayes_flow_row& r : res.rows)
        out << r.n << "," << format17(r.mean_sup_w2sq) << "," << format17(r.std_err) << ","
            << format17(r.max_gronwall_ratio) << "," << (r.gronwall_satisfied ? 1 : 0) << "\n";
    if (!out) throw config_error("out: write failed");
    double worst = 0.0;
    bool all_ok = true;
    for (const bayes_flow_row& r : res.rows) {
        worst = std::max(worst, r.max_gronwall_ratio);
        all_ok = all_ok && r.gronwall_satisfied;
    }
    std::cout << "max_ratio=" << format17(worst) << " satisfied=" << (all_ok ? 1 : 0)
              << " floor=" << format17(res.floor) << " hash=" << hash << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"optimal transport over random probability measures"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, std::unique_ptr<flag_mirror>>> mirrors;
    const auto make = [&](const std::string& name, const std::string& desc) -> flag_mirror& {
        CLI::App* sub = app.add_subcommand(name, desc);
        mirrors.emplace_back(name, std::make_unique<flag_mirror>(sub));
        flag_mirror& m = *mirrors.back().second;
        add_common(m);
        return m;
    };

    {
        flag_mirror& m = make("w2", "exact W2 between two CSV measures");
        m.add_string("--a", "a");
        m.add_string("--b", "b");
    }
    {
        flag_mirror& m = make("d-estimate", "Monte-Carlo L2-Wasserstein distance");
        m.add_json("--a", "a");
        m.add_json("--b", "b");
        m.add_integer("--k", "k");
    }
    {
        flag_mirror& m = make("geodesic", "displacement interpolation snapshots");
        m.add_string("--a", "a");
        m.add_string("--b", "b");
        m.add_string("--t-grid,--t_grid", "t_grid");
    }
    {
        flag_mirror& m = make("flow", "attention dynamics on the sphere");
        m.add_string("--field", "field");
        m.add_number("--beta", "beta");
        m.add_integer("--n", "n");
        m.add_integer("--d", "d");
        m.add_number("--dt", "dt");
        m.add_number("--t-end,--t_end", "t_end");
        m.add_integer("--stride", "stride");
        m.add_string("--energy-out,--energy_out", "energy_out");
    }
    {
        flag_mirror& m = make("rates", "empirical-measure convergence rates");
        m.add_json("--dist", "dist");
        m.add_string("--ns", "ns");
        m.add_integer("--k", "k");
        m.add_json("--mixing", "mixing");
        m.add_string("--fit-out,--fit_out", "fit_out");
    }
    {
        flag_mirror& m = make("mollify", "mollified empirical-measure rates");
        m.add_json("--dist", "dist");
        m.add_string("--ns", "ns");
        m.add_integer("--k", "k");
        m.add_number("--c", "c");
        m.add_bool("--decay,!--no-decay", "decay");
    }
    {
        flag_mirror& m = make("concentration", "deviation-bound coverage");
        m.add_json("--dist", "dist");
        m.add_integer("--n", "n");
        m.add_number("--delta", "delta");
        m.add_integer("--k", "k");
    }
    {
        flag_mirror& m = make("clt", "two-sample variance stabilization");
        m.add_json("--dist-a,--dist_a", "dist_a");
        m.add_json("--dist-b,--dist_b", "dist_b");
        m.add_string("--pairs", "pairs");
        m.add_integer("--k", "k");
    }
    {
        flag_mirror& m = make("bayes", "posterior consistency in W2");
        m.add_json("--truth", "truth");
        m.add_string("--prior-mean,--prior_mean", "prior_mean");
        m.add_number("--prior-var,--prior_var", "prior_var");
        m.add_number("--likelihood-var,--likelihood_var", "likelihood_var");
        m.add_string("--ns", "ns");
        m.add_integer("--k", "k");
        m.add_integer("--n-atoms,--n_atoms", "n_atoms");
        m.add_integer("--n-ref,--n_ref", "n_ref");
        m.add_string("--fit-out,--fit_out", "fit_out");
    }
    {
        flag_mirror& m = make("bayes-flow", "posterior-initialized flow stability");
        m.add_json("--truth", "truth");
        m.add_string("--prior-mean,--prior_mean", "prior_mean");
        m.add_number("--prior-var,--prior_var", "prior_var");
        m.add_number("--likelihood-var,--likelihood_var", "likelihood_var");
        m.add_string("--ns", "ns");
        m.add_string("--field", "field");
        m.add_number("--beta", "beta");
        m.add_number("--dt", "dt");
        m.add_number("--t-end,--t_end", "t_end");
        m.add_integer("--k", "k");
        m.add_integer("--n-atoms,--n_atoms", "n_atoms");
        m.add_integer("--n-ref,--n_ref", "n_ref");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        json cfg;
        for (auto& [n, m] : mirrors)
            if (n == name) cfg = m->merged();
        if (name == "w2") return cmd_w2(cfg);
        if (name == "d-estimate") return cmd_d_estimate(cfg);
        if (name == "geodesic") return cmd_geodesic(cfg);
        if (name == "flow") return cmd_flow(cfg);
        if (name == "rates") return cmd_rates(cfg);
        if (name == "mollify") return cmd_mollify(cfg);
        if (name == "concentration") return cmd_concentration(cfg);
        if (name == "clt") return cmd_clt(cfg);
        if (name == "bayes") return cmd_bayes(cfg);
        if (name == "bayes-flow") return cmd_bayes_flow(cfg);
        throw config_error("unknown command");
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const guard_error& e) {
        std::cerr << "guard error: " << e.what() << "\n";
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace otrm
