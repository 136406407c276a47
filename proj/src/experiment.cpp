#include "pamfk/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "pamfk/chaos.hpp"
#include "pamfk/covariance.hpp"
#include "pamfk/kernels.hpp"
#include "pamfk/moments.hpp"
#include "pamfk/spde.hpp"

namespace pamfk::experiment {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(const std::string& field, const std::string& message)
{
    throw ConfigError(field, message);
}

const json& need(const json& obj, const std::string& field)
{
    if (!obj.contains(field)) fail(field, "missing");
    return obj.at(field);
}

double need_number(const json& obj, const std::string& field)
{
    const json& v = need(obj, field);
    if (!v.is_number()) fail(field, "must be a number");
    return v.get<double>();
}

double get_number(const json& obj, const std::string& field, double fallback)
{
    if (!obj.contains(field)) return fallback;
    if (!obj.at(field).is_number()) fail(field, "must be a number");
    return obj.at(field).get<double>();
}

std::int64_t get_int(const json& obj, const std::string& field, std::int64_t fallback)
{
    if (!obj.contains(field)) return fallback;
    if (!obj.at(field).is_number_integer()) fail(field, "must be an integer");
    return obj.at(field).get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& field, const std::string& fallback)
{
    if (!obj.contains(field)) return fallback;
    if (!obj.at(field).is_string()) fail(field, "must be a string");
    return obj.at(field).get<std::string>();
}

Point parse_point(const json& v, const std::string& field, int dimension)
{
    Point p;
    if (v.is_number()) {
        p.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& c : v) {
            if (!c.is_number()) fail(field, "coordinates must be numbers");
            p.push_back(c.get<double>());
        }
    } else {
        fail(field, "must be a number or an array of numbers");
    }
    if (dimension > 0 && static_cast<int>(p.size()) != dimension)
        fail(field, "expected " + std::to_string(dimension) + " coordinates");
    return p;
}

// Named densities available from configs. Each carries its growth envelope.
struct RegistryEntry {
    DensityFn fn;
    GrowthCertificate certificate;
};

const std::map<std::string, RegistryEntry>& density_registry()
{
    static const std::map<std::string, RegistryEntry> registry = {
        {"one", {[](std::span<const double>) { return 1.0; }, GrowthCertificate::bounded(1.0)}},
        {"gauss_bump",
         {[](std::span<const double> x) { return std::exp(-0.5 * sq_norm(x)); },
          GrowthCertificate::bounded(1.0)}},
        {"exp_abs",
         {[](std::span<const double> x) { return std::exp(std::sqrt(sq_norm(x))); },
          GrowthCertificate{1.0, 1.0, 1.0}}},
        {"gauss_growth",
         {[](std::span<const double> x) { return std::exp(sq_norm(x)); },
          GrowthCertificate{1.0, 1.0, 2.0}}},
    };
    return registry;
}

struct Parsed {
    int dimension = 1;
    double t = 0.0;
    Point x;
    std::optional<CovarianceModel> model;
    double epsilon = 0.0;
    std::vector<double> epsilon_ladder;
    std::optional<SignedMeasure> u0;
    McConfig mc;
    json normalized;  // config echo with defaults filled in
};

CovarianceSpec parse_model_spec(const json& model, int dimension)
{
    const std::string kind = get_string(model, "kind", "");
    if (kind == "zero") return CovarianceSpec::zero(dimension);
    if (kind == "white_noise") return CovarianceSpec::white_noise(dimension);
    if (kind == "gaussian") return CovarianceSpec::gaussian(dimension, need_number(model, "sigma"));
    if (kind == "riesz") return CovarianceSpec::riesz(dimension, need_number(model, "beta"));
    fail("model.kind", "unknown kind '" + kind +
                           "' (expected zero | white_noise | gaussian | riesz)");
}

Parsed parse_config(const json& cfg, const Overrides& overrides)
{
    if (!cfg.is_object()) fail("(root)", "config must be a JSON object");
    Parsed p;

    const json& geometry = need(cfg, "geometry");
    p.dimension = static_cast<int>(get_int(geometry, "dimension", 1));
    if (p.dimension < 1) fail("geometry.dimension", "must be >= 1");
    p.t = need_number(geometry, "t");
    if (p.t <= 0.0) fail("geometry.t", "must be positive");
    p.x = parse_point(need(geometry, "x"), "geometry.x", p.dimension);

    const json& model = need(cfg, "model");
    if (static_cast<int>(get_int(model, "dimension", p.dimension)) != p.dimension)
        fail("model.dimension", "must match geometry.dimension");
    CovarianceSpec spec = parse_model_spec(model, p.dimension);
    try {
        p.model = CovarianceModel::create(spec);
    } catch (const std::invalid_argument& e) {
        fail("model", e.what());
    }
    p.epsilon = get_number(model, "epsilon", 0.0);
    if (p.epsilon < 0.0) fail("model.epsilon", "must be nonnegative");
    if (model.contains("epsilon_ladder")) {
        for (const auto& v : model.at("epsilon_ladder")) {
            if (!v.is_number()) fail("model.epsilon_ladder", "entries must be numbers");
            p.epsilon_ladder.push_back(v.get<double>());
        }
        for (std::size_t i = 1; i < p.epsilon_ladder.size(); ++i)
            if (!(p.epsilon_ladder[i] < p.epsilon_ladder[i - 1]) || p.epsilon_ladder[i] <= 0.0)
                fail("model.epsilon_ladder", "must be strictly decreasing and positive");
    }

    const json& initial = need(cfg, "initial");
    std::vector<Atom> atoms;
    if (initial.contains("atoms")) {
        for (const auto& a : initial.at("atoms")) {
            Atom atom;
            atom.location = parse_point(need(a, "location"), "initial.atoms.location", p.dimension);
            atom.weight = need_number(a, "weight");
            atoms.push_back(std::move(atom));
        }
    }
    DensityFn density;
    std::optional<GrowthCertificate> certificate;
    std::string density_name;
    if (initial.contains("density")) {
        density_name = get_string(initial, "density", "");
        const auto& registry = density_registry();
        const auto it = registry.find(density_name);
        if (it == registry.end()) {
            std::string names;
            for (const auto& [k, v] : registry) names += (names.empty() ? "" : ", ") + k;
            fail("initial.density", "unknown density '" + density_name + "' (registry: " + names + ")");
        }
        density = it->second.fn;
        certificate = it->second.certificate;
        if (initial.contains("growth")) {
            const json& g = initial.at("growth");
            certificate = GrowthCertificate{get_number(g, "amplitude", 1.0),
                                            get_number(g, "rate", 0.0),
                                            get_number(g, "exponent", 0.0)};
        }
    }
    if (atoms.empty() && !density) fail("initial", "needs atoms and/or a density");
    try {
        p.u0 = SignedMeasure(p.dimension, std::move(atoms), std::move(density), certificate);
    } catch (const std::invalid_argument& e) {
        fail("initial", e.what());
    }

    const json mc = cfg.contains("mc") ? cfg.at("mc") : json::object();
    p.mc.samples = get_int(mc, "samples", 10000);
    if (p.mc.samples < 1) fail("mc.samples", "must be >= 1");
    p.mc.steps_per_segment = static_cast<int>(get_int(mc, "steps_per_segment", 128));
    if (p.mc.steps_per_segment < 1) fail("mc.steps_per_segment", "must be >= 1");
    p.mc.seed = static_cast<std::uint64_t>(get_int(mc, "seed", 1));
    p.mc.workers = static_cast<int>(get_int(mc, "workers", 1));
    if (p.mc.workers < 1) fail("mc.workers", "must be >= 1");
    p.mc.max_atom_tuples = get_int(mc, "max_atom_tuples", 4096);
    if (overrides.seed) p.mc.seed = *overrides.seed;
    if (overrides.workers) p.mc.workers = *overrides.workers;

    // normalized echo: the parsed config with every default made explicit
    p.normalized = cfg;
    p.normalized["geometry"]["dimension"] = p.dimension;
    p.normalized["geometry"]["x"] = p.x;
    p.normalized["mc"] = {{"samples", p.mc.samples},
                          {"steps_per_segment", p.mc.steps_per_segment},
                          {"seed", p.mc.seed},
                          {"workers", p.mc.workers},
                          {"max_atom_tuples", p.mc.max_atom_tuples}};
    p.normalized["model"]["epsilon"] = p.epsilon;
    return p;
}

json estimate_to_json(const MomentEstimate& est)
{
    return json{{"mean", est.mean},
                {"standard_error", est.standard_error},
                {"samples", est.samples},
                {"ess", est.ess},
                {"low_ess", est.low_ess()},
                {"log_weight_max", est.log_weights.max},
                {"log_weight_mean", est.log_weights.mean},
                {"log_weight_variance", est.log_weights.variance},
                {"representation", to_string(est.representation)}};
}

void merge_into(json& record, const json& fields)
{
    for (const auto& [key, value] : fields.items()) record[key] = value;
}

json run_moment(const Parsed& p, const json& cfg)
{
    const json moment = cfg.contains("moment") ? cfg.at("moment") : json::object();
    const int k = static_cast<int>(get_int(moment, "k", 2));
    std::string repr = get_string(moment, "representation", "auto");
    if (repr == "auto") repr = p.u0->atoms().empty() ? "free" : "bridge";

    json record;
    record["k"] = k;
    if (!p.epsilon_ladder.empty()) {
        if (repr != "free") fail("moment.representation", "epsilon_ladder needs the free form");
        const LadderMoment ladder =
            moment_u_free_ladder(k, p.t, p.x, *p.u0, *p.model, p.epsilon_ladder, p.mc);
        merge_into(record, estimate_to_json(ladder.levels.back()));
        record["epsilon_levels"] = ladder.eps;
        json means = json::array();
        for (const auto& lvl : ladder.levels) means.push_back(lvl.mean);
        record["level_means"] = means;
        record["mean"] = ladder.extrapolated;
        record["extrapolation_residual"] = ladder.residual;
        record["diverged"] = ladder.diverged;
        return record;
    }
    MomentEstimate est;
    if (repr == "free")
        est = moment_u_free(k, p.t, p.x, *p.u0, *p.model, p.epsilon, p.mc);
    else if (repr == "bridge")
        est = moment_u_bridge(k, p.t, p.x, *p.u0, *p.model, p.epsilon, p.mc);
    else
        fail("moment.representation", "expected free | bridge | auto");
    merge_into(record, estimate_to_json(est));
    return record;
}

json run_derivative(const Parsed& p, const json& cfg)
{
    const json& block = need(cfg, "derivative");
    DerivativeSpec spec;
    spec.order = static_cast<int>(get_int(block, "order", 1));
    spec.moment_k = static_cast<int>(get_int(block, "k", 2));
    for (const auto& v : need(block, "r")) {
        if (!v.is_number()) fail("derivative.r", "entries must be numbers");
        spec.r.push_back(v.get<double>());
    }
    for (const auto& v : need(block, "z"))
        spec.z.push_back(parse_point(v, "derivative.z", p.dimension));
    try {
        spec.validate(p.t, p.dimension);
    } catch (const std::invalid_argument& e) {
        fail("derivative", e.what());
    }
    const MomentEstimate est =
        moment_derivative(spec, p.t, p.x, *p.u0, *p.model, p.epsilon, p.mc);
    json record = estimate_to_json(est);
    record["order"] = spec.order;
    record["k"] = spec.moment_k;
    return record;
}

json run_chaos(const Parsed& p, const json& cfg)
{
    const json chaos = cfg.contains("chaos") ? cfg.at("chaos") : json::object();
    const int n_max = static_cast<int>(get_int(chaos, "n_max", 8));
    std::optional<double> cutoff;
    if (chaos.contains("M")) cutoff = need_number(chaos, "M");
    ChaosSeries series;
    try {
        series = second_moment_series(p.t, p.x, *p.model, n_max, cutoff);
    } catch (const std::invalid_argument& e) {
        fail("chaos", e.what());
    }
    json terms = json::array();
    for (const auto& term : series.terms)
        terms.push_back({{"order", term.order},
                         {"value", term.value},
                         {"quadrature_error", term.quadrature_error}});
    return json{{"chaos_value", series.value},
                {"chaos_tail_bound", series.tail_bound},
                {"chaos_quadrature_error", series.quadrature_error},
                {"chaos_n_max", n_max},
                {"spectral_cutoff", series.spectral_cutoff},
                {"c_m", series.c_m},
                {"d_m", series.d_m},
                {"terms", terms}};
}

SpdeScheme parse_spde_scheme(const json& block)
{
    SpdeScheme scheme;
    scheme.dx = get_number(block, "dx", 0.05);
    scheme.dt = get_number(block, "dt", 0.5 * scheme.dx * scheme.dx);
    scheme.domain_width = get_number(block, "L", 4.0);
    try {
        scheme.validate();
    } catch (const std::invalid_argument& e) {
        fail("spde", e.what());
    }
    return scheme;
}

json run_spde(const Parsed& p, const json& cfg)
{
    if (p.dimension != 1) fail("spde", "the finite-difference oracle is d = 1 only");
    const json& block = need(cfg, "spde");
    const SpdeScheme scheme = parse_spde_scheme(block);
    const int k = static_cast<int>(get_int(block, "k", 2));
    const std::int64_t reps = get_int(block, "replications", 10000);
    const std::string init_name = get_string(block, "initial", "one");
    SpdeInitial initial;
    if (init_name == "one")
        initial = SpdeInitial::constant_one;
    else if (init_name == "dirac")
        initial = SpdeInitial::discrete_dirac;
    else
        fail("spde.initial", "expected one | dirac");

    const MomentEstimate est =
        direct_moment(k, p.t, p.x[0], scheme, initial, reps, p.mc.seed, p.mc.workers);
    json record = estimate_to_json(est);
    record["k"] = k;
    record["dx"] = scheme.dx;
    record["dt"] = scheme.dt;
    record["L"] = scheme.domain_width;
    return record;
}

json run_validate(const Parsed& p, const json& cfg)
{
    const json moment = cfg.contains("moment") ? cfg.at("moment") : json::object();
    const int k = static_cast<int>(get_int(moment, "k", 2));
    if (k != 2) fail("moment.k", "validate compares against the second-moment oracle (k = 2)");

    json record;
    double mc_value = 0.0;
    double mc_uncertainty = 0.0;
    if (!p.epsilon_ladder.empty()) {
        const LadderMoment ladder =
            moment_u_free_ladder(k, p.t, p.x, *p.u0, *p.model, p.epsilon_ladder, p.mc);
        merge_into(record, estimate_to_json(ladder.levels.back()));
        record["epsilon_levels"] = ladder.eps;
        record["mean"] = ladder.extrapolated;
        record["extrapolation_residual"] = ladder.residual;
        record["diverged"] = ladder.diverged;
        mc_value = ladder.extrapolated;
        mc_uncertainty =
            3.0 * ladder.levels.back().standard_error + ladder.residual;
    } else {
        const MomentEstimate est = moment_u_free(k, p.t, p.x, *p.u0, *p.model, p.epsilon, p.mc);
        merge_into(record, estimate_to_json(est));
        mc_value = est.mean;
        mc_uncertainty = 3.0 * est.standard_error;
    }
    record["k"] = k;

    merge_into(record, run_chaos(p, cfg));
    record.erase("terms");
    const double chaos_value = record.at("chaos_value").get<double>();
    const double chaos_slack = record.at("chaos_tail_bound").get<double>() +
                               record.at("chaos_quadrature_error").get<double>();
    record["agreement_mc_chaos"] =
        std::abs(mc_value - chaos_value) <= mc_uncertainty + chaos_slack;

    if (cfg.contains("spde")) {
        json spde_rec = run_spde(p, cfg);
        record["spde_mean"] = spde_rec.at("mean");
        record["spde_standard_error"] = spde_rec.at("standard_error");
        const double spde_value = spde_rec.at("mean").get<double>();
        const double scale = std::max({std::abs(mc_value), std::abs(chaos_value), 1e-300});
        record["agreement_mc_spde"] = std::abs(mc_value - spde_value) <= 0.05 * scale;
        record["agreement_chaos_spde"] = std::abs(chaos_value - spde_value) <= 0.05 * scale;
    }
    return record;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json run_experiment(const json& input, const std::string& command, const Overrides& overrides)
{
    // a record echoes its config; accept either form
    const json& cfg = (input.is_object() && input.contains("config")) ? input.at("config") : input;

    const auto started = std::chrono::steady_clock::now();
    const Parsed p = parse_config(cfg, overrides);

    json record;
    if (command == "moment")
        record = run_moment(p, cfg);
    else if (command == "derivative-moment")
        record = run_derivative(p, cfg);
    else if (command == "chaos")
        record = run_chaos(p, cfg);
    else if (command == "spde")
        record = run_spde(p, cfg);
    else if (command == "validate")
        record = run_validate(p, cfg);
    else
        fail("command", "unknown command '" + command + "'");

    record["schema_version"] = kSchemaVersion;
    record["command"] = command;
    record["config"] = p.normalized;
    const auto finished = std::chrono::steady_clock::now();
    record["wall_time_seconds"] = std::chrono::duration<double>(finished - started).count();
    return record;
}

namespace {

void write_json_array(const json& record, const std::string& path)
{
    json array = json::array();
    {
        std::ifstream in(path);
        if (in.good()) {
            json existing;
            in >> existing;
            if (existing.is_array()) array = std::move(existing);
        }
    }
    array.push_back(record);
    std::ofstream out(path, std::ios::trunc);
    out << array.dump(2) << "\n";
}

std::string csv_escape(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}

void write_csv(const json& record, const std::string& path)
{
    static const char* columns[] = {"command",  "schema_version", "mean",
                                    "standard_error", "samples",  "ess",
                                    "representation", "wall_time_seconds"};
    bool fresh = true;
    {
        std::ifstream in(path);
        fresh = !in.good() || in.peek() == std::ifstream::traits_type::eof();
    }
    std::ofstream out(path, std::ios::app);
    if (fresh) {
        for (std::size_t i = 0; i < std::size(columns); ++i)
            out << (i ? "," : "") << columns[i];
        out << ",config\n";
    }
    for (std::size_t i = 0; i < std::size(columns); ++i) {
        if (i) out << ",";
        if (!record.contains(columns[i])) continue;
        const json& v = record.at(columns[i]);
        if (v.is_number_float())
            out << format_double(v.get<double>());
        else if (v.is_number_integer())
            out << v.get<std::int64_t>();
        else
            out << csv_escape(v.get<std::string>());
    }
    out << "," << csv_escape(record.at("config").dump()) << "\n";
}

} // namespace

void write_record(const json& record, const std::string& path, const std::string& format)
{
    if (format == "json")
        write_json_array(record, path);
    else if (format == "csv")
        write_csv(record, path);
    else
        throw ConfigError("output.format", "expected json | csv");
}

} // namespace pamfk::experiment
