#include "dilab/io.hpp"

#include "dilab/rng.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <regex>

#ifndef DILAB_BUILD_ID
#define DILAB_BUILD_ID "unknown"
#endif

namespace dilab::io {
namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what)
{
    throw ConfigError(path + ": " + what);
}

const char* tag_name(EncoderTag tag)
{
    switch (tag) {
    case EncoderTag::projection:
        return "projection";
    case EncoderTag::deeponet:
        return "deeponet";
    case EncoderTag::pca:
        return "pca";
    case EncoderTag::frame:
        return "frame";
    }
    return "frame";
}

EncoderTag tag_from_name(const std::string& name)
{
    if (name == "projection") {
        return EncoderTag::projection;
    }
    if (name == "deeponet") {
        return EncoderTag::deeponet;
    }
    if (name == "pca") {
        return EncoderTag::pca;
    }
    if (name == "frame") {
        return EncoderTag::frame;
    }
    throw ConfigError("unknown encoder tag '" + name + "'");
}

Activation activation_from_name(const std::string& name, const std::string& path)
{
    if (name == "tanh") {
        return Activation::tanh;
    }
    if (name == "softplus") {
        return Activation::softplus;
    }
    config_error(path, "unknown activation '" + name + "'");
}

const char* activation_name(Activation a) { return a == Activation::tanh ? "tanh" : "softplus"; }

Json matrix_rows(const Matrix& m)
{
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.push_back(to_json(Vector(m.row(i).transpose())));
    }
    return rows;
}

Matrix matrix_from_rows(const Json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) {
        config_error(path, "expected a nonempty array of rows");
    }
    const Vector first = vector_from_json(j.front(), path);
    Matrix m(static_cast<Eigen::Index>(j.size()), first.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Vector row = vector_from_json(j[i], path);
        if (row.size() != first.size()) {
            config_error(path, "ragged rows");
        }
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

/// "i^-s" -> s.
std::optional<double> power_law_exponent(const std::string& text)
{
    static const std::regex pattern(R"(^\s*i\s*\^\s*-\s*([0-9]+(\.[0-9]+)?)\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, pattern)) {
        return std::stod(m[1].str());
    }
    return std::nullopt;
}

Vector weights_from_json(const Json& j, int ambient_dim, const std::string& path)
{
    if (j.is_string()) {
        const auto s = power_law_exponent(j.get<std::string>());
        if (!s) {
            config_error(path, "expected an array or the shorthand \"i^-s\"");
        }
        Vector w(ambient_dim);
        for (int i = 0; i < ambient_dim; ++i) {
            w(i) = std::pow(i + 1.0, -*s);
        }
        return w;
    }
    Vector w = vector_from_json(j, path);
    if (w.size() != ambient_dim) {
        config_error(path, "expected " + std::to_string(ambient_dim) + " entries");
    }
    return w;
}

Architecture architecture_from(ObjectReader& r)
{
    Architecture arch;
    arch.hidden = r.int_list("hidden", {32, 32});
    arch.activation = activation_from_name(r.string("activation", "tanh"), r.path_of("activation"));
    arch.seed = r.unsigned_integer("seed", 0);
    arch.gain = r.number("gain", 1.0);
    arch.k_max = static_cast<int>(r.integer("k_max", kDefaultMaxOrder));
    return arch;
}

std::vector<double> midpoint_sensors(int n)
{
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
        s[static_cast<std::size_t>(q)] = (q + 0.5) / n;
    }
    return s;
}

} // namespace

ObjectReader::ObjectReader(const Json& json, std::string path) : json_(json), path_(std::move(path))
{
    if (!json_.is_object()) {
        config_error(path_, "expected an object");
    }
}

bool ObjectReader::has(const std::string& key) const { return json_.contains(key); }

const Json& ObjectReader::at(const std::string& key)
{
    seen_.insert(key);
    if (!json_.contains(key)) {
        config_error(path_of(key), "missing");
    }
    return json_.at(key);
}

double ObjectReader::number(const std::string& key, double fallback)
{
    seen_.insert(key);
    if (!json_.contains(key)) {
        return fallback;
    }
    const Json& v = json_.at(key);
    if (!v.is_number()) {
        config_error(path_of(key), "expected a number");
    }
    return v.get<double>();
}

std::int64_t ObjectReader::integer(const std::string& key, std::int64_t fallback)
{
    seen_.insert(key);
    if (!json_.contains(key)) {
        return fallback;
    }
    const Json& v = json_.at(key);
    if (!v.is_number_integer()) {
        config_error(path_of(key), "expected an integer");
    }
    return v.get<std::int64_t>();
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key, std::uint64_t fallback)
{
    seen_.insert(key);
    if (!json_.contains(key)) {
        return fallback;
    }
    const Json& v = json_.at(key);
    if (!v.is_number_unsigned()) {
        config_error(path_of(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback)
{
    seen_.insert(key);
    if (!json_.contains(key)) {
        return fallback;
    }
    const Json& v = json_.at(key);
    if (!v.is_string()) {
        config_error(path_of(key), "expected a string");
    }
    return v.get<std::string>();
}

std::vector<int> ObjectReader::int_list(const std::string& key, std::vector<int> fallback)
{
    seen_.insert(key);
    if (!json_.contains(key)) {
        return fallback;
    }
    const Json& v = json_.at(key);
    if (!v.is_array()) {
        config_error(path_of(key), "expected an array of integers");
    }
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) {
            config_error(path_of(key), "expected an array of integers");
        }
        out.push_back(e.get<int>());
    }
    return out;
}

void ObjectReader::finish() const
{
    std::string unknown;
    for (const auto& item : json_.items()) {
        if (!seen_.count(item.key())) {
            unknown += (unknown.empty() ? "" : ", ") + path_of(item.key());
        }
    }
    if (!unknown.empty()) {
        config_error(path_, "unknown key(s): " + unknown);
    }
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const Json& config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(config.dump()));
    return buf;
}

std::string build_id() { return DILAB_BUILD_ID; }

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Json to_json(const Vector& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

Vector vector_from_json(const Json& j, const std::string& path)
{
    if (!j.is_array()) {
        config_error(path, "expected an array of numbers");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            config_error(path, "expected an array of numbers");
        }
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Json to_json(const NetParams& net)
{
    Json weights = Json::array();
    Json biases = Json::array();
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        Json flat = Json::array();
        const Matrix& w = net.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                flat.push_back(w(i, c));
            }
        }
        weights.push_back(std::move(flat));
        biases.push_back(to_json(net.biases[l]));
    }
    return Json{{"layer_dims", net.layer_dims},
                {"weights", std::move(weights)},
                {"biases", std::move(biases)},
                {"activation", activation_name(net.activation)},
                {"k_max", net.k_max}};
}

NetParams net_from_json(const Json& j)
{
    ObjectReader r(j, "net");
    NetParams net;
    net.layer_dims = r.int_list("layer_dims", {});
    net.activation = activation_from_name(r.string("activation", "tanh"), "net.activation");
    net.k_max = static_cast<int>(r.integer("k_max", kDefaultMaxOrder));
    const Json& weights = r.at("weights");
    const Json& biases = r.at("biases");
    r.finish();
    if (net.layer_dims.size() < 2 || !weights.is_array() || !biases.is_array() ||
        weights.size() != net.layer_dims.size() - 1 || biases.size() != weights.size()) {
        throw ConfigError("net: layer_dims, weights and biases disagree");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const int rows = net.layer_dims[l + 1];
        const int cols = net.layer_dims[l];
        const Vector flat = vector_from_json(weights[l], "net.weights");
        if (rows < 1 || cols < 1 || flat.size() != static_cast<Eigen::Index>(rows) * cols) {
            throw ConfigError("net.weights: layer " + std::to_string(l) + " has the wrong size");
        }
        Matrix w(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int c = 0; c < cols; ++c) {
                w(i, c) = flat(static_cast<Eigen::Index>(i) * cols + c);
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(vector_from_json(biases[l], "net.biases"));
    }
    try {
        net.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("net: ") + e.what());
    }
    return net;
}

Json to_json(const BasisSpec& basis)
{
    return Json{{"kind", basis.kind == BasisKind::sine_l2_unit_interval ? "sine" : "coefficient"},
                {"ambient_dim", basis.ambient_dim}};
}

BasisSpec basis_from_json(const Json& j)
{
    ObjectReader r(j, "basis");
    BasisSpec basis;
    const std::string kind = r.string("kind", "sine");
    if (kind == "sine") {
        basis.kind = BasisKind::sine_l2_unit_interval;
    } else if (kind == "coefficient") {
        basis.kind = BasisKind::abstract_coefficient;
    } else {
        config_error("basis.kind", "expected \"sine\" or \"coefficient\"");
    }
    basis.ambient_dim = static_cast<int>(r.integer("ambient_dim", kDefaultAmbientDim));
    r.finish();
    try {
        basis.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("basis: ") + e.what());
    }
    return basis;
}

std::string basis_hash(const BasisSpec& basis) { return config_hash(to_json(basis)); }

Json checkpoint_to_json(const EdaModel& model, const BasisSpec& basis)
{
    return Json{{"encoder", {{"tag", tag_name(model.encoder().tag())}, {"rows", matrix_rows(model.encoder().functionals())}}},
                {"net", to_json(model.net())},
                {"decoder", {{"elements", matrix_rows(model.decoder().elements().transpose())}}},
                {"basis_hash", basis_hash(basis)}};
}

EdaModel checkpoint_from_json(const Json& j, const BasisSpec& basis)
{
    ObjectReader r(j, "checkpoint");
    const std::string stored = r.string("basis_hash", "");
    if (stored != basis_hash(basis)) {
        throw ConfigError("checkpoint: basis hash " + stored + " does not match " + basis_hash(basis));
    }
    ObjectReader enc(r.at("encoder"), "checkpoint.encoder");
    const EncoderTag tag = tag_from_name(enc.string("tag", "frame"));
    Matrix rows = matrix_from_rows(enc.at("rows"), "checkpoint.encoder.rows");
    enc.finish();
    ObjectReader dec(r.at("decoder"), "checkpoint.decoder");
    Matrix elements = matrix_from_rows(dec.at("elements"), "checkpoint.decoder.elements").transpose();
    dec.finish();
    NetParams net = net_from_json(r.at("net"));
    r.finish();
    try {
        return EdaModel(Encoder(std::move(rows), tag), std::move(net), Decoder(std::move(elements)));
    } catch (const Error& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
}

GaussianSpec gaussian_from_json(const Json& j, int ambient_dim, const std::string& path)
{
    ObjectReader r(j, path);
    r.string("kind", "gaussian");
    const double scale = r.number("scale", 1.0);
    GaussianSpec spec;
    spec.eigenvalues = weights_from_json(r.has("eigenvalues") ? r.at("eigenvalues") : Json("i^-2"), ambient_dim,
                                         r.path_of("eigenvalues")) *
                       scale;
    r.finish();
    try {
        spec.validate();
    } catch (const Error& e) {
        config_error(path, e.what());
    }
    return spec;
}

CompactSpec compact_from_json(const Json& j, int ambient_dim, const std::string& path)
{
    ObjectReader r(j, path);
    r.string("kind", "compact");
    const std::string shape_name = r.string("shape", "box");
    CompactShape shape = CompactShape::box;
    if (shape_name == "ellipsoid") {
        shape = CompactShape::ellipsoid;
    } else if (shape_name != "box") {
        config_error(r.path_of("shape"), "expected \"box\" or \"ellipsoid\"");
    }
    try {
        if (r.has("radii")) {
            const Vector radii = vector_from_json(r.at("radii"), r.path_of("radii"));
            r.finish();
            if (radii.size() != ambient_dim) {
                config_error(path, "radii must have " + std::to_string(ambient_dim) + " entries");
            }
            return CompactSpec(std::vector<double>(radii.data(), radii.data() + radii.size()), shape);
        }
        const double c0 = r.number("c0", 1.0);
        r.finish();
        return CompactSpec::hilbert_cube(ambient_dim, c0, shape);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        config_error(path, e.what());
    }
}

BaseMeasure base_measure_from_json(const Json& j, int ambient_dim, const std::string& path)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        config_error(path, "expected an object with a string \"kind\"");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
        return gaussian_from_json(j, ambient_dim, path);
    }
    if (kind == "compact") {
        return compact_from_json(j, ambient_dim, path);
    }
    ObjectReader r(j, path);
    r.string("kind", "");
    EmpiricalSpec e;
    if (kind == "point_mass") {
        e.points.push_back(r.has("at") ? vector_from_json(r.at("at"), r.path_of("at")) : Coeffs::Zero(ambient_dim));
    } else if (kind == "empirical") {
        const Json& pts = r.at("points");
        if (!pts.is_array() || pts.empty()) {
            config_error(r.path_of("points"), "expected a nonempty array");
        }
        for (const auto& p : pts) {
            e.points.push_back(vector_from_json(p, r.path_of("points")));
        }
    } else {
        config_error(path, "unknown measure kind '" + kind + "'");
    }
    r.finish();
    for (const auto& p : e.points) {
        if (p.size() != ambient_dim) {
            config_error(path, "points must have " + std::to_string(ambient_dim) + " coefficients");
        }
    }
    return e;
}

MeasureSampler measure_from_json(const Json& j, int ambient_dim, const std::string& path)
{
    ObjectReader r(j, path);
    const Json default_input{{"kind", "gaussian"}, {"eigenvalues", "i^-2"}};
    const BaseMeasure input =
        base_measure_from_json(r.has("input") ? r.at("input") : default_input, ambient_dim, r.path_of("input"));
    const BaseMeasure dirs = r.has("directions")
                                 ? base_measure_from_json(r.at("directions"), ambient_dim, r.path_of("directions"))
                                 : input;
    const int k = static_cast<int>(r.integer("k", 1));
    const double mass = r.number("mass", 1.0);
    const std::string coupling = r.string("coupling", "product");
    r.finish();
    Coupling c = Coupling::product;
    if (coupling == "diagonal") {
        c = Coupling::diagonal;
    } else if (coupling != "product") {
        config_error(r.path_of("coupling"), "expected \"product\" or \"diagonal\"");
    }
    try {
        return MeasureSampler(input, dirs, k, mass, c);
    } catch (const Error& e) {
        config_error(path, e.what());
    }
}

TargetOperator target_from_json(const Json& j, int ambient_dim, const std::string& path)
{
    ObjectReader r(j, path);
    const std::string kind = r.string("kind", "identity");
    std::optional<TargetOperator> target;
    try {
        if (kind == "identity") {
            target = identity_target(ambient_dim);
        } else if (kind == "zero") {
            target = zero_target(ambient_dim);
        } else if (kind == "diagonal") {
            target = diagonal_target(weights_from_json(r.has("weights") ? r.at("weights") : Json("i^-1"),
                                                       ambient_dim, r.path_of("weights")));
        } else if (kind == "quadratic") {
            const int n_terms = static_cast<int>(r.integer("n_terms", 8));
            target = benchmark_quadratic(ambient_dim, n_terms, r.unsigned_integer("seed", 0));
        } else if (kind == "nemytskii") {
            const std::string phi = r.string("phi", "tanh");
            ScalarMap map = ScalarMap::tanh;
            if (phi == "identity") {
                map = ScalarMap::identity;
            } else if (phi == "softplus") {
                map = ScalarMap::softplus;
            } else if (phi != "tanh") {
                config_error(r.path_of("phi"), "expected \"identity\", \"tanh\" or \"softplus\"");
            }
            target = nemytskii_target(map, static_cast<int>(r.integer("quad_points", 4 * ambient_dim)), ambient_dim);
        } else {
            config_error(r.path_of("kind"), "unknown target '" + kind + "'");
        }
        if (r.has("cylindrical")) {
            ObjectReader cyl(r.at("cylindrical"), r.path_of("cylindrical"));
            const int d = static_cast<int>(cyl.integer("d", ambient_dim));
            const int m = static_cast<int>(cyl.integer("m", d));
            cyl.finish();
            target = cylindrical_approximation(*target, d, m);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        config_error(path, e.what());
    }
    r.finish();
    return *target;
}

EdaModel model_from_json(const Json& j, int ambient_dim, const std::string& path, const MeasureSampler* input_measure)
{
    ObjectReader r(j, path);
    const std::string kind = r.string("kind", "hgno");
    try {
        if (kind == "projection") {
            const int n = static_cast<int>(r.integer("n", 16));
            r.finish();
            return projection_model(ambient_dim, n);
        }
        if (kind == "hgno") {
            const int n_in = static_cast<int>(r.integer("n_in", 16));
            const int n_out = static_cast<int>(r.integer("n_out", 16));
            const Architecture arch = architecture_from(r);
            r.finish();
            return hgno_new(ambient_dim, n_in, n_out, arch);
        }
        if (kind == "deeponet") {
            const int n_in = static_cast<int>(r.integer("n_sensors_in", 16));
            const int n_out = static_cast<int>(r.integer("n_sensors_out", 16));
            const double eps = r.number("epsilon", 1.5 / std::min(n_in, n_out));
            const Architecture arch = architecture_from(r);
            r.finish();
            const auto in = midpoint_sensors(n_in);
            const auto out = midpoint_sensors(n_out);
            return deeponet_new(in, out, eps, ambient_dim, arch);
        }
        if (kind == "pcanet") {
            const int n_in = static_cast<int>(r.integer("n_in", 16));
            const int n_out = static_cast<int>(r.integer("n_out", 16));
            const int n_samples = static_cast<int>(r.integer("n_samples", 1024));
            const std::uint64_t sample_seed = r.unsigned_integer("sample_seed", 0);
            const Architecture arch = architecture_from(r);
            r.finish();
            if (input_measure == nullptr) {
                config_error(path, "pcanet needs an input measure");
            }
            std::vector<Coeffs> samples;
            for (const auto& d : input_measure->marginal(0).draw(n_samples, sample_seed)) {
                samples.push_back(d.x);
            }
            return pcanet_new(samples, n_in, samples, n_out, arch);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        config_error(path, e.what());
    }
    config_error(r.path_of("kind"), "unknown model '" + kind + "'");
}

TrainConfig train_config_from_json(const Json& j, const std::string& path)
{
    ObjectReader r(j, path);
    TrainConfig cfg;
    cfg.k_loss = static_cast<int>(r.integer("k_loss", cfg.k_loss));
    cfg.p = r.number("p", cfg.p);
    cfg.n_train = static_cast<int>(r.integer("n_train", cfg.n_train));
    cfg.n_dirs = static_cast<int>(r.integer("n_dirs", cfg.n_dirs));
    const std::string opt = r.string("optimizer", "momentum_gd");
    if (opt == "gd") {
        cfg.optimizer = Optimizer::gd;
    } else if (opt == "momentum_gd") {
        cfg.optimizer = Optimizer::momentum_gd;
    } else {
        config_error(r.path_of("optimizer"), "expected \"gd\" or \"momentum_gd\"");
    }
    cfg.step_size = r.number("step_size", cfg.step_size);
    cfg.momentum = r.number("momentum", cfg.momentum);
    cfg.iterations = static_cast<int>(r.integer("iterations", cfg.iterations));
    if (r.has("seeds")) {
        const Json& seeds = r.at("seeds");
        if (!seeds.is_array()) {
            config_error(r.path_of("seeds"), "expected an array of nonnegative integers");
        }
        cfg.seeds.clear();
        for (const auto& s : seeds) {
            if (!s.is_number_unsigned()) {
                config_error(r.path_of("seeds"), "expected an array of nonnegative integers");
            }
            cfg.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    cfg.n_heldout = static_cast<int>(r.integer("n_heldout", cfg.n_heldout));
    cfg.divergence_threshold = r.number("divergence_threshold", cfg.divergence_threshold);
    r.finish();
    try {
        cfg.validate();
    } catch (const Error& e) {
        config_error(path, e.what());
    }
    return cfg;
}

Json to_json(const TrainConfig& cfg)
{
    return Json{{"k_loss", cfg.k_loss},
                {"p", cfg.p},
                {"n_train", cfg.n_train},
                {"n_dirs", cfg.n_dirs},
                {"optimizer", cfg.optimizer == Optimizer::gd ? "gd" : "momentum_gd"},
                {"step_size", cfg.step_size},
                {"momentum", cfg.momentum},
                {"iterations", cfg.iterations},
                {"seeds", cfg.seeds},
                {"n_heldout", cfg.n_heldout},
                {"divergence_threshold", cfg.divergence_threshold}};
}

Json to_json(const TrainReport& report)
{
    auto finite_or_null = [](const std::vector<double>& v) {
        Json out = Json::array();
        for (const double x : v) {
            out.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
        }
        return out;
    };
    return Json{{"history", finite_or_null(report.history)},
                {"best_so_far", finite_or_null(report.best_so_far)},
                {"best_loss", std::isfinite(report.best_loss) ? Json(report.best_loss) : Json(nullptr)},
                {"heldout_errors", report.heldout_errors},
                {"heldout_std_error", report.heldout_std_error},
                {"wall_clock_seconds", report.wall_clock_seconds},
                {"seed", report.seed},
                {"status", to_string(report.status)}};
}

Json to_json(const NormEstimate& estimate)
{
    Json terms = Json::array();
    for (const auto& t : estimate.terms) {
        terms.push_back(Json{{"order", t.order}, {"value", t.value}, {"std_error", t.std_error}});
    }
    return Json{{"value", estimate.value},
                {"std_error", estimate.std_error},
                {"n_samples", estimate.n_samples},
                {"kind", to_string(estimate.kind)},
                {"terms", std::move(terms)}};
}

void write_history_csv(std::ostream& out, const TrainReport& report)
{
    out << "iteration,loss,best_so_far\n";
    for (std::size_t i = 0; i < report.history.size(); ++i) {
        out << i << ',' << format_double(report.history[i]) << ',' << format_double(report.best_so_far[i]) << '\n';
    }
}

} // namespace dilab::io
