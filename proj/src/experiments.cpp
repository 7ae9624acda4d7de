#include "dilab/experiments.hpp"

#include "dilab/metrics.hpp"
#include "dilab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace dilab {
namespace fs = std::filesystem;
using io::Json;
using io::ObjectReader;
using io::format_double;

namespace {

/// Shared handling of the top-level keys "seed", "output" and "basis".
class Setup {
public:
    Setup(std::string experiment, const Json& config, const RunOptions& options)
        : experiment_(std::move(experiment)), effective_(config.is_null() ? Json::object() : config)
    {
        if (!effective_.is_object()) {
            throw ConfigError("config: expected a JSON object");
        }
        if (options.seed) {
            effective_["seed"] = *options.seed;
        }
        reader_.emplace(effective_, "config");
        seed_ = reader_->unsigned_integer("seed", 1);
        const std::string output = reader_->string("output", "dilab_out");
        out_ = options.out_dir ? *options.out_dir : fs::path(output);
        basis_ = reader_->has("basis") ? io::basis_from_json(reader_->at("basis")) : BasisSpec{};
        hash_ = io::config_hash(effective_);
    }

    ObjectReader& config() { return *reader_; }
    std::uint64_t seed() const { return seed_; }
    int dim() const { return basis_.ambient_dim; }
    const BasisSpec& basis() const { return basis_; }

    /// Rejects unknown keys and prepares the output directory.
    void validated()
    {
        reader_->finish();
        std::error_code ec;
        fs::create_directories(out_, ec);
        if (ec) {
            throw Error("cannot create output directory " + out_.string() + ": " + ec.message());
        }
    }

    std::ofstream open(const std::string& name) const
    {
        std::ofstream f(out_ / name);
        if (!f) {
            throw Error("cannot write " + (out_ / name).string());
        }
        return f;
    }

    ExperimentOutcome finish(std::vector<PropertyCheck> checks, Json extra) const
    {
        ExperimentOutcome outcome;
        outcome.experiment = experiment_;
        outcome.out_dir = out_;
        outcome.checks = std::move(checks);
        Json check_list = Json::array();
        for (const auto& c : outcome.checks) {
            check_list.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        }
        outcome.summary = Json{{"experiment", experiment_},
                               {"config_hash", hash_},
                               {"root_seed", seed_},
                               {"build_id", io::build_id()},
                               {"passed", outcome.passed()},
                               {"checks", std::move(check_list)},
                               {"results", std::move(extra)}};
        open("summary.json") << outcome.summary.dump(2) << '\n';
        return outcome;
    }

private:
    std::string experiment_;
    Json effective_;
    std::optional<ObjectReader> reader_;
    std::uint64_t seed_ = 1;
    fs::path out_;
    BasisSpec basis_;
    std::string hash_;
};

PropertyCheck check(std::string name, bool passed, std::string detail)
{
    return PropertyCheck{std::move(name), passed, std::move(detail)};
}

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

int positive(std::int64_t v, const std::string& path)
{
    if (v < 1 || v > std::numeric_limits<int>::max()) {
        throw ConfigError(path + ": must be a positive integer");
    }
    return static_cast<int>(v);
}

MeasureSampler measure_section(Setup& s, const Json& fallback)
{
    return io::measure_from_json(s.config().has("measure") ? s.config().at("measure") : fallback, s.dim(),
                                 "config.measure");
}

Json model_json_with_seed(Json model, std::uint64_t seed)
{
    model["seed"] = seed;
    return model;
}

void write_metric_rows(std::ofstream& out, const std::vector<MetricRecord>& rows)
{
    write_metric_csv_header(out);
    for (const auto& r : rows) {
        write_metric_csv_row(out, r);
    }
}

} // namespace

bool ExperimentOutcome::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

Matrix random_low_rank(int rows, int cols, int rank, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    Matrix a(rows, rank);
    Matrix b(cols, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        a.data()[i] = normal(rng);
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        b.data()[i] = normal(rng);
    }
    return a * b.transpose() / std::sqrt(static_cast<double>(rank));
}

EdaModel perturbed_copy(const EdaModel& teacher, double perturbation, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    Vector theta = teacher.net().flatten();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta(i) += perturbation * normal(rng);
    }
    return teacher.with_net(teacher.net().with_parameters(theta));
}

ExperimentOutcome run_dichotomy(const Json& config, const RunOptions& options)
{
    Setup s("dichotomy", config, options);
    ObjectReader& c = s.config();
    const int dim = s.dim();
    if (c.has("target")) {
        ObjectReader t(c.at("target"), "config.target");
        if (t.string("kind", "identity") != "identity") {
            throw ConfigError("config.target: the dichotomy experiment requires the identity target");
        }
        t.finish();
    }
    std::vector<int> ranks = c.int_list("ranks", {8, 16, 32});
    for (const int r : ranks) {
        if (r < 1 || r > dim) {
            throw ConfigError("config.ranks: every rank must lie in [1, ambient_dim]");
        }
    }
    std::sort(ranks.begin(), ranks.end());
    CompactSpec k_in = CompactSpec::hilbert_cube(dim);
    CompactSpec k_dirs = CompactSpec::hilbert_cube(dim);
    if (c.has("compact")) {
        ObjectReader k(c.at("compact"), "config.compact");
        if (k.has("inputs")) {
            k_in = io::compact_from_json(k.at("inputs"), dim, "config.compact.inputs");
        }
        if (k.has("directions")) {
            k_dirs = io::compact_from_json(k.at("directions"), dim, "config.compact.directions");
        }
        k.finish();
    }
    const MeasureSampler mu = measure_section(s, Json{{"k", 1}});
    const int n_opnorm = positive(c.integer("n_samples", 32), "config.n_samples");
    const int n_sup = positive(c.integer("n_sup", 256), "config.n_sup");
    const double p = c.number("p", 2.0);
    s.validated();

    const TargetOperator identity = identity_target(dim);
    std::vector<PropertyCheck> checks;
    std::vector<MetricRecord> metrics;
    Json rows = Json::array();
    std::ofstream table = s.open("dichotomy.csv");
    table << "rank,opnorm_order1_min,opnorm_order1_max,opnorm_sobolev_k1,opnorm_sobolev_std_error,"
             "compact_open_sampled,compact_open_exact,tail_oracle\n";
    std::optional<double> previous_exact;
    for (const int rank : ranks) {
        const TargetOperator model = as_target(projection_model(dim, rank));
        const std::uint64_t seed = derive_seed(s.seed(), static_cast<std::uint64_t>(rank));
        const std::vector<double> opnorms = opnorm_samples(identity, model, mu, 1, n_opnorm, seed);
        const auto [lo, hi] = std::minmax_element(opnorms.begin(), opnorms.end());
        const NormEstimate sob = opnorm_sobolev_error(identity, model, mu, 1, p, n_opnorm, seed);
        const CompactOpenResult co = compact_open_seminorm(identity, model, k_in, k_dirs, 1, n_sup, seed);
        const double oracle = k_dirs.tail_radius(rank);
        const double exact = co.exact.value_or(std::numeric_limits<double>::quiet_NaN());
        table << rank << ',' << format_double(*lo) << ',' << format_double(*hi) << ',' << format_double(sob.value)
              << ',' << format_double(sob.std_error) << ',' << format_double(co.sampled.value) << ','
              << format_double(exact) << ',' << format_double(oracle) << '\n';
        const std::string id = "dichotomy_rank" + std::to_string(rank);
        metrics.push_back(MetricRecord{id, "opnorm_sobolev", 1, p, p, sob});
        metrics.push_back(MetricRecord{id, "compact_open_sampled", 1, p, p, co.sampled});
        if (co.exact) {
            metrics.push_back(MetricRecord{id, "compact_open_exact", 1, p, p, NormEstimate::exact_value(exact)});
        }
        rows.push_back(Json{{"rank", rank},
                            {"opnorm_order1_min", *lo},
                            {"compact_open_sampled", co.sampled.value},
                            {"compact_open_exact", co.exact ? Json(exact) : Json(nullptr)},
                            {"tail_oracle", oracle}});
        const std::string tag = "rank " + std::to_string(rank);
        if (rank < dim) {
            checks.push_back(check("opnorm order-1 error >= 1 - 1e-9 (" + tag + ")", *lo >= 1.0 - 1e-9,
                                   "min over samples " + format_double(*lo)));
        } else {
            checks.push_back(
                check("opnorm order-1 error = 0 at full rank", *hi <= 1e-12, "max " + format_double(*hi)));
        }
        checks.push_back(check("compact-open exact = tail oracle (" + tag + ")",
                               co.exact && std::abs(exact - oracle) <= 1e-10,
                               "exact " + format_double(exact) + ", oracle " + format_double(oracle)));
        checks.push_back(check("sampled sup <= exact (" + tag + ")", co.exact && co.sampled.value <= exact + 1e-15,
                               "sampled " + format_double(co.sampled.value)));
        if (previous_exact) {
            checks.push_back(check("compact-open decreasing in rank (" + tag + ")",
                                   co.exact && exact < *previous_exact,
                                   format_double(exact) + " vs " + format_double(*previous_exact)));
        }
        previous_exact = exact;
    }
    std::ofstream metric_file = s.open("metrics.csv");
    write_metric_rows(metric_file, metrics);
    return s.finish(std::move(checks), Json{{"rows", std::move(rows)}});
}

ExperimentOutcome run_gaussian_check(const Json& config, const RunOptions& options)
{
    Setup s("gaussian-check", config, options);
    ObjectReader& c = s.config();
    const int dim = s.dim();
    const GaussianSpec gaussian = c.has("gaussian")
                                      ? io::gaussian_from_json(c.at("gaussian"), dim, "config.gaussian")
                                      : GaussianSpec::power_law(dim, 2.0);
    const int n_maps = positive(c.integer("n_maps", 20), "config.n_maps");
    const int rank = positive(c.integer("rank", 8), "config.rank");
    const int n = positive(c.integer("n_samples", 200000), "config.n_samples");
    const double tolerance = c.number("tolerance", 0.02);
    const int min_pass = static_cast<int>(c.integer("min_pass", (9 * n_maps + 9) / 10));
    s.validated();
    if (rank > dim) {
        throw ConfigError("config.rank: must not exceed ambient_dim");
    }

    std::ofstream table = s.open("gaussian_check.csv");
    table << "map,exact,mc,std_error,rel_error,within_tolerance\n";
    std::vector<MetricRecord> metrics;
    int within = 0;
    double worst = 0.0;
    for (int m = 0; m < n_maps; ++m) {
        const Matrix l = random_low_rank(dim, dim, rank, derive_seed(s.seed(), static_cast<std::uint64_t>(m)));
        const NormEstimate exact = gaussian_hs_norm(l, gaussian);
        const NormEstimate mc =
            gaussian_lp_norm_mc(l, gaussian, 2.0, n, derive_seed(s.seed(), 1000 + static_cast<std::uint64_t>(m)));
        const double rel = std::abs(mc.value - exact.value) / exact.value;
        worst = std::max(worst, rel);
        const bool ok = rel <= tolerance;
        within += ok ? 1 : 0;
        table << m << ',' << format_double(exact.value) << ',' << format_double(mc.value) << ','
              << format_double(mc.std_error) << ',' << format_double(rel) << ',' << (ok ? 1 : 0) << '\n';
        const std::string id = "gaussian_map" + std::to_string(m);
        metrics.push_back(MetricRecord{id, "gaussian_hs_exact", 1, 2.0, 2.0, exact});
        metrics.push_back(MetricRecord{id, "gaussian_l2_mc", 1, 2.0, 2.0, mc});
    }
    std::ofstream metric_file = s.open("metrics.csv");
    write_metric_rows(metric_file, metrics);
    std::vector<PropertyCheck> checks{check("MC within tolerance of ||L Q^1/2||_HS", within >= min_pass,
                                            std::to_string(within) + "/" + std::to_string(n_maps) +
                                                " maps within " + format_double(tolerance) + ", worst " +
                                                sci(worst))};
    return s.finish(std::move(checks), Json{{"within", within}, {"n_maps", n_maps}, {"worst_rel_error", worst}});
}

ExperimentOutcome run_cyl_convergence(const Json& config, const RunOptions& options)
{
    Setup s("cyl-convergence", config, options);
    ObjectReader& c = s.config();
    const int dim = s.dim();
    const TargetOperator target = io::target_from_json(
        c.has("target") ? c.at("target") : Json{{"kind", "quadratic"}}, dim, "config.target");
    const MeasureSampler mu = measure_section(s, Json{{"k", 1}});
    std::vector<int> levels = c.int_list("levels", {4, 8, 16, 32, 64});
    const int k = static_cast<int>(c.integer("k", 1));
    const double p = c.number("p", 2.0);
    const int n = positive(c.integer("n_samples", 2000), "config.n_samples");
    s.validated();
    std::sort(levels.begin(), levels.end());
    for (const int d : levels) {
        if (d < 1 || d > dim) {
            throw ConfigError("config.levels: every level must lie in [1, ambient_dim]");
        }
    }
    if (k > mu.k() || k < 0) {
        throw ConfigError("config.k: must lie in [0, measure.k]");
    }

    std::ofstream table = s.open("cyl_convergence.csv");
    table << "d,m,value,std_error";
    for (int i = 0; i <= k; ++i) {
        table << ",order" << i << "_term";
    }
    table << '\n';
    std::vector<MetricRecord> metrics;
    std::vector<NormEstimate> errors;
    Json rows = Json::array();
    for (const int d : levels) {
        const TargetOperator cyl = cylindrical_approximation(target, d, d);
        const NormEstimate e = bastiani_sobolev_error(target, cyl, mu, k, p, n, s.seed());
        table << d << ',' << d << ',' << format_double(e.value) << ',' << format_double(e.std_error);
        for (const auto& t : e.terms) {
            table << ',' << format_double(t.value);
        }
        table << '\n';
        metrics.push_back(MetricRecord{"cyl_d" + std::to_string(d), "bastiani_sobolev", k, p, p, e});
        rows.push_back(Json{{"d", d}, {"value", e.value}, {"std_error", e.std_error}});
        errors.push_back(e);
    }
    std::ofstream metric_file = s.open("metrics.csv");
    write_metric_rows(metric_file, metrics);

    std::vector<PropertyCheck> checks;
    for (std::size_t l = 1; l < errors.size(); ++l) {
        const double slack = 2.0 * joint_std_error(errors[l - 1], errors[l]);
        checks.push_back(check("nonincreasing at d=" + std::to_string(levels[l]),
                               errors[l].value <= errors[l - 1].value + slack,
                               format_double(errors[l].value) + " vs " + format_double(errors[l - 1].value) +
                                   " (slack " + sci(slack) + ")"));
    }
    if (!levels.empty() && levels.back() == dim) {
        checks.push_back(check("zero at full truncation", errors.back().value <= 1e-12,
                               "value " + format_double(errors.back().value)));
    }
    return s.finish(std::move(checks), Json{{"rows", std::move(rows)}});
}

ExperimentOutcome run_train(const Json& config, const RunOptions& options)
{
    Setup s("train", config, options);
    ObjectReader& c = s.config();
    const int dim = s.dim();
    const MeasureSampler mu = measure_section(s, Json{{"k", 1}});
    const Json model_spec = c.has("model") ? c.at("model") : Json{{"kind", "hgno"}};
    EdaModel initial = io::model_from_json(model_spec, dim, "config.model", &mu);
    const Json target_spec = c.has("target") ? c.at("target") : Json{{"kind", "quadratic"}};
    std::optional<TargetOperator> target;
    bool teacher = false;
    if (target_spec.is_object() && target_spec.value("kind", "") == "teacher") {
        ObjectReader t(target_spec, "config.target");
        t.string("kind", "teacher");
        const double perturbation = t.number("perturbation", 0.05);
        const std::uint64_t seed = t.unsigned_integer("seed", 0);
        t.finish();
        target = as_target(initial);
        initial = perturbed_copy(initial, perturbation, seed);
        teacher = true;
    } else {
        target = io::target_from_json(target_spec, dim, "config.target");
    }
    const TrainConfig cfg = io::train_config_from_json(c.has("train") ? c.at("train") : Json::object(), "config.train");
    const bool has_expectation = c.has("expect_loss_below");
    const double expectation = c.number("expect_loss_below", 0.0);
    s.validated();
    if (cfg.k_loss > mu.k()) {
        throw ConfigError("config.train.k_loss exceeds config.measure.k");
    }
    if (cfg.k_loss > initial.max_order()) {
        throw ConfigError("config.train.k_loss exceeds the model's k_max");
    }

    const TrainResult result = train(cfg, initial, *target, mu, s.seed());
    std::ofstream history = s.open("history.csv");
    io::write_history_csv(history, result.report);
    s.open("report.json") << io::to_json(result.report).dump(2) << '\n';
    s.open("checkpoint.json") << io::checkpoint_to_json(result.model, s.basis()).dump() << '\n';

    std::vector<PropertyCheck> checks;
    checks.push_back(check("training completed", result.report.status == TrainStatus::completed,
                           std::string("status ") + to_string(result.report.status)));
    if (has_expectation) {
        checks.push_back(check("best loss <= " + format_double(expectation), result.report.best_loss <= expectation,
                               "best loss " + format_double(result.report.best_loss)));
    }
    return s.finish(std::move(checks), Json{{"teacher_student", teacher},
                                            {"best_loss", result.report.best_loss},
                                            {"heldout_errors", result.report.heldout_errors},
                                            {"wall_clock_seconds", result.report.wall_clock_seconds},
                                            {"train", io::to_json(cfg)}});
}

ExperimentOutcome run_compare(const Json& config, const RunOptions& options)
{
    Setup s("compare", config, options);
    ObjectReader& c = s.config();
    const int dim = s.dim();
    const MeasureSampler mu = measure_section(s, Json{{"k", 1}});
    const Json model_spec = c.has("model") ? c.at("model") : Json{{"kind", "hgno"}};
    const TargetOperator target = io::target_from_json(
        c.has("target") ? c.at("target") : Json{{"kind", "quadratic"}}, dim, "config.target");
    TrainConfig cfg = io::train_config_from_json(c.has("train") ? c.at("train") : Json::object(), "config.train");
    s.validated();
    if (cfg.seeds.size() < 3) {
        throw ConfigError("config.train.seeds: the comparison needs at least three seeds");
    }
    if (mu.k() < 1) {
        throw ConfigError("config.measure.k: the comparison needs at least one direction");
    }
    // Validate the model spec once before training.
    (void)io::model_from_json(model_spec, dim, "config.model", &mu);
    std::vector<std::uint64_t> run_seeds;
    for (const auto seed : cfg.seeds) {
        run_seeds.push_back(derive_seed(s.seed(), seed));
    }
    cfg.seeds = run_seeds;
    const ComparisonReport report = compare_k0_k1(cfg, target, mu, [&](std::uint64_t seed) {
        return io::model_from_json(model_json_with_seed(model_spec, seed), dim, "config.model", &mu);
    });

    std::ofstream table = s.open("compare.csv");
    table << "seed,k_loss,heldout_order0,heldout_order1,best_loss,status\n";
    for (const auto& r : report.rows) {
        table << r.seed << ',' << r.k_loss << ',' << format_double(r.heldout_order0) << ','
              << format_double(r.heldout_order1) << ',' << format_double(r.best_loss) << ',' << to_string(r.status)
              << '\n';
    }
    std::ofstream ratios = s.open("ratios.csv");
    ratios << "seed,ratio_k1_over_k0\n";
    for (std::size_t i = 0; i < report.ratios.size(); ++i) {
        ratios << cfg.seeds[i] << ',' << format_double(report.ratios[i]) << '\n';
    }
    std::ostringstream per_seed;
    for (std::size_t i = 0; i < report.ratios.size(); ++i) {
        per_seed << (i ? ", " : "") << sci(report.ratios[i]);
    }
    std::vector<PropertyCheck> checks{check("median order-1 error ratio (k_loss=1 / k_loss=0) < 1",
                                            report.median_ratio < 1.0,
                                            "median " + sci(report.median_ratio) + "; per seed " + per_seed.str())};
    return s.finish(std::move(checks), Json{{"median_ratio", report.median_ratio}, {"ratios", report.ratios}});
}

} // namespace dilab
