#include "dilab/verify.hpp"

#include "dilab/bump.hpp"
#include "dilab/experiments.hpp"
#include "dilab/io.hpp"
#include "dilab/metrics.hpp"
#include "dilab/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <random>

namespace dilab {
namespace {

class Checker {
public:
    void expect(bool ok, const std::string& what)
    {
        ++checks_;
        if (!ok) {
            ++failures_;
            if (first_.empty()) {
                first_ = what;
            }
        }
    }

    /// |got - want| <= tol * max(|want|, floor).
    void near(const Vector& got, const Vector& want, double tol, const std::string& what, double floor = 1e-12)
    {
        const double err = (got - want).norm();
        const double scale = std::max(want.norm(), floor);
        char buf[96];
        std::snprintf(buf, sizeof buf, " (error %.3e, scale %.3e)", err, scale);
        expect(err <= tol * scale, what + buf);
    }

    void near(double got, double want, double tol, const std::string& what, double floor = 1e-12)
    {
        near(Vector::Constant(1, got), Vector::Constant(1, want), tol, what, floor);
    }

    int checks_ = 0;
    int failures_ = 0;
    std::string first_;
};

Vector random_vector(int n, Rng& rng, double scale = 1.0)
{
    std::normal_distribution<double> normal;
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = scale * normal(rng);
    }
    return v;
}

double fd_step(int order) { return order == 1 ? 1e-5 : (order == 2 ? 1e-4 : 1e-3); }

void suite_space(Checker& c, std::uint64_t)
{
    for (int i = 1; i <= 6; ++i) {
        for (int j = 1; j <= 6; ++j) {
            const double ip = integrate([&](double s) { return sine_basis(i, s) * sine_basis(j, s); }, 0.0, 1.0);
            c.near(ip, i == j ? 1.0 : 0.0, 1e-12, "sine orthonormality", 1.0);
        }
    }
    const Encoder e = Encoder::projection(8, 32);
    const Decoder d = Decoder::projection(8, 32);
    Rng rng = make_rng(7);
    const Coeffs x = random_vector(32, rng);
    const Coeffs once = partial_sum(e, d, x);
    c.near(partial_sum(e, d, once), once, 1e-15, "partial sum idempotent");
    c.near(once, truncate(x, 8), 1e-15, "projection partial sum = truncation");
    std::vector<double> sensors;
    for (int q = 0; q < 10; ++q) {
        sensors.push_back((q + 0.5) / 10);
    }
    const PartitionOfUnity pu(sensors, 0.12);
    for (int g = 0; g <= 100; ++g) {
        c.near(pu.weights(g / 100.0).sum(), 1.0, 1e-12, "partition of unity sums to one", 1.0);
    }
    const CompactSpec cube = CompactSpec::hilbert_cube(32);
    for (const auto& p : sample_compact(cube, 50, 3)) {
        c.expect(cube.contains(p), "compact samples lie in K");
    }
}

void suite_jets(Checker& c, std::uint64_t seed)
{
    for (int t = 0; t < 10; ++t) {
        const NetParams net = NetParams::random({4, 8, 8, 3}, Activation::tanh, derive_seed(seed, t));
        Rng rng = make_rng(seed, 100 + t);
        const Vector x = random_vector(4, rng);
        std::vector<Vector> dirs{random_vector(4, rng), random_vector(4, rng), random_vector(4, rng)};
        const VectorFunction f = [&](const Vector& y) { return forward(net, y); };
        for (int i = 1; i <= 3; ++i) {
            const std::span<const Vector> d(dirs.data(), static_cast<std::size_t>(i));
            c.near(directional_derivative(net, x, d), fd_oracle(f, x, d, fd_step(i)), 1e-4,
                   "jet vs finite differences, order " + std::to_string(i), 1e-3);
        }
        std::vector<Vector> swapped{dirs[2], dirs[0], dirs[1]};
        c.near(directional_derivative(net, x, swapped), directional_derivative(net, x, dirs), 1e-12,
               "permutation symmetry", 1e-3);
        std::vector<Vector> scaled{dirs[0] * 2.5, dirs[1], dirs[2]};
        c.near(directional_derivative(net, x, scaled), 2.5 * directional_derivative(net, x, dirs), 1e-12,
               "homogeneity", 1e-3);
    }
}

void suite_eda(Checker& c, std::uint64_t seed)
{
    for (int t = 0; t < 5; ++t) {
        Architecture arch;
        arch.hidden = {8};
        arch.seed = derive_seed(seed, t);
        const EdaModel model = hgno_new(16, 6, 5, arch);
        Rng rng = make_rng(seed, 50 + t);
        const Coeffs x = random_vector(16, rng);
        std::vector<Coeffs> dirs{random_vector(16, rng), random_vector(16, rng)};
        const VectorFunction f = [&](const Vector& y) { return eda_eval(model, y); };
        for (int i = 1; i <= 2; ++i) {
            const std::span<const Coeffs> d(dirs.data(), static_cast<std::size_t>(i));
            c.near(eda_derivative(model, x, d), fd_oracle(f, x, d, fd_step(i)), 1e-4,
                   "EDA chain rule, order " + std::to_string(i), 1e-3);
        }
    }
}

void suite_targets(Checker& c, std::uint64_t seed)
{
    const int dim = 16;
    Rng rng = make_rng(seed, 1);
    const TargetOperator quad = benchmark_quadratic(dim, 4, seed);
    const TargetOperator nem = nemytskii_target(ScalarMap::tanh, 4 * dim, dim);
    for (const TargetOperator* op : {&quad, &nem}) {
        const Coeffs x = random_vector(dim, rng, 0.5);
        std::vector<Coeffs> dirs{random_vector(dim, rng), random_vector(dim, rng)};
        const VectorFunction f = [&](const Vector& y) { return op->eval(y); };
        for (int i = 1; i <= 2; ++i) {
            const std::span<const Coeffs> d(dirs.data(), static_cast<std::size_t>(i));
            c.near(op->deriv(x, d), fd_oracle(f, x, d, fd_step(i)), 1e-5, op->name() + " vs finite differences",
                   1e-3);
        }
        std::vector<Coeffs> swapped{dirs[1], dirs[0]};
        c.near(op->deriv(x, swapped), op->deriv(x, dirs), 1e-12, op->name() + " second derivative symmetric", 1e-3);
    }
    const TargetOperator full = cylindrical_approximation(quad, dim, dim);
    const Coeffs x = random_vector(dim, rng);
    c.near(full.eval(x), quad.eval(x), 1e-15, "cylindrical approximation at full rank");
    const TargetOperator nem_id = nemytskii_target(ScalarMap::identity, 4 * dim, dim);
    c.near(nem_id.eval(x), x, 1e-10, "identity Nemytskii operator");
}

void suite_measures(Checker& c, std::uint64_t seed)
{
    const GaussianSpec g = GaussianSpec::power_law(32, 2.0);
    const auto a = sample_gaussian(g, 100, seed);
    const auto b = sample_gaussian(g, 100, seed);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i] == b[i];
    }
    c.expect(same, "seeded determinism");
    const MeasureSampler mu = MeasureSampler::gaussian_product(g, 1);
    const NormEstimate m = moment(mu, 0, 2.0, 2.0, 20000, seed);
    const double trace = 1.0 + g.eigenvalues.sum();
    c.expect(std::abs(m.value - trace) <= 4.0 * m.std_error, "Gaussian trace identity");
    const NormEstimate m1 = moment(mu, 1, 2.0, 2.0, 20000, seed);
    c.expect(m.value <= m1.value + 2.0 * m1.std_error, "marginal moment bound");
}

void suite_metrics(Checker& c, std::uint64_t seed)
{
    const int dim = 32;
    const TargetOperator id = identity_target(dim);
    const TargetOperator model = as_target(projection_model(dim, 8));
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(dim, 2.0), 1);
    c.expect(bastiani_sobolev_error(id, id, mu, 1, 2.0, 200, seed).value == 0.0, "F = G gives zero");
    for (const double v : opnorm_samples(id, model, mu, 1, 10, seed)) {
        c.expect(v >= 1.0 - 1e-9, "operator-norm dichotomy");
    }
    const CompactSpec k = CompactSpec::hilbert_cube(dim);
    const CompactOpenResult co = compact_open_seminorm(id, model, k, k, 1, 100, seed);
    c.expect(co.exact.has_value() && std::abs(*co.exact - k.tail_radius(8)) <= 1e-12, "compact-open tail oracle");
    c.expect(co.exact.has_value() && co.sampled.value <= *co.exact + 1e-15, "sampled sup below exact");
    const Matrix l = random_low_rank(dim, dim, 4, seed);
    const GaussianSpec g = GaussianSpec::power_law(dim, 2.0);
    const NormEstimate exact = gaussian_hs_norm(l, g);
    const NormEstimate mc = gaussian_lp_norm_mc(l, g, 2.0, 20000, seed);
    c.expect(std::abs(mc.value - exact.value) <= 4.0 * mc.std_error, "Gaussian Hilbert-Schmidt identity");
    const TargetOperator quad = benchmark_quadratic(dim, 4, seed);
    const NormEstimate bast = bastiani_sobolev_error(quad, id, mu, 1, 2.0, 400, seed);
    const NormEstimate tilde = tilde_sobolev_error(quad, id, mu, 1, 2.0, 400, seed);
    c.expect(bast.value <= tilde.value + 3.0 * joint_std_error(bast, tilde), "Bastiani below tilde");
}

void suite_bump(Checker& c, std::uint64_t seed)
{
    c.expect(psi(0.5) == 1.0 && psi(3.0) == 0.0, "psi plateau and support");
    c.near(psi_deriv(1.5, 1), (psi(1.5 + 1e-6) - psi(1.5 - 1e-6)) / 2e-6, 1e-6, "psi' vs finite differences", 1.0);
    const BumpSpec spec{0.5, 2.0, 3};
    Rng rng = make_rng(seed, 9);
    for (int t = 0; t < 20; ++t) {
        Coeffs x = random_vector(8, rng);
        x *= (2.0 + 0.8 * t / 20.0) / x.norm(); // eta^2 |x|^2 sweeps [1, 2)
        std::vector<Coeffs> dirs{random_vector(8, rng), random_vector(8, rng)};
        const VectorFunction f = [&](const Vector& y) { return Vector::Constant(1, bump_eval(spec, y)); };
        for (int i = 1; i <= 2; ++i) {
            const std::span<const Coeffs> d(dirs.data(), static_cast<std::size_t>(i));
            // The bump is steep near its edges; extrapolate two central differences.
            const double coarse = fd_oracle(f, x, d, 1e-3)(0);
            const double fine = fd_oracle(f, x, d, 5e-4)(0);
            c.near(bump_derivative(spec, x, d), (4.0 * fine - coarse) / 3.0, 1e-5,
                   "bump derivative vs finite differences", 1e-2);
        }
        const Coeffs inner = x * (1.9 / x.norm());
        const Coeffs outer = x * (2.9 / x.norm());
        c.expect(bump_eval(spec, inner) == 1.0 && bump_derivative(spec, inner, dirs) == 0.0, "bump plateau");
        c.expect(bump_eval(spec, outer) == 0.0 && bump_derivative(spec, outer, dirs) == 0.0, "bump support");
    }
}

void suite_training(Checker& c, std::uint64_t seed)
{
    Architecture arch;
    arch.hidden = {6};
    arch.seed = seed;
    const EdaModel model = hgno_new(12, 4, 3, arch);
    const TargetOperator target = benchmark_quadratic(12, 3, seed);
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(12, 2.0), 1);
    const std::vector<Draw> batch = mu.draw(8, seed);
    const Vector g = grad_theta(model, target, batch, 1, 2.0);
    const Vector theta = model.net().flatten();
    auto loss_at = [&](const Vector& th) {
        const EdaModel m = model.with_net(model.net().with_parameters(th));
        const LossGradient lg = loss_and_gradient(m, target, batch, 1);
        return lg.loss;
    };
    Vector fd(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Vector up = theta;
        Vector down = theta;
        up(i) += 1e-5;
        down(i) -= 1e-5;
        fd(i) = (loss_at(up) - loss_at(down)) / 2e-5;
    }
    c.near(g, fd, 1e-4, "gradient vs finite differences in theta");
    const TargetOperator teacher = as_target(model);
    c.near(grad_theta(model, teacher, batch, 1, 2.0), Vector::Zero(theta.size()), 1.0, "zero gradient at the planted solution",
           1e-10);
}

void suite_io(Checker& c, std::uint64_t seed)
{
    const NetParams net = NetParams::random({3, 5, 2}, Activation::softplus, seed);
    const NetParams back = io::net_from_json(io::Json::parse(io::to_json(net).dump()));
    c.expect(back.flatten() == net.flatten() && back.layer_dims == net.layer_dims && back.activation == net.activation,
             "NetParams JSON round trip");
    const io::Json a = io::Json::parse(R"({"b": 1, "a": [1, 2]})");
    const io::Json b = io::Json::parse(R"({"a": [1, 2], "b": 1})");
    c.expect(io::config_hash(a) == io::config_hash(b), "config hash ignores key order");
    bool rejected = false;
    try {
        io::train_config_from_json(io::Json::parse(R"({"k_los": 1})"), "train");
    } catch (const ConfigError&) {
        rejected = true;
    }
    c.expect(rejected, "unknown keys rejected");
}

const std::map<std::string, std::function<void(Checker&, std::uint64_t)>>& suites()
{
    static const std::map<std::string, std::function<void(Checker&, std::uint64_t)>> table{
        {"space", suite_space},       {"jets", suite_jets},   {"eda", suite_eda},
        {"targets", suite_targets},   {"measures", suite_measures}, {"metrics", suite_metrics},
        {"bump", suite_bump},         {"training", suite_training}, {"io", suite_io},
    };
    return table;
}

} // namespace

const std::vector<std::string>& verify_suite_names()
{
    static const std::vector<std::string> names{"space",   "jets", "eda",      "targets", "measures",
                                                "metrics", "bump", "training", "io"};
    return names;
}

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed)
{
    const auto it = suites().find(name);
    if (it == suites().end()) {
        throw DomainError("unknown verify suite '" + name + "'");
    }
    const auto start = std::chrono::steady_clock::now();
    Checker c;
    try {
        it->second(c, seed);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    SuiteResult r;
    r.suite = name;
    r.checks = c.checks_;
    r.failures = c.failures_;
    r.first_failure = c.first_;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<SuiteResult> run_verify(std::uint64_t seed)
{
    std::vector<SuiteResult> out;
    for (const auto& name : verify_suite_names()) {
        out.push_back(run_verify_suite(name, seed));
    }
    return out;
}

void write_verify_table(std::ostream& out, const std::vector<SuiteResult>& results)
{
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %-6s %7s %8s %8s\n", "suite", "status", "checks", "failed", "seconds");
    out << line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-10s %-6s %7d %8d %8.2f", r.suite.c_str(), r.passed() ? "PASS" : "FAIL",
                      r.checks, r.failures, r.seconds);
        out << line;
        if (!r.passed()) {
            out << "  " << r.first_failure;
        }
        out << '\n';
    }
}

void write_verify_csv(std::ostream& out, const std::vector<SuiteResult>& results)
{
    out << "suite,passed,checks,failures,seconds,first_failure\n";
    for (const auto& r : results) {
        std::string detail = r.first_failure;
        for (auto& ch : detail) {
            if (ch == ',' || ch == '"' || ch == '\n') {
                ch = ';';
            }
        }
        out << r.suite << ',' << (r.passed() ? 1 : 0) << ',' << r.checks << ',' << r.failures << ','
            << io::format_double(r.seconds) << ',' << detail << '\n';
    }
}

} // namespace dilab
