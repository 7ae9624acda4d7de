// Drives the dilab executable as a subprocess.

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("dilab_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Run run(const std::string& args)
{
    const fs::path log = fs::temp_directory_path() / ("dilab_cli_log_" + std::to_string(::getpid()) + ".txt");
    const std::string cmd = std::string("\"") + DILAB_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = slurp(log);
    fs::remove(log);
    return r;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

} // namespace

TEST_CASE("verify passes on a clean build and writes one row per suite")
{
    const fs::path dir = scratch("verify");
    const Run r = run("verify --out \"" + dir.string() + "\"");
    CHECK(r.code == 0);
    const auto rows = lines(slurp(dir / "verify.csv"));
    REQUIRE(rows.size() == 10);
    CHECK(rows[0] == "suite,passed,checks,failures,seconds,first_failure");
    for (const char* suite : {"space", "jets", "eda", "targets", "measures", "metrics", "bump", "training", "io"}) {
        bool found = false;
        for (const auto& row : rows) {
            found = found || row.rfind(std::string(suite) + ",1,", 0) == 0;
        }
        CHECK_MESSAGE(found, suite);
    }
}

TEST_CASE("an injected derivative fault fails the jets suite")
{
    const fs::path dir = scratch("fault");
    const Run r = run("verify --inject-fault jets --out \"" + dir.string() + "\"");
    CHECK(r.code == 1);
    const std::string csv = slurp(dir / "verify.csv");
    CHECK(csv.find("\njets,0,") != std::string::npos);
    CHECK(csv.find("\nspace,1,") != std::string::npos);
}

TEST_CASE("config errors exit with code 2")
{
    const fs::path dir = scratch("bad");
    const fs::path cfg = write_config(dir, R"({"ranks": [8], "rnaks": [16]})");
    const Run r = run("dichotomy --config \"" + cfg.string() + "\" --out \"" + dir.string() + "\"");
    CHECK(r.code == 2);
    CHECK(r.output.find("rnaks") != std::string::npos);

    CHECK(run("dichotomy --config \"" + (dir / "missing.json").string() + "\"").code == 2);
    CHECK(run("no-such-command").code == 2);
    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK(run("dichotomy --config \"" + broken.string() + "\" --out \"" + dir.string() + "\"").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("dichotomy reports are stamped and reproducible")
{
    const fs::path a = scratch("dich_a");
    const fs::path b = scratch("dich_b");
    const std::string text = R"({"ranks": [8, 16, 32], "n_samples": 4, "n_sup": 64, "seed": 5})";
    const fs::path cfg = write_config(a, text);
    REQUIRE(run("dichotomy --config \"" + cfg.string() + "\" --out \"" + a.string() + "\"").code == 0);
    REQUIRE(run("dichotomy --config \"" + cfg.string() + "\" --out \"" + b.string() + "\" --workers 3").code == 0);
    CHECK(slurp(a / "dichotomy.csv") == slurp(b / "dichotomy.csv"));
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));

    const Json summary = Json::parse(slurp(a / "summary.json"));
    CHECK(summary["experiment"] == "dichotomy");
    CHECK(summary["root_seed"] == 5);
    CHECK(summary["config_hash"].get<std::string>().size() == 16);
    CHECK(summary.contains("build_id"));
    CHECK(summary["passed"] == true);

    const auto rows = lines(slurp(a / "dichotomy.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("rank,", 0) == 0);

    // A different seed changes the hash of the effective config.
    const fs::path c = scratch("dich_c");
    REQUIRE(run("dichotomy --config \"" + cfg.string() + "\" --out \"" + c.string() + "\" --seed 6").code == 0);
    const Json other = Json::parse(slurp(c / "summary.json"));
    CHECK(other["root_seed"] == 6);
    CHECK(other["config_hash"] != summary["config_hash"]);
}

TEST_CASE("gaussian check, cylindrical convergence and training subcommands")
{
    const fs::path g = scratch("gauss");
    const fs::path gc = write_config(g, R"({"n_maps": 4, "n_samples": 20000, "tolerance": 0.05})");
    CHECK(run("gaussian-check --config \"" + gc.string() + "\" --out \"" + g.string() + "\"").code == 0);
    CHECK(fs::exists(g / "gaussian_check.csv"));

    const fs::path y = scratch("cyl");
    const fs::path yc = write_config(y, R"({"levels": [4, 16, 64], "n_samples": 200})");
    CHECK(run("cyl-convergence --config \"" + yc.string() + "\" --out \"" + y.string() + "\"").code == 0);
    CHECK(lines(slurp(y / "cyl_convergence.csv")).size() == 4);

    const fs::path t = scratch("train");
    const fs::path tc = write_config(t, R"({
        "basis": {"kind": "sine", "ambient_dim": 16},
        "model": {"kind": "hgno", "n_in": 4, "n_out": 4, "hidden": [6], "seed": 3},
        "target": {"kind": "teacher", "perturbation": 0.02, "seed": 4},
        "train": {"iterations": 50, "n_train": 16, "n_heldout": 16, "step_size": 0.05}
    })");
    CHECK(run("train --config \"" + tc.string() + "\" --out \"" + t.string() + "\"").code == 0);
    CHECK(lines(slurp(t / "history.csv")).size() == 52);
    const Json report = Json::parse(slurp(t / "report.json"));
    CHECK(report["history"].size() == 51);
    CHECK(fs::exists(t / "checkpoint.json"));

    const fs::path u = scratch("train_fail");
    const fs::path uc = write_config(u, R"({
        "basis": {"kind": "sine", "ambient_dim": 16},
        "model": {"kind": "hgno", "n_in": 4, "n_out": 4, "hidden": [6], "seed": 3},
        "train": {"iterations": 2, "n_train": 8, "n_heldout": 8},
        "expect_loss_below": 1e-30
    })");
    CHECK(run("train --config \"" + uc.string() + "\" --out \"" + u.string() + "\"").code == 1);
}

TEST_CASE("compare writes one row per seed and loss order")
{
    const fs::path d = scratch("compare");
    const fs::path cfg = write_config(d, R"({
        "basis": {"kind": "sine", "ambient_dim": 16},
        "model": {"kind": "hgno", "n_in": 4, "n_out": 4, "hidden": [6]},
        "train": {"iterations": 10, "n_train": 16, "n_heldout": 16, "seeds": [1, 2, 3]}
    })");
    const Run r = run("compare --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"");
    CHECK((r.code == 0 || r.code == 1));
    const auto rows = lines(slurp(d / "compare.csv"));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == "seed,k_loss,heldout_order0,heldout_order1,best_loss,status");
    CHECK(lines(slurp(d / "ratios.csv")).size() == 4);

    const fs::path cfg2 = write_config(d, R"({"train": {"seeds": [1, 2]}})");
    CHECK(run("compare --config \"" + cfg2.string() + "\" --out \"" + d.string() + "\"").code == 2);
}
