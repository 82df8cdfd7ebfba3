#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "support.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using test_support::config_path;
using test_support::read_file;
using test_support::run_command;

namespace {

std::string cli_path() {
#ifdef PERIDEVAL_CLI_PATH
    return PERIDEVAL_CLI_PATH;
#else
    return "./perideval";
#endif
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

json load_json(const fs::path& path) {
    REQUIRE(fs::exists(path));
    return json::parse(read_file(path));
}

void write_unstable_config(const fs::path& path) {
    std::ofstream out(path);
    out << "label = unstable\nomega = 1\nsteps_M = 64\ntau = 0.5\n"
           "nonlinearity.kind = affine\nnonlinearity.C1 = 0.1\nnonlinearity.C2 = 0.1\n"
           "forcing.a = 1\nforcing.b = 0\nforcing.phase = 0\ngenerator.matrix = -1\n";
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("spectrum reports and exits zero") {
    const auto dir = scratch("spectrum");
    const auto run = run_command(cli_path() + " spectrum --config " +
                                 q(config_path("scalar_affine.cfg")) + " --out-dir " + q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "spectrum.json");
    CHECK(doc["lambda1"].get<double>() == 1.0);
    CHECK(doc["exp_stable"].get<bool>());
    CHECK(doc["empirical_M"].get<double>() == 1.0);
}

TEST_CASE("spectrum of the elliptic problem approaches the continuum eigenvalue") {
    const auto dir = scratch("spectrum_elliptic");
    const auto run = run_command(cli_path() + " spectrum --config " +
                                 q(config_path("elliptic_dirichlet.cfg")) + " --out-dir " + q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "spectrum.json");
    CHECK(std::abs(doc["lambda1"].get<double>() - 1.0) <= 1e-4);
}

TEST_CASE("spectrum on a non-stable generator still reports with exit zero") {
    const auto dir = scratch("spectrum_unstable");
    write_unstable_config(dir / "unstable.cfg");
    const auto run = run_command(cli_path() + " spectrum --config " + q(dir / "unstable.cfg") +
                                 " --out-dir " + q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "spectrum.json");
    CHECK_FALSE(doc["exp_stable"].get<bool>());
}

TEST_CASE("periodic solve writes csv and json") {
    const auto dir = scratch("periodic");
    const auto run = run_command(cli_path() + " periodic --config " +
                                 q(config_path("scalar_affine.cfg")) + " --tol 1e-9 --out-dir " +
                                 q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "periodic.json");
    CHECK(doc["converged"].get<bool>());
    CHECK(doc["residual"].get<double>() <= 1e-8);

    const std::string csv = read_file(dir / "periodic.csv");
    CHECK(csv.rfind("t,u_1\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    // header + 64 grid rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
}

TEST_CASE("exit code contract across the four classes") {
    const auto dir = scratch("exit_codes");

    // 1: non-convergence at the sharp threshold
    CHECK(run_command(cli_path() + " periodic --config " + q(config_path("scalar_boundary.cfg")) +
                      " --max-iter 200 --out-dir " + q(dir / "a"))
              .exit_code == 1);

    // 1: failed hypothesis check (margin zero at the threshold)
    CHECK(run_command(cli_path() + " check --config " + q(config_path("scalar_boundary.cfg")) +
                      " --mode H1 --samples 100 --out-dir " + q(dir / "b"))
              .exit_code == 1);

    // 2: schema violation, unknown key, bad commensurability, missing file
    CHECK(run_command(cli_path() + " periodic --config " +
                      q(config_path("invalid/negative_c1.cfg")) + " --out-dir " + q(dir / "c"))
              .exit_code == 2);
    CHECK(run_command(cli_path() + " periodic --config " +
                      q(config_path("invalid/unknown_key.cfg")) + " --out-dir " + q(dir / "d"))
              .exit_code == 2);
    CHECK(run_command(cli_path() + " periodic --config " +
                      q(config_path("invalid/commensurability.cfg")) + " --out-dir " + q(dir / "e"))
              .exit_code == 2);
    CHECK(run_command(cli_path() + " periodic --config " + q(dir / "missing.cfg") + " --out-dir " +
                      q(dir / "f"))
              .exit_code == 2);

    // 2: structurally valid config whose generator is not exponentially stable
    write_unstable_config(dir / "unstable.cfg");
    CHECK(run_command(cli_path() + " periodic --config " + q(dir / "unstable.cfg") +
                      " --out-dir " + q(dir / "g"))
              .exit_code == 2);

    // 3: resonance at the threshold reported by the oracle
    const auto resonance = run_command(cli_path() + " oracle --config " +
                                       q(config_path("scalar_boundary.cfg")) + " --out-dir " +
                                       q(dir / "h"));
    CHECK(resonance.exit_code == 3);
    CHECK(resonance.contains("m=0"));

    // 3: blow-up past the divergence threshold
    const auto blowup = run_command(cli_path() + " ivp --config " + q(dir / "unstable.cfg") +
                                    " --history constant:1 --t-end 40 --dt 0.015625 --out-dir " +
                                    q(dir / "i"));
    CHECK(blowup.exit_code == 3);
}

TEST_CASE("ivp writes a trajectory and a small mild residual") {
    const auto dir = scratch("ivp");
    const auto run = run_command(cli_path() + " ivp --config " +
                                 q(config_path("scalar_affine.cfg")) +
                                 " --history constant:2 --t-end 2 --out-dir " + q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "ivp.json");
    CHECK(doc["mild_residual"].get<double>() <= 1e-8);
    CHECK(doc["final_sup_norm"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("orbit history lands on the periodic solution") {
    const auto dir = scratch("orbit");
    const auto run = run_command(cli_path() + " ivp --config " +
                                 q(config_path("scalar_affine.cfg")) +
                                 " --history orbit --t-end 3 --out-dir " + q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "ivp.json");
    CHECK(doc["final_sup_norm"].get<double>() == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("check passes on the stability benchmark") {
    const auto dir = scratch("check");
    const auto run = run_command(cli_path() + " check --config " +
                                 q(config_path("scalar_stability.cfg")) +
                                 " --mode H3 --samples 2000 --out-dir " + q(dir));
    CHECK(run.exit_code == 0);
    const json doc = load_json(dir / "check.json");
    CHECK(doc["gap"]["satisfied"].get<bool>());
    CHECK(doc["gap"]["sigma"].get<double>() == doctest::Approx(0.52817).epsilon(1e-4));
    CHECK(doc["order"]["violations"].get<int>() == 0);
}

TEST_CASE("gronwall bound and csv output") {
    const auto dir = scratch("gronwall");
    const auto run = run_command(cli_path() +
                                 " gronwall --c1 0.5 --c2 0.5 --tau 1 --t-end 6 --dt 0.001"
                                 " --out-dir " +
                                 q(dir));
    CHECK(run.exit_code == 0);
    const std::string csv = read_file(dir / "gronwall.csv");
    CHECK(csv.rfind("t,phi,bound,margin\n", 0) == 0);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    const auto dir1 = scratch("det1");
    const auto dir2 = scratch("det2");

    const std::string check_cmd = " check --config " + q(config_path("scalar_saturating.cfg")) +
                                  " --mode H2 --samples 500 --out-dir ";
    REQUIRE(run_command(cli_path() + check_cmd + q(dir1)).exit_code == 0);
    REQUIRE(run_command(cli_path() + check_cmd + q(dir2)).exit_code == 0);
    CHECK(read_file(dir1 / "check.json") == read_file(dir2 / "check.json"));

    const std::string stab_cmd = " stability --config " + q(config_path("scalar_stability.cfg")) +
                                 " --histories 3 --t-end 6 --dt 0.015625 --out-dir ";
    const auto s1 = run_command(cli_path() + stab_cmd + q(dir1));
    const auto s2 = run_command(cli_path() + stab_cmd + q(dir2));
    CHECK(s1.exit_code == s2.exit_code);
    CHECK(read_file(dir1 / "stability.json") == read_file(dir2 / "stability.json"));
    CHECK(read_file(dir1 / "decay.csv") == read_file(dir2 / "decay.csv"));
}

TEST_CASE("PERIDEVAL_OUT overrides the out-dir flag") {
    const auto flag_dir = scratch("env_flag");
    const auto env_dir = scratch("env_real");
    const auto run = run_command("PERIDEVAL_OUT=" + q(env_dir) + " " + cli_path() +
                                 " spectrum --config " + q(config_path("scalar_affine.cfg")) +
                                 " --out-dir " + q(flag_dir));
    CHECK(run.exit_code == 0);
    CHECK(fs::exists(env_dir / "spectrum.json"));
    CHECK_FALSE(fs::exists(flag_dir / "spectrum.json"));
}

TEST_CASE("csv values carry full precision") {
    const auto dir = scratch("precision");
    REQUIRE(run_command(cli_path() + " periodic --config " +
                        q(config_path("scalar_saturating.cfg")) + " --out-dir " + q(dir))
                .exit_code == 0);
    const std::string csv = read_file(dir / "periodic.csv");
    // second line, second field: a full-precision non-integer value
    const auto first_newline = csv.find('\n');
    const auto second_newline = csv.find('\n', first_newline + 1);
    const std::string row = csv.substr(first_newline + 1, second_newline - first_newline - 1);
    const auto comma = row.find(',');
    const std::string field = row.substr(comma + 1);
    const double parsed = std::stod(field);
    // round-tripping the printed value reproduces it exactly
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", parsed);
    CHECK(field == buf);
}

} // TEST_SUITE
