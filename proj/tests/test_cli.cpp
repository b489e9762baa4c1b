#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <snewton/snewton.hpp>

namespace fs = std::filesystem;
using snewton::Json;

namespace {

struct CliResult
{
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test
{
  protected:
    fs::path dir;

    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / ("snewton_cli_" + std::string(info->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    void TearDown() override { fs::remove_all(dir); }

    CliResult run(const std::string& args) const
    {
        const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
        const std::string cmd =
            std::string(SNEWTON_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
        const int status = std::system(cmd.c_str());
        return {WEXITSTATUS(status), slurp(out), slurp(err)};
    }

    Json json(const fs::path& p) const { return Json::parse(slurp(p)); }

    std::string out(const std::string& name) const { return (dir / name).string(); }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_F(Cli, SolveGroundState)
{
    const auto r = run("solve --dim 2 --m 0 --nodes 0 --out " + out("s"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto diag = json(dir / "s" / "diagnostics.json");
    EXPECT_TRUE(diag.at("all_pass").get<bool>());
    const auto manifest = json(dir / "s" / "manifest.json");
    const std::string id = manifest.at("run_id");
    EXPECT_EQ(diag.at("run_id"), id);
    const std::string profile = slurp(dir / "s" / "profile.csv");
    EXPECT_EQ(profile.rfind("# run_id=" + id + "\nr,u,du,V,dV\n", 0), 0u);
    EXPECT_FALSE(fs::exists(dir / "s" / "physical.csv"));
    for (const char* key : {"command_line", "version", "params", "controls", "bis_tol_rel", "result", "files",
                            "wall_time_s"}) {
        EXPECT_TRUE(manifest.contains(key)) << key;
    }
    EXPECT_EQ(manifest.at("result").at("zeros").size(), 0u);
}

TEST_F(Cli, SolveOddParityGroundState)
{
    const auto r = run("solve --dim 1 --parity 1 --nodes 0 --gamma 1 --sigma 1 --out " + out("s"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto prof = csv_rows(slurp(dir / "s" / "profile.csv"));
    for (std::size_t i = 1; i < prof.size(); ++i) ASSERT_GT(std::stod(prof[i][1]), 0.0);
    const auto phys = csv_rows(slurp(dir / "s" / "physical.csv"));
    ASSERT_EQ(phys[0], (std::vector<std::string>{"r", "phi", "v"}));
    // phi = x u(x): vanishes linearly at the origin, the odd extension is smooth
    const double x1 = std::stod(phys[1][0]), f1 = std::stod(phys[1][1]);
    const double x2 = std::stod(phys[2][0]), f2 = std::stod(phys[2][1]);
    EXPECT_NEAR(f1 / x1, f2 / x2, 1e-6 * f2 / x2);
    EXPECT_LT(f1, 1e-3);
}

TEST_F(Cli, SolvePhysicalManifest)
{
    const auto r = run("solve --dim 2 --m 0 --nodes 0 --gamma 1 --sigma 1 --out " + out("s"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ph = json(dir / "s" / "manifest.json").at("physical");
    EXPECT_NEAR(ph.at("omega").get<double>(), 1.0 + ph.at("v_origin").get<double>(), 1e-15);
    EXPECT_TRUE(ph.contains("E"));
    EXPECT_GT(ph.at("N").get<double>(), 0.0);
    EXPECT_LT(ph.at("residual_phi").get<double>(), 1e-5);
    EXPECT_TRUE(fs::exists(dir / "s" / "physical.csv"));
}

TEST_F(Cli, SolveUsageErrors)
{
    EXPECT_EQ(run("solve --dim 3 --m 0 --nodes 0 --out " + out("a")).code, 1);
    EXPECT_EQ(run("solve --dim 2 --m 0 --out " + out("a")).code, 1);
    EXPECT_EQ(run("solve --dim 2 --m -1 --nodes 0 --out " + out("a")).code, 1);
    EXPECT_EQ(run("solve --dim 1 --parity 2 --nodes 0 --out " + out("a")).code, 1);
    EXPECT_EQ(run("solve --dim 2 --m 0 --nodes 0 --gamma 1 --out " + out("a")).code, 1);
    EXPECT_EQ(run("solve --dim 2 --m 0 --nodes 0 --tol 0 --out " + out("a")).code, 1);
    EXPECT_EQ(run("solve --dim 2 --m 0 --parity 0 --nodes 0 --out " + out("a")).code, 1);
    EXPECT_EQ(run("bogus").code, 1);
}

TEST_F(Cli, SolveConvergenceFailureNamesStage)
{
    const auto r = run("solve --dim 2 --m 0 --nodes 0 --rmax 0.5 --out " + out("a"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("stage bracket"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("ScanExhausted"), std::string::npos) << r.err;
}

TEST_F(Cli, ScanIsOrderedAndDeterministic)
{
    const std::string flags = "scan --dim 2 --m-min 0 --m-max 1 --m-step 0.5 --nodes-max 2";
    const auto a = run(flags + " --jobs 1 --out " + out("a"));
    const auto b = run(flags + " --jobs 3 --out " + out("b"));
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    const std::string csv = slurp(dir / "a" / "scan.csv");
    EXPECT_EQ(csv, slurp(dir / "b" / "scan.csv"));
    const auto rows = csv_rows(csv);
    ASSERT_EQ(rows.size(), 10u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"m", "n", "alpha", "status"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][3], "ok");
        EXPECT_EQ(std::stoi(rows[i][1]), int((i - 1) % 3));
        if ((i - 1) % 3 != 0) {
            EXPECT_LT(std::stod(rows[i][2]), std::stod(rows[i - 1][2]));
        }
    }
    const auto manifest = json(dir / "a" / "manifest.json");
    EXPECT_EQ(manifest.at("outcomes").size(), 9u);
    EXPECT_EQ(manifest.at("run_id"), json(dir / "b" / "manifest.json").at("run_id"));
}

TEST_F(Cli, ScanValidationAndFailures)
{
    EXPECT_EQ(run("scan --m-min 0 --m-max 1 --m-step 0 --nodes-max 1 --out " + out("a")).code, 1);
    EXPECT_EQ(run("scan --m-min 1 --m-max 0 --m-step 0.5 --nodes-max 1 --out " + out("a")).code, 1);
    EXPECT_EQ(run("scan --m-min 0 --m-max 1 --m-step 0.5 --nodes-max -1 --out " + out("a")).code, 1);
    const auto r = run("scan --m-min 0 --m-max 0.5 --m-step 0.5 --nodes-max 0 --rmax 0.5 --out " + out("f"));
    EXPECT_EQ(r.code, 3);
    const auto rows = csv_rows(slurp(dir / "f" / "scan.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][2], "nan");
    EXPECT_EQ(rows[1][3], "failed:ScanExhausted");
}

TEST_F(Cli, CheckStoredProfile)
{
    ASSERT_EQ(run("solve --dim 2 --m 1 --nodes 1 --out " + out("s")).code, 0);
    const auto r = run("check --dim 2 --m 1 --profile " + out("s/profile.csv"));
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_TRUE(j.at("all_pass").get<bool>());
    EXPECT_TRUE(j.at("decay").at("pass").get<bool>());
    EXPECT_EQ(j.at("zeros").get<int>(), 1);
}

TEST_F(Cli, CheckEscapingTrajectory)
{
    const auto r = run("check --dim 2 --m 0 --u0 10");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_EQ(j.at("decay"), "not_applicable");
    for (const auto& [name, c] : j.at("checks").items()) EXPECT_TRUE(c.at("pass").get<bool>()) << name;
}

TEST_F(Cli, CheckReportsFailures)
{
    ASSERT_EQ(run("solve --dim 2 --m 0 --nodes 0 --out " + out("s")).code, 0);
    // halve V on one row in the middle of the profile
    std::istringstream is(slurp(dir / "s" / "profile.csv"));
    std::ostringstream os;
    std::string line;
    int row = 0;
    while (std::getline(is, line)) {
        if (++row == 400) {
            auto cells = csv_rows(line)[0];
            cells[3] = snewton::format_double(0.5 * std::stod(cells[3]));
            line = cells[0] + "," + cells[1] + "," + cells[2] + "," + cells[3] + "," + cells[4];
        }
        os << line << "\n";
    }
    std::ofstream(dir / "bad.csv") << os.str();
    const auto r = run("check --dim 2 --m 0 --profile " + out("bad.csv"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("v_increasing"), std::string::npos) << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_FALSE(j.at("all_pass").get<bool>());
}

TEST_F(Cli, CheckMalformedProfile)
{
    std::ofstream(dir / "bad.csv") << "r,u,du,V,dV\n0.1,1,0,0,0\n0.2,1,oops,0,0\n";
    const auto r = run("check --dim 2 --m 0 --profile " + out("bad.csv"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 3, column 3"), std::string::npos) << r.err;
    EXPECT_EQ(run("check --dim 2 --m 0").code, 1);
    EXPECT_EQ(run("check --dim 2 --m 0 --profile " + out("missing.csv")).code, 1);
}
