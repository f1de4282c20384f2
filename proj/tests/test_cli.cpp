#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "curvtomo/io/formats.hpp"

using namespace curvtomo;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
  protected:
    fs::path dir;

    void SetUp() override {
        dir = fs::temp_directory_path() /
              (std::string("curvtomo_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path p(const std::string& name) const { return dir / name; }

    CliRun run(const std::string& args) const {
        const std::string cmd = std::string(CURVTOMO_CLI) + " " + args + " > " + p("stdout.txt").string() + " 2> " +
                                p("stderr.txt").string();
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(p("stdout.txt"));
        r.err = slurp(p("stderr.txt"));
        return r;
    }

    fs::path small_config(const std::string& extra = "") const {
        const fs::path c = p("small.cfg");
        std::ofstream(c) << "domain.radius=0.75\nouter.radius=1.0\nforce.kind=magnetic\nforce.b=0.2\ntau=0.5\n"
                            "sigma.kind=constant\nsigma.mu=0.2\ngrid.nx=24\ngrid.ny=24\ngrid.ntheta=8\n"
                            "boundary.positions=60\nboundary.directions=30\nprobe.count=5\n"
                         << extra;
        return c;
    }
};

std::string cfg(const std::string& name) { return (fs::path(CURVTOMO_CONFIG_DIR) / name).string(); }

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double n = 0, d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        n += (a[k] - b[k]) * (a[k] - b[k]);
        d += b[k] * b[k];
    }
    return std::sqrt(n / d);
}

}  // namespace

TEST_F(Cli, VerifyPassesOnEuclideanDefault) {
    const CliRun r = run("verify --config " + cfg("default.cfg") + " --out " + p("report.csv").string());
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    const std::string rep = slurp(p("report.csv"));
    EXPECT_EQ(rep.rfind("check,passed,value,threshold,detail\n", 0), 0u);
    for (const char* check : {"convexity-domain,1", "convexity-outer,1", "nontrapping,1", "energy-drift,1", "santalo,1", "adjoint,1"})
        EXPECT_NE(rep.find(check), std::string::npos) << check;
}

TEST_F(Cli, VerifyFailsConvexityForStrongField) {
    const CliRun r = run("verify --config " + cfg("strong-magnetic.cfg") + " --out " + p("report.csv").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("check 'convexity-domain' failed"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("boundary sample"), std::string::npos);
    EXPECT_NE(slurp(p("report.csv")).find("convexity-outer,0"), std::string::npos);
}

TEST_F(Cli, BadEnergyLevelIsRejectedBeforeAnyRun) {
    const CliRun r = run("verify --config " + cfg("bad-tau.cfg") + " --out " + p("report.csv").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("tau"), std::string::npos);
    EXPECT_FALSE(fs::exists(p("report.csv")));
}

TEST_F(Cli, ConfigErrorsNameTheLine) {
    const fs::path c = p("broken.cfg");
    std::ofstream(c) << "tau=0.5\ngrid.nx=twelve\n";
    const CliRun r = run("phantom --config " + c.string() + " --out " + p("x.ctg").string());
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("broken.cfg:2:"), std::string::npos) << r.err;
}

TEST_F(Cli, TransformThenReconstructRecoversBump) {
    const auto c = small_config().string();
    ASSERT_EQ(run("phantom --config " + c + " --phantom gaussian-bump --out " + p("f.ctg").string()).code, 0);
    ASSERT_EQ(run("transform --config " + c + " --in " + p("f.ctg").string() + " --out " + p("d.cts").string()).code, 0);
    const CliRun r = run("reconstruct --config " + c + " --in " + p("d.cts").string() + " --out " + p("r.ctg").string());
    ASSERT_EQ(r.code, 0) << r.err;
    const GridImage f = read_grid_image(p("f.ctg").string()), fr = read_grid_image(p("r.ctg").string());
    EXPECT_LE(rel_err(fr.values, f.values), 0.05);
    EXPECT_TRUE(fs::exists(p("r.ctg.csv")));
    EXPECT_EQ(slurp(p("r.ctg.residuals.csv")).rfind("iteration,residual,normal_residual\n", 0), 0u);
}

TEST_F(Cli, SimulateWithoutScatteringEqualsTransform) {
    const auto c = small_config().string();
    ASSERT_EQ(run("transform --config " + c + " --phantom two-discs --out " + p("t.cts").string()).code, 0);
    ASSERT_EQ(run("simulate --config " + c + " --phantom two-discs --out " + p("s.cts").string()).code, 0);
    EXPECT_EQ(slurp(p("t.cts")), slurp(p("s.cts")));
}

TEST_F(Cli, SimulateWithScatteringAddsScatteredPart) {
    const auto c = small_config("scatter.kind=separable\nscatter.lambda=0.05\nscatter.kappa1.ax=0.5\n").string();
    ASSERT_EQ(run("transform --config " + c + " --out " + p("t.cts").string()).code, 0);
    ASSERT_EQ(run("simulate --config " + c + " --out " + p("s.cts").string()).code, 0);
    const auto t = read_sinogram_records(p("t.cts").string()), s = read_sinogram_records(p("s.cts").string());
    ASSERT_EQ(t.size(), s.size());
    double diff = 0.0;
    for (std::size_t q = 0; q < t.size(); ++q) {
        EXPECT_EQ(t[q].angle, s[q].angle);
        EXPECT_GE(s[q].value, t[q].value - 1e-12);
        diff = std::max(diff, s[q].value - t[q].value);
    }
    EXPECT_GT(diff, 0.0);
}

TEST_F(Cli, RerunsAreByteIdentical) {
    const auto c = small_config().string();
    const std::vector<std::string> cmds = {
        "phantom --config " + c + " --phantom smooth-ring --out {}f.ctg",
        "transform --config " + c + " --phantom smooth-ring --out {}d.cts",
        "reconstruct --config " + c + " --in " + p("a_d.cts").string() + " --out {}r.ctg",
        "stability-probe --config " + c + " --seed 7 --out {}probe.csv",
        "adjoint-test --config " + c + " --seed 7 --out {}adj.csv",
        "verify --config " + c + " --threads 1 --out {}verify.csv",
    };
    for (const std::string prefix : {"a_", "b_"})
        for (std::string cmd : cmds) {
            for (std::size_t at; (at = cmd.find("{}")) != std::string::npos;) cmd.replace(at, 2, (dir / prefix).string());
            const CliRun r = run(cmd);
            ASSERT_EQ(r.code, 0) << cmd << "\n" << r.err;
        }
    for (const char* f : {"f.ctg", "f.ctg.csv", "d.cts", "d.cts.csv", "r.ctg", "r.ctg.csv", "r.ctg.residuals.csv",
                          "probe.csv", "adj.csv", "verify.csv"})
        EXPECT_EQ(slurp(p(std::string("a_") + f)), slurp(p(std::string("b_") + f))) << f;
}

TEST_F(Cli, ThreadCountDoesNotChangeResults) {
    const auto c = small_config().string();
    ASSERT_EQ(run("transform --config " + c + " --threads 1 --out " + p("one.cts").string()).code, 0);
    const std::string env = "CURVTOMO_THREADS=3 ";
    const std::string cmd = env + CURVTOMO_CLI + " transform --config " + c + " --out " + p("three.cts").string();
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto a = read_sinogram_records(p("one.cts").string()), b = read_sinogram_records(p("three.cts").string());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t q = 0; q < a.size(); ++q) EXPECT_NEAR(a[q].value, b[q].value, 1e-12 * (1.0 + std::abs(a[q].value)));
}

TEST_F(Cli, SeedSelectsProbeEnsemble) {
    const auto c = small_config().string();
    ASSERT_EQ(run("stability-probe --config " + c + " --seed 1 --out " + p("s1.csv").string()).code, 0);
    ASSERT_EQ(run("stability-probe --config " + c + " --seed 2 --out " + p("s2.csv").string()).code, 0);
    EXPECT_NE(slurp(p("s1.csv")), slurp(p("s2.csv")));
}

TEST_F(Cli, OneHotPhantomUsesIndices) {
    const auto c = small_config().string();
    ASSERT_EQ(run("phantom --config " + c + " --phantom one-hot --i 12 --j 10 --out " + p("h.ctg").string()).code, 0);
    const GridImage h = read_grid_image(p("h.ctg").string());
    for (std::size_t k = 0; k < h.values.size(); ++k) EXPECT_EQ(h.values[k], k == h.grid.index(12, 10) ? 1.0 : 0.0);
    EXPECT_NE(run("phantom --config " + c + " --phantom one-hot --i 40 --j 0 --out " + p("bad.ctg").string()).code, 0);
}

TEST_F(Cli, RejectsUnknownPhantomAndMismatchedData) {
    const auto c = small_config().string();
    const CliRun r = run("phantom --config " + c + " --phantom cat --out " + p("x.ctg").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("unknown phantom"), std::string::npos);

    std::string text = slurp(c);
    text.replace(text.find("positions=60"), 12, "positions=40");
    const auto other = p("other.cfg").string();
    std::ofstream(other) << text;
    ASSERT_EQ(run("transform --config " + other + " --out " + p("other.cts").string()).code, 0);
    const CliRun m = run("reconstruct --config " + c + " --in " + p("other.cts").string() + " --out " + p("r.ctg").string());
    EXPECT_EQ(m.code, 3);
    EXPECT_NE(m.err.find("nodes"), std::string::npos) << m.err;

    ASSERT_EQ(run("phantom --config " + cfg("strong-magnetic.cfg") + " --out " + p("big.ctg").string()).code, 0);
    const CliRun g = run("transform --config " + c + " --in " + p("big.ctg").string() + " --out " + p("y.cts").string());
    EXPECT_EQ(g.code, 3);
    EXPECT_NE(g.err.find("does not match the configured grid"), std::string::npos) << g.err;
}

TEST_F(Cli, SantaloAndAdjointSubcommands) {
    const auto c = small_config().string();
    const CliRun s = run("santalo-check --config " + c + " --out " + p("s.csv").string());
    EXPECT_EQ(s.code, 0) << s.out;
    EXPECT_EQ(slurp(p("s.csv")).rfind("function,lhs,rhs,rel_err,normalized_err\n", 0), 0u);
    const CliRun a = run("adjoint-test --config " + c);
    EXPECT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("PASS adjoint"), std::string::npos);
}

TEST_F(Cli, MissingSubcommandOrOutputFails) {
    EXPECT_NE(run("").code, 0);
    EXPECT_NE(run("transform --config " + small_config().string()).code, 0);
}
