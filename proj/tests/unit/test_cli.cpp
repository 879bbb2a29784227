#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polymer_cli/app.hpp"
#include "polymer_cli/config.hpp"
#include "polymer_cli/output.hpp"
#include "polymer_cli/verify.hpp"

namespace fs = std::filesystem;
using namespace polymer::cli;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("polymer_cli_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

int run_quiet(const std::string& sub, const std::vector<std::string>& overrides,
              const std::optional<std::string>& cfg = std::nullopt) {
    std::ostringstream out, err;
    return run(sub, cfg, overrides, out, err);
}

}  // namespace

TEST(Config, SectionOverridesTopLevel) {
    const auto c = Config::from_string("lambda = 2\neps = 0.5\n[general]\nseed = 3\n[sample]\nlambda = 4\n[other]\neps = 9\n",
                                       "sample");
    EXPECT_DOUBLE_EQ(c.get_double("lambda", 0), 4.0);
    EXPECT_DOUBLE_EQ(c.get_double("eps", 0), 0.5);
    EXPECT_EQ(c.get_seed("seed", 0), 3u);
    EXPECT_DOUBLE_EQ(c.get_double("missing", 7.5), 7.5);
}

TEST(Config, ValueForms) {
    auto c = Config::from_string("eps0 = 1/22\nlist = 0.1, 0.2,0.3\nflag = true\nn = 64\n", "x");
    EXPECT_DOUBLE_EQ(c.get_double("eps0", 0), 1.0 / 22.0);
    EXPECT_EQ(c.get_list("list", {}), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_TRUE(c.get_bool("flag", false));
    EXPECT_EQ(c.get_int("n", 0), 64);
    c.apply_override("n=128");
    EXPECT_EQ(c.get_int("n", 0), 128);
    EXPECT_THROW(c.apply_override("novalue"), ConfigError);
    c.set("bad", "abc");
    EXPECT_THROW(c.get_double("bad", 0), ConfigError);
    EXPECT_THROW(c.get_int("eps0", 0), ConfigError);
    EXPECT_THROW(c.get_bool("bad", false), ConfigError);
}

TEST(Config, UnknownKeyRejected) {
    const auto c = Config::from_string("lambda = 1\ntypo = 2\n", "x");
    EXPECT_NO_THROW(Config::from_string("lambda = 1\n", "x").require_known({"lambda"}));
    EXPECT_THROW(c.require_known({"lambda"}), ConfigError);
}

TEST(Output, GitBlobHash) {
    EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Output, CsvLayout) {
    CsvTable t("t.csv", "title", {{"x", "1", "first"}, {"name", "-", "second"}});
    t.add_row({0.1, std::string("a")});
    t.add_row({std::int64_t{3}, std::string("b")});
    EXPECT_THROW(t.add_row({1.0}), std::exception);
    const auto text = t.render();
    const auto lines = data_lines(text);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "x,name");
    EXPECT_EQ(lines[1], "0.10000000000000001,a");
    EXPECT_EQ(lines[2], "3,b");
    EXPECT_NE(text.find("# x [1]: first"), std::string::npos);
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(App, RenormWritesKappaTable) {
    const auto dir = fresh_dir("renorm");
    ASSERT_EQ(run_quiet("renorm", {"eps=0.5,0.25", "seed=5", "output_dir=" + dir.string()}), 0);
    const auto csv = slurp(dir / "renorm" / "kappa.csv");
    const auto lines = data_lines(csv);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "eps,kappa1,kappa2,method,rtol_achieved");
    const auto manifest = nlohmann::json::parse(slurp(dir / "renorm" / "manifest.json"));
    EXPECT_EQ(manifest["subcommand"], "renorm");
    EXPECT_EQ(manifest["seeds"]["seed"], 5u);
    EXPECT_EQ(manifest["files"][0]["sha1_git"], git_blob_hash(csv));
    EXPECT_EQ(manifest["files"][0]["rows"], 2);
    fs::remove_all(dir);
}

TEST(App, SameSeedSameCsv) {
    const auto d1 = fresh_dir("moments1");
    const auto d2 = fresh_dir("moments2");
    const std::vector<std::string> base{"eps=0.2", "a=0.1", "replicas=50", "second_moment=false", "seed=9"};
    auto o1 = base, o2 = base;
    o1.push_back("output_dir=" + d1.string());
    o2.push_back("output_dir=" + d2.string());
    ASSERT_EQ(run_quiet("moments", o1), 0);
    ASSERT_EQ(run_quiet("moments", o2), 0);
    EXPECT_EQ(slurp(d1 / "moments" / "moments.csv"), slurp(d2 / "moments" / "moments.csv"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(App, ValidationFailureWritesNothing) {
    const auto dir = fresh_dir("invalid");
    const std::string od = "output_dir=" + dir.string();
    EXPECT_EQ(run_quiet("renorm", {"eps=abc", od}), exit_validation);
    EXPECT_EQ(run_quiet("renorm", {"unknown_key=1", od}), exit_validation);
    EXPECT_EQ(run_quiet("sample", {"lambda=-1", od}), exit_validation);
    EXPECT_EQ(run_quiet("quantize", {"coordinates=nodal", "tau_langevin=1", od}), exit_validation);
    EXPECT_EQ(run_quiet("girsanov", {"direction_preset=bogus", od}), exit_validation);
    EXPECT_EQ(run_quiet("nonsense", {od}), exit_validation);
    EXPECT_EQ(run_quiet("verify", {od}), exit_validation);  // seed is mandatory
    EXPECT_EQ(run_quiet("verify", {"seed=1", "eps0=0.1", od}), exit_validation);
    EXPECT_EQ(run_quiet("renorm", {od}, std::string("/nonexistent/config.ini")), exit_validation);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(App, ConfigFileSection) {
    const auto dir = fresh_dir("cfgfile");
    fs::create_directories(dir);
    const auto ini = dir / "run.ini";
    std::ofstream(ini) << "output_dir = " << (dir / "out").string() << "\nseed = 4\n[renorm]\neps = 0.5\n";
    ASSERT_EQ(run_quiet("renorm", {}, ini.string()), 0);
    EXPECT_EQ(data_lines(slurp(dir / "out" / "renorm" / "kappa.csv")).size(), 2u);
    fs::remove_all(dir);
}

TEST(Verify, ConfigDefaultsAndValidation) {
    auto c = Config::from_string("seed = 1\n", "verify");
    const auto v = VerifyConfig::from_config(c);
    EXPECT_DOUBLE_EQ(v.eps0, 1.0 / 22.0);
    EXPECT_EQ(v.n_steps, 128u);
    EXPECT_EQ(v.replicas, 20000u);
    EXPECT_EQ(v.reduced().replicas, 400u);
    EXPECT_THROW(VerifyConfig::from_config(Config::from_string("lambda = 1\n", "verify")), ConfigError);
    for (const char* bad : {"n_steps = 100", "levels_hi = 4", "beta_pcn = 0", "tau_langevin = 1", "delta1 = 0.01",
                            "eps0 = 0.05", "replicas = 10"}) {
        auto b = Config::from_string(std::string("seed = 1\n") + bad + "\n", "verify");
        EXPECT_THROW(VerifyConfig::from_config(b), ConfigError) << bad;
    }
}

TEST(Verify, ToyChainStationary) {
    const auto r = toy_pcn_stationarity(1.0, 0.8, 3);
    EXPECT_EQ(r.states, 729u);
    EXPECT_LT(r.tv_to_target, 1e-9);
    EXPECT_GT(r.tv_prior_target, 1e-3);
}
