#include "qlink/fetch.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <thread>

using namespace qlink;
using fixtures::run_command;

namespace {

const std::string kCli = QLINK_CLI_PATH;
const std::string kGoog = std::string(QLINK_DATA_DIR) + "/goog_daily.csv";

std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string write_prices(const fixtures::TempDir& dir, const std::string& name, std::span<const double> returns) {
    auto path = dir / name;
    atomic_write(path, fixtures::prices_csv_from_returns(returns));
    return quote(path);
}

double value_after(const std::string& text, const std::string& key) {
    auto pos = text.find(key + "=");
    EXPECT_NE(pos, std::string::npos) << text;
    return std::stod(text.substr(pos + key.size() + 1));
}

std::size_t line_count(const std::filesystem::path& p) {
    auto text = read_file(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST(Cli, HelpForEverySubcommand) {
    EXPECT_EQ(run_command(kCli + " --help").exit_code, 0);
    for (const char* sub : {"fetch", "returns", "fit", "kappa", "simulate"}) {
        auto r = run_command(kCli + " " + sub + " --help");
        EXPECT_EQ(r.exit_code, 0) << sub;
        EXPECT_NE(r.output.find("--"), std::string::npos) << sub;
    }
    EXPECT_NE(run_command(kCli + " fit --no-such-flag").exit_code, 0);
    EXPECT_NE(run_command(kCli).exit_code, 0);
}

TEST(Cli, FitRecoversSimulatedParameters) {
    fixtures::TempDir dir;
    auto r = simulate_garch({0.1, 0.05, 0.90}, 12'500, 20240601);
    auto in = write_prices(dir, "sim.csv", r.values());
    auto out = run_command(kCli + " fit --input " + in);
    ASSERT_EQ(out.exit_code, 0) << out.output;
    auto j = nlohmann::json::parse(out.output);
    EXPECT_NEAR(j["alpha"].get<double>(), 0.05, 0.03);
    EXPECT_NEAR(j["beta"].get<double>(), 0.90, 0.05);
    EXPECT_EQ(j["n_in_sample"].get<int>(), 10'000);
}

TEST(Cli, InputErrorsExitNonzero) {
    fixtures::TempDir dir;
    auto tiny = write_prices(dir, "tiny.csv", std::vector<double>{0.01, -0.02});
    auto r = run_command(kCli + " fit --input " + tiny);
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("DegenerateSplit"), std::string::npos) << r.output;

    EXPECT_NE(run_command(kCli + " fit --input '" + kGoog + "' --split 1.5").exit_code, 0);
    EXPECT_NE(run_command(kCli + " fit --input " + quote(dir / "absent.csv")).exit_code, 0);

    atomic_write(dir / "bad.csv", "Date,Close\n2020-01-01,1\n2020-01-02,x\n");
    auto bad = run_command(kCli + " kappa --input " + quote(dir / "bad.csv"));
    EXPECT_NE(bad.exit_code, 0);
    EXPECT_NE(bad.output.find("row 3"), std::string::npos) << bad.output;
}

TEST(Cli, KappaGaussianAndConstantMagnitude) {
    fixtures::TempDir dir;
    auto gauss = write_prices(dir, "gauss.csv", fixtures::iid_normal(200'000, 0.01, 99));
    auto g = run_command(kCli + " kappa --input " + gauss);
    ASSERT_EQ(g.exit_code, 0) << g.output;
    EXPECT_NEAR(value_after(g.output, "kappa_hat"), 2.0 / std::numbers::pi, 0.01);
    EXPECT_EQ(value_after(g.output, "t_oos"), 40'000);

    std::vector<double> flat(500);
    for (std::size_t t = 0; t < flat.size(); ++t) flat[t] = (t * 7 % 3 == 0) ? 0.01 : -0.01;
    auto c = run_command(kCli + " kappa --input " + write_prices(dir, "flat.csv", flat));
    ASSERT_EQ(c.exit_code, 0) << c.output;
    EXPECT_NEAR(value_after(c.output, "kappa_hat"), 1.0, 1e-6);
}

TEST(Cli, ReturnsSubcommand) {
    fixtures::TempDir dir;
    const std::vector<double> r{0.01, -0.02, 0.005};
    auto in = write_prices(dir, "p.csv", r);
    auto out = run_command(kCli + " returns --input " + in);
    ASSERT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.output.substr(0, 12), "Date,Return\n");
    EXPECT_NE(out.output.find("1990-01-02,"), std::string::npos);
    ASSERT_EQ(run_command(kCli + " returns --input " + in + " --out " + quote(dir / "r.csv")).exit_code, 0);
    EXPECT_EQ(read_file(dir / "r.csv"), out.output);
}

TEST(Cli, SimulateDefaultsAndDeterminism) {
    fixtures::TempDir dir;
    const std::string base = kCli + " simulate --input '" + kGoog + "' ";
    ASSERT_EQ(run_command(base + "--seed 42 --out " + quote(dir / "a.csv") + " --plot " + quote(dir / "a.svg")).exit_code, 0);
    ASSERT_EQ(run_command(base + "--seed 42 --out " + quote(dir / "b.csv") + " --plot " + quote(dir / "b.svg")).exit_code, 0);
    ASSERT_EQ(run_command(base + "--seed 42 --jobs 1 --out " + quote(dir / "c.csv")).exit_code, 0);
    EXPECT_EQ(line_count(dir / "a.csv"), 6001u);
    EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "b.csv"));
    EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "c.csv"));
    EXPECT_EQ(read_file(dir / "a.svg"), read_file(dir / "b.svg"));
    EXPECT_EQ(read_file(dir / "a.meta.json"), read_file(dir / "b.meta.json"));
    auto meta = nlohmann::json::parse(read_file(dir / "a.meta.json"));
    EXPECT_EQ(meta["dataset"], "goog_daily");
}

TEST(Cli, SimulateMinimalGridAndOverrides) {
    fixtures::TempDir dir;
    auto r = run_command(kCli + " simulate --input '" + kGoog + "' --types 1 --levels 2 --reps 1 --out " +
                         quote(dir / "m.csv"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(line_count(dir / "m.csv"), 3u);

    atomic_write(dir / "run.cfg", "levels=3\nreps=4\ntypes=2\n");
    ASSERT_EQ(run_command(kCli + " simulate --input '" + kGoog + "' --config " + quote(dir / "run.cfg") +
                          " --reps 2 --out " + quote(dir / "cfg.csv"))
                  .exit_code,
              0);
    auto rows = parse_table(read_file(dir / "cfg.csv"));
    EXPECT_EQ(rows.size(), 6u);
    for (const auto& row : rows) EXPECT_EQ(row.kind, ForecastKind::Type2);

    EXPECT_NE(run_command(kCli + " simulate --input '" + kGoog + "' --levels 1 --out " + quote(dir / "x.csv")).exit_code, 0);
    EXPECT_NE(run_command(kCli + " simulate --input '" + kGoog + "' --types 4 --out " + quote(dir / "x.csv")).exit_code, 0);
    EXPECT_FALSE(std::filesystem::exists(dir / "x.csv"));
}

TEST(Cli, FailedPlotLeavesNoPartialOutputs) {
    fixtures::TempDir dir;
    auto r = run_command(kCli + " simulate --input '" + kGoog + "' --levels 2 --reps 2 --out " + quote(dir / "t.csv") +
                         " --plot " + quote(dir.path() / "nowhere" / "p.svg"));
    EXPECT_NE(r.exit_code, 0);
    EXPECT_FALSE(std::filesystem::exists(dir / "t.csv"));
    EXPECT_FALSE(std::filesystem::exists(dir / "t.meta.json"));
}

TEST(Cli, FetchAgainstLocalServer) {
    const std::string body = read_file(kGoog);
    httplib::Server server;
    server.Get("/csv", [&](const httplib::Request&, httplib::Response& res) { res.set_content(body, "text/csv"); });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    fixtures::TempDir dir;
    const std::string endpoint = "'http://127.0.0.1:" + std::to_string(port) + "/csv?s={symbol}'";
    auto ok = run_command(kCli + " fetch --symbol goog --endpoint " + endpoint + " --out " + quote(dir / "g.csv"));
    EXPECT_EQ(ok.exit_code, 0) << ok.output;
    EXPECT_EQ(read_file(dir / "g.csv"), body);

    atomic_write(dir / "keep.csv", "precious");
    EXPECT_NE(run_command(kCli + " fetch --symbol goog --endpoint " + endpoint + " --out " + quote(dir / "keep.csv")).exit_code, 0);
    EXPECT_EQ(read_file(dir / "keep.csv"), "precious");
    EXPECT_EQ(run_command(kCli + " fetch --symbol goog --force --endpoint " + endpoint + " --out " + quote(dir / "keep.csv")).exit_code, 0);
    EXPECT_EQ(read_file(dir / "keep.csv"), body);

    server.stop();
    th.join();

    auto down = run_command(kCli + " fetch --symbol goog --endpoint " + endpoint + " --out " + quote(dir / "none.csv"));
    EXPECT_NE(down.exit_code, 0);
    EXPECT_NE(down.output.find("NetworkError"), std::string::npos) << down.output;
    EXPECT_FALSE(std::filesystem::exists(dir / "none.csv"));
}
