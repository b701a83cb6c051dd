// qlink command-line front end: fetch, returns, fit, kappa, simulate.

#include "qlink/fetch.hpp"
#include "qlink/qlink.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

const CLI::Validator kOpenUnitInterval(
    [](std::string& s) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        if (!(v > 0.0 && v < 1.0)) {
            return "must lie strictly between 0 and 1, got " + s;
        }
        return {};
    },
    "(0,1)", "OPEN_UNIT_INTERVAL");

qlink::ReturnSeries load_returns(const std::string& input) {
    return qlink::to_log_returns(qlink::parse_price_csv(qlink::read_file(input)));
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) {
        std::cerr << "qlink: warning: " << w << '\n';
    }
}

struct FetchArgs {
    std::string symbol;
    std::string out;
    std::string endpoint{qlink::kDefaultEndpoint};
    bool force = false;
};

int cmd_fetch(const FetchArgs& a) {
    if (fs::exists(a.out) && !a.force) {
        std::cerr << "qlink: fetch: " << a.out << " exists (use --force to overwrite)\n";
        return 1;
    }
    const auto body = qlink::fetch_remote_csv(a.symbol, a.endpoint);
    const auto n = qlink::atomic_write(a.out, body);
    std::cout << "wrote " << n << " bytes to " << a.out << '\n';
    return 0;
}

struct ReturnsArgs {
    std::string input;
    std::string out;
};

int cmd_returns(const ReturnsArgs& a) {
    const auto r = load_returns(a.input);
    std::string text = "Date,Return\n";
    for (std::size_t t = 0; t < r.size(); ++t) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%.17g\n", r[t]);
        text += qlink::format_iso_date(r.dates()[t]);
        text += buf;
    }
    if (a.out.empty()) {
        std::cout << text;
    } else {
        qlink::atomic_write(a.out, text);
    }
    return 0;
}

struct FitArgs {
    std::string input;
    double split = 0.8;
    double tolerance = 1e-8;
    bool demean = false;
};

qlink::SplitReturns windows_for(const FitArgs& a) {
    auto w = qlink::split(load_returns(a.input), a.split);
    return a.demean ? qlink::demean(w) : w;
}

int cmd_fit(const FitArgs& a) {
    const auto w = windows_for(a);
    const auto fit = qlink::fit_garch11(w.in_sample, {a.tolerance});
    print_warnings(fit.warnings);
    std::cout << qlink::to_json(fit).dump(2) << '\n';
    return 0;
}

int cmd_kappa(const FitArgs& a) {
    const auto w = windows_for(a);
    const auto fit = qlink::fit_garch11(w.in_sample, {a.tolerance});
    print_warnings(fit.warnings);
    const auto oos = qlink::filter_oos(fit.params, fit.last_state(w.in_sample.values()), w.out_sample);
    const auto k = qlink::kappa_hat(w.out_sample.values(), oos.sigma);
    char buf[160];
    std::snprintf(buf, sizeof buf, "kappa_hat=%.10g\nz_bar=%.10g\nt_oos=%zu\n", k.kappa_hat, k.z_bar, k.t_oos);
    std::cout << buf;
    return 0;
}

struct SimulateArgs {
    std::string input;
    std::string config_file;
    std::size_t levels = 20;
    std::size_t reps = 100;
    std::uint64_t seed = 42;
    double split = 0.8;
    std::string types = "1,2,3";
    std::string lambda_window = "in_sample";
    std::string out;
    std::string plot;
    std::string dataset;
    unsigned jobs = 0;
    double tolerance = 1e-8;
    bool demean = false;
};

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub) {
    qlink::ExperimentConfig cfg;
    if (!a.config_file.empty()) {
        cfg = qlink::parse_experiment_config(qlink::read_file(a.config_file));
    }
    auto given = [&](const char* flag) { return sub.count(flag) > 0; };
    if (given("--levels")) cfg.levels = a.levels;
    if (given("--reps")) cfg.reps = a.reps;
    if (given("--seed")) cfg.seed = a.seed;
    if (given("--split")) cfg.split_fraction = a.split;
    if (given("--types")) cfg.kinds = qlink::parse_kind_list(a.types);
    if (given("--lambda-window")) cfg.lambda_window = *qlink::parse_lambda_window(a.lambda_window);
    if (given("--tolerance")) cfg.garch_tolerance = a.tolerance;
    if (given("--demean")) cfg.demean = a.demean;
    cfg.validate();

    const unsigned jobs = a.jobs ? a.jobs : std::max(1U, std::thread::hardware_concurrency());
    const std::string dataset = a.dataset.empty() ? fs::path(a.input).stem().string() : a.dataset;

    const auto result = qlink::run_experiment(load_returns(a.input), cfg, jobs);
    print_warnings(result.warnings);

    // Render everything before touching the filesystem, then write atomically;
    // on any failure remove what was already written.
    struct Output {
        fs::path path;
        std::string content;
    };
    std::vector<Output> outputs{{a.out, qlink::render_table(result)},
                                {qlink::metadata_path_for(a.out), qlink::render_metadata(result, dataset)}};
    if (!a.plot.empty()) {
        outputs.push_back({a.plot, qlink::render_svg(result, dataset)});
    }
    std::vector<fs::path> written;
    try {
        for (const auto& o : outputs) {
            qlink::atomic_write(o.path, o.content);
            written.push_back(o.path);
        }
    } catch (...) {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        throw;
    }

    char buf[256];
    std::snprintf(buf, sizeof buf, "kappa_hat=%.6f z_bar=%.6f t_oos=%zu garch=(%.4g, %.4f, %.4f)\n",
                  result.kappa.kappa_hat, result.kappa.z_bar, result.kappa.t_oos, result.garch.omega,
                  result.garch.alpha, result.garch.beta);
    std::cout << buf;
    std::size_t level = static_cast<std::size_t>(-1);
    for (const auto& g : result.aggregates) {
        if (g.level != level) {
            if (level != static_cast<std::size_t>(-1)) std::cout << '\n';
            level = g.level;
            std::snprintf(buf, sizeof buf, "level %2zu p=%.4f theo=%.5f", g.level, g.target_p,
                          qlink::theoretical_r2(g.target_p, result.kappa.kappa_hat));
            std::cout << buf;
        }
        std::snprintf(buf, sizeof buf, "  %s: da=%.4f r2=%+.5f", std::string(qlink::to_string(g.kind)).c_str(),
                      g.da.mean, g.r2_oos.mean);
        std::cout << buf;
    }
    std::cout << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Out-of-sample R^2 vs directional accuracy simulation lab", "qlink"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    FetchArgs fetch;
    auto* fetch_cmd = app.add_subcommand("fetch", "Download a daily price CSV to a file");
    fetch_cmd->add_option("--symbol", fetch.symbol, "Ticker symbol, e.g. ^spx")->required();
    fetch_cmd->add_option("--out", fetch.out, "Output file")->required();
    fetch_cmd->add_option("--endpoint", fetch.endpoint, "URL template with a {symbol} placeholder");
    fetch_cmd->add_flag("--force", fetch.force, "Overwrite an existing output file");

    ReturnsArgs returns;
    auto* returns_cmd = app.add_subcommand("returns", "Print daily log returns of a price file");
    returns_cmd->add_option("--input", returns.input, "Price CSV (Date and Close columns)")->required()->check(CLI::ExistingFile);
    returns_cmd->add_option("--out", returns.out, "Write to a file instead of standard output");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit GARCH(1,1) on the in-sample window and print JSON");
    FitArgs kappa;
    auto* kappa_cmd = app.add_subcommand("kappa", "Estimate the shape parameter on the out-of-sample window");
    for (auto [cmd, args] : {std::pair{fit_cmd, &fit}, std::pair{kappa_cmd, &kappa}}) {
        cmd->add_option("--input", args->input, "Price CSV (Date and Close columns)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--split", args->split, "In-sample fraction of the return series")->check(kOpenUnitInterval);
        cmd->add_option("--tolerance", args->tolerance, "Optimizer convergence threshold")->check(CLI::PositiveNumber);
        cmd->add_flag("--demean", args->demean, "Subtract the in-sample mean return before fitting");
    }

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo grid and write table, metadata, plot");
    sim_cmd->add_option("--input", sim.input, "Price CSV (Date and Close columns)")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--config", sim.config_file, "key=value file; explicit flags take precedence")->check(CLI::ExistingFile);
    sim_cmd->add_option("--levels", sim.levels, "Number of accuracy levels from 0.50 to 1.00")->check(CLI::Range(2, 100000));
    sim_cmd->add_option("--reps", sim.reps, "Replications per level")->check(CLI::Range(1, 10000000));
    sim_cmd->add_option("--seed", sim.seed, "Master seed");
    sim_cmd->add_option("--split", sim.split, "In-sample fraction of the return series")->check(kOpenUnitInterval);
    sim_cmd->add_option("--types", sim.types, "Comma-separated forecast types (1, 2, 3)");
    sim_cmd->add_option("--lambda-window", sim.lambda_window, "Scaling-factor window")
        ->check(CLI::IsMember({"in_sample", "oracle"}));
    sim_cmd->add_option("--out", sim.out, "Result table (CSV); metadata goes to <stem>.meta.json")->required();
    sim_cmd->add_option("--plot", sim.plot, "Optional SVG chart");
    sim_cmd->add_option("--dataset", sim.dataset, "Dataset label (default: input file stem)");
    sim_cmd->add_option("--jobs", sim.jobs, "Worker threads (0 = all cores)");
    sim_cmd->add_option("--tolerance", sim.tolerance, "GARCH optimizer convergence threshold")->check(CLI::PositiveNumber);
    sim_cmd->add_flag("--demean", sim.demean, "Subtract the in-sample mean return before fitting");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fetch_cmd) return cmd_fetch(fetch);
        if (*returns_cmd) return cmd_returns(returns);
        if (*fit_cmd) return cmd_fit(fit);
        if (*kappa_cmd) return cmd_kappa(kappa);
        if (*sim_cmd) return cmd_simulate(sim, *sim_cmd);
    } catch (const std::exception& e) {
        std::cerr << "qlink: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
