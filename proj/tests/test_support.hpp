#pragma once

#include "qlink/qlink.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace qlink::fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("qlink-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Price CSV whose log returns reproduce `returns` (prices start at 100).
[[nodiscard]] inline std::string prices_csv_from_returns(std::span<const double> returns) {
    std::vector<Date> dates;
    std::vector<double> closes;
    std::chrono::sys_days day = std::chrono::sys_days{std::chrono::year{1990} / 1 / 1};
    double level = 100.0;
    dates.emplace_back(day);
    closes.push_back(level);
    double log_level = std::log(level);
    for (double r : returns) {
        day += std::chrono::days{1};
        log_level += r;
        dates.emplace_back(day);
        closes.push_back(std::exp(log_level));
    }
    return serialize_price_csv(PriceSeries(std::move(dates), std::move(closes)));
}

[[nodiscard]] inline std::vector<double> iid_normal(std::size_t n, double sd, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = normal(rng);
    return v;
}

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

/// Runs a shell command, capturing stdout and stderr together.
inline CommandResult run_command(const std::string& cmd) {
    CommandResult r;
    FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        r.output.append(buf.data(), n);
    }
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

} // namespace qlink::fixtures
