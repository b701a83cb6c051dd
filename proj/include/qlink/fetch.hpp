#pragma once

// Remote CSV retrieval. Kept apart from ingest.hpp so the numeric core does not
// pull in the HTTP client. Define CPPHTTPLIB_OPENSSL_SUPPORT (and link OpenSSL)
// to enable https:// endpoints.

#include "qlink/error.hpp"

#include <httplib.h>

#include <cctype>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

namespace qlink {

inline constexpr std::string_view kDefaultEndpoint = "https://stooq.com/q/d/l/?s={symbol}&i=d";

struct FetchOptions {
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{60};
};

namespace detail {

[[nodiscard]] inline std::string percent_encode(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

struct ParsedUrl {
    std::string origin; // scheme://host[:port]
    std::string target; // /path?query
};

[[nodiscard]] inline ParsedUrl parse_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw Error(ErrorCode::NetworkError, "ingest", "endpoint is not an absolute URL: " + std::string(url));
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) {
        return {std::string(url), "/"};
    }
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

} // namespace detail

/// Expands `{symbol}` in the endpoint template (symbol percent-encoded).
[[nodiscard]] inline std::string expand_endpoint(std::string_view endpoint, std::string_view symbol) {
    std::string url(endpoint);
    const std::string encoded = detail::percent_encode(symbol);
    for (auto pos = url.find("{symbol}"); pos != std::string::npos; pos = url.find("{symbol}", pos + encoded.size())) {
        url.replace(pos, 8, encoded);
    }
    return url;
}

/// GETs the expanded endpoint and returns the body verbatim. Nothing touches
/// the filesystem here; callers persist the result.
[[nodiscard]] inline std::string fetch_remote_csv(std::string_view symbol, std::string_view endpoint = kDefaultEndpoint,
                                                  const FetchOptions& options = {}) {
    if (symbol.empty()) {
        throw Error(ErrorCode::NetworkError, "ingest", "empty symbol");
    }
    const auto url = expand_endpoint(endpoint, symbol);
    const auto parsed = detail::parse_url(url);

    httplib::Client client(parsed.origin);
    if (!client.is_valid()) {
        throw Error(ErrorCode::NetworkError, "ingest", "unsupported endpoint " + parsed.origin);
    }
    client.set_connection_timeout(options.connect_timeout);
    client.set_read_timeout(options.read_timeout);
    client.set_follow_location(true);

    auto res = client.Get(parsed.target);
    if (!res) {
        throw Error(ErrorCode::NetworkError, "ingest", url + ": " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::HttpStatusError, "ingest", url + ": HTTP " + std::to_string(res->status));
    }
    return std::move(res->body);
}

} // namespace qlink
