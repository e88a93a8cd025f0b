#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "lcr/error.hpp"
#include "lcr/querygen.hpp"

#include "json.hpp"

#include <thread>

using nlohmann::json;

namespace lcr {

namespace {

// Splits "scheme://host:port/path" into origin and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint)
{
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) fail(ErrorKind::usage, "endpoint must start with http:// or https://");
    auto scheme = endpoint.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") fail(ErrorKind::usage, "unsupported scheme '" + scheme + "'");
    auto path_begin = endpoint.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {endpoint, "/v1/chat/completions"};
    return {endpoint.substr(0, path_begin), endpoint.substr(path_begin)};
}

}  // namespace

ChatHttpClient::ChatHttpClient(ChatClientConfig cfg) : m_cfg(std::move(cfg))
{
    std::tie(m_origin, m_path) = split_endpoint(m_cfg.endpoint);
}

std::string ChatHttpClient::request_body(const std::vector<Message>& messages) const
{
    json body;
    body["model"] = m_cfg.model;
    body["temperature"] = m_cfg.temperature;
    auto& arr = body["messages"] = json::array();
    for (const auto& m : messages) arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return body.dump();
}

std::string ChatHttpClient::parse_response(std::string_view body)
{
    try {
        auto j = json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorKind::generation_failed, std::string("bad completion response: ") + e.what());
    }
}

std::string ChatHttpClient::complete(const std::vector<Message>& messages)
{
    httplib::Client cli(m_origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(m_cfg.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(m_cfg.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!m_cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + m_cfg.api_key);
    auto body = request_body(messages);

    std::string last_error;
    auto backoff = m_cfg.initial_backoff;
    for (int attempt = 1; attempt <= std::max(1, m_cfg.max_attempts); ++attempt) {
        auto res = cli.Post(m_path, headers, body, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            return parse_response(res->body);
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else {
            fail(ErrorKind::generation_failed, "HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        if (attempt < m_cfg.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    fail(ErrorKind::generation_failed, last_error + " after " + std::to_string(m_cfg.max_attempts) + " attempts");
}

}  // namespace lcr
