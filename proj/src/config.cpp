#include "lcr/config.hpp"

#include "lcr/error.hpp"
#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include <cctype>
#include <cstdlib>

namespace lcr {

KeyedConfig KeyedConfig::parse(const std::string& text)
{
    KeyedConfig cfg;
    std::size_t number = 0;
    for (const auto& raw : text::split(text, '\n')) {
        ++number;
        auto line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = text::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::usage, "config line " + std::to_string(number) + ": expected key = value");
        }
        auto key = text::trim(line.substr(0, eq));
        auto value = text::trim(line.substr(eq + 1));
        if (key.empty()) {
            fail(ErrorKind::usage, "config line " + std::to_string(number) + ": empty key");
        }
        cfg.m_values[key] = value;
    }
    return cfg;
}

KeyedConfig KeyedConfig::load(const std::filesystem::path& path)
{
    return parse(io::read_file(path));
}

void KeyedConfig::apply_environment(const std::string& prefix)
{
    // Known keys plus the client credentials, which usually only exist in
    // the environment.
    std::map<std::string, std::string> keys;
    for (const auto& [k, v] : m_values) keys[k] = v;
    for (const char* k : {"client.api_key", "client.endpoint", "client.model"}) keys[k];
    for (const auto& [key, unused] : keys) {
        std::string name = prefix;
        for (char c : key) {
            name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
        if (const char* v = std::getenv(name.c_str())) m_values[key] = v;
    }
}

std::optional<std::string> KeyedConfig::get(const std::string& key) const
{
    auto it = m_values.find(key);
    if (it == m_values.end()) return std::nullopt;
    return it->second;
}

std::string KeyedConfig::get_string(const std::string& key, const std::string& fallback) const
{
    return get(key).value_or(fallback);
}

double KeyedConfig::get_double(const std::string& key, double fallback) const
{
    auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0') fail(ErrorKind::usage, "config " + key + ": not a number: " + *v);
    return d;
}

long long KeyedConfig::get_int(const std::string& key, long long fallback) const
{
    auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    long long n = std::strtoll(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0') fail(ErrorKind::usage, "config " + key + ": not an integer: " + *v);
    return n;
}

bool KeyedConfig::get_bool(const std::string& key, bool fallback) const
{
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    fail(ErrorKind::usage, "config " + key + ": not a boolean: " + *v);
}

}  // namespace lcr
