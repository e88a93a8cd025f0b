#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace lcr {

/// Flat keyed configuration: one `key = value` per line, `#` starts a
/// comment, keys are dotted (`augment.proportion`). Later assignments win.
class KeyedConfig {
  public:
    static KeyedConfig parse(const std::string& text);
    static KeyedConfig load(const std::filesystem::path& path);

    /// Overlays variables named `<prefix><KEY>` where KEY is the dotted key
    /// upper-cased with dots replaced by underscores, e.g.
    /// LCR_CLIENT_API_KEY for client.api_key.
    void apply_environment(const std::string& prefix = "LCR_");

    void set(const std::string& key, const std::string& value) { m_values[key] = value; }
    bool contains(const std::string& key) const { return m_values.count(key) > 0; }

    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return m_values; }

  private:
    std::map<std::string, std::string> m_values;
};

}  // namespace lcr
