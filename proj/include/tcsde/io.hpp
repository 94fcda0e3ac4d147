#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcsde/experiments.hpp"
#include "tcsde/path.hpp"
#include "tcsde/sde.hpp"

namespace tcsde {

// Shortest round-trip decimal, '.' separator, no locale.
std::string format_double(double v);

// Header row then one row per index; columns must have equal length. LF endings.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

// {grid, values, interp}
nlohmann::json to_json(const CadlagPath& p);
// path fields plus {scheme, step, seed, spec_name}
nlohmann::json to_json(const SolutionPath& s);
// {check_name, n, seed, estimate, se, target, provenance, z}
nlohmann::json to_json(const MomentCheck& c);

std::string sha256_hex(const std::string& bytes);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

// Collects artifacts under one directory; write_manifest() lists each with its hash.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path root);
    void write(const std::string& relative, const std::string& bytes);
    void write_json(const std::string& relative, const nlohmann::json& j);
    // manifest.json: {"artifacts": [{"path", "bytes", "sha256"}...]} sorted by path
    void write_manifest();
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::pair<std::size_t, std::string>> entries_;
};

// Key-value config with [sections]; keys are addressed as "section.key".
// '#' and ';' start comments. Every lookup error names the key and its line.
class Config {
public:
    static Config parse(const std::string& text, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& file);

    // "section.key=value"; adds or replaces the key (line 0 marks an override).
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    // Keys under "section." with the prefix stripped.
    std::map<std::string, std::string> section(const std::string& name) const;

    // Throws ConfigError naming the first key not in `known` (exact or "section.*").
    void require_known(const std::vector<std::string>& known) const;

    std::string where(const std::string& key) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string source_;
    std::map<std::string, Entry> entries_;
    const Entry& entry(const std::string& key) const;
};

}  // namespace tcsde
