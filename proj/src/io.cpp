#include "tcsde/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tcsde/errors.hpp"

namespace tcsde {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) {
        throw ConfigError("csv_table: header and column counts differ");
    }
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns) {
        if (c.size() != rows) {
            throw ConfigError("csv_table: columns of unequal length");
        }
    }
    std::string out;
    for (std::size_t j = 0; j < header.size(); ++j) {
        out += (j ? "," : "") + header[j];
    }
    out += '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) {
                out += ',';
            }
            out += format_double(columns[j][i]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const CadlagPath& p) {
    return {{"grid", p.grid()}, {"values", p.values()}, {"interp", to_string(p.interp())}};
}

nlohmann::json to_json(const SolutionPath& s) {
    nlohmann::json j = to_json(s.path);
    j["scheme"] = to_string(s.scheme);
    j["step"] = s.step;
    j["seed"] = s.seed;
    j["spec_name"] = s.spec_name;
    return j;
}

namespace {

// JSON has no inf/nan; keep them readable as strings
nlohmann::json number(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return format_double(v);
}

}  // namespace

nlohmann::json to_json(const MomentCheck& c) {
    return {{"check_name", c.name},
            {"n", c.estimate.n},
            {"seed", c.estimate.seed},
            {"estimate", number(c.estimate.mean)},
            {"se", number(c.estimate.std_error)},
            {"target", number(c.target)},
            {"target_se", number(c.target_se)},
            {"provenance", to_string(c.provenance)},
            {"z", number(c.z_score)},
            {"passed", c.passed()}};
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("sha256: digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void write_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw ConfigError("cannot write " + tmp.string());
        }
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) {
            throw ConfigError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

ArtifactWriter::ArtifactWriter(fs::path root) : root_(std::move(root)) {}

void ArtifactWriter::write(const std::string& relative, const std::string& bytes) {
    write_atomic(root_ / relative, bytes);
    entries_[relative] = {bytes.size(), sha256_hex(bytes)};
}

void ArtifactWriter::write_json(const std::string& relative, const nlohmann::json& j) { write(relative, j.dump(2) + "\n"); }

void ArtifactWriter::write_manifest() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [path, e] : entries_) {
        arr.push_back({{"path", path}, {"bytes", e.first}, {"sha256", e.second}});
    }
    write_atomic(root_ / "manifest.json", nlohmann::json{{"artifacts", arr}}.dump(2) + "\n");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
    Config c;
    c.source_ = source;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto p = s.find_first_of("#;"); p != std::string::npos) {
            s.erase(p);
        }
        s = trim(s);
        if (s.empty()) {
            continue;
        }
        auto fail = [&](const std::string& why) {
            throw ConfigError(source + ":" + std::to_string(line) + ": " + why);
        };
        if (s.front() == '[') {
            if (s.back() != ']') {
                fail("unterminated section header");
            }
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_name(section)) {
                fail("bad section name '" + section + "'");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            fail("expected key = value, got '" + s + "'");
        }
        const std::string key = trim(s.substr(0, eq));
        if (!valid_name(key)) {
            fail("bad key '" + key + "'");
        }
        if (section.empty()) {
            fail("key '" + key + "' outside a section");
        }
        const std::string full = section + "." + key;
        if (c.entries_.count(full)) {
            fail("duplicate key '" + full + "'");
        }
        c.entries_[full] = {trim(s.substr(eq + 1)), line};
    }
    return c;
}

Config Config::load(const fs::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot read config " + file.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), file.string());
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos || !valid_name(key)) {
        throw ConfigError("--override '" + assignment + "': expected section.key=value");
    }
    entries_[key] = {trim(assignment.substr(eq + 1)), 0};
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string Config::where(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return source_ + ": key '" + key + "'";
    }
    if (it->second.line == 0) {
        return "--override: key '" + key + "'";
    }
    return source_ + ":" + std::to_string(it->second.line) + ": key '" + key + "'";
}

const Config::Entry& Config::entry(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError(source_ + ": missing required key '" + key + "'");
    }
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return entry(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

namespace {

template <class T>
bool parse_number(const std::string& s, T& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto r = std::from_chars(b, e, out);
    return r.ec == std::errc{} && r.ptr == e;
}

}  // namespace

double Config::get_double(const std::string& key) const {
    double v = 0.0;
    if (!parse_number(entry(key).value, v) || !std::isfinite(v)) {
        throw ConfigError(where(key) + ": expected a number, got '" + entry(key).value + "'");
    }
    return v;
}

double Config::get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

long long Config::get_int(const std::string& key) const {
    long long v = 0;
    if (!parse_number(entry(key).value, v)) {
        throw ConfigError(where(key) + ": expected an integer, got '" + entry(key).value + "'");
    }
    return v;
}

long long Config::get_int(const std::string& key, long long fallback) const { return has(key) ? get_int(key) : fallback; }

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) {
        return fallback;
    }
    const std::string& v = entry(key).value;
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError(where(key) + ": expected true/false, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(entry(key).value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        double v = 0.0;
        if (!parse_number(item, v) || !std::isfinite(v)) {
            throw ConfigError(where(key) + ": bad list item '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw ConfigError(where(key) + ": empty list");
    }
    return out;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? get_list(key) : fallback;
}

std::map<std::string, std::string> Config::section(const std::string& name) const {
    std::map<std::string, std::string> out;
    const std::string prefix = name + ".";
    for (const auto& [k, e] : entries_) {
        if (k.rfind(prefix, 0) == 0) {
            out[k.substr(prefix.size())] = e.value;
        }
    }
    return out;
}

void Config::require_known(const std::vector<std::string>& known) const {
    for (const auto& [k, e] : entries_) {
        bool ok = false;
        for (const auto& pat : known) {
            if (pat.size() > 2 && pat.compare(pat.size() - 2, 2, ".*") == 0) {
                ok = k.rfind(pat.substr(0, pat.size() - 1), 0) == 0;
            } else {
                ok = k == pat;
            }
            if (ok) {
                break;
            }
        }
        if (!ok) {
            throw ConfigError(where(k) + ": unknown key");
        }
    }
}

}  // namespace tcsde
