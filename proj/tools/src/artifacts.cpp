#include "artifacts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fatml/errors.hpp"

namespace fs = std::filesystem;

namespace fatml::cli {

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

RunDir::RunDir(const std::string& root) : root_(root) {
    fs::path p(root);
    if (fs::exists(p)) {
        if (!fs::is_directory(p)) throw ConfigError("output path is not a directory: " + root);
        if (!fs::is_empty(p)) throw ConfigError("output directory is not empty: " + root);
    } else {
        std::error_code ec;
        fs::create_directories(p, ec);
        if (ec) throw IoError("cannot create " + root + ": " + ec.message());
    }
}

std::string RunDir::path_of(const std::string& relative) const {
    return (fs::path(root_) / relative).string();
}

void RunDir::write_text(const std::string& relative, const std::string& content,
                        bool in_manifest) {
    std::string full = path_of(relative);
    std::ofstream out(full, std::ios::binary);
    if (!out) throw IoError("cannot write " + full);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("short write to " + full);
    if (in_manifest) entries_.push_back({relative, content.size(), hex64(fnv1a64(content))});
}

void RunDir::write_json(const std::string& relative, const nlohmann::json& j,
                        bool in_manifest) {
    write_text(relative, j.dump(2) + "\n", in_manifest);
}

void RunDir::add_existing(const std::string& relative) {
    std::ifstream in(path_of(relative), std::ios::binary);
    if (!in) throw IoError("cannot read back " + path_of(relative));
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    entries_.push_back({relative, content.size(), hex64(fnv1a64(content))});
}

void RunDir::write_manifest() {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.path < b.path; });
    nlohmann::json artifacts = nlohmann::json::array();
    for (const Entry& e : entries_) {
        artifacts.push_back({{"path", e.path}, {"bytes", e.bytes}, {"fnv1a64", e.fnv1a64}});
    }
    nlohmann::json j;
    j["artifacts"] = artifacts;
    write_json("manifest.json", j, false);
}

void RunDir::write_failed_marker(const std::string& message) {
    write_text("FAILED", message + "\n", false);
}

}  // namespace fatml::cli
