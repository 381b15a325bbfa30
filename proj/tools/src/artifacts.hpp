#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fatml::cli {

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t value);

std::string csv_escape(const std::string& field);

/// A run's output directory. Every file goes through here so the closing
/// manifest can list each artifact with its size and content hash. Files can
/// opt out of the manifest (timing logs, the manifest itself) when their
/// bytes legitimately differ between reruns of the same config.
class RunDir {
public:
    /// Creates the directory (parents included). Refuses to reuse a
    /// non-empty directory: stale files would poison the manifest.
    explicit RunDir(const std::string& root);

    const std::string& root() const { return root_; }
    std::string path_of(const std::string& relative) const;

    void write_text(const std::string& relative, const std::string& content,
                    bool in_manifest = true);
    void write_json(const std::string& relative, const nlohmann::json& j,
                    bool in_manifest = true);
    /// Hash and record a file that was written directly to disk.
    void add_existing(const std::string& relative);

    void write_manifest();
    void write_failed_marker(const std::string& message);

private:
    struct Entry {
        std::string path;  // relative, '/' separators
        size_t bytes = 0;
        std::string fnv1a64;
    };

    std::string root_;
    std::vector<Entry> entries_;
};

}  // namespace fatml::cli
