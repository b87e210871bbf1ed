#pragma once

#include <map>
#include <string>
#include <vector>

namespace rbspec {

// Flat key/value table of physical constants loaded from a text file.
// Lines look like "rb87.A_5S12  3417.341305452  MHz"; everything after the
// value is ignored, '#' starts a comment.
class ConstantsTable {
public:
    ConstantsTable() = default;

    // Parse a constants file. Throws ConfigError on unreadable file,
    // malformed line, or duplicate key.
    static ConstantsTable load(const std::string& path);

    // Look up one value; throws ConfigError if the key is absent.
    double get(const std::string& key) const;

    bool has(const std::string& key) const;

    // Trailing text after the value on the key's line (units, source note);
    // empty when the key is absent or bare.
    std::string note(const std::string& key) const;

    // All keys in file order (useful for dumping).
    const std::vector<std::string>& keys() const { return order_; }

    const std::string& source_path() const { return path_; }

private:
    std::map<std::string, double> values_;
    std::map<std::string, std::string> notes_;
    std::vector<std::string> order_;
    std::string path_;
};

// Process-wide constants table. First access loads from, in order of
// preference: the path set via load_constants(), the RBSPEC_CONSTANTS
// environment variable, or the compiled-in default location.
const ConstantsTable& constants();

// Replace the global table by loading the given file. Call before the first
// constants() use (or to switch tables between computations).
void load_constants(const std::string& path);

} // namespace rbspec
