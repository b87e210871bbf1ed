#include "rbspec/constants.hpp"
#include "rbspec/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

namespace rbspec {

ConstantsTable ConstantsTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open constants file: " + path);

    ConstantsTable table;
    table.path_ = path;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);

        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue; // blank line

        double value;
        if (!(ss >> value)) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": expected numeric value after key '"
                << key << "'";
            throw ConfigError(msg.str());
        }
        if (table.values_.count(key)) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": duplicate key '" << key << "'";
            throw ConfigError(msg.str());
        }
        std::string note;
        std::getline(ss, note);
        const auto first = note.find_first_not_of(" \t");
        note = (first == std::string::npos) ? std::string() : note.substr(first);
        const auto last = note.find_last_not_of(" \t\r");
        if (last != std::string::npos) note.erase(last + 1);

        table.values_[key] = value;
        table.notes_[key] = note;
        table.order_.push_back(key);
    }
    return table;
}

double ConstantsTable::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("constant not found: " + key +
                          " (table from " + path_ + ")");
    return it->second;
}

bool ConstantsTable::has(const std::string& key) const {
    return values_.count(key) > 0;
}

std::string ConstantsTable::note(const std::string& key) const {
    auto it = notes_.find(key);
    return it == notes_.end() ? std::string() : it->second;
}

namespace {

std::mutex g_mutex;
ConstantsTable g_table;   // guarded by g_mutex
bool g_loaded = false;

std::string default_path() {
    if (const char* env = std::getenv("RBSPEC_CONSTANTS"))
        return env;
#ifdef RBSPEC_DEFAULT_CONSTANTS_PATH
    return RBSPEC_DEFAULT_CONSTANTS_PATH;
#else
    return "data/rb_constants.txt";
#endif
}

} // namespace

const ConstantsTable& constants() {
    std::lock_guard<std::mutex> lock(g_mutex);
    if (!g_loaded) {
        g_table = ConstantsTable::load(default_path());
        g_loaded = true;
    }
    return g_table;
}

void load_constants(const std::string& path) {
    ConstantsTable fresh = ConstantsTable::load(path); // may throw; keep old table then
    std::lock_guard<std::mutex> lock(g_mutex);
    g_table = std::move(fresh);
    g_loaded = true;
}

} // namespace rbspec
