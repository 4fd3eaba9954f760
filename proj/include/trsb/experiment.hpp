#ifndef TRSB_EXPERIMENT_HPP
#define TRSB_EXPERIMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "trsb/types.hpp"

// Declarative experiment runner. A config file drives one named experiment;
// identical config + seed produces byte-identical output files (12 significant
// digits, '.' decimal separator, LF line endings, fixed column order).
//
// Config format: `key = value` lines with optional [section] headers and
// '#' comments. Keys resolve to "section.key". Overrides are applied on top.

namespace trsb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& name = "<config>");

    void apply_override(const std::string& key_equals_value);

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int_or(const std::string& key, long fallback) const;

    /// All keys, sorted (for the resolved-config provenance log).
    std::vector<std::pair<std::string, std::string>> items() const;

    /// Every key the run actually read, with the value used (defaults
    /// included), sorted. Written to resolved_config.txt for provenance.
    std::vector<std::pair<std::string, std::string>> resolved_items() const;

    /// Error mentioning the key's source line.
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

    /// Keys read so far; unknown leftovers are reported as config errors.
    void mark_consumed(const std::string& key) const;
    void check_all_consumed() const;

private:
    struct Entry {
        std::string value;
        int line = 0;  // 0 = override
    };
    std::string name_;
    std::map<std::string, Entry> entries_;
    mutable std::map<std::string, bool> consumed_;
    mutable std::map<std::string, std::string> resolved_;
};

struct RunOptions {
    std::vector<std::string> overrides;
    std::string out_dir;   // overrides the config's `out`
    std::string units;     // overrides the config's `units`
    bool has_seed = false;
    std::uint64_t seed = 0;
};

/// Run the experiment described by the config. Returns the list of files
/// written. Throws ConfigError / InvariantError (mapped to exit codes 2 / 3
/// by the CLI).
std::vector<std::string> run_experiment(const ConfigFile& config, const RunOptions& options);

std::string format_sig(double value);  // %.12g

}  // namespace trsb

#endif
