#ifndef MODESEL_CONFIG_HPP
#define MODESEL_CONFIG_HPP

#include <map>
#include <string>

#include "modesel/selection.hpp"

namespace modesel {

/// Full run description: one config file determines one run.
struct Config {
    std::string dataset_path;
    std::string dataset_format = "csv";  // csv | binary
    std::string label_column = "label";
    bool standardize = false;
    double val_fraction = 0.1;
    double test_fraction = 0.0;
    std::uint64_t split_seed = 0;  // defaults to run.seed when absent
    std::string method = "mode";
    RunConfig run;
    std::string output_dir;
};

/// Flat-section key/value text, one `key = value` per line:
///
///   [dataset]
///   path = data.csv
///   [run]
///   method = mode
///   budget = 0.3
///
/// `#` starts a comment. Unknown keys are rejected.
Config parse_config_file(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& origin = "<memory>");

/// Section-qualified key -> value dump, for the manifest echo.
std::map<std::string, std::string> config_echo(const Config& cfg);

}  // namespace modesel

#endif
