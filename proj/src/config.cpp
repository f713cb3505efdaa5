#include "modesel/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace modesel {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& value) {
    double out;
    const char* begin = value.data();
    auto [ptr, ec] = std::from_chars(begin, begin + value.size(), out);
    if (ec != std::errc{} || ptr != begin + value.size())
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& value) {
    long long out;
    const char* begin = value.data();
    auto [ptr, ec] = std::from_chars(begin, begin + value.size(), out);
    if (ec != std::errc{} || ptr != begin + value.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& origin) {
    Config cfg;
    bool split_seed_set = false;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "dataset.path") cfg.dataset_path = value;
        else if (key == "dataset.format") cfg.dataset_format = value;
        else if (key == "dataset.label_column") cfg.label_column = value;
        else if (key == "dataset.standardize") cfg.standardize = to_bool(key, value);
        else if (key == "split.val_fraction") cfg.val_fraction = to_double(key, value);
        else if (key == "split.test_fraction") cfg.test_fraction = to_double(key, value);
        else if (key == "split.seed") {
            cfg.split_seed = static_cast<std::uint64_t>(to_int(key, value));
            split_seed_set = true;
        }
        else if (key == "run.method") cfg.method = value;
        else if (key == "run.budget") cfg.run.budget = to_double(key, value);
        else if (key == "run.init_fraction") cfg.run.init_fraction = to_double(key, value);
        else if (key == "run.round_fraction") cfg.run.round_fraction = to_double(key, value);
        else if (key == "run.seed") cfg.run.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "run.caching") cfg.run.caching = to_bool(key, value);
        else if (key == "run.dump_scores") cfg.run.dump_scores = to_bool(key, value);
        else if (key == "run.strategy_eval_k") cfg.run.strategy_eval_k = static_cast<int>(to_int(key, value));
        else if (key == "run.strategy_eval_epochs") cfg.run.strategy_eval_epochs = static_cast<int>(to_int(key, value));
        else if (key == "run.projection_dim") cfg.run.projection_dim = static_cast<std::size_t>(to_int(key, value));
        else if (key == "run.smoothing") cfg.run.smoothing = to_double(key, value);
        else if (key == "run.stream_epsilon") cfg.run.stream_epsilon = to_double(key, value);
        else if (key == "probe.epochs") cfg.run.probe_epochs = static_cast<int>(to_int(key, value));
        else if (key == "probe.lr") cfg.run.probe_lr = to_double(key, value);
        else if (key == "probe.batch") cfg.run.probe_batch = static_cast<int>(to_int(key, value));
        else if (key == "probe.cold_start") cfg.run.probe_cold_start = to_bool(key, value);
        else if (key == "controller.tau0") cfg.run.controller.tau0 = to_double(key, value);
        else if (key == "controller.alpha_decay") cfg.run.controller.alpha_decay = to_double(key, value);
        else if (key == "controller.beta_decay") cfg.run.controller.beta_decay = to_double(key, value);
        else if (key == "controller.tau_min") cfg.run.controller.tau_min = to_double(key, value);
        else if (key == "controller.eta") cfg.run.controller.eta = to_double(key, value);
        else if (key == "controller.gamma") cfg.run.controller.gamma = to_double(key, value);
        else if (key == "controller.delta") cfg.run.controller.delta = to_double(key, value);
        else if (key == "controller.history_window") cfg.run.controller.history_window = static_cast<int>(to_int(key, value));
        else if (key == "controller.use_weight_net") cfg.run.controller.use_weight_net = to_bool(key, value);
        else if (key == "output.dir") cfg.output_dir = value;
        else
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    if (!split_seed_set) cfg.split_seed = derive_seed(cfg.run.seed, "split");
    if (cfg.dataset_format != "csv" && cfg.dataset_format != "binary")
        throw ConfigError("dataset.format must be csv or binary");
    method_from_string(cfg.method);  // validates
    return cfg;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::map<std::string, std::string> config_echo(const Config& cfg) {
    std::map<std::string, std::string> echo;
    echo["dataset.path"] = cfg.dataset_path;
    echo["dataset.format"] = cfg.dataset_format;
    echo["dataset.label_column"] = cfg.label_column;
    echo["dataset.standardize"] = cfg.standardize ? "true" : "false";
    echo["split.val_fraction"] = format_double(cfg.val_fraction);
    echo["split.test_fraction"] = format_double(cfg.test_fraction);
    echo["split.seed"] = std::to_string(cfg.split_seed);
    echo["run.method"] = cfg.method;
    echo["run.budget"] = format_double(cfg.run.budget);
    echo["run.init_fraction"] = format_double(cfg.run.init_fraction);
    echo["run.round_fraction"] = format_double(cfg.run.round_fraction);
    echo["run.seed"] = std::to_string(cfg.run.seed);
    echo["run.caching"] = cfg.run.caching ? "true" : "false";
    echo["run.dump_scores"] = cfg.run.dump_scores ? "true" : "false";
    echo["run.strategy_eval_k"] = std::to_string(cfg.run.strategy_eval_k);
    echo["run.strategy_eval_epochs"] = std::to_string(cfg.run.strategy_eval_epochs);
    echo["run.projection_dim"] = std::to_string(cfg.run.projection_dim);
    echo["run.smoothing"] = format_double(cfg.run.smoothing);
    echo["run.stream_epsilon"] = format_double(cfg.run.stream_epsilon);
    echo["probe.epochs"] = std::to_string(cfg.run.probe_epochs);
    echo["probe.lr"] = format_double(cfg.run.probe_lr);
    echo["probe.batch"] = std::to_string(cfg.run.probe_batch);
    echo["probe.cold_start"] = cfg.run.probe_cold_start ? "true" : "false";
    echo["controller.tau0"] = format_double(cfg.run.controller.tau0);
    echo["controller.alpha_decay"] = format_double(cfg.run.controller.alpha_decay);
    echo["controller.beta_decay"] = format_double(cfg.run.controller.beta_decay);
    echo["controller.tau_min"] = format_double(cfg.run.controller.tau_min);
    echo["controller.eta"] = format_double(cfg.run.controller.eta);
    echo["controller.gamma"] = format_double(cfg.run.controller.gamma);
    echo["controller.delta"] = format_double(cfg.run.controller.delta);
    echo["controller.history_window"] = std::to_string(cfg.run.controller.history_window);
    echo["controller.use_weight_net"] = cfg.run.controller.use_weight_net ? "true" : "false";
    echo["output.dir"] = cfg.output_dir;
    return echo;
}

}  // namespace modesel
