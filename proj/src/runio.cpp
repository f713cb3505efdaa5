#include "modesel/runio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace modesel {

namespace {

constexpr const char* kVersion = "0.1.0";

double cell_to_double(const std::string& s) {
    double v;
    const char* begin = s.data();
    auto [ptr, ec] = std::from_chars(begin, begin + s.size(), v);
    if (ec != std::errc{} || ptr != begin + s.size())
        throw DataError("bad numeric cell '" + s + "'");
    return v;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

}  // namespace

void write_manifest(const std::string& dir, const Config& cfg, const Dataset& ds,
                    const SelectionRun& run) {
    nlohmann::json j;
    j["tool"] = "modesel";
    j["version"] = kVersion;
    j["method"] = method_name(run.method);
    j["seed"] = cfg.run.seed;
    j["dataset_hash"] = dataset_hash(ds);
    j["dataset"] = {{"n", ds.n}, {"d", ds.d}, {"classes", ds.classes},
                    {"standardized", ds.standardized}};
    j["embedding_dim"] = run.embedding_dim;
    j["config"] = config_echo(cfg);
    nlohmann::json results;
    results["selected"] = run.selected.size();
    results["rounds"] = run.rounds.size();
    results["final_val_accuracy"] = run.final_val_accuracy;
    if (!std::isnan(run.final_test_accuracy))
        results["final_test_accuracy"] = run.final_test_accuracy;
    results["total_distance_evals"] = run.total_distance_evals;
    results["total_model_score_evals"] = run.total_model_score_evals;
    results["total_model_score_cache_hits"] = run.total_model_score_cache_hits;
    j["results"] = results;
    auto out = open_out(dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

void write_selected_csv(const std::string& dir, const SelectionRun& run) {
    auto out = open_out(dir + "/selected.csv");
    out << "round,sample_id\n";
    for (std::size_t i = 0; i < run.selected.size(); ++i)
        out << run.selected_round[i] << "," << run.selected[i] << "\n";
}

namespace {
constexpr const char* kRoundsHeader =
    "round,coreset_size,temp,w_u,w_d,w_c,w_b,r_u,r_d,r_c,r_b,g_u,g_d,g_c,g_b,"
    "flag_u,flag_d,flag_c,flag_b,p_base,val_acc,model_score_evals,model_score_cache_hits,"
    "distance_evals,wall_ms";
}

void write_rounds_csv(const std::string& dir, const SelectionRun& run) {
    auto out = open_out(dir + "/rounds.csv");
    out << kRoundsHeader << "\n";
    for (const auto& r : run.rounds) {
        out << r.round << "," << r.coreset_size << "," << format_double(r.temperature);
        for (double v : r.weights) out << "," << format_double(v);
        for (double v : r.rewards) out << "," << format_double(v);
        for (double v : r.gains) out << "," << format_double(v);
        for (double v : r.flagged_fraction) out << "," << format_double(v);
        out << "," << format_double(r.p_base) << "," << format_double(r.val_accuracy);
        out << "," << r.model_score_evals << "," << r.model_score_cache_hits << ","
            << r.distance_evals << "," << format_double(r.wall_ms) << "\n";
    }
}

void write_weights_csv(const std::string& dir, const SelectionRun& run) {
    auto out = open_out(dir + "/weights.csv");
    out << "round,temp,w_u,w_d,w_c,w_b,r_u,r_d,r_c,r_b,val_acc\n";
    for (const auto& r : run.rounds) {
        out << r.round << "," << format_double(r.temperature);
        for (double v : r.weights) out << "," << format_double(v);
        for (double v : r.rewards) out << "," << format_double(v);
        out << "," << format_double(r.val_accuracy) << "\n";
    }
}

void write_run_outputs(const std::string& dir, const Config& cfg, const Dataset& ds,
                       const SelectionRun& run) {
    write_manifest(dir, cfg, ds, run);
    write_selected_csv(dir, run);
    write_rounds_csv(dir, run);
    write_weights_csv(dir, run);
}

std::vector<std::pair<int, std::size_t>> read_selected_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || split_cells(line).size() != 2)
        throw DataError("bad selected.csv header in " + path);
    std::vector<std::pair<int, std::size_t>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != 2) throw DataError("bad row in " + path);
        rows.emplace_back(static_cast<int>(cell_to_double(cells[0])),
                          static_cast<std::size_t>(cell_to_double(cells[1])));
    }
    return rows;
}

std::vector<RoundLog> read_rounds_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty rounds.csv: " + path);
    if (split_cells(line).size() != split_cells(kRoundsHeader).size())
        throw DataError("unexpected rounds.csv header in " + path);
    std::vector<RoundLog> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != split_cells(kRoundsHeader).size())
            throw DataError("bad row in " + path);
        RoundLog r;
        std::size_t c = 0;
        r.round = static_cast<int>(cell_to_double(cells[c++]));
        r.coreset_size = static_cast<std::size_t>(cell_to_double(cells[c++]));
        r.temperature = cell_to_double(cells[c++]);
        for (double& v : r.weights) v = cell_to_double(cells[c++]);
        for (double& v : r.rewards) v = cell_to_double(cells[c++]);
        for (double& v : r.gains) v = cell_to_double(cells[c++]);
        for (double& v : r.flagged_fraction) v = cell_to_double(cells[c++]);
        r.p_base = cell_to_double(cells[c++]);
        r.val_accuracy = cell_to_double(cells[c++]);
        r.model_score_evals = static_cast<std::uint64_t>(cell_to_double(cells[c++]));
        r.model_score_cache_hits = static_cast<std::uint64_t>(cell_to_double(cells[c++]));
        r.distance_evals = static_cast<std::uint64_t>(cell_to_double(cells[c++]));
        r.wall_ms = cell_to_double(cells[c++]);
        rows.push_back(r);
    }
    return rows;
}

RunSummary read_manifest_summary(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw DataError("missing manifest.json in " + dir);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("corrupt manifest in " + dir + ": " + e.what());
    }
    RunSummary s;
    try {
        s.method = j.at("method").get<std::string>();
        s.seed = j.at("seed").get<std::uint64_t>();
        const auto& results = j.at("results");
        s.final_val_accuracy = results.at("final_val_accuracy").get<double>();
        s.selected = results.at("selected").get<std::size_t>();
        if (results.contains("final_test_accuracy")) {
            s.final_test_accuracy = results.at("final_test_accuracy").get<double>();
            s.has_test = true;
        }
    } catch (const std::exception& e) {
        throw DataError("corrupt manifest in " + dir + ": " + e.what());
    }
    return s;
}

std::vector<MethodAggregate> aggregate_runs(const std::vector<RunSummary>& summaries) {
    std::vector<MethodAggregate> rows;
    for (const auto& s : summaries) {
        MethodAggregate* row = nullptr;
        for (auto& r : rows)
            if (r.method == s.method) row = &r;
        if (!row) {
            rows.push_back(MethodAggregate{});
            row = &rows.back();
            row->method = s.method;
        }
        ++row->runs;
        row->mean_val += s.final_val_accuracy;
        if (s.has_test) {
            row->mean_test += s.final_test_accuracy;
            row->has_test = true;
        }
    }
    for (auto& r : rows) {
        r.mean_val /= static_cast<double>(r.runs);
        if (r.has_test) r.mean_test /= static_cast<double>(r.runs);
    }
    for (const auto& s : summaries) {
        for (auto& r : rows) {
            if (r.method != s.method) continue;
            const double dv = s.final_val_accuracy - r.mean_val;
            r.std_val += dv * dv;
            if (s.has_test) {
                const double dt = s.final_test_accuracy - r.mean_test;
                r.std_test += dt * dt;
            }
        }
    }
    for (auto& r : rows) {
        r.std_val = r.runs > 1 ? std::sqrt(r.std_val / static_cast<double>(r.runs - 1)) : 0.0;
        r.std_test = r.runs > 1 ? std::sqrt(r.std_test / static_cast<double>(r.runs - 1)) : 0.0;
    }
    return rows;
}

namespace {
std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}
}  // namespace

std::string render_report_markdown(const std::vector<MethodAggregate>& rows) {
    const MethodAggregate* baseline = nullptr;
    for (const auto& r : rows)
        if (r.method == "random") baseline = &r;

    std::ostringstream out;
    out << "| method | runs | val acc (%) | test acc (%) | delta vs random (pp) |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out << "| " << r.method << " | " << r.runs << " | " << pct(r.mean_val) << " ± "
            << pct(r.std_val) << " | ";
        if (r.has_test)
            out << pct(r.mean_test) << " ± " << pct(r.std_test);
        else
            out << "-";
        out << " | ";
        if (baseline)
            out << pct(r.mean_val - baseline->mean_val);
        else
            out << "-";
        out << " |\n";
    }
    return out.str();
}

std::string render_report_csv(const std::vector<MethodAggregate>& rows) {
    const MethodAggregate* baseline = nullptr;
    for (const auto& r : rows)
        if (r.method == "random") baseline = &r;
    std::ostringstream out;
    out << "method,runs,mean_val,std_val,mean_test,std_test,delta_vs_random\n";
    for (const auto& r : rows) {
        out << r.method << "," << r.runs << "," << format_double(r.mean_val) << ","
            << format_double(r.std_val) << ",";
        if (r.has_test)
            out << format_double(r.mean_test) << "," << format_double(r.std_test);
        else
            out << ",";
        out << ",";
        if (baseline) out << format_double(r.mean_val - baseline->mean_val);
        out << "\n";
    }
    return out.str();
}

}  // namespace modesel
