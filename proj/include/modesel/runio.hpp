#ifndef MODESEL_RUNIO_HPP
#define MODESEL_RUNIO_HPP

#include <string>
#include <vector>

#include "modesel/config.hpp"
#include "modesel/selection.hpp"

namespace modesel {

// Run artifacts: manifest.json (config echo, seed, dataset hash, results),
// selected.csv (round, sample_id), rounds.csv (per-round metrics), and
// weights.csv (controller trajectory).

void write_manifest(const std::string& dir, const Config& cfg, const Dataset& ds,
                    const SelectionRun& run);
void write_selected_csv(const std::string& dir, const SelectionRun& run);
void write_rounds_csv(const std::string& dir, const SelectionRun& run);
void write_weights_csv(const std::string& dir, const SelectionRun& run);
void write_run_outputs(const std::string& dir, const Config& cfg, const Dataset& ds,
                       const SelectionRun& run);

std::vector<std::pair<int, std::size_t>> read_selected_csv(const std::string& path);
std::vector<RoundLog> read_rounds_csv(const std::string& path);

struct RunSummary {
    std::string method;
    std::uint64_t seed = 0;
    double final_val_accuracy = 0.0;
    double final_test_accuracy = 0.0;
    bool has_test = false;
    std::size_t selected = 0;
};

RunSummary read_manifest_summary(const std::string& dir);

struct MethodAggregate {
    std::string method;
    std::size_t runs = 0;
    double mean_val = 0.0;
    double std_val = 0.0;
    double mean_test = 0.0;
    double std_test = 0.0;
    bool has_test = false;
};

std::vector<MethodAggregate> aggregate_runs(const std::vector<RunSummary>& summaries);

/// Markdown comparison table, one row per method, with a delta column against
/// the `random` baseline when present.
std::string render_report_markdown(const std::vector<MethodAggregate>& rows);
std::string render_report_csv(const std::vector<MethodAggregate>& rows);

}  // namespace modesel

#endif
