#include "modesel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace modesel {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out, std::chars_format::general);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

void Dataset::validate() const {
    if (d < 1) throw DataError("dataset has zero feature dimension");
    if (classes < 2) throw DataError("dataset needs at least 2 classes");
    if (features.size() != n * d) throw DataError("feature matrix shape mismatch");
    if (labels.size() != n) throw DataError("label count mismatch");
    std::vector<std::size_t> seen(static_cast<std::size_t>(classes), 0);
    for (std::size_t i = 0; i < n; ++i) {
        int y = labels[i];
        if (y < 0 || y >= classes)
            throw DataError("label out of range at row " + std::to_string(i));
        ++seen[static_cast<std::size_t>(y)];
    }
    for (int c = 0; c < classes; ++c) {
        if (seen[static_cast<std::size_t>(c)] == 0)
            throw DataError("class " + std::to_string(c) + " has zero samples");
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!std::isfinite(features[i]))
            throw DataError("non-finite feature at row " + std::to_string(i / d) +
                            ", column " + std::to_string(i % d));
    }
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    const auto header = split_line(line);

    std::size_t label_col = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]) == label_column) {
            label_col = j;
            break;
        }
    }
    if (label_col == header.size())
        throw DataError("label column '" + label_column + "' not found in " + path);

    Dataset ds;
    ds.d = header.size() - 1;
    if (ds.d < 1) throw DataError("no feature columns in " + path);

    std::unordered_map<std::string, int> label_ids;  // dense remap, first appearance
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        for (std::size_t j = 0, f = 0; j < cells.size(); ++j) {
            if (j == label_col) continue;
            double v;
            if (!parse_double(trim(cells[j]), v))
                throw DataError("non-numeric feature cell at row " + std::to_string(row + 1) +
                                ", column " + std::to_string(j + 1) + " ('" + trim(cells[j]) + "')");
            if (!std::isfinite(v))
                throw DataError("non-finite feature cell at row " + std::to_string(row + 1) +
                                ", column " + std::to_string(j + 1));
            ds.features.push_back(v);
            ++f;
        }
        const std::string raw_label = trim(cells[label_col]);
        auto it = label_ids.find(raw_label);
        if (it == label_ids.end()) {
            it = label_ids.emplace(raw_label, static_cast<int>(ds.label_names.size())).first;
            ds.label_names.push_back(raw_label);
        }
        ds.labels.push_back(it->second);
        ++row;
    }
    ds.n = row;
    ds.classes = static_cast<int>(ds.label_names.size());
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t j = 0; j < ds.d; ++j) out << "f" << j << ",";
    out << label_column << "\n";
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < ds.d; ++j)
            out << format_double(ds.features[i * ds.d + j]) << ",";
        const int y = ds.labels[i];
        if (static_cast<std::size_t>(y) < ds.label_names.size())
            out << ds.label_names[static_cast<std::size_t>(y)];
        else
            out << y;
        out << "\n";
    }
}

namespace {
constexpr char kMagic[5] = {'M', 'S', 'E', 'L', '1'};

template <typename T>
void write_le(std::ofstream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = (v >> (8 * i)) & 0xff;
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}
}  // namespace

void save_binary(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_le<std::uint64_t>(out, ds.n);
    write_le<std::uint64_t>(out, ds.d);
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.classes));
    for (double v : ds.features) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_le<std::uint32_t>(out, bits);
    }
    for (int y : ds.labels) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(y));
}

Dataset load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0)
        throw DataError("bad magic in " + path + " (expected MSEL1)");
    Dataset ds;
    ds.n = read_le<std::uint64_t>(in);
    ds.d = read_le<std::uint64_t>(in);
    ds.classes = static_cast<int>(read_le<std::uint64_t>(in));
    ds.features.resize(ds.n * ds.d);
    for (auto& v : ds.features) {
        std::uint32_t bits = read_le<std::uint32_t>(in);
        float f;
        std::memcpy(&f, &bits, 4);
        v = static_cast<double>(f);
    }
    ds.labels.resize(ds.n);
    for (auto& y : ds.labels) y = static_cast<int>(read_le<std::uint32_t>(in));
    if (!in) throw DataError("truncated file: " + path);
    ds.label_names.resize(static_cast<std::size_t>(ds.classes));
    for (int c = 0; c < ds.classes; ++c) ds.label_names[static_cast<std::size_t>(c)] = std::to_string(c);
    ds.validate();
    return ds;
}

void standardize_columns(Dataset& ds) {
    for (std::size_t j = 0; j < ds.d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < ds.n; ++i) mean += ds.features[i * ds.d + j];
        mean /= static_cast<double>(ds.n);
        double var = 0.0;
        for (std::size_t i = 0; i < ds.n; ++i) {
            const double c = ds.features[i * ds.d + j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(ds.n);
        const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        for (std::size_t i = 0; i < ds.n; ++i)
            ds.features[i * ds.d + j] = (ds.features[i * ds.d + j] - mean) * scale;
    }
    ds.standardized = true;
}

std::vector<std::size_t> allocate_largest_remainder(std::span<const std::size_t> group_sizes,
                                                    std::size_t count) {
    const std::size_t total =
        std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
    const std::size_t g = group_sizes.size();
    std::vector<std::size_t> alloc(g, 0);
    if (total == 0 || count == 0) return alloc;

    std::vector<double> frac(g, 0.0);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < g; ++c) {
        const double quota = static_cast<double>(count) * static_cast<double>(group_sizes[c]) /
                             static_cast<double>(total);
        alloc[c] = static_cast<std::size_t>(std::floor(quota));
        alloc[c] = std::min(alloc[c], group_sizes[c]);
        frac[c] = quota - std::floor(quota);
        assigned += alloc[c];
    }
    std::vector<std::size_t> order(g);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        if (alloc[a] != alloc[b]) return alloc[a] < alloc[b];
        return a < b;
    });
    std::size_t k = 0;
    while (assigned < count) {
        const std::size_t c = order[k % g];
        if (alloc[c] < group_sizes[c]) {
            ++alloc[c];
            ++assigned;
        }
        ++k;
        if (k > g * (count + 1)) break;  // all groups saturated
    }
    return alloc;
}

SplitSpec split_pool_val(const Dataset& ds, double val_fraction, std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw DataError("val_fraction must lie in (0,1)");
    if (val_fraction * static_cast<double>(ds.n) < static_cast<double>(ds.classes))
        throw DataError("validation split too small to stratify over " +
                        std::to_string(ds.classes) + " classes");

    std::vector<IndexVec> by_class(static_cast<std::size_t>(ds.classes));
    for (std::size_t i = 0; i < ds.n; ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

    std::vector<std::size_t> sizes(by_class.size());
    for (std::size_t c = 0; c < by_class.size(); ++c) sizes[c] = by_class[c].size();
    const auto total_val =
        static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(ds.n)));
    const auto val_counts = allocate_largest_remainder(sizes, total_val);

    SplitSpec split;
    split.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i < val_counts[c])
                split.val.push_back(members[i]);
            else
                split.pool.push_back(members[i]);
        }
    }
    std::sort(split.pool.begin(), split.pool.end());
    std::sort(split.val.begin(), split.val.end());
    return split;
}

IndexVec stratified_sample(const Dataset& ds, IndexSpan from, std::size_t count,
                           std::uint64_t seed) {
    if (count > from.size())
        throw DataError("stratified sample of " + std::to_string(count) +
                        " exceeds pool size " + std::to_string(from.size()));

    std::vector<IndexVec> by_class(static_cast<std::size_t>(ds.classes));
    for (std::size_t i : from) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

    std::vector<std::size_t> sizes(by_class.size());
    for (std::size_t c = 0; c < by_class.size(); ++c) sizes[c] = by_class[c].size();
    const auto alloc = allocate_largest_remainder(sizes, count);

    IndexVec out;
    out.reserve(count);
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < alloc[c]; ++i) out.push_back(members[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> class_frequencies(const Dataset& ds, IndexSpan subset) {
    std::vector<double> counts(static_cast<std::size_t>(ds.classes), 0.0);
    for (std::size_t i : subset) counts[static_cast<std::size_t>(ds.labels[i])] += 1.0;
    return counts;
}

std::uint64_t dataset_hash(const Dataset& ds) {
    std::string_view feat(reinterpret_cast<const char*>(ds.features.data()),
                          ds.features.size() * sizeof(double));
    std::string_view lab(reinterpret_cast<const char*>(ds.labels.data()),
                         ds.labels.size() * sizeof(int));
    return splitmix64(fnv1a64(feat) ^ (fnv1a64(lab) * 0x9e3779b97f4a7c15ULL));
}

}  // namespace modesel
