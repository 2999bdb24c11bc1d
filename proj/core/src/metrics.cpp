#include "pvgan/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "pvgan/errors.hpp"

namespace pvgan {

namespace {

void check_pair(const std::vector<VoxelGrid>& samples, const std::vector<Condition>& conditions) {
    require(!samples.empty() && samples.size() == conditions.size(),
            "metrics: one sample per condition required");
    const int n = conditions.front().n_conditions;
    require(samples.size() == static_cast<std::size_t>(n),
            "metrics: condition set incomplete");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const Condition& c : conditions) {
        require(c.n_conditions == n, "metrics: mixed condition families");
        require(!seen[static_cast<std::size_t>(c.index)], "metrics: duplicate condition");
        seen[static_cast<std::size_t>(c.index)] = true;
    }
    const int r = samples.front().resolution();
    for (const VoxelGrid& g : samples)
        require(g.resolution() == r, "metrics: sample resolutions differ");
}

}  // namespace

double aad(const std::vector<VoxelGrid>& samples, const std::vector<Condition>& conditions) {
    check_pair(samples, conditions);
    const std::vector<VoxelGrid> aligned = align(samples, conditions);
    const VoxelGrid merged = merge(aligned);
    const auto m = merged.values();
    double total = 0.0;
    for (const VoxelGrid& s : aligned) {
        const auto v = s.values();
        double diff = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            diff += std::abs(static_cast<double>(v[i]) - static_cast<double>(m[i]));
        total += diff / static_cast<double>(v.size());
    }
    return total / static_cast<double>(aligned.size());
}

double avar(const std::vector<VoxelGrid>& samples, const std::vector<Condition>& conditions,
            int* degenerate) {
    check_pair(samples, conditions);
    const std::vector<VoxelGrid> aligned = align(samples, conditions);
    const VoxelGrid merged = merge(aligned);
    const auto m = merged.values();
    double total = 0.0;
    for (const VoxelGrid& s : aligned) {
        const auto v = s.values();
        std::size_t occupied = 0, intersect = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] > 0.5f) {
                ++occupied;
                if (m[i] > 0.5f) ++intersect;
            }
        }
        if (occupied == 0) {
            if (degenerate != nullptr) ++*degenerate;
            continue;  // contributes 0
        }
        total += static_cast<double>(intersect) / static_cast<double>(occupied);
    }
    return total / static_cast<double>(aligned.size());
}

namespace detail {

void finalize_report(PairReport& report) {
    const auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    report.batch_aad = mean(report.per_latent_aad);
    report.batch_avar = mean(report.per_latent_avar);
}

}  // namespace detail

std::string format_report_table(const std::vector<std::pair<std::string, PairReport>>& rows) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-20s %10s %10s %8s %11s\n", "method", "AAD", "AVAR", "latents",
                  "degenerate");
    out += buf;
    for (const auto& [label, report] : rows) {
        std::snprintf(buf, sizeof(buf), "%-20s %10.6f %10.6f %8zu %11d\n", label.c_str(),
                      report.batch_aad, report.batch_avar, report.per_latent_aad.size(),
                      report.degenerate_count);
        out += buf;
    }
    return out;
}

std::string format_report_records(const std::string& label, const PairReport& report) {
    std::string out = "# label\tlatent\taad\tavar\n";
    char buf[160];
    for (std::size_t i = 0; i < report.per_latent_aad.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s\t%zu\t%.9g\t%.9g\n", label.c_str(), i,
                      report.per_latent_aad[i], report.per_latent_avar[i]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%s\tmean\t%.9g\t%.9g\n", label.c_str(), report.batch_aad,
                  report.batch_avar);
    out += buf;
    return out;
}

void write_report_records(const std::filesystem::path& path, const std::string& label,
                          const PairReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open report file for writing: " + path.string());
    out << format_report_records(label, report);
    if (!out) throw IoError("write failed on report file: " + path.string());
}

}  // namespace pvgan
