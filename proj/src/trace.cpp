#include "kcache/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace kcache {

void AccessTrace::validate() const {
    std::int64_t prev_iter = 0;
    std::int64_t prev_seq = -1;
    std::unordered_set<int> in_iteration;
    for (const TraceEvent& e : events) {
        if (e.iteration < prev_iter) throw std::runtime_error("trace: iterations must be non-decreasing");
        if (e.seq <= prev_seq) throw std::runtime_error("trace: seq must be strictly increasing");
        if (e.row_index < 0 || e.row_index >= n)
            throw std::runtime_error("trace: row index " + std::to_string(e.row_index) + " outside universe");
        if (e.iteration != prev_iter) in_iteration.clear();
        if (!in_iteration.insert(e.row_index).second)
            throw std::runtime_error("trace: duplicate row " + std::to_string(e.row_index) +
                                     " in iteration " + std::to_string(e.iteration));
        prev_iter = e.iteration;
        prev_seq = e.seq;
    }
    if (prev_iter > total_iterations)
        throw std::runtime_error("trace: event iteration exceeds declared total");
}

void write_trace(const AccessTrace& trace, std::ostream& out) {
    out << "# n=" << trace.n << " q=" << trace.q << " iterations=" << trace.total_iterations << '\n';
    for (const TraceEvent& e : trace.events) out << e.iteration << ',' << e.row_index << '\n';
}

void write_trace_file(const AccessTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    write_trace(trace, out);
}

AccessTrace read_trace(std::istream& in) {
    AccessTrace trace;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trace: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    long long n = 0, q = 0, iters = 0;
    if (std::sscanf(line.c_str(), "# n=%lld q=%lld iterations=%lld", &n, &q, &iters) != 3)
        throw std::runtime_error("trace: bad header line: " + line);
    trace.n = n;
    trace.q = static_cast<int>(q);
    trace.total_iterations = iters;

    std::int64_t seq = 0;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        long long iteration = 0, row = 0;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%lld,%lld%c", &iteration, &row, &extra) != 2)
            throw std::runtime_error("trace: bad event at line " + std::to_string(line_no));
        trace.events.push_back({iteration, static_cast<int>(row), seq++});
    }
    trace.validate();
    return trace;
}

AccessTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return read_trace(in);
}

ReuseLevel classify_reuse_interval(std::int64_t r, std::int64_t s) {
    if (r <= 0) throw std::invalid_argument("reuse interval must be > 0");
    if (s <= 0) throw std::invalid_argument("cache capacity must be > 0");
    if (r < s) return ReuseLevel::small;
    if (r < 2 * s) return ReuseLevel::medium;
    if (r < 3 * s) return ReuseLevel::large;
    return ReuseLevel::huge;
}

int stage_of_iteration(std::int64_t iteration, std::int64_t total_iterations, int stages) {
    if (total_iterations <= 0 || stages < 1) throw std::invalid_argument("bad stage arguments");
    std::int64_t stage = (iteration * stages + total_iterations - 1) / total_iterations;
    return static_cast<int>(std::clamp<std::int64_t>(stage, 1, stages));
}

std::vector<StageCdf> reuse_interval_cdf_by_stage(const AccessTrace& trace, int stages,
                                                  std::int64_t s, IntervalUnit unit) {
    if (stages < 1) throw std::invalid_argument("stages must be >= 1");
    if (trace.events.empty()) throw std::runtime_error("trace is empty");

    std::vector<std::array<std::int64_t, 4>> hist(stages, {0, 0, 0, 0});
    std::vector<std::int64_t> last_iter(trace.n, -1);
    std::vector<std::int64_t> last_pos(trace.n, -1);
    std::int64_t repeated = 0;
    for (std::size_t pos = 0; pos < trace.events.size(); ++pos) {
        const TraceEvent& e = trace.events[pos];
        if (last_iter[e.row_index] >= 0) {
            std::int64_t r = unit == IntervalUnit::iterations
                                 ? e.iteration - last_iter[e.row_index]
                                 : static_cast<std::int64_t>(pos) - last_pos[e.row_index];
            if (r > 0) {
                int stage = stage_of_iteration(e.iteration, trace.total_iterations, stages);
                hist[stage - 1][static_cast<int>(classify_reuse_interval(r, s))]++;
                ++repeated;
            }
        }
        last_iter[e.row_index] = e.iteration;
        last_pos[e.row_index] = static_cast<std::int64_t>(pos);
    }
    if (repeated == 0) throw std::runtime_error("trace has no repeated access");

    std::vector<StageCdf> out(stages);
    for (int t = 0; t < stages; ++t) {
        out[t].stage = t + 1;
        std::int64_t total = hist[t][0] + hist[t][1] + hist[t][2] + hist[t][3];
        out[t].samples = total;
        std::int64_t running = 0;
        for (int level = 0; level < 4; ++level) {
            running += hist[t][level];
            out[t].cumulative[level] = total > 0 ? static_cast<double>(running) / total : 0.0;
        }
    }
    return out;
}

std::map<std::int64_t, std::int64_t> frequency_difference_by_stage(const AccessTrace& trace,
                                                                   int stages) {
    if (stages < 2) throw std::invalid_argument("stages must be >= 2");
    if (trace.events.empty()) throw std::runtime_error("trace is empty");

    std::vector<std::vector<std::int64_t>> freq(stages, std::vector<std::int64_t>(trace.n, 0));
    for (const TraceEvent& e : trace.events) {
        int stage = stage_of_iteration(e.iteration, trace.total_iterations, stages);
        freq[stage - 1][e.row_index]++;
    }
    std::map<std::int64_t, std::int64_t> hist;
    for (int t = 0; t + 1 < stages; ++t) {
        for (std::int64_t item = 0; item < trace.n; ++item) {
            std::int64_t diff = freq[t + 1][item] - freq[t][item];
            hist[diff < 0 ? -diff : diff]++;
        }
    }
    return hist;
}

void write_stage_cdf_csv(const std::vector<StageCdf>& cdfs, std::ostream& out) {
    char buf[32];
    out << "stage,level,cumulative_fraction\n";
    for (const StageCdf& c : cdfs) {
        for (int level = 0; level < 4; ++level) {
            std::snprintf(buf, sizeof(buf), "%.6f", c.cumulative[level]);
            out << c.stage << ',' << kReuseLevelNames[level] << ',' << buf << '\n';
        }
    }
}

void write_frequency_difference_csv(const std::map<std::int64_t, std::int64_t>& hist,
                                    std::ostream& out) {
    out << "difference,count\n";
    for (const auto& [diff, count] : hist) out << diff << ',' << count << '\n';
}

}  // namespace kcache
