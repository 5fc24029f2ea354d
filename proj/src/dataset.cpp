#include "kcache/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kcache {

double SparseInstance::dot(const SparseInstance& other) const {
    double sum = 0.0;
    auto a = features.begin();
    auto b = other.features.begin();
    while (a != features.end() && b != other.features.end()) {
        if (a->index == b->index) {
            sum += a->value * b->value;
            ++a;
            ++b;
        } else if (a->index < b->index) {
            ++a;
        } else {
            ++b;
        }
    }
    return sum;
}

double SparseInstance::self_dot() const {
    double sum = 0.0;
    for (const Feature& f : features) sum += f.value * f.value;
    return sum;
}

namespace {

[[noreturn]] void parse_fail(long line_no, const std::string& what) {
    throw std::runtime_error("libsvm parse error at line " + std::to_string(line_no) + ": " + what);
}

double parse_real(const std::string& tok, long line_no) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        parse_fail(line_no, "non-numeric token '" + tok + "'");
    }
    if (pos != tok.size()) parse_fail(line_no, "non-numeric token '" + tok + "'");
    if (!std::isfinite(v)) parse_fail(line_no, "non-finite value '" + tok + "'");
    return v;
}

int parse_index(const std::string& tok, long line_no) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        parse_fail(line_no, "bad feature index '" + tok + "'");
    long v = 0;
    try {
        v = std::stol(tok);
    } catch (const std::exception&) {
        parse_fail(line_no, "bad feature index '" + tok + "'");
    }
    if (v < 1) parse_fail(line_no, "feature index must be >= 1, got '" + tok + "'");
    return static_cast<int>(v);
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
    Dataset ds;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        double label = parse_real(tok, line_no);

        SparseInstance inst;
        int prev_index = 0;
        while (ls >> tok) {
            std::size_t colon = tok.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
                parse_fail(line_no, "expected <idx>:<val>, got '" + tok + "'");
            int idx = parse_index(tok.substr(0, colon), line_no);
            double val = parse_real(tok.substr(colon + 1), line_no);
            if (idx <= prev_index)
                parse_fail(line_no, "non-increasing feature index " + std::to_string(idx));
            prev_index = idx;
            inst.features.push_back({idx, val});
            ds.dim = std::max(ds.dim, idx);
        }
        ds.instances.push_back(std::move(inst));
        ds.labels.push_back(label);
    }
    if (ds.instances.empty()) throw std::runtime_error("empty dataset");
    return ds;
}

Dataset parse_libsvm(const std::string& text) {
    std::istringstream in(text);
    return parse_libsvm(in);
}

Dataset load_libsvm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return parse_libsvm(in);
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
    char buf[64];
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", ds.labels[i]);
        out << buf;
        for (const Feature& f : ds.instances[i].features) {
            std::snprintf(buf, sizeof(buf), "%.17g", f.value);
            out << ' ' << f.index << ':' << buf;
        }
        out << '\n';
    }
}

std::vector<double> binarize_labels(const Dataset& ds, double target) {
    bool present = false;
    std::vector<double> y(ds.labels.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        if (ds.labels[i] == target) {
            y[i] = 1.0;
            present = true;
        } else {
            y[i] = -1.0;
        }
    }
    if (!present) throw std::runtime_error("label not present");
    return y;
}

std::vector<double> distinct_labels(const Dataset& ds) {
    std::vector<double> out;
    for (double l : ds.labels) {
        if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
    }
    return out;
}

}  // namespace kcache
