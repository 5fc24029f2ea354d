#ifndef KCACHE_DATASET_HPP
#define KCACHE_DATASET_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace kcache {

/// One (index, value) pair of a sparse feature vector. Indices are 1-based.
struct Feature {
    int index = 0;
    double value = 0.0;

    friend bool operator==(const Feature&, const Feature&) = default;
};

/// Sparse feature vector with strictly increasing indices.
struct SparseInstance {
    std::vector<Feature> features;

    /// Dot product with another sparse instance (two-pointer merge,
    /// ascending index order so the summation order is fixed).
    double dot(const SparseInstance& other) const;

    /// Dot product with itself.
    double self_dot() const;

    friend bool operator==(const SparseInstance&, const SparseInstance&) = default;
};

/// A parsed dataset: instances in input order plus their labels.
struct Dataset {
    std::vector<SparseInstance> instances;
    std::vector<double> labels;
    int dim = 0;  // max feature index observed (or overridden upward)

    int size() const { return static_cast<int>(instances.size()); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Parses LIBSVM text: one `<label> <idx>:<val>...` line per instance.
/// Lines starting with '#' are comments, blank lines are skipped.
/// Throws std::runtime_error naming the line number on malformed input,
/// or "empty dataset" if no data lines are present.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(const std::string& text);
Dataset load_libsvm_file(const std::string& path);

/// Writes a dataset back to LIBSVM text. Values are printed with enough
/// precision that re-parsing reproduces the dataset exactly.
void write_libsvm(const Dataset& ds, std::ostream& out);

/// One-vs-all label view: +1 where labels[i] == target, -1 elsewhere.
/// Throws if the target label does not occur.
std::vector<double> binarize_labels(const Dataset& ds, double target);

/// Distinct labels in order of first appearance.
std::vector<double> distinct_labels(const Dataset& ds);

}  // namespace kcache

#endif
