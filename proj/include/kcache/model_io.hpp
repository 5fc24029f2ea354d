#ifndef KCACHE_MODEL_IO_HPP
#define KCACHE_MODEL_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "kcache/solver.hpp"

namespace kcache {

/// A trained model as written to disk: one binary model, or one-vs-all
/// models sharing the support-vector lines (one signed coefficient column
/// per model, zero when an instance is not a support vector of it).
struct ModelFile {
    std::vector<SvmModel> models;
    bool multi = false;  // argmax prediction over models when true
};

void save_model(const ModelFile& mf, std::ostream& out);
void save_model_file(const ModelFile& mf, const std::string& path);
ModelFile load_model(std::istream& in);
ModelFile load_model_file(const std::string& path);

}  // namespace kcache

#endif
