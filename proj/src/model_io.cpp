#include "kcache/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kcache {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_model(const ModelFile& mf, std::ostream& out) {
    if (mf.models.empty()) throw std::invalid_argument("save_model: no models");
    const SvmModel& first = mf.models.front();
    const std::size_t k = mf.models.size();

    // Support vectors are shared across models, keyed by training index.
    std::map<int, const SparseInstance*> sv_union;
    for (const SvmModel& m : mf.models) {
        if (m.sv_indices.size() != m.coef.size())
            throw std::invalid_argument("save_model: model missing training indices");
        for (std::size_t i = 0; i < m.sv_indices.size(); ++i)
            sv_union.emplace(m.sv_indices[i], &m.support_vectors[i]);
    }

    out << "svm_type c_svc\n";
    out << "kernel_type " << to_string(first.params.kind) << '\n';
    out << "gamma " << fmt(first.params.gamma) << '\n';
    out << "coef0 " << fmt(first.params.coef0) << '\n';
    out << "nr_class " << (mf.multi ? k : 2) << '\n';
    out << "total_sv " << sv_union.size() << '\n';
    out << "rho";
    for (const SvmModel& m : mf.models) out << ' ' << fmt(m.rho);
    out << '\n';
    out << "label";
    if (mf.multi) {
        for (const SvmModel& m : mf.models) out << ' ' << fmt(m.positive_label);
    } else {
        out << ' ' << fmt(first.positive_label) << ' ' << fmt(first.negative_label);
    }
    out << '\n';
    out << "SV\n";
    for (const auto& [train_idx, inst] : sv_union) {
        for (const SvmModel& m : mf.models) {
            double coef = 0.0;
            for (std::size_t i = 0; i < m.sv_indices.size(); ++i) {
                if (m.sv_indices[i] == train_idx) {
                    coef = m.coef[i];
                    break;
                }
            }
            out << fmt(coef) << ' ';
        }
        for (std::size_t fi = 0; fi < inst->features.size(); ++fi) {
            if (fi > 0) out << ' ';
            out << inst->features[fi].index << ':' << fmt(inst->features[fi].value);
        }
        out << '\n';
    }
}

void save_model_file(const ModelFile& mf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    save_model(mf, out);
}

ModelFile load_model(std::istream& in) {
    ModelFile mf;
    KernelParams params;
    std::vector<double> rhos;
    std::vector<double> labels;
    std::size_t total_sv = 0;
    long nr_class = 0;

    std::string line;
    bool in_sv = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "SV") {
            in_sv = true;
            break;
        } else if (key == "svm_type") {
            std::string v;
            ls >> v;
            if (v != "c_svc") throw std::runtime_error("load_model: unsupported svm_type " + v);
        } else if (key == "kernel_type") {
            std::string v;
            ls >> v;
            params.kind = kernel_kind_from_string(v);
        } else if (key == "gamma") {
            ls >> params.gamma;
        } else if (key == "coef0") {
            ls >> params.coef0;
        } else if (key == "nr_class") {
            ls >> nr_class;
        } else if (key == "total_sv") {
            ls >> total_sv;
        } else if (key == "rho") {
            double v;
            while (ls >> v) rhos.push_back(v);
        } else if (key == "label") {
            double v;
            while (ls >> v) labels.push_back(v);
        } else {
            throw std::runtime_error("load_model: unexpected header line: " + line);
        }
    }
    if (!in_sv) throw std::runtime_error("load_model: missing SV section");
    if (rhos.empty()) throw std::runtime_error("load_model: missing rho");

    const std::size_t k = rhos.size();
    mf.multi = k > 1;
    mf.models.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        mf.models[j].params = params;
        mf.models[j].rho = rhos[j];
        if (mf.multi) {
            if (labels.size() != k) throw std::runtime_error("load_model: label count mismatch");
            mf.models[j].positive_label = labels[j];
            mf.models[j].negative_label = std::numeric_limits<double>::quiet_NaN();
        } else {
            if (labels.size() != 2) throw std::runtime_error("load_model: label count mismatch");
            mf.models[j].positive_label = labels[0];
            mf.models[j].negative_label = labels[1];
        }
    }

    std::size_t sv_lines = 0;
    int synthetic_index = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> coefs(k);
        for (std::size_t j = 0; j < k; ++j) {
            if (!(ls >> coefs[j])) throw std::runtime_error("load_model: bad SV line: " + line);
        }
        SparseInstance inst;
        std::string tok;
        int prev = 0;
        while (ls >> tok) {
            std::size_t colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("load_model: bad SV feature: " + tok);
            int idx = std::stoi(tok.substr(0, colon));
            double val = std::stod(tok.substr(colon + 1));
            if (idx <= prev) throw std::runtime_error("load_model: non-increasing SV index");
            prev = idx;
            inst.features.push_back({idx, val});
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (coefs[j] != 0.0) {
                mf.models[j].coef.push_back(coefs[j]);
                mf.models[j].support_vectors.push_back(inst);
                mf.models[j].sv_indices.push_back(synthetic_index);
            }
        }
        ++synthetic_index;
        ++sv_lines;
    }
    if (sv_lines != total_sv)
        throw std::runtime_error("load_model: SV count does not match total_sv");
    return mf;
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace kcache
