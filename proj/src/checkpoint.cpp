#include "tpplab/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tpplab/errors.hpp"

namespace tpplab {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw IoError(std::string("checkpoint: bad shape for ") + what);
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw IoError(std::string("checkpoint: bad shape for ") + what);
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index n, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
        throw IoError(std::string("checkpoint: bad shape for ") + what);
    }
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

} // namespace

nlohmann::json config_to_json(const RnnConfig& cfg) {
    nlohmann::json j;
    j["widths"] = cfg.widths;
    j["link"] = link_name(cfg.link);
    j["interp"] = interp_name(cfg.interp);
    j["l_f"] = cfg.l_f;
    j["u_f"] = cfg.u_f;
    j["quad_refine"] = cfg.quad_refine;
    return j;
}

RnnConfig config_from_json(const nlohmann::json& j) {
    RnnConfig cfg;
    cfg.widths = j.at("widths").get<std::vector<int>>();
    cfg.link = link_from_name(j.at("link").get<std::string>());
    cfg.interp = interp_from_name(j.at("interp").get<std::string>());
    cfg.l_f = j.at("l_f").get<double>();
    cfg.u_f = j.at("u_f").get<double>();
    if (j.contains("quad_refine")) cfg.quad_refine = j.at("quad_refine").get<int>();
    validate_config(cfg);
    return cfg;
}

nlohmann::json params_to_json(const RnnParams& p) {
    nlohmann::json j;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : p.layers) {
        nlohmann::json lj;
        lj["Wx"] = matrix_to_json(layer.Wx);
        lj["Wh"] = matrix_to_json(layer.Wh);
        lj["b"] = vector_to_json(layer.b);
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["Wout"] = vector_to_json(p.Wout.transpose());
    j["bout"] = p.bout;
    j["alpha_naive"] = p.alpha_naive;
    return j;
}

RnnParams params_from_json(const RnnConfig& cfg, const nlohmann::json& j) {
    RnnParams p = zeros_params(cfg);
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != p.layers.size()) {
        throw IoError("checkpoint: layer count does not match config");
    }
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& lj = layers[l];
        p.layers[l].Wx = matrix_from_json(lj.at("Wx"), p.layers[l].Wx.rows(),
                                          p.layers[l].Wx.cols(), "Wx");
        p.layers[l].Wh = matrix_from_json(lj.at("Wh"), p.layers[l].Wh.rows(),
                                          p.layers[l].Wh.cols(), "Wh");
        p.layers[l].b = vector_from_json(lj.at("b"), p.layers[l].b.size(), "b");
    }
    p.Wout = vector_from_json(j.at("Wout"), p.Wout.size(), "Wout").transpose();
    p.bout = j.at("bout").get<double>();
    p.alpha_naive = j.at("alpha_naive").get<double>();
    return p;
}

void save_checkpoint(const std::string& path, const RnnConfig& cfg, const RnnParams& p,
                     const nlohmann::json& extra) {
    nlohmann::json doc;
    doc["tool"] = kToolVersion;
    doc["config"] = config_to_json(cfg);
    doc["params"] = params_to_json(p);
    if (!extra.empty()) doc["meta"] = extra;
    write_text_file(path, doc.dump(2) + "\n");
}

nlohmann::json load_checkpoint(const std::string& path, RnnConfig& cfg, RnnParams& p) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    try {
        cfg = config_from_json(doc.at("config"));
        p = params_from_json(cfg, doc.at("params"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return doc;
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const nlohmann::json& j) {
    const std::uint64_t h = fnv1a_hash(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << contents;
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace tpplab
