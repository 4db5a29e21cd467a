#include "twincal/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "twincal/errors.hpp"

namespace twincal {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
    return j;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, "cannot write file");
    out << j.dump(2) << '\n';
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw ParseError(path, "expected a two dimensional array");
    }
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) {
            throw ParseError(path, "ragged two dimensional array");
        }
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    return v;
}

json multiplex_to_json(const MultiplexConfig& m) {
    json j;
    j["bin_probabilities"] = m.bin_probabilities;
    j["max_photons"] = m.max_photons;
    return j;
}

MultiplexConfig multiplex_from_json(const json& j, const std::string& path) {
    MultiplexConfig m;
    if (!j.contains("bin_probabilities")) {
        throw ParseError(path, "detector entry lacks bin_probabilities");
    }
    m.bin_probabilities = j.at("bin_probabilities").get<std::vector<double>>();
    m.max_photons = j.value("max_photons", 0);
    return m;
}

// detector block in a config file: either a bin count (uniform splitting) or
// explicit bin probabilities; the photon range comes from the truncation
MultiplexConfig detector_geometry(const json& parent, const char* name,
                                  const std::string& path, int truncation) {
    if (!parent.contains(name)) {
        throw ParseError(path, std::string("missing ") + name);
    }
    const json& d = parent.at(name);
    MultiplexConfig m;
    m.max_photons = truncation - 1;
    if (d.contains("bin_probabilities")) {
        m.bin_probabilities = d.at("bin_probabilities").get<std::vector<double>>();
    } else if (d.contains("bins")) {
        const int bins = d.at("bins").get<int>();
        if (bins < 1) throw ParseError(path, std::string(name) + ": bins must be positive");
        m.bin_probabilities.assign(bins, 1.0 / bins);
    } else {
        throw ParseError(path, std::string(name) + ": needs bins or bin_probabilities");
    }
    return m;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    const json j = load_json(path);
    ExperimentConfig cfg;
    try {
        cfg.source.truncation = j.value("truncation", 9);
        cfg.trials = j.value("trials", 1LL);
        cfg.rng_seed = j.value("seed", std::uint64_t{0});
        cfg.background1 = j.value("background1", 0.0);
        cfg.background2 = j.value("background2", 0.0);

        if (!j.contains("source")) throw ParseError(path, "missing source");
        const json& s = j.at("source");
        const std::string kind = s.value("kind", "tmsv");
        if (kind == "tmsv") {
            cfg.source.kind = SourceKind::TwoModeSqueezedVacuum;
            cfg.source.lambda = s.value("lambda", 0.0);
            cfg.source.pump_power = s.value("pump_power", -1.0);
        } else if (kind == "poissonian") {
            cfg.source.kind = SourceKind::PoissonianCorrelated;
            cfg.source.mean_pairs = s.value("mean_pairs", 0.0);
        } else if (kind == "custom") {
            cfg.source.kind = SourceKind::CustomDiagonal;
            if (!s.contains("diagonal")) throw ParseError(path, "custom source needs diagonal");
            cfg.source.custom = s.at("diagonal").get<std::vector<double>>();
        } else {
            throw ParseError(path, "unknown source kind: " + kind);
        }

        cfg.detector1.multiplex = detector_geometry(j, "detector1", path, cfg.source.truncation);
        cfg.detector2.multiplex = detector_geometry(j, "detector2", path, cfg.source.truncation);
        cfg.detector1.efficiency = j.at("detector1").value("efficiency", 1.0);
        cfg.detector2.efficiency = j.at("detector2").value("efficiency", 1.0);
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
    return cfg;
}

DetectorFileConfig load_detector_config(const std::string& path) {
    const json j = load_json(path);
    DetectorFileConfig cfg;
    try {
        cfg.truncation = j.value("truncation", 9);
        cfg.detector1 = detector_geometry(j, "detector1", path, cfg.truncation);
        cfg.detector2 = detector_geometry(j, "detector2", path, cfg.truncation);
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
    return cfg;
}

void save_click_histogram(const std::string& path, const ClickHistogramFile& file) {
    json j;
    if (file.data.trials > 0) {
        j["counts"] = matrix_to_json(file.data.entries);
        j["trials"] = file.data.trials;
    } else {
        j["probabilities"] = matrix_to_json(file.data.entries);
    }
    json meta;
    meta["truncation"] = file.truncation;
    meta["detector1"] = multiplex_to_json(file.detector1);
    meta["detector2"] = multiplex_to_json(file.detector2);
    if (!file.label.empty()) meta["label"] = file.label;
    if (!file.rng_algorithm.empty()) meta["rng"] = file.rng_algorithm;
    if (file.seeded) meta["seed"] = file.seed;
    meta["pair_overflow"] = file.pair_overflow;
    meta["tool_version"] = file.tool_version;
    j["metadata"] = meta;
    save_json(path, j);
}

ClickHistogramFile load_click_histogram(const std::string& path) {
    const json j = load_json(path);
    ClickHistogramFile file;
    try {
        if (j.contains("counts")) {
            file.data.entries = matrix_from_json(j.at("counts"), path);
            file.data.trials = j.value("trials", 0LL);
        } else if (j.contains("probabilities")) {
            file.data.entries = matrix_from_json(j.at("probabilities"), path);
            file.data.trials = 0;
        } else {
            throw ParseError(path, "histogram needs counts or probabilities");
        }
        if (!j.contains("metadata")) throw ParseError(path, "missing metadata");
        const json& meta = j.at("metadata");
        file.truncation = meta.value("truncation", 9);
        if (!meta.contains("detector1") || !meta.contains("detector2")) {
            throw ParseError(path, "metadata needs detector1 and detector2");
        }
        file.detector1 = multiplex_from_json(meta.at("detector1"), path);
        file.detector2 = multiplex_from_json(meta.at("detector2"), path);
        file.label = meta.value("label", "");
        file.rng_algorithm = meta.value("rng", "");
        file.seeded = meta.contains("seed");
        if (file.seeded) file.seed = meta.at("seed").get<std::uint64_t>();
        file.pair_overflow = meta.value("pair_overflow", 0LL);
        file.tool_version = meta.value("tool_version", "");
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
    return file;
}

void save_result(const std::string& path, const ResultFile& file) {
    json r;
    r["eta1"] = file.result.eta1;
    r["eta2"] = file.result.eta2;
    r["residual"] = file.result.residual;
    r["evaluations"] = file.result.evaluations;
    r["ambiguous"] = file.result.ambiguous;
    r["flat_parameters"] = file.result.flat_parameters;
    r["fitted_diagonal"] = vector_to_json(file.result.fitted_diagonal);
    r["state_diagonal"] = vector_to_json(file.result.c.diagonal);

    json s;
    s["grid"] = file.settings.grid;
    s["simplex_tolerance"] = file.settings.simplex_tolerance;
    s["max_evaluations"] = file.settings.max_evaluations;
    s["flat_tolerance"] = file.settings.flat_tolerance;

    json j;
    j["result"] = r;
    j["settings"] = s;
    j["truncation"] = file.truncation;
    j["input_digest"] = file.input_digest;
    j["timing_ms"] = file.timing_ms;
    j["tool_version"] = file.tool_version;
    save_json(path, j);
}

ResultFile load_result(const std::string& path) {
    const json j = load_json(path);
    ResultFile file;
    try {
        const json& r = j.at("result");
        file.result.eta1 = r.at("eta1").get<double>();
        file.result.eta2 = r.at("eta2").get<double>();
        file.result.residual = r.value("residual", 0.0);
        file.result.evaluations = r.value("evaluations", 0);
        file.result.ambiguous = r.value("ambiguous", false);
        file.result.flat_parameters = r.value("flat_parameters", std::vector<std::string>{});
        if (r.contains("fitted_diagonal")) {
            file.result.fitted_diagonal = vector_from_json(r.at("fitted_diagonal"));
        }
        if (r.contains("state_diagonal")) {
            file.result.c.diagonal = vector_from_json(r.at("state_diagonal"));
        }
        if (j.contains("settings")) {
            const json& s = j.at("settings");
            file.settings.grid = s.value("grid", 21);
            file.settings.simplex_tolerance = s.value("simplex_tolerance", 1e-6);
            file.settings.max_evaluations = s.value("max_evaluations", 4000);
            file.settings.flat_tolerance = s.value("flat_tolerance", 1e-9);
        }
        file.truncation = j.value("truncation", 9);
        file.input_digest = j.value("input_digest", "");
        file.timing_ms = j.value("timing_ms", 0.0);
        file.tool_version = j.value("tool_version", "");
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
    return file;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, "cannot write file");
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out << ',';
        out << columns[i];
    }
    out << '\n';
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            std::snprintf(buf, sizeof buf, "%.12g", row[i]);
            out << buf;
        }
        out << '\n';
    }
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::uint64_t hash = 14695981039346656037ULL;
    char chunk[4096];
    while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 1099511628211ULL;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace twincal
