#pragma once

// On-disk interchange: the CmDocument JSON format for Gaussian states and
// the JSON rendering of harness reports.
//
// CmDocument schema:
//   {
//     "modes": N,
//     "ordering": "xxpp",
//     "partition": ["A", "B", ...],       // one label per mode
//     "V": [[...], ...],                  // 2N x 2N, row-major (rows nested
//                                         //  or a flat array of 4N^2)
//     "s": [...]                          // optional 2N mean, default zeros
//   }
// A document must parse to a valid quantum covariance matrix; the thrown
// message carries the validation report.

#include <gaussrt/harness.hpp>

#include <json.hpp>

#include <fstream>

namespace gaussrt {

// Fixed-width significant-digit formatting for command-line output.
inline std::string fmt_sig(double v, int digits = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline nlohmann::json cm_document(const GaussianState& st) {
    const int d = static_cast<int>(st.V.rows());
    nlohmann::json doc;
    doc["modes"] = st.modes();
    doc["ordering"] = "xxpp";
    doc["partition"] = st.partition.labels;
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < d; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < d; ++c) row.push_back(st.V(r, c));
        rows.push_back(std::move(row));
    }
    doc["V"] = std::move(rows);
    if (st.s.size() > 0 && st.s.cwiseAbs().maxCoeff() > 0.0) {
        nlohmann::json mean = nlohmann::json::array();
        for (int k = 0; k < st.s.size(); ++k) mean.push_back(st.s[k]);
        doc["s"] = std::move(mean);
    }
    return doc;
}

inline GaussianState parse_cm_document(const nlohmann::json& doc) {
    auto fail = [](const std::string& why) -> GaussianState {
        throw std::invalid_argument("CmDocument: " + why);
    };
    if (!doc.is_object()) return fail("document is not a JSON object");
    for (const char* key : {"modes", "ordering", "partition", "V"})
        if (!doc.contains(key)) return fail(std::string("missing field '") + key + "'");

    if (!doc["modes"].is_number_integer()) return fail("'modes' must be an integer");
    const int n = doc["modes"].get<int>();
    if (n < 1) return fail("'modes' must be positive");
    const int d = 2 * n;

    if (doc["ordering"] != "xxpp")
        return fail("'ordering' must be the literal \"xxpp\", got " + doc["ordering"].dump());

    if (!doc["partition"].is_array() || static_cast<int>(doc["partition"].size()) != n)
        return fail("'partition' must list one party label per mode");
    std::vector<std::string> labels;
    for (const auto& l : doc["partition"]) {
        if (!l.is_string() || l.get<std::string>().empty())
            return fail("party labels must be non-empty strings");
        labels.push_back(l.get<std::string>());
    }

    Mat V(d, d);
    const auto& jv = doc["V"];
    if (jv.is_array() && static_cast<int>(jv.size()) == d && jv[0].is_array()) {
        for (int r = 0; r < d; ++r) {
            if (static_cast<int>(jv[r].size()) != d)
                return fail("'V' row " + std::to_string(r) + " has wrong length");
            for (int c = 0; c < d; ++c) {
                if (!jv[r][c].is_number()) return fail("'V' entries must be numbers");
                V(r, c) = jv[r][c].get<double>();
            }
        }
    } else if (jv.is_array() && static_cast<int>(jv.size()) == d * d) {
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                if (!jv[r * d + c].is_number()) return fail("'V' entries must be numbers");
                V(r, c) = jv[r * d + c].get<double>();
            }
    } else {
        return fail("'V' must be a " + std::to_string(d) + "x" + std::to_string(d) +
                    " nested array or a flat array of " + std::to_string(d * d));
    }

    Vec s = Vec::Zero(d);
    if (doc.contains("s")) {
        const auto& js = doc["s"];
        if (!js.is_array() || static_cast<int>(js.size()) != d)
            return fail("'s' must be an array of length " + std::to_string(d));
        for (int k = 0; k < d; ++k) {
            if (!js[k].is_number()) return fail("'s' entries must be numbers");
            s[k] = js[k].get<double>();
        }
    }

    const QcmReport rep = validate_qcm(V);
    if (!rep.valid)
        return fail("'V' is not a valid quantum covariance matrix: " + rep.reason +
                    " (symmetry error " + fmt_sig(rep.symmetry_error) + ", min eigenvalue of V "
                    "+ i Omega " + fmt_sig(rep.min_eigenvalue) + ")");

    return GaussianState{std::move(V), std::move(s), ModePartition(std::move(labels))};
}

inline GaussianState read_cm_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("CmDocument: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("CmDocument: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_cm_document(doc);
}

inline void write_cm_document(const std::string& path, const GaussianState& st) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("CmDocument: cannot write '" + path + "'");
    out << cm_document(st).dump(2) << "\n";
}

inline nlohmann::json to_json(const CaseResult& c) {
    return {{"label", c.label},
            {"passed", c.passed},
            {"observed", c.observed},
            {"bound", c.bound},
            {"detail", c.detail}};
}

inline nlohmann::json to_json(const SuiteReport& rep) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : rep.cases) cases.push_back(to_json(c));
    return {{"experiment", rep.experiment}, {"theory", rep.theory},
            {"seed", rep.seed},             {"passed", rep.passed},
            {"cases", std::move(cases)},    {"conclusion", rep.conclusion}};
}

}  // namespace gaussrt
