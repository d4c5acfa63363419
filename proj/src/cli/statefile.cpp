#include "cohassist/cli/statefile.hpp"

#include <fstream>
#include <sstream>

namespace cohassist::cli {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

double number_from(const json& j, const char* what) {
    if (!j.is_number()) parse_error(std::string(what) + " must be a number");
    return j.get<double>();
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) parse_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) parse_error("complex entries must be [re, im] pairs");
    return {number_from(j[0], "real part"), number_from(j[1], "imaginary part")};
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json vector_to_json(std::span<const cplx> v) {
    json out = json::array();
    for (const cplx& z : v) out.push_back(complex_to_json(z));
    return out;
}

json matrix_to_json(const ComplexMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        out.push_back(std::move(row));
    }
    return out;
}

StateFile parse_state_file(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        parse_error(e.what());
    }
    if (!doc.is_object()) parse_error("state file must be a JSON object");
    if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() <= 0) {
        parse_error("\"dim\" must be a positive integer");
    }
    if (!doc.contains("matrix") || !doc["matrix"].is_array()) parse_error("\"matrix\" must be an array of rows");

    StateFile s;
    s.dim = doc["dim"].get<std::size_t>();
    const json& rows = doc["matrix"];
    if (rows.size() != s.dim) parse_error("\"matrix\" must have dim rows");
    std::vector<cplx> data;
    data.reserve(s.dim * s.dim);
    for (const json& row : rows) {
        if (!row.is_array() || row.size() != s.dim) parse_error("every matrix row must have dim entries");
        for (const json& e : row) data.push_back(complex_from_json(e));
    }
    try {
        s.matrix = ComplexMatrix(s.dim, s.dim, std::move(data));
    } catch (const Error& e) {
        parse_error(e.what());
    }
    if (doc.contains("label")) {
        if (!doc["label"].is_string()) parse_error("\"label\" must be a string");
        s.label = doc["label"].get<std::string>();
    }
    if (doc.contains("comment")) {
        if (!doc["comment"].is_string()) parse_error("\"comment\" must be a string");
        s.comment = doc["comment"].get<std::string>();
    }
    return s;
}

json state_file_to_json(const StateFile& s) {
    json out = {{"dim", s.dim}, {"matrix", matrix_to_json(s.matrix)}};
    if (!s.label.empty()) out["label"] = s.label;
    if (!s.comment.empty()) out["comment"] = s.comment;
    return out;
}

json ensemble_to_json(const PureEnsemble& ens) {
    json members = json::array();
    for (const auto& m : ens.members()) {
        members.push_back({{"weight", m.weight}, {"amplitudes", vector_to_json(m.state.amplitudes())}});
    }
    return {{"members", std::move(members)}};
}

PureEnsemble ensemble_from_json(const json& j, double tol) {
    if (!j.is_object() || !j.contains("members") || !j["members"].is_array()) {
        parse_error("ensemble must be an object with a \"members\" array");
    }
    std::vector<EnsembleMember> members;
    for (const json& m : j["members"]) {
        if (!m.is_object() || !m.contains("weight") || !m.contains("amplitudes") || !m["amplitudes"].is_array()) {
            parse_error("ensemble member needs \"weight\" and \"amplitudes\"");
        }
        ComplexVector amps;
        for (const json& a : m["amplitudes"]) amps.push_back(complex_from_json(a));
        members.push_back({number_from(m["weight"], "weight"), PureState::from_amplitudes(std::move(amps), tol)});
    }
    return PureEnsemble::make(std::move(members), tol);
}

}  // namespace cohassist::cli
