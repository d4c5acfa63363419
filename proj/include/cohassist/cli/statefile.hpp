#pragma once

// State and ensemble files: JSON documents whose complex numbers are [re, im] pairs.
//
//   {"dim": 2, "label": "...", "comment": "...",
//    "matrix": [[[0.5, 0], [0.25, 0]], [[0.25, 0], [0.5, 0]]]}
//
//   {"members": [{"weight": 0.75, "amplitudes": [[0.7071, 0], [0.7071, 0]]}, ...]}

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cohassist/states.hpp"

namespace cohassist::cli {

struct StateFile {
    std::size_t dim = 0;
    ComplexMatrix matrix;
    std::string label;
    std::string comment;
};

/// Throws Error(ParseError) on malformed documents. Does not validate the density matrix.
StateFile parse_state_file(std::string_view text);

/// Reads the whole file; throws ParseError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

cplx complex_from_json(const nlohmann::json& j);
nlohmann::json complex_to_json(cplx z);
nlohmann::json vector_to_json(std::span<const cplx> v);
nlohmann::json matrix_to_json(const ComplexMatrix& m);
nlohmann::json state_file_to_json(const StateFile& s);

nlohmann::json ensemble_to_json(const PureEnsemble& ens);
PureEnsemble ensemble_from_json(const nlohmann::json& j, double tol = kDefaultTol);

}  // namespace cohassist::cli
