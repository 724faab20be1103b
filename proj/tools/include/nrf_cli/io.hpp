#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "nrf/lti.hpp"
#include "nrf/simulation.hpp"

namespace nrf::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Matrices are stored as {"rows", "cols", "data"} with row-major data so
/// that empty shapes survive the round trip. Nested row arrays are accepted
/// on input.
json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& what);

json to_json(const Realization& r);
Realization realization_from_json(const json& j, const std::string& what);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);
void write_text(const fs::path& path, const std::string& text);

/// printf("%.17g"), which round-trips every double.
std::string format_double(double v);

/// Columns x_1.., uf_1.., u_1.., w_1.., one row per time step.
void write_trace_csv(const fs::path& path, const LoopTrace& t);
std::string trace_csv(const LoopTrace& t);

/// One row per time step, `dim` comma-separated numbers per row. A header
/// row is skipped if it does not parse as numbers.
SignalTrace read_signal_csv(const fs::path& path, int dim);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace nrf::cli
