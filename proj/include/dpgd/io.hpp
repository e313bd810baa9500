#pragma once

// Instance files (JSON) and iterate-trace CSV.

#include "dpgd/problems.hpp"
#include "dpgd/solver.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dpgd {

nlohmann::json instance_to_json(const ProblemInstance& inst);
/// Parses and validates (see validate_instance).
ProblemInstance instance_from_json(const nlohmann::json& j);

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

nlohmann::json vector_to_json(const Vec& v);
Vec vector_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j);

inline constexpr const char* kTraceCsvHeader = "iter,f_val,k_gap,grad_norm,L_inv,grad_evals,wall_ms";

/// Shortest-safe decimal: printf("%.17g").
std::string format_double(double v);

void write_trace_csv(std::ostream& out, const IterateTrace<double>& trace);
void write_trace_csv(const std::filesystem::path& path, const IterateTrace<double>& trace);
/// Reads rows written by write_trace_csv; throws std::runtime_error on schema mismatch.
std::vector<IterateRecord<double>> read_trace_csv(std::istream& in);
std::vector<IterateRecord<double>> read_trace_csv(const std::filesystem::path& path);

}  // namespace dpgd
