#include "dpgd/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpgd {

using nlohmann::json;

json vector_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vector_from_json(const json& j) {
  if (!j.is_array()) throw std::runtime_error("expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Mat matrix_from_json(const json& j) {
  if (!j.is_array()) throw std::runtime_error("expected a nested array (row-major matrix)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index(0) : static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::runtime_error("ragged matrix row " + std::to_string(i));
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json instance_to_json(const ProblemInstance& inst) {
  json j;
  j["kind"] = to_string(inst.kind);
  if (inst.kind == ProblemKind::exp_penalty) {
    j["tau"] = inst.tau;
  } else if (inst.kind == ProblemKind::pnorm || inst.kind == ProblemKind::power1d) {
    j["p"] = inst.p;
  }
  j["n"] = inst.n();
  j["d"] = inst.d();
  j["A"] = matrix_to_json(inst.A);
  j["b"] = vector_to_json(inst.b);
  if (inst.c.size() > 0) j["c"] = vector_to_json(inst.c);
  if (inst.P.size() > 0) j["P"] = matrix_to_json(inst.P);
  if (inst.inradius) j["r"] = *inst.inradius;
  if (inst.circumradius) j["R"] = *inst.circumradius;
  if (inst.x0.size() > 0) j["x0"] = vector_to_json(inst.x0);
  j["seed"] = inst.seed;
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  ProblemInstance inst;
  inst.kind = parse_problem_kind(j.at("kind").get<std::string>());
  if (j.contains("p")) inst.p = j["p"].get<double>();
  if (j.contains("tau")) inst.tau = j["tau"].get<double>();
  inst.A = matrix_from_json(j.at("A"));
  inst.b = vector_from_json(j.at("b"));
  if (j.contains("c")) inst.c = vector_from_json(j["c"]);
  if (j.contains("P")) inst.P = matrix_from_json(j["P"]);
  if (j.contains("r")) inst.inradius = j["r"].get<double>();
  if (j.contains("R")) inst.circumradius = j["R"].get<double>();
  if (j.contains("x0")) inst.x0 = vector_from_json(j["x0"]);
  if (j.contains("seed")) inst.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n") && j["n"].get<Eigen::Index>() != inst.A.rows())
    throw std::runtime_error("instance: n does not match A");
  if (j.contains("d") && j["d"].get<Eigen::Index>() != inst.A.cols())
    throw std::runtime_error("instance: d does not match A");
  validate_instance(inst);
  return inst;
}

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << instance_to_json(inst).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed instance file " + path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const IterateTrace<double>& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.iter << ',' << format_double(r.f_val) << ',' << format_double(r.k_gap) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.L_inv) << ',' << r.grad_evals << ','
        << format_double(r.wall_ms) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const IterateTrace<double>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<IterateRecord<double>> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader)
    throw std::runtime_error("trace CSV: unexpected header '" + line + "'");
  std::vector<IterateRecord<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw std::runtime_error("trace CSV: expected 7 columns in '" + line + "'");
    IterateRecord<double> r;
    r.iter = std::stol(cells[0]);
    r.f_val = std::strtod(cells[1].c_str(), nullptr);
    r.k_gap = std::strtod(cells[2].c_str(), nullptr);
    r.grad_norm = std::strtod(cells[3].c_str(), nullptr);
    r.L_inv = std::strtod(cells[4].c_str(), nullptr);
    r.grad_evals = std::stol(cells[5]);
    r.wall_ms = std::strtod(cells[6].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<IterateRecord<double>> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_trace_csv(in);
}

}  // namespace dpgd
