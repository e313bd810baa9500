#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dpgd/io.hpp"
#include "support.hpp"

#include <sstream>

using namespace dpgd;
using namespace dpgd::testing;

TEST_CASE("instance JSON round-trips bit for bit") {
  const auto inst = small_pnorm(4.0, 5, 50, 21);
  const auto back = instance_from_json(nlohmann::json::parse(instance_to_json(inst).dump()));
  CHECK(back.kind == inst.kind);
  CHECK(back.p == inst.p);
  CHECK(back.A == inst.A);
  CHECK(back.b == inst.b);
  CHECK(back.x0 == inst.x0);
  CHECK(back.seed == inst.seed);
}

TEST_CASE("box instance keeps its radii and cost") {
  const auto inst = box_instance(3, 0.1, Vec::Unit(3, 1));
  const auto back = instance_from_json(instance_to_json(inst));
  CHECK(back.kind == ProblemKind::exp_penalty);
  CHECK(back.tau == 0.1);
  CHECK(*back.inradius == 1.0);
  CHECK(*back.circumradius == *inst.circumradius);
  CHECK(back.c == inst.c);
}

TEST_CASE("instance files on disk") {
  const auto path = std::filesystem::temp_directory_path() / "dpgd_test_io_instance.json";
  const auto inst = small_pnorm(3.0, 3, 30, 4);
  save_instance(inst, path);
  const auto back = load_instance(path);
  CHECK(back.A == inst.A);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_instance(path), std::runtime_error);
}

TEST_CASE("malformed instances are rejected") {
  using nlohmann::json;
  auto good = instance_to_json(small_pnorm(4.0, 2, 10, 1));
  SUBCASE("ragged matrix") {
    good["A"][3] = json::array({1.0});
    CHECK_THROWS(instance_from_json(good));
  }
  SUBCASE("dimension mismatch") {
    good["d"] = 3;
    CHECK_THROWS(instance_from_json(good));
  }
  SUBCASE("unknown kind") {
    good["kind"] = "lasso";
    CHECK_THROWS(instance_from_json(good));
  }
  SUBCASE("rank deficient") {
    for (std::size_t i = 0; i < good["A"].size(); ++i) good["A"][i][1] = good["A"][i][0];
    CHECK_THROWS_AS(instance_from_json(good), AssumptionViolation);
  }
}

TEST_CASE("trace CSV round-trips exactly") {
  IterateTrace<double> trace;
  Rng rng(3);
  for (long i = 0; i < 20; ++i) {
    IterateRecord<double> r;
    r.iter = i;
    r.f_val = rng.gaussian() * 1e7;
    r.k_gap = std::ldexp(rng.uniform(), -static_cast<int>(i) * 3);
    r.grad_norm = 1.0 / 3.0 + i;
    r.L_inv = std::ldexp(1.0, static_cast<int>(i) - 5);
    r.grad_evals = 2 * i + 1;
    r.wall_ms = 0.1 * static_cast<double>(i);
    trace.records.push_back(r);
  }
  trace.records[4].k_gap = 0.0;
  trace.records[5].f_val = -0.0;
  std::stringstream ss;
  write_trace_csv(ss, trace);
  const auto rows = read_trace_csv(ss);
  REQUIRE(rows.size() == trace.records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].iter == trace.records[i].iter);
    CHECK(rows[i].f_val == trace.records[i].f_val);
    CHECK(rows[i].k_gap == trace.records[i].k_gap);
    CHECK(rows[i].grad_norm == trace.records[i].grad_norm);
    CHECK(rows[i].L_inv == trace.records[i].L_inv);
    CHECK(rows[i].grad_evals == trace.records[i].grad_evals);
    CHECK(rows[i].wall_ms == trace.records[i].wall_ms);
  }
}

TEST_CASE("trace CSV schema") {
  std::stringstream ss;
  write_trace_csv(ss, IterateTrace<double>{});
  std::string header;
  std::getline(ss, header);
  CHECK(header == "iter,f_val,k_gap,grad_norm,L_inv,grad_evals,wall_ms");
  std::stringstream bad("iter,f_val\n0,1\n");
  CHECK_THROWS_AS(read_trace_csv(bad), std::runtime_error);
  std::stringstream short_row(std::string(kTraceCsvHeader) + "\n0,1,2\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), std::runtime_error);
}

TEST_CASE("format_double uses 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}
